//! Instance corpus, oracles, the end-to-end pipeline and its documents.

mod emit;
mod oracle;
mod random;
mod spec;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::group::Subgroup;
use crate::pattern::{
    assign_labels, class_order, corner_analysis, metric, nestedness_check, parity_and_coloring, property_b,
    square_analysis, MetricTable, SetFamily, TrackSystem,
};
use crate::tree::{build_tree, stabilizer_analysis, tree_metric_and_separation, DualTree};
use crate::window::{build_base_set, build_family, build_window, hypothesis_report, BaseSet, VertexFamily, Window};

pub use emit::{emit_dot, emit_report, write_atomic};
pub use oracle::{
    oracle_labelings, oracle_orientations, LabellingOracle, OrientationOracle, LABELLING_TRACK_LIMIT,
    LABELLING_VERTEX_LIMIT, ORIENTATION_CLASS_LIMIT,
};
pub use random::{random_family, MAX_FAMILY, MAX_RANDOM_CLASSES, MAX_UNIVERSE};
pub use spec::{
    Expectations, ExpectedKSpec, ExplicitSpec, FamilySpec, GeneratorsSpec, GroupInstance, GroupKindSpec, GroupSpec,
    InstanceSpec, WindowSpec,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HarnessError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("instance too large for the oracle: {0}")]
    TooLarge(String),
}

pub(crate) const CORPUS: [(&str, &str); 4] = [
    ("E1", include_str!("../../instances/e1.toml")),
    ("E2", include_str!("../../instances/e2.toml")),
    ("E3", include_str!("../../instances/e3.toml")),
    ("E4", include_str!("../../instances/e4.toml")),
];

pub(crate) const CROSSING: &str = include_str!("../../instances/crossing.toml");

/// The built-in instances E1 to E4.
pub fn corpus() -> Vec<InstanceSpec> {
    CORPUS.iter().map(|(_, text)| InstanceSpec::parse(text).expect("corpus parses")).collect()
}

pub fn corpus_instance(name: &str) -> Option<InstanceSpec> {
    corpus().into_iter().find(|s| s.name.eq_ignore_ascii_case(name))
}

/// The explicit crossing family on `{a, b}`.
pub fn crossing_instance() -> InstanceSpec {
    InstanceSpec::parse(CROSSING).expect("crossing instance parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Skipped,
    Fail,
    Uncertified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
    /// Non-empty for every failing or uncertified check.
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessEntry {
    pub check: String,
    pub witness: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub omega: Option<usize>,
    pub family: usize,
    pub cosets: usize,
    pub classes: usize,
    pub class_sizes: Vec<usize>,
    pub tree_vertices: Option<usize>,
    pub tree_edges: Option<usize>,
    pub reduced_vertices: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub instance: String,
    pub status: Status,
    pub counts: Counts,
    pub checks: Vec<Check>,
    pub witnesses: Vec<WitnessEntry>,
    /// Empty unless timings were requested, so that reports are reproducible.
    pub timing_ms: BTreeMap<String, u64>,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// 0 pass, 2 property violation, 3 certification failure.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass | Status::Skipped => 0,
            Status::Fail => 2,
            Status::Uncertified => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub timings: bool,
}

/// Everything a run produced, for emitting documents and further checks.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub system: Option<TrackSystem>,
    pub tree: Option<DualTree>,
    pub orientation_oracle: Option<OrientationOracle>,
    pub labelling_oracle: Option<LabellingOracle>,
}

struct Recorder {
    checks: Vec<Check>,
    timings: BTreeMap<String, u64>,
    clock: Instant,
    keep_timings: bool,
}

impl Recorder {
    fn push(&mut self, name: &str, status: Status, detail: impl Into<String>, witness: impl Into<String>) {
        let mut witness = witness.into();
        if matches!(status, Status::Fail | Status::Uncertified) && witness.is_empty() {
            witness = "no further witness".into();
        }
        self.checks.push(Check { name: name.into(), status, detail: detail.into(), witness });
    }

    fn verdict(&mut self, name: &str, ok: bool, detail: impl Into<String>, witness: impl Into<String>) {
        let status = if ok { Status::Pass } else { Status::Fail };
        let witness = if ok { String::new() } else { witness.into() };
        self.push(name, status, detail, witness);
    }

    fn skip(&mut self, name: &str, why: &str) {
        self.push(name, Status::Skipped, why, "");
    }

    fn lap(&mut self, stage: &str) {
        if self.keep_timings {
            self.timings.insert(stage.into(), self.clock.elapsed().as_millis() as u64);
        }
        self.clock = Instant::now();
    }
}

struct GroupStage {
    window: Window,
    base: BaseSet,
    family: VertexFamily,
    instance: GroupInstance,
}

/// Runs the pipeline: window, family, hypotheses, pattern, tree, action.
///
/// A certification failure stops the run with status `uncertified`;
/// property failures are recorded and the run continues.
pub fn run_instance(spec: &InstanceSpec, options: RunOptions) -> Result<RunOutput, HarnessError> {
    let mut rec =
        Recorder { checks: Vec::new(), timings: BTreeMap::new(), clock: Instant::now(), keep_timings: options.timings };
    let mut counts = Counts::default();
    let mut out = RunOutput {
        report: Report {
            instance: spec.name.clone(),
            status: Status::Pass,
            counts: Counts::default(),
            checks: Vec::new(),
            witnesses: Vec::new(),
            timing_ms: BTreeMap::new(),
        },
        system: None,
        tree: None,
        orientation_oracle: None,
        labelling_oracle: None,
    };

    let (family, group) = if let Some(e) = &spec.explicit {
        let fam = SetFamily::explicit(&e.universe, &e.vertices).map_err(|e| HarnessError::Parse(e.to_string()))?;
        (fam, None)
    } else {
        match group_stage(spec, &mut rec, &mut counts)? {
            Some(stage) => (SetFamily::from_vertex_family(&stage.window, &stage.family), Some(stage)),
            None => return Ok(finish(out, rec, counts)),
        }
    };
    rec.lap("family");

    let system = match TrackSystem::new(family) {
        Ok(s) => s,
        Err(e) => return Err(HarnessError::TooLarge(e.to_string())),
    };
    counts.family = system.num_vertices();
    counts.cosets = system.num_tracks();
    counts.classes = system.classes().len();
    counts.class_sizes = system.class_sizes();

    let nested = match nestedness_check(&system) {
        Ok(()) => {
            rec.verdict("nestedness", true, format!("{} cosets pairwise nested", system.num_tracks()), "");
            true
        }
        Err(w) => {
            rec.verdict(
                "nestedness",
                false,
                "two cosets cross",
                format!(
                    "cosets {} and {} cross at vertices {}",
                    w.cosets.0,
                    w.cosets.1,
                    w.vertices.iter().map(|&v| system.family().names()[v].clone()).collect::<Vec<_>>().join(", ")
                ),
            );
            false
        }
    };

    let table = metric(&system);
    parity_and_corners(&system, &table, &mut rec);
    squares(&system, &table, nested, &mut rec);
    rec.lap("pattern");

    if nested {
        labelling(&system, &mut rec, &mut out);
        rec.lap("labelling");
        match build_tree(&system) {
            Ok(tree) => {
                counts.tree_vertices = Some(tree.len());
                counts.tree_edges = Some(tree.edges.len());
                counts.reduced_vertices = Some(tree.reduced_vertices);
                rec.verdict(
                    "tree",
                    true,
                    format!("{} vertices, {} edges, connected, bipartite", tree.len(), tree.edges.len()),
                    "",
                );
                tree_oracle(&system, &tree, &mut rec, &mut out);
                separation(&system, &table, &tree, &mut rec);
                rec.lap("tree");
                if let Some(stage) = &group {
                    action(&system, &tree, stage, spec, &mut rec);
                    rec.lap("action");
                } else {
                    rec.skip("action", "explicit family has no group action");
                }
                out.tree = Some(tree);
            }
            Err(e) => rec.verdict("tree", false, "tree construction failed", e.to_string()),
        }
    } else {
        for name in ["labelling", "tree", "action"] {
            rec.skip(name, "requires a nested system");
        }
    }
    expectations(spec, &counts, nested, &mut rec);
    out.system = Some(system);
    Ok(finish(out, rec, counts))
}

fn finish(mut out: RunOutput, rec: Recorder, counts: Counts) -> RunOutput {
    let status =
        rec.checks
            .iter()
            .map(|c| c.status)
            .fold(Status::Pass, |a, b| if b > a && b != Status::Skipped { b } else { a });
    out.report.status = status;
    out.report.witnesses = rec
        .checks
        .iter()
        .filter(|c| !c.witness.is_empty())
        .map(|c| WitnessEntry { check: c.name.clone(), witness: c.witness.clone() })
        .collect();
    out.report.checks = rec.checks;
    out.report.timing_ms = rec.timings;
    out.report.counts = counts;
    out
}

/// Window, base set, hypothesis package, family and its radius + 2 recheck.
fn group_stage(
    spec: &InstanceSpec,
    rec: &mut Recorder,
    counts: &mut Counts,
) -> Result<Option<GroupStage>, HarnessError> {
    let instance = spec.resolve()?;
    let parse = |e: crate::window::WindowError| HarnessError::Parse(format!("{}: {e}", spec.name));
    let w = instance.window;
    let window = build_window(&instance.model, &instance.subgroup, w.radius, w.margin).map_err(parse)?;
    counts.omega = Some(window.omega_len());
    let base = build_base_set(&window, &instance.base_set).map_err(parse)?;

    let hyp =
        hypothesis_report(&window, &base, &instance.subgroup, &instance.translations, instance.expected_k.generators());
    if let Some(bad) = hyp.almost_invariance.iter().find(|t| !t.certified) {
        rec.push(
            "almost_invariance",
            Status::Uncertified,
            "a translate leaves the certified region",
            format!("A·{}: {}", display_word(&bad.element), bad.reason.clone().unwrap_or_default()),
        );
        return Ok(None);
    }
    let sizes: Vec<String> = hyp
        .almost_invariance
        .iter()
        .map(|t| format!("A·{} differs in {{{}}}", display_word(&t.element), t.witness.join(",")))
        .collect();
    rec.verdict("almost_invariance", true, sizes.join("; "), "");
    let failures: Vec<String> =
        hyp.properness.failures.iter().map(|(d, s)| format!("{s} misses distance {d}")).collect();
    rec.verdict(
        "properness",
        hyp.properness.passed,
        "A and its complement meet every interior distance shell",
        failures.join("; "),
    );
    let unfixed: Vec<String> = hyp
        .subgroup_in_stabilizer
        .iter()
        .filter(|v| !v.fixes_base)
        .map(|v| format!("{} moves {{{}}}", display_word(&v.element), v.witness.join(",")))
        .collect();
    rec.verdict("subgroup_in_stabilizer", unfixed.is_empty(), "generators of H fix A on the right", unfixed.join("; "));
    let unfixed: Vec<String> = hyp
        .expected_k
        .iter()
        .filter(|v| !v.fixes_base)
        .map(|v| format!("{} moves {{{}}}", display_word(&v.element), v.witness.join(",")))
        .collect();
    rec.verdict("expected_k_fixes_base", unfixed.is_empty(), "declared generators of K fix A", unfixed.join("; "));

    let family = match build_family(&window, &base, &instance.translations) {
        Ok(f) => f,
        Err(e) => {
            rec.push("family", Status::Uncertified, "family certification failed", e.to_string());
            return Ok(None);
        }
    };
    rec.verdict("family", true, format!("{} distinct translates certified pairwise", family.len()), "");

    // The same family one radius step further out must carry the same labels.
    let wide = build_window(&instance.model, &instance.subgroup, w.radius + 2, w.margin).map_err(parse)?;
    let wide_base = build_base_set(&wide, &instance.base_set).map_err(parse)?;
    let stable = match build_family(&wide, &wide_base, &instance.translations) {
        Ok(f2) => {
            let labels = |win: &Window, fam: &VertexFamily| -> Vec<BTreeSet<String>> {
                fam.vertices.iter().map(|v| v.flips.iter().map(|&k| win.key_label(k)).collect()).collect()
            };
            let (a, b) = (labels(&window, &family), labels(&wide, &f2));
            if a == b {
                Ok(())
            } else {
                let i = (0..a.len().min(b.len())).find(|&i| a[i] != b[i]).unwrap_or(a.len().min(b.len()));
                Err(format!("translate {} changes at radius {}", i, w.radius + 2))
            }
        }
        Err(e) => Err(e.to_string()),
    };
    match stable {
        Ok(()) => rec.verdict("stability", true, format!("witness sets unchanged at radius {}", w.radius + 2), ""),
        Err(witness) => {
            rec.push("stability", Status::Uncertified, "witness sets move under radius growth", witness);
            return Ok(None);
        }
    }
    Ok(Some(GroupStage { window, base, family, instance }))
}

fn display_word(w: &str) -> &str {
    if w.is_empty() {
        "1"
    } else {
        w
    }
}

fn parity_and_corners(system: &TrackSystem, table: &MetricTable, rec: &mut Recorder) {
    let n = system.num_vertices();
    let names = system.family().names();
    let parity = parity_and_coloring(table, system.family().base());
    match &parity {
        Ok(_) => rec.verdict("parity", true, "every triangle has even perimeter", ""),
        Err(e) => rec.verdict("parity", false, "odd perimeter", e.to_string()),
    }
    let mut triples = 0;
    let mut failure = None;
    'outer: for u in 0..n {
        for v in u + 1..n {
            for w in v + 1..n {
                triples += 1;
                if let Err(e) = corner_analysis(table, u, v, w) {
                    failure = Some(format!("{} at ({}, {}, {})", e, names[u], names[v], names[w]));
                    break 'outer;
                }
            }
        }
    }
    let triangle = table.triangle_violation();
    let witness = failure.clone().or(triangle.map(|(u, v, w)| format!("d({u},{v}) > d({u},{w}) + d({w},{v})")));
    rec.verdict(
        "corners",
        failure.is_none() && triangle.is_none(),
        format!("corner counts match corner sets on {triples} triangles"),
        witness.unwrap_or_default(),
    );
}

fn squares(system: &TrackSystem, table: &MetricTable, nested: bool, rec: &mut Recorder) {
    if !nested {
        rec.skip("squares", "requires a nested system");
        return;
    }
    let n = system.num_vertices();
    let mut strict = 0;
    let mut problem = None;
    'outer: for u in 0..n {
        for v in u + 1..n {
            for w in v + 1..n {
                for z in w + 1..n {
                    for (a, b, c, d) in [(u, v, w, z), (u, v, z, w), (u, w, v, z)] {
                        match square_analysis(system, table, a, b, c, d) {
                            Ok(s) if s.strict && !s.diagonal_independent => {
                                problem = Some(format!("square ({a}, {b}, {c}, {d}) depends on its diagonal"));
                                break 'outer;
                            }
                            Ok(s) => strict += s.strict as usize,
                            Err(e) => {
                                problem = Some(e.to_string());
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
    }
    let mut pairs = 0;
    if problem.is_none() {
        'pairs: for u in 0..n {
            for v in u + 1..n {
                for w in 0..n {
                    for z in w + 1..n {
                        if [w, z].iter().any(|x| *x == u || *x == v) || (w, z) <= (u, v) {
                            continue;
                        }
                        match property_b(system, table, (u, v), (w, z)) {
                            Ok(Some(b)) if !b.holds => {
                                problem = Some(format!(
                                    "edges [{u},{v}] and [{w},{z}] share {} labels but {} lines join them",
                                    b.shared, b.crossing_lines
                                ));
                                break 'pairs;
                            }
                            Ok(Some(_)) => pairs += 1,
                            Ok(None) => {}
                            Err(e) => {
                                problem = Some(e.to_string());
                                break 'pairs;
                            }
                        }
                    }
                }
            }
        }
    }
    rec.verdict(
        "squares",
        problem.is_none(),
        format!("{strict} strict squares and {pairs} edge pairs with shared labels agree"),
        problem.unwrap_or_default(),
    );
}

fn labelling(system: &TrackSystem, rec: &mut Recorder, out: &mut RunOutput) {
    let n = system.num_vertices();
    let mut reversal = None;
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            match (class_order(system, u, v), class_order(system, v, u)) {
                (Ok(a), Ok(b)) => {
                    let mut back = b.classes.clone();
                    back.reverse();
                    if a.classes != back {
                        reversal = Some(format!("class order on [{u},{v}] is not reversed on [{v},{u}]"));
                    }
                }
                (Err(e), _) | (_, Err(e)) => reversal = Some(e.to_string()),
            }
        }
    }
    let canonical = match assign_labels(system) {
        Ok(l) => l,
        Err(e) => {
            rec.verdict("class_order", false, "class order is not total", e.to_string());
            return;
        }
    };
    let counts_ok = canonical.edges.iter().all(|e| e.labels.len() == system.diff(e.u, e.v).count_ones(..));
    rec.verdict(
        "class_order",
        reversal.is_none() && counts_ok,
        "class orders are chains, reverse with the edge, and label d(u,v) points",
        reversal.unwrap_or_else(|| "label count differs from d".into()),
    );
    match oracle_labelings(system, &canonical) {
        Ok(o) => {
            rec.verdict(
                "labelling_oracle",
                o.passed(),
                format!("{} valid labellings, expected {}", o.count, o.expected),
                format!(
                    "count {} vs {}, canonical valid {}, within-class only {}, malformed tracks {}",
                    o.count, o.expected, o.canonical_valid, o.within_class_only, o.malformed_tracks
                ),
            );
            out.labelling_oracle = Some(o);
        }
        Err(e) => rec.skip("labelling_oracle", &e.to_string()),
    }
}

fn tree_oracle(system: &TrackSystem, tree: &DualTree, rec: &mut Recorder, out: &mut RunOutput) {
    match oracle_orientations(system) {
        Ok(o) => {
            let mine: BTreeSet<Vec<usize>> = tree.vertices.iter().map(|v| v.flips.ones().collect()).collect();
            let theirs: BTreeSet<Vec<usize>> = o.vertices.iter().cloned().collect();
            let edge_sets = |pairs: Vec<(Vec<usize>, Vec<usize>)>| -> BTreeSet<(Vec<usize>, Vec<usize>)> {
                pairs.into_iter().map(|(a, b)| if a <= b { (a, b) } else { (b, a) }).collect()
            };
            let my_edges = edge_sets(
                tree.edges
                    .iter()
                    .map(|e| (tree.vertices[e.a].flips.ones().collect(), tree.vertices[e.b].flips.ones().collect()))
                    .collect(),
            );
            let their_edges =
                edge_sets(o.edges.iter().map(|&(a, b)| (o.vertices[a].clone(), o.vertices[b].clone())).collect());
            let witness =
                match (mine.symmetric_difference(&theirs).next(), my_edges.symmetric_difference(&their_edges).next()) {
                    (Some(v), _) => format!("vertex F = {} differs", format_tracks(system, v)),
                    (None, Some((a, b))) => {
                        format!("edge {} -- {} differs", format_tracks(system, a), format_tracks(system, b))
                    }
                    (None, None) => String::new(),
                };
            rec.verdict(
                "tree_oracle",
                witness.is_empty(),
                format!(
                    "{} consistent of {} side choices; {} vertices after band cuts",
                    o.consistent,
                    o.side_choices,
                    o.vertices.len()
                ),
                witness,
            );
            out.orientation_oracle = Some(o);
        }
        Err(e) => rec.skip("tree_oracle", &e.to_string()),
    }
}

fn format_tracks(system: &TrackSystem, tracks: &[usize]) -> String {
    crate::pattern::format_set(tracks.iter().map(|&t| system.text(t)))
}

fn separation(system: &TrackSystem, table: &MetricTable, tree: &DualTree, rec: &mut Recorder) {
    let mut problem = None;
    let mut pairs = 0;
    'outer: for u in 0..tree.len() {
        for v in u..tree.len() {
            pairs += 1;
            match tree_metric_and_separation(tree, u, v) {
                Ok(p) if !p.separates_exactly => {
                    problem = Some(format!("path {u} -> {v} labels differ from B_u + B_v"));
                    break 'outer;
                }
                Ok(_) => {}
                Err(e) => {
                    problem = Some(e.to_string());
                    break 'outer;
                }
            }
        }
    }
    if problem.is_none() {
        'family: for u in 0..system.num_vertices() {
            for v in 0..system.num_vertices() {
                let (Some(x), Some(y)) = (tree.family_vertex(u), tree.family_vertex(v)) else {
                    problem = Some(format!("family vertex {u} or {v} missing from the tree"));
                    break 'family;
                };
                let len = tree_metric_and_separation(tree, x, y).map(|p| p.length).unwrap_or(usize::MAX);
                if len != table.d(u, v) {
                    problem = Some(format!("path length {len} but d({u},{v}) = {}", table.d(u, v)));
                    break 'family;
                }
            }
        }
    }
    rec.verdict(
        "separation",
        problem.is_none(),
        format!("{pairs} vertex pairs: path labels are B_u + B_v; family distances equal d"),
        problem.unwrap_or_default(),
    );
}

fn action(system: &TrackSystem, tree: &DualTree, stage: &GroupStage, spec: &InstanceSpec, rec: &mut Recorder) {
    let k: &Subgroup = &stage.instance.expected_k;
    let rep =
        match stabilizer_analysis(tree, system, &stage.window, &stage.base, Some(k), stage.instance.expected_k_exact) {
            Ok(r) => r,
            Err(e) => {
                rec.push("equivariance", Status::Uncertified, "action not certified", e.to_string());
                return;
            }
        };
    rec.verdict(
        "equivariance",
        rep.equivariance_violations.is_empty(),
        format!(
            "{} elements of ball({}) map edges to edges with translated labels",
            rep.domain_size, rep.domain_radius
        ),
        rep.equivariance_violations.first().cloned().unwrap_or_default(),
    );
    let b = &rep.base;
    rec.verdict(
        "base_stabilizer",
        b.passed,
        format!(
            "stabilizer of o in ball({}): {{{}}}; expected {}{{{}}}",
            rep.domain_radius,
            b.stabilizer.iter().map(|w| display_word(w)).collect::<Vec<_>>().join(","),
            if b.exact { "exactly " } else { "at least " },
            b.expected.iter().map(|w| display_word(w)).collect::<Vec<_>>().join(","),
        ),
        "stabilizer of o disagrees with the expected subgroup",
    );
    let bad = rep.edges.iter().find(|e| !e.contains_conjugate);
    rec.verdict(
        "edge_stabilizers",
        bad.is_none(),
        "every edge stabilizer contains the conjugate of H by its label",
        bad.map(|e| format!("edge {} misses part of {{{}}}", e.label, e.conjugate.join(","))).unwrap_or_default(),
    );
    if spec.expect.edge_stabilizers_equal_conjugates == Some(true) {
        let bad = rep.edges.iter().find(|e| !e.equals_conjugate);
        rec.verdict(
            "edge_stabilizers_exact",
            bad.is_none(),
            "every edge stabilizer equals the conjugate of H by its label",
            bad.map(|e| format!("edge {} has stabilizer {{{}}}", e.label, e.stabilizer.join(","))).unwrap_or_default(),
        );
    }
    match &rep.identity_class {
        Some(c) => rec.verdict(
            "class_subgroup",
            c.violation.is_none() && c.index == c.cosets.len(),
            format!(
                "class [{}] is closed; index {} over H ({} elements checked)",
                c.cosets.join(","),
                c.index,
                c.elements_checked
            ),
            match &c.violation {
                Some((x, y)) => format!("{} * {} leaves the class union", display_word(x), display_word(y)),
                None => format!("index {} but the class has {} cosets", c.index, c.cosets.len()),
            },
        ),
        None => rec.skip("class_subgroup", "the coset H labels no track"),
    }
    let stabs: Vec<String> = rep
        .vertices
        .iter()
        .map(|v| {
            format!(
                "{}: {{{}}}",
                crate::tree::vertex_name(system, &tree.vertices[v.vertex].flips),
                v.stabilizer.iter().map(|w| display_word(w)).collect::<Vec<_>>().join(",")
            )
        })
        .collect();
    rec.push("vertex_stabilizers", Status::Pass, stabs.join("; "), "");
}

fn expectations(spec: &InstanceSpec, counts: &Counts, nested: bool, rec: &mut Recorder) {
    let e = &spec.expect;
    let mut wrong = Vec::new();
    if let Some(n) = e.nested {
        if n != nested {
            wrong.push(format!("nested {nested}, expected {n}"));
        }
    }
    if let Some(v) = e.tree_vertices {
        if counts.tree_vertices != Some(v) {
            wrong.push(format!("tree vertices {:?}, expected {v}", counts.tree_vertices));
        }
    }
    if let Some(v) = e.tree_edges {
        if counts.tree_edges != Some(v) {
            wrong.push(format!("tree edges {:?}, expected {v}", counts.tree_edges));
        }
    }
    if let Some(s) = &e.class_sizes {
        if &counts.class_sizes != s {
            wrong.push(format!("class sizes {:?}, expected {s:?}", counts.class_sizes));
        }
    }
    rec.verdict("expectations", wrong.is_empty(), "declared expectations hold", wrong.join("; "));
}

/// Report as a JSON value, for callers that post-process it.
pub fn report_value(report: &Report) -> Value {
    serde_json::to_value(report).unwrap_or_else(|e| json!({ "error": e.to_string() }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(spec: &InstanceSpec) -> RunOutput {
        run_instance(spec, RunOptions::default()).unwrap()
    }

    #[test]
    fn corpus_passes() {
        for spec in corpus() {
            let out = run(&spec);
            let failing: Vec<_> =
                out.report.checks.iter().filter(|c| c.status != Status::Pass && c.status != Status::Skipped).collect();
            assert_eq!(out.report.status, Status::Pass, "{}: {failing:?}", spec.name);
        }
    }

    #[test]
    fn crossing_family_fails_with_witness() {
        let out = run(&crossing_instance());
        assert_eq!(out.report.status, Status::Fail);
        let c = out.report.check("nestedness").unwrap();
        assert_eq!(c.status, Status::Fail);
        assert!(c.witness.contains("cosets a and b"));
        assert_eq!(out.report.exit_code(), 2);
        assert_eq!(out.report.check("expectations").unwrap().status, Status::Pass);
    }

    #[test]
    fn long_translation_is_uncertified() {
        let mut spec = corpus_instance("E1").unwrap();
        spec.family.as_mut().unwrap().translations.push("tttttttt".into());
        let out = run(&spec);
        assert_eq!(out.report.status, Status::Uncertified);
        assert_eq!(out.report.exit_code(), 3);
        assert!(!out.report.witnesses.is_empty());
    }

    #[test]
    fn random_families_pass() {
        for seed in 0..20 {
            let spec = random_family(seed, 1 + (seed as usize % 10)).unwrap();
            let out = run(&spec);
            assert_eq!(out.report.status, Status::Pass, "{}: {:?}", spec.name, out.report.checks);
        }
    }
}
