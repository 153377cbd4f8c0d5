use std::collections::{BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::{DualTree, TreeError};
use crate::group::{GroupElement, Subgroup};
use crate::pattern::TrackSystem;
use crate::window::{BaseSet, Window};

/// Image of the tree under one group element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeAction {
    pub element: String,
    /// Tree vertex of `B·g` for each vertex `B`, when it is one.
    pub vertex_images: Vec<Option<usize>>,
    /// Label text of `c·g` for each track `c`, when the image is in the window.
    pub label_images: Vec<Option<String>>,
    /// Tree vertex of `A·g`.
    pub base_image: Option<usize>,
    /// Edges whose image is not an edge with the image label.
    pub violations: Vec<String>,
}

impl TreeAction {
    pub fn equivariant(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Window keys of the tracks; explicit families have none.
fn track_keys(system: &TrackSystem) -> Result<Vec<usize>, TreeError> {
    (0..system.num_tracks()).map(|t| system.label(t).key.ok_or(TreeError::NoWindowKeys)).collect()
}

struct Frame<'a> {
    window: &'a Window,
    base: &'a BaseSet,
    keys: Vec<usize>,
    /// Key sets of tree vertices.
    index: HashMap<Vec<usize>, usize>,
    vertex_keys: Vec<Vec<usize>>,
}

impl<'a> Frame<'a> {
    fn new(tree: &DualTree, system: &TrackSystem, window: &'a Window, base: &'a BaseSet) -> Result<Self, TreeError> {
        let keys = track_keys(system)?;
        let vertex_keys: Vec<Vec<usize>> = tree
            .vertices
            .iter()
            .map(|v| {
                let mut ks: Vec<usize> = v.flips.ones().map(|t| keys[t]).collect();
                ks.sort_unstable();
                ks
            })
            .collect();
        let index = vertex_keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        Ok(Frame { window, base, keys, index, vertex_keys })
    }

    fn act(&self, tree: &DualTree, g: &GroupElement) -> Result<TreeAction, TreeError> {
        let window = self.window;
        let model = window.model();
        let element = model.format_word(g);
        if g.len() > window.margin() {
            return Err(TreeError::OutsideCertifiedDomain(
                element,
                format!("length exceeds the margin {}", window.margin()),
            ));
        }
        let d_g: BTreeSet<usize> = window
            .translate_diff(self.base, g)
            .map_err(|e| TreeError::OutsideCertifiedDomain(element.clone(), e.to_string()))?
            .into_iter()
            .collect();
        let key_images: Vec<Option<usize>> = self.keys.iter().map(|&k| window.act(k, g)).collect();
        // B·g = A + D_g + F·g.
        let image_of = |keys: &[usize]| -> Option<usize> {
            let mut out = d_g.clone();
            for &k in keys {
                let m = window.act(k, g)?;
                if !out.remove(&m) {
                    out.insert(m);
                }
            }
            self.index.get(&out.into_iter().collect::<Vec<_>>()).copied()
        };
        let vertex_images: Vec<Option<usize>> = self.vertex_keys.iter().map(|k| image_of(k)).collect();
        let label_images = key_images.iter().map(|m| m.map(|k| window.key_label(k))).collect();
        let base_image = self.index.get(&d_g.iter().copied().collect::<Vec<_>>()).copied();
        let mut violations = Vec::new();
        for e in &tree.edges {
            let (Some(x), Some(y)) = (vertex_images[e.a], vertex_images[e.b]) else {
                continue;
            };
            let ok = match (tree.edge_between(x, y), key_images[e.track]) {
                (Some(img), Some(k)) => self.keys[img.track] == k,
                _ => false,
            };
            if !ok {
                violations.push(format!(
                    "edge {} maps to ({x}, {y}) without label {}",
                    window.key_label(self.keys[e.track]),
                    key_images[e.track].map(|k| window.key_label(k)).unwrap_or_else(|| "?".into()),
                ));
            }
        }
        Ok(TreeAction { element, vertex_images, label_images, base_image, violations })
    }
}

/// Right action of `g` on the tree, defined for `|g|` up to the window margin.
pub fn act(
    tree: &DualTree,
    system: &TrackSystem,
    window: &Window,
    base: &BaseSet,
    g: &GroupElement,
) -> Result<TreeAction, TreeError> {
    Frame::new(tree, system, window, base)?.act(tree, g)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaseStabilizer {
    pub stabilizer: Vec<String>,
    /// Elements of the expected stabilizer in the domain.
    pub expected: Vec<String>,
    pub exact: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexStabilizer {
    pub vertex: usize,
    pub stabilizer: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeStabilizer {
    pub label: String,
    pub stabilizer: Vec<String>,
    /// `r⁻¹Hr` in the domain, `r` the label's representative.
    pub conjugate: Vec<String>,
    pub contains_conjugate: bool,
    pub equals_conjugate: bool,
}

/// Closure of the union of the cosets in the class of `H` itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassUnionCheck {
    pub cosets: Vec<String>,
    /// Cosets of `H` met by the union inside the interior ball.
    pub index: usize,
    pub elements_checked: usize,
    /// A pair whose product (or an element whose inverse) leaves the union.
    pub violation: Option<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilizerReport {
    pub domain_radius: usize,
    pub domain_size: usize,
    pub base: BaseStabilizer,
    pub vertices: Vec<VertexStabilizer>,
    pub edges: Vec<EdgeStabilizer>,
    pub identity_class: Option<ClassUnionCheck>,
    pub equivariance_violations: Vec<String>,
}

impl StabilizerReport {
    pub fn edges_contain_conjugates(&self) -> bool {
        self.edges.iter().all(|e| e.contains_conjugate)
    }

    pub fn class_union_closed(&self) -> bool {
        self.identity_class.as_ref().is_none_or(|c| c.violation.is_none() && c.index == c.cosets.len())
    }
}

/// Limit on the union elements whose pairwise products are checked.
const CLASS_UNION_CAP: usize = 400;

/// Window stabilizers of the base vertex, every vertex and every edge over
/// the certified domain `ball(margin)`.
pub fn stabilizer_analysis(
    tree: &DualTree,
    system: &TrackSystem,
    window: &Window,
    base: &BaseSet,
    expected_k: Option<&Subgroup>,
    exact: bool,
) -> Result<StabilizerReport, TreeError> {
    let model = window.model();
    let frame = Frame::new(tree, system, window, base)?;
    let domain = model
        .ball(window.margin())
        .map_err(|e| TreeError::OutsideCertifiedDomain(format!("ball({})", window.margin()), e.to_string()))?;
    let actions: Vec<TreeAction> = domain.iter().map(|g| frame.act(tree, g)).collect::<Result<_, _>>()?;
    let words: Vec<String> = actions.iter().map(|a| a.element.clone()).collect();

    let stabilizer: Vec<String> =
        actions.iter().filter(|a| a.base_image == Some(tree.base)).map(|a| a.element.clone()).collect();
    let expected: Vec<String> = match expected_k {
        Some(k) => domain.iter().zip(&words).filter(|(g, _)| k.contains_unchecked(g)).map(|(_, w)| w.clone()).collect(),
        None => Vec::new(),
    };
    let stab_set: BTreeSet<&String> = stabilizer.iter().collect();
    let exp_set: BTreeSet<&String> = expected.iter().collect();
    let passed = if exact { stab_set == exp_set } else { exp_set.is_subset(&stab_set) };
    let base_report = BaseStabilizer { stabilizer: stabilizer.clone(), expected, exact, passed };

    let vertices = (0..tree.len())
        .map(|v| VertexStabilizer {
            vertex: v,
            stabilizer: actions.iter().filter(|a| a.vertex_images[v] == Some(v)).map(|a| a.element.clone()).collect(),
        })
        .collect();

    let h = window.subgroup();
    let edges = tree
        .edges
        .iter()
        .map(|e| {
            let key = frame.keys[e.track];
            let r = window.key_element(key);
            let r_inv = model.inv(r);
            let stabilizer: Vec<String> = actions
                .iter()
                .filter(|a| {
                    let (x, y) = (a.vertex_images[e.a], a.vertex_images[e.b]);
                    (x, y) == (Some(e.a), Some(e.b)) || (x, y) == (Some(e.b), Some(e.a))
                })
                .map(|a| a.element.clone())
                .collect();
            let conjugate: Vec<String> = domain
                .iter()
                .zip(&words)
                .filter(|(g, _)| h.contains_unchecked(&model.mul(&model.mul(r, g), &r_inv)))
                .map(|(_, w)| w.clone())
                .collect();
            let s: BTreeSet<&String> = stabilizer.iter().collect();
            let c: BTreeSet<&String> = conjugate.iter().collect();
            EdgeStabilizer {
                label: window.key_label(key),
                contains_conjugate: c.is_subset(&s),
                equals_conjugate: c == s,
                stabilizer,
                conjugate,
            }
        })
        .collect();

    let identity_class = class_union_check(system, window, &frame.keys);
    let equivariance_violations =
        actions.iter().flat_map(|a| a.violations.iter().map(move |v| format!("{}: {v}", a.element))).collect();
    Ok(StabilizerReport {
        domain_radius: window.margin(),
        domain_size: domain.len(),
        base: base_report,
        vertices,
        edges,
        identity_class,
        equivariance_violations,
    })
}

/// The class of the coset `H` must make a subgroup: its union is closed
/// under products and inverses wherever the window decides them.
fn class_union_check(system: &TrackSystem, window: &Window, keys: &[usize]) -> Option<ClassUnionCheck> {
    let model = window.model();
    let identity_key = window.key_of(&model.identity())?;
    let track = keys.iter().position(|&k| k == identity_key)?;
    let class = &system.classes()[system.class_of(track)];
    let members: FixedBitSet = {
        let mut m = FixedBitSet::with_capacity(window.omega_len());
        for &t in class {
            m.insert(keys[t]);
        }
        m
    };
    let interior = window.radius() - window.margin();
    let union: Vec<&GroupElement> = window
        .elements()
        .iter()
        .enumerate()
        .filter(|(i, e)| e.len() <= interior && members.contains(window.element_key(*i)))
        .map(|(_, e)| e)
        .take(CLASS_UNION_CAP)
        .collect();
    let inside = |e: &GroupElement| window.key_of(e).is_some_and(|k| members.contains(k));
    let mut violation = None;
    'outer: for x in &union {
        if !inside(&model.inv(x)) {
            violation = Some((model.format_word(x), "inverse".to_string()));
            break;
        }
        for y in &union {
            if !inside(&model.mul(x, y)) {
                violation = Some((model.format_word(x), model.format_word(y)));
                break 'outer;
            }
        }
    }
    let realized: BTreeSet<usize> = union.iter().filter_map(|e| window.key_of(e)).collect();
    Some(ClassUnionCheck {
        cosets: class.iter().map(|&t| system.text(t).to_string()).collect(),
        index: realized.len(),
        elements_checked: union.len(),
        violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupModel;
    use crate::pattern::SetFamily;
    use crate::tree::build_tree;
    use crate::window::{build_base_set, build_family, build_window, BaseSetSpec, Side};

    fn pipeline(
        model: &GroupModel,
        h: &Subgroup,
        radius: usize,
        margin: usize,
        spec: BaseSetSpec,
        translations: &[&str],
    ) -> (Window, BaseSet, TrackSystem, DualTree) {
        let w = build_window(model, h, radius, margin).unwrap();
        let a = build_base_set(&w, &spec).unwrap();
        let tr: Vec<_> = translations.iter().map(|s| model.normalize(s).unwrap()).collect();
        let fam = build_family(&w, &a, &tr).unwrap();
        let sys = TrackSystem::new(SetFamily::from_vertex_family(&w, &fam)).unwrap();
        let tree = build_tree(&sys).unwrap();
        (w, a, sys, tree)
    }

    #[test]
    fn half_line_tree_shifts() {
        let z = GroupModel::free("t").unwrap();
        let h = Subgroup::trivial(&z);
        let spec = BaseSetSpec::new(Side::In).rule("T", Side::Out);
        let (w, a, sys, tree) = pipeline(&z, &h, 10, 3, spec, &["TT", "T", "", "t", "tt"]);
        assert_eq!(tree.len(), 5);

        let id = act(&tree, &sys, &w, &a, &z.identity()).unwrap();
        assert_eq!(id.vertex_images, (0..5).map(Some).collect::<Vec<_>>());
        let t = act(&tree, &sys, &w, &a, &z.normalize("t").unwrap()).unwrap();
        assert!(t.equivariant());
        assert_eq!(t.base_image, tree.family_vertex(3));
        assert_eq!(t.vertex_images.iter().filter(|i| i.is_some()).count(), 4);
        assert!(matches!(
            act(&tree, &sys, &w, &a, &z.normalize("tttt").unwrap()),
            Err(TreeError::OutsideCertifiedDomain(..))
        ));

        let k = Subgroup::trivial(&z);
        let rep = stabilizer_analysis(&tree, &sys, &w, &a, Some(&k), true).unwrap();
        assert!(rep.base.passed);
        assert_eq!(rep.base.stabilizer, vec![""]);
        assert!(rep.edges.iter().all(|e| e.stabilizer == vec![""] && e.equals_conjugate));
        assert!(rep.class_union_closed());
        assert_eq!(rep.identity_class.as_ref().unwrap().index, 1);
        assert!(rep.equivariance_violations.is_empty());
    }

    #[test]
    fn half_plane_edges_are_stabilized_by_h() {
        let z2 = GroupModel::free_abelian("xy").unwrap();
        let h = Subgroup::from_words(&z2, &["x"]).unwrap();
        let spec = BaseSetSpec::new(Side::In).rule("Y", Side::Out);
        let (w, a, sys, tree) = pipeline(&z2, &h, 8, 3, spec, &["Y", "", "y", "x"]);
        let x = z2.normalize("x").unwrap();
        let ax = act(&tree, &sys, &w, &a, &x).unwrap();
        assert_eq!(ax.base_image, Some(tree.base));
        assert_eq!(ax.vertex_images, (0..tree.len()).map(Some).collect::<Vec<_>>());

        let rep = stabilizer_analysis(&tree, &sys, &w, &a, Some(&h), true).unwrap();
        assert!(rep.base.passed);
        assert_eq!(rep.base.expected.len(), 7);
        for e in &rep.edges {
            assert!(e.equals_conjugate, "{}", e.label);
            assert_eq!(e.stabilizer.len(), 7);
        }
        assert!(rep.class_union_closed());
    }

    #[test]
    fn explicit_families_have_no_action() {
        let sys = TrackSystem::new(SetFamily::explicit(&["a"], &[vec![], vec!["a"]]).unwrap()).unwrap();
        let tree = build_tree(&sys).unwrap();
        let z = GroupModel::free("t").unwrap();
        let h = Subgroup::trivial(&z);
        let w = build_window(&z, &h, 4, 2).unwrap();
        let a = build_base_set(&w, &BaseSetSpec::new(Side::In)).unwrap();
        assert!(matches!(act(&tree, &sys, &w, &a, &z.identity()), Err(TreeError::NoWindowKeys)));
    }
}
