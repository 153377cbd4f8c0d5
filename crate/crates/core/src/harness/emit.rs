use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use super::{HarnessError, Report};
use crate::pattern::TrackSystem;
use crate::tree::{vertex_name, DualTree, VertexKind};

/// Undirected DOT graph: the base vertex is node `o`, other vertices are
/// labelled by their flip set and edges by their coset label.
pub fn emit_dot(name: &str, system: &TrackSystem, tree: &DualTree) -> String {
    let id = |v: usize| if v == tree.base { "o".to_string() } else { format!("v{v}") };
    let mut out = String::new();
    let _ = writeln!(out, "graph \"{}\" {{", escape(name));
    let _ = writeln!(out, "  node [shape=ellipse];");
    for (v, vertex) in tree.vertices.iter().enumerate() {
        let style = match vertex.kind {
            _ if v == tree.base => ", shape=doublecircle",
            VertexKind::Family(_) => "",
            VertexKind::Branch => ", style=dashed",
            VertexKind::Band(_) => ", style=dotted",
        };
        let label = vertex_name(system, &vertex.flips);
        let _ = writeln!(out, "  \"{}\" [label=\"{}\"{}];", id(v), escape(&label), style);
    }
    for e in &tree.edges {
        let _ = writeln!(out, "  \"{}\" -- \"{}\" [label=\"{}\"];", id(e.a), id(e.b), escape(system.text(e.track)));
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// The structured report as pretty JSON with a trailing newline.
pub fn emit_report(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), HarnessError> {
    let io = |e: std::io::Error| HarnessError::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let file = path.file_name().ok_or_else(|| HarnessError::Io(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", file.to_string_lossy(), std::process::id()));
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{corpus_instance, run_instance, RunOptions};
    use crate::pattern::SetFamily;
    use crate::tree::build_tree;

    #[test]
    fn half_line_dot() {
        let out = run_instance(&corpus_instance("E1").unwrap(), RunOptions::default()).unwrap();
        let dot = emit_dot("E1", out.system.as_ref().unwrap(), out.tree.as_ref().unwrap());
        assert!(dot.starts_with("graph \"E1\" {\n"));
        assert!(dot.contains("\"o\" [label=\"o\", shape=doublecircle];"));
        for label in ["t-2", "t-1", "t0", "t1"] {
            assert!(dot.contains(&format!("[label=\"{label}\"];")), "{label}");
        }
        assert_eq!(dot.matches(" -- ").count(), 4);
    }

    #[test]
    fn single_node_dot() {
        let s = TrackSystem::new(SetFamily::explicit(&["a"], &[vec!["a"]]).unwrap()).unwrap();
        let t = build_tree(&s).unwrap();
        assert_eq!(
            emit_dot("x", &s, &t),
            "graph \"x\" {\n  node [shape=ellipse];\n  \"o\" [label=\"o\", shape=doublecircle];\n}\n"
        );
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("tracktree-emit-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("r.json");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
