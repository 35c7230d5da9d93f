use std::fmt::Write as _;
use std::path::Path;

use super::element::{CurvedElement, Vec3};
use crate::error::{Error, Result};

/// Nodes plus 6-node connectivity (zero-based, in the element node order).
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    nodes: Vec<Vec3>,
    elements: Vec<[usize; 6]>,
}

impl SurfaceMesh {
    pub fn new(nodes: Vec<Vec3>, elements: Vec<[usize; 6]>) -> Result<Self> {
        for (i, conn) in elements.iter().enumerate() {
            if let Some(bad) = conn.iter().find(|&&n| n >= nodes.len()) {
                return Err(Error::Parameter(format!(
                    "element {i} references node {bad} but the mesh has {} nodes",
                    nodes.len()
                )));
            }
        }
        Ok(SurfaceMesh { nodes, elements })
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 6]] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> CurvedElement {
        CurvedElement::new(self.elements[index].map(|n| self.nodes[n]))
    }

    pub fn curved_elements(&self) -> impl Iterator<Item = CurvedElement> + '_ {
        (0..self.elements.len()).map(|i| self.element(i))
    }

    /// Checks every element for a non-vanishing Jacobian.
    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.curved_elements().enumerate() {
            e.validate()
                .map_err(|err| Error::DegenerateElement(format!("element {i}: {err}")))?;
        }
        Ok(())
    }

    /// Text form: `nnodes nelems`, one `x y z` line per node, then one line
    /// of six one-based node indices per element. Coordinates use the
    /// shortest representation that round-trips exactly.
    pub fn to_qmesh_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.nodes.len(), self.elements.len());
        for p in &self.nodes {
            let _ = writeln!(out, "{:?} {:?} {:?}", p.x, p.y, p.z);
        }
        for conn in &self.elements {
            let line = conn.iter().map(|n| (n + 1).to_string()).collect::<Vec<_>>().join(" ");
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn parse_qmesh(text: &str, source: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::MeshParse {
            path: source.to_path_buf(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (line_no, header) = lines.next().ok_or_else(|| parse_err(1, "empty mesh file".into()))?;
        let counts: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(line_no, format!("bad header: {e}")))?;
        let [nnodes, nelems] = counts[..] else {
            return Err(parse_err(line_no, "header must be `nnodes nelems`".into()));
        };

        let mut nodes = Vec::with_capacity(nnodes);
        for k in 0..nnodes {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| parse_err(line_no, format!("missing node {}", k + 1)))?;
            let xyz: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(line_no, format!("bad coordinate: {e}")))?;
            let [x, y, z] = xyz[..] else {
                return Err(parse_err(line_no, "expected three coordinates".into()));
            };
            nodes.push(Vec3::new(x, y, z));
        }

        let mut elements = Vec::with_capacity(nelems);
        for k in 0..nelems {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| parse_err(line_no, format!("missing element {}", k + 1)))?;
            let idx: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(line_no, format!("bad node index: {e}")))?;
            if idx.len() != 6 {
                return Err(parse_err(line_no, "expected six node indices".into()));
            }
            let mut conn = [0usize; 6];
            for (slot, &i) in conn.iter_mut().zip(&idx) {
                if i == 0 || i > nnodes {
                    return Err(parse_err(line_no, format!("node index {i} outside 1..={nnodes}")));
                }
                *slot = i - 1;
            }
            elements.push(conn);
        }
        if let Some((line_no, _)) = lines.next() {
            return Err(parse_err(line_no, "unexpected trailing content".into()));
        }
        SurfaceMesh::new(nodes, elements)
    }
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<SurfaceMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SurfaceMesh::parse_qmesh(&text, path)
}

pub fn write_mesh(mesh: &SurfaceMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, mesh.to_qmesh_string()).map_err(|e| Error::io(path, e))
}
