//! `dtnmesh 1` text format.
//!
//! ```text
//! dtnmesh 1
//! <nv> <nt> <nb>
//! x y                      (nv lines, 17 significant digits)
//! i j k                    (nt lines)
//! i j component segment    (nb lines)
//! ```
//!
//! Indices are 0-based. Coordinates are written as their `f64` image, which
//! round-trips bit-exactly through [`read_mesh`].

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{BoundaryEdge, DomainSpec, Mesh, Point2};
use crate::error::{Error, Result};
use crate::scalar::Real;

const OP: &str = "mesh.read";

pub fn mesh_to_string<T: Real>(mesh: &Mesh<T>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dtnmesh 1");
    let _ = writeln!(
        s,
        "{} {} {}",
        mesh.vertices.len(),
        mesh.triangles.len(),
        mesh.boundary_edges.len()
    );
    for p in &mesh.vertices {
        let _ = writeln!(s, "{:.16e} {:.16e}", p.x.f64(), p.y.f64());
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    for e in &mesh.boundary_edges {
        let _ = writeln!(s, "{} {} {} {}", e.v[0], e.v[1], e.component, e.segment);
    }
    s
}

pub fn write_mesh<T: Real, W: Write>(mesh: &Mesh<T>, mut w: W) -> Result<()> {
    w.write_all(mesh_to_string(mesh).as_bytes())?;
    Ok(())
}

struct Lines<R> {
    inner: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    fn next_fields(&mut self, what: &str) -> Result<Vec<(usize, String)>> {
        loop {
            self.buf.clear();
            if self.inner.read_line(&mut self.buf)? == 0 {
                return Err(self.err(1, format!("unexpected end of file, expected {what}")));
            }
            self.line += 1;
            let t = self.buf.trim_end();
            if t.trim().is_empty() {
                continue;
            }
            let mut out = Vec::new();
            let mut col = 0;
            for piece in t.split(' ') {
                if !piece.is_empty() {
                    out.push((col + 1, piece.to_string()));
                }
                col += piece.len() + 1;
            }
            return Ok(out);
        }
    }

    fn err(&self, column: usize, detail: String) -> Error {
        Error::Parse {
            op: OP,
            line: self.line,
            column,
            detail,
        }
    }

    fn row<V: std::str::FromStr>(&mut self, n: usize, what: &str) -> Result<Vec<V>> {
        let f = self.next_fields(what)?;
        if f.len() != n {
            let col = f.get(n).map_or(1, |x| x.0);
            return Err(self.err(col, format!("expected {n} fields for {what}, found {}", f.len())));
        }
        f.into_iter()
            .map(|(c, s)| {
                s.parse::<V>()
                    .map_err(|_| self.err(c, format!("cannot parse '{s}' in {what}")))
            })
            .collect()
    }
}

/// Read a mesh; the domain is recorded as [`DomainSpec::Imported`].
pub fn read_mesh<T: Real, R: BufRead>(r: R) -> Result<Mesh<T>> {
    let mut lines = Lines {
        inner: r,
        line: 0,
        buf: String::new(),
    };
    let head = lines.next_fields("header")?;
    if head.len() != 2 || head[0].1 != "dtnmesh" || head[1].1 != "1" {
        return Err(lines.err(1, "expected header 'dtnmesh 1'".into()));
    }
    let counts: Vec<usize> = lines.row(3, "counts")?;
    let (nv, nt, nb) = (counts[0], counts[1], counts[2]);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let xy: Vec<f64> = lines.row(2, "vertex")?;
        if !xy.iter().all(|v| v.is_finite()) {
            return Err(lines.err(1, "non-finite coordinate".into()));
        }
        vertices.push(Point2::new(T::of(xy[0]), T::of(xy[1])));
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let t: Vec<usize> = lines.row(3, "triangle")?;
        if let Some(k) = t.iter().position(|&v| v >= nv) {
            return Err(lines.err(k + 1, format!("vertex index {} out of range", t[k])));
        }
        triangles.push([t[0], t[1], t[2]]);
    }
    let mut boundary_edges = Vec::with_capacity(nb);
    for _ in 0..nb {
        let e: Vec<u64> = lines.row(4, "boundary edge")?;
        if e[0] as usize >= nv || e[1] as usize >= nv {
            return Err(lines.err(1, "boundary vertex index out of range".into()));
        }
        boundary_edges.push(BoundaryEdge {
            v: [e[0] as usize, e[1] as usize],
            component: e[2] as u32,
            segment: e[3] as u32,
        });
    }
    let mut mesh = Mesh {
        vertices,
        triangles,
        boundary_edges,
        domain: DomainSpec::Imported,
        h: T::zero(),
    };
    mesh.h = mesh.max_edge();
    mesh.validate()?;
    Ok(mesh)
}

pub fn mesh_from_str<T: Real>(s: &str) -> Result<Mesh<T>> {
    read_mesh(s.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_domain;

    #[test]
    fn round_trip_is_bit_exact() {
        for spec in [
            DomainSpec::PolygonalDisk {
                radius: 1.0,
                sides: 17,
            },
            DomainSpec::Cusp { eps: 0.3 },
            DomainSpec::Comb { teeth: 3 },
        ] {
            let m: Mesh<f64> = build_domain(&spec, 0.2).unwrap();
            let text = mesh_to_string(&m);
            let back: Mesh<f64> = mesh_from_str(&text).unwrap();
            assert_eq!(back.vertices.len(), m.vertices.len());
            for (a, b) in m.vertices.iter().zip(&back.vertices) {
                assert_eq!(a.x.to_bits(), b.x.to_bits());
                assert_eq!(a.y.to_bits(), b.y.to_bits());
            }
            assert_eq!(back.triangles, m.triangles);
            assert_eq!(back.boundary_edges, m.boundary_edges);
            assert_eq!(mesh_to_string(&back), text);
        }
    }

    #[test]
    fn header_line_and_column_reported() {
        let err = mesh_from_str::<f64>("dtnmesh 1\n3 1 3\n0 0\n1 x\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (4, 3)),
            e => panic!("{e}"),
        }
        assert!(matches!(
            mesh_from_str::<f64>("dtnmesh 2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn invalid_topology_rejected() {
        // Clockwise triangle.
        let text = "dtnmesh 1\n3 1 3\n0 0\n0 1\n1 0\n0 1 2\n0 1 0 0\n1 2 0 0\n2 0 0 0\n";
        assert!(matches!(mesh_from_str::<f64>(text), Err(Error::InvalidMesh(_))));
    }
}
