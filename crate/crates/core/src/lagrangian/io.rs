//! Plain-text mesh format:
//!
//! ```text
//! ifed-mesh 1
//! nodes <M>
//! <x> <y>            (M lines)
//! elements <quad4|seg2|points> <K>
//! <n0> <n1> ...      (K lines)
//! weights <M>        (points meshes only)
//! <w>                (M lines)
//! ```
//! Blank lines and lines starting with `#` are ignored.

use std::io::{BufRead, Write};

use super::mesh::{Elements, LagrangianMesh};
use crate::error::{Error, Result};

pub fn write_mesh<W: Write>(mut w: W, mesh: &LagrangianMesh) -> Result<()> {
    writeln!(w, "ifed-mesh 1")?;
    writeln!(w, "nodes {}", mesh.nodes.len())?;
    for p in &mesh.nodes {
        writeln!(w, "{:e} {:e}", p[0], p[1])?;
    }
    match &mesh.elements {
        Elements::Quad4(q) => {
            writeln!(w, "elements quad4 {}", q.len())?;
            for e in q {
                writeln!(w, "{} {} {} {}", e[0], e[1], e[2], e[3])?;
            }
        }
        Elements::Seg2(s) => {
            writeln!(w, "elements seg2 {}", s.len())?;
            for e in s {
                writeln!(w, "{} {}", e[0], e[1])?;
            }
        }
        Elements::Points => {
            writeln!(w, "elements points 0")?;
            writeln!(w, "weights {}", mesh.weights.len())?;
            for x in &mesh.weights {
                writeln!(w, "{x:e}")?;
            }
        }
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<Vec<String>> {
        loop {
            self.line += 1;
            let l = self
                .inner
                .next()
                .ok_or_else(|| Error::Parse(format!("unexpected end of mesh at line {}", self.line)))??;
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok(t.split_whitespace().map(str::to_owned).collect());
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("mesh line {}: {msg}", self.line))
    }

    fn keyword(&mut self, key: &str, extra: usize) -> Result<Vec<String>> {
        let t = self.next()?;
        if t.first().map(String::as_str) != Some(key) || t.len() != extra + 1 {
            return Err(self.err(&format!("expected `{key}` header")));
        }
        Ok(t[1..].to_vec())
    }

    fn numbers<T: std::str::FromStr>(&mut self, n: usize) -> Result<Vec<T>> {
        let t = self.next()?;
        if t.len() != n {
            return Err(self.err(&format!("expected {n} values, got {}", t.len())));
        }
        t.iter()
            .map(|s| s.parse().map_err(|_| self.err(&format!("bad number `{s}`"))))
            .collect()
    }
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<LagrangianMesh> {
    let mut lines = Lines {
        inner: r.lines(),
        line: 0,
    };
    let v = lines.keyword("ifed-mesh", 1)?;
    if v[0] != "1" {
        return Err(lines.err("unsupported mesh version"));
    }
    let count =
        |lines: &Lines<R>, s: &str| -> Result<usize> { s.parse().map_err(|_| lines.err(&format!("bad count `{s}`"))) };
    let k0 = lines.keyword("nodes", 1)?;
    let m = count(&lines, &k0[0])?;
    let mut nodes = Vec::with_capacity(m);
    for _ in 0..m {
        let p: Vec<f64> = lines.numbers(2)?;
        nodes.push([p[0], p[1]]);
    }
    let h = lines.keyword("elements", 2)?;
    let k = count(&lines, &h[1])?;
    match h[0].as_str() {
        "quad4" => {
            let mut q = Vec::with_capacity(k);
            for _ in 0..k {
                let e: Vec<usize> = lines.numbers(4)?;
                q.push([e[0], e[1], e[2], e[3]]);
            }
            LagrangianMesh::quads(nodes, q)
        }
        "seg2" => {
            let mut s = Vec::with_capacity(k);
            for _ in 0..k {
                let e: Vec<usize> = lines.numbers(2)?;
                s.push([e[0], e[1]]);
            }
            LagrangianMesh::segments(nodes, s)
        }
        "points" => {
            let kw = lines.keyword("weights", 1)?;
            let n = count(&lines, &kw[0])?;
            let mut w = Vec::with_capacity(n);
            for _ in 0..n {
                w.push(lines.numbers::<f64>(1)?[0]);
            }
            LagrangianMesh::points(nodes, w)
        }
        other => Err(lines.err(&format!("unknown element type `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for mesh in [
            LagrangianMesh::cook(3, 0.1, [3.25, 3.5]).unwrap(),
            LagrangianMesh::line([0.0, 0.0], [1.0, 0.3], 5).unwrap(),
            LagrangianMesh::points(vec![[0.1, 0.2], [0.3, 0.4]], vec![0.5, 0.25]).unwrap(),
        ] {
            let mut buf = Vec::new();
            write_mesh(&mut buf, &mesh).unwrap();
            let back = read_mesh(buf.as_slice()).unwrap();
            assert_eq!(back, mesh);
        }
    }

    #[test]
    fn parse_errors() {
        assert!(read_mesh("ifed-mesh 2\n".as_bytes()).is_err());
        assert!(read_mesh("ifed-mesh 1\nnodes 1\n0 0\nelements tri3 0\n".as_bytes()).is_err());
        assert!(read_mesh("ifed-mesh 1\nnodes 2\n0 0\n".as_bytes()).is_err());
        let ok = "# comment\nifed-mesh 1\nnodes 2\n0 0\n\n1 0\nelements seg2 1\n0 1\n";
        assert_eq!(read_mesh(ok.as_bytes()).unwrap().measure(), 1.0);
    }
}
