//! Reference meshes: Q1 quadrilaterals for solids, two-node segments for
//! fibers, and bare point sets for tethered markers.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Corners of the reference square, counter-clockwise.
pub const Q1_CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

pub fn q1_shape(xi: f64, eta: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (k, c) in Q1_CORNERS.iter().enumerate() {
        out[k] = 0.25 * (1.0 + c[0] * xi) * (1.0 + c[1] * eta);
    }
    out
}

/// ∂φ_k/∂ξ, ∂φ_k/∂η.
pub fn q1_shape_grad(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    let mut out = [[0.0; 2]; 4];
    for (k, c) in Q1_CORNERS.iter().enumerate() {
        out[k] = [0.25 * c[0] * (1.0 + c[1] * eta), 0.25 * c[1] * (1.0 + c[0] * xi)];
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Elements {
    /// Counter-clockwise bilinear quadrilaterals.
    Quad4(Vec<[usize; 4]>),
    Seg2(Vec<[usize; 2]>),
    /// Isolated markers with prescribed weights.
    Points,
}

impl Elements {
    pub fn tag(&self) -> &'static str {
        match self {
            Elements::Quad4(_) => "quad4",
            Elements::Seg2(_) => "seg2",
            Elements::Points => "points",
        }
    }
}

/// Reference configuration with lumped nodal weights (area for solids,
/// length for fibers).
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianMesh {
    pub nodes: Vec<[f64; 2]>,
    pub elements: Elements,
    pub weights: Vec<f64>,
}

/// Jacobian matrix of the isoparametric map of a quad at (ξ, η), columns
/// ∂x/∂ξ and ∂x/∂η.
pub fn quad_map_jacobian(corners: &[[f64; 2]; 4], xi: f64, eta: f64) -> [[f64; 2]; 2] {
    let g = q1_shape_grad(xi, eta);
    let mut j = [[0.0; 2]; 2];
    for k in 0..4 {
        for a in 0..2 {
            for b in 0..2 {
                j[a][b] += corners[k][a] * g[k][b];
            }
        }
    }
    j
}

fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// ∫_e φ_k dA for each corner. The map determinant is affine in (ξ, η), so
/// det = a + bξ + cη and ∫ φ_k det = a + (b ξ_k + c η_k)/3 exactly.
pub fn quad_corner_weights(corners: &[[f64; 2]; 4]) -> [f64; 4] {
    let d: Vec<f64> = Q1_CORNERS
        .iter()
        .map(|c| det2(&quad_map_jacobian(corners, c[0], c[1])))
        .collect();
    let a = 0.25 * (d[0] + d[1] + d[2] + d[3]);
    let b = 0.25 * (d[1] + d[2] - d[0] - d[3]);
    let c = 0.25 * (d[2] + d[3] - d[0] - d[1]);
    let mut w = [0.0; 4];
    for (k, q) in Q1_CORNERS.iter().enumerate() {
        w[k] = a + (b * q[0] + c * q[1]) / 3.0;
    }
    w
}

impl LagrangianMesh {
    pub fn quads(nodes: Vec<[f64; 2]>, quads: Vec<[usize; 4]>) -> Result<Self> {
        let mut weights = vec![0.0; nodes.len()];
        for (e, q) in quads.iter().enumerate() {
            if q.iter().any(|&n| n >= nodes.len()) {
                return Err(Error::InvalidMesh(format!("element {e} references a missing node")));
            }
            let corners = q.map(|n| nodes[n]);
            for c in Q1_CORNERS {
                let d = det2(&quad_map_jacobian(&corners, c[0], c[1]));
                if !(d > 0.0) {
                    return Err(Error::InvalidMesh(format!(
                        "element {e} is degenerate or not counter-clockwise (det {d})"
                    )));
                }
            }
            let w = quad_corner_weights(&corners);
            for k in 0..4 {
                weights[q[k]] += w[k];
            }
        }
        let mesh = Self {
            nodes,
            elements: Elements::Quad4(quads),
            weights,
        };
        mesh.check_referenced()?;
        Ok(mesh)
    }

    pub fn segments(nodes: Vec<[f64; 2]>, segs: Vec<[usize; 2]>) -> Result<Self> {
        let mut weights = vec![0.0; nodes.len()];
        for (e, s) in segs.iter().enumerate() {
            if s.iter().any(|&n| n >= nodes.len()) {
                return Err(Error::InvalidMesh(format!("segment {e} references a missing node")));
            }
            let len = dist(nodes[s[0]], nodes[s[1]]);
            if !(len > 0.0) {
                return Err(Error::InvalidMesh(format!("segment {e} has zero length")));
            }
            weights[s[0]] += 0.5 * len;
            weights[s[1]] += 0.5 * len;
        }
        let mesh = Self {
            nodes,
            elements: Elements::Seg2(segs),
            weights,
        };
        mesh.check_referenced()?;
        Ok(mesh)
    }

    pub fn points(nodes: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::InvalidMesh("one weight per marker required".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidMesh("marker weights must be positive".into()));
        }
        Ok(Self {
            nodes,
            elements: Elements::Points,
            weights,
        })
    }

    fn check_referenced(&self) -> Result<()> {
        let mut used = vec![false; self.nodes.len()];
        match &self.elements {
            Elements::Quad4(q) => q.iter().flatten().for_each(|&n| used[n] = true),
            Elements::Seg2(s) => s.iter().flatten().for_each(|&n| used[n] = true),
            Elements::Points => return Ok(()),
        }
        if let Some(n) = used.iter().position(|u| !u) {
            return Err(Error::InvalidMesh(format!("node {n} belongs to no element")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Total reference measure (area or length).
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn quad_elements(&self) -> &[[usize; 4]] {
        match &self.elements {
            Elements::Quad4(q) => q,
            _ => &[],
        }
    }

    /// Largest reference element edge length, or marker spacing for fibers.
    pub fn max_edge(&self) -> f64 {
        match &self.elements {
            Elements::Quad4(q) => q
                .iter()
                .flat_map(|e| (0..4).map(move |k| (e[k], e[(k + 1) % 4])))
                .map(|(a, b)| dist(self.nodes[a], self.nodes[b]))
                .fold(0.0, f64::max),
            Elements::Seg2(s) => s
                .iter()
                .map(|e| dist(self.nodes[e[0]], self.nodes[e[1]]))
                .fold(0.0, f64::max),
            Elements::Points => 0.0,
        }
    }

    /// Boundary edges of a quad mesh (edges owned by one element), in
    /// element order, oriented counter-clockwise around the body.
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        let quads = self.quad_elements();
        let mut count = std::collections::HashMap::new();
        for e in quads {
            for k in 0..4 {
                let (a, b) = (e[k], e[(k + 1) % 4]);
                *count.entry((a.min(b), a.max(b))).or_insert(0usize) += 1;
            }
        }
        let mut out = Vec::new();
        for e in quads {
            for k in 0..4 {
                let (a, b) = (e[k], e[(k + 1) % 4]);
                if count[&(a.min(b), a.max(b))] == 1 {
                    out.push([a, b]);
                }
            }
        }
        out
    }

    /// Boundary edges whose reference endpoints both satisfy `pred`.
    pub fn boundary_edges_where(&self, pred: impl Fn([f64; 2]) -> bool) -> Vec<[usize; 2]> {
        self.boundary_edges()
            .into_iter()
            .filter(|e| pred(self.nodes[e[0]]) && pred(self.nodes[e[1]]))
            .collect()
    }

    pub fn nodes_where(&self, pred: impl Fn([f64; 2]) -> bool) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&n| pred(self.nodes[n])).collect()
    }

    /// Index of the node closest to `p` in the reference configuration.
    pub fn nearest_node(&self, p: [f64; 2]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (n, x) in self.nodes.iter().enumerate() {
            let d = dist(*x, p);
            if d < best.0 {
                best = (d, n);
            }
        }
        best.1
    }

    // ----- generators -----

    /// Structured `n[0] × n[1]` quad mesh of the bilinear patch with corners
    /// `c` (counter-clockwise from the lower left).
    pub fn mapped_quad(c: [[f64; 2]; 4], n: [usize; 2]) -> Result<Self> {
        if n[0] == 0 || n[1] == 0 {
            return Err(Error::InvalidMesh("need at least one element per side".into()));
        }
        let mut nodes = Vec::with_capacity((n[0] + 1) * (n[1] + 1));
        for j in 0..=n[1] {
            for i in 0..=n[0] {
                let xi = 2.0 * i as f64 / n[0] as f64 - 1.0;
                let eta = 2.0 * j as f64 / n[1] as f64 - 1.0;
                let phi = q1_shape(xi, eta);
                let mut p = [0.0; 2];
                for k in 0..4 {
                    p[0] += phi[k] * c[k][0];
                    p[1] += phi[k] * c[k][1];
                }
                nodes.push(p);
            }
        }
        let row = n[0] + 1;
        let mut quads = Vec::with_capacity(n[0] * n[1]);
        for j in 0..n[1] {
            for i in 0..n[0] {
                let a = j * row + i;
                quads.push([a, a + 1, a + row + 1, a + row]);
            }
        }
        Self::quads(nodes, quads)
    }

    /// Axis-aligned rectangle `[lo, lo + size]` with `n` elements per side.
    pub fn rectangle(lo: [f64; 2], size: [f64; 2], n: [usize; 2]) -> Result<Self> {
        let hi = [lo[0] + size[0], lo[1] + size[1]];
        let mut m = Self::mapped_quad([lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]], n)?;
        // Snap the far edges so probes located by coordinate are exact.
        let row = n[0] + 1;
        for j in 0..=n[1] {
            for i in 0..=n[0] {
                let p = &mut m.nodes[j * row + i];
                p[0] = lo[0] + size[0] * i as f64 / n[0] as f64;
                p[1] = lo[1] + size[1] * j as f64 / n[1] as f64;
            }
        }
        Ok(m)
    }

    /// Cook's tapered panel (48 × 44 / 16 in its classic units) scaled by
    /// `scale` and shifted by `offset`, with `m × m` elements.
    pub fn cook(m: usize, scale: f64, offset: [f64; 2]) -> Result<Self> {
        let c = [[0.0, 0.0], [48.0, 44.0], [48.0, 60.0], [0.0, 44.0]]
            .map(|p| [offset[0] + scale * p[0], offset[1] + scale * p[1]]);
        Self::mapped_quad(c, [m, m])
    }

    /// Closed fiber of `m` equally spaced markers on a circle. Weights are
    /// the reference arclength spacing 2πr/m.
    pub fn circle_fiber(center: [f64; 2], r: f64, m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidMesh("a closed fiber needs at least 3 nodes".into()));
        }
        let nodes = circle_points(center, r, m);
        let segs = (0..m).map(|k| [k, (k + 1) % m]).collect();
        let mut mesh = Self::segments(nodes, segs)?;
        mesh.weights = vec![2.0 * PI * r / m as f64; m];
        Ok(mesh)
    }

    /// Open fiber from `a` to `b` with `n` segments.
    pub fn line(a: [f64; 2], b: [f64; 2], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("a line needs at least one segment".into()));
        }
        let nodes = (0..=n)
            .map(|k| {
                let s = k as f64 / n as f64;
                [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
            })
            .collect();
        Self::segments(nodes, (0..n).map(|k| [k, k + 1]).collect())
    }
}

/// `m` points equally spaced on a circle, starting on the positive x axis.
pub fn circle_points(center: [f64; 2], r: f64, m: usize) -> Vec<[f64; 2]> {
    (0..m)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / m as f64;
            [center[0] + r * th.cos(), center[1] + r * th.sin()]
        })
        .collect()
}

pub fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}
