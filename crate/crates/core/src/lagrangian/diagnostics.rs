use super::forces::deformation_gradient;
use super::mesh::{quad_corner_weights, LagrangianMesh};
use crate::error::{Error, Result};

/// det F at each element centroid. Inverted elements report their negative
/// value rather than failing.
pub fn element_jacobians(mesh: &LagrangianMesh, x: &[[f64; 2]]) -> Vec<f64> {
    (0..mesh.quad_elements().len())
        .map(|e| {
            deformation_gradient(mesh, x, e, 0.0, 0.0)
                .map(|f| f.determinant())
                .unwrap_or(f64::NAN)
        })
        .collect()
}

/// sqrt(Σ_e (J_e − 1)² A_e) with reference element areas A_e.
pub fn jacobian_error_l2(mesh: &LagrangianMesh, x: &[[f64; 2]]) -> f64 {
    let js = element_jacobians(mesh, x);
    mesh.quad_elements()
        .iter()
        .zip(js)
        .map(|(q, j)| {
            let area: f64 = quad_corner_weights(&q.map(|n| mesh.nodes[n])).iter().sum();
            (j - 1.0).powi(2) * area
        })
        .sum::<f64>()
        .sqrt()
}

/// Area enclosed by a closed polygon (shoelace formula, absolute value).
pub fn tracer_area(points: &[[f64; 2]]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::InvalidMesh(format!(
            "polygon area needs at least 3 points, got {}",
            points.len()
        )));
    }
    let n = points.len();
    let mut s = 0.0;
    for k in 0..n {
        let a = points[k];
        let b = points[(k + 1) % n];
        s += a[0] * b[1] - a[1] * b[0];
    }
    Ok(0.5 * s.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::mesh::circle_points;
    use std::f64::consts::PI;

    #[test]
    fn polygon_areas() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert_eq!(tracer_area(&sq).unwrap(), 1.0);
        let m4 = circle_points([0.5, 0.5], 0.25, 4);
        assert!((tracer_area(&m4).unwrap() - 0.125).abs() < 1e-15);
        let big = circle_points([0.5, 0.5], 0.25, 10_000);
        assert!((tracer_area(&big).unwrap() - PI / 16.0).abs() < 1e-7);
        assert!(tracer_area(&sq[..2]).is_err());
    }

    #[test]
    fn jacobians() {
        let mesh = LagrangianMesh::rectangle([0.0, 0.0], [1.0, 1.0], [3, 3]).unwrap();
        assert!(element_jacobians(&mesh, &mesh.nodes)
            .iter()
            .all(|j| (j - 1.0).abs() < 1e-14));
        assert!(jacobian_error_l2(&mesh, &mesh.nodes) < 1e-14);
        let doubled: Vec<_> = mesh.nodes.iter().map(|p| [2.0 * p[0], p[1]]).collect();
        assert!(element_jacobians(&mesh, &doubled)
            .iter()
            .all(|j| (j - 2.0).abs() < 1e-14));
        assert!((jacobian_error_l2(&mesh, &doubled) - 1.0).abs() < 1e-14);
        let flipped: Vec<_> = mesh.nodes.iter().map(|p| [-p[0], p[1]]).collect();
        assert!(element_jacobians(&mesh, &flipped).iter().all(|j| *j < 0.0));
    }
}
