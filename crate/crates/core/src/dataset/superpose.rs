//! Optimal rigid-body superposition of 3D point sets.
//!
//! The rotation comes from the SVD of the 3x3 cross-covariance of the
//! centered sets, with the smallest singular direction flipped when the
//! plain solution would be a reflection. The RMSD is then evaluated by
//! applying the rotation, which keeps it accurate for nearly identical sets.

use nalgebra::{Matrix3, Vector3};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Superposition {
    /// Proper rotation taking the centered first set onto the centered second.
    pub rotation: [[f64; 3]; 3],
    pub rmsd: f64,
}

/// Superimposes `p` onto `q` after removing both centroids.
pub fn optimal_superposition(p: &[[f64; 3]], q: &[[f64; 3]]) -> Result<Superposition> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::PointSetSize(p.len(), q.len()));
    }
    let flat_p: Vec<f64> = p.iter().flatten().copied().collect();
    let flat_q: Vec<f64> = q.iter().flatten().copied().collect();
    let (rot, rmsd) = superpose_flat(&flat_p, &flat_q);
    let mut rotation = [[0.0; 3]; 3];
    for (r, row) in rotation.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = rot[(r, c)];
        }
    }
    Ok(Superposition { rotation, rmsd })
}

#[inline]
fn point(flat: &[f64], k: usize) -> Vector3<f64> {
    Vector3::new(flat[3 * k], flat[3 * k + 1], flat[3 * k + 2])
}

#[inline]
pub(crate) fn centroid(flat: &[f64]) -> Vector3<f64> {
    let n = flat.len() / 3;
    let mut c = Vector3::zeros();
    for k in 0..n {
        c += point(flat, k);
    }
    c / n as f64
}

/// Rotation for the centered sets plus the resulting RMSD. Flat slices hold
/// `x0 y0 z0 x1 ...`; both must have the same length, a positive multiple of 3.
pub(crate) fn superpose_flat(p: &[f64], q: &[f64]) -> (Matrix3<f64>, f64) {
    debug_assert_eq!(p.len(), q.len());
    let n = p.len() / 3;
    let cp = centroid(p);
    let cq = centroid(q);

    let mut cov = Matrix3::zeros();
    let mut spread_p = 0.0f64;
    let mut spread_q = 0.0f64;
    for k in 0..n {
        let a = point(p, k) - cp;
        let b = point(q, k) - cq;
        cov += b * a.transpose();
        spread_p = spread_p.max(a.amax());
        spread_q = spread_q.max(b.amax());
    }

    let scale = cp.amax().max(cq.amax()).max(1.0);
    let tiny = 16.0 * f64::EPSILON * scale;
    let rot = if spread_p <= tiny || spread_q <= tiny {
        // all points of one set coincide: every rotation is optimal
        Matrix3::identity()
    } else {
        rotation_from_covariance(&cov)
    };

    let mut sq = 0.0;
    for k in 0..n {
        let a = rot * (point(p, k) - cp);
        let b = point(q, k) - cq;
        sq += (a - b).norm_squared();
    }
    (rot, (sq / n as f64).sqrt())
}

/// `cov = sum(q_k p_k^T)`; returns the proper rotation `R` maximizing
/// `trace(R^T cov)`, i.e. minimizing `sum |R p_k - q_k|^2`.
fn rotation_from_covariance(cov: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = cov.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Matrix3::identity(),
    };
    let d = (u * v_t).determinant();
    let mut fix = Matrix3::identity();
    if d < 0.0 {
        // singular values come sorted descending
        fix[(2, 2)] = -1.0;
    }
    u * fix * v_t
}

/// Minimal RMSD between two flat coordinate sets over all rigid-body motions.
#[inline]
pub(crate) fn aligned_rmsd(p: &[f64], q: &[f64]) -> f64 {
    superpose_flat(p, q).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;

    fn rotate(points: &[[f64; 3]], r: &Matrix3<f64>, shift: [f64; 3]) -> Vec<[f64; 3]> {
        points
            .iter()
            .map(|p| {
                let v = r * Vector3::new(p[0], p[1], p[2]);
                [v.x + shift[0], v.y + shift[1], v.z + shift[2]]
            })
            .collect()
    }

    fn unaligned_rmsd(p: &[[f64; 3]], q: &[[f64; 3]]) -> f64 {
        let sq: f64 = p
            .iter()
            .zip(q)
            .map(|(a, b)| (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>())
            .sum();
        (sq / p.len() as f64).sqrt()
    }

    #[test]
    fn identical_sets_give_identity() {
        let p = [[1.0, 2.0, 3.0], [-1.0, 0.5, 2.0], [0.0, -3.0, 1.0], [2.0, 2.0, -2.0]];
        let s = optimal_superposition(&p, &p).unwrap();
        assert!(s.rmsd < 1e-12);
        for (r, row) in s.rotation.iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((x - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn recovers_known_rotation() {
        let p = [
            [1.0, 0.2, -0.4],
            [-0.7, 1.5, 0.3],
            [0.1, -1.2, 2.2],
            [2.0, 0.9, 0.0],
            [-1.1, -0.3, -1.7],
        ];
        let r = Rotation3::from_euler_angles(0.3, -1.1, 2.4).into_inner();
        let q = rotate(&p, &r, [4.0, -2.0, 7.5]);
        let s = optimal_superposition(&p, &q).unwrap();
        assert!(s.rmsd < 1e-9);
        for i in 0..3 {
            for j in 0..3 {
                assert!((s.rotation[i][j] - r[(i, j)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ninety_degrees_about_z_and_shift() {
        let p = [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]];
        let r = Rotation3::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_2).into_inner();
        let q = rotate(&p, &r, [10.0, 10.0, 10.0]);
        let s = optimal_superposition(&p, &q).unwrap();
        assert!(s.rmsd < 1e-12);
    }

    #[test]
    fn rotation_is_proper_and_not_worse_than_unaligned() {
        let mut state = 7u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for _ in 0..200 {
            let p: Vec<[f64; 3]> = (0..6).map(|_| [next(), next(), next()]).collect();
            let q: Vec<[f64; 3]> = (0..6).map(|_| [next(), next(), next()]).collect();
            let s = optimal_superposition(&p, &q).unwrap();
            let m = Matrix3::from_fn(|i, j| s.rotation[i][j]);
            assert!((m.determinant() - 1.0).abs() < 1e-9);
            assert!((m * m.transpose() - Matrix3::identity()).amax() < 1e-9);
            assert!(s.rmsd <= unaligned_rmsd(&p, &q) + 1e-12);
        }
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let p = [[1.0, 1.0, 1.0]; 4];
        let q = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]];
        let s = optimal_superposition(&p, &q).unwrap();
        assert_eq!(s.rotation, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        // translation removal only: rmsd is the spread of q about its centroid
        let cq = [0.5, 0.5, 0.5];
        let direct = (q
            .iter()
            .map(|b| (0..3).map(|k| (b[k] - cq[k]).powi(2)).sum::<f64>())
            .sum::<f64>()
            / 4.0)
            .sqrt();
        assert!((s.rmsd - direct).abs() < 1e-12);
    }

    #[test]
    fn size_mismatch_is_an_error() {
        assert!(optimal_superposition(&[[0.0; 3]], &[]).is_err());
        assert!(optimal_superposition(&[], &[]).is_err());
    }
}
