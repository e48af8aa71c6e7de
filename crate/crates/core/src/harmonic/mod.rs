//! Discrete harmonic analysis on meshes: the cotangent Laplacian assembled
//! from edge lengths alone, Dirichlet solves (harmonic extension), Green
//! difference potentials on closed surfaces, conjugate differentials, and
//! level-set tracing.

use crate::boundary::BoundaryFunction;
use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::scalar::Scalar;
use crate::solve::SpdFactor;
use crate::sparse::SparseSymmetricOperator;

mod conjugate;
mod level;

pub use conjugate::{
    conjugate_differential, involution_pullback_check, mandelstam_coordinate, EdgeDifferential,
};
pub use level::{polyline_near_vertex_set, trace_level_set, LevelPoint, LevelPolyline};

/// One real value per mesh vertex.
pub type VertexFunction<T> = Vec<T>;

/// Relative slack allowed on the discrete maximum principle before
/// [`harmonic_extend`] reports a numerical failure. Negative cotangent
/// weights (obtuse triangles) and solver roundoff both eat into it.
pub const MAX_PRINCIPLE_REL_SLACK: f64 = 1e-9;

/// Cotangent-weight Laplacian, computed from edge lengths via the law of
/// cosines. Symmetric with zero row sums by construction; positive
/// semidefiniteness is asserted on probe vectors rather than assumed
/// (obtuse triangles contribute negative weights and are kept as-is).
pub fn assemble_laplacian<T: Scalar>(mesh: &TriangleMesh<T>) -> Result<SparseSymmetricOperator<T>> {
    let n = mesh.n_vertices();
    let mut triplets: Vec<(usize, usize, T)> = Vec::with_capacity(mesh.triangles().len() * 9);
    let half = T::of(0.5);
    for (t, &[a, b, c]) in mesh.triangles().iter().enumerate() {
        let [alpha, beta, gamma] = mesh.corner_angles(t);
        // angle at a corner weights the opposite edge
        for (u, v, ang) in [(b, c, alpha), (c, a, beta), (a, b, gamma)] {
            let w = half * ang.cos() / ang.sin();
            if !w.is_finite() {
                return Err(Error::geometry(format!(
                    "triangle {t} produced a non-finite cotangent weight"
                )));
            }
            triplets.push((u, v, -w));
            triplets.push((u, u, w));
            triplets.push((v, v, w));
        }
    }
    let lap = SparseSymmetricOperator::from_triplets(n, &triplets)?;

    let scale = lap.max_abs_entry();
    if lap.max_row_sum().as_f64() > 1e-11 * scale.as_f64() {
        return Err(Error::Numerical {
            message: "Laplacian row sums are not numerically zero".into(),
            residual: (lap.max_row_sum() / scale).as_f64(),
        });
    }
    // PSD probe: a handful of deterministic pseudo-random vectors
    let mut state = 0x9e3779b97f4a7c15u64;
    for _ in 0..4 {
        let probe: Vec<T> = (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                T::of(((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5)
            })
            .collect();
        let q = lap.quadratic_form(&probe);
        if q.as_f64() < -1e-10 * scale.as_f64() * n as f64 {
            return Err(Error::Numerical {
                message: "Laplacian lost positive semidefiniteness".into(),
                residual: q.as_f64().abs(),
            });
        }
    }
    Ok(lap)
}

/// Dirichlet energy `∫ |∇u|²` of a piecewise-linear vertex function — the
/// Laplacian quadratic form (no 1/2 factor; the conformal modulus of an
/// annulus is the reciprocal of this energy for the 0/1 two-cycle solve).
pub fn dirichlet_energy<T: Scalar>(
    laplacian: &SparseSymmetricOperator<T>,
    u: &[T],
) -> T {
    laplacian.quadratic_form(u)
}

/// Solves the interior Dirichlet problem with boundary data `f`, read off
/// along the boundary loop in order. The result satisfies the discrete
/// maximum principle up to [`MAX_PRINCIPLE_REL_SLACK`]; a larger violation
/// is reported as a numerical failure.
pub fn harmonic_extend<T: Scalar>(
    mesh: &TriangleMesh<T>,
    f: &BoundaryFunction<T>,
) -> Result<VertexFunction<T>> {
    let loop_ids = mesh.boundary_loop();
    if loop_ids.is_empty() {
        return Err(Error::invalid_input("harmonic extension needs a boundary"));
    }
    if f.n() != loop_ids.len() {
        return Err(Error::invalid_input(format!(
            "boundary data has {} samples, boundary loop has {} vertices",
            f.n(),
            loop_ids.len()
        )));
    }
    let n = mesh.n_vertices();
    let lap = assemble_laplacian(mesh)?;

    let mut u = vec![T::zero(); n];
    for (i, &v) in loop_ids.iter().enumerate() {
        u[v] = f.samples()[i];
    }
    let interior: Vec<usize> = (0..n).filter(|&v| !mesh.is_boundary_vertex(v)).collect();
    if !interior.is_empty() {
        // rhs_I = -(A · g)_I with g = boundary data zero-extended inside
        let ag = lap.apply_vec(&u);
        let rhs: Vec<T> = interior.iter().map(|&v| -ag[v]).collect();
        let (a_ii, _) = lap.restriction(&interior)?;
        let factor = SpdFactor::new(&a_ii)?;
        let x = factor.solve(&a_ii, &rhs)?;
        for (sub, &v) in interior.iter().enumerate() {
            u[v] = x[sub];
        }
    }

    let lo = f.samples().iter().copied().fold(T::infinity(), T::min);
    let hi = f.samples().iter().copied().fold(T::neg_infinity(), T::max);
    let scale = (hi - lo).max(lo.abs()).max(hi.abs());
    let slack = T::of(MAX_PRINCIPLE_REL_SLACK) * scale;
    for &v in &u {
        if v < lo - slack || v > hi + slack {
            let excess = (lo - v).max(v - hi);
            return Err(Error::Numerical {
                message: "harmonic extension violates the discrete maximum principle".into(),
                residual: (excess / scale.max(T::one())).as_f64(),
            });
        }
    }
    Ok(u)
}

/// Difference of Green functions on a closed mesh: solves `Δℰ = δ_{q+} −
/// δ_{q−}` with unit point loads, in the mean-zero gauge. Swapping the
/// sources negates the result bit-for-bit (the whole pipeline is
/// sign-symmetric).
pub fn green_difference<T: Scalar>(
    closed: &TriangleMesh<T>,
    q_plus: usize,
    q_minus: usize,
) -> Result<VertexFunction<T>> {
    if !closed.is_closed() {
        return Err(Error::invalid_input("Green difference requires a closed mesh"));
    }
    let n = closed.n_vertices();
    if q_plus >= n || q_minus >= n || q_plus == q_minus {
        return Err(Error::invalid_input("sources must be two distinct vertices"));
    }
    let lap = assemble_laplacian(closed)?;
    // ground the smallest vertex that is not a source, killing the constant
    // kernel; the mean-zero shift below removes the arbitrary choice
    let ground = (0..n)
        .find(|&v| v != q_plus && v != q_minus)
        .expect("mesh has at least three vertices");
    let keep: Vec<usize> = (0..n).filter(|&v| v != ground).collect();
    let (sub, back) = lap.restriction(&keep)?;
    let rhs: Vec<T> = back
        .iter()
        .map(|&v| {
            if v == q_plus {
                T::one()
            } else if v == q_minus {
                -T::one()
            } else {
                T::zero()
            }
        })
        .collect();
    let factor = SpdFactor::new(&sub)?;
    let x = factor.solve(&sub, &rhs)?;
    let mut u = vec![T::zero(); n];
    for (sub_i, &v) in back.iter().enumerate() {
        u[v] = x[sub_i];
    }
    let mean = u.iter().copied().sum::<T>() / T::from_index(n);
    for v in u.iter_mut() {
        *v -= mean;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_flat_disk, make_flat_disk_with_layout, schottky_double};

    #[test]
    fn laplacian_kills_constants() {
        let m = make_flat_disk(16, 3, 1.0).unwrap();
        let lap = assemble_laplacian(&m).unwrap();
        let ones = vec![2.5f64; m.n_vertices()];
        let out = lap.apply_vec(&ones);
        for v in out {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_reproduces_linear_functions_on_flat_disks() {
        let (m, pos) = make_flat_disk_with_layout(24, 5, 1.0).unwrap();
        let lap = assemble_laplacian(&m).unwrap();
        let x: Vec<f64> = pos.iter().map(|p| p[0] + 0.3 * p[1]).collect();
        let out = lap.apply_vec(&x);
        // the outermost band carries arc-length boundary edges, so linear
        // reproduction is exact only where the vertex star avoids it
        let touches_rim = |v: usize| {
            m.neighbors(v)
                .iter()
                .any(|&(u, _)| m.is_boundary_vertex(u))
        };
        for v in 0..m.n_vertices() {
            if m.is_boundary_vertex(v) {
                continue;
            }
            let bound = if touches_rim(v) { 5e-3 } else { 1e-12 };
            assert!(out[v].abs() < bound, "residual {} at {v}", out[v]);
        }
    }

    #[test]
    fn quadratic_form_is_nonnegative_on_random_data() {
        let m = make_flat_disk(16, 3, 1.0).unwrap();
        let lap = assemble_laplacian(&m).unwrap();
        let u: Vec<f64> = (0..m.n_vertices()).map(|i| ((i * 37 + 5) % 11) as f64 - 5.0).collect();
        assert!(lap.quadratic_form(&u) >= 0.0);
    }

    #[test]
    fn extend_constant_stays_constant() {
        let m = make_flat_disk::<f64>(16, 3, 1.0).unwrap();
        let f = BoundaryFunction::constant(16, m.boundary_length(), 7.25).unwrap();
        let u = harmonic_extend(&m, &f).unwrap();
        for v in u {
            assert!((v - 7.25).abs() < 1e-10);
        }
    }

    #[test]
    fn extend_reproduces_planar_coordinate() {
        let (m, pos) = make_flat_disk_with_layout::<f64>(32, 8, 1.0).unwrap();
        let f = BoundaryFunction::new(
            m.boundary_loop().iter().map(|&v| pos[v][0]).collect(),
            m.boundary_length(),
        )
        .unwrap();
        let u = harmonic_extend(&m, &f).unwrap();
        // exact up to the quadrature perturbation of the arc-length rim band
        for v in 0..m.n_vertices() {
            assert!((u[v] - pos[v][0]).abs() < 1e-3, "deviation {}", u[v] - pos[v][0]);
        }
    }

    #[test]
    fn extend_cos3_vanishes_at_center() {
        let m = make_flat_disk::<f64>(64, 16, 1.0).unwrap();
        let f = BoundaryFunction::cosine(64, m.boundary_length(), 3).unwrap();
        let u = harmonic_extend(&m, &f).unwrap();
        // analytic extension r³cos(3θ) vanishes at the center (vertex 0)
        assert!(u[0].abs() < 1e-3, "center value {}", u[0]);
    }

    #[test]
    fn green_difference_swaps_to_exact_negation() {
        let disk = make_flat_disk::<f64>(16, 4, 1.0).unwrap();
        let (d, tau) = schottky_double(&disk).unwrap();
        let q_plus = 0; // disk center, interior
        let q_minus = tau.apply(q_plus);
        let e = green_difference(&d, q_plus, q_minus).unwrap();
        let swapped = green_difference(&d, q_minus, q_plus).unwrap();
        for (a, b) in e.iter().zip(swapped.iter()) {
            // IEEE equality: exact negation, indifferent to the sign of zero
            assert!(*a == -*b, "{a} vs {}", -*b);
        }
    }

    #[test]
    fn green_difference_is_tau_antisymmetric_and_signed() {
        let disk = make_flat_disk(24, 6, 1.0).unwrap();
        let (d, tau) = schottky_double(&disk).unwrap();
        let q_plus = 0;
        let q_minus = tau.apply(0);
        let e = green_difference(&d, q_plus, q_minus).unwrap();
        let osc = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - e.iter().cloned().fold(f64::INFINITY, f64::min);
        for v in 0..d.n_vertices() {
            assert!(
                (e[tau.apply(v)] + e[v]).abs() <= 1e-8 * osc,
                "antisymmetry defect at {v}"
            );
        }
        assert!(e[q_plus] > 0.0);
        assert!(e[q_minus] < 0.0);
        // zero along the fixed curve, to the same tolerance
        for v in tau.fixed_points() {
            assert!(e[v].abs() <= 1e-8 * osc);
        }
    }

    #[test]
    fn green_function_is_symmetric_in_its_arguments() {
        use crate::solve::SpdFactor;
        let disk = make_flat_disk(12, 3, 1.0).unwrap();
        let (d, _) = schottky_double(&disk).unwrap();
        let n = d.n_vertices();
        let lap = assemble_laplacian(&d).unwrap();
        let keep: Vec<usize> = (1..n).collect();
        let (sub, back) = lap.restriction(&keep).unwrap();
        let factor = SpdFactor::new(&sub).unwrap();
        // neutralize with the uniform background charge so each column is a
        // well-posed potential; G(x, y) = g_y(x) after mean-zero gauge
        let solve_one = |y: usize| -> Vec<f64> {
            let rhs: Vec<f64> = back
                .iter()
                .map(|&v| (if v == y { 1.0 } else { 0.0 }) - 1.0 / n as f64)
                .collect();
            let x = factor.solve(&sub, &rhs).unwrap();
            let mut g = vec![0.0; n];
            for (i, &v) in back.iter().enumerate() {
                g[v] = x[i];
            }
            let mean = g.iter().sum::<f64>() / n as f64;
            g.iter().map(|v| v - mean).collect()
        };
        let (y1, y2) = (5, n - 3);
        let g1 = solve_one(y1);
        let g2 = solve_one(y2);
        let scale = g1.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!((g1[y2] - g2[y1]).abs() < 1e-9 * scale);
    }

    #[test]
    fn green_difference_rejects_bordered_mesh() {
        let disk = make_flat_disk(16, 3, 1.0).unwrap();
        assert!(green_difference(&disk, 0, 1).is_err());
    }
}
