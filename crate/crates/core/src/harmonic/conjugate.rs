//! Conjugate differentials: completes the differential of a discrete
//! harmonic function to a complex edge differential `ω = du + i ⋆du`,
//! with the harmonic-conjugate flux recovered by a dual-graph correction.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::mesh::{Involution, TriangleMesh};
use crate::scalar::Scalar;
use crate::solve::SpdFactor;
use crate::sparse::SparseSymmetricOperator;

use super::assemble_laplacian;

/// Per-triangle circulation of the flux part must match its prescribed
/// source content to this fraction of `max|ω|`.
pub const CLOSEDNESS_REL_TOL: f64 = 1e-10;

/// One complex value per mesh edge: the integral of a one-form along the
/// directed edge `lo → hi` of the canonical vertex pair. The value along
/// the reverse direction is the negative.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDifferential<T: Scalar> {
    values: Vec<Complex<T>>,
}

impl<T: Scalar> EdgeDifferential<T> {
    pub fn new(mesh: &TriangleMesh<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != mesh.n_edges() {
            return Err(Error::invalid_input(format!(
                "{} edge values for a mesh with {} edges",
                values.len(),
                mesh.n_edges()
            )));
        }
        Ok(Self { values })
    }

    /// Values in canonical edge order (`lo → hi`).
    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    /// Integral along the directed edge `p → q`.
    pub fn directed(&self, mesh: &TriangleMesh<T>, p: usize, q: usize) -> Result<Complex<T>> {
        let e = mesh
            .edge_index(p, q)
            .ok_or_else(|| Error::invalid_input(format!("no edge between {p} and {q}")))?;
        Ok(if p < q { self.values[e] } else { -self.values[e] })
    }

    /// Largest complex modulus over all edges.
    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .map(|c| c.norm())
            .fold(T::zero(), T::max)
    }
}

/// Chart positions of a triangle's three vertices, laid out from its side
/// lengths with the face orientation counterclockwise.
fn layout<T: Scalar>(lengths: [T; 3]) -> [[T; 2]; 3] {
    let [ab, bc, ca] = lengths;
    let cx = (ab * ab + ca * ca - bc * bc) / (T::of(2.0) * ab);
    let cy = (ca * ca - cx * cx).max(T::zero()).sqrt();
    [[T::zero(), T::zero()], [ab, T::zero()], [cx, cy]]
}

/// Gradient of the linear interpolant of `(va, vb, vc)` over the chart.
fn chart_gradient<T: Scalar>(pos: &[[T; 2]; 3], va: T, vb: T, vc: T) -> [T; 2] {
    let gx = (vb - va) / pos[1][0];
    let gy = (vc - va - gx * pos[2][0]) / pos[2][1];
    [gx, gy]
}

/// Completes a discrete harmonic function to the complex edge differential
/// `ω = du + i ⋆du`. The real part telescopes vertex differences exactly;
/// the flux part is the per-triangle rotated gradient integrated along
/// edges, averaged across each interior edge, then corrected through a
/// dual-graph potential so every triangle circulation equals its share of
/// the discrete source content `(Δu)` — zero on source-free triangles.
///
/// The flux period of the result around a vertex carrying a unit point
/// load is 1 (the 2π of the continuum normalization is absorbed here).
pub fn conjugate_differential<T: Scalar>(
    mesh: &TriangleMesh<T>,
    u: &[T],
) -> Result<EdgeDifferential<T>> {
    let n = mesh.n_vertices();
    if u.len() != n {
        return Err(Error::invalid_input(format!(
            "{} vertex values for a mesh with {} vertices",
            u.len(),
            n
        )));
    }
    let n_tris = mesh.triangles().len();
    let n_edges = mesh.n_edges();

    // one-sided flux integrals, averaged across interior edges
    let mut flux = vec![T::zero(); n_edges];
    let mut sides = vec![0u8; n_edges];
    for (t, &[a, b, c]) in mesh.triangles().iter().enumerate() {
        let pos = layout(mesh.triangle_lengths(t));
        let g = chart_gradient(&pos, u[a], u[b], u[c]);
        let rot = [-g[1], g[0]];
        for (i, (p, q)) in [(a, b), (b, c), (c, a)].into_iter().enumerate() {
            let (pp, qq) = (pos[i], pos[(i + 1) % 3]);
            let along = rot[0] * (qq[0] - pp[0]) + rot[1] * (qq[1] - pp[1]);
            let e = mesh.edge_index(p, q).expect("face edge exists");
            // store in canonical lo -> hi direction
            flux[e] += if p < q { along } else { -along };
            sides[e] += 1;
        }
    }
    let half = T::of(0.5);
    for e in 0..n_edges {
        if sides[e] == 2 {
            flux[e] *= half;
        }
    }

    // source content per vertex, split evenly over its incident faces
    let lap = assemble_laplacian(mesh)?;
    let rho = lap.apply_vec(u);
    let mut face_deg = vec![0usize; n];
    for &[a, b, c] in mesh.triangles() {
        face_deg[a] += 1;
        face_deg[b] += 1;
        face_deg[c] += 1;
    }
    let circulation = |values: &[T], face: &[usize; 3]| -> T {
        let [a, b, c] = *face;
        let mut acc = T::zero();
        for (p, q) in [(a, b), (b, c), (c, a)] {
            let e = mesh.edge_index(p, q).expect("face edge exists");
            let v = values[e];
            acc += if p < q { v } else { -v };
        }
        acc
    };
    let mut target = vec![T::zero(); n_tris];
    let mut rhs = vec![T::zero(); n_tris];
    for (t, face) in mesh.triangles().iter().enumerate() {
        let c_t: T = face.iter().map(|&v| rho[v] / T::from_index(face_deg[v])).sum();
        target[t] = c_t;
        rhs[t] = circulation(&flux, face) - c_t;
    }

    // dual-graph potential: crossing each edge adds the face-potential jump,
    // so a triangle's circulation picks up -(deg·B_t - Σ B_neighbor)
    let mut triplets: Vec<(usize, usize, T)> = Vec::with_capacity(4 * n_tris);
    for t in 0..n_tris {
        // a missing neighbor is the grounded outer face, which still
        // contributes to the diagonal: every triangle has dual degree 3
        triplets.push((t, t, T::of(3.0)));
        for e in mesh.triangle_edge_ids(t) {
            let [t0, t1] = mesh.edge_triangles(e);
            let other = if t0 == Some(t) { t1 } else { t0 };
            if let Some(o) = other {
                triplets.push((t, o, -half));
            }
        }
    }
    let dual = SparseSymmetricOperator::from_triplets(n_tris, &triplets)?;
    let mut potential = vec![T::zero(); n_tris];
    if mesh.is_closed() {
        // constant kernel: pin the first face and solve the rest
        let keep: Vec<usize> = (1..n_tris).collect();
        let (sub, back) = dual.restriction(&keep)?;
        let sub_rhs: Vec<T> = back.iter().map(|&t| rhs[t]).collect();
        let factor = SpdFactor::new(&sub)?;
        let x = factor.solve(&sub, &sub_rhs)?;
        for (i, &t) in back.iter().enumerate() {
            potential[t] = x[i];
        }
    } else {
        let factor = SpdFactor::new(&dual)?;
        potential = factor.solve(&dual, &rhs)?;
    }

    let mut values = Vec::with_capacity(n_edges);
    for e in 0..n_edges {
        let (lo, hi) = mesh.edges()[e];
        let [left, right] = mesh.edge_triangles(e);
        let b_left = left.map_or(T::zero(), |t| potential[t]);
        let b_right = right.map_or(T::zero(), |t| potential[t]);
        values.push(Complex::new(u[hi] - u[lo], flux[e] + (b_right - b_left)));
    }
    let omega = EdgeDifferential { values };

    // verify every circulation matches its prescribed source share; when ω
    // is pure roundoff (constant u) there is nothing meaningful to check
    let scale = omega.max_abs();
    let u_mag = u.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let noise = T::epsilon() * T::of(64.0) * (T::one() + u_mag);
    if scale > noise {
        let im: Vec<T> = omega.values.iter().map(|c| c.im).collect();
        let tol = T::of(CLOSEDNESS_REL_TOL) * scale;
        for (t, face) in mesh.triangles().iter().enumerate() {
            let defect = (circulation(&im, face) - target[t]).abs();
            if defect > tol {
                return Err(Error::Numerical {
                    message: format!("conjugate differential is not closed on triangle {t}"),
                    residual: (defect / scale).as_f64(),
                });
            }
        }
    }
    Ok(omega)
}

/// Max defect of the anti-holomorphic symmetry `ω(τ·edge) = −conj(ω(edge))`
/// over all edges; near zero when `ω` came from a τ-antisymmetric potential.
pub fn involution_pullback_check<T: Scalar>(
    double: &TriangleMesh<T>,
    tau: &Involution,
    omega: &EdgeDifferential<T>,
) -> Result<T> {
    if tau.len() != double.n_vertices() || omega.values.len() != double.n_edges() {
        return Err(Error::invalid_input(
            "involution and differential must belong to the given mesh",
        ));
    }
    let mut worst = T::zero();
    for (e, &(lo, hi)) in double.edges().iter().enumerate() {
        let image = omega.directed(double, tau.apply(lo), tau.apply(hi))?;
        let defect = (image + omega.values[e].conj()).norm();
        worst = worst.max(defect);
    }
    Ok(worst)
}

/// Path integral `∫ ω` along a vertex path from `base` to `target`; its
/// real part telescopes to `u(target) − u(base)` exactly, its imaginary
/// part is path-dependent modulo the flux periods.
pub fn mandelstam_coordinate<T: Scalar>(
    mesh: &TriangleMesh<T>,
    omega: &EdgeDifferential<T>,
    base: usize,
    target: usize,
    path: &[usize],
) -> Result<Complex<T>> {
    if path.first() != Some(&base) || path.last() != Some(&target) {
        return Err(Error::invalid_input(
            "path must start at the base vertex and end at the target",
        ));
    }
    let mut total = Complex::new(T::zero(), T::zero());
    for w in path.windows(2) {
        total += omega.directed(mesh, w[0], w[1])?;
    }
    Ok(total)
}
