//! The discrete Dirichlet-to-Neumann operator and its derived boundary
//! calculus: the Hilbert transform `H = ∂_γ⁻¹ Λ`, the defect operator
//! `𝔇 = H² + I` whose rank counts handles, conformal gauge transport,
//! and Sobolev distances between DN operators.

use std::io::Write as IoWrite;

use nalgebra::{DMatrix, RealField};
use num_traits::Float;
use rustfft::FftNum;

use crate::boundary::{
    fourier_antiderivative, fourier_basis, osc_norm, same_circle, BoundaryFunction,
    BoundaryOperator,
};
use crate::error::{Error, Result};
use crate::harmonic::assemble_laplacian;
use crate::mesh::TriangleMesh;
use crate::scalar::Scalar;
use crate::solve::SpdFactor;

/// Multiplicative singular-value gap that separates handle signal from
/// discretization noise in [`estimate_genus`].
pub const DEFAULT_GAP_FACTOR: f64 = 10.0;

/// Singular values below this absolute level are treated as discretization
/// noise: a defect operator whose whole profile sits under the floor is
/// genus 0. The level matches the certified defect-nullity bound on
/// genus-0 surfaces over the spectral window.
pub const RANK_NOISE_FLOOR: f64 = 3e-2;

/// Spectral comparisons (rank detection, operator distances, defect
/// probes) use Fourier modes `1 ≤ k ≤ N / SPECTRAL_WINDOW_DIVISOR` only.
/// Boundary-layer resolution limits the discrete operator's accuracy well
/// below Nyquist: measured symbol errors on the standard disk family grow
/// past 3% above N/8, and surfaces with coarse interior structure near
/// the boundary (handle surgeries, carved holes) lose another factor, so
/// the window stays at N/16 where every generated family keeps its
/// defect noise under [`RANK_NOISE_FLOOR`].
pub const SPECTRAL_WINDOW_DIVISOR: usize = 16;

/// Relative tolerance on the uniform-spacing precondition of [`dn_matrix`].
const SPACING_DEFECT_TOL: f64 = 1e-6;

/// Largest Fourier mode participating in spectral comparisons at size `n`.
pub fn spectral_window(n: usize) -> usize {
    (n / SPECTRAL_WINDOW_DIVISOR).max(1).min(n / 2 - 1)
}

/// Discrete DN operator: the interior Schur complement of the cotangent
/// Laplacian onto the boundary circle, scaled by the inverse lumped
/// boundary mass so entries approximate the pointwise normal derivative.
#[derive(Debug, Clone)]
pub struct DnMatrix<T: RealField> {
    op: BoundaryOperator<T>,
    provenance: String,
}

impl<T: Scalar + RealField> DnMatrix<T> {
    /// Wraps an operator after checking the structural DN invariant that
    /// constants are annihilated (every DN gauge transport preserves it).
    pub fn from_operator(op: BoundaryOperator<T>, provenance: String) -> Result<Self> {
        let n = op.n();
        let m = op.matrix();
        let mut worst_row = T::zero();
        let mut scale = T::zero();
        for i in 0..n {
            let mut row_sum = T::zero();
            let mut row_abs = T::zero();
            for j in 0..n {
                row_sum += m[(i, j)];
                row_abs += Float::abs(m[(i, j)]);
            }
            worst_row = Float::max(worst_row, Float::abs(row_sum));
            scale = Float::max(scale, row_abs);
        }
        if worst_row.as_f64() > 1e-8 * scale.as_f64() {
            return Err(Error::Numerical {
                message: "DN operator does not annihilate constants".into(),
                residual: (worst_row / scale).as_f64(),
            });
        }
        Ok(Self { op, provenance })
    }

    pub fn operator(&self) -> &BoundaryOperator<T> {
        &self.op
    }

    pub fn into_operator(self) -> BoundaryOperator<T> {
        self.op
    }

    pub fn n(&self) -> usize {
        self.op.n()
    }

    pub fn total_length(&self) -> T {
        self.op.total_length()
    }

    /// Lumped boundary mass per node, `L / N`.
    pub fn mass_weight(&self) -> T {
        self.op.total_length() / T::from_index(self.op.n())
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Rayleigh quotient of the operator on the `cos(kθ)/sin(kθ)` pair —
    /// the discrete DN eigenvalue for the mode, `≈ |k|` on the unit disk.
    pub fn fourier_symbol(&self, k: usize) -> Result<T> {
        let n = self.n();
        if k > n / 2 {
            return Err(Error::invalid_input(format!(
                "mode {k} beyond Nyquist {} for {n} samples",
                n / 2
            )));
        }
        let l = self.total_length();
        let mut num = T::zero();
        let mut den = T::zero();
        for f in [
            BoundaryFunction::cosine(n, l, k)?,
            BoundaryFunction::sine(n, l, k)?,
        ] {
            let g = self.op.apply(&f)?;
            for (a, b) in f.samples().iter().zip(g.samples()) {
                num += *a * *b;
            }
            for a in f.samples() {
                den += *a * *a;
            }
        }
        Ok(num / den)
    }
}

/// Builds the DN operator of a mesh with one uniformly spaced boundary
/// loop: eliminate interior vertices from the cotangent Laplacian, divide
/// by the lumped boundary mass. The result annihilates constants and is
/// symmetric (hence self-adjoint in the uniform boundary mass) up to
/// solver tolerance.
pub fn dn_matrix<T: Scalar + RealField>(mesh: &TriangleMesh<T>) -> Result<DnMatrix<T>> {
    let loop_ids = mesh.boundary_loop().to_vec();
    let n_b = loop_ids.len();
    if n_b == 0 {
        return Err(Error::invalid_input("DN operator requires a boundary"));
    }
    if n_b < 8 || n_b % 2 != 0 {
        return Err(Error::invalid_input(format!(
            "boundary loop of {n_b} vertices cannot carry the spectral grid"
        )));
    }
    let defect = mesh.boundary_spacing_defect().as_f64();
    if defect > SPACING_DEFECT_TOL {
        return Err(Error::invalid_input(format!(
            "boundary spacing is non-uniform (relative spread {defect:.3e})"
        )));
    }
    let total = mesh.boundary_length();
    let lap = assemble_laplacian(mesh)?;

    let n = mesh.n_vertices();
    let interior: Vec<usize> = (0..n).filter(|&v| !mesh.is_boundary_vertex(v)).collect();
    let mut interior_pos = vec![usize::MAX; n];
    for (i, &v) in interior.iter().enumerate() {
        interior_pos[v] = i;
    }

    // columns of the Schur complement: one interior solve per boundary node
    let mut schur = DMatrix::<T>::zeros(n_b, n_b);
    if interior.is_empty() {
        for (jp, &bj) in loop_ids.iter().enumerate() {
            for (ip, &bi) in loop_ids.iter().enumerate() {
                schur[(ip, jp)] = lap.get(bi, bj);
            }
        }
    } else {
        let (a_ii, _) = lap.restriction(&interior)?;
        let factor = SpdFactor::new(&a_ii)?;
        for (jp, &bj) in loop_ids.iter().enumerate() {
            let mut rhs = vec![T::zero(); interior.len()];
            for (col, v) in lap.row(bj) {
                if interior_pos[col] != usize::MAX {
                    rhs[interior_pos[col]] = v;
                }
            }
            let x = factor.solve(&a_ii, &rhs)?;
            for (ip, &bi) in loop_ids.iter().enumerate() {
                let mut acc = lap.get(bi, bj);
                for (col, v) in lap.row(bi) {
                    if interior_pos[col] != usize::MAX {
                        acc -= v * x[interior_pos[col]];
                    }
                }
                schur[(ip, jp)] = acc;
            }
        }
    }

    // lumped-mass scaling turns the weak form into pointwise values
    let mass_inv = T::from_index(n_b) / total;
    let mat = schur * mass_inv;

    // symmetry = self-adjointness in the uniform boundary mass
    let mut defect = T::zero();
    let mut scale = T::zero();
    for i in 0..n_b {
        for j in 0..i {
            defect = Float::max(defect, Float::abs(mat[(i, j)] - mat[(j, i)]));
        }
        scale = Float::max(scale, Float::abs(mat[(i, i)]));
    }
    if defect.as_f64() > 1e-8 * scale.as_f64() {
        return Err(Error::Numerical {
            message: "DN operator lost mass self-adjointness".into(),
            residual: (defect / scale).as_f64(),
        });
    }

    let provenance = format!(
        "mesh V={} T={} N={}",
        mesh.n_vertices(),
        mesh.triangles().len(),
        n_b
    );
    DnMatrix::from_operator(BoundaryOperator::new(mat, total)?, provenance)
}

/// Boundary Hilbert transform `H = ∂_γ⁻¹ Λ`: the constant-killing
/// antiderivative applied to every column of the DN operator.
pub fn hilbert_transform<T: Scalar + RealField + FftNum>(
    dn: &DnMatrix<T>,
) -> Result<BoundaryOperator<T>> {
    let n = dn.n();
    let l = dn.total_length();
    let m = dn.operator().matrix();
    let mut h = DMatrix::<T>::zeros(n, n);
    for j in 0..n {
        let col: Vec<T> = (0..n).map(|i| m[(i, j)]).collect();
        let g = fourier_antiderivative(&BoundaryFunction::new(col, l)?);
        for (i, v) in g.samples().iter().enumerate() {
            h[(i, j)] = *v;
        }
    }
    BoundaryOperator::new(h, l)
}

/// Defect operator `𝔇 = P₀ (H² + I) P₀` on the mean-zero subspace;
/// vanishes on simply connected surfaces and has rank `2·genus` otherwise.
pub fn defect_operator<T: Scalar + RealField>(
    h: &BoundaryOperator<T>,
) -> Result<BoundaryOperator<T>> {
    let n = h.n();
    let m = h.matrix();
    let mut inner = m * m;
    for i in 0..n {
        inner[(i, i)] += T::one();
    }
    let mean = T::one() / T::from_index(n);
    let mut proj = DMatrix::<T>::from_element(n, n, -mean);
    for i in 0..n {
        proj[(i, i)] += T::one();
    }
    BoundaryOperator::new(&proj * inner * &proj, h.total_length())
}

/// Rows of the Fourier basis carrying modes `1 ..= k_max`.
fn band_rows(n: usize, k_max: usize) -> Vec<usize> {
    let mut rows = Vec::with_capacity(2 * k_max);
    for k in 1..=k_max.min(n / 2 - 1) {
        rows.push(2 * k - 1);
        rows.push(2 * k);
    }
    rows
}

/// Singular values of an operator compressed to the spectral window,
/// sorted in decreasing order.
pub fn windowed_singular_values<T: Scalar + RealField>(a: &BoundaryOperator<T>) -> Vec<T> {
    let n = a.n();
    let (q, _) = fourier_basis(n, a.total_length());
    let rows = band_rows(n, spectral_window(n));
    let qw = q.select_rows(rows.iter());
    let block = &qw * a.matrix() * qw.transpose();
    let mut sv: Vec<T> = block.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    sv
}

/// Number of handles read off the defect operator: singular values of the
/// windowed compression are scanned for the first multiplicative gap of
/// `gap_factor` above the noise floor; the count `r` of values before the
/// gap must be even, and the genus is `r / 2`.
pub fn estimate_genus<T: Scalar + RealField>(
    defect: &BoundaryOperator<T>,
    gap_factor: T,
) -> Result<usize> {
    if gap_factor.as_f64() <= 1.0 {
        return Err(Error::invalid_input("gap factor must exceed 1"));
    }
    let sv = windowed_singular_values(defect);
    let profile: Vec<f64> = sv.iter().take(16).map(|v| v.as_f64()).collect();
    if sv.is_empty() {
        return Err(Error::invalid_input("operator too small for rank detection"));
    }
    let floor = T::of(RANK_NOISE_FLOOR);
    if sv[0] < floor {
        return Ok(0);
    }
    for r in 1..sv.len() {
        if sv[r - 1] >= floor && sv[r - 1] >= gap_factor * sv[r] {
            if r % 2 != 0 {
                return Err(Error::IndeterminateRank {
                    message: format!("odd rank {r} at the first spectral gap"),
                    gap_factor: gap_factor.as_f64(),
                    profile,
                });
            }
            return Ok(r / 2);
        }
    }
    Err(Error::IndeterminateRank {
        message: "no clear singular-value gap".into(),
        gap_factor: gap_factor.as_f64(),
        profile,
    })
}

/// Conformal gauge transport of a DN operator: precompose with a boundary
/// reparametrization (trigonometric interpolation), multiply by the
/// boundary conformal factor `ρ^{−1/2}`, postcompose with the inverse
/// reparametrization. A reparametrization that lands exactly on grid
/// nodes is applied as a permutation, bit for bit.
pub fn gauge_transform_dn<T: Scalar + RealField>(
    dn: &DnMatrix<T>,
    sqrt_rho_inv: &BoundaryFunction<T>,
    reparam: &BoundaryFunction<T>,
) -> Result<DnMatrix<T>> {
    let n = dn.n();
    let l = dn.total_length();
    for (name, f) in [("conformal factor", sqrt_rho_inv), ("reparametrization", reparam)] {
        if f.n() != n || !same_circle(f.total_length(), l) {
            return Err(Error::invalid_input(format!(
                "{name} grid does not match the operator"
            )));
        }
    }
    if sqrt_rho_inv.samples().iter().any(|&v| !(v > T::zero())) {
        return Err(Error::invalid_input("conformal factor must be positive"));
    }
    let beta = reparam.samples();
    if beta.iter().any(|&b| !(b >= T::zero()) || b >= l) {
        return Err(Error::invalid_input(
            "reparametrization samples must lie in [0, total length)",
        ));
    }
    // strict monotonicity with exactly one wrap
    let mut total_advance = T::zero();
    for i in 0..n {
        let raw = beta[(i + 1) % n] - beta[i];
        let step = if raw > T::zero() { raw } else { raw + l };
        if !(step > T::zero()) || step >= l {
            return Err(Error::invalid_input(
                "reparametrization is not strictly monotone",
            ));
        }
        total_advance += step;
    }
    if Float::abs(total_advance - l).as_f64() > 1e-8 * l.as_f64() {
        return Err(Error::invalid_input(
            "reparametrization winds the circle more than once",
        ));
    }

    let d = sqrt_rho_inv.samples();
    let m = dn.operator().matrix();
    let h = l / T::from_index(n);
    let on_grid: Option<Vec<usize>> = {
        let mut sigma = Vec::with_capacity(n);
        let mut hit = vec![false; n];
        let mut ok = true;
        for &b in beta {
            let idx = Float::round(b / h).as_f64() as usize % n;
            if Float::abs(b - T::from_index(idx) * h).as_f64() > 1e-9 * l.as_f64() {
                ok = false;
                break;
            }
            if std::mem::replace(&mut hit[idx], true) {
                ok = false;
                break;
            }
            sigma.push(idx);
        }
        (ok && sigma.len() == n).then_some(sigma)
    };

    let mat = if let Some(sigma) = on_grid {
        // exact permutation path: Λ'[i][j] = d[σ⁻¹(i)]·Λ[σ⁻¹(i)][σ⁻¹(j)]
        let mut sigma_inv = vec![0usize; n];
        for (i, &s) in sigma.iter().enumerate() {
            sigma_inv[s] = i;
        }
        DMatrix::from_fn(n, n, |i, j| d[sigma_inv[i]] * m[(sigma_inv[i], sigma_inv[j])])
    } else {
        let (q, _) = fourier_basis(n, l);
        let inv_sqrt_n = Float::sqrt(T::one() / T::from_index(n));
        let amp = Float::sqrt(T::of(2.0) / T::from_index(n));
        let eval = DMatrix::from_fn(n, n, |i, r| {
            if r == 0 {
                inv_sqrt_n
            } else if r == n - 1 {
                let th = T::TAU() * T::from_index(n / 2) * beta[i] / l;
                inv_sqrt_n * Float::cos(th)
            } else {
                let k = T::from_index((r + 1) / 2);
                let th = T::TAU() * k * beta[i] / l;
                if r % 2 == 1 {
                    amp * Float::cos(th)
                } else {
                    amp * Float::sin(th)
                }
            }
        });
        let pre = eval * &q;
        let inv = pre.clone().try_inverse().ok_or_else(|| {
            Error::invalid_input("reparametrization interpolation is numerically singular")
        })?;
        let mut scaled = m * &pre;
        for i in 0..n {
            for j in 0..n {
                scaled[(i, j)] *= d[i];
            }
        }
        inv * scaled
    };
    DnMatrix::from_operator(
        BoundaryOperator::new(mat, l)?,
        format!("{}; gauge", dn.provenance()),
    )
}

/// Sobolev `H¹ → L²` distance between two DN operators on the same grid,
/// measured over the spectral window.
pub fn dn_distance<T: Scalar + RealField>(a: &DnMatrix<T>, b: &DnMatrix<T>) -> Result<T> {
    if a.n() != b.n() || !same_circle(a.total_length(), b.total_length()) {
        return Err(Error::invalid_input(
            "operators live on different grids; resample first",
        ));
    }
    let diff = a.operator().sub(b.operator())?;
    let n = diff.n();
    let (q, kt) = fourier_basis(n, diff.total_length());
    let rows = band_rows(n, spectral_window(n));
    let qw = q.select_rows(rows.iter());
    let mut block = &qw * diff.matrix() * qw.transpose();
    let half = T::of(0.5);
    for bi in 0..rows.len() {
        for (bj, &rj) in rows.iter().enumerate() {
            // s_out = 0, s_in = 1
            let w_in = Float::powf(T::one() + kt[rj] * kt[rj], half);
            block[(bi, bj)] /= w_in;
        }
    }
    Ok(block
        .singular_values()
        .iter()
        .copied()
        .fold(T::zero(), Float::max))
}

/// Oscillation-norm distance between two defect operators: the largest
/// `osc((𝔇₁ − 𝔇₂) f)` over unit-amplitude Fourier probes in the spectral
/// window.
pub fn defect_distance<T: Scalar + RealField>(
    a: &BoundaryOperator<T>,
    b: &BoundaryOperator<T>,
) -> Result<T> {
    if a.n() != b.n() || !same_circle(a.total_length(), b.total_length()) {
        return Err(Error::invalid_input("defect operators live on different grids"));
    }
    let n = a.n();
    let l = a.total_length();
    let diff = a.sub(b)?;
    let mut worst = T::zero();
    for k in 1..=spectral_window(n) {
        for probe in [
            BoundaryFunction::cosine(n, l, k)?,
            BoundaryFunction::sine(n, l, k)?,
        ] {
            let g = diff.apply(&probe)?;
            worst = Float::max(worst, osc_norm(&g));
        }
    }
    Ok(worst)
}

/// Trigonometric resampling of a DN operator onto `n_new` nodes of the
/// same circle: band-limited interpolation in, pointwise application,
/// band-limited restriction out.
pub fn resample_dn<T: Scalar + RealField + FftNum>(
    dn: &DnMatrix<T>,
    n_new: usize,
) -> Result<DnMatrix<T>> {
    use crate::boundary::resample;
    let n = dn.n();
    let l = dn.total_length();
    if n_new == n {
        return Ok(dn.clone());
    }
    let basis_change = |from: usize, to: usize| -> Result<DMatrix<T>> {
        let mut r = DMatrix::<T>::zeros(to, from);
        for j in 0..from {
            let mut delta = vec![T::zero(); from];
            delta[j] = T::one();
            let col = resample(&BoundaryFunction::new(delta, l)?, to)?;
            for (i, v) in col.samples().iter().enumerate() {
                r[(i, j)] = *v;
            }
        }
        Ok(r)
    };
    let down = basis_change(n, n_new)?;
    let up = basis_change(n_new, n)?;
    let mat = down * dn.operator().matrix() * up;
    DnMatrix::from_operator(
        BoundaryOperator::new(mat, l)?,
        format!("{}; resampled to {n_new}", dn.provenance()),
    )
}

/// CSV export of a singular-value profile: header `index,value`, one row
/// per value at full precision.
pub fn write_singular_profile_csv<T: Scalar, W: IoWrite>(out: &mut W, values: &[T]) -> Result<()> {
    writeln!(out, "index,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{:.16e}", v.as_f64())?;
    }
    Ok(())
}
