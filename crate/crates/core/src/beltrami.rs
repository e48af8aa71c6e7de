//! Planar Beltrami equation ∂_z̄f = μ·∂_zf by the Beurling-transform
//! Neumann series.
//!
//! Everything lives on a periodic M×M grid over the square [−R, R)².  The
//! whole-plane Beurling and Cauchy transforms are replaced by their Fourier
//! multipliers on that torus; the substitution is justified only when μ is
//! supported in the inner half-square, which [`BeltramiGrid`] enforces, and
//! the quality of the approximation is measured — not assumed — by the PDE
//! residual that [`solve_beltrami`] reports.
//!
//! Conventions: a grid function expands as Σ û(ξ)·e^{i(ξ_x x + ξ_y y)} with
//! ξ = (π/R)·(k_x, k_y) and signed wavenumbers, so with ζ = ξ_x + i·ξ_y the
//! Wirtinger derivatives act as ∂_z ↦ (i/2)·ζ̄ and ∂_z̄ ↦ (i/2)·ζ, and the
//! Beurling transform Π = ∂_z ∘ ∂_z̄⁻¹ is the multiplier ζ̄/ζ.  The ζ = 0
//! values of Π and ∂_z̄⁻¹ are set to zero: the grid mean is invisible to
//! both and stays fixed at zero throughout.

use std::io::{Read, Write};

use num_complex::Complex;
use rustfft::FftNum;

use crate::error::{Error, Result};
use crate::fft::{bin_wavenumber, fft2, ifft2};
use crate::scalar::Scalar;

/// Composition denominators below this magnitude are reported as singular
/// rather than divided through.
pub const COMPOSITION_DENOM_FLOOR: f64 = 1e-6;

/// Complex samples on a uniform M×M grid covering [−R, R)², row-major with
/// the row index running along the imaginary axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid<T> {
    m: usize,
    radius: T,
    values: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexGrid<T> {
    /// Wraps existing samples. `m` must be a power of two and every value
    /// finite.
    pub fn new(m: usize, radius: T, values: Vec<Complex<T>>) -> Result<Self> {
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::invalid_input(format!(
                "grid size {m} is not a power of two (or is < 2)"
            )));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::invalid_input("grid radius must be finite and positive"));
        }
        if values.len() != m * m {
            return Err(Error::invalid_input(format!(
                "expected {} samples for an {m}x{m} grid, got {}",
                m * m,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid_input("grid contains non-finite samples"));
        }
        Ok(ComplexGrid { m, radius, values })
    }

    pub fn zeros(m: usize, radius: T) -> Result<Self> {
        Self::new(m, radius, vec![Complex::new(T::zero(), T::zero()); m * m])
    }

    /// Samples `f` at the grid points z = x + iy, x = −R + col·h,
    /// y = −R + row·h.
    pub fn from_fn(m: usize, radius: T, f: impl Fn(Complex<T>) -> Complex<T>) -> Result<Self> {
        let mut g = Self::zeros(m, radius)?;
        let h = g.spacing();
        for row in 0..m {
            let y = -radius + h * T::from_index(row);
            for col in 0..m {
                let x = -radius + h * T::from_index(col);
                g.values[row * m + col] = f(Complex::new(x, y));
            }
        }
        Ok(g)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    /// Grid spacing h = 2R/M.
    pub fn spacing(&self) -> T {
        (self.radius + self.radius) / T::from_index(self.m)
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// Sample point of the (row, col) entry.
    pub fn point(&self, row: usize, col: usize) -> Complex<T> {
        let h = self.spacing();
        Complex::new(
            -self.radius + h * T::from_index(col),
            -self.radius + h * T::from_index(row),
        )
    }

    pub fn mean(&self) -> Complex<T> {
        let inv = T::one() / T::from_index(self.m * self.m);
        self.values
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |a, v| a + v)
            .scale(inv)
    }

    pub fn sup_norm(&self) -> T {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(T::zero(), Float::max)
    }

    /// Physical L² norm, √(h²·Σ|v|²).
    pub fn l2_norm(&self) -> T {
        let sq: T = self.values.iter().map(|v| v.norm_sqr()).sum();
        Float::sqrt(sq) * self.spacing()
    }

    /// Sup norm over the closed inner half-square |x|, |y| ≤ R/2 — the
    /// region where μ may live and where periodic wrap-around is weakest.
    pub fn inner_sup_norm(&self) -> T {
        let half = self.radius * T::of(0.5);
        let slack = self.spacing() * T::of(1e-9);
        let mut best = T::zero();
        for row in 0..self.m {
            for col in 0..self.m {
                let z = self.point(row, col);
                if Float::abs(z.re) <= half + slack && Float::abs(z.im) <= half + slack {
                    best = Float::max(best, self.values[row * self.m + col].norm());
                }
            }
        }
        best
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.m != other.m || self.radius != other.radius {
            return Err(Error::invalid_input(
                "grids have different sizes or radii; resample first",
            ));
        }
        Ok(())
    }

    fn map2(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        ComplexGrid { m: self.m, radius: self.radius, values }
    }
}

use num_traits::Float;

/// Beltrami coefficient: a [`ComplexGrid`] with ‖μ‖_∞ < 1 and support
/// confined to the closed inner half-square.  The padding ring of exact
/// zeros is what keeps the periodic transforms honest.
#[derive(Debug, Clone)]
pub struct BeltramiGrid<T> {
    grid: ComplexGrid<T>,
    sup: T,
}

impl<T: Scalar> BeltramiGrid<T> {
    pub fn new(grid: ComplexGrid<T>) -> Result<Self> {
        let half = grid.radius * T::of(0.5);
        let slack = grid.spacing() * T::of(1e-9);
        for row in 0..grid.m {
            for col in 0..grid.m {
                let z = grid.point(row, col);
                let outside = Float::abs(z.re) > half + slack || Float::abs(z.im) > half + slack;
                let v = grid.values[row * grid.m + col];
                if outside && (v.re != T::zero() || v.im != T::zero()) {
                    return Err(Error::invalid_input(
                        "coefficient support leaks outside the inner half-square",
                    ));
                }
            }
        }
        let sup = grid.sup_norm();
        if !(sup < T::one()) {
            return Err(Error::invalid_input(format!(
                "coefficient sup-norm {} is not < 1",
                sup.as_f64()
            )));
        }
        Ok(BeltramiGrid { grid, sup })
    }

    pub fn grid(&self) -> &ComplexGrid<T> {
        &self.grid
    }

    pub fn into_grid(self) -> ComplexGrid<T> {
        self.grid
    }

    pub fn sup_norm(&self) -> T {
        self.sup
    }

    pub fn m(&self) -> usize {
        self.grid.m
    }

    pub fn radius(&self) -> T {
        self.grid.radius
    }
}

/// The standard smooth test coefficient: a C^∞ annular bump carrying an
/// e^{2iθ} phase, grid-normalized so the sampled sup-norm is exactly
/// `amplitude`.  The phase makes every Neumann-series term change sign
/// under z ↦ iz, so all grid means vanish identically and the periodic
/// Cauchy inversion loses nothing.
pub fn standard_bump<T: Scalar>(m: usize, radius: T, amplitude: T) -> Result<BeltramiGrid<T>> {
    if !(amplitude >= T::zero()) || !(amplitude < T::one()) {
        return Err(Error::invalid_input("bump amplitude must lie in [0, 1)"));
    }
    let r0 = radius * T::of(0.3);
    let w = radius * T::of(0.15);
    let raw = ComplexGrid::from_fn(m, radius, |z| {
        let r = z.norm();
        let t = (r - r0) / w;
        if Float::abs(t) >= T::one() || r == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        let profile = Float::exp(T::one() - T::one() / (T::one() - t * t));
        // e^{2iθ} = (z/|z|)²
        let phase = (z / r).powu(2);
        phase.scale(profile)
    })?;
    let peak = raw.sup_norm();
    if peak == T::zero() {
        // grid too coarse to see the annulus; only possible for tiny m
        return Err(Error::invalid_input("grid too coarse for the standard bump"));
    }
    let scale = amplitude / peak;
    let values = raw.values.iter().map(|v| v.scale(scale)).collect();
    BeltramiGrid::new(ComplexGrid { m: raw.m, radius: raw.radius, values })
}

fn multiplier_apply<T: Scalar + FftNum>(
    u: &ComplexGrid<T>,
    sym: impl Fn(Complex<T>) -> Complex<T>,
) -> ComplexGrid<T> {
    let m = u.m;
    let mut buf = u.values.clone();
    fft2(&mut buf, m);
    let xi0 = T::PI() / u.radius;
    for row in 0..m {
        let ky = T::from_index(0) + {
            let k = bin_wavenumber(row, m);
            T::of(k as f64)
        };
        for col in 0..m {
            let kx = T::of(bin_wavenumber(col, m) as f64);
            let zeta = Complex::new(kx * xi0, ky * xi0);
            let s = if zeta.re == T::zero() && zeta.im == T::zero() {
                Complex::new(T::zero(), T::zero())
            } else {
                sym(zeta)
            };
            buf[row * m + col] = buf[row * m + col] * s;
        }
    }
    ifft2(&mut buf, m);
    ComplexGrid { m, radius: u.radius, values: buf }
}

/// Beurling transform Π = ∂_z ∘ ∂_z̄⁻¹: the Fourier multiplier ζ̄/ζ with
/// the zero mode annihilated.  Turns ∂_z̄φ into ∂_zφ for smooth φ and is an
/// L² isometry on mean-zero data.
pub fn beurling_transform<T: Scalar + FftNum>(u: &ComplexGrid<T>) -> ComplexGrid<T> {
    let out = multiplier_apply(u, |zeta| zeta.conj() / zeta);
    #[cfg(debug_assertions)]
    {
        // Plancherel: the symbol is unimodular off ζ = 0
        let mu = u.mean();
        let centered: T = u
            .values
            .iter()
            .map(|v| (v - mu).norm_sqr())
            .sum();
        let lhs = out.l2_norm();
        let rhs = Float::sqrt(centered) * u.spacing();
        let scale = Float::max(Float::max(lhs, rhs), T::of(1e-30));
        debug_assert!(
            Float::abs(lhs - rhs) <= T::of(1e-10) * scale,
            "Beurling transform lost L2 mass: {} vs {}",
            lhs.as_f64(),
            rhs.as_f64()
        );
    }
    out
}

/// Periodic Cauchy transform ∂_z̄⁻¹: divides by (i/2)ζ, dropping the mean
/// (which has no periodic antiderivative).
pub fn cauchy_transform<T: Scalar + FftNum>(p: &ComplexGrid<T>) -> ComplexGrid<T> {
    let half_i = Complex::new(T::zero(), T::of(0.5));
    multiplier_apply(p, move |zeta| (half_i * zeta).inv())
}

/// Spectral Wirtinger derivative ∂_z (multiplier (i/2)ζ̄).
pub fn d_z<T: Scalar + FftNum>(u: &ComplexGrid<T>) -> ComplexGrid<T> {
    let half_i = Complex::new(T::zero(), T::of(0.5));
    multiplier_apply(u, move |zeta| half_i * zeta.conj())
}

/// Spectral Wirtinger derivative ∂_z̄ (multiplier (i/2)ζ).
pub fn d_zbar<T: Scalar + FftNum>(u: &ComplexGrid<T>) -> ComplexGrid<T> {
    let half_i = Complex::new(T::zero(), T::of(0.5));
    multiplier_apply(u, move |zeta| half_i * zeta)
}

/// Quasiconformal map produced by [`solve_beltrami`].
#[derive(Debug, Clone)]
pub struct BeltramiSolution<T> {
    /// The map f = z + q sampled on the grid.
    pub map: ComplexGrid<T>,
    /// ∂_z f = 1 + Π p, needed by [`compose_beltrami`].
    pub f_z: ComplexGrid<T>,
    /// Sup of |∂_z̄f − μ·∂_zf| over the inner half-square, recomputed
    /// spectrally from the returned samples.
    pub residual: T,
    /// Number of Neumann terms accumulated.
    pub terms_used: usize,
    /// Sup-norms of the individual terms, for convergence-rate reporting.
    pub term_norms: Vec<T>,
}

/// Solves ∂_z̄f = μ·∂_zf for f = z + q by the Neumann series
/// p = Σ_k (μΠ)^k μ, q = ∂_z̄⁻¹p.  Terms are accumulated until their
/// sup-norm falls to `tol` or `k_max` terms have been used; a term that
/// grows past its predecessor aborts with a divergence error.
pub fn solve_beltrami<T: Scalar + FftNum>(
    mu: &BeltramiGrid<T>,
    k_max: usize,
    tol: T,
) -> Result<BeltramiSolution<T>> {
    if k_max == 0 {
        return Err(Error::invalid_input("k_max must be at least 1"));
    }
    if !(tol >= T::zero()) {
        return Err(Error::invalid_input("tol must be non-negative"));
    }
    let m = mu.m();
    let mug = mu.grid();

    let mut p = ComplexGrid::zeros(m, mu.radius())?;
    let mut term = mug.clone();
    let mut term_norms: Vec<T> = Vec::new();
    let mut terms_used = 0usize;
    loop {
        let norm = term.sup_norm();
        // growth means the contraction ‖μΠ‖ < 1 failed numerically
        if let Some(&prev) = term_norms.last() {
            if norm > prev && norm > Float::max(tol, T::of(1e-200)) {
                return Err(Error::Divergence { sup_mu: mu.sup_norm().as_f64() });
            }
        }
        term_norms.push(norm);
        for (acc, t) in p.values.iter_mut().zip(&term.values) {
            *acc += *t;
        }
        terms_used += 1;
        if norm <= tol || terms_used >= k_max {
            break;
        }
        // next term: μ · Π(term)
        let pi = beurling_transform(&term);
        term = mug.map2(&pi, |a, b| a * b);
    }

    let q = cauchy_transform(&p);
    let one = Complex::new(T::one(), T::zero());
    let f_z = {
        let dq = d_z(&q);
        ComplexGrid {
            m,
            radius: q.radius,
            values: dq.values.iter().map(|&v| one + v).collect(),
        }
    };
    let map = ComplexGrid::from_fn(m, mu.radius(), |z| z)?.map2(&q, |z, qv| z + qv);

    // independent residual: differentiate the stored q, not the series
    let dq_bar = d_zbar(&q);
    let residual_field = ComplexGrid {
        m,
        radius: q.radius,
        values: dq_bar
            .values
            .iter()
            .zip(&f_z.values)
            .zip(&mug.values)
            .map(|((&db, &fz), &muv)| db - muv * fz)
            .collect(),
    };
    let residual = residual_field.inner_sup_norm();

    Ok(BeltramiSolution { map, f_z, residual, terms_used, term_norms })
}

/// Maximal conformal distortion K = (1 + ‖μ‖_∞)/(1 − ‖μ‖_∞).
pub fn dilatation<T: Scalar>(mu: &BeltramiGrid<T>) -> T {
    (T::one() + mu.sup_norm()) / (T::one() - mu.sup_norm())
}

/// Coefficient of g∘f⁻¹ from the coefficients of f and g and ∂_zf:
/// (μ_g − μ_f)/(1 − μ̄_f·μ_g) · ∂_zf/∂_zf̄, evaluated at f's source points.
pub fn compose_beltrami<T: Scalar + FftNum>(
    mu_f: &BeltramiGrid<T>,
    mu_g: &BeltramiGrid<T>,
    f_z: &ComplexGrid<T>,
) -> Result<BeltramiGrid<T>> {
    mu_f.grid().same_grid(mu_g.grid())?;
    mu_f.grid().same_grid(f_z)?;
    let m = mu_f.m();
    let floor = T::of(COMPOSITION_DENOM_FLOOR);
    let mut min_denom = T::infinity();
    let mut values = Vec::with_capacity(m * m);
    for i in 0..m * m {
        let a = mu_f.grid().values[i];
        let b = mu_g.grid().values[i];
        let fz = f_z.values[i];
        let num = b - a;
        if num.re == T::zero() && num.im == T::zero() {
            // exact zero numerator needs no phase and keeps padding exact
            values.push(Complex::new(T::zero(), T::zero()));
            continue;
        }
        let denom = Complex::new(T::one(), T::zero()) - a.conj() * b;
        min_denom = Float::min(min_denom, denom.norm());
        min_denom = Float::min(min_denom, fz.norm());
        if denom.norm() < floor || fz.norm() < floor {
            return Err(Error::SingularComposition { min_denom: min_denom.as_f64() });
        }
        let phase = fz / fz.conj();
        values.push(num / denom * phase);
    }
    BeltramiGrid::new(ComplexGrid { m, radius: mu_f.radius(), values })
}

/// Writes a grid as little-endian binary: a 16-byte header (M and R as
/// f64) followed by row-major re/im pairs.
pub fn write_complex_grid<T: Scalar, W: Write>(w: &mut W, grid: &ComplexGrid<T>) -> Result<()> {
    w.write_all(&(grid.m as f64).to_le_bytes())?;
    w.write_all(&grid.radius.as_f64().to_le_bytes())?;
    for v in &grid.values {
        w.write_all(&v.re.as_f64().to_le_bytes())?;
        w.write_all(&v.im.as_f64().to_le_bytes())?;
    }
    Ok(())
}

/// Reads the format written by [`write_complex_grid`].
pub fn read_complex_grid<T: Scalar, R: Read>(r: &mut R) -> Result<ComplexGrid<T>> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let m_raw = f64::from_le_bytes(word);
    r.read_exact(&mut word)?;
    let radius = f64::from_le_bytes(word);
    if !(m_raw.is_finite() && m_raw > 0.0 && m_raw.fract() == 0.0) {
        return Err(Error::invalid_input("grid header: M is not a positive integer"));
    }
    let m = m_raw as usize;
    let mut values = Vec::with_capacity(m * m);
    for _ in 0..m * m {
        r.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        r.read_exact(&mut word)?;
        let im = f64::from_le_bytes(word);
        values.push(Complex::new(T::of(re), T::of(im)));
    }
    ComplexGrid::new(m, T::of(radius), values)
}

/// CSV of Neumann term sup-norms: rows "term,norm".
pub fn write_term_norms_csv<T: Scalar, W: Write>(w: &mut W, norms: &[T]) -> Result<()> {
    writeln!(w, "term,norm")?;
    for (i, n) in norms.iter().enumerate() {
        writeln!(w, "{i},{:.16e}", n.as_f64())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn gaussian(m: usize, radius: f64, sigma: f64) -> ComplexGrid<f64> {
        ComplexGrid::from_fn(m, radius, |z| {
            Complex::new((-z.norm_sqr() / (sigma * sigma)).exp(), 0.0)
        })
        .unwrap()
    }

    /// Band-limited random grid supported everywhere (for transform tests).
    fn random_smooth(m: usize, radius: f64, seed: u64) -> ComplexGrid<f64> {
        let mut rng = StdRng::seed_from_u64(seed);
        let modes: Vec<(i32, i32, Complex<f64>)> = (0..12)
            .map(|_| {
                (
                    rng.gen_range(-4..=4),
                    rng.gen_range(-4..=4),
                    Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
            })
            .collect();
        let xi0 = std::f64::consts::PI / radius;
        ComplexGrid::from_fn(m, radius, |z| {
            modes
                .iter()
                .map(|&(kx, ky, c)| {
                    c * Complex::new(0.0, xi0 * (kx as f64 * z.re + ky as f64 * z.im)).exp()
                })
                .sum()
        })
        .unwrap()
    }

    #[test]
    fn grid_construction_validates() {
        assert!(ComplexGrid::<f64>::zeros(48, 1.0).is_err()); // not a power of two
        assert!(ComplexGrid::<f64>::zeros(64, 0.0).is_err());
        assert!(ComplexGrid::new(8, 1.0, vec![Complex::new(f64::NAN, 0.0); 64]).is_err());
        let g = ComplexGrid::<f64>::zeros(8, 2.0).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.point(0, 0), Complex::new(-2.0, -2.0));
        assert_eq!(g.point(4, 4), Complex::new(0.0, 0.0));
    }

    #[test]
    fn beltrami_grid_enforces_support_and_sup_norm() {
        // support violation: constant 0.5 everywhere
        let g = ComplexGrid::from_fn(32, 1.0, |_| Complex::new(0.5, 0.0)).unwrap();
        assert!(matches!(BeltramiGrid::new(g), Err(Error::InvalidInput(_))));
        // sup-norm violation inside the padding
        let g = ComplexGrid::from_fn(32, 1.0, |z| {
            if z.norm() < 0.4 {
                Complex::new(1.0, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        })
        .unwrap();
        assert!(matches!(BeltramiGrid::new(g), Err(Error::InvalidInput(_))));
        // a legal bump
        let b = standard_bump(64, 1.0, 0.3).unwrap();
        assert!((b.sup_norm() - 0.3).abs() < 1e-15);
        assert!((dilatation(&b) - 1.3 / 0.7).abs() < 1e-14);
    }

    #[test]
    fn beurling_is_a_plancherel_isometry() {
        let u = random_smooth(64, 1.0, 7);
        let pu = beurling_transform(&u);
        let mu = u.mean();
        let centered: f64 = u.values().iter().map(|v| (v - mu).norm_sqr()).sum();
        let lhs = pu.l2_norm();
        let rhs = centered.sqrt() * u.spacing();
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));

        let z = ComplexGrid::<f64>::zeros(16, 1.0).unwrap();
        assert!(beurling_transform(&z).sup_norm() == 0.0);
    }

    #[test]
    fn beurling_swaps_wirtinger_derivatives_of_a_gaussian() {
        // ∂_z̄ e^{−|z|²/σ²} = −(z/σ²)·e^{−|z|²/σ²}, ∂_z picks up z̄ instead
        let (m, radius, sigma) = (512, 1.0, 0.15);
        let s2 = sigma * sigma;
        let dbar = ComplexGrid::from_fn(m, radius, |z| {
            let g = (-z.norm_sqr() / s2).exp();
            -z.scale(g / s2)
        })
        .unwrap();
        let dz_exact = ComplexGrid::from_fn(m, radius, |z| {
            let g = (-z.norm_sqr() / s2).exp();
            -z.conj().scale(g / s2)
        })
        .unwrap();
        let swapped = beurling_transform(&dbar);
        let err: f64 = swapped
            .values()
            .iter()
            .zip(dz_exact.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale: f64 = dz_exact
            .values()
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err / scale <= 1e-8, "relative L2 error {:e}", err / scale);
    }

    #[test]
    fn cauchy_transform_inverts_dzbar_up_to_the_mean() {
        let p = random_smooth(64, 1.0, 21);
        let q = cauchy_transform(&p);
        let back = d_zbar(&q);
        let mean = p.mean();
        let err = back
            .values()
            .iter()
            .zip(p.values())
            .map(|(a, b)| (a - (b - mean)).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10 * p.sup_norm().max(1.0));

        // analytic oracle: p = ∂_z̄(Gaussian) recovers the Gaussian + const
        let sigma = 0.15;
        let s2 = sigma * sigma;
        let g = gaussian(256, 1.0, sigma);
        let dbar = ComplexGrid::from_fn(256, 1.0, |z| {
            let e = (-z.norm_sqr() / s2).exp();
            -z.scale(e / s2)
        })
        .unwrap();
        let rec = cauchy_transform(&dbar);
        let shift = g.mean() - rec.mean();
        let err = rec
            .values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| (a + shift - b).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-8, "L-infinity error {err:e}");
    }

    #[test]
    fn zero_coefficient_gives_the_identity_map() {
        let mu = BeltramiGrid::new(ComplexGrid::<f64>::zeros(64, 1.0).unwrap()).unwrap();
        let sol = solve_beltrami(&mu, 30, 1e-12).unwrap();
        assert_eq!(sol.residual, 0.0);
        assert_eq!(sol.terms_used, 1);
        for (row, col) in [(0usize, 0usize), (17, 40), (63, 1)] {
            assert_eq!(sol.map.values()[row * 64 + col], sol.map.point(row, col));
        }
        assert!(sol.f_z.values().iter().all(|v| *v == Complex::new(1.0, 0.0)));
    }

    #[test]
    fn neumann_series_solves_the_standard_bump() {
        let mu = standard_bump(256, 1.0, 0.3).unwrap();
        let sol = solve_beltrami(&mu, 30, 1e-8).unwrap();
        assert!(sol.terms_used <= 30);
        assert!(sol.residual <= 1e-6, "residual {:e}", sol.residual);
        // geometric decay at rate ≈ ‖μ‖∞ (skip the leading transient)
        let n = sol.term_norms.len();
        assert!(n >= 4);
        let rate = (sol.term_norms[n - 1] / sol.term_norms[2]).powf(1.0 / (n - 3) as f64);
        assert!((0.2..=0.4).contains(&rate), "decay rate {rate}");
        // orientation: |f_z|² − |f_z̄|² > 0 on the inner half-square
        let dq_bar = d_zbar(&ComplexGrid::new(
            256,
            1.0,
            sol.map
                .values()
                .iter()
                .enumerate()
                .map(|(i, &v)| v - sol.map.point(i / 256, i % 256))
                .collect(),
        )
        .unwrap());
        for row in 64..192 {
            for col in 64..192 {
                let i = row * 256 + col;
                let jac = sol.f_z.values()[i].norm_sqr() - dq_bar.values()[i].norm_sqr();
                assert!(jac > 0.0, "Jacobian sign at ({row},{col})");
            }
        }
    }

    #[test]
    fn residual_decreases_with_the_term_budget() {
        let mu = standard_bump(128, 1.0, 0.4).unwrap();
        let mut last = f64::INFINITY;
        for k_max in 1..=8 {
            let sol = solve_beltrami(&mu, k_max, 0.0).unwrap();
            assert_eq!(sol.terms_used, k_max);
            assert!(
                sol.residual < last,
                "residual {:e} did not drop below {last:e} at k_max={k_max}",
                sol.residual
            );
            last = sol.residual;
        }
    }

    #[test]
    fn rough_near_critical_coefficient_diverges() {
        // hard-edged disk at amplitude 0.98: Π concentrates mass on the
        // edge, the sup-norm of μ·Πμ exceeds ‖μ‖∞, and the series stalls
        let g = ComplexGrid::from_fn(128, 1.0, |z| {
            if z.norm() < 0.45 {
                Complex::new(0.98, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        })
        .unwrap();
        let mu = BeltramiGrid::new(g).unwrap();
        match solve_beltrami(&mu, 40, 1e-12) {
            Err(Error::Divergence { sup_mu }) => assert!((sup_mu - 0.98).abs() < 1e-12),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn composition_identities() {
        let mu = standard_bump(64, 1.0, 0.3).unwrap();
        let ones = ComplexGrid::from_fn(64, 1.0, |_| Complex::new(1.0, 0.0)).unwrap();
        // μ over itself cancels exactly
        let zero = compose_beltrami(&mu, &mu, &ones).unwrap();
        assert!(zero.grid().sup_norm() == 0.0);
        // composing with the identity leaves μ alone
        let id = BeltramiGrid::new(ComplexGrid::zeros(64, 1.0).unwrap()).unwrap();
        let same = compose_beltrami(&id, &mu, &ones).unwrap();
        let err = same
            .grid()
            .values()
            .iter()
            .zip(mu.grid().values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err == 0.0);
    }

    #[test]
    fn composition_respects_the_moebius_bound() {
        let mut rng = StdRng::seed_from_u64(99);
        // two random smooth coefficients in the padding contract
        let mut make = |seed: u64| {
            let base = random_smooth(64, 1.0, seed);
            let sup = base.sup_norm();
            let amp = 0.25 + 0.1 * rng.gen_range(0.0..1.0);
            let g = ComplexGrid::from_fn(64, 1.0, |z| {
                let half = 0.5 - 1e-12;
                if z.re.abs() > half || z.im.abs() > half {
                    return Complex::new(0.0, 0.0);
                }
                // taper to zero at the half-square edge
                let cut = (1.0 - (2.0 * z.re).powi(2)) * (1.0 - (2.0 * z.im).powi(2));
                let idx = ((z.im + 1.0) / base.spacing()).round() as usize % 64;
                let jdx = ((z.re + 1.0) / base.spacing()).round() as usize % 64;
                base.values()[idx * 64 + jdx].scale(amp * cut / sup)
            })
            .unwrap();
            BeltramiGrid::new(g).unwrap()
        };
        let mu_f = make(3);
        let mu_g = make(4);
        let ones = ComplexGrid::from_fn(64, 1.0, |_| Complex::new(1.0, 0.0)).unwrap();
        let out = compose_beltrami(&mu_f, &mu_g, &ones).unwrap();
        let (a, b) = (mu_f.sup_norm(), mu_g.sup_norm());
        assert!(out.sup_norm() <= (a + b) / (1.0 - a * b) + 1e-12);
    }

    #[test]
    fn near_singular_composition_is_reported() {
        let mu = standard_bump(64, 1.0, 0.3).unwrap();
        let id = BeltramiGrid::new(ComplexGrid::zeros(64, 1.0).unwrap()).unwrap();
        // ∂_zf vanishing somewhere in the support makes the phase singular
        let bad_fz = ComplexGrid::from_fn(64, 1.0, |z| {
            if (z - Complex::new(0.3, 0.0)).norm() < 0.05 {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(1.0, 0.0)
            }
        })
        .unwrap();
        assert!(matches!(
            compose_beltrami(&id, &mu, &bad_fz),
            Err(Error::SingularComposition { .. })
        ));
    }

    #[test]
    fn binary_grid_io_round_trips() {
        let g = random_smooth(32, 1.5, 5);
        let mut buf = Vec::new();
        write_complex_grid(&mut buf, &g).unwrap();
        assert_eq!(buf.len(), 16 + 16 * 32 * 32);
        let back: ComplexGrid<f64> = read_complex_grid(&mut buf.as_slice()).unwrap();
        assert_eq!(back.m(), 32);
        assert_eq!(back.radius(), 1.5);
        assert_eq!(back.values(), g.values());

        // corrupt header: M not a power of two
        buf[0..8].copy_from_slice(&48.0f64.to_le_bytes());
        assert!(read_complex_grid::<f64, _>(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn term_norm_csv_is_plain_two_column() {
        let mut out = Vec::new();
        write_term_norms_csv(&mut out, &[0.25f64, 0.09]).unwrap();
        let s = String::from_utf8(out).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("term,norm"));
        assert_eq!(lines.next(), Some("0,2.5000000000000000e-1"));
    }
}
