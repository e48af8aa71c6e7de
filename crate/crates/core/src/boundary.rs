//! Spectral calculus on the boundary circle: differentiation, the
//! constant-killing antiderivative, Sobolev norms, operator norms between
//! Sobolev orders, the oscillation seminorm, and trigonometric resampling.
//!
//! All functions live on a uniform-arclength grid of even size N ≥ 8 over a
//! circle of given total length; wavenumber k carries the scaled frequency
//! k̃ = 2πk/L.

use std::io::Write;

use nalgebra::{DMatrix, RealField};
use num_complex::Complex;
use num_traits::Float;
use rustfft::FftNum;

use crate::error::{Error, Result};
use crate::fft::{bin_wavenumber, real_spectrum, real_synthesis};
use crate::scalar::Scalar;

/// Smallest admissible sample count (even; two full wavelengths above
/// Nyquist for the lowest interesting modes).
pub const MIN_BOUNDARY_SAMPLES: usize = 8;

/// Real samples at uniformly spaced arclength nodes `t_i = i·L/N` of a
/// closed boundary curve of total length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction<T> {
    samples: Vec<T>,
    total_length: T,
}

fn check_grid<T: Scalar>(n: usize, total_length: T) -> Result<()> {
    if n < MIN_BOUNDARY_SAMPLES || n % 2 != 0 {
        return Err(Error::invalid_input(format!(
            "boundary grid needs an even sample count of at least {MIN_BOUNDARY_SAMPLES}, got {n}"
        )));
    }
    if !(total_length > T::zero()) || !total_length.is_finite() {
        return Err(Error::invalid_input("boundary length must be positive and finite"));
    }
    Ok(())
}

impl<T: Scalar> BoundaryFunction<T> {
    pub fn new(samples: Vec<T>, total_length: T) -> Result<Self> {
        check_grid(samples.len(), total_length)?;
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid_input("boundary samples must be finite"));
        }
        Ok(BoundaryFunction { samples, total_length })
    }

    /// Samples `f` at the arclength nodes.
    pub fn from_fn(n: usize, total_length: T, f: impl Fn(T) -> T) -> Result<Self> {
        check_grid(n, total_length)?;
        let samples = (0..n)
            .map(|i| f(total_length * T::from_index(i) / T::from_index(n)))
            .collect();
        Self::new(samples, total_length)
    }

    /// `cos(2πk t / L)` on the grid.
    pub fn cosine(n: usize, total_length: T, k: usize) -> Result<Self> {
        check_grid(n, total_length)?;
        let samples = (0..n)
            .map(|i| (T::TAU() * T::from_index(k) * T::from_index(i) / T::from_index(n)).cos())
            .collect();
        Self::new(samples, total_length)
    }

    /// `sin(2πk t / L)` on the grid.
    pub fn sine(n: usize, total_length: T, k: usize) -> Result<Self> {
        check_grid(n, total_length)?;
        let samples = (0..n)
            .map(|i| (T::TAU() * T::from_index(k) * T::from_index(i) / T::from_index(n)).sin())
            .collect();
        Self::new(samples, total_length)
    }

    pub fn constant(n: usize, total_length: T, value: T) -> Result<Self> {
        Self::new(vec![value; n], total_length)
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn total_length(&self) -> T {
        self.total_length
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    /// Arclength coordinate of node `i`.
    pub fn node(&self, i: usize) -> T {
        self.total_length * T::from_index(i) / T::from_index(self.samples.len())
    }

    pub fn mean(&self) -> T {
        self.samples.iter().copied().sum::<T>() / T::from_index(self.samples.len())
    }
}

/// Dense matrix acting on [`BoundaryFunction`] samples over a circle of the
/// stored length.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryOperator<T: RealField> {
    matrix: DMatrix<T>,
    total_length: T,
}

impl<T: Scalar + RealField> BoundaryOperator<T> {
    pub fn new(matrix: DMatrix<T>, total_length: T) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::invalid_input("boundary operator must be square"));
        }
        check_grid(matrix.nrows(), total_length)?;
        if matrix.iter().any(|x| !Float::is_finite(*x)) {
            return Err(Error::invalid_input("boundary operator entries must be finite"));
        }
        Ok(BoundaryOperator { matrix, total_length })
    }

    pub fn identity(n: usize, total_length: T) -> Result<Self> {
        Self::new(DMatrix::identity(n, n), total_length)
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn total_length(&self) -> T {
        self.total_length
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    fn check_compatible(&self, n: usize, total_length: T) -> Result<()> {
        if self.n() != n || !same_circle(self.total_length, total_length) {
            return Err(Error::invalid_input(format!(
                "grid mismatch: operator is N={} L={}, operand is N={} L={}",
                self.n(),
                self.total_length,
                n,
                total_length
            )));
        }
        Ok(())
    }

    pub fn apply(&self, f: &BoundaryFunction<T>) -> Result<BoundaryFunction<T>> {
        self.check_compatible(f.n(), f.total_length())?;
        let x = DMatrix::from_column_slice(f.n(), 1, f.samples());
        let y = &self.matrix * x;
        BoundaryFunction::new(y.column(0).iter().copied().collect(), self.total_length)
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other.n(), other.total_length)?;
        Self::new(&self.matrix * &other.matrix, self.total_length)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other.n(), other.total_length)?;
        Self::new(&self.matrix + &other.matrix, self.total_length)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other.n(), other.total_length)?;
        Self::new(&self.matrix - &other.matrix, self.total_length)
    }

    pub fn scale(&self, factor: T) -> Self {
        BoundaryOperator {
            matrix: self.matrix.clone() * factor,
            total_length: self.total_length,
        }
    }
}

/// Spectral arclength derivative. The Nyquist mode has no well-defined
/// phase and is zeroed (symmetric convention).
pub fn fourier_derivative<T: Scalar + FftNum>(f: &BoundaryFunction<T>) -> BoundaryFunction<T> {
    let n = f.n();
    let mut spec = real_spectrum(f.samples());
    for (i, c) in spec.iter_mut().enumerate() {
        let k = bin_wavenumber(i, n);
        if k.unsigned_abs() * 2 == n {
            *c = Complex::new(T::zero(), T::zero());
        } else {
            let kt = T::TAU() * T::of(k as f64) / f.total_length();
            *c = Complex::new(-c.im * kt, c.re * kt); // multiply by i·k̃
        }
    }
    BoundaryFunction {
        samples: real_synthesis(spec),
        total_length: f.total_length(),
    }
}

/// Spectral antiderivative that vanishes on constants: Fourier division by
/// i·k̃ for k ≠ 0, zero mode mapped to zero. The Nyquist mode is zeroed to
/// mirror [`fourier_derivative`].
pub fn fourier_antiderivative<T: Scalar + FftNum>(f: &BoundaryFunction<T>) -> BoundaryFunction<T> {
    let n = f.n();
    let mut spec = real_spectrum(f.samples());
    for (i, c) in spec.iter_mut().enumerate() {
        let k = bin_wavenumber(i, n);
        if k == 0 || k.unsigned_abs() * 2 == n {
            *c = Complex::new(T::zero(), T::zero());
        } else {
            let kt = T::TAU() * T::of(k as f64) / f.total_length();
            *c = Complex::new(c.im / kt, -c.re / kt); // multiply by 1/(i·k̃)
        }
    }
    BoundaryFunction {
        samples: real_synthesis(spec),
        total_length: f.total_length(),
    }
}

/// Discrete Sobolev norm `(Σ_k (1 + k̃²)^s |a_k|²)^{1/2}` with the L₂(dl)
/// normalization (`a_k = √L · ĉ_k`); order 0 is the L₂(dl) norm.
pub fn sobolev_norm<T: Scalar + FftNum>(f: &BoundaryFunction<T>, s: T) -> T {
    let n = f.n();
    let spec = real_spectrum(f.samples());
    let norm = T::one() / T::from_index(n);
    let mut total = T::zero();
    for (i, c) in spec.iter().enumerate() {
        let k = bin_wavenumber(i, n);
        let kt = T::TAU() * T::of(k as f64) / f.total_length();
        let a2 = f.total_length() * (c * norm).norm_sqr();
        total += (T::one() + kt * kt).powf(s) * a2;
    }
    total.sqrt()
}

/// Max − min of the samples: the oscillation seminorm (norm on functions
/// modulo constants).
pub fn osc_norm<T: Scalar>(f: &BoundaryFunction<T>) -> T {
    let hi = f.samples().iter().copied().fold(T::neg_infinity(), T::max);
    let lo = f.samples().iter().copied().fold(T::infinity(), T::min);
    hi - lo
}

/// Real orthonormal Fourier basis on `n` samples: row 0 the constant, then
/// cos/sin pairs, row n−1 the Nyquist alternation. Returns the basis matrix
/// Q (rows = basis vectors) and each row's scaled wavenumber k̃ = 2πk/L.
pub(crate) fn fourier_basis<T: Scalar + RealField>(n: usize, total_length: T) -> (DMatrix<T>, Vec<T>) {
    let mut q = DMatrix::zeros(n, n);
    let mut kt = vec![T::zero(); n];
    let inv_sqrt_n = Float::sqrt(T::one() / T::from_index(n));
    let amp = Float::sqrt(T::of(2.0) / T::from_index(n));
    for j in 0..n {
        q[(0, j)] = inv_sqrt_n;
    }
    for k in 1..n / 2 {
        let kf = T::from_index(k);
        for j in 0..n {
            let th = T::TAU() * kf * T::from_index(j) / T::from_index(n);
            q[(2 * k - 1, j)] = amp * Float::cos(th);
            q[(2 * k, j)] = amp * Float::sin(th);
        }
        kt[2 * k - 1] = T::TAU() * kf / total_length;
        kt[2 * k] = kt[2 * k - 1];
    }
    for j in 0..n {
        q[(n - 1, j)] = if j % 2 == 0 { inv_sqrt_n } else { -inv_sqrt_n };
    }
    kt[n - 1] = T::TAU() * T::from_index(n / 2) / total_length;
    (q, kt)
}

/// Discrete B(H^{s_in}; H^{s_out}) operator norm: the largest singular
/// value of the Sobolev-weighted matrix `W_out · A · W_in⁻¹` expressed in
/// the Fourier basis.
pub fn operator_norm<T: Scalar + RealField>(a: &BoundaryOperator<T>, s_in: T, s_out: T) -> T {
    let n = a.n();
    let (q, kt) = fourier_basis(n, a.total_length());
    let mut m = &q * a.matrix() * q.transpose();
    let half = T::of(0.5);
    for i in 0..n {
        let w_out = Float::powf(T::one() + kt[i] * kt[i], s_out * half);
        for j in 0..n {
            let w_in = Float::powf(T::one() + kt[j] * kt[j], s_in * half);
            m[(i, j)] = m[(i, j)] * w_out / w_in;
        }
    }
    m.singular_values()
        .iter()
        .copied()
        .fold(T::zero(), Float::max)
}

/// Two total lengths describe the same circle when they agree to within
/// accumulated summation roundoff. Independent discretizations of one
/// smooth boundary reach the same perimeter only up to the order of the
/// floating-point edge-length sum.
pub(crate) fn same_circle<T: Scalar>(a: T, b: T) -> bool {
    Float::abs(a - b) <= T::of(1e-12) * Float::max(Float::abs(a), Float::abs(b))
}

/// Trigonometric resampling onto `n_new` nodes of the same circle; exact on
/// modes below both Nyquist frequencies. Downsampling folds the clipped
/// Nyquist pair; upsampling splits the old Nyquist bin symmetrically.
pub fn resample<T: Scalar + FftNum>(
    f: &BoundaryFunction<T>,
    n_new: usize,
) -> Result<BoundaryFunction<T>> {
    check_grid::<T>(n_new, f.total_length())?;
    let n = f.n();
    if n_new == n {
        return Ok(f.clone());
    }
    let spec = real_spectrum(f.samples());
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; n_new];
    // normalized coefficients, rescaled to the new unnormalized convention
    let factor = T::from_index(n_new) / T::from_index(n);
    let half = T::of(0.5);
    if n_new > n {
        for (i, &c) in spec.iter().enumerate() {
            let k = bin_wavenumber(i, n);
            let c = c.scale(factor);
            if k.unsigned_abs() * 2 == n {
                // old Nyquist splits into a conjugate pair
                out[n / 2] += c.scale(half);
                out[n_new - n / 2] += c.scale(half);
            } else {
                let idx = if k >= 0 { k as usize } else { n_new - k.unsigned_abs() };
                out[idx] = c;
            }
        }
    } else {
        for (i, item) in out.iter_mut().enumerate() {
            let k = bin_wavenumber(i, n_new);
            if k.unsigned_abs() * 2 == n_new {
                // fold the aliasing pair into the new Nyquist bin
                let hi = spec[n_new / 2].scale(factor);
                let lo = spec[n - n_new / 2].scale(factor);
                *item = hi + lo;
            } else {
                let idx = if k >= 0 { k as usize } else { n - k.unsigned_abs() };
                *item = spec[idx].scale(factor);
            }
        }
    }
    Ok(BoundaryFunction {
        samples: real_synthesis(out),
        total_length: f.total_length(),
    })
}

/// Writes `(node index, value)` rows.
pub fn write_samples_csv<T: Scalar, W: Write>(f: &BoundaryFunction<T>, mut out: W) -> Result<()> {
    for (i, v) in f.samples().iter().enumerate() {
        writeln!(out, "{i},{:.16e}", v.as_f64())?;
    }
    Ok(())
}

/// Dense row-major CSV with the one-line header `N=<N> L=<L>`.
pub fn write_operator_csv<T: Scalar + RealField, W: Write>(
    a: &BoundaryOperator<T>,
    mut out: W,
) -> Result<()> {
    writeln!(out, "N={} L={:.16e}", a.n(), a.total_length().as_f64())?;
    for i in 0..a.n() {
        let row: Vec<String> = (0..a.n())
            .map(|j| format!("{:.16e}", a.matrix()[(i, j)].as_f64()))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn band_limited(n: usize, l: f64, max_mode: usize, rng: &mut ChaCha8Rng) -> BoundaryFunction<f64> {
        let coeffs: Vec<(f64, f64)> = (0..=max_mode)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        BoundaryFunction::from_fn(n, l, |t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| {
                    let th = TAU * k as f64 * t / l;
                    a * th.cos() + b * th.sin()
                })
                .sum()
        })
        .unwrap()
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let f = BoundaryFunction::constant(16, 3.0, 4.2).unwrap();
        let d = fourier_derivative(&f);
        assert!(d.samples().iter().all(|&x| x.abs() < 1e-14));
    }

    #[test]
    fn derivative_of_sine_is_scaled_cosine() {
        let l = 5.0;
        let f = BoundaryFunction::sine(64, l, 1).unwrap();
        let d = fourier_derivative(&f);
        let expect = BoundaryFunction::cosine(64, l, 1).unwrap();
        for (a, b) in d.samples().iter().zip(expect.samples()) {
            assert!((a - b * TAU / l).abs() < 1e-13);
        }
    }

    #[test]
    fn product_rule_on_band_limited_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (n, l) = (64, 2.0 * PI);
        let f = band_limited(n, l, 5, &mut rng);
        let g = band_limited(n, l, 5, &mut rng);
        let fg = BoundaryFunction::new(
            f.samples().iter().zip(g.samples()).map(|(a, b)| a * b).collect(),
            l,
        )
        .unwrap();
        let lhs = fourier_derivative(&fg);
        let df = fourier_derivative(&f);
        let dg = fourier_derivative(&g);
        for i in 0..n {
            let rhs = df.samples()[i] * g.samples()[i] + f.samples()[i] * dg.samples()[i];
            assert!((lhs.samples()[i] - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn antiderivative_kills_constants_and_inverts_derivative() {
        let c = BoundaryFunction::constant(32, 2.0, -3.0).unwrap();
        assert!(fourier_antiderivative(&c).samples().iter().all(|&x| x.abs() < 1e-14));

        let l = 2.0 * PI;
        let f = BoundaryFunction::cosine(32, l, 3).unwrap();
        let a = fourier_antiderivative(&f);
        let expect = BoundaryFunction::sine(32, l, 3).unwrap();
        for (x, y) in a.samples().iter().zip(expect.samples()) {
            assert!((x - y / 3.0).abs() < 1e-13);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = band_limited(64, 3.7, 10, &mut rng);
        let roundtrip = fourier_antiderivative(&fourier_derivative(&g));
        let mean = g.mean();
        for (x, y) in roundtrip.samples().iter().zip(g.samples()) {
            assert!((x - (y - mean)).abs() < 1e-12);
        }
    }

    #[test]
    fn sobolev_zero_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = band_limited(64, 4.0, 12, &mut rng);
        let quad: f64 = f.samples().iter().map(|x| x * x).sum::<f64>() * 4.0 / 64.0;
        assert!((sobolev_norm(&f, 0.0) - quad.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn sobolev_closed_forms() {
        let one = BoundaryFunction::constant(32, TAU, 1.0).unwrap();
        for s in [-1.0, 0.0, 0.5, 2.0] {
            assert!((sobolev_norm(&one, s) - TAU.sqrt()).abs() < 1e-12);
        }
        let sine = BoundaryFunction::sine(32, TAU, 1).unwrap();
        assert!((sobolev_norm(&sine, 1.0) - TAU.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_identity_and_zero() {
        let id = BoundaryOperator::<f64>::identity(16, 3.0).unwrap();
        for (si, so) in [(0.0, 0.0), (1.0, 1.0), (-0.5, -0.5)] {
            assert!((operator_norm(&id, si, so) - 1.0).abs() < 1e-12);
        }
        let zero = BoundaryOperator::new(DMatrix::zeros(16, 16), 3.0).unwrap();
        assert!(operator_norm(&zero, 1.0, 0.0).abs() < 1e-14);
    }

    #[test]
    fn operator_norm_fourier_multiplier_closed_form() {
        let (n, l) = (32, TAU);
        let (q, kt) = fourier_basis::<f64>(n, l);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(kt.clone()));
        let a = BoundaryOperator::new(q.transpose() * d * &q, l).unwrap();
        let expect = kt
            .iter()
            .map(|k| k / (1.0 + k * k).sqrt())
            .fold(0.0, f64::max);
        assert!((operator_norm(&a, 1.0, 0.0) - expect).abs() < 1e-12);
        assert!(expect < 1.0);
    }

    #[test]
    fn operator_norm_is_submultiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let (n, l) = (16, 2.5);
        for _ in 0..5 {
            let a = BoundaryOperator::new(
                DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)),
                l,
            )
            .unwrap();
            let b = BoundaryOperator::new(
                DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)),
                l,
            )
            .unwrap();
            let ab = a.compose(&b).unwrap();
            let (s, t, u) = (0.5, -0.3, 1.0);
            let lhs = operator_norm(&ab, s, u);
            let rhs = operator_norm(&a, t, u) * operator_norm(&b, s, t);
            assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }

    #[test]
    fn osc_norm_examples_and_invariance() {
        let c = BoundaryFunction::constant(8, 1.0, 9.0).unwrap();
        assert_eq!(osc_norm(&c), 0.0);
        let s = BoundaryFunction::sine(64, TAU, 1).unwrap();
        assert!((osc_norm(&s) - 2.0).abs() < 1e-3);
        let f = BoundaryFunction::new(vec![0.0, 1.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(osc_norm(&f), 3.0);
        // invariance under constants and rotation
        let shifted =
            BoundaryFunction::new(f.samples().iter().map(|x| x + 5.0).collect(), 1.0).unwrap();
        assert_eq!(osc_norm(&shifted), osc_norm(&f));
        let mut rot = f.samples().to_vec();
        rot.rotate_left(3);
        let rot = BoundaryFunction::new(rot, 1.0).unwrap();
        assert_eq!(osc_norm(&rot), osc_norm(&f));
    }

    #[test]
    fn derivative_commutes_with_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = band_limited(32, TAU, 6, &mut rng);
        let shift = 7;
        let mut rot = f.samples().to_vec();
        rot.rotate_left(shift);
        let rot = BoundaryFunction::new(rot, TAU).unwrap();
        let d_then_rot = {
            let mut d = fourier_derivative(&f).into_samples();
            d.rotate_left(shift);
            d
        };
        let rot_then_d = fourier_derivative(&rot);
        for (a, b) in d_then_rot.iter().zip(rot_then_d.samples()) {
            assert!((a - b).abs() < 1e-11);
        }
        // same for the antiderivative
        let a_then_rot = {
            let mut a = fourier_antiderivative(&f).into_samples();
            a.rotate_left(shift);
            a
        };
        let rot_then_a = fourier_antiderivative(&rot);
        for (a, b) in a_then_rot.iter().zip(rot_then_a.samples()) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn resample_roundtrip_and_band_limited_exactness() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let f = band_limited(32, TAU, 6, &mut rng);
        let up = resample(&f, 96).unwrap();
        let back = resample(&up, 32).unwrap();
        for (a, b) in back.samples().iter().zip(f.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
        let c = BoundaryFunction::constant(16, 2.0, 1.5).unwrap();
        let cc = resample(&c, 48).unwrap();
        assert!(cc.samples().iter().all(|&x| (x - 1.5).abs() < 1e-13));
        // a sine below both Nyquists is carried exactly
        let s = BoundaryFunction::sine(32, TAU, 5).unwrap();
        let s16 = resample(&s, 16).unwrap();
        let expect = BoundaryFunction::sine(16, TAU, 5).unwrap();
        for (a, b) in s16.samples().iter().zip(expect.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_csv_header() {
        let id = BoundaryOperator::<f64>::identity(8, 2.0).unwrap();
        let mut buf = Vec::new();
        write_operator_csv(&id, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("N=8 L=2"));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(BoundaryFunction::new(vec![0.0; 7], 1.0).is_err());
        assert!(BoundaryFunction::new(vec![0.0; 9], 1.0).is_err());
        assert!(BoundaryFunction::new(vec![0.0; 8], -1.0).is_err());
        assert!(BoundaryFunction::new(vec![f64::NAN; 8], 1.0).is_err());
    }
}
