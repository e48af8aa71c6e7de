//! Thin wrappers around rustfft for boundary circles and square grids.
//!
//! All transforms use the e^{+i k x} synthesis convention: `fft` produces
//! unnormalized analysis coefficients, `ifft` divides by the length.

use num_complex::Complex;
use rustfft::{FftNum, FftPlanner};

use crate::scalar::Scalar;

pub fn fft<T: Scalar + FftNum>(data: &mut [Complex<T>]) {
    FftPlanner::new()
        .plan_fft_forward(data.len())
        .process(data);
}

pub fn ifft<T: Scalar + FftNum>(data: &mut [Complex<T>]) {
    let n = data.len();
    FftPlanner::new().plan_fft_inverse(n).process(data);
    let scale = T::one() / T::from_index(n);
    for v in data.iter_mut() {
        *v = v.scale(scale);
    }
}

/// Analysis coefficients of a real sample vector, index k in 0..n maps to
/// wavenumber k for k <= n/2 and k - n above.
pub fn real_spectrum<T: Scalar + FftNum>(samples: &[T]) -> Vec<Complex<T>> {
    let mut buf: Vec<Complex<T>> = samples.iter().map(|&x| Complex::new(x, T::zero())).collect();
    fft(&mut buf);
    buf
}

/// Inverse of [`real_spectrum`]; the imaginary residue is dropped.
pub fn real_synthesis<T: Scalar + FftNum>(mut spectrum: Vec<Complex<T>>) -> Vec<T> {
    ifft(&mut spectrum);
    spectrum.into_iter().map(|c| c.re).collect()
}

/// Signed wavenumber for bin `i` of an `n`-point transform.
#[inline]
pub fn bin_wavenumber(i: usize, n: usize) -> isize {
    if i <= n / 2 {
        i as isize
    } else {
        i as isize - n as isize
    }
}

/// In-place 2-d FFT of an `m` by `m` row-major grid.
pub fn fft2<T: Scalar + FftNum>(data: &mut [Complex<T>], m: usize) {
    assert_eq!(data.len(), m * m);
    let plan = FftPlanner::new().plan_fft_forward(m);
    for row in data.chunks_exact_mut(m) {
        plan.process(row);
    }
    let mut col = vec![Complex::new(T::zero(), T::zero()); m];
    for j in 0..m {
        for i in 0..m {
            col[i] = data[i * m + j];
        }
        plan.process(&mut col);
        for i in 0..m {
            data[i * m + j] = col[i];
        }
    }
}

/// In-place inverse 2-d FFT, normalized by 1/m^2.
pub fn ifft2<T: Scalar + FftNum>(data: &mut [Complex<T>], m: usize) {
    assert_eq!(data.len(), m * m);
    let plan = FftPlanner::new().plan_fft_inverse(m);
    for row in data.chunks_exact_mut(m) {
        plan.process(row);
    }
    let mut col = vec![Complex::new(T::zero(), T::zero()); m];
    for j in 0..m {
        for i in 0..m {
            col[i] = data[i * m + j];
        }
        plan.process(&mut col);
        for i in 0..m {
            data[i * m + j] = col[i];
        }
    }
    let scale = T::one() / T::from_index(m * m);
    for v in data.iter_mut() {
        *v = v.scale(scale);
    }
}
