//! Classical detectors used as comparison anchors. Both return a score
//! where larger means "occupied".

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::radar::MeanRemovedMatrix;

/// Two seconds at the default repetition interval.
pub const DEFAULT_ENERGY_WINDOW: usize = 20;

/// Largest energy of `window` consecutive columns, divided by `window`.
pub fn energy_detector(residual: &MeanRemovedMatrix, window: usize) -> Result<f64> {
    let m = residual.m_slow();
    if window < 1 || window > m {
        return Err(Error::BadWindow { window, cols: m });
    }
    let col_energy: Vec<f64> = (0..m)
        .map(|c| residual.matrix().column(c).iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let mut sum: f64 = col_energy[..window].iter().sum();
    let mut best = sum;
    for c in window..m {
        sum += col_energy[c] - col_energy[c - window];
        best = best.max(sum);
    }
    Ok(best.max(0.0) / window as f64)
}

/// Largest non-DC slow-time spectral magnitude over all fast-time rows,
/// divided by `sqrt(M)`.
pub fn fft_detector(residual: &MeanRemovedMatrix) -> Result<f64> {
    let (n, m) = (residual.n_fast(), residual.m_slow());
    if m < 4 {
        return Err(Error::BadWindow { window: 4, cols: m });
    }
    let fft = FftPlanner::new().plan_fft_forward(m);
    let mut row = vec![Complex64::new(0.0, 0.0); m];
    let mut best: f64 = 0.0;
    for r in 0..n {
        for (c, dst) in row.iter_mut().enumerate() {
            *dst = residual.matrix().get(r, c);
        }
        fft.process(&mut row);
        for z in &row[1..] {
            best = best.max(z.norm());
        }
    }
    Ok(best / (m as f64).sqrt())
}

/// Approximate operation count of [`energy_detector`] on an `n x m` input.
pub fn energy_detector_flops(n: usize, m: usize) -> u64 {
    (3 * n * m + m) as u64
}

/// Approximate operation count of [`fft_detector`] on an `n x m` input
/// (`5 M log2 M` per row transform plus magnitudes).
pub fn fft_detector_flops(n: usize, m: usize) -> u64 {
    let log = (m as f64).log2().ceil().max(1.0);
    (n as f64 * 5.0 * m as f64 * log) as u64 + (3 * n * m) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radar::ComplexMatrix;
    use std::f64::consts::TAU;

    fn residual(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> MeanRemovedMatrix {
        let mut m = ComplexMatrix::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m.set(r, c, f(r, c));
            }
        }
        MeanRemovedMatrix::from_matrix(m)
    }

    #[test]
    fn energy_window_examples() {
        let x = residual(1, 4, |_, c| Complex64::new(if c == 2 { 2.0 } else { 0.0 }, 0.0));
        assert_eq!(energy_detector(&x, 2).unwrap(), 2.0);
        let total = x.energy();
        assert_eq!(energy_detector(&x, 4).unwrap(), total / 4.0);
        let zero = residual(3, 5, |_, _| Complex64::new(0.0, 0.0));
        assert_eq!(energy_detector(&zero, 3).unwrap(), 0.0);
        assert!(matches!(energy_detector(&x, 0), Err(Error::BadWindow { .. })));
        assert!(matches!(energy_detector(&x, 5), Err(Error::BadWindow { .. })));
    }

    #[test]
    fn fft_pure_tone() {
        let m = 64;
        let x = residual(3, m, |r, c| {
            if r == 1 {
                Complex64::from_polar(1.0, TAU * 5.0 * c as f64 / m as f64)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let s = fft_detector(&x).unwrap();
        assert!((s - (m as f64).sqrt()).abs() < 1e-9);
        let zero = residual(2, 8, |_, _| Complex64::new(0.0, 0.0));
        assert_eq!(fft_detector(&zero).unwrap(), 0.0);
        assert!(fft_detector(&residual(1, 3, |_, _| Complex64::new(1.0, 0.0))).is_err());
    }

    #[test]
    fn scale_and_row_permutation() {
        let x = residual(4, 10, |r, c| Complex64::new((r * 7 + c * 3) as f64 % 5.0 - 2.0, (c % 3) as f64));
        let y = residual(4, 10, |r, c| x.matrix().get(3 - r, c) * 3.0);
        let e = energy_detector(&x, 4).unwrap();
        let f = fft_detector(&x).unwrap();
        assert!((energy_detector(&y, 4).unwrap() - 9.0 * e).abs() < 1e-9 * e);
        assert!((fft_detector(&y).unwrap() - 3.0 * f).abs() < 1e-9 * f);
    }
}
