//! Real-valued network inputs from complex residuals.

use super::arch::Dimensionality;
use super::tensor::Tensor;
use crate::radar::MeanRemovedMatrix;

/// `(2N, M)`: real parts in rows `0..N`, imaginary parts in rows `N..2N`.
/// Fast-time rows become input channels; slow time is the convolution axis.
pub fn stack_real_imag_1d(residual: &MeanRemovedMatrix) -> Tensor {
    let (n, m) = (residual.n_fast(), residual.m_slow());
    let mut t = Tensor::zeros(&[2 * n, m]);
    let data = t.data_mut();
    for col in 0..m {
        for (row, z) in residual.matrix().column(col).iter().enumerate() {
            data[row * m + col] = z.re;
            data[(n + row) * m + col] = z.im;
        }
    }
    t
}

/// `(N, M, 2)`: a trailing real/imaginary channel axis.
pub fn layout_2d(residual: &MeanRemovedMatrix) -> Tensor {
    let (n, m) = (residual.n_fast(), residual.m_slow());
    let mut t = Tensor::zeros(&[n, m, 2]);
    let data = t.data_mut();
    for col in 0..m {
        for (row, z) in residual.matrix().column(col).iter().enumerate() {
            let o = (row * m + col) * 2;
            data[o] = z.re;
            data[o + 1] = z.im;
        }
    }
    t
}

/// Channel-first `(C, H, W)` input for a network of the given kind:
/// `(2N, 1, M)` for 1D, `(2, N, M)` for 2D.
pub fn network_input(residual: &MeanRemovedMatrix, dims: Dimensionality) -> Tensor {
    let (n, m) = (residual.n_fast(), residual.m_slow());
    match dims {
        Dimensionality::OneD => {
            let t = stack_real_imag_1d(residual);
            Tensor::from_vec(&[2 * n, 1, m], t.into_data()).expect("shape")
        }
        Dimensionality::TwoD => {
            let mut t = Tensor::zeros(&[2, n, m]);
            let data = t.data_mut();
            for col in 0..m {
                for (row, z) in residual.matrix().column(col).iter().enumerate() {
                    data[row * m + col] = z.re;
                    data[n * m + row * m + col] = z.im;
                }
            }
            t
        }
    }
}

/// Input shape `(C, H, W)` for an `N x M` residual.
pub fn input_shape(n_fast: usize, m_slow: usize, dims: Dimensionality) -> [usize; 3] {
    match dims {
        Dimensionality::OneD => [2 * n_fast, 1, m_slow],
        Dimensionality::TwoD => [2, n_fast, m_slow],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::normalize_unit_energy;
    use crate::radar::ComplexMatrix;
    use num_complex::Complex64;

    fn residual(n: usize, m: usize, data: Vec<Complex64>) -> MeanRemovedMatrix {
        MeanRemovedMatrix::from_matrix(ComplexMatrix::from_column_major(n, m, data).unwrap())
    }

    fn random(n: usize, m: usize) -> MeanRemovedMatrix {
        let data = (0..n * m)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        residual(n, m, data)
    }

    #[test]
    fn stacking_1d() {
        let r = residual(1, 2, vec![Complex64::new(1.0, 2.0), Complex64::new(3.0, 4.0)]);
        let t = stack_real_imag_1d(&r);
        assert_eq!(t.shape(), &[2, 2]);
        assert_eq!(t.data(), &[1.0, 3.0, 2.0, 4.0]);

        let im = residual(3, 2, vec![Complex64::new(0.0, 1.5); 6]);
        let t = stack_real_imag_1d(&im);
        assert!(t.data()[..6].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn layout_two_d() {
        let r = residual(1, 1, vec![Complex64::new(1.0, 2.0)]);
        let t = layout_2d(&r);
        assert_eq!(t.shape(), &[1, 1, 2]);
        assert_eq!(t.get(&[0, 0, 0]), 1.0);
        assert_eq!(t.get(&[0, 0, 1]), 2.0);
        let real = residual(2, 3, vec![Complex64::new(0.7, 0.0); 6]);
        let t = layout_2d(&real);
        for n in 0..2 {
            for m in 0..3 {
                assert_eq!(t.get(&[n, m, 1]), 0.0);
            }
        }
    }

    #[test]
    fn layouts_preserve_energy() {
        let r = random(5, 7);
        let e = r.energy();
        assert!((stack_real_imag_1d(&r).sum_sq() - e).abs() < 1e-12 * e);
        assert!((layout_2d(&r).sum_sq() - e).abs() < 1e-12 * e);
        for dims in [Dimensionality::OneD, Dimensionality::TwoD] {
            assert!((network_input(&r, dims).sum_sq() - e).abs() < 1e-12 * e);
        }
    }

    #[test]
    fn normalizing_before_or_after_stacking_agrees() {
        let r = random(4, 6);
        let before = stack_real_imag_1d(&normalize_unit_energy(&r).unwrap());
        let stacked = stack_real_imag_1d(&r);
        let k = 1.0 / stacked.sum_sq().sqrt();
        for (a, b) in before.data().iter().zip(stacked.data()) {
            assert!((a - b * k).abs() < 1e-15);
        }
    }

    #[test]
    fn network_input_matches_layouts() {
        let r = random(3, 4);
        let one = network_input(&r, Dimensionality::OneD);
        assert_eq!(one.shape(), &[6, 1, 4]);
        assert_eq!(one.data(), stack_real_imag_1d(&r).data());
        let two = network_input(&r, Dimensionality::TwoD);
        let cl = layout_2d(&r);
        for n in 0..3 {
            for m in 0..4 {
                for c in 0..2 {
                    assert_eq!(two.get(&[c, n, m]), cl.get(&[n, m, c]));
                }
            }
        }
    }
}
