//! Matrix norms and error metrics.
//!
//! Every error figure in this crate is a spectral-norm ratio: the largest
//! singular value of the difference over the largest singular value of the
//! reference. Baseline algorithms use the same metric so their sample counts
//! are comparable.

use crate::error::{Error, Result};
use crate::types::ResponseMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Largest singular value of a raw complex matrix.
pub(crate) fn spectral_norm_raw(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let sv = m.clone().singular_values();
    sv.iter().fold(0.0f64, |acc, &v| acc.max(v))
}

/// Largest singular value of a response matrix.
pub fn spectral_norm(m: &ResponseMatrix) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::InvalidInput(
            "spectral norm of a matrix with non-finite entries".into(),
        ));
    }
    Ok(spectral_norm_raw(m.matrix()))
}

/// Relative error ‖approx − truth‖₂ / ‖truth‖₂.
///
/// A zero truth matrix yields +∞ rather than an error so that sweep loops
/// treat the point as "not converged" and keep sampling.
pub fn relative_matrix_error(approx: &ResponseMatrix, truth: &ResponseMatrix) -> Result<f64> {
    if approx.ports() != truth.ports() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {}x{} vs {}x{}",
            approx.ports(),
            approx.ports(),
            truth.ports(),
            truth.ports()
        )));
    }
    let denom = spectral_norm(truth)?;
    let num = spectral_norm(&(approx - truth))?;
    if denom == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(num / denom)
}

/// 20·log10(e) for a positive linear error.
pub fn to_db(e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::Domain(format!(
            "to_db requires a strictly positive argument, got {e}"
        )));
    }
    Ok(20.0 * e.log10())
}

/// Inverse of [`to_db`].
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut StdRng, n: usize) -> ResponseMatrix {
        ResponseMatrix::new(DMatrix::from_fn(n, n, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }))
        .unwrap()
    }

    #[test]
    fn spectral_norm_identity_and_zero() {
        assert_relative_eq!(spectral_norm(&ResponseMatrix::identity(2)).unwrap(), 1.0);
        assert_eq!(spectral_norm(&ResponseMatrix::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn spectral_norm_of_real_diagonal_is_max_abs_entry() {
        let m = ResponseMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(3.0, 0.0),
            c(4.0, 0.0),
        ])))
        .unwrap();
        // singular values of a diagonal matrix are the moduli of its entries
        assert_relative_eq!(spectral_norm(&m).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn spectral_norm_rejects_non_finite() {
        let m = ResponseMatrix::new(DMatrix::from_element(1, 1, c(f64::NAN, 0.0))).unwrap();
        assert!(spectral_norm(&m).is_err());
    }

    #[test]
    fn spectral_norm_is_a_norm() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 4);
            let b = random_matrix(&mut rng, 4);
            let na = spectral_norm(&a).unwrap();
            let nb = spectral_norm(&b).unwrap();
            assert!(na >= 0.0);
            // triangle inequality
            let nsum = spectral_norm(&(&a + &b)).unwrap();
            assert!(nsum <= na + nb + 1e-12);
            // absolute homogeneity
            let k = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let scaled =
                ResponseMatrix::new(a.matrix().map(|v| v * k)).unwrap();
            assert_relative_eq!(
                spectral_norm(&scaled).unwrap(),
                k.norm() * na,
                epsilon = 1e-10,
                max_relative = 1e-10
            );
        }
        // zero iff zero matrix
        assert_eq!(spectral_norm(&ResponseMatrix::zeros(4)).unwrap(), 0.0);
    }

    /// SVD-independent oracle for the spectral norm: the norm is the maximum
    /// Euclidean gain over unit vectors. Random probing bounds it from below,
    /// and refining the best probe by repeated multiplication (power
    /// iteration on AᴴA, no SVD involved) drives the gain to the norm.
    #[test]
    fn spectral_norm_bounds_vector_gain() {
        let mut rng = StdRng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 4);
        let norm = spectral_norm(&a).unwrap();
        let mut best = nalgebra::DVector::from_element(4, c(1.0, 0.0));
        let mut max_gain = 0.0f64;
        for _ in 0..1000 {
            let v = nalgebra::DVector::from_fn(4, |_, _| {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let vn = v.norm();
            if vn == 0.0 {
                continue;
            }
            let unit = &v / c(vn, 0.0);
            let gain = (a.matrix() * &unit).norm();
            // no direction ever beats the norm
            assert!(gain <= norm * (1.0 + 1e-9));
            if gain > max_gain {
                max_gain = gain;
                best = unit;
            }
        }
        for _ in 0..50 {
            let w = a.matrix().adjoint() * (a.matrix() * &best);
            let wn = w.norm();
            if wn == 0.0 {
                break;
            }
            best = w / c(wn, 0.0);
        }
        let refined = (a.matrix() * &best).norm();
        assert!(refined <= norm * (1.0 + 1e-9));
        assert!(
            refined >= norm * (1.0 - 1e-3),
            "refined gain {refined} vs norm {norm}"
        );
    }

    #[test]
    fn relative_error_basic_cases() {
        let i2 = ResponseMatrix::identity(2);
        assert_eq!(relative_matrix_error(&i2, &i2).unwrap(), 0.0);
        let two = ResponseMatrix::new(i2.matrix() * c(2.0, 0.0)).unwrap();
        assert_relative_eq!(relative_matrix_error(&two, &i2).unwrap(), 1.0);
        let a = ResponseMatrix::from_scalar(c(1.001, 0.0));
        let b = ResponseMatrix::from_scalar(c(1.0, 0.0));
        assert_relative_eq!(
            relative_matrix_error(&a, &b).unwrap(),
            1e-3,
            epsilon = 1e-12
        );
    }

    #[test]
    fn relative_error_zero_truth_is_infinite() {
        let a = ResponseMatrix::identity(2);
        let z = ResponseMatrix::zeros(2);
        assert!(relative_matrix_error(&a, &z).unwrap().is_infinite());
    }

    #[test]
    fn relative_error_is_scale_invariant() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..10 {
            let a = random_matrix(&mut rng, 3);
            let b = random_matrix(&mut rng, 3);
            let base = relative_matrix_error(&a, &b).unwrap();
            let k = c(rng.random_range(0.1..3.0), rng.random_range(-2.0..2.0));
            let ka = ResponseMatrix::new(a.matrix().map(|v| v * k)).unwrap();
            let kb = ResponseMatrix::new(b.matrix().map(|v| v * k)).unwrap();
            let scaled = relative_matrix_error(&ka, &kb).unwrap();
            assert_relative_eq!(base, scaled, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn db_conversions() {
        assert_relative_eq!(to_db(1e-3).unwrap(), -60.0, epsilon = 1e-12);
        assert_relative_eq!(to_db(1.0).unwrap(), 0.0);
        assert!(to_db(0.0).is_err());
        assert!(to_db(-1.0).is_err());
        // round trip through the paper-style dB figure
        assert_relative_eq!(to_db(from_db(-72.73)).unwrap(), -72.73, epsilon = 1e-12);
    }
}
