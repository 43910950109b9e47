//! Experiment tooling: test-matrix generators, loss-of-biorthogonality
//! measures, Ritz-value tracking and reproducible experiment runs.

pub mod experiment;
pub mod generate;
pub mod mtx;
pub mod poles;
pub mod ritz;

use crate::dense::{self, ComplexMatrix};
use crate::error::{Error, Result};

/// `‖WᴴV − I‖₂`.
pub fn biorthogonality_measure(v: &ComplexMatrix, w: &ComplexMatrix) -> Result<f64> {
    if v.shape() != w.shape() {
        return Err(Error::DimensionMismatch(format!("V is {:?}, W is {:?}", v.shape(), w.shape())));
    }
    Ok(dense::norm2(&(w.adjoint() * v - dense::identity(v.ncols()))))
}

/// `‖W_{n+1}ᴴ·A·V_{n+1}·S̲_n − T̲_n‖₂` for an `(n+1)×n` pencil.
pub fn projection_residual(a: &ComplexMatrix, v: &ComplexMatrix, w: &ComplexMatrix, s: &ComplexMatrix, t: &ComplexMatrix) -> Result<f64> {
    let m = a.nrows();
    let k = v.ncols();
    if !a.is_square() || v.nrows() != m || w.shape() != v.shape() || s.shape() != t.shape() || s.nrows() != k || s.ncols() + 1 != k {
        return Err(Error::DimensionMismatch(format!(
            "A {:?}, V {:?}, W {:?}, S {:?}, T {:?}",
            a.shape(),
            v.shape(),
            w.shape(),
            s.shape(),
            t.shape()
        )));
    }
    Ok(dense::norm2(&(w.adjoint() * a * v * s - t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{c64, C64};
    use crate::diagnostics::generate::{random_complex_vector, random_diagonalizable, random_unitary};
    use crate::lanczos::{rat_lan, LanczosConfig};
    use crate::oracle::oracle_run;
    use crate::pencil::ProjectivePole;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn biorthogonality_of_orthonormal_pair() {
        let mut q = ComplexMatrix::zeros(8, 4);
        q[(0, 0)] = c64(0.6, 0.0);
        q[(1, 0)] = c64(0.0, 0.8);
        q[(0, 1)] = c64(0.0, 0.8);
        q[(1, 1)] = c64(0.6, 0.0);
        q[(4, 2)] = c64(0.0, -1.0);
        q[(7, 3)] = c64(1.0, 0.0);
        assert!(biorthogonality_measure(&q, &q).unwrap() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_unitary(&mut rng, 8).columns(0, 4).into_owned();
        assert!(biorthogonality_measure(&q, &q).unwrap() < 1e-14);
        let two = &q * c64(2.0, 0.0);
        assert!((biorthogonality_measure(&q, &two).unwrap() - 1.0).abs() < 1e-14);
        assert!(biorthogonality_measure(&q, &two.columns(0, 3).into_owned()).is_err());
    }

    fn benign(seed: u64) -> (ComplexMatrix, crate::dense::ComplexVector, crate::dense::ComplexVector) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eigs: Vec<C64> = (1..=12).map(|i| c64(i as f64, 0.0)).collect();
        let a = random_diagonalizable(&mut rng, &eigs);
        (a, random_complex_vector(&mut rng, 12), random_complex_vector(&mut rng, 12))
    }

    #[test]
    fn fresh_run_measures() {
        let (a, v, w) = benign(2);
        let poles = [ProjectivePole::real(0.5), ProjectivePole::real(6.5)];
        let out = rat_lan(&a, &v, &w, 3, &poles, &poles, &LanczosConfig::default()).unwrap();
        assert!(biorthogonality_measure(&out.v, &out.w).unwrap() < 1e-12);
        let two = out.truncated(2);
        let r = projection_residual(&a, &two.v, &two.w, &two.pencil.s_dense(), &two.pencil.t_dense()).unwrap();
        assert!(r < 1e-12 * dense::norm2(&a), "{r}");
    }

    #[test]
    fn oracle_pencil_is_self_consistent() {
        let (a, v, w) = benign(3);
        let poles = vec![ProjectivePole::real(0.5), ProjectivePole::real(6.5), ProjectivePole::real(0.5), ProjectivePole::real(6.5)];
        let run = oracle_run(&a, &v, &w, &poles, &poles, None).unwrap();
        let pencil = run.pencil.expect("oracle pencil");
        let (vo, wo) = (&run.pair.v, &run.pair.w);
        let r = projection_residual(&a, vo, wo, &pencil.primal.s_dense(), &pencil.primal.t_dense()).unwrap();
        assert!(r < 1e-9 * dense::norm2(&a), "{r}");
    }

    #[test]
    fn residual_rejects_bad_shapes() {
        let a = dense::identity(4);
        let v = ComplexMatrix::zeros(4, 3);
        assert!(projection_residual(&a, &v, &v, &ComplexMatrix::zeros(3, 3), &ComplexMatrix::zeros(3, 3)).is_err());
    }
}
