//! Shifted solves `(ν·M − μ·I)⁻¹x` with factorizations cached per pole.

use crate::dense::{ComplexMatrix, ComplexVector, DenseLu, C64, ZERO};
use crate::error::{Error, Result};
use crate::pencil::ProjectivePole;

const CACHE_TOL: f64 = 1e-14;

/// Solver for `(ν·M − μ·I)·y = x` over a fixed matrix `M`.
///
/// `ν = 0` needs no factorization: `y = −x/μ`. Otherwise the LU factors of
/// `ν·M − μ·I` are kept for each distinct projective point, so a request
/// for a scalar multiple `(kμ, kν)` reuses them with a `1/k` rescaling.
#[derive(Debug)]
pub struct ShiftedSolver {
    m: ComplexMatrix,
    cache: Vec<(ProjectivePole, DenseLu)>,
    factorizations: usize,
}

impl ShiftedSolver {
    pub fn new(m: ComplexMatrix) -> Self {
        Self { m, cache: Vec::new(), factorizations: 0 }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    /// Number of LU factorizations computed so far.
    pub fn factorizations(&self) -> usize {
        self.factorizations
    }

    pub fn solve(&mut self, pole: &ProjectivePole, x: &ComplexVector) -> Result<ComplexVector> {
        let (mu, nu) = (pole.mu(), pole.nu());
        if nu == ZERO {
            return Ok(x / (-mu));
        }
        let slot = match self.cache.iter().position(|(p, _)| p.approx_eq(pole, CACHE_TOL)) {
            Some(i) => i,
            None => {
                let n = self.m.nrows();
                let mut shifted = &self.m * nu;
                for i in 0..n {
                    shifted[(i, i)] -= mu;
                }
                let lu = DenseLu::new(shifted).ok_or_else(|| Error::PoleOnSpectrum { pole: pole.to_string() })?;
                self.factorizations += 1;
                self.cache.push((*pole, lu));
                self.cache.len() - 1
            }
        };
        let (cached, lu) = &self.cache[slot];
        let (mu0, nu0) = (cached.mu(), cached.nu());
        let k: C64 = (mu * mu0.conj() + nu * nu0.conj()) / (mu0.norm_sqr() + nu0.norm_sqr());
        let y = lu.solve(x).ok_or_else(|| Error::PoleOnSpectrum { pole: pole.to_string() })?;
        Ok(y / k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{c64, ONE};
    use crate::diagnostics::generate::{random_complex_matrix, random_complex_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn infinite_pole_is_scaling() {
        let mut s = ShiftedSolver::new(ComplexMatrix::zeros(3, 3));
        let x = ComplexVector::from_element(3, ONE);
        let p = ProjectivePole::new(c64(2.0, 0.0), ZERO).unwrap();
        assert_eq!(s.solve(&p, &x).unwrap(), x * c64(-0.5, 0.0));
        assert_eq!(s.factorizations(), 0);
    }

    #[test]
    fn cache_reuses_scaled_poles() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_complex_matrix(&mut rng, 6, 6);
        let x = random_complex_vector(&mut rng, 6);
        let mut s = ShiftedSolver::new(a.clone());
        let p = ProjectivePole::real(0.3);
        let q = ProjectivePole::new(c64(0.0, 0.6), c64(0.0, 2.0)).unwrap();
        let y1 = s.solve(&p, &x).unwrap();
        let y2 = s.solve(&q, &x).unwrap();
        assert_eq!(s.factorizations(), 1);
        let shifted = &a * c64(0.0, 2.0) - ComplexMatrix::identity(6, 6) * c64(0.0, 0.6);
        assert!((&shifted * &y2 - &x).norm() < 1e-12);
        assert!((&a * &y1 - &y1 * c64(0.3, 0.0) - &x).norm() < 1e-12);
    }

    #[test]
    fn pole_on_spectrum_is_reported() {
        let a = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c64(1.0, 0.0), c64(2.0, 0.0)]));
        let mut s = ShiftedSolver::new(a);
        let x = ComplexVector::from_element(2, ONE);
        assert!(matches!(s.solve(&ProjectivePole::real(2.0), &x), Err(Error::PoleOnSpectrum { .. })));
    }
}
