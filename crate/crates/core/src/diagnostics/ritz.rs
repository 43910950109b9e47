//! Ritz values of a square pencil `(T_n, S_n)` and their accuracy classes.

use std::fmt;

use serde::Serialize;

use crate::dense::{self, ComplexMatrix, C64};
use crate::error::{Error, Result};

const COND_LIMIT: f64 = 1e10;
const SINGULAR_PENCIL_TOL: f64 = 1e-13;
const INFINITE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RitzValue {
    Finite(C64),
    Infinite,
}

impl RitzValue {
    pub fn finite(&self) -> Option<C64> {
        match self {
            RitzValue::Finite(z) => Some(*z),
            RitzValue::Infinite => None,
        }
    }

    /// Distance to the nearest point of `spectrum` (infinite for ∞).
    pub fn distance(&self, spectrum: &[C64]) -> f64 {
        match self {
            RitzValue::Finite(z) => spectrum.iter().map(|l| (z - l).norm()).fold(f64::INFINITY, f64::min),
            RitzValue::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for RitzValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RitzValue::Finite(z) => write!(f, "{z}"),
            RitzValue::Infinite => write!(f, "inf"),
        }
    }
}

/// Eigenvalues `μ` of `M`, mapped through `θ = σ + 1/μ`; `μ ≈ 0` gives ∞.
fn inverted(m: &ComplexMatrix, sigma: C64) -> Result<Vec<RitzValue>> {
    let scale = dense::norm2(m);
    Ok(dense::eigenvalues(m)?
        .into_iter()
        .map(|mu| if mu.norm() <= INFINITE_TOL * scale { RitzValue::Infinite } else { RitzValue::Finite(sigma + mu.inv()) })
        .collect())
}

/// Generalized eigenvalues of `T − θ·S`.
///
/// Uses `T·S⁻¹` when `S` is well conditioned. Otherwise the reversed pencil
/// `S − θ⁻¹·T` is used through `S·(T − σS)⁻¹` for the best conditioned of a
/// few shifts `σ`, and eigenvalues of the reversed problem at zero are
/// reported as [`RitzValue::Infinite`].
pub fn ritz_values(t: &ComplexMatrix, s: &ComplexMatrix) -> Result<Vec<RitzValue>> {
    if !t.is_square() || t.shape() != s.shape() {
        return Err(Error::DimensionMismatch(format!("T is {:?}, S is {:?}", t.shape(), s.shape())));
    }
    let n = t.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut stacked = ComplexMatrix::zeros(2 * n, n);
    stacked.view_mut((0, 0), (n, n)).copy_from(t);
    stacked.view_mut((n, 0), (n, n)).copy_from(s);
    let (_, ratio) = dense::smallest_right_singular_vector(&stacked);
    if ratio < SINGULAR_PENCIL_TOL {
        return Err(Error::SingularPencil);
    }
    if dense::condition_number(s) < COND_LIMIT {
        let z = dense::right_divide(t, s).ok_or(Error::Singular("S in T·S⁻¹"))?;
        return Ok(dense::eigenvalues(&z)?.into_iter().map(RitzValue::Finite).collect());
    }
    let scale = dense::norm2(t) / dense::norm2(s).max(f64::MIN_POSITIVE);
    let shifts = [0.0, 1.0, -1.0, 0.5, 2.0].map(|x| C64::new(x * scale, 0.3 * x * scale));
    let (sigma, shifted) = shifts
        .iter()
        .map(|&sg| (sg, t - s * sg))
        .min_by(|a, b| dense::condition_number(&a.1).total_cmp(&dense::condition_number(&b.1)))
        .expect("nonempty shift list");
    let m = dense::right_divide(s, &shifted).ok_or(Error::SingularPencil)?;
    inverted(&m, sigma)
}

/// Accuracy class of a Ritz value by distance to the nearest eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AccuracyClass {
    Red,
    Yellow,
    Green,
    Blue,
}

impl AccuracyClass {
    /// Thresholds `1e-8`, `1e-5`, `1e-2`, each exclusive: a distance equal
    /// to a threshold falls in the looser class.
    pub fn classify(distance: f64) -> Self {
        if distance < 1e-8 {
            AccuracyClass::Red
        } else if distance < 1e-5 {
            AccuracyClass::Yellow
        } else if distance < 1e-2 {
            AccuracyClass::Green
        } else {
            AccuracyClass::Blue
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            AccuracyClass::Red => "red",
            AccuracyClass::Yellow => "yellow",
            AccuracyClass::Green => "green",
            AccuracyClass::Blue => "blue",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RitzRecord {
    pub step: usize,
    pub values: Vec<RitzValue>,
    pub distances: Vec<f64>,
    /// Index into the spectrum of the nearest eigenvalue (`None` for ∞).
    pub nearest: Vec<Option<usize>>,
    pub classes: Vec<AccuracyClass>,
}

impl RitzRecord {
    pub fn new(step: usize, values: Vec<RitzValue>, spectrum: &[C64]) -> Self {
        let distances: Vec<f64> = values.iter().map(|v| v.distance(spectrum)).collect();
        let nearest = values
            .iter()
            .map(|v| {
                v.finite()
                    .and_then(|z| spectrum.iter().enumerate().min_by(|a, b| (z - a.1).norm().total_cmp(&(z - b.1).norm())).map(|(i, _)| i))
            })
            .collect();
        let classes = distances.iter().map(|d| AccuracyClass::classify(*d)).collect();
        Self { step, values, distances, nearest, classes }
    }

    /// Eigenvalues (spectrum indices) that have a Ritz value of class red.
    pub fn red_eigenvalues(&self) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.classes.iter().zip(&self.nearest).filter_map(|(c, i)| if *c == AccuracyClass::Red { *i } else { None }).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `min_i |θ_i − target|` over finite Ritz values.
    pub fn closest_to(&self, target: C64) -> f64 {
        self.values.iter().filter_map(|v| v.finite()).map(|z| (z - target).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Classify the Ritz values of each step against `spectrum`.
pub fn ritz_convergence(spectrum: &[C64], steps: Vec<(usize, Vec<RitzValue>)>) -> Vec<RitzRecord> {
    steps.into_iter().map(|(n, values)| RitzRecord::new(n, values, spectrum)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::c64;
    use crate::diagnostics::generate::{random_complex_matrix, random_complex_vector, random_diagonalizable};
    use crate::lanczos::{rat_lan, LanczosConfig};
    use crate::pencil::ProjectivePole;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(xs: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&crate::dense::ComplexVector::from_iterator(xs.len(), xs.iter().map(|x| c64(*x, 0.0))))
    }

    fn sorted_finite(v: &[RitzValue]) -> Vec<C64> {
        let mut out: Vec<C64> = v.iter().filter_map(|r| r.finite()).collect();
        out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        out
    }

    #[test]
    fn identity_s() {
        let vals = ritz_values(&diag(&[1.0, 2.0, 3.0]), &dense::identity(3)).unwrap();
        let got = sorted_finite(&vals);
        for (g, e) in got.iter().zip([1.0, 2.0, 3.0]) {
            assert!((g - c64(e, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn proportional_pencil() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_complex_matrix(&mut rng, 5, 5);
        let t = &s * c64(2.0, 0.0);
        for v in ritz_values(&t, &s).unwrap() {
            assert!((v.finite().unwrap() - c64(2.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn singular_s_gives_infinite_marker() {
        let t = diag(&[1.0, 2.0, 3.0]);
        let s = diag(&[1.0, 1.0, 0.0]);
        let vals = ritz_values(&t, &s).unwrap();
        assert_eq!(vals.iter().filter(|v| **v == RitzValue::Infinite).count(), 1);
        let got = sorted_finite(&vals);
        assert!((got[0] - c64(1.0, 0.0)).norm() < 1e-12 && (got[1] - c64(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn common_null_direction_is_singular_pencil() {
        let t = diag(&[1.0, 2.0, 0.0]);
        let s = diag(&[1.0, 1.0, 0.0]);
        assert!(matches!(ritz_values(&t, &s), Err(Error::SingularPencil)));
    }

    #[test]
    fn full_space_run_reproduces_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let eigs: Vec<C64> = (1..=8).map(|i| c64(i as f64, 0.0)).collect();
        let a = random_diagonalizable(&mut rng, &eigs);
        let v = random_complex_vector(&mut rng, 8);
        let w = random_complex_vector(&mut rng, 8);
        let p = [ProjectivePole::real(0.5), ProjectivePole::real(4.5)];
        let out = rat_lan(&a, &v, &w, 8, &p, &p, &LanczosConfig::default()).unwrap();
        assert!(out.breakdown.is_none());
        let sq = out.pencil.square();
        let mut got = sorted_finite(&ritz_values(&sq.t.to_dense(), &sq.s.to_dense()).unwrap());
        got.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_eq!(got.len(), 8);
        for (g, e) in got.iter().zip(&eigs) {
            assert!((g - e).norm() < 1e-8, "{g} vs {e}");
        }
    }

    #[test]
    fn classes_follow_thresholds() {
        assert_eq!(AccuracyClass::classify(0.0), AccuracyClass::Red);
        assert_eq!(AccuracyClass::classify(1e-8), AccuracyClass::Yellow);
        assert_eq!(AccuracyClass::classify(1e-3), AccuracyClass::Green);
        assert_eq!(AccuracyClass::classify(1e-2), AccuracyClass::Blue);
        assert_eq!(AccuracyClass::classify(f64::INFINITY), AccuracyClass::Blue);
        let spec = [c64(1.0, 0.0), c64(2.0, 0.0)];
        let rec = RitzRecord::new(2, vec![RitzValue::Finite(c64(2.0, 0.0)), RitzValue::Infinite], &spec);
        assert_eq!(rec.classes, vec![AccuracyClass::Red, AccuracyClass::Blue]);
        assert_eq!(rec.red_eigenvalues(), vec![1]);
        assert_eq!(rec.nearest, vec![Some(1), None]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn agrees_with_dense_oracle(seed in any::<u64>(), n in 1usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = random_complex_matrix(&mut rng, n, n);
            let s = random_complex_matrix(&mut rng, n, n) + dense::identity(n) * c64(3.0, 0.0);
            let got = ritz_values(&t, &s).unwrap();
            let z = s.clone().try_inverse().unwrap();
            let oracle = dense::eigenvalues(&(&t * z)).unwrap();
            let scale = oracle.iter().map(|x| x.norm()).fold(1.0, f64::max);
            for o in &oracle {
                let d = got.iter().filter_map(|g| g.finite()).map(|g| (g - o).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(d < 1e-10 * scale, "{} missing ({})", o, d);
            }
        }

        #[test]
        fn classification_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(AccuracyClass::classify(lo) <= AccuracyClass::classify(hi));
        }
    }
}
