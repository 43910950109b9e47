//! Rational Arnoldi: orthonormal nested bases and their Hessenberg pencil.

use crate::dense::{self, ComplexMatrix, ComplexVector, C64, ZERO};
use crate::error::{Error, Result};
use crate::pencil::{ContinuationPair, HessenbergPencil, ProjectivePole};
use crate::shifted::ShiftedSolver;

/// Lucky breakdown: the expanded vector lies in the current span.
pub const BREAKDOWN_TOL: f64 = 1e-13;

/// `A·V·K̲ = V·H̲` with orthonormal `V`.
///
/// Without breakdown `V` has `n+1` columns and the pencil is `(n+1)×n`.
/// A breakdown at step `k` leaves `V` with `k` columns and a square `k×k`
/// pencil, which then spans an invariant subspace.
#[derive(Clone, Debug)]
pub struct KrylovDecomposition {
    v: ComplexMatrix,
    h: ComplexMatrix,
    k: ComplexMatrix,
    poles: Vec<ProjectivePole>,
    breakdown: Option<usize>,
}

impl KrylovDecomposition {
    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn k(&self) -> &ComplexMatrix {
        &self.k
    }

    pub fn poles(&self) -> &[ProjectivePole] {
        &self.poles
    }

    /// Step (1-based) at which the iteration terminated early.
    pub fn breakdown(&self) -> Option<usize> {
        self.breakdown
    }

    pub fn steps(&self) -> usize {
        self.h.ncols()
    }

    pub fn pencil(&self) -> HessenbergPencil {
        HessenbergPencil::new(self.h.clone(), self.k.clone()).expect("arnoldi pencil is Hessenberg")
    }

    pub fn orthonormality_defect(&self) -> f64 {
        dense::orthonormality_defect(&self.v)
    }

    /// `‖A·V·K̲ − V·H̲‖₂`.
    pub fn residual(&self, a: &ComplexMatrix) -> f64 {
        dense::norm2(&(a * &self.v * &self.k - &self.v * &self.h))
    }
}

/// One classical Gram–Schmidt pass: returns `x − V·c` and `c = Vᴴx`.
pub fn reorthogonalize(v: &ComplexMatrix, x: &ComplexVector) -> (ComplexVector, ComplexVector) {
    let c = v.ad_mul(x);
    (x - v * &c, c)
}

pub fn rational_arnoldi(
    a: &ComplexMatrix,
    v: &ComplexVector,
    poles: &[ProjectivePole],
    continuation: Option<&[ContinuationPair]>,
) -> Result<KrylovDecomposition> {
    let m = a.nrows();
    let n = poles.len();
    if !a.is_square() || v.len() != m {
        return Err(Error::DimensionMismatch(format!("A is {:?}, v has length {}", a.shape(), v.len())));
    }
    if n >= m {
        return Err(Error::InvalidInput(format!("{n} steps requested for a {m}x{m} matrix")));
    }
    if let Some(c) = continuation {
        if c.len() != n {
            return Err(Error::DimensionMismatch(format!("{} continuation pairs for {n} poles", c.len())));
        }
    }
    let vnorm = v.norm();
    if !(vnorm > 0.0) || !vnorm.is_finite() {
        return Err(Error::InvalidInput("starting vector is zero or not finite".into()));
    }

    let mut basis = ComplexMatrix::zeros(m, n + 1);
    basis.set_column(0, &(v / C64::new(vnorm, 0.0)));
    let mut h = ComplexMatrix::zeros(n + 1, n);
    let mut k = ComplexMatrix::zeros(n + 1, n);
    let mut solver = ShiftedSolver::new(a.clone());

    for j in 0..n {
        let pole = poles[j];
        let cont = continuation.map_or_else(|| ContinuationPair::default_for(&pole), |c| c[j]);
        if !cont.is_admissible(&pole) {
            return Err(Error::InadmissibleContinuation(j + 1));
        }
        let vj = basis.column(j).into_owned();
        let x = a * &vj * cont.rho - &vj * cont.eta;
        let y = solver.solve(&pole, &x)?;
        let before = y.norm();

        let current = basis.columns(0, j + 1);
        let (y, c1) = reorthogonalize(&current.into_owned(), &y);
        let current = basis.columns(0, j + 1).into_owned();
        let (y, c2) = reorthogonalize(&current, &y);
        let coeffs = c1 + c2;
        let beta = y.norm();

        let mut col = ComplexVector::zeros(n + 1);
        col.rows_mut(0, j + 1).copy_from(&coeffs);
        col[j + 1] = C64::new(beta, 0.0);
        let mut kcol = &col * pole.nu();
        let mut hcol = &col * pole.mu();
        kcol[j] -= cont.rho;
        hcol[j] -= cont.eta;

        if beta < BREAKDOWN_TOL * before {
            kcol[j + 1] = ZERO;
            hcol[j + 1] = ZERO;
            h.set_column(j, &hcol);
            k.set_column(j, &kcol);
            let size = j + 1;
            return Ok(KrylovDecomposition {
                v: basis.columns(0, size).into_owned(),
                h: h.view((0, 0), (size, size)).into_owned(),
                k: k.view((0, 0), (size, size)).into_owned(),
                poles: poles[..size].to_vec(),
                breakdown: Some(size),
            });
        }
        basis.set_column(j + 1, &(y / C64::new(beta, 0.0)));
        h.set_column(j, &hcol);
        k.set_column(j, &kcol);
    }
    Ok(KrylovDecomposition { v: basis, h, k, poles: poles.to_vec(), breakdown: None })
}

/// Outcome of comparing two decompositions built from the same data.
#[derive(Clone, Debug)]
pub struct ImplicitQReport {
    /// `|⟨v_i, v'_i⟩|` per column.
    pub correlations: Vec<f64>,
    /// Largest `| |⟨v_i, v'_i⟩| − 1 |`.
    pub max_correlation_error: f64,
    /// Relative least-squares residual of `[K; H]·R = [D·K'; D·H']`.
    pub pencil_residual: f64,
    /// Relative size of the strictly lower part of that `R`.
    pub triangular_defect: f64,
}

impl ImplicitQReport {
    pub fn essentially_equal(&self, tol: f64) -> bool {
        self.max_correlation_error <= tol && self.pencil_residual <= tol && self.triangular_defect <= tol
    }
}

pub fn implicit_q_compare(d1: &KrylovDecomposition, d2: &KrylovDecomposition) -> Result<ImplicitQReport> {
    if d1.v.shape() != d2.v.shape() || d1.h.shape() != d2.h.shape() {
        return Err(Error::DimensionMismatch(format!(
            "bases {:?} vs {:?}, pencils {:?} vs {:?}",
            d1.v.shape(),
            d2.v.shape(),
            d1.h.shape(),
            d2.h.shape()
        )));
    }
    let cols = d1.v.ncols();
    let mut phases = ComplexVector::zeros(cols);
    let mut correlations = Vec::with_capacity(cols);
    for i in 0..cols {
        let ip = d1.v.column(i).dotc(&d2.v.column(i));
        correlations.push(ip.norm());
        phases[i] = ip;
    }
    let max_correlation_error = correlations.iter().map(|c| (c - 1.0).abs()).fold(0.0, f64::max);

    // V' = V·D (to first order), so (D·K', D·H') is a pencil for V and must
    // equal (K·R, H·R) for an upper-triangular R.
    let d = ComplexMatrix::from_diagonal(&phases);
    let (r, c) = d1.h.shape();
    let mut lhs = ComplexMatrix::zeros(2 * r, c);
    lhs.view_mut((0, 0), (r, c)).copy_from(&d1.k);
    lhs.view_mut((r, 0), (r, c)).copy_from(&d1.h);
    let mut rhs = ComplexMatrix::zeros(2 * r, c);
    rhs.view_mut((0, 0), (r, c)).copy_from(&(&d * &d2.k));
    rhs.view_mut((r, 0), (r, c)).copy_from(&(&d * &d2.h));
    let svd = dense::svd(&lhs, true, true);
    let sol = svd.solve(&rhs, 1e-14 * svd.singular_values.max()).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let resid = (&lhs * &sol - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
    let triangular_defect = dense::lower_defect(&sol, 0) / sol.norm().max(f64::MIN_POSITIVE);
    Ok(ImplicitQReport { correlations, max_correlation_error, pencil_residual: resid, triangular_defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{c64, ONE};
    use crate::diagnostics::generate::{random_complex_matrix, random_complex_vector, random_hermitian, random_unitary};
    use crate::pencil::pole_sequence;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn inf() -> ProjectivePole {
        ProjectivePole::infinity()
    }

    fn assert_contract(a: &ComplexMatrix, d: &KrylovDecomposition, poles: &[ProjectivePole]) {
        assert!(d.orthonormality_defect() < 1e-12);
        assert!(d.residual(a) < 1e-10 * dense::norm2(a));
        for (p, q) in pole_sequence(&d.pencil()).unwrap().iter().zip(poles) {
            assert!(p.distance(q) < 1e-12, "{p} vs {q}");
        }
    }

    #[test]
    fn standard_krylov_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_complex_matrix(&mut rng, 10, 10);
        let v = random_complex_vector(&mut rng, 10);
        let poles = vec![inf(); 5];
        let d = rational_arnoldi(&a, &v, &poles, None).unwrap();
        assert_contract(&a, &d, &poles);
        // K̲ = −[I; 0] and H̲ = −(classical Hessenberg).
        let mut minus_id = ComplexMatrix::zeros(6, 5);
        for i in 0..5 {
            minus_id[(i, i)] = -ONE;
        }
        assert_eq!(d.k(), &minus_id);
        let hess = -d.h();
        let explicit = d.v().adjoint() * &a * d.v().columns(0, 5);
        assert!((hess - explicit).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn hermitian_limit_is_tridiagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let eigs: Vec<f64> = (0..12).map(|i| i as f64 - 3.0).collect();
        let a = random_hermitian(&mut rng, &eigs);
        let v = random_complex_vector(&mut rng, 12);
        let d = rational_arnoldi(&a, &v, &[inf(); 6], None).unwrap();
        let sq = d.pencil().leading_square();
        let z = dense::right_divide(sq.h(), sq.k()).unwrap();
        assert!((&z - z.adjoint()).norm() < 1e-10 * z.norm());
        for i in 0..6usize {
            for j in 0..6 {
                if i.abs_diff(j) > 1 {
                    assert!(z[(i, j)].norm() < 1e-10 * z.norm());
                }
            }
        }
    }

    /// `q(A)⁻¹·[v, Av, …, A^{k−1}v]` with `q` the product of `(A − ξI)` over
    /// the finite poles among the first `k−1`.
    fn rational_span(a: &ComplexMatrix, v: &ComplexVector, poles: &[ProjectivePole], k: usize) -> ComplexMatrix {
        let m = a.nrows();
        let mut raw = ComplexMatrix::zeros(m, k);
        let mut x = v.clone();
        for j in 0..k {
            raw.set_column(j, &x);
            x = a * &x;
        }
        for p in &poles[..k - 1] {
            if let Some(xi) = p.value() {
                let shift = (a - ComplexMatrix::identity(m, m) * xi).try_inverse().unwrap();
                raw = shift * raw;
            }
        }
        raw
    }

    #[test]
    fn span_matches_brute_force() {
        let a = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(8, (1..=8).map(|i| c64(i as f64, 0.0))));
        let v = ComplexVector::from_element(8, c64(1.0 / 8f64.sqrt(), 0.0));
        let poles = [inf(), ProjectivePole::real(2.5), inf()];
        let d = rational_arnoldi(&a, &v, &poles, None).unwrap();
        for k in 1..=4 {
            let raw = rational_span(&a, &v, &poles, k);
            let s = dense::subspace_sine(&d.v().columns(0, k).into_owned(), &raw);
            assert!(s < 1e-10, "k = {k}: sine {s}");
        }
    }

    #[test]
    fn reorthogonalize_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_unitary(&mut rng, 10);
        let v = q.columns(0, 4).into_owned();
        let orth = q.column(6).into_owned();
        let (out, c) = reorthogonalize(&v, &orth);
        assert!(c.norm() < 1e-13);
        assert!((&out - &orth).norm() < 1e-13);

        let (out, _) = reorthogonalize(&v, &v.column(2).into_owned());
        assert!(out.norm() < 1e-13);

        let x = random_complex_vector(&mut rng, 10);
        let (out, _) = reorthogonalize(&v, &x);
        let (out, _) = reorthogonalize(&v, &out);
        assert!(v.ad_mul(&out).norm() < 1e-13);
    }

    #[test]
    fn lucky_breakdown_truncates() {
        // v lies in a 3-dimensional invariant subspace of a diagonal A.
        let a = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(6, (1..=6).map(|i| c64(i as f64, 0.0))));
        let v = ComplexVector::from_vec(vec![ONE, ONE, ONE, ZERO, ZERO, ZERO]);
        let d = rational_arnoldi(&a, &v, &[inf(), ProjectivePole::real(0.5), inf(), inf()], None).unwrap();
        assert_eq!(d.breakdown(), Some(3));
        assert_eq!(d.v().ncols(), 3);
        assert_eq!(d.h().shape(), (3, 3));
        assert!(d.residual(&a) < 1e-12);
    }

    #[test]
    fn pole_on_spectrum_errors() {
        let a = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(4, (1..=4).map(|i| c64(i as f64, 0.0))));
        let v = ComplexVector::from_element(4, ONE);
        let r = rational_arnoldi(&a, &v, &[ProjectivePole::real(3.0)], None);
        assert!(matches!(r, Err(Error::PoleOnSpectrum { .. })));
    }

    #[test]
    fn inadmissible_continuation_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_complex_matrix(&mut rng, 5, 5);
        let v = random_complex_vector(&mut rng, 5);
        let xi = ProjectivePole::real(2.0);
        let bad = [ContinuationPair::new(ONE, c64(2.0, 0.0)).unwrap()];
        assert!(matches!(rational_arnoldi(&a, &v, &[xi], Some(&bad)), Err(Error::InadmissibleContinuation(1))));
    }

    #[test]
    fn implicit_q_identical_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_complex_matrix(&mut rng, 9, 9);
        let v = random_complex_vector(&mut rng, 9);
        let poles = [inf(), ProjectivePole::real(1.0), inf()];
        let d = rational_arnoldi(&a, &v, &poles, None).unwrap();
        let rep = implicit_q_compare(&d, &d).unwrap();
        assert!(rep.correlations.iter().all(|c| (c - 1.0).abs() < 1e-14));
        assert!(rep.essentially_equal(1e-12));
    }

    #[test]
    fn implicit_q_different_order_flags_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_complex_matrix(&mut rng, 9, 9);
        let v = random_complex_vector(&mut rng, 9);
        let p = ProjectivePole::real(1.0);
        let d1 = rational_arnoldi(&a, &v, &[inf(), p, inf(), inf()], None).unwrap();
        let d2 = rational_arnoldi(&a, &v, &[p, inf(), inf(), inf()], None).unwrap();
        let rep = implicit_q_compare(&d1, &d2).unwrap();
        assert!(!rep.essentially_equal(1e-8));
    }

    fn random_continuation(rng: &mut ChaCha8Rng, poles: &[ProjectivePole]) -> Vec<ContinuationPair> {
        use crate::diagnostics::generate::complex_normal;
        poles
            .iter()
            .map(|p| loop {
                let c = ContinuationPair::new(complex_normal(rng), complex_normal(rng)).unwrap();
                if c.is_admissible(p) {
                    break c;
                }
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn contract_and_continuation_independence(seed in any::<u64>(), m in 8usize..25, nfrac in 0.2f64..0.6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = ((m as f64 * nfrac) as usize).max(1);
            let a = random_complex_matrix(&mut rng, m, m);
            let v = random_complex_vector(&mut rng, m);
            let poles: Vec<ProjectivePole> = (0..n)
                .map(|i| if i % 3 == 0 { inf() } else { ProjectivePole::finite(crate::diagnostics::generate::complex_normal(&mut rng) * 3.0) })
                .collect();
            let d1 = rational_arnoldi(&a, &v, &poles, None).unwrap();
            assert_contract(&a, &d1, &poles);
            let cont = random_continuation(&mut rng, &poles);
            let d2 = rational_arnoldi(&a, &v, &poles, Some(&cont)).unwrap();
            assert_contract(&a, &d2, &poles);
            let rep = implicit_q_compare(&d1, &d2).unwrap();
            prop_assert!(rep.max_correlation_error < 1e-10, "{}", rep.max_correlation_error);
            prop_assert!(rep.pencil_residual < 1e-8, "{}", rep.pencil_residual);
            prop_assert!(rep.triangular_defect < 1e-8, "{}", rep.triangular_defect);
        }

        #[test]
        fn nested_spans(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_complex_matrix(&mut rng, 10, 10);
            let v = random_complex_vector(&mut rng, 10);
            let p = ProjectivePole::finite(c64(0.5, 2.0));
            let d = rational_arnoldi(&a, &v, &[p, inf(), p], None).unwrap();
            for k in 1..=4 {
                let raw = rational_span(&a, &v, &[p, inf(), p], k);
                let s = dense::subspace_sine(&d.v().columns(0, k).into_owned(), &raw);
                prop_assert!(s < 1e-9, "k = {}: {}", k, s);
            }
        }
    }
}
