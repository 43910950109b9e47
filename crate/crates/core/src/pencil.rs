//! Poles, pencils and the conversions between their representations.

use std::fmt;
use std::str::FromStr;

use crate::dense::{self, ComplexMatrix, ComplexVector, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::structured::{
    classify_shape, qr_hessenberg, transfer_through, turnover, CorePattern, CoreTransformation, StructureDescriptor, TransferDirection,
    Transition,
};

/// Default relative tolerance for projective equality.
pub const POLE_TOL: f64 = 1e-12;

/// A point `μ/ν` of the extended complex plane. `ν = 0` is the pole at ∞.
#[derive(Clone, Copy, Debug)]
pub struct ProjectivePole {
    mu: C64,
    nu: C64,
}

impl ProjectivePole {
    pub fn new(mu: C64, nu: C64) -> Result<Self> {
        if mu == ZERO && nu == ZERO {
            return Err(Error::InvalidPole("(0, 0) is not a projective point".into()));
        }
        if !(mu.re.is_finite() && mu.im.is_finite() && nu.re.is_finite() && nu.im.is_finite()) {
            return Err(Error::InvalidPole(format!("non-finite coordinates ({mu}, {nu})")));
        }
        Ok(Self { mu, nu })
    }

    pub fn infinity() -> Self {
        Self { mu: ONE, nu: ZERO }
    }

    pub fn finite(value: C64) -> Self {
        Self { mu: value, nu: ONE }
    }

    pub fn real(value: f64) -> Self {
        Self::finite(C64::new(value, 0.0))
    }

    pub fn mu(&self) -> C64 {
        self.mu
    }

    pub fn nu(&self) -> C64 {
        self.nu
    }

    pub fn is_infinite(&self) -> bool {
        self.nu == ZERO
    }

    /// `μ/ν`, or `None` at ∞.
    pub fn value(&self) -> Option<C64> {
        if self.is_infinite() {
            None
        } else {
            Some(self.mu / self.nu)
        }
    }

    pub fn conj(&self) -> Self {
        Self { mu: self.mu.conj(), nu: self.nu.conj() }
    }

    /// Chordal-type distance `|μ₁ν₂ − μ₂ν₁| / (‖p₁‖·‖p₂‖)`, in `[0, 1]`.
    pub fn distance(&self, other: &Self) -> f64 {
        let cross = self.mu * other.nu - other.mu * self.nu;
        cross.norm() / (self.mu.norm().hypot(self.nu.norm()) * other.mu.norm().hypot(other.nu.norm()))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    /// Rescale so `|μ|² + |ν|² = 1` and the larger coordinate is real positive.
    pub fn normalized(&self) -> Self {
        let norm = self.mu.norm().hypot(self.nu.norm());
        let lead = if self.mu.norm() >= self.nu.norm() { self.mu } else { self.nu };
        let phase = lead / lead.norm();
        Self { mu: self.mu / (phase * norm), nu: self.nu / (phase * norm) }
    }
}

impl PartialEq for ProjectivePole {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, POLE_TOL)
    }
}

impl fmt::Display for ProjectivePole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            None => write!(f, "inf"),
            Some(v) if v.im == 0.0 => write!(f, "{}", v.re),
            Some(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for ProjectivePole {
    type Err = Error;

    /// `inf`/`∞` or a complex literal such as `2`, `-1.5`, `3+i`, `0.5-2i`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "∞" => return Ok(Self::infinity()),
            _ => {}
        }
        let z = C64::from_str(t).map_err(|_| Error::Parse(format!("invalid pole literal '{t}'")))?;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Parse(format!("invalid pole literal '{t}'")));
        }
        Ok(Self::finite(z))
    }
}

/// `(ρ, η)` of the expansion operator `(νA − μI)⁻¹(ρA − ηI)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuationPair {
    pub rho: C64,
    pub eta: C64,
}

impl ContinuationPair {
    pub fn new(rho: C64, eta: C64) -> Result<Self> {
        if rho == ZERO && eta == ZERO {
            return Err(Error::InvalidInput("continuation pair (0, 0)".into()));
        }
        Ok(Self { rho, eta })
    }

    /// `(0, −1)` for finite poles (pure shift-invert), `(1, 0)` for ∞ (apply A).
    pub fn default_for(pole: &ProjectivePole) -> Self {
        if pole.is_infinite() {
            Self { rho: ONE, eta: ZERO }
        } else {
            Self { rho: ZERO, eta: -ONE }
        }
    }

    /// False when `ρ/η` and the pole are the same projective point, in which
    /// case the expansion operator degenerates to a multiple of `I`.
    pub fn is_admissible(&self, pole: &ProjectivePole) -> bool {
        let as_pole = ProjectivePole { mu: self.eta, nu: self.rho };
        as_pole.distance(pole) > 1e-14
    }
}

/// Pencil `(H, K)` of upper-Hessenberg matrices, square or `(n+1)×n`.
#[derive(Clone, Debug, PartialEq)]
pub struct HessenbergPencil {
    h: ComplexMatrix,
    k: ComplexMatrix,
}

impl HessenbergPencil {
    pub fn new(h: ComplexMatrix, k: ComplexMatrix) -> Result<Self> {
        if h.shape() != k.shape() {
            return Err(Error::DimensionMismatch(format!("H is {:?}, K is {:?}", h.shape(), k.shape())));
        }
        let (r, c) = h.shape();
        if c == 0 || !(r == c || r == c + 1) {
            return Err(Error::DimensionMismatch(format!("pencil of shape {r}x{c}")));
        }
        for m in [&h, &k] {
            let defect = dense::lower_defect(m, 1);
            if defect > 1e-14 * m.norm() {
                return Err(Error::NotHessenberg { defect });
            }
        }
        Ok(Self { h, k })
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn k(&self) -> &ComplexMatrix {
        &self.k
    }

    pub fn into_parts(self) -> (ComplexMatrix, ComplexMatrix) {
        (self.h, self.k)
    }

    pub fn is_square(&self) -> bool {
        self.h.is_square()
    }

    pub fn ncols(&self) -> usize {
        self.h.ncols()
    }

    /// The leading `n×n` pencil of an extended one.
    pub fn leading_square(&self) -> Self {
        let n = self.h.ncols();
        Self { h: self.h.view((0, 0), (n, n)).into_owned(), k: self.k.view((0, 0), (n, n)).into_owned() }
    }

    /// First index (1-based) where both subdiagonal entries vanish.
    pub fn improper_index(&self) -> Option<usize> {
        let tol = 1e-14 * (self.h.norm() + self.k.norm());
        let last = (self.h.nrows() - 1).min(self.h.ncols());
        (0..last).find(|&i| self.h[(i + 1, i)].norm() < tol && self.k[(i + 1, i)].norm() < tol).map(|i| i + 1)
    }

    pub fn is_proper(&self) -> bool {
        self.improper_index().is_none()
    }

    /// `(H·R, K·R)` for an upper-triangular (or any conforming) `R`.
    pub fn right_multiply(&self, r: &ComplexMatrix) -> Self {
        Self { h: &self.h * r, k: &self.k * r }
    }
}

/// A pencil whose matrices both have rank-one lower triangular parts.
#[derive(Clone, Debug, PartialEq)]
pub struct InvHessenbergPencil {
    pub h_inv: ComplexMatrix,
    pub k_inv: ComplexMatrix,
}

/// A (possibly rectangular) tridiagonal matrix stored by its three diagonals.
///
/// `main[j] = M(j, j)`, `sub[j] = M(j+1, j)`, `sup[j] = M(j, j+1)` (0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    rows: usize,
    cols: usize,
    pub sub: Vec<C64>,
    pub main: Vec<C64>,
    pub sup: Vec<C64>,
}

impl Tridiagonal {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            sub: vec![ZERO; (rows.saturating_sub(1)).min(cols)],
            main: vec![ZERO; rows.min(cols)],
            sup: vec![ZERO; rows.min(cols.saturating_sub(1))],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        if i == j {
            self.main.get(j).copied().unwrap_or(ZERO)
        } else if i == j + 1 {
            self.sub.get(j).copied().unwrap_or(ZERO)
        } else if j == i + 1 {
            self.sup.get(i).copied().unwrap_or(ZERO)
        } else {
            ZERO
        }
    }

    /// Set a band entry. Panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        if i == j {
            self.main[j] = value;
        } else if i == j + 1 {
            self.sub[j] = value;
        } else if j == i + 1 {
            self.sup[i] = value;
        } else {
            panic!("({i}, {j}) is outside the tridiagonal band");
        }
    }

    /// The band of `m`; everything outside it is dropped.
    pub fn from_band(m: &ComplexMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut t = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in j.saturating_sub(1)..(j + 2).min(rows) {
                t.set(i, j, m[(i, j)]);
            }
        }
        t
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    pub fn leading(&self, n: usize) -> Self {
        let mut t = Self::zeros(n, n);
        for j in 0..n {
            for i in j.saturating_sub(1)..(j + 2).min(n) {
                t.set(i, j, self.get(i, j));
            }
        }
        t
    }

    pub fn scale_column(&mut self, j: usize, f: C64) {
        if j > 0 && j - 1 < self.sup.len() {
            self.sup[j - 1] *= f;
        }
        if j < self.main.len() {
            self.main[j] *= f;
        }
        if j < self.sub.len() {
            self.sub[j] *= f;
        }
    }
}

/// The pair `(T, S)`, extended `(n+1)×n` or square.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalPencil {
    pub t: Tridiagonal,
    pub s: Tridiagonal,
}

impl TridiagonalPencil {
    pub fn new(t: Tridiagonal, s: Tridiagonal) -> Result<Self> {
        if t.shape() != s.shape() {
            return Err(Error::DimensionMismatch(format!("T is {:?}, S is {:?}", t.shape(), s.shape())));
        }
        Ok(Self { t, s })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.t.shape()
    }

    pub fn ncols(&self) -> usize {
        self.t.cols
    }

    pub fn t_dense(&self) -> ComplexMatrix {
        self.t.to_dense()
    }

    pub fn s_dense(&self) -> ComplexMatrix {
        self.s.to_dense()
    }

    /// Leading `k×k` pencil, `k ≤ min(rows, cols)`.
    pub fn leading(&self, k: usize) -> Self {
        Self { t: self.t.leading(k), s: self.s.leading(k) }
    }

    /// Leading square part: the extended pencil with its last row removed.
    pub fn square(&self) -> Self {
        self.leading(self.t.cols.min(self.t.rows))
    }

    /// Extended pencil truncated to its first `k` columns (`(k+1)×k`).
    pub fn truncated(&self, k: usize) -> Self {
        let mut t = Tridiagonal::zeros(k + 1, k);
        let mut s = Tridiagonal::zeros(k + 1, k);
        for j in 0..k {
            for i in j.saturating_sub(1)..(j + 2) {
                t.set(i, j, self.t.get(i, j));
                s.set(i, j, self.s.get(i, j));
            }
        }
        Self { t, s }
    }
}

/// The diagonal `D` of `Z = QR + D`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleDiagonal {
    pub entries: Vec<C64>,
    /// `true` where the entry is a finite pole, `false` where it is free.
    pub pole_slot: Vec<bool>,
}

impl PoleDiagonal {
    pub fn to_dense(&self) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&dense::ComplexVector::from_column_slice(&self.entries))
    }
}

/// `Z = H·K⁻¹` for a square pencil.
pub fn single_matrix_from_pencil(p: &HessenbergPencil) -> Result<ComplexMatrix> {
    if !p.is_square() {
        return Err(Error::DimensionMismatch("single-matrix form needs a square pencil".into()));
    }
    dense::right_divide(&p.h, &p.k).ok_or(Error::Singular("K in H·K⁻¹"))
}

/// Pole `i` is `H(i+1,i) / K(i+1,i)`.
pub fn pole_sequence(p: &HessenbergPencil) -> Result<Vec<ProjectivePole>> {
    if let Some(i) = p.improper_index() {
        return Err(Error::ImproperPencil(i));
    }
    let last = (p.h.nrows() - 1).min(p.h.ncols());
    (0..last).map(|i| ProjectivePole::new(p.h[(i + 1, i)], p.k[(i + 1, i)])).collect()
}

/// Scale every column so that its largest entry over `H` and `K` jointly
/// equals exactly 1.
pub fn normalize_columns(h: &ComplexMatrix, k: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (mut h, mut k) = (h.clone(), k.clone());
    for j in 0..h.ncols() {
        let mut lead = ZERO;
        for z in h.column(j).iter().chain(k.column(j).iter()) {
            if z.norm() > lead.norm() {
                lead = *z;
            }
        }
        if lead != ZERO {
            let f = ONE / lead;
            for i in 0..h.nrows() {
                h[(i, j)] *= f;
                k[(i, j)] *= f;
            }
        }
    }
    (h, k)
}

const QR_PLUS_D_TOL: f64 = 1e-10;

/// Split a single-matrix projection into `Q·R + D`.
///
/// `poles` lists `ξ₁, ξ₂, …`; the first `n−1` are used. `D(1)` and the slots
/// of infinite poles are free and set to zero, `D(k+1) = ξ_k` otherwise. The
/// unitary factor is peeled core by core: a finite `ξ_k` puts `C_k` after
/// `C_{k+1}` (ascending), an infinite one before it (descending).
pub fn decompose_qr_plus_d(z: &ComplexMatrix, poles: &[ProjectivePole]) -> Result<(CorePattern, ComplexMatrix, PoleDiagonal)> {
    let n = z.nrows();
    if !z.is_square() || n < 2 {
        return Err(Error::DimensionMismatch(format!("QR+D of a {}x{} matrix", z.nrows(), z.ncols())));
    }
    if poles.len() < n - 1 {
        return Err(Error::InvalidInput(format!("{} poles supplied for a {n}x{n} projection", poles.len())));
    }
    let mut entries = vec![ZERO; n];
    let mut pole_slot = vec![false; n];
    for k in 0..n - 1 {
        if let Some(x) = poles[k].value() {
            entries[k + 1] = x;
            pole_slot[k + 1] = true;
        }
    }
    let d = PoleDiagonal { entries, pole_slot };
    let y = z - d.to_dense();
    let qr = y.clone().qr();
    let (mut x, r) = (qr.q(), qr.r());

    let mut left = Vec::new();
    let mut right = Vec::new();
    for k in 0..n - 1 {
        if poles[k].is_infinite() {
            let (c, _) = CoreTransformation::from_column(k + 1, x[(k, k)], x[(k + 1, k)]);
            c.adjoint().lmul(&mut x);
            left.push(c);
        } else {
            // Row k of X must equal [a, b]·C restricted to columns k, k+1.
            let (c, _) = CoreTransformation::from_column(k + 1, x[(k, k)].conj(), x[(k, k + 1)].conj());
            let c = c.adjoint();
            c.adjoint().rmul(&mut x);
            right.push(c);
        }
    }
    // What remains should be a diagonal of unimodular phases Δ. Move it to
    // the far right through the right cores, Δ·C = (Δ C Δ̄)·Δ, and into R.
    let phases: Vec<C64> = (0..n).map(|i| x[(i, i)]).collect();
    let off = (&x - ComplexMatrix::from_diagonal(&ComplexVector::from_vec(phases.clone()))).norm();
    let modulus = phases.iter().map(|p| (p.norm() - 1.0).abs()).fold(0.0, f64::max);
    if off > QR_PLUS_D_TOL * (n as f64).sqrt() || modulus > QR_PLUS_D_TOL {
        return Err(Error::StructureMismatch(format!("unitary factor is not a product of the pole-ordered cores (remainder {off:.3e})")));
    }
    let mut cores = left;
    for c in right.iter().rev() {
        let i = c.index() - 1;
        let b = c.block();
        let (p0, p1) = (phases[i], phases[i + 1]);
        let conj_block = [[p0 * b[0][0] * p0.conj(), p0 * b[0][1] * p1.conj()], [p1 * b[1][0] * p0.conj(), p1 * b[1][1] * p1.conj()]];
        cores.push(CoreTransformation::from_block(c.index(), conj_block)?);
    }
    let mut r_final = r;
    for i in 0..n {
        let p = phases[i];
        for j in 0..n {
            r_final[(i, j)] *= p;
        }
    }
    let pattern = CorePattern::new(n, cores)?;
    let mut rebuilt = r_final.clone();
    pattern.lmul(&mut rebuilt);
    rebuilt += d.to_dense();
    let err = (&rebuilt - z).norm();
    if !(err <= QR_PLUS_D_TOL * z.norm()) {
        return Err(Error::StructureMismatch(format!("Q·R + D reproduces Z only to {:.3e} (relative {:.3e})", err, err / z.norm())));
    }
    Ok((pattern, r_final, d))
}

/// The transition sequence implied by a pole sequence: finite ⇒ ascending.
pub fn expected_structure(poles: &[ProjectivePole]) -> StructureDescriptor {
    StructureDescriptor::from_transitions(
        poles.iter().map(|p| if p.is_infinite() { Transition::Descending } else { Transition::Ascending }).collect(),
    )
}

/// Convert a square Hessenberg pencil to an inv-Hessenberg pencil
/// `(H·C, K·C)` with `C` nonsingular.
///
/// Both matrices are brought to `R·Q` form, the cores of `Q_H·Q_Kᴴ` are
/// turned over into an ascending times a descending pattern `P_a·P_d`, and
/// the result is `(R_H·P_a, R_K·P_dᴴ)`.
pub fn to_inv_hessenberg(p: &HessenbergPencil) -> Result<InvHessenbergPencil> {
    if !p.is_square() {
        return Err(Error::DimensionMismatch("inv-Hessenberg conversion needs a square pencil".into()));
    }
    if let Some(i) = p.improper_index() {
        return Err(Error::ImproperPencil(i));
    }
    let n = p.ncols();
    if n == 1 {
        return Ok(InvHessenbergPencil { h_inv: p.h.clone(), k_inv: p.k.clone() });
    }
    let (qh, rh) = qr_hessenberg(&p.h)?;
    let (qk, rk) = qr_hessenberg(&p.k)?;
    let (rh, qh) = transfer_through(&qh, &rh, TransferDirection::LeftToRight)?;
    let (rk, qk) = transfer_through(&qk, &rk, TransferDirection::LeftToRight)?;

    let c: Vec<CoreTransformation> = qh.cores().to_vec();
    let d: Vec<CoreTransformation> = qk.cores().iter().map(|g| g.adjoint()).collect();
    // Q_H·Q_Kᴴ = C_1⋯C_{n-1}·D_{n-1}⋯D_1 with D_i = (Q_K core i)ᴴ.
    let mut y = c[n - 2].compose(&d[n - 2]);
    let mut xs = Vec::with_capacity(n - 2);
    let mut zs = Vec::with_capacity(n - 2);
    for k in (1..n - 1).rev() {
        let (x, y_new, z) = turnover(&c[k - 1], &y, &d[k - 1])?;
        xs.push(x);
        zs.push(z);
        y = y_new;
    }
    // xs = [X_{n-1}, …, X_2]; zs = [Z_{n-1}, …, Z_2].
    let mut asc = xs;
    asc.push(y);
    let desc_adj: Vec<CoreTransformation> = zs.iter().map(|z| z.adjoint()).collect();
    let p_asc = CorePattern::new(n, asc)?;
    let p_desc_adj = CorePattern::new(n, desc_adj)?;

    let mut h_inv = rh;
    p_asc.rmul(&mut h_inv);
    let mut k_inv = rk;
    p_desc_adj.rmul(&mut k_inv);
    Ok(InvHessenbergPencil { h_inv, k_inv })
}

/// Check that `shape` is the structure a pole sequence implies.
pub fn structure_matches(pattern: &CorePattern, poles: &[ProjectivePole]) -> Result<bool> {
    let n = pattern.dim();
    let got = classify_shape(pattern)?;
    let want = expected_structure(&poles[..n.saturating_sub(2)]);
    Ok(got == want)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arnoldi::rational_arnoldi;
    use crate::dense::c64;
    use crate::diagnostics::generate::{random_complex_matrix, random_complex_vector, random_hessenberg, random_upper_triangular};
    use crate::structured::rank_profile_lower;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn inf() -> ProjectivePole {
        ProjectivePole::infinity()
    }

    #[test]
    fn pole_basics() {
        assert!(ProjectivePole::new(ZERO, ZERO).is_err());
        let p = ProjectivePole::new(c64(4.0, 0.0), c64(2.0, 0.0)).unwrap();
        assert_eq!(p.value(), Some(c64(2.0, 0.0)));
        assert_eq!(p, ProjectivePole::real(2.0));
        assert_ne!(p, inf());
        assert!(inf().value().is_none());
        assert_eq!(ProjectivePole::new(c64(3.0, 1.0), ZERO).unwrap(), inf());
        assert!((ProjectivePole::real(0.0).distance(&inf()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pole_parsing() {
        assert_eq!("inf".parse::<ProjectivePole>().unwrap(), inf());
        assert_eq!("2".parse::<ProjectivePole>().unwrap(), ProjectivePole::real(2.0));
        assert_eq!(" 24.1 ".parse::<ProjectivePole>().unwrap(), ProjectivePole::real(24.1));
        assert_eq!("3+i".parse::<ProjectivePole>().unwrap(), ProjectivePole::finite(c64(3.0, 1.0)));
        assert_eq!("0.5-2i".parse::<ProjectivePole>().unwrap(), ProjectivePole::finite(c64(0.5, -2.0)));
        assert!("abc".parse::<ProjectivePole>().is_err());
        assert!("nan".parse::<ProjectivePole>().is_err());
    }

    #[test]
    fn continuation_admissibility() {
        let xi = ProjectivePole::real(2.0);
        let c = ContinuationPair::default_for(&xi);
        assert!(c.is_admissible(&xi));
        let bad = ContinuationPair::new(ONE, c64(2.0, 0.0)).unwrap();
        assert!(!bad.is_admissible(&xi));
        assert!(ContinuationPair::default_for(&inf()).is_admissible(&inf()));
    }

    #[test]
    fn single_matrix_with_identity_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hessenberg(&mut rng, 5);
        let p = HessenbergPencil::new(h.clone(), dense::identity(5)).unwrap();
        let z = single_matrix_from_pencil(&p).unwrap();
        assert!((z - h).norm() < 1e-13);
    }

    #[test]
    fn single_matrix_with_identity_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k = random_upper_triangular(&mut rng, 5);
        let p = HessenbergPencil::new(dense::identity(5), k.clone()).unwrap();
        let z = single_matrix_from_pencil(&p).unwrap();
        assert!(dense::is_upper_triangular(&z, 1e-14));
        assert!((&z * &k - dense::identity(5)).norm() < 1e-13);
    }

    #[test]
    fn single_matrix_rejects_singular_k() {
        let p = HessenbergPencil::new(dense::identity(3), ComplexMatrix::zeros(3, 3)).unwrap();
        assert!(matches!(single_matrix_from_pencil(&p), Err(Error::Singular(_))));
    }

    #[test]
    fn pole_readout_from_zero_k_subdiagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hessenberg(&mut rng, 4);
        let k = random_upper_triangular(&mut rng, 4);
        let poles = pole_sequence(&HessenbergPencil::new(h, k).unwrap()).unwrap();
        assert!(poles.iter().all(|p| p.is_infinite()));
    }

    #[test]
    fn improper_pencil_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut h = random_hessenberg(&mut rng, 4);
        h[(2, 1)] = ZERO;
        let k = random_upper_triangular(&mut rng, 4);
        let p = HessenbergPencil::new(h, k).unwrap();
        assert_eq!(p.improper_index(), Some(2));
        assert!(matches!(pole_sequence(&p), Err(Error::ImproperPencil(2))));
    }

    #[test]
    fn tridiagonal_storage_is_banded() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_complex_matrix(&mut rng, 6, 5);
        let t = Tridiagonal::from_band(&m);
        let d = t.to_dense();
        for i in 0..6usize {
            for j in 0..5 {
                if i.abs_diff(j) > 1 {
                    assert_eq!(d[(i, j)], ZERO);
                } else {
                    assert_eq!(d[(i, j)], m[(i, j)]);
                }
            }
        }
        assert_eq!(t.leading(5).to_dense(), d.view((0, 0), (5, 5)).into_owned());
    }

    fn arnoldi_z(seed: u64, poles: &[ProjectivePole]) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_complex_matrix(&mut rng, 12, 12);
        let v = random_complex_vector(&mut rng, 12);
        let dec = rational_arnoldi(&a, &v, poles, None).unwrap();
        let n = poles.len();
        let p = dec.pencil().leading_square();
        let z = single_matrix_from_pencil(&p).unwrap();
        let vn = dec.v().columns(0, n).into_owned();
        (a, vn, z)
    }

    #[test]
    fn single_matrix_equals_explicit_projection() {
        let poles = [inf(), ProjectivePole::real(2.0), ProjectivePole::finite(c64(-1.0, 0.5)), inf(), inf()];
        let (a, v, z) = arnoldi_z(6, &poles);
        let explicit = v.adjoint() * &a * &v;
        assert!((z - explicit).norm() < 1e-10 * a.norm());
    }

    #[test]
    fn qr_plus_d_standard_krylov() {
        let poles = vec![inf(); 6];
        let (_, _, z) = arnoldi_z(7, &poles);
        assert!(dense::is_upper_hessenberg(&z, 1e-12));
        let (pat, r, d) = decompose_qr_plus_d(&z, &poles).unwrap();
        assert!(d.entries.iter().all(|e| *e == ZERO));
        assert!(classify_shape(&pat).unwrap().transitions().iter().all(|t| *t == Transition::Descending));
        assert!(dense::is_upper_triangular(&r, 0.0));
    }

    #[test]
    fn qr_plus_d_rational_example() {
        let (x2, x3) = (ProjectivePole::real(1.5), ProjectivePole::finite(c64(-0.5, 1.0)));
        let poles = [inf(), x2, x3, inf(), inf(), inf(), inf()];
        let (_, _, z) = arnoldi_z(8, &poles);
        let (pat, _, d) = decompose_qr_plus_d(&z, &poles).unwrap();
        assert_eq!(d.entries[2], x2.value().unwrap());
        assert_eq!(d.entries[3], x3.value().unwrap());
        assert_eq!(d.pole_slot, vec![false, false, true, true, false, false, false]);
        use Transition::*;
        assert_eq!(classify_shape(&pat).unwrap().transitions(), &[Descending, Ascending, Ascending, Descending, Descending]);
    }

    #[test]
    fn qr_plus_d_extended_example() {
        let zero = ProjectivePole::real(0.0);
        let poles = [inf(), zero, zero, inf(), inf(), inf(), inf()];
        let (_, _, z) = arnoldi_z(9, &poles);
        let (pat, _, d) = decompose_qr_plus_d(&z, &poles).unwrap();
        assert!(d.entries.iter().all(|e| *e == ZERO));
        // Same shape as C1 C4 C5 C6 C3 C2.
        use Transition::*;
        assert_eq!(classify_shape(&pat).unwrap().transitions(), &[Descending, Ascending, Ascending, Descending, Descending]);
        assert!(structure_matches(&pat, &poles).unwrap());
    }

    #[test]
    fn qr_plus_d_rejects_wrong_poles() {
        let poles = [inf(), ProjectivePole::real(1.5), inf(), inf(), inf()];
        let (_, _, z) = arnoldi_z(10, &poles);
        let wrong = [inf(), inf(), ProjectivePole::real(1.5), inf(), inf()];
        assert!(matches!(decompose_qr_plus_d(&z, &wrong), Err(Error::StructureMismatch(_))));
    }

    #[test]
    fn inv_hessenberg_two_by_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = HessenbergPencil::new(random_hessenberg(&mut rng, 2), random_hessenberg(&mut rng, 2)).unwrap();
        let out = to_inv_hessenberg(&p).unwrap();
        // Same pencil up to a right factor C: H⁻¹H_inv = K⁻¹K_inv.
        let ch = p.h().clone().try_inverse().unwrap() * &out.h_inv;
        let ck = p.k().clone().try_inverse().unwrap() * &out.k_inv;
        assert!((ch - ck).norm() < 1e-12);
    }

    fn check_inv(p: &HessenbergPencil) {
        let out = to_inv_hessenberg(p).unwrap();
        assert!(rank_profile_lower(&out.h_inv, 1e-10).iter().all(|&r| r <= 1));
        assert!(rank_profile_lower(&out.k_inv, 1e-10).iter().all(|&r| r <= 1));
        let z = single_matrix_from_pencil(p).unwrap();
        let zi = dense::right_divide(&out.h_inv, &out.k_inv).unwrap();
        assert!((&z - zi).norm() < 1e-10 * z.norm());
    }

    #[test]
    fn inv_hessenberg_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = HessenbergPencil::new(random_hessenberg(&mut rng, 6), random_hessenberg(&mut rng, 6)).unwrap();
        check_inv(&p);
    }

    #[test]
    fn inv_hessenberg_from_standard_arnoldi() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_complex_matrix(&mut rng, 10, 10);
        let v = random_complex_vector(&mut rng, 10);
        let dec = rational_arnoldi(&a, &v, &[inf(); 3], None).unwrap();
        let p = dec.pencil().leading_square();
        let out = to_inv_hessenberg(&p).unwrap();
        let vn = dec.v().columns(0, 3).into_owned();
        let lhs = vn.adjoint() * &a * &vn * &out.k_inv;
        assert!((lhs - &out.h_inv).norm() < 1e-10 * a.norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn poles_invariant_under_triangular_scaling(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_complex_matrix(&mut rng, 10, 10);
            let v = random_complex_vector(&mut rng, 10);
            let xi = [inf(), ProjectivePole::real(2.0), ProjectivePole::finite(c64(0.0, 1.0)), inf()];
            let dec = rational_arnoldi(&a, &v, &xi, None).unwrap();
            let base = pole_sequence(&dec.pencil()).unwrap();
            for _ in 0..20 {
                let r = random_upper_triangular(&mut rng, 4);
                let scaled = pole_sequence(&dec.pencil().right_multiply(&r)).unwrap();
                for (p, q) in base.iter().zip(&scaled) {
                    prop_assert!(p.approx_eq(q, 1e-12));
                }
            }
        }

        #[test]
        fn inv_hessenberg_preserves_equivalence(seed in any::<u64>(), n in 2usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = HessenbergPencil::new(random_hessenberg(&mut rng, n), random_hessenberg(&mut rng, n)).unwrap();
            check_inv(&p);
        }

        #[test]
        fn qr_plus_d_structure_law(seed in any::<u64>(), mask in 0u32..64) {
            let poles: Vec<ProjectivePole> = (0..7)
                .map(|k| if k < 6 && mask & (1 << k) != 0 { ProjectivePole::real(0.5 + k as f64) } else { inf() })
                .collect();
            let (_, _, z) = arnoldi_z(seed, &poles);
            let (pat, _, _) = decompose_qr_plus_d(&z, &poles).unwrap();
            prop_assert!(structure_matches(&pat, &poles).unwrap());
        }
    }
}
