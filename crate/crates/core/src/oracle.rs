//! Explicit biorthogonal projection: the non-recursive reference route.
//!
//! Orthonormal bases `V̂`, `Ŵ` from rational Arnoldi on `A` and `Aᴴ` are
//! made biorthogonal through the unpivoted LR factorization `ŴᴴV̂ = L·R`,
//! giving `V = V̂·R⁻¹` and `W = Ŵ·L⁻ᴴ`. The projected operator is then
//! available both as `Z = WᴴAV` and as a tridiagonal pencil.

use crate::arnoldi::{rational_arnoldi, KrylovDecomposition};
use crate::dense::{self, ComplexMatrix, ComplexVector, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::pencil::{ProjectivePole, Tridiagonal, TridiagonalPencil};
use crate::structured::rank_profile_lower;

/// Pivot threshold of the LR factorization, relative to `‖M‖₂`.
pub const LR_PIVOT_TOL: f64 = 1e-12;
/// Relative tolerance of the structure validators.
pub const STRUCTURE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct LRFactors {
    /// Unit lower triangular, `completed_size × completed_size`.
    pub l: ComplexMatrix,
    /// Upper triangular, `completed_size × completed_size`.
    pub r: ComplexMatrix,
    pub completed_size: usize,
    pub dim: usize,
}

impl LRFactors {
    pub fn is_complete(&self) -> bool {
        self.completed_size == self.dim
    }
}

/// Gaussian elimination without pivoting; stops at the first pivot below
/// `1e-12·‖M‖₂`.
pub fn lr_decompose(m: &ComplexMatrix) -> Result<LRFactors> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("LR of a {}x{} matrix", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    let tol = LR_PIVOT_TOL * dense::norm2(m);
    let mut u = m.clone();
    let mut l = dense::identity(n);
    let mut done = 0;
    for k in 0..n {
        let pivot = u[(k, k)];
        if !(pivot.norm() > tol) {
            break;
        }
        for i in (k + 1)..n {
            let f = u[(i, k)] / pivot;
            l[(i, k)] = f;
            u[(i, k)] = ZERO;
            for j in (k + 1)..n {
                let t = u[(k, j)];
                u[(i, j)] -= f * t;
            }
        }
        done = k + 1;
    }
    let mut r = u.view((0, 0), (done, done)).into_owned();
    dense::truncate_lower(&mut r, 0);
    Ok(LRFactors { l: l.view((0, 0), (done, done)).into_owned(), r, completed_size: done, dim: n })
}

/// Biorthogonal bases `WᴴV = I` together with their provenance.
#[derive(Clone, Debug)]
pub struct BiorthogonalPair {
    pub v: ComplexMatrix,
    pub w: ComplexMatrix,
    pub lr: LRFactors,
    pub xi: Vec<ProjectivePole>,
    pub psi: Vec<ProjectivePole>,
    /// Column (1-based) at which the LR factorization broke down.
    pub breakdown: Option<usize>,
}

impl BiorthogonalPair {
    pub fn dim(&self) -> usize {
        self.v.ncols()
    }

    pub fn biorthogonality_defect(&self) -> f64 {
        dense::norm2(&(self.w.adjoint() * &self.v - dense::identity(self.v.ncols())))
    }

    /// The leading `k` columns of both bases.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            v: self.v.columns(0, k).into_owned(),
            w: self.w.columns(0, k).into_owned(),
            lr: LRFactors {
                l: self.lr.l.view((0, 0), (k, k)).into_owned(),
                r: self.lr.r.view((0, 0), (k, k)).into_owned(),
                completed_size: k,
                dim: k,
            },
            xi: self.xi.clone(),
            psi: self.psi.clone(),
            breakdown: self.breakdown,
        }
    }
}

/// `V = V̂·R⁻¹`, `W = Ŵ·L⁻ᴴ` from `ŴᴴV̂ = L·R`; truncated at an LR breakdown.
pub fn biorthogonalize(vhat: &ComplexMatrix, what: &ComplexMatrix) -> Result<BiorthogonalPair> {
    if vhat.shape() != what.shape() {
        return Err(Error::DimensionMismatch(format!("V̂ is {:?}, Ŵ is {:?}", vhat.shape(), what.shape())));
    }
    let lr = lr_decompose(&(what.adjoint() * vhat))?;
    let k = lr.completed_size;
    let breakdown = (k < vhat.ncols()).then_some(k + 1);
    let vk = vhat.columns(0, k).into_owned();
    let wk = what.columns(0, k).into_owned();
    // V·R = V̂  ⇒  Rᵀ·Vᵀ = V̂ᵀ; likewise W·Lᴴ = Ŵ.
    let v = solve_right_upper(&vk, &lr.r).ok_or(Error::Singular("R of the LR factorization"))?;
    let lh = lr.l.adjoint();
    let w = solve_right_upper(&wk, &lh).ok_or(Error::Singular("L of the LR factorization"))?;
    Ok(BiorthogonalPair { v, w, lr, xi: Vec::new(), psi: Vec::new(), breakdown })
}

/// `X` with `X·U = B` for upper-triangular `U`.
fn solve_right_upper(b: &ComplexMatrix, u: &ComplexMatrix) -> Option<ComplexMatrix> {
    let ut = u.transpose();
    let xt = ut.solve_lower_triangular(&b.transpose())?;
    dense::all_finite(&xt).then(|| xt.transpose())
}

/// Structure check outcome for a single-matrix projection.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureReport {
    /// Largest entry (relative to `‖Z‖₂`) where the poles force a zero.
    pub zero_defect: f64,
    /// Largest numerical rank among strictly-lower blocks `Z(k+1:n, 1:k)`.
    pub lower_rank: usize,
    /// The same two quantities for `Zᴴ` against the second pole sequence.
    pub upper_zero_defect: f64,
    pub upper_rank: usize,
}

impl StructureReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.zero_defect <= tol && self.upper_zero_defect <= tol && self.lower_rank <= 1 && self.upper_rank <= 1
    }
}

/// Entry `(i, j)`, `i > j + 1` (1-based), must vanish when some pole
/// `ξ_t`, `j ≤ t ≤ i − 2`, is infinite.
pub fn forced_zero(i: usize, j: usize, poles: &[ProjectivePole]) -> bool {
    i > j + 1 && (j..=i - 2).any(|t| poles.get(t - 1).is_some_and(|p| p.is_infinite()))
}

fn lower_structure(z: &ComplexMatrix, poles: &[ProjectivePole], tol: f64) -> (f64, usize) {
    let n = z.nrows();
    let scale = dense::norm2(z).max(f64::MIN_POSITIVE);
    let mut defect = 0.0f64;
    for j in 1..=n {
        for i in (j + 2)..=n {
            if forced_zero(i, j, poles) {
                defect = defect.max(z[(i - 1, j - 1)].norm() / scale);
            }
        }
    }
    let rank = (1..n).map(|k| dense::numerical_rank(&z.view((k, 0), (n - k, k)).into_owned(), tol * scale)).max().unwrap_or(0);
    (defect, rank)
}

/// Zero and rank pattern of `Z` below (from `Ξ`) and above (from `Ψ`) the
/// diagonal.
pub fn validate_single_structure(z: &ComplexMatrix, xi: &[ProjectivePole], psi: &[ProjectivePole], tol: f64) -> StructureReport {
    let (zero_defect, lower_rank) = lower_structure(z, xi, tol);
    let (upper_zero_defect, upper_rank) = lower_structure(&z.adjoint(), psi, tol);
    StructureReport { zero_defect, lower_rank, upper_zero_defect, upper_rank }
}

/// Projection of a unitary matrix on a standard Krylov space: Hessenberg
/// below the diagonal and rank ≤ 1 in every block of the upper triangle
/// including the diagonal. Returns `(hessenberg defect, max upper rank)`.
pub fn validate_unitary_single(z: &ComplexMatrix, tol: f64) -> (f64, usize) {
    let scale = dense::norm2(z).max(f64::MIN_POSITIVE);
    let defect = dense::lower_defect(z, 1) / scale;
    let ranks = rank_profile_lower(&z.adjoint(), tol);
    (defect, ranks.into_iter().max().unwrap_or(0))
}

/// `Z = WᴴAV`, checked against the structure the pole sequences imply.
pub fn oblique_single(a: &ComplexMatrix, pair: &BiorthogonalPair) -> Result<ComplexMatrix> {
    let z = pair.w.adjoint() * a * &pair.v;
    let report = validate_single_structure(&z, &pair.xi, &pair.psi, STRUCTURE_TOL);
    if !report.holds(STRUCTURE_TOL) {
        return Err(Error::StructureMismatch(format!("{report:?}")));
    }
    Ok(z)
}

/// The oracle's pencils: `(T, S)` for `V` and the dual pencil for `W`, both
/// extended `(n+1)×n`, with `A·V·S = V·T` and `Aᴴ·W·S_w = W·T_w`.
#[derive(Clone, Debug)]
pub struct ObliquePencil {
    pub primal: TridiagonalPencil,
    pub dual: TridiagonalPencil,
}

const TRIDIAGONAL_TOL: f64 = 1e-10;
const NULL_RATIO_TOL: f64 = 1e-8;

/// Right-multiply an extended Hessenberg pencil `(H, K)` by an upper
/// triangular `B`, chosen column by column so that `(H·B, K·B)` is
/// tridiagonal. Column 2 is fixed by `T(1,2)/S(1,2) = conj(free)`.
fn tridiagonalize(h: &ComplexMatrix, k: &ComplexMatrix, free: &ProjectivePole) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (rows, n) = h.shape();
    let mut t = ComplexMatrix::zeros(rows, n);
    let mut s = ComplexMatrix::zeros(rows, n);
    for i in 0..n {
        let b: ComplexVector = if i == 0 {
            ComplexVector::from_element(1, ONE)
        } else {
            let mut cons: Vec<Vec<C64>> = Vec::new();
            if i == 1 {
                let (mu0, nu0) = (free.mu().conj(), free.nu().conj());
                cons.push((0..2).map(|c| nu0 * h[(0, c)] - mu0 * k[(0, c)]).collect());
            } else {
                for r in 0..(i - 1) {
                    cons.push((0..=i).map(|c| h[(r, c)]).collect());
                    cons.push((0..=i).map(|c| k[(r, c)]).collect());
                }
            }
            let mut m = ComplexMatrix::zeros(cons.len(), i + 1);
            for (r, row) in cons.iter().enumerate() {
                let nrm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if nrm > 0.0 {
                    for (c, z) in row.iter().enumerate() {
                        m[(r, c)] = z / nrm;
                    }
                }
            }
            let (b, ratio) = dense::smallest_right_singular_vector(&m);
            if ratio > NULL_RATIO_TOL || b[i].norm() < 1e-12 * b.norm() {
                return Err(Error::RlSplitBreakdown { column: i + 1, ratio });
            }
            b
        };
        let hb = h.columns(0, i + 1) * &b;
        let kb = k.columns(0, i + 1) * &b;
        let lead = hb.iter().chain(kb.iter()).fold(ZERO, |acc, z| if z.norm() > acc.norm() { *z } else { acc });
        let f = if lead == ZERO { ONE } else { ONE / lead };
        t.set_column(i, &(hb * f));
        s.set_column(i, &(kb * f));
    }
    Ok((t, s))
}

fn band_defect(m: &ComplexMatrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i.abs_diff(j) > 1 {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// Tridiagonal pencils for a biorthogonal pair of `n+1` columns, built from
/// the Hessenberg pencils of both Arnoldi runs. `free_psi` fixes the free
/// ratio `T(1,2)/S(1,2)` of the primal pencil, `free_xi` that of the dual
/// (both default to ∞).
pub fn oblique_pencil(
    a: &ComplexMatrix,
    pair: &BiorthogonalPair,
    dec_v: &KrylovDecomposition,
    dec_w: &KrylovDecomposition,
    free_psi: Option<ProjectivePole>,
    free_xi: Option<ProjectivePole>,
) -> Result<ObliquePencil> {
    let n = dec_v.steps();
    if dec_v.breakdown().is_some() || dec_w.breakdown().is_some() {
        return Err(Error::InvalidInput("oblique pencil needs non-truncated decompositions".into()));
    }
    if pair.v.ncols() != n + 1 || dec_w.steps() != n {
        return Err(Error::DimensionMismatch(format!(
            "pair has {} columns, decompositions have {} and {} steps",
            pair.v.ncols(),
            n,
            dec_w.steps()
        )));
    }
    let r = &pair.lr.r;
    let lh = pair.lr.l.adjoint();
    let (t, s) = tridiagonalize(&(r * dec_v.h()), &(r * dec_v.k()), &free_psi.unwrap_or_else(ProjectivePole::infinity))?;
    let (tw, sw) = tridiagonalize(&(&lh * dec_w.h()), &(&lh * dec_w.k()), &free_xi.unwrap_or_else(ProjectivePole::infinity))?;

    for (m, name) in [(&t, "T"), (&s, "S"), (&tw, "T_w"), (&sw, "S_w")] {
        let d = band_defect(m);
        if d > TRIDIAGONAL_TOL * m.norm() {
            return Err(Error::StructureMismatch(format!("{name} is not tridiagonal (defect {d:.3e})")));
        }
    }
    let anorm = dense::norm2(a);
    let resid = dense::norm2(&(pair.w.adjoint() * a * &pair.v * &s - &t));
    if resid > 1e-9 * anorm {
        return Err(Error::StructureMismatch(format!("projection residual {resid:.3e}")));
    }
    let primal = TridiagonalPencil::new(Tridiagonal::from_band(&t), Tridiagonal::from_band(&s))?;
    let dual = TridiagonalPencil::new(Tridiagonal::from_band(&tw), Tridiagonal::from_band(&sw))?;
    Ok(ObliquePencil { primal, dual })
}

/// Everything the oracle route produces for one problem.
#[derive(Clone, Debug)]
pub struct OracleRun {
    pub dec_v: KrylovDecomposition,
    pub dec_w: KrylovDecomposition,
    pub pair: BiorthogonalPair,
    /// `None` when the bases broke down before `n+1` columns.
    pub pencil: Option<ObliquePencil>,
}

/// Arnoldi on `A` with `Ξ` and on `Aᴴ` with `Ψ` (`n` steps each), LR
/// biorthogonalization and the tridiagonal pencils.
pub fn oracle_run(
    a: &ComplexMatrix,
    v: &ComplexVector,
    w: &ComplexVector,
    xi: &[ProjectivePole],
    psi: &[ProjectivePole],
    free_psi: Option<ProjectivePole>,
) -> Result<OracleRun> {
    let n = xi.len();
    if psi.len() != n {
        return Err(Error::DimensionMismatch(format!("{} poles in Ξ, {} in Ψ", n, psi.len())));
    }
    if w.dotc(v).norm() < 1e-14 * v.norm() * w.norm() {
        return Err(Error::InvalidInput("wᴴv = 0".into()));
    }
    let dec_v = rational_arnoldi(a, v, xi, None)?;
    let dec_w = rational_arnoldi(&a.adjoint(), w, psi, None)?;
    let cols = dec_v.v().ncols().min(dec_w.v().ncols());
    let mut pair = biorthogonalize(&dec_v.v().columns(0, cols).into_owned(), &dec_w.v().columns(0, cols).into_owned())?;
    pair.xi = xi.to_vec();
    pair.psi = psi.to_vec();
    let pencil = if pair.dim() == n + 1 { Some(oblique_pencil(a, &pair, &dec_v, &dec_w, free_psi, None)?) } else { None };
    Ok(OracleRun { dec_v, dec_w, pair, pencil })
}
