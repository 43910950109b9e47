//! Nonhermitian rational Lanczos: a six-term recurrence that builds
//! biorthogonal nested bases of `𝒦(A, v; Ξ)` and `𝓛(Aᴴ, w; Ψ)` together
//! with a tridiagonal pencil `(T̲, S̲)` satisfying `A·V·S̲ = V·T̲`.
//!
//! Poles are projective pairs. The `k`-th pole of `Ξ` is `(b_{k+1}, l_{k+1})`
//! with shift-invert operator `(l·A − b·I)⁻¹`, and the `k`-th pole of `Ψ`
//! is `(λ_{k+1}, β_{k+1})` with `(β·Aᴴ − λ·I)⁻¹`. The pairs with index 1 are
//! free parameters that never act as poles.

use crate::dense::{self, pairing, ComplexMatrix, ComplexVector, C64, ZERO};
use crate::error::{Error, Result};
use crate::pencil::{ProjectivePole, Tridiagonal, TridiagonalPencil};
use crate::shifted::ShiftedSolver;

/// Default serious-breakdown threshold on `|⟨v̂, ŵ⟩| / (‖v̂‖·‖ŵ‖)`.
pub const SERIOUS_BREAKDOWN_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct LanczosConfig {
    pub breakdown_tol: f64,
    /// `(b₁, l₁)`.
    pub free_xi: ProjectivePole,
    /// `(λ₁, β₁)`.
    pub free_psi: ProjectivePole,
    /// Explicit two-sided Gram–Schmidt against all earlier vectors. For
    /// debugging only: it keeps every basis vector and the pencil then no
    /// longer satisfies `A·V·S̲ = V·T̲` exactly.
    pub rebiorth: bool,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            breakdown_tol: SERIOUS_BREAKDOWN_TOL,
            free_xi: ProjectivePole::infinity(),
            free_psi: ProjectivePole::infinity(),
            rebiorth: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum BreakdownKind {
    /// `⟨v̂, ŵ⟩` vanished.
    Serious,
    /// A denominator of the recurrence coefficients vanished.
    Coefficient,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Breakdown {
    /// The basis vector index (1-based) that could not be formed.
    pub vector: usize,
    pub kind: BreakdownKind,
    /// The relative quantity that fell under the threshold.
    pub value: f64,
}

/// One column of an extended tridiagonal pencil: entries at rows
/// `j−1, j, j+1` of column `j` (the first is absent for `j = 1`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PencilColumn {
    pub sup: Option<C64>,
    pub diag: C64,
    pub sub: C64,
}

/// Result of one Lanczos step `j`: the new vectors `v_{j+1}`, `w_{j+1}` and
/// column `j` of both pencils.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub column: usize,
    pub v: ComplexVector,
    pub w: ComplexVector,
    pub t: PencilColumn,
    pub s: PencilColumn,
    pub t_dual: PencilColumn,
    pub s_dual: PencilColumn,
    /// `ᾱ·u·⟨v̂, ŵ⟩`, which the normalization makes 1.
    pub normalization: C64,
}

#[derive(Clone, Debug)]
pub enum StepResult {
    Advanced(Box<StepOutput>),
    Breakdown(Breakdown),
}

/// The iteration state. Only the two most recent vectors of each basis are
/// kept, with their images under `A` / `Aᴴ`.
pub struct LanczosState<'a> {
    a: &'a ComplexMatrix,
    ah: ComplexMatrix,
    solve_v: ShiftedSolver,
    solve_w: ShiftedSolver,
    xi: Vec<ProjectivePole>,
    psi: Vec<ProjectivePole>,
    config: LanczosConfig,
    /// `(v_{i-1}, v_i)` and their images `A·v`.
    v: [Option<ComplexVector>; 2],
    av: [Option<ComplexVector>; 2],
    w: [Option<ComplexVector>; 2],
    ahw: [Option<ComplexVector>; 2],
    /// Number of basis vectors formed so far.
    count: usize,
    history: Option<(Vec<ComplexVector>, Vec<ComplexVector>)>,
}

impl<'a> LanczosState<'a> {
    /// Start from `v` (normalized) and `w` (rescaled so that `wᴴv = 1`).
    /// `xi` and `psi` must hold at least as many poles as steps to be taken.
    pub fn new(
        a: &'a ComplexMatrix,
        v: &ComplexVector,
        w: &ComplexVector,
        xi: Vec<ProjectivePole>,
        psi: Vec<ProjectivePole>,
        config: LanczosConfig,
    ) -> Result<Self> {
        let m = a.nrows();
        if !a.is_square() || v.len() != m || w.len() != m {
            return Err(Error::DimensionMismatch(format!("A is {:?}, v has length {}, w has length {}", a.shape(), v.len(), w.len())));
        }
        let vn = v.norm();
        if !(vn > 0.0) || !vn.is_finite() {
            return Err(Error::InvalidInput("starting vector v is zero or not finite".into()));
        }
        let v1 = v / C64::new(vn, 0.0);
        let wv = pairing(&v1, w);
        if !(wv.norm() > 1e-14 * w.norm()) {
            return Err(Error::InvalidInput("wᴴv = 0: the starting vectors are not biorthogonalizable".into()));
        }
        let w1 = w / wv.conj();
        let ah = a.adjoint();
        let av1 = a * &v1;
        let ahw1 = &ah * &w1;
        let history = config.rebiorth.then(|| (vec![v1.clone()], vec![w1.clone()]));
        Ok(Self {
            a,
            solve_v: ShiftedSolver::new(a.clone()),
            solve_w: ShiftedSolver::new(ah.clone()),
            ah,
            xi,
            psi,
            config,
            v: [None, Some(v1)],
            av: [None, Some(av1)],
            w: [None, Some(w1)],
            ahw: [None, Some(ahw1)],
            count: 1,
            history,
        })
    }

    /// Number of basis vectors formed so far.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Basis vectors currently held per side (at most two).
    pub fn held_vectors(&self) -> usize {
        self.v.iter().filter(|x| x.is_some()).count()
    }

    pub fn current(&self) -> (&ComplexVector, &ComplexVector) {
        (self.v[1].as_ref().expect("current v"), self.w[1].as_ref().expect("current w"))
    }

    /// `(b_j, l_j)`, 1-based.
    fn bl(&self, j: usize) -> Result<ProjectivePole> {
        if j == 1 {
            Ok(self.config.free_xi)
        } else {
            self.xi.get(j - 2).copied().ok_or_else(|| Error::InvalidInput(format!("no pole ξ_{} supplied", j - 1)))
        }
    }

    /// `(λ_j, β_j)`, 1-based.
    fn lb(&self, j: usize) -> Result<ProjectivePole> {
        if j == 1 {
            Ok(self.config.free_psi)
        } else {
            self.psi.get(j - 2).copied().ok_or_else(|| Error::InvalidInput(format!("no pole ψ_{} supplied", j - 1)))
        }
    }

    /// Advance by one column: forms `v_{i+1}`, `w_{i+1}` from the current
    /// index `i`.
    pub fn step(&mut self) -> Result<StepResult> {
        let i = self.count;
        let a = self.a;
        let xi_next = self.bl(i + 1)?;
        let psi_next = self.lb(i + 1)?;
        let (b_next, l_next) = (xi_next.mu(), xi_next.nu());
        let (lam_next, beta_next) = (psi_next.mu(), psi_next.nu());

        let vi = self.v[1].clone().expect("current v");
        let wi = self.w[1].clone().expect("current w");
        let avi = self.av[1].clone().expect("current Av");
        let ahwi = self.ahw[1].clone().expect("current Aᴴw");

        let vbar = self.solve_v.solve(&xi_next, &vi)?;
        let wbar = self.solve_w.solve(&psi_next, &wi)?;
        let avbar = a * &vbar;
        let ahwbar = &self.ah * &wbar;

        let (vhat, what, vcoef, wcoef, pq_v, pq_w);
        if i == 1 {
            let temp1 = pairing(&vbar, &wi) / pairing(&avbar, &wi);
            let temp2 = pairing(&wbar, &vi) / pairing(&wbar, &avi);
            if !(temp1.is_finite() && temp2.is_finite()) {
                return Ok(StepResult::Breakdown(Breakdown { vector: 2, kind: BreakdownKind::Coefficient, value: 0.0 }));
            }
            vhat = &vbar - &avbar * temp1;
            what = &wbar - &ahwbar * temp2;
            vcoef = (temp1, ZERO);
            wcoef = (temp2, ZERO);
            pq_v = None;
            pq_w = None;
        } else {
            let vp = self.v[0].clone().expect("previous v");
            let wp = self.w[0].clone().expect("previous w");
            let avp = self.av[0].clone().expect("previous Av");
            let ahwp = self.ahw[0].clone().expect("previous Aᴴw");
            let lb_prev = self.lb(i - 1)?;
            let bl_prev = self.bl(i - 1)?;
            let (lam_p, beta_p) = (lb_prev.mu(), lb_prev.nu());
            let (b_p, l_p) = (bl_prev.mu(), bl_prev.nu());

            // ṽ_{i-1} and the coefficients (p, q) of (lA − b)ṽ = p·A·v_{i-1} + q·v_{i-1}.
            let (vtilde, p, q) = if beta_p != ZERO {
                let q = -(lam_p.conj() / beta_p.conj());
                let rhs = &avp + &vp * q;
                (self.solve_v.solve(&xi_next, &rhs)?, C64::new(1.0, 0.0), q)
            } else {
                (self.solve_v.solve(&xi_next, &(&vp * (-lam_p)))?, ZERO, -lam_p)
            };
            let (wtilde, pw, qw) = if l_p != ZERO {
                let q = -(b_p.conj() / l_p.conj());
                let rhs = &ahwp + &wp * q;
                (self.solve_w.solve(&psi_next, &rhs)?, C64::new(1.0, 0.0), q)
            } else {
                (self.solve_w.solve(&psi_next, &(&wp * (-b_p.conj())))?, ZERO, -b_p.conj())
            };

            let num = pairing(&vtilde, &wp) * pairing(&avbar, &wi) - pairing(&vtilde, &wi) * pairing(&avbar, &wp);
            let den = pairing(&vbar, &wp) * pairing(&avbar, &wi) - pairing(&vbar, &wi) * pairing(&avbar, &wp);
            let tempv1 = num / den;
            let tempv2 = tempv1 * pairing(&vbar, &wi) / pairing(&avbar, &wi) - pairing(&vtilde, &wi) / pairing(&avbar, &wi);

            let num = pairing(&wtilde, &vp) * pairing(&wbar, &avi) - pairing(&wtilde, &vi) * pairing(&wbar, &avp);
            let den = pairing(&wbar, &vp) * pairing(&wbar, &avi) - pairing(&wbar, &vi) * pairing(&wbar, &avp);
            let tempw1 = num / den;
            let tempw2 = tempw1 * pairing(&wbar, &vi) / pairing(&wbar, &avi) - pairing(&wtilde, &vi) / pairing(&wbar, &avi);

            if ![tempv1, tempv2, tempw1, tempw2].iter().all(|z| z.is_finite()) {
                return Ok(StepResult::Breakdown(Breakdown { vector: i + 1, kind: BreakdownKind::Coefficient, value: 0.0 }));
            }
            vhat = &vbar * tempv1 - &avbar * tempv2 - &vtilde;
            what = &wbar * tempw1 - &ahwbar * tempw2 - &wtilde;
            vcoef = (tempv1, tempv2);
            wcoef = (tempw1, tempw2);
            pq_v = Some((p, q));
            pq_w = Some((pw, qw));
        }

        let (mut vhat, mut what) = (vhat, what);
        if let Some((hv, hw)) = &self.history {
            for _ in 0..2 {
                for (vj, wj) in hv.iter().zip(hw) {
                    vhat -= vj * pairing(&vhat, wj);
                    what -= wj * pairing(&what, vj);
                }
            }
        }

        // With i = m the bases span the whole space and v̂, ŵ are roundoff.
        // Column i is still meaningful up to a common scaling, so it is
        // closed with u = α = 1 and zero vectors.
        let exhausted = i == a.nrows();
        let (u, alpha, normalization, v_next, w_next);
        if exhausted {
            u = 1.0;
            alpha = C64::new(1.0, 0.0);
            normalization = alpha;
            v_next = ComplexVector::zeros(a.nrows());
            w_next = ComplexVector::zeros(a.nrows());
        } else {
            let ip = pairing(&vhat, &what);
            let (nv, nw) = (vhat.norm(), what.norm());
            let rel = ip.norm() / (nv * nw);
            if !(rel >= self.config.breakdown_tol) || !rel.is_finite() {
                return Ok(StepResult::Breakdown(Breakdown {
                    vector: i + 1,
                    kind: BreakdownKind::Serious,
                    value: if rel.is_finite() { rel } else { 0.0 },
                }));
            }
            let pi = C64::new(1.0, 0.0) / ip;
            u = (pi.norm() * nw / nv).sqrt();
            alpha = pi.conj() / u;
            normalization = alpha.conj() * u * ip;
            v_next = &vhat * C64::new(u, 0.0);
            w_next = &what * alpha;
        }

        let (tcol, scol, tdual, sdual);
        if i == 1 {
            let d1 = C64::new(u, 0.0);
            let gamma1 = alpha;
            let c1 = d1 * vcoef.0;
            let delta1 = gamma1 * wcoef.0;
            scol = PencilColumn { sup: None, diag: c1, sub: l_next };
            tcol = PencilColumn { sup: None, diag: d1, sub: b_next };
            sdual = PencilColumn { sup: None, diag: delta1, sub: beta_next };
            tdual = PencilColumn { sup: None, diag: gamma1, sub: lam_next };
        } else {
            let uc = C64::new(u, 0.0);
            let d = vcoef.0 * uc;
            let c = vcoef.1 * uc;
            let gamma = wcoef.0 * alpha;
            let delta = wcoef.1 * alpha;
            let (p, q) = pq_v.expect("v-side coefficients");
            let (pw, qw) = pq_w.expect("w-side coefficients");
            scol = PencilColumn { sup: Some(uc * p), diag: c, sub: l_next };
            tcol = PencilColumn { sup: Some(-uc * q), diag: d, sub: b_next };
            sdual = PencilColumn { sup: Some(alpha * pw), diag: delta, sub: beta_next };
            tdual = PencilColumn { sup: Some(-alpha * qw), diag: gamma, sub: lam_next };
        }

        let av_next = a * &v_next;
        let ahw_next = &self.ah * &w_next;
        self.v = [Some(vi), Some(v_next.clone())];
        self.av = [Some(avi), Some(av_next)];
        self.w = [Some(wi), Some(w_next.clone())];
        self.ahw = [Some(ahwi), Some(ahw_next)];
        if let Some((hv, hw)) = &mut self.history {
            hv.push(v_next.clone());
            hw.push(w_next.clone());
        }
        self.count += 1;
        Ok(StepResult::Advanced(Box::new(StepOutput {
            column: i,
            v: v_next,
            w: w_next,
            t: tcol,
            s: scol,
            t_dual: tdual,
            s_dual: sdual,
            normalization,
        })))
    }
}

/// Output of [`rat_lan`]. With `k` completed steps, `V` and `W` have `k+1`
/// columns and the pencils are `(k+1)×k`. For `k = m` the last columns of
/// `V` and `W` are zero and the leading square pencil is exact.
#[derive(Clone, Debug)]
pub struct RatLanOutput {
    pub v: ComplexMatrix,
    pub w: ComplexMatrix,
    pub pencil: TridiagonalPencil,
    /// Pencil of the `W` recurrence: `Aᴴ·W·S̲_w = W·T̲_w`.
    pub dual: TridiagonalPencil,
    pub xi: Vec<ProjectivePole>,
    pub psi: Vec<ProjectivePole>,
    pub breakdown: Option<Breakdown>,
    /// `|ᾱ_i·u_i·⟨v̂, ŵ⟩ − 1|` per step.
    pub normalization_errors: Vec<f64>,
}

impl RatLanOutput {
    pub fn steps(&self) -> usize {
        self.pencil.ncols()
    }

    /// Leading `k+1` basis vectors and the `(k+1)×k` pencil.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            v: self.v.columns(0, k + 1).into_owned(),
            w: self.w.columns(0, k + 1).into_owned(),
            pencil: self.pencil.truncated(k),
            dual: self.dual.truncated(k),
            xi: self.xi[..k].to_vec(),
            psi: self.psi[..k].to_vec(),
            breakdown: None,
            normalization_errors: self.normalization_errors[..k].to_vec(),
        }
    }
}

/// Repeat `poles` cyclically to length `n`.
pub fn cycle_poles(poles: &[ProjectivePole], n: usize) -> Vec<ProjectivePole> {
    poles.iter().copied().cycle().take(n).collect()
}

/// Run `n ≤ m` steps with `Ξ`, `Ψ` cycled to length `n`.
pub fn rat_lan(
    a: &ComplexMatrix,
    v: &ComplexVector,
    w: &ComplexVector,
    n: usize,
    xi: &[ProjectivePole],
    psi: &[ProjectivePole],
    config: &LanczosConfig,
) -> Result<RatLanOutput> {
    let m = a.nrows();
    if n == 0 || n > m {
        return Err(Error::InvalidInput(format!("{n} steps requested for a {m}x{m} matrix (need 1 ≤ n ≤ m)")));
    }
    if xi.is_empty() || psi.is_empty() {
        return Err(Error::InvalidInput("pole lists must be nonempty".into()));
    }
    let xi = cycle_poles(xi, n);
    let psi = cycle_poles(psi, n);
    let mut state = LanczosState::new(a, v, w, xi.clone(), psi.clone(), config.clone())?;
    let mut vs = vec![state.current().0.clone()];
    let mut ws = vec![state.current().1.clone()];
    let mut cols = Vec::with_capacity(n);
    let mut breakdown = None;
    for _ in 0..n {
        match state.step()? {
            StepResult::Advanced(out) => {
                vs.push(out.v.clone());
                ws.push(out.w.clone());
                cols.push(*out);
            }
            StepResult::Breakdown(b) => {
                breakdown = Some(b);
                break;
            }
        }
    }
    let k = cols.len();
    let mut t = Tridiagonal::zeros(k + 1, k);
    let mut s = Tridiagonal::zeros(k + 1, k);
    let mut td = Tridiagonal::zeros(k + 1, k);
    let mut sd = Tridiagonal::zeros(k + 1, k);
    for (j, c) in cols.iter().enumerate() {
        for (mat, col) in [(&mut t, &c.t), (&mut s, &c.s), (&mut td, &c.t_dual), (&mut sd, &c.s_dual)] {
            if let Some(x) = col.sup {
                mat.set(j - 1, j, x);
            }
            mat.set(j, j, col.diag);
            mat.set(j + 1, j, col.sub);
        }
    }
    let normalization_errors = cols.iter().map(|c| (c.normalization - C64::new(1.0, 0.0)).norm()).collect();
    Ok(RatLanOutput {
        v: ComplexMatrix::from_columns(&vs),
        w: ComplexMatrix::from_columns(&ws),
        pencil: TridiagonalPencil::new(t, s)?,
        dual: TridiagonalPencil::new(td, sd)?,
        xi: xi[..k].to_vec(),
        psi: psi[..k].to_vec(),
        breakdown,
        normalization_errors,
    })
}

fn pencil_scale(p: &TridiagonalPencil) -> f64 {
    dense::max_abs(&p.t_dense()).max(dense::max_abs(&p.s_dense()))
}

/// `ξ_i = T(i+1, i) / S(i+1, i)`.
pub fn recover_poles_sub(p: &TridiagonalPencil) -> Result<Vec<ProjectivePole>> {
    let (rows, cols) = p.shape();
    let tol = 1e-14 * pencil_scale(p);
    (0..cols.min(rows - 1))
        .map(|i| {
            let (t, s) = (p.t.get(i + 1, i), p.s.get(i + 1, i));
            if t.norm() <= tol && s.norm() <= tol {
                return Err(Error::ImproperPencil(i + 1));
            }
            ProjectivePole::new(t, s)
        })
        .collect()
}

/// `conj(ψ_{i−1}) = T(i, i+1) / S(i, i+1)` for `i = 2, …` (1-based). The
/// entry at `(1, 2)` carries the free parameter and is skipped, so element
/// `k` of the result is `conj(ψ_{k+1})`.
pub fn recover_poles_super(p: &TridiagonalPencil) -> Result<Vec<ProjectivePole>> {
    let (_, cols) = p.shape();
    let tol = 1e-14 * pencil_scale(p);
    (2..cols)
        .map(|j| {
            let (t, s) = (p.t.get(j - 1, j), p.s.get(j - 1, j));
            if t.norm() <= tol && s.norm() <= tol {
                return Err(Error::ImproperPencil(j));
            }
            ProjectivePole::new(t, s)
        })
        .collect()
}
