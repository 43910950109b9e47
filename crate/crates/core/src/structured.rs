//! Core transformations and the algebra built on them.
//!
//! A core transformation `C_i` is the identity with a 2×2 unitary block on
//! rows/columns `i, i+1` (1-based, as in the literature). Products of cores
//! with every index `1..n-1` occurring once are *shapes*; the relative order
//! of `C_i` and `C_{i+1}` decides whether the assembled `Q·R` carries a
//! Hessenberg block (descending, `C_i` first) or an inv-Hessenberg block
//! (ascending, `C_{i+1}` first) at that position.

use std::fmt;

use crate::dense::{self, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// A core is trivial when its off-diagonal coupling is below this.
pub const TRIVIAL_CORE_TOL: f64 = 1e-14;

const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoreTransformation {
    index: usize,
    block: [[C64; 2]; 2],
}

impl CoreTransformation {
    pub fn identity(index: usize) -> Self {
        Self { index, block: [[ONE, ZERO], [ZERO, ONE]] }
    }

    /// Rotation `[[c, -s̄], [s, c̄]]`, renormalized so `|c|² + |s|² = 1`.
    /// A zero pair yields the identity.
    pub fn rotation(index: usize, c: C64, s: C64) -> Self {
        let rho = c.norm().hypot(s.norm());
        if rho == 0.0 {
            return Self::identity(index);
        }
        let (c, s) = (c / rho, s / rho);
        Self { index, block: [[c, -s.conj()], [s, c.conj()]] }
    }

    /// The rotation `G` with `G·[r, 0]ᵀ = [a, b]ᵀ`; returns `(G, r)`.
    ///
    /// The cosine is real and nonnegative and `r` inherits the phase of `a`,
    /// so `b = 0` gives the identity and `r = a`.
    pub fn from_column(index: usize, a: C64, b: C64) -> (Self, C64) {
        if b == ZERO {
            return (Self::identity(index), a);
        }
        let rho = a.norm().hypot(b.norm());
        let phase = if a == ZERO { ONE } else { a / a.norm() };
        let r = phase * rho;
        let c = C64::new(a.norm() / rho, 0.0);
        let s = b / r;
        (Self::rotation(index, c, s), r)
    }

    /// General 2×2 unitary block. Blocks within `1e-10` of unitary are
    /// re-orthonormalized; anything further off is rejected.
    pub fn from_block(index: usize, block: [[C64; 2]; 2]) -> Result<Self> {
        let defect = unitary_defect(&block);
        if !(defect <= UNITARY_TOL) {
            return Err(Error::NotUnitary(defect));
        }
        // Gram-Schmidt on the columns.
        let (mut a0, mut a1) = (block[0][0], block[1][0]);
        let n0 = a0.norm().hypot(a1.norm());
        a0 /= n0;
        a1 /= n0;
        let (mut b0, mut b1) = (block[0][1], block[1][1]);
        let proj = a0.conj() * b0 + a1.conj() * b1;
        b0 -= proj * a0;
        b1 -= proj * a1;
        let n1 = b0.norm().hypot(b1.norm());
        b0 /= n1;
        b1 /= n1;
        Ok(Self { index, block: [[a0, b0], [a1, b1]] })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn block(&self) -> [[C64; 2]; 2] {
        self.block
    }

    pub fn with_index(mut self, index: usize) -> Self {
        self.index = index;
        self
    }

    pub fn adjoint(&self) -> Self {
        let b = self.block;
        Self { index: self.index, block: [[b[0][0].conj(), b[1][0].conj()], [b[0][1].conj(), b[1][1].conj()]] }
    }

    /// Magnitude of the off-diagonal coupling.
    pub fn coupling(&self) -> f64 {
        self.block[1][0].norm()
    }

    pub fn is_trivial(&self) -> bool {
        self.coupling() < TRIVIAL_CORE_TOL
    }

    /// Product of two cores acting on the same rows.
    pub fn compose(&self, other: &Self) -> Self {
        debug_assert_eq!(self.index, other.index);
        let (a, b) = (self.block, other.block);
        let mut out = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self { index: self.index, block: out }
    }

    /// Dense `n×n` embedding.
    pub fn embed(&self, n: usize) -> ComplexMatrix {
        let mut e = dense::identity(n);
        let r = self.index - 1;
        e[(r, r)] = self.block[0][0];
        e[(r, r + 1)] = self.block[0][1];
        e[(r + 1, r)] = self.block[1][0];
        e[(r + 1, r + 1)] = self.block[1][1];
        e
    }

    fn check_range(&self, dim: usize) -> Result<()> {
        if self.index == 0 || self.index + 1 > dim {
            return Err(Error::IndexOutOfRange { index: self.index, dim });
        }
        Ok(())
    }

    /// `m ← C·m` in place (rows `i, i+1`). The index must already be valid.
    pub(crate) fn lmul(&self, m: &mut ComplexMatrix) {
        let r = self.index - 1;
        let b = self.block;
        for j in 0..m.ncols() {
            let (x, y) = (m[(r, j)], m[(r + 1, j)]);
            m[(r, j)] = b[0][0] * x + b[0][1] * y;
            m[(r + 1, j)] = b[1][0] * x + b[1][1] * y;
        }
    }

    /// `m ← m·C` in place (columns `i, i+1`).
    pub(crate) fn rmul(&self, m: &mut ComplexMatrix) {
        let c = self.index - 1;
        let b = self.block;
        for i in 0..m.nrows() {
            let (x, y) = (m[(i, c)], m[(i, c + 1)]);
            m[(i, c)] = x * b[0][0] + y * b[1][0];
            m[(i, c + 1)] = x * b[0][1] + y * b[1][1];
        }
    }
}

impl fmt::Display for CoreTransformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.index)
    }
}

fn unitary_defect(b: &[[C64; 2]; 2]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let g = b[0][i].conj() * b[0][j] + b[1][i].conj() * b[1][j];
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}

/// `C·M`; only rows `i, i+1` change.
pub fn apply_core_left(c: &CoreTransformation, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    c.check_range(m.nrows())?;
    let mut out = m.clone();
    c.lmul(&mut out);
    Ok(out)
}

/// `M·C`; only columns `i, i+1` change.
pub fn apply_core_right(m: &ComplexMatrix, c: &CoreTransformation) -> Result<ComplexMatrix> {
    c.check_range(m.ncols())?;
    let mut out = m.clone();
    c.rmul(&mut out);
    Ok(out)
}

/// An ordered product of core transformations acting on `dim`-vectors.
/// `cores[0]` is the leftmost factor.
#[derive(Clone, Debug, PartialEq)]
pub struct CorePattern {
    dim: usize,
    cores: Vec<CoreTransformation>,
}

impl CorePattern {
    pub fn new(dim: usize, cores: Vec<CoreTransformation>) -> Result<Self> {
        for c in &cores {
            c.check_range(dim)?;
        }
        Ok(Self { dim, cores })
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, cores: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cores(&self) -> &[CoreTransformation] {
        &self.cores
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    /// Core indices in product order, e.g. `[1, 4, 5, 6, 3, 2]`.
    pub fn indices(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.index).collect()
    }

    /// The adjoint: reversed order, each core conjugate-transposed.
    pub fn adjoint(&self) -> Self {
        Self { dim: self.dim, cores: self.cores.iter().rev().map(|c| c.adjoint()).collect() }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = dense::identity(self.dim);
        self.lmul(&mut m);
        m
    }

    /// `m ← P·m`.
    pub fn lmul(&self, m: &mut ComplexMatrix) {
        for c in self.cores.iter().rev() {
            c.lmul(m);
        }
    }

    /// `m ← m·P`.
    pub fn rmul(&self, m: &mut ComplexMatrix) {
        for c in &self.cores {
            c.rmul(m);
        }
    }

    pub fn is_full_shape(&self) -> bool {
        self.positions().is_some()
    }

    /// Position of each index `1..dim-1` in the product, if this is a shape.
    fn positions(&self) -> Option<Vec<usize>> {
        if self.dim < 2 || self.cores.len() != self.dim - 1 {
            return None;
        }
        let mut pos = vec![usize::MAX; self.dim - 1];
        for (p, c) in self.cores.iter().enumerate() {
            let slot = &mut pos[c.index - 1];
            if *slot != usize::MAX {
                return None;
            }
            *slot = p;
        }
        Some(pos)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Transition {
    /// `C_i` precedes `C_{i+1}`: Hessenberg block.
    Descending,
    /// `C_{i+1}` precedes `C_i`: inv-Hessenberg block.
    Ascending,
}

/// Adjacent-ordering classification of a shape: entry `t` (0-based) describes
/// the pair `(C_{t+1}, C_{t+2})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureDescriptor {
    transitions: Vec<Transition>,
}

/// A maximal run of equal transitions and the (1-based, inclusive) rows and
/// columns of the block it generates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StructureBlock {
    pub kind: Transition,
    pub first: usize,
    pub last: usize,
}

impl StructureDescriptor {
    pub fn from_transitions(transitions: Vec<Transition>) -> Self {
        Self { transitions }
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Runs of equal transitions. Transitions `a..=b` span rows `a..=b+2`.
    pub fn blocks(&self) -> Vec<StructureBlock> {
        let mut out: Vec<StructureBlock> = Vec::new();
        for (t, &kind) in self.transitions.iter().enumerate() {
            match out.last_mut() {
                Some(b) if b.kind == kind => b.last = t + 3,
                _ => out.push(StructureBlock { kind, first: t + 1, last: t + 3 }),
            }
        }
        out
    }
}

pub fn classify_shape(p: &CorePattern) -> Result<StructureDescriptor> {
    let pos = p.positions().ok_or_else(|| Error::NotAFullShape(format!("indices {:?} in dimension {}", p.indices(), p.dim)))?;
    let transitions = pos.windows(2).map(|w| if w[0] < w[1] { Transition::Descending } else { Transition::Ascending }).collect();
    Ok(StructureDescriptor { transitions })
}

const HESSENBERG_TOL: f64 = 1e-14;

/// `H = C_1 C_2 ⋯ C_{n-1} R` for an upper-Hessenberg `H`.
pub fn qr_hessenberg(h: &ComplexMatrix) -> Result<(CorePattern, ComplexMatrix)> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!("qr_hessenberg on {}x{}", h.nrows(), h.ncols())));
    }
    let defect = dense::lower_defect(h, 1);
    if defect > HESSENBERG_TOL * h.norm() {
        return Err(Error::NotHessenberg { defect });
    }
    let n = h.nrows();
    let mut r = h.clone();
    dense::truncate_lower(&mut r, 1);
    let mut cores = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n.saturating_sub(1) {
        let (g, diag) = CoreTransformation::from_column(i + 1, r[(i, i)], r[(i + 1, i)]);
        g.adjoint().lmul(&mut r);
        r[(i, i)] = diag;
        r[(i + 1, i)] = ZERO;
        cores.push(g);
    }
    Ok((CorePattern { dim: n, cores }, r))
}

/// `G_{i-1} G_i Ĝ_{i-1} = Γ_i Γ_{i-1} Γ̂_i`.
pub fn turnover(
    g1: &CoreTransformation,
    g2: &CoreTransformation,
    g3: &CoreTransformation,
) -> Result<(CoreTransformation, CoreTransformation, CoreTransformation)> {
    let i = g2.index;
    if i < 2 || g1.index + 1 != i || g3.index + 1 != i {
        return Err(Error::IndexPatternMismatch(g1.index, g2.index, g3.index));
    }
    // Work on the local 3x3 window with cores at local indices 1 and 2.
    let mut m = dense::identity(3);
    g3.with_index(1).lmul(&mut m);
    g2.with_index(2).lmul(&mut m);
    g1.with_index(1).lmul(&mut m);

    let (gamma1, _) = CoreTransformation::from_column(2, m[(1, 0)], m[(2, 0)]);
    gamma1.adjoint().lmul(&mut m);
    // First column is now a unit vector supported on rows 0, 1.
    let gamma2 = CoreTransformation::rotation(1, m[(0, 0)], m[(1, 0)]);
    gamma2.adjoint().lmul(&mut m);
    let gamma3 =
        CoreTransformation::from_block(2, [[m[(1, 1)], m[(1, 2)]], [m[(2, 1)], m[(2, 2)]]]).map_err(|_| Error::TurnoverBreakdown(i))?;
    Ok((gamma1.with_index(i), gamma2.with_index(i - 1), gamma3.with_index(i)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferDirection {
    /// `P·R = R̃·P̃`
    LeftToRight,
    /// `R·P = P̃·R̃`
    RightToLeft,
}

const SINGULAR_TOL: f64 = 1e-14;

/// Move a pattern of cores through an upper-triangular matrix. The output
/// pattern lists its cores in the same index order, so the shape is kept.
pub fn transfer_through(p: &CorePattern, r: &ComplexMatrix, direction: TransferDirection) -> Result<(ComplexMatrix, CorePattern)> {
    let n = r.nrows();
    if !r.is_square() || p.dim != n {
        return Err(Error::DimensionMismatch(format!("pattern of dimension {} against {}x{} factor", p.dim, r.nrows(), r.ncols())));
    }
    let scale = r.norm();
    let defect = dense::lower_defect(r, 0);
    if defect > 1e-14 * scale {
        return Err(Error::NotTriangular { defect });
    }
    for i in 0..n {
        if r[(i, i)].norm() < SINGULAR_TOL * scale {
            return Err(Error::SingularTriangular(i + 1));
        }
    }
    let mut r = r.clone();
    dense::truncate_lower(&mut r, 0);
    let mut out = Vec::with_capacity(p.len());
    match direction {
        TransferDirection::LeftToRight => {
            for c in p.cores.iter().rev() {
                let k = c.index - 1;
                c.lmul(&mut r);
                let (x, y) = (r[(k + 1, k)], r[(k + 1, k + 1)]);
                let ct = if x == ZERO { CoreTransformation::identity(c.index) } else { CoreTransformation::rotation(c.index, y.conj(), x) };
                ct.adjoint().rmul(&mut r);
                r[(k + 1, k)] = ZERO;
                out.push(ct);
            }
            out.reverse();
        }
        TransferDirection::RightToLeft => {
            for c in &p.cores {
                let k = c.index - 1;
                c.rmul(&mut r);
                let (ct, diag) = CoreTransformation::from_column(c.index, r[(k, k)], r[(k + 1, k)]);
                ct.adjoint().lmul(&mut r);
                r[(k, k)] = diag;
                r[(k + 1, k)] = ZERO;
                out.push(ct);
            }
        }
    }
    Ok((r, CorePattern { dim: n, cores: out }))
}

/// Numerical ranks of the lower-left blocks `z(i:m, 1:i)`, `i = 1..m-1`
/// (1-based, diagonal included). Singular values above `tol·‖z‖₂` count.
pub fn rank_profile_lower(z: &ComplexMatrix, tol: f64) -> Vec<usize> {
    let m = z.nrows();
    let abs_tol = tol * dense::norm2(z);
    (1..m)
        .map(|i| {
            let block = z.view((i - 1, 0), (m - i + 1, i)).into_owned();
            dense::numerical_rank(&block, abs_tol)
        })
        .collect()
}
