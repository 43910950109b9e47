//! Dense complex matrix kernel.
//!
//! Everything in this crate works on double precision complex scalars stored
//! in column-major [`nalgebra::DMatrix`]. Real data is promoted on entry.
//! Problem sizes are at desk scale (a few hundred rows at most), so the
//! kernel favours simple dense factorizations over structure exploitation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// The bilinear pairing `(x, y) = yᴴx` used by the two-sided recurrences.
#[inline]
pub fn pairing(x: &ComplexVector, y: &ComplexVector) -> C64 {
    y.dotc(x)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn from_real(m: &DMatrix<f64>) -> ComplexMatrix {
    m.map(|x| C64::new(x, 0.0))
}

pub fn all_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// nalgebra's default iterations stop only at machine epsilon and are
/// unbounded; on clustered spectra they can stall for seconds. These are the
/// deflation tolerances tried in turn, each with a bounded iteration count.
const ITERATION_TOLERANCES: [f64; 3] = [4.0 * f64::EPSILON, 1e-14, 1e-12];

fn max_iterations(n: usize) -> usize {
    200 * n.max(10)
}

/// SVD with bounded iterations, falling back to the unbounded default.
pub(crate) fn svd(m: &ComplexMatrix, u: bool, v: bool) -> nalgebra::SVD<C64, nalgebra::Dyn, nalgebra::Dyn> {
    let n = m.nrows().max(m.ncols());
    ITERATION_TOLERANCES
        .iter()
        .find_map(|&eps| nalgebra::SVD::try_new(m.clone(), u, v, eps, max_iterations(n)))
        .unwrap_or_else(|| nalgebra::SVD::new(m.clone(), u, v))
}

/// Singular values in decreasing order. Empty input yields an empty list.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = svd(m, false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm.
pub fn norm2(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Number of singular values strictly above `abs_tol`.
pub fn numerical_rank(m: &ComplexMatrix, abs_tol: f64) -> usize {
    singular_values(m).iter().filter(|&&s| s > abs_tol).count()
}

/// Largest magnitude among entries `(i, j)` with `i > j + below`.
///
/// `below = 0` measures the strictly lower triangle, `below = 1` the part
/// under the first subdiagonal (the Hessenberg defect).
pub fn lower_defect(m: &ComplexMatrix, below: usize) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in (j + below + 1)..m.nrows() {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

pub fn is_upper_hessenberg(m: &ComplexMatrix, rel_tol: f64) -> bool {
    lower_defect(m, 1) <= rel_tol * m.norm().max(f64::MIN_POSITIVE)
}

pub fn is_upper_triangular(m: &ComplexMatrix, rel_tol: f64) -> bool {
    lower_defect(m, 0) <= rel_tol * m.norm().max(f64::MIN_POSITIVE)
}

/// Zero every entry below the `below`-th subdiagonal.
pub fn truncate_lower(m: &mut ComplexMatrix, below: usize) {
    for j in 0..m.ncols() {
        for i in (j + below + 1)..m.nrows() {
            m[(i, j)] = ZERO;
        }
    }
}

/// `‖QᴴQ − I‖₂` for a matrix with (supposedly) orthonormal columns.
pub fn orthonormality_defect(q: &ComplexMatrix) -> f64 {
    let g = q.adjoint() * q - identity(q.ncols());
    norm2(&g)
}

/// Orthonormal basis of the column span (thin QR, full column rank assumed).
pub fn orthonormal_basis(m: &ComplexMatrix) -> ComplexMatrix {
    let k = m.ncols().min(m.nrows());
    let q = m.clone().qr().q();
    q.columns(0, k).into_owned()
}

/// Sine of the largest principal angle between two column spans of equal
/// dimension.
pub fn subspace_sine(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let qa = orthonormal_basis(a);
    let qb = orthonormal_basis(b);
    let proj = &qb * (qb.adjoint() * &qa);
    norm2(&(qa - proj))
}

/// Eigenvalues of a square complex matrix (complex Schur form).
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("eigenvalues of a {}x{} matrix", m.nrows(), m.ncols())));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    if m.nrows() == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = |x: &ComplexMatrix| {
        ITERATION_TOLERANCES
            .iter()
            .find_map(|&eps| nalgebra::Schur::try_new(x.clone(), eps, max_iterations(x.nrows())))
            .and_then(|s| s.eigenvalues())
            .map(|e| e.iter().copied().collect::<Vec<C64>>())
    };
    // Shifted QR can stagnate on structured inputs such as permutations; a
    // fixed Householder similarity breaks the symmetry.
    schur(m)
        .or_else(|| {
            let h = householder_mix(m.nrows());
            schur(&(&h * m * &h))
        })
        .ok_or(Error::NoConvergence("complex Schur iteration"))
}

/// `I − 2uuᴴ` for a fixed dense unit vector `u`.
fn householder_mix(n: usize) -> ComplexMatrix {
    let u = ComplexVector::from_iterator(n, (0..n).map(|k| c64(1.0 + k as f64, 0.5 + 0.25 * k as f64)));
    let u = &u / c64(u.norm(), 0.0);
    identity(n) - &u * u.adjoint() * c64(2.0, 0.0)
}

/// Dense LU with partial pivoting of a square matrix, with a relative
/// pivot check.
#[derive(Clone, Debug)]
pub struct DenseLu {
    lu: nalgebra::linalg::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl DenseLu {
    /// Factor `m`; `None` if a pivot falls below `1e-15` of the largest one.
    pub fn new(m: ComplexMatrix) -> Option<Self> {
        if !m.is_square() || m.nrows() == 0 || !all_finite(&m) {
            return None;
        }
        let lu = m.lu();
        let u = lu.u();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..u.nrows() {
            let p = u[(i, i)].norm();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        if hi == 0.0 || lo <= 1e-15 * hi {
            return None;
        }
        Some(Self { lu })
    }

    pub fn solve(&self, rhs: &ComplexVector) -> Option<ComplexVector> {
        self.lu.solve(rhs).filter(|x| x.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    pub fn solve_matrix(&self, rhs: &ComplexMatrix) -> Option<ComplexMatrix> {
        self.lu.solve(rhs).filter(all_finite)
    }
}

/// `Z` with `Z·K = H`, via an LU factorization of `Kᵀ`.
pub fn right_divide(h: &ComplexMatrix, k: &ComplexMatrix) -> Option<ComplexMatrix> {
    let lu = DenseLu::new(k.transpose())?;
    lu.solve_matrix(&h.transpose()).map(|zt| zt.transpose())
}

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Right singular vector of the smallest singular value, together with the
/// ratio `σ_min / σ_max`. Used for one-dimensional null spaces.
pub fn smallest_right_singular_vector(m: &ComplexMatrix) -> (ComplexVector, f64) {
    let n = m.ncols();
    if m.nrows() == 0 {
        let mut e = ComplexVector::zeros(n);
        e[n - 1] = ONE;
        return (e, 0.0);
    }
    // Pad with zero rows so the SVD returns a full set of right vectors.
    let mut padded = m.clone();
    if padded.nrows() < n {
        padded = padded.resize_vertically(n, ZERO);
    }
    let dec = svd(&padded, false, true);
    let vt = dec.v_t.expect("requested right singular vectors");
    let s = &dec.singular_values;
    let (mut imin, mut smax) = (0usize, 0.0f64);
    for i in 0..s.len() {
        if s[i] < s[imin] {
            imin = i;
        }
        smax = smax.max(s[i]);
    }
    let v = vt.row(imin).adjoint();
    let ratio = if smax > 0.0 { s[imin] / smax } else { 0.0 };
    (v, ratio)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_cyclic_shift() {
        let m = 6;
        let mut p = ComplexMatrix::zeros(m, m);
        for j in 0..m {
            p[((j + 1) % m, j)] = ONE;
        }
        let eigs = eigenvalues(&p).unwrap();
        assert_eq!(eigs.len(), m);
        for k in 0..m {
            let root = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64);
            assert!(eigs.iter().any(|z| (z - root).norm() < 1e-10), "missing {root}");
        }
    }

    #[test]
    fn pairing_is_linear_in_first_argument() {
        let x = ComplexVector::from_vec(vec![c64(1.0, 2.0), c64(0.0, -1.0)]);
        let y = ComplexVector::from_vec(vec![c64(0.5, 0.5), c64(2.0, 0.0)]);
        let a = c64(0.0, 3.0);
        let lhs = pairing(&(&x * a), &y);
        assert!((lhs - a * pairing(&x, &y)).norm() < 1e-15);
        // (x, y) = yᴴx
        let manual = y[0].conj() * x[0] + y[1].conj() * x[1];
        assert!((pairing(&x, &y) - manual).norm() < 1e-15);
    }

    #[test]
    fn norm2_of_diagonal() {
        let d = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c64(3.0, 0.0), c64(0.0, -4.0), c64(1.0, 0.0)]));
        assert!((norm2(&d) - 4.0).abs() < 1e-14);
        assert_eq!(numerical_rank(&d, 1.5), 2);
    }

    #[test]
    fn lu_rejects_singular() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[ONE, ONE, ONE, ONE]);
        assert!(DenseLu::new(m).is_none());
    }

    #[test]
    fn null_vector_of_rank_deficient() {
        let m = ComplexMatrix::from_row_slice(2, 3, &[ONE, ZERO, ONE, ZERO, ONE, ONE]);
        let (v, ratio) = smallest_right_singular_vector(&m);
        assert!(ratio < 1e-14);
        assert!((&m * &v).norm() < 1e-14);
        assert!((v.norm() - 1.0).abs() < 1e-14);
    }
}
