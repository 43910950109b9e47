//! Seeded test-matrix generators.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dense::{ComplexMatrix, ComplexVector, C64};

/// Standard complex normal: real and imaginary parts i.i.d. `N(0, 1/2)`,
/// so `E|z|² = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    // Fill column by column so the draw order matches storage order.
    let data: Vec<C64> = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data)
}

pub fn random_complex_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> ComplexVector {
    ComplexVector::from_iterator(len, (0..len).map(|_| complex_normal(rng)))
}

/// Haar-distributed unitary matrix (QR of a Ginibre matrix with the
/// diagonal phases of `R` folded back into `Q`).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let qr = random_complex_matrix(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Upper-triangular matrix with prescribed diagonal and standard complex
/// normal strictly-upper entries, drawn row by row.
pub fn gen_upper_triangular<R: Rng + ?Sized>(rng: &mut R, eigenvalues: &[C64]) -> ComplexMatrix {
    let m = eigenvalues.len();
    let mut a = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        a[(i, i)] = eigenvalues[i];
        for j in (i + 1)..m {
            a[(i, j)] = complex_normal(rng);
        }
    }
    a
}

/// Well-conditioned random upper-triangular matrix (diagonal magnitudes in
/// `[1, 2]`).
pub fn random_upper_triangular<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let mut r = random_complex_matrix(rng, n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            r[(i, j)] = C64::new(0.0, 0.0);
        }
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        r[(j, j)] = phase * (1.0 + rng.random::<f64>());
    }
    r
}

/// Proper upper-Hessenberg matrix (subdiagonal magnitudes in `[0.5, 1.5]`).
pub fn random_hessenberg<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let mut h = random_complex_matrix(rng, n, n);
    for j in 0..n {
        for i in (j + 2)..n {
            h[(i, j)] = C64::new(0.0, 0.0);
        }
        if j + 1 < n {
            let s = h[(j + 1, j)];
            let phase = if s.norm() > 0.0 { s / s.norm() } else { C64::new(1.0, 0.0) };
            h[(j + 1, j)] = phase * (0.5 + rng.random::<f64>());
        }
    }
    h
}

/// Random Hermitian matrix with the given real spectrum.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, eigenvalues: &[f64]) -> ComplexMatrix {
    let n = eigenvalues.len();
    let q = random_unitary(rng, n);
    let d = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(n, eigenvalues.iter().map(|&x| C64::new(x, 0.0))));
    let a = &q * d * q.adjoint();
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Non-normal matrix `X·diag(λ)·X⁻¹` with a moderately conditioned `X`.
pub fn random_diagonalizable<R: Rng + ?Sized>(rng: &mut R, eigenvalues: &[C64]) -> ComplexMatrix {
    let n = eigenvalues.len();
    let x = random_unitary(rng, n) + random_complex_matrix(rng, n, n) * C64::new(0.2, 0.0);
    let d = ComplexMatrix::from_diagonal(&ComplexVector::from_column_slice(eigenvalues));
    let xinv = x.clone().try_inverse().expect("perturbed unitary is invertible");
    x * d * xinv
}
