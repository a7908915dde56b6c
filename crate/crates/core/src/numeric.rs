//! Small dense linear-algebra kernels: Hermitian eigendecomposition (cyclic
//! Jacobi with complex rotations) and matrix exponentials built from it.
//!
//! Dimensions in this crate stay in the low hundreds, where Jacobi is accurate
//! to machine precision and needs no external backend.

use crate::scalar::{phase, Scalar, C};
use ndarray::Array2;
use num_complex::Complex;

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the unitary matrix whose
/// columns are the matching eigenvectors, so `a = v diag(w) v†`.
pub fn eigh<R: Scalar>(a: &Array2<C<R>>) -> (Vec<R>, Array2<C<R>>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigh: square matrix required");
    let mut m = a.clone();
    let mut v = Array2::<C<R>>::eye(n);

    let scale = off_norm(&m) + diag_norm(&m);
    let tol = R::epsilon() * R::of(n as f64) * (scale + R::one());
    // Cyclic sweeps; Hermitian Jacobi converges quadratically.
    for _sweep in 0..60 {
        if off_norm(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm() <= tol / R::of(n as f64) {
                    continue;
                }
                let phi = apq.arg();
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (R::of(2.0) * apq.norm());
                let t = if tau >= R::zero() {
                    R::one() / (tau + (R::one() + tau * tau).sqrt())
                } else {
                    -R::one() / (-tau + (R::one() + tau * tau).sqrt())
                };
                let c = R::one() / (R::one() + t * t).sqrt();
                let s = t * c;

                // U = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on coordinates (p, q).
                let e_m = phase(-phi);
                let e_p = phase(phi);
                let (cc, sc): (C<R>, C<R>) = (Complex::new(c, R::zero()), Complex::new(s, R::zero()));

                // Columns: A <- A U, V <- V U.
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = cc * akp - sc * e_m * akq;
                    m[(k, q)] = sc * akp + cc * e_m * akq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = cc * vkp - sc * e_m * vkq;
                    v[(k, q)] = sc * vkp + cc * e_m * vkq;
                }
                // Rows: A <- U† A.
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = cc * apk - sc * e_p * aqk;
                    m[(q, k)] = sc * apk + cc * e_p * aqk;
                }
                // Clean the target element; roundoff otherwise accumulates.
                m[(p, q)] = C::new(R::zero(), R::zero());
                m[(q, p)] = C::new(R::zero(), R::zero());
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let w: Vec<R> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| w[i].partial_cmp(&w[j]).expect("finite eigenvalues"));

    let sorted_w: Vec<R> = order.iter().map(|&i| w[i]).collect();
    let mut sorted_v = Array2::<C<R>>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            sorted_v[(k, dst)] = v[(k, src)];
        }
    }
    (sorted_w, sorted_v)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh<R: Scalar>(a: &Array2<C<R>>) -> Vec<R> {
    eigh(a).0
}

/// `exp(-i t a)` for Hermitian `a`, via eigendecomposition. Exactly unitary up
/// to roundoff.
pub fn expm_i_hermitian<R: Scalar>(a: &Array2<C<R>>, t: R) -> Array2<C<R>> {
    let (w, v) = eigh(a);
    let n = w.len();
    // v · diag(e^{-i t w}) · v†
    let mut scaled = v.clone();
    for (j, &wj) in w.iter().enumerate() {
        let ph = phase(-t * wj);
        for k in 0..n {
            scaled[(k, j)] *= ph;
        }
    }
    scaled.dot(&dagger(&v))
}

/// Conjugate transpose.
pub fn dagger<R: Scalar>(a: &Array2<C<R>>) -> Array2<C<R>> {
    let (r, c) = a.dim();
    Array2::from_shape_fn((c, r), |(i, j)| a[(j, i)].conj())
}

/// Largest absolute entry.
pub fn max_abs<R: Scalar>(a: &Array2<C<R>>) -> R {
    a.iter().fold(R::zero(), |acc, z| acc.max(z.norm()))
}

fn off_norm<R: Scalar>(a: &Array2<C<R>>) -> R {
    let mut acc = R::zero();
    for ((i, j), z) in a.indexed_iter() {
        if i != j {
            acc += z.norm_sqr();
        }
    }
    acc.sqrt()
}

fn diag_norm<R: Scalar>(a: &Array2<C<R>>) -> R {
    let mut acc = R::zero();
    for i in 0..a.nrows() {
        acc += a[(i, i)].norm_sqr();
    }
    acc.sqrt()
}
