//! Small dense linear algebra: Householder QR for least squares and a
//! Cholesky factorization for covariance matrices and normal equations.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rank threshold on `|R_jj|`, relative to the Frobenius norm of the input.
const RANK_TOL: f64 = 1e-12;

/// Householder QR of a tall `n × k` matrix (`n ≥ k`).
///
/// `Q` is kept implicitly as the sequence of reflectors.
#[derive(Debug, Clone)]
pub struct Qr<T> {
    n: usize,
    k: usize,
    /// Reflector `j` acts on rows `j..n`; `None` means identity.
    reflectors: Vec<Option<Vec<T>>>,
    r: Array2<T>,
}

impl<T: Real> Qr<T> {
    /// Factorizes `a`. Fails with [`Error::SingularDesign`] when a diagonal
    /// entry of `R` falls below `1e-12 · ‖a‖_F`.
    pub fn new(a: ArrayView2<T>) -> Result<Self> {
        let (n, k) = a.dim();
        if n < k {
            return Err(Error::Dimension(format!(
                "least squares needs rows >= columns, got {n} x {k}"
            )));
        }
        let mut work: Vec<Vec<T>> = (0..k).map(|j| a.column(j).to_vec()).collect();
        let fro = work
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |acc, &v| acc + v * v)
            .sqrt();
        if !fro.is_finite() {
            return Err(Error::NonFinite("design matrix"));
        }
        let threshold = T::tol(RANK_TOL) * fro;

        let mut reflectors = Vec::with_capacity(k);
        let mut r = Array2::zeros((k, k));
        for j in 0..k {
            let col = &work[j][j..];
            let norm = col.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
            if norm <= threshold || norm == T::zero() {
                return Err(Error::SingularDesign);
            }
            let alpha = if col[0] > T::zero() { -norm } else { norm };
            let mut v = col.to_vec();
            v[0] = v[0] - alpha;
            let vnorm2 = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
            let reflector = if vnorm2 > T::zero() { Some(v) } else { None };
            if let Some(v) = &reflector {
                for c in work.iter_mut().skip(j) {
                    apply_reflector(v, vnorm2, &mut c[j..]);
                }
            }
            for (i, c) in work.iter().enumerate().skip(j) {
                r[[j, i]] = c[j];
            }
            r[[j, j]] = alpha;
            reflectors.push(reflector);
        }
        Ok(Self {
            n,
            k,
            reflectors,
            r,
        })
    }

    pub fn r(&self) -> &Array2<T> {
        &self.r
    }

    /// Least-squares solution of `a · c ≈ b`.
    pub fn solve(&self, b: ArrayView1<T>) -> Result<Array1<T>> {
        if b.len() != self.n {
            return Err(Error::Dimension(format!(
                "rhs has length {}, expected {}",
                b.len(),
                self.n
            )));
        }
        let mut qtb = b.to_vec();
        for (j, refl) in self.reflectors.iter().enumerate() {
            if let Some(v) = refl {
                let vnorm2 = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
                apply_reflector(v, vnorm2, &mut qtb[j..]);
            }
        }
        let mut c = Array1::zeros(self.k);
        for i in (0..self.k).rev() {
            let mut s = qtb[i];
            for l in i + 1..self.k {
                s = s - self.r[[i, l]] * c[l];
            }
            c[i] = s / self.r[[i, i]];
        }
        Ok(c)
    }

    /// Diagonal entry `j` of `(AᵀA)⁻¹ = R⁻¹R⁻ᵀ`, i.e. the squared norm of
    /// row `j` of `R⁻¹`.
    pub fn inverse_gram_diag(&self, j: usize) -> T {
        // Row j of R⁻¹ solves xᵀR = e_jᵀ; only entries l ≥ j are nonzero.
        let k = self.k;
        let mut x = vec![T::zero(); k];
        for l in j..k {
            let mut s = if l == j { T::one() } else { T::zero() };
            for m in j..l {
                s = s - x[m] * self.r[[m, l]];
            }
            x[l] = s / self.r[[l, l]];
        }
        x.iter().fold(T::zero(), |acc, &v| acc + v * v)
    }
}

fn apply_reflector<T: Real>(v: &[T], vnorm2: T, x: &mut [T]) {
    let two = T::lit(2.0);
    let s = v
        .iter()
        .zip(x.iter())
        .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
    let f = two * s / vnorm2;
    for (xi, &vi) in x.iter_mut().zip(v) {
        *xi = *xi - f * vi;
    }
}

/// Least-squares coefficients of `target` on the columns of `a`.
pub fn least_squares<T: Real>(a: ArrayView2<T>, target: ArrayView1<T>) -> Result<Array1<T>> {
    Qr::new(a)?.solve(target)
}

/// Lower Cholesky factor `L` with `L Lᵀ = a`. No jitter is added; a
/// non-positive pivot is an error.
pub fn cholesky<T: Real>(a: ArrayView2<T>) -> Result<Array2<T>> {
    let (n, m) = a.dim();
    if n != m {
        return Err(Error::Dimension(format!(
            "cholesky needs a square matrix, got {n} x {m}"
        )));
    }
    let mut l = Array2::<T>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            if (a[[i, j]] - a[[j, i]]).abs() > T::tol(1e-12) * (T::one() + a[[i, j]].abs()) {
                return Err(Error::NotPositiveDefinite);
            }
            let mut s = a[[i, j]];
            for k in 0..j {
                s = s - l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if !(s > T::zero()) {
                    return Err(Error::NotPositiveDefinite);
                }
                l[[i, i]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Solves `a x = b` for symmetric positive definite `a`.
pub fn solve_spd<T: Real>(a: ArrayView2<T>, b: ArrayView1<T>) -> Result<Array1<T>> {
    let l = cholesky(a)?;
    let n = b.len();
    let mut z = Array1::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[[i, k]] * z[k];
        }
        z[i] = s / l[[i, i]];
    }
    let mut x = Array1::zeros(n);
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s = s - l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    Ok(x)
}
