//! Small dense LU and restarted GMRES.

use crate::scalar::{dot, norm2, Real};

/// LU factorization with partial pivoting of a dense row-major matrix.
#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Real> DenseLu<T> {
    /// Returns `None` when a pivot vanishes.
    pub fn factor(n: usize, mut a: Vec<T>) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == T::zero() || !pmax.is_finite() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = a[k * n + k];
            for i in (k + 1)..n {
                let m = a[i * n + k] / piv;
                a[i * n + k] = m;
                for j in (k + 1)..n {
                    a[i * n + j] = a[i * n + j] - m * a[k * n + j];
                }
            }
        }
        Some(Self { n, lu: a, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] = x[i] - self.lu[i * n + j] * x[j];
            }
            x[i] = x[i] / self.lu[i * n + i];
        }
        x
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GmresConfig<T> {
    /// Relative tolerance on the preconditioned residual's 2-norm.
    pub rel_tol: T,
    /// Krylov dimension before restart.
    pub restart: usize,
    pub max_iter: usize,
}

impl<T: Real> Default for GmresConfig<T> {
    fn default() -> Self {
        Self { rel_tol: T::lit(1e-6), restart: 40, max_iter: 400 }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Final ‖b − A x‖ / ‖b‖ evaluated with the operator.
    pub rel_residual: T,
    /// The Arnoldi residual estimate (or the true residual) reached the tolerance.
    pub converged: bool,
}

/// Right-preconditioned restarted GMRES for `A x = b` from `x = 0`.
///
/// `apply` computes `A v`; `precond` computes `M⁻¹ v`. The iterate is
/// `x = M⁻¹ y` so the monitored residual is the true one.
pub fn gmres<T, E>(
    b: &[T],
    mut apply: impl FnMut(&[T]) -> Result<Vec<T>, E>,
    mut precond: impl FnMut(&[T]) -> Vec<T>,
    cfg: &GmresConfig<T>,
) -> Result<GmresOutcome<T>, E>
where
    T: Real,
{
    let n = b.len();
    let b_norm = norm2(b);
    let mut x = vec![T::zero(); n];
    if b_norm == T::zero() {
        return Ok(GmresOutcome { x, iterations: 0, rel_residual: T::zero(), converged: true });
    }
    let m = cfg.restart.max(1);
    let mut total = 0;
    let mut r = b.to_vec();
    let mut rel = T::one();

    while total < cfg.max_iter {
        let beta = norm2(&r);
        rel = beta / b_norm;
        if rel <= cfg.rel_tol {
            return Ok(GmresOutcome { x, iterations: total, rel_residual: rel, converged: true });
        }
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| *v / beta).collect());
        // Hessenberg stored column-wise, each column of length j + 2
        let mut hess: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut cs: Vec<T> = Vec::with_capacity(m);
        let mut sn: Vec<T> = Vec::with_capacity(m);
        let mut g = vec![T::zero(); m + 1];
        g[0] = beta;
        let mut k_used = 0;
        let mut estimate_converged = false;

        for j in 0..m {
            if total >= cfg.max_iter {
                break;
            }
            let z = precond(&basis[j]);
            let mut w = apply(&z)?;
            let mut col = vec![T::zero(); j + 2];
            // modified Gram-Schmidt, twice for stability
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let hij = dot(&w, q);
                    col[i] = col[i] + hij;
                    for (wk, qk) in w.iter_mut().zip(q) {
                        *wk = *wk - hij * *qk;
                    }
                }
            }
            let h_next = norm2(&w);
            col[j + 1] = h_next;
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = col[j].hypot(col[j + 1]);
            let (c, s) = if denom == T::zero() { (T::one(), T::zero()) } else { (col[j] / denom, col[j + 1] / denom) };
            col[j] = denom;
            col[j + 1] = T::zero();
            cs.push(c);
            sn.push(s);
            g[j + 1] = -s * g[j];
            g[j] = c * g[j];
            hess.push(col);
            total += 1;
            k_used = j + 1;
            if g[j + 1].abs() / b_norm <= cfg.rel_tol || h_next == T::zero() {
                estimate_converged = true;
                break;
            }
            basis.push(w.iter().map(|v| *v / h_next).collect());
        }

        // back substitution for the least-squares coefficients
        let mut y = vec![T::zero(); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for (jj, yj) in y.iter().enumerate().skip(i + 1) {
                s = s - hess[jj][i] * *yj;
            }
            y[i] = s / hess[i][i];
        }
        let mut update = vec![T::zero(); n];
        for (yi, q) in y.iter().zip(&basis) {
            for (u, qk) in update.iter_mut().zip(q) {
                *u = *u + *yi * *qk;
            }
        }
        let dx = precond(&update);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi = *xi + *di;
        }
        let ax = apply(&x)?;
        r = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
        let new_rel = norm2(&r) / b_norm;
        // With an inexact operator (finite-difference products) the true residual can sit
        // above the Arnoldi estimate; trust the estimate and stop restarting once a
        // cycle no longer makes progress.
        if estimate_converged || new_rel <= cfg.rel_tol {
            return Ok(GmresOutcome { x, iterations: total, rel_residual: new_rel, converged: true });
        }
        if new_rel > T::lit(0.9) * rel {
            return Ok(GmresOutcome { x, iterations: total, rel_residual: new_rel, converged: false });
        }
        rel = new_rel;
    }
    Ok(GmresOutcome { x, iterations: total, rel_residual: rel, converged: rel <= cfg.rel_tol })
}
