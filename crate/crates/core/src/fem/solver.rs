//! Linear solves for the assembled system: sparse LU below a size threshold,
//! ILU(0)-preconditioned restarted GMRES above it.

use super::sparse::{norm, CscMatrix};
use crate::{Error, Result};
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Systems with at least this many unknowns go to the iterative path.
    pub direct_threshold: usize,
    pub tolerance: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { direct_threshold: 400_000, tolerance: 1e-8, restart: 150, max_iterations: 20_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Direct,
    Iterative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub kind: SolverKind,
    pub residual: f64,
    pub iterations: usize,
}

pub fn solve(a: &CscMatrix, b: &[Complex64], opts: &SolverOptions) -> Result<(Vec<Complex64>, SolveReport)> {
    if norm(b) == 0.0 {
        let report = SolveReport { kind: SolverKind::Direct, residual: 0.0, iterations: 0 };
        return Ok((vec![Complex64::new(0.0, 0.0); a.n], report));
    }
    if a.n < opts.direct_threshold {
        solve_direct(a, b, opts.tolerance)
    } else {
        solve_gmres(a, b, opts)
    }
}

fn solve_direct(a: &CscMatrix, b: &[Complex64], tol: f64) -> Result<(Vec<Complex64>, SolveReport)> {
    let symbolic = SymbolicSparseColMat::new_checked(a.n, a.n, a.col_ptr.clone(), None, a.row_idx.clone());
    let mat = SparseColMat::new(symbolic, a.values.clone());
    let lu = mat.sp_lu().map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let solve = |rhs: &[Complex64]| -> Vec<Complex64> {
        let col = faer::col::Col::from_fn(a.n, |i| rhs[i]);
        let x = lu.solve(&col);
        (0..a.n).map(|i| x[i]).collect()
    };
    let mut x = solve(b);
    let mut residual = a.relative_residual(&x, b);
    let mut steps = 0;
    // iterative refinement against the original matrix
    while residual >= tol && steps < 3 {
        let ax = a.mul_vec(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        residual = a.relative_residual(&x, b);
        steps += 1;
    }
    if !residual.is_finite() || residual >= tol {
        return Err(Error::Factorization(format!("direct solve residual {residual:e}")));
    }
    Ok((x, SolveReport { kind: SolverKind::Direct, residual, iterations: steps }))
}

/// Incomplete LU with the sparsity of `A`, stored by rows.
pub struct Ilu0 {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CscMatrix) -> Result<Self> {
        let n = a.n;
        // transpose the CSC arrays into CSR
        let mut row_ptr = vec![0usize; n + 1];
        for &i in &a.row_idx {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut fill = row_ptr.clone();
        let mut col_idx = vec![0usize; a.nnz()];
        let mut values = vec![Complex64::new(0.0, 0.0); a.nnz()];
        for j in 0..n {
            let (rows, vals) = a.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                col_idx[fill[i]] = j;
                values[fill[i]] = v;
                fill[i] += 1;
            }
        }
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            for p in row_ptr[i]..row_ptr[i + 1] {
                if col_idx[p] == i {
                    diag[i] = p;
                }
            }
            if diag[i] == usize::MAX {
                return Err(Error::Factorization(format!("structurally zero pivot in row {i}")));
            }
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let row = row_ptr[i]..row_ptr[i + 1];
            for p in row.clone() {
                pos[col_idx[p]] = p;
            }
            for p in row.clone() {
                let k = col_idx[p];
                if k >= i {
                    break;
                }
                let pivot = values[diag[k]];
                if pivot.norm() == 0.0 {
                    return Err(Error::Factorization(format!("zero pivot in row {k}")));
                }
                let lik = values[p] / pivot;
                values[p] = lik;
                for q in diag[k] + 1..row_ptr[k + 1] {
                    let target = pos[col_idx[q]];
                    if target != usize::MAX {
                        let ukj = values[q];
                        values[target] -= lik * ukj;
                    }
                }
            }
            for p in row {
                pos[col_idx[p]] = usize::MAX;
            }
        }
        Ok(Ilu0 { row_ptr, col_idx, values, diag })
    }

    /// Solves `L U z = r` in place.
    pub fn apply(&self, z: &mut [Complex64]) {
        let n = z.len();
        for i in 0..n {
            let mut s = z[i];
            for p in self.row_ptr[i]..self.diag[i] {
                s -= self.values[p] * z[self.col_idx[p]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for p in self.diag[i] + 1..self.row_ptr[i + 1] {
                s -= self.values[p] * z[self.col_idx[p]];
            }
            z[i] = s / self.values[self.diag[i]];
        }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Restarted GMRES with right preconditioning. The recorded history holds the
/// relative residual estimate after every inner iteration.
pub fn solve_gmres(a: &CscMatrix, b: &[Complex64], opts: &SolverOptions) -> Result<(Vec<Complex64>, SolveReport)> {
    let n = a.n;
    let m = opts.restart.max(1);
    let ilu = Ilu0::new(a)?;
    let bnorm = norm(b);
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; n];
    let mut history = Vec::new();
    let mut total = 0;
    loop {
        let ax = a.mul_vec(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel < opts.tolerance {
            return Ok((x, SolveReport { kind: SolverKind::Iterative, residual: rel, iterations: total }));
        }
        if total >= opts.max_iterations || !rel.is_finite() {
            return Err(Error::NonConvergence { iterations: total, residual: rel, history });
        }
        let mut v: Vec<Vec<Complex64>> = vec![r.iter().map(|c| c / beta).collect()];
        let mut h = vec![vec![zero; m]; m + 1];
        let (mut cs, mut sn) = (vec![zero; m], vec![zero; m]);
        let mut g = vec![zero; m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k = 0;
        while k < m && total < opts.max_iterations {
            let mut z = v[k].clone();
            ilu.apply(&mut z);
            let mut w = a.mul_vec(&z);
            for (i, vi) in v.iter().enumerate() {
                let hik = dot(vi, &w);
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= hik * vj;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = Complex64::new(hn, 0.0);
            for i in 0..k {
                let t = cs[i].conj() * h[i][k] + sn[i].conj() * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (p, q) = (h[k][k], h[k + 1][k]);
            let d = (p.norm_sqr() + q.norm_sqr()).sqrt();
            if d == 0.0 {
                break;
            }
            cs[k] = p / d;
            sn[k] = q / d;
            h[k][k] = Complex64::new(d, 0.0);
            h[k + 1][k] = zero;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            k += 1;
            total += 1;
            let estimate = g[k].norm() / bnorm;
            history.push(estimate);
            if estimate < 0.5 * opts.tolerance || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|c| c / hn).collect());
        }
        // back substitution for the Krylov coefficients
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![zero; n];
        for (yi, vi) in y.iter().zip(&v) {
            for (u, c) in update.iter_mut().zip(vi) {
                *u += yi * c;
            }
        }
        ilu.apply(&mut update);
        for (xi, u) in x.iter_mut().zip(update) {
            *xi += u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Complex symmetric test matrix: 1D Helmholtz-like tridiagonal with an absorbing end.
    fn helmholtz(n: usize) -> CscMatrix {
        let mut t = Vec::new();
        let h = 1.0 / n as f64;
        for i in 0..n {
            let mut d = Complex64::new(2.0 / h - 4.0 * h, 0.0);
            if i == n - 1 {
                d += Complex64::new(0.0, -2.0);
            }
            t.push((i, i, d));
            if i + 1 < n {
                t.push((i, i + 1, Complex64::new(-1.0 / h, 0.0)));
                t.push((i + 1, i, Complex64::new(-1.0 / h, 0.0)));
            }
        }
        CscMatrix::from_triplets(n, &t)
    }

    fn rhs(n: usize) -> Vec<Complex64> {
        (0..n).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect()
    }

    #[test]
    fn direct_and_iterative_agree() {
        let a = helmholtz(300);
        let b = rhs(300);
        let (x1, r1) = solve(&a, &b, &SolverOptions::default()).unwrap();
        assert_eq!(r1.kind, SolverKind::Direct);
        assert!(r1.residual < 1e-12);
        let opts = SolverOptions { direct_threshold: 0, restart: 20, ..Default::default() };
        let (x2, r2) = solve(&a, &b, &opts).unwrap();
        assert_eq!(r2.kind, SolverKind::Iterative);
        assert!(r2.residual < 1e-8);
        let diff: Vec<Complex64> = x1.iter().zip(&x2).map(|(a, b)| a - b).collect();
        assert!(norm(&diff) < 1e-6 * norm(&x1));
    }

    #[test]
    fn ilu_is_exact_for_tridiagonal() {
        // no fill outside the pattern, so ILU(0) is the full LU
        let a = helmholtz(50);
        let b = rhs(50);
        let ilu = Ilu0::new(&a).unwrap();
        let mut z = b.clone();
        ilu.apply(&mut z);
        assert!(a.relative_residual(&z, &b) < 1e-12);
    }

    #[test]
    fn nonconvergence_reports_history() {
        let a = helmholtz(400);
        let b = rhs(400);
        let mut t: Vec<(usize, usize, Complex64)> = Vec::new();
        // scramble the preconditioner's usefulness with a long-range coupling
        for j in 0..a.n {
            let (rows, vals) = a.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                t.push((i, j, v));
            }
            t.push((j, (j * 7 + 3) % a.n, Complex64::new(0.0, 5.0)));
            t.push(((j * 7 + 3) % a.n, j, Complex64::new(0.0, 5.0)));
        }
        let a = CscMatrix::from_triplets(a.n, &t);
        let opts = SolverOptions { direct_threshold: 0, restart: 5, max_iterations: 10, ..Default::default() };
        match solve(&a, &b, &opts) {
            Err(Error::NonConvergence { iterations, history, .. }) => {
                assert_eq!(iterations, 10);
                assert_eq!(history.len(), 10);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
