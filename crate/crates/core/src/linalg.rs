//! Direct linear solvers for Newton steps.

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};

fn singular(what: &str) -> Error {
    Error::NewtonDivergence(format!("{what}: singular Jacobian"))
}

/// Solve a tridiagonal system by Gaussian elimination with partial pivoting.
///
/// `sub[i]` multiplies `x[i-1]` in row `i` (`sub[0]` unused), `sup[i]`
/// multiplies `x[i+1]` (`sup[n-1]` unused).
pub(crate) fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert!(sub.len() == n && sup.len() == n && rhs.len() == n);
    if n == 0 {
        return Ok(Vec::new());
    }
    // Row i of U has entries d[i], e[i], f[i] at columns i, i+1, i+2.
    let mut d = diag.to_vec();
    let mut e = sup.to_vec();
    let mut f = vec![0.0; n];
    let mut b = rhs.to_vec();
    let mut lower = sub.to_vec();
    for i in 0..n.saturating_sub(1) {
        let l = lower[i + 1];
        if l.abs() > d[i].abs() {
            // Swap rows i and i+1.
            let (di, ei, bi) = (d[i], e[i], b[i]);
            d[i] = l;
            e[i] = d[i + 1];
            f[i] = if i + 1 < n - 1 { e[i + 1] } else { 0.0 };
            b[i] = b[i + 1];
            let m = di / l;
            d[i + 1] = ei - m * e[i];
            if i + 1 < n - 1 {
                e[i + 1] = -m * f[i];
            }
            b[i + 1] = bi - m * b[i];
        } else {
            if d[i] == 0.0 {
                return Err(singular("tridiagonal"));
            }
            let m = l / d[i];
            d[i + 1] -= m * e[i];
            b[i + 1] -= m * b[i];
            f[i] = 0.0;
        }
        lower[i + 1] = 0.0;
    }
    if d[n - 1] == 0.0 {
        return Err(singular("tridiagonal"));
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= e[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= f[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(singular("tridiagonal"));
    }
    Ok(x)
}

/// Coordinate-format sparse matrix assembled row by row.
#[derive(Debug, Clone)]
pub(crate) struct SparseSystem {
    n: usize,
    entries: Vec<Triplet<usize, usize, f64>>,
}

impl SparseSystem {
    pub(crate) fn new(n: usize) -> Self {
        Self { n, entries: Vec::with_capacity(5 * n) }
    }

    pub(crate) fn add(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push(Triplet::new(row, col, value));
    }

    #[cfg(test)]
    pub(crate) fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for t in &self.entries {
            m[t.row][t.col] += t.val;
        }
        m
    }

    fn matrix(&self) -> Result<SparseColMat<usize, f64>> {
        let mut e = self.entries.clone();
        e.sort_by_key(|t| (t.col, t.row));
        let mut merged: Vec<Triplet<usize, usize, f64>> = Vec::with_capacity(e.len());
        for t in e {
            match merged.last_mut() {
                Some(last) if last.row == t.row && last.col == t.col => last.val += t.val,
                _ => merged.push(t),
            }
        }
        SparseColMat::try_new_from_triplets(self.n, self.n, &merged)
            .map_err(|e| Error::NewtonDivergence(format!("sparse assembly failed: {e:?}")))
    }

    fn rhs(&self, rhs: &[f64]) -> Mat<f64> {
        Mat::from_fn(self.n, 1, |i, _| rhs[i])
    }

    fn unpack(&self, x: Mat<f64>) -> Result<Vec<f64>> {
        let out: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(singular("sparse"));
        }
        Ok(out)
    }

    /// General sparse LU solve.
    pub(crate) fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let a = self.matrix()?;
        let lu = a.sp_lu().map_err(|_| singular("sparse LU"))?;
        self.unpack(lu.solve(&self.rhs(rhs)))
    }

    /// Solve for a symmetric positive definite matrix; falls back to LU.
    pub(crate) fn solve_spd(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let a = self.matrix()?;
        match a.sp_cholesky(faer::Side::Lower) {
            Ok(llt) => self.unpack(llt.solve(&self.rhs(rhs))),
            Err(_) => {
                let lu = a.sp_lu().map_err(|_| singular("sparse LU"))?;
                self.unpack(lu.solve(&self.rhs(rhs)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri_apply(sub: &[f64], diag: &[f64], sup: &[f64], x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += sub[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += sup[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    #[test]
    fn tridiagonal_with_pivoting() {
        // Zero leading diagonal entries force row swaps.
        let sub = [0.0, 3.0, 1.0, 5.0, 2.0];
        let diag = [0.0, 1e-3, 0.0, 2.0, 1.0];
        let sup = [1.0, 4.0, 2.0, -1.0, 0.0];
        let x_true = [1.0, -2.0, 0.5, 3.0, -1.0];
        let b = tri_apply(&sub, &diag, &sup, &x_true);
        let x = solve_tridiagonal(&sub, &diag, &sup, &b).unwrap();
        for (a, e) in x.iter().zip(x_true) {
            assert!((a - e).abs() < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn tridiagonal_singular_is_reported() {
        let r = solve_tridiagonal(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]);
        assert!(r.is_err());
    }

    #[test]
    fn sparse_solves_match() {
        let n = 6;
        let mut s = SparseSystem::new(n);
        for i in 0..n {
            s.add(i, i, 2.0);
            s.add(i, i, 1.0);
            if i > 0 {
                s.add(i, i - 1, -1.0);
                s.add(i - 1, i, -1.0);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let b: Vec<f64> = (0..n)
            .map(|i| {
                3.0 * x_true[i] - if i > 0 { x_true[i - 1] } else { 0.0 } - if i + 1 < n { x_true[i + 1] } else { 0.0 }
            })
            .collect();
        for x in [s.solve(&b).unwrap(), s.solve_spd(&b).unwrap()] {
            for (a, e) in x.iter().zip(&x_true) {
                assert!((a - e).abs() < 1e-12);
            }
        }
    }
}
