//! Compressed sparse rows, deterministic triplet assembly, and the linear
//! solvers (sparse Cholesky / LU with equilibration and refinement, Jacobi
//! preconditioned CG fallback).

use crate::error::{Error, Result};
use faer::sparse::{SparseColMat, Triplet};
use faer::prelude::*;
use faer::Side;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl CsrMatrix {
    /// Duplicates are summed in input order, so the result depends only on
    /// the triplet sequence.
    pub fn from_triplets(nrows: usize, ncols: usize, t: &[(usize, usize, f64)]) -> Self {
        let mut count = vec![0usize; nrows + 1];
        for &(i, _, _) in t {
            count[i + 1] += 1;
        }
        for i in 0..nrows {
            count[i + 1] += count[i];
        }
        let mut next = count.clone();
        let mut cols = vec![0usize; t.len()];
        let mut vals = vec![0.0; t.len()];
        for &(i, j, v) in t {
            let p = next[i];
            cols[p] = j;
            vals[p] = v;
            next[i] += 1;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for i in 0..nrows {
            let (a, b) = (count[i], count[i + 1]);
            order.clear();
            order.extend(a..b);
            order.sort_by_key(|&p| cols[p]);
            let mut last = usize::MAX;
            for &p in &order {
                if cols[p] == last {
                    *data.last_mut().unwrap() += vals[p];
                } else {
                    indices.push(cols[p]);
                    data.push(vals[p]);
                    last = cols[p];
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows, ncols, indptr, indices, data }
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[i]..self.indptr[i + 1]).map(move |p| (self.indices[p], self.data[p]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = &self.indices[self.indptr[i]..self.indptr[i + 1]];
        match r.binary_search(&j) {
            Ok(p) => self.data[self.indptr[i] + p],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn quad(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                d[(i, j)] += v;
            }
        }
        d
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                t.push((i, j, v));
            }
        }
        t
    }

    /// `S A S` with `S = diag(s)`.
    pub fn scaled_sym(&self, s: &[f64]) -> CsrMatrix {
        let mut out = self.clone();
        for i in 0..self.nrows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                out.data[p] *= s[i] * s[self.indices[p]];
            }
        }
        out
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let t: Vec<Triplet<usize, usize, f64>> = self.triplets().into_iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t)
            .map_err(|e| Error::Singular(format!("sparse matrix construction: {e:?}")))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub method: String,
    pub n: usize,
    pub nnz: usize,
    pub residual: f64,
    pub iterations: usize,
}

pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let nb = norm(b);
    if nb == 0.0 {
        norm(&r)
    } else {
        norm(&r) / nb
    }
}

fn equilibration(a: &CsrMatrix) -> Vec<f64> {
    a.diag().iter().map(|&d| if d.abs() > 0.0 { 1.0 / d.abs().sqrt() } else { 1.0 }).collect()
}

enum Factor {
    Llt(faer::sparse::linalg::solvers::Llt<usize, f64>),
    Lu(faer::sparse::linalg::solvers::Lu<usize, f64>),
}

impl Factor {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut c = Col::<f64>::from_fn(b.len(), |i| b[i]);
        match self {
            Factor::Llt(f) => f.solve_in_place(c.as_mut()),
            Factor::Lu(f) => f.solve_in_place(c.as_mut()),
        }
        (0..b.len()).map(|i| c[i]).collect()
    }
}

const REFINE_STEPS: usize = 6;

fn direct(a: &CsrMatrix, b: &[f64], spd: bool, tol: f64) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.nrows;
    if norm(b) == 0.0 {
        return Ok((vec![0.0; n], SolveStats { method: "trivial".into(), n, nnz: a.nnz(), residual: 0.0, iterations: 0 }));
    }
    let s = equilibration(a);
    let sa = a.scaled_sym(&s);
    let sb: Vec<f64> = b.iter().zip(&s).map(|(v, w)| v * w).collect();
    let fm = sa.to_faer()?;
    let (factor, method) = if spd {
        match fm.sp_cholesky(Side::Lower) {
            Ok(f) => (Factor::Llt(f), "cholesky"),
            Err(e) => return Err(Error::Singular(format!("cholesky: {e:?}"))),
        }
    } else {
        match fm.sp_lu() {
            Ok(f) => (Factor::Lu(f), "lu"),
            Err(e) => return Err(Error::Singular(format!("lu: {e:?}"))),
        }
    };
    let mut y = factor.solve(&sb);
    let mut steps = 0;
    let mut res = relative_residual(&sa, &y, &sb);
    while steps < REFINE_STEPS && res > 1e-3 * tol {
        let ay = sa.matvec(&y);
        let r: Vec<f64> = sb.iter().zip(&ay).map(|(p, q)| p - q).collect();
        let d = factor.solve(&r);
        let trial: Vec<f64> = y.iter().zip(&d).map(|(p, q)| p + q).collect();
        let tres = relative_residual(&sa, &trial, &sb);
        steps += 1;
        if !(tres < res) {
            break;
        }
        y = trial;
        res = tres;
    }
    let x: Vec<f64> = y.iter().zip(&s).map(|(v, w)| v * w).collect();
    let residual = relative_residual(a, &x, b);
    Ok((x, SolveStats { method: method.into(), n, nnz: a.nnz(), residual, iterations: steps }))
}

/// Jacobi-preconditioned conjugate gradients.
pub fn cg(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, SolveStats) {
    let n = a.nrows;
    let dinv: Vec<f64> = a.diag().iter().map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let nb = norm(b).max(f64::MIN_POSITIVE);
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(p, q)| p * q).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut it = 0;
    while it < max_iter && norm(&r) / nb > tol {
        let ap = a.matvec(&p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = r.iter().zip(&dinv).map(|(p, q)| p * q).collect();
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
    }
    let residual = relative_residual(a, &x, b);
    (x, SolveStats { method: "cg".into(), n, nnz: a.nnz(), residual, iterations: it })
}

/// Symmetric positive definite solve: sparse Cholesky with CG fallback.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<(Vec<f64>, SolveStats)> {
    let first = direct(a, b, true, tol);
    match first {
        Ok((x, st)) if st.residual <= tol => Ok((x, st)),
        other => {
            let (x0, seed) = match &other {
                Ok((x, _)) => (Some(x.clone()), "cholesky+cg"),
                Err(_) => (None, "cg"),
            };
            let (x, mut st) = match x0 {
                Some(x0) => {
                    let ax = a.matvec(&x0);
                    let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
                    let (d, st) = cg(a, &r, tol * norm(b) / norm(&r).max(f64::MIN_POSITIVE), 20 * a.nrows);
                    (x0.iter().zip(&d).map(|(p, q)| p + q).collect::<Vec<_>>(), st)
                }
                None => cg(a, b, tol, 20 * a.nrows),
            };
            st.method = seed.into();
            st.residual = relative_residual(a, &x, b);
            if st.residual <= tol {
                Ok((x, st))
            } else {
                Err(Error::Solver { method: st.method, residual: st.residual })
            }
        }
    }
}

/// General (symmetric indefinite) solve by sparse LU.
pub fn solve_general(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<(Vec<f64>, SolveStats)> {
    let (x, st) = direct(a, b, false, tol)?;
    if !(st.residual <= tol) {
        return Err(Error::Solver { method: st.method, residual: st.residual });
    }
    Ok((x, st))
}
