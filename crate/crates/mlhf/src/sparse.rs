//! Compressed-row sparse matrices and a preconditioned conjugate-gradient
//! solver.

use crate::{Error, Result};

/// Symmetric sparse matrix in CSR layout. The full pattern is stored (both
/// triangles) so rows can be traversed directly by the smoothers.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    vals: Vec<f64>,
    symmetric: bool,
}

impl SparseMatrix {
    /// Build from (row, col, value) triplets; duplicate positions are summed
    /// in insertion order (stable sort) so assembly is deterministic.
    pub fn from_triplets(n: usize, mut triplets: Vec<(u32, u32, f64)>, symmetric: bool) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_counts = vec![0usize; n];
        let mut col_idx: Vec<u32> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                vals.push(v);
                row_counts[r as usize] += 1;
                last = Some((r, c));
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + row_counts[i];
        }
        SparseMatrix {
            n,
            row_ptr,
            col_idx,
            vals,
            symmetric,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_symmetric_flagged(&self) -> bool {
        self.symmetric
    }

    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.vals[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&(c as u32)) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            let mut s = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                s += v * x[*c as usize];
            }
            y[r] = s;
        }
    }

    pub fn matvec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Largest asymmetry `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let amax = self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if amax == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(*c as usize, r)).abs());
            }
        }
        worst / amax
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                d[(r, *c as usize)] = *v;
            }
        }
        d
    }
}

/// Preconditioner for the CG solver.
#[derive(Debug, Clone, Copy, Default)]
pub enum Preconditioner {
    #[default]
    None,
    Jacobi,
    /// Symmetric Gauss-Seidel (SSOR with omega = 1).
    Ssor,
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

struct SsorContext<'a> {
    mat: &'a SparseMatrix,
    diag: Vec<f64>,
}

impl SsorContext<'_> {
    /// z = (D+U)^-1 D (D+L)^-1 r  (symmetric Gauss-Seidel sweep).
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.mat.dim();
        for i in 0..n {
            let (cols, vals) = self.mat.row(i);
            let mut s = r[i];
            for (c, v) in cols.iter().zip(vals) {
                let c = *c as usize;
                if c < i {
                    s -= v * z[c];
                }
            }
            z[i] = s / self.diag[i];
        }
        for i in 0..n {
            z[i] *= self.diag[i];
        }
        for i in (0..n).rev() {
            let (cols, vals) = self.mat.row(i);
            let mut s = z[i];
            for (c, v) in cols.iter().zip(vals) {
                let c = *c as usize;
                if c > i {
                    s -= v * z[c];
                }
            }
            z[i] = s / self.diag[i];
        }
    }
}

/// Preconditioned conjugate gradients for SPD systems.
///
/// Converges to `||r|| <= tol * ||b||`; `x` carries the initial guess in and
/// the solution out. Returns [`Error::Indefinite`] when a direction of
/// non-positive curvature is encountered.
pub fn pcg(
    mat: &SparseMatrix,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
    precond: Preconditioner,
) -> Result<CgOutcome> {
    let n = mat.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        x.fill(0.0);
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let ssor = match precond {
        Preconditioner::Ssor => Some(SsorContext {
            mat,
            diag: mat.diag(),
        }),
        _ => None,
    };
    let jacobi = match precond {
        Preconditioner::Jacobi => Some(mat.diag()),
        _ => None,
    };
    let apply_precond = |r: &[f64], z: &mut [f64]| {
        if let Some(ctx) = &ssor {
            ctx.apply(r, z);
        } else if let Some(d) = &jacobi {
            for i in 0..n {
                z[i] = r[i] / d[i];
            }
        } else {
            z.copy_from_slice(r);
        }
    };

    let mut r = vec![0.0; n];
    mat.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rnorm / bnorm <= tol {
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: rnorm / bnorm,
        });
    }
    let mut z = vec![0.0; n];
    apply_precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        mat.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::Indefinite);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm / bnorm <= tol {
            return Ok(CgOutcome {
                iterations: it,
                relative_residual: rnorm / bnorm,
            });
        }
        apply_precond(&r, &mut z);
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverNonConvergence {
        iters: max_iter,
        residual: rnorm / bnorm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn laplace_1d(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i as u32, i as u32, 2.0));
            if i + 1 < n {
                t.push((i as u32, i as u32 + 1, -1.0));
                t.push((i as u32 + 1, i as u32, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, t, true)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = SparseMatrix::from_triplets(
            2,
            vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0), (0, 1, 0.5), (1, 0, 0.5)],
            true,
        );
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.nnz(), 4);
        assert_eq!(m.asymmetry(), 0.0);
    }

    #[test]
    fn pcg_solves_laplacian_with_all_preconditioners() {
        let n = 200;
        let a = laplace_1d(n);
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        let b = a.matvec_alloc(&xs);
        for pc in [
            Preconditioner::None,
            Preconditioner::Jacobi,
            Preconditioner::Ssor,
        ] {
            let mut x = vec![0.0; n];
            let out = pcg(&a, &b, &mut x, 1e-12, 10_000, pc).unwrap();
            assert!(out.relative_residual <= 1e-12);
            for i in 0..n {
                assert_relative_eq!(x[i], xs[i], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn pcg_detects_indefinite() {
        let m = SparseMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, -1.0)], true);
        let b = vec![0.0, 1.0];
        let mut x = vec![0.0; 2];
        match pcg(&m, &b, &mut x, 1e-10, 100, Preconditioner::None) {
            Err(Error::Indefinite) => {}
            other => panic!("expected Indefinite, got {other:?}"),
        }
    }

    #[test]
    fn warm_start_cuts_iterations() {
        let n = 400;
        let a = laplace_1d(n);
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.05).cos()).collect();
        let b = a.matvec_alloc(&xs);
        let mut cold = vec![0.0; n];
        let it_cold = pcg(&a, &b, &mut cold, 1e-10, 10_000, Preconditioner::Ssor)
            .unwrap()
            .iterations;
        let mut warm = xs.clone();
        for w in warm.iter_mut() {
            *w *= 1.0 + 1e-6;
        }
        let it_warm = pcg(&a, &b, &mut warm, 1e-10, 10_000, Preconditioner::Ssor)
            .unwrap()
            .iterations;
        assert!(it_warm < it_cold);
    }
}
