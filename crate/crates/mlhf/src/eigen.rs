//! Generalized symmetric eigensolvers.
//!
//! [`solve_sparse_lowest`] is a block LOBPCG iteration working through an
//! operator-apply abstraction, so the exchange part of a Fock operator can
//! stay matrix-free. [`solve_dense_generalized`] reduces the small
//! correction-space problem to a standard symmetric problem via Cholesky.

use crate::sparse::{pcg, Preconditioner, SparseMatrix};
use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Symmetric linear operator given by its action.
pub trait SymOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn apply_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }
}

impl SymOp for SparseMatrix {
    fn dim(&self) -> usize {
        self.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
}

impl SymOp for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.nrows() {
            let mut s = 0.0;
            for c in 0..self.ncols() {
                s += self[(r, c)] * x[c];
            }
            y[r] = s;
        }
    }
}

/// Result of an eigensolve: ascending eigenvalues with B-orthonormal vectors.
#[derive(Debug, Clone)]
pub struct EigResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub residual_norms: Vec<f64>,
    pub iterations: usize,
}

/// Preconditioner for the LOBPCG iteration.
#[derive(Clone, Copy)]
pub enum EigPrecond<'a> {
    None,
    /// Diagonal scaling by the given matrix's diagonal.
    Jacobi(&'a SparseMatrix),
    /// A fixed number of SSOR-PCG iterations on an SPD proxy operator.
    InnerCg {
        mat: &'a SparseMatrix,
        iters: usize,
    },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// B-orthonormalize `cols` in place by modified Gram-Schmidt with
/// reorthogonalization; drops vectors that become numerically dependent.
/// Returns the matching B*cols.
fn b_orthonormalize(cols: &mut Vec<Vec<f64>>, b: &dyn SymOp) -> Vec<Vec<f64>> {
    let mut bcols: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for v in cols.drain(..) {
        let mut v = v;
        let mut bv = b.apply_alloc(&v);
        let orig = dot(&v, &bv).abs().sqrt();
        for _pass in 0..2 {
            for (u, bu) in kept.iter().zip(&bcols) {
                let c = dot(&v, bu);
                for i in 0..v.len() {
                    v[i] -= c * u[i];
                }
                let _ = c;
            }
            bv = b.apply_alloc(&v);
        }
        let nrm2 = dot(&v, &bv);
        if nrm2 <= 0.0 || nrm2.sqrt() < 1e-10 * orig.max(1e-300) || !nrm2.is_finite() {
            continue;
        }
        let s = 1.0 / nrm2.sqrt();
        for x in v.iter_mut() {
            *x *= s;
        }
        for x in bv.iter_mut() {
            *x *= s;
        }
        kept.push(v);
        bcols.push(bv);
    }
    *cols = kept;
    bcols
}

/// Lowest `n_pairs` eigenpairs of `A x = lambda B x` by block LOBPCG.
///
/// `x0` supplies warm-start vectors (columns). Convergence criterion per
/// pair: `||A x - lambda B x|| <= tol * ||A x||`.
pub fn solve_sparse_lowest(
    a: &dyn SymOp,
    b: &dyn SymOp,
    n_pairs: usize,
    tol: f64,
    x0: Option<&[Vec<f64>]>,
    precond: EigPrecond<'_>,
    max_iter: usize,
    seed: u64,
) -> Result<EigResult> {
    let n = a.dim();
    if n_pairs > n {
        return Err(Error::Dimension(format!(
            "requested {n_pairs} pairs of a dimension-{n} problem"
        )));
    }
    // Work with a slightly larger block; clusters at the cut index stall
    // convergence of exactly-m blocks.
    let m = (n_pairs + 2).min(n);
    let mut x: Vec<Vec<f64>> = {
        let mut v: Vec<Vec<f64>> = match x0 {
            Some(cols) if !cols.is_empty() => cols.iter().take(m).cloned().collect(),
            _ => Vec::new(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while v.len() < m {
            v.push((0..n).map(|_| rng.random::<f64>() - 0.5).collect());
        }
        v
    };
    b_orthonormalize(&mut x, b);
    if x.len() < m {
        // Degenerate start; replenish with random directions.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        while x.len() < m {
            x.push((0..n).map(|_| rng.random::<f64>() - 0.5).collect());
        }
        b_orthonormalize(&mut x, b);
    }

    let apply_precond = |r: &[f64]| -> Vec<f64> {
        match precond {
            EigPrecond::None => r.to_vec(),
            EigPrecond::Jacobi(mat) => {
                let d = mat.diag();
                r.iter()
                    .zip(&d)
                    .map(|(v, di)| if di.abs() > 0.0 { v / di } else { *v })
                    .collect()
            }
            EigPrecond::InnerCg { mat, iters } => {
                let mut z = vec![0.0; r.len()];
                // Fixed-iteration smoothing solve; non-convergence is fine.
                let _ = pcg(mat, r, &mut z, 1e-14, iters, Preconditioner::Ssor);
                z
            }
        }
    };

    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut lambdas = vec![0.0; m];
    let mut residuals = vec![f64::INFINITY; m];
    let mut iterations = 0;
    let mut prev_max_resid = f64::INFINITY;

    for it in 0..max_iter {
        iterations = it;
        // Rayleigh-Ritz in the current block (X is B-orthonormal).
        let ax: Vec<Vec<f64>> = x.iter().map(|v| a.apply_alloc(v)).collect();
        let k = x.len();
        let mut ga = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                ga[(i, j)] = dot(&x[i], &ax[j]);
            }
        }
        ga = (ga.clone() + ga.transpose()) * 0.5;
        let eig = SymmetricEigen::new(ga);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let rotate = |cols: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            order
                .iter()
                .take(m)
                .map(|&oi| {
                    let mut out = vec![0.0; n];
                    for (c, col) in cols.iter().enumerate() {
                        let w = eig.eigenvectors[(c, oi)];
                        for i in 0..n {
                            out[i] += w * col[i];
                        }
                    }
                    out
                })
                .collect()
        };
        let xr = rotate(&x);
        let axr = rotate(&ax);
        x = xr;
        for (i, &oi) in order.iter().take(m).enumerate() {
            lambdas[i] = eig.eigenvalues[oi];
        }

        let bx: Vec<Vec<f64>> = x.iter().map(|v| b.apply_alloc(v)).collect();
        let mut r: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut all_converged = true;
        for i in 0..x.len().min(m) {
            let mut ri = vec![0.0; n];
            for j in 0..n {
                ri[j] = axr[i][j] - lambdas[i] * bx[i][j];
            }
            let an = norm(&axr[i]).max(1e-300);
            residuals[i] = norm(&ri) / an;
            if i < n_pairs && residuals[i] > tol {
                all_converged = false;
            }
            r.push(ri);
        }
        if all_converged {
            x.truncate(n_pairs);
            lambdas.truncate(n_pairs);
            residuals.truncate(n_pairs);
            return Ok(EigResult {
                eigenvalues: lambdas,
                eigenvectors: x,
                residual_norms: residuals,
                iterations: it,
            });
        }
        let max_resid = residuals.iter().cloned().fold(0.0, f64::max);
        if max_resid > prev_max_resid {
            // Stalled: restart the search directions.
            p.clear();
        }
        prev_max_resid = max_resid;

        // Expand the subspace with preconditioned residuals and the
        // previous search directions.
        let w: Vec<Vec<f64>> = r.iter().map(|ri| apply_precond(ri)).collect();
        let mut s: Vec<Vec<f64>> = Vec::with_capacity(3 * m);
        s.extend(x.iter().cloned());
        s.extend(w);
        s.extend(p.iter().cloned());
        let bs = b_orthonormalize(&mut s, b);
        let k = s.len();
        let as_: Vec<Vec<f64>> = s.iter().map(|v| a.apply_alloc(v)).collect();
        let mut ga = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                ga[(i, j)] = dot(&s[i], &as_[j]);
            }
        }
        ga = (ga.clone() + ga.transpose()) * 0.5;
        let eig = SymmetricEigen::new(ga);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let mut x_new = Vec::with_capacity(m);
        let mut p_new = Vec::with_capacity(m);
        for &oi in order.iter().take(m) {
            let mut xn = vec![0.0; n];
            let mut pn = vec![0.0; n];
            for (c, col) in s.iter().enumerate() {
                let wgt = eig.eigenvectors[(c, oi)];
                for i in 0..n {
                    xn[i] += wgt * col[i];
                }
                if c >= m {
                    for i in 0..n {
                        pn[i] += wgt * col[i];
                    }
                }
            }
            x_new.push(xn);
            p_new.push(pn);
        }
        let _ = bs;
        x = x_new;
        b_orthonormalize(&mut x, b);
        p = p_new;
    }

    Err(Error::EigenNonConvergence { iters: iterations })
}

/// Full spectrum of the dense generalized symmetric problem `A x = lambda B x`.
pub fn solve_dense_generalized(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<EigResult> {
    if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "dense generalized problem needs square matrices of equal size, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let n = a.nrows();
    let chol = b.clone().cholesky().ok_or(Error::NotSpd)?;
    let l = chol.l();
    // C = L^-1 A L^-T, symmetric.
    let mut c = a.clone();
    // Solve L * Y = A  (column-wise forward substitution).
    let y = l
        .solve_lower_triangular(&c)
        .ok_or(Error::NotSpd)?;
    // C = (L^-1 (L^-1 A)^T)^T = L^-1 A L^-T for symmetric A.
    let yt = y.transpose();
    let z = l.solve_lower_triangular(&yt).ok_or(Error::NotSpd)?;
    c = (z.clone() + z.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    let mut residual_norms = Vec::with_capacity(n);
    for &oi in &order {
        let q = eig.eigenvectors.column(oi).into_owned();
        let xv = lt
            .solve_upper_triangular(&q)
            .ok_or(Error::NotSpd)?;
        let lam = eig.eigenvalues[oi];
        let r = a * &xv - b * &xv * lam;
        let an = (a * &xv).norm().max(1e-300);
        eigenvalues.push(lam);
        residual_norms.push(r.norm() / an);
        eigenvectors.push(xv.as_slice().to_vec());
    }
    Ok(EigResult {
        eigenvalues,
        eigenvectors,
        residual_norms,
        iterations: 0,
    })
}
