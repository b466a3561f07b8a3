//! First-order solver for the orthogonality-relaxation SDP
//!
//!   minimize  D•Y
//!   s.t.      Y ⪰ 0,  S(Y) ⪯ I_M,  T(Y) ⪯ I_N,
//!             B_i•Y ≤ 1,  (CᵀC)•Y = 0,
//!
//! by consensus ADMM: one copy of Y per constraint set, each updated by a
//! Frobenius projection, with over-relaxation and residual-balanced penalty
//! adaptation on a doubling schedule so the penalty settles and the plain
//! iteration convergence theory applies between adjustments.
//!
//! The S/T cap projections are closed-form: only eigenvalues of the M×M
//! (resp. N×N) partial trace exceeding 1 are shaved off, spread evenly
//! across the N (resp. M) diagonal blocks of the adjoint.
//!
//! The homogeneous equality (CᵀC)•Y = 0 would leave no strictly feasible
//! point (it forces Y singular), which is exactly where splitting methods
//! stall. Since CᵀC ⪰ 0, the constraint is equivalent to range(Y) ⊆
//! ker(CᵀC), so the cone block projects onto that face of the semidefinite
//! cone instead: compress onto a kernel basis, clamp eigenvalues, embed
//! back. The reduced problem admits interior points again and the equality
//! holds exactly on every candidate.

use super::{s_map, t_map, QuadProblem, MODULE};
use crate::error::{Error, Result};
use crate::matrix_core::{sym_eig, sym_eig_transform, sym_eig_values, Mat, SymMatrix};

const CHECK_EVERY: u64 = 25;
const OVER_RELAXATION: f64 = 1.5;
const BALANCE_FACTOR: f64 = 10.0;

/// Outcome of [`solve_sdp`]: the PSD-projected iterate with its objective
/// value, the combined true-feasibility residual at every check, and whether
/// the tolerance was reached within the iteration budget.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub y_hat: SymMatrix,
    pub theta_hat: f64,
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: u64,
}

enum Block {
    Psd,
    PsdFace { basis: Mat },
    SCap,
    TCap,
    Halfspace { b: Mat, norm_sq: f64 },
}

impl Block {
    fn project(&self, y: &Mat, m: usize, n: usize) -> Result<Mat> {
        match self {
            Block::Psd => eig_clamp_psd(y),
            Block::PsdFace { basis } => proj_psd_face(y, basis),
            Block::SCap => proj_s_cap(y, m, n),
            Block::TCap => proj_t_cap(y, m, n),
            Block::Halfspace { b, norm_sq } => {
                let excess = b.dot(y)? - 1.0;
                if excess <= 0.0 {
                    return Ok(y.clone());
                }
                let mut out = y.clone();
                out.add_scaled(b, -excess / norm_sq)?;
                Ok(out)
            }
        }
    }
}

fn eig_clamp_psd(y: &Mat) -> Result<Mat> {
    let sym = SymMatrix::symmetrize(y)?;
    Ok(sym_eig_transform(&sym, |lam| lam.max(0.0))?.into_mat())
}

/// Projects onto the face {K·X·Kᵀ : X ⪰ 0} of the semidefinite cone, the
/// set of PSD matrices whose range lies in the span of the basis columns.
/// Splitting along that span, the off-face blocks drop and the on-face
/// block clamps, so the projection is compress, clamp, embed.
fn proj_psd_face(y: &Mat, basis: &Mat) -> Result<Mat> {
    let dim = y.rows();
    if basis.cols() == 0 {
        return Ok(Mat::zeros(dim, dim));
    }
    let sym = SymMatrix::symmetrize(y)?.into_mat();
    let compressed = basis.transpose().matmul(&sym)?.matmul(basis)?;
    let clamped = sym_eig_transform(&SymMatrix::symmetrize(&compressed)?, |lam| lam.max(0.0))?;
    Ok(basis.matmul(clamped.mat())?.matmul(&basis.transpose())?)
}

/// Orthonormal basis of the kernel of a PSD Gram matrix, the eigenvectors
/// whose eigenvalues sit at roundoff scale relative to the largest.
fn gram_kernel_basis(gram: &SymMatrix) -> Result<Option<Mat>> {
    let (vals, vecs) = sym_eig(gram)?;
    let dim = gram.dim();
    if vals[0] <= 0.0 {
        return Ok(None);
    }
    let cut = vals[0] * 1e-12;
    let kernel: Vec<usize> = (0..dim).filter(|&k| vals[k] <= cut).collect();
    let mut basis = Mat::zeros(dim, kernel.len());
    for (col, &k) in kernel.iter().enumerate() {
        for i in 0..dim {
            basis.set(i, col, vecs.get(i, k));
        }
    }
    Ok(Some(basis))
}

fn proj_s_cap(y: &Mat, m: usize, n: usize) -> Result<Mat> {
    let w = s_map(&SymMatrix::symmetrize(y)?, m, n)?;
    let (vals, v) = sym_eig(&w)?;
    if vals[0] <= 1.0 {
        return Ok(y.clone());
    }
    let shave = excess_matrix(&vals, &v, m, n as f64);
    let mut out = y.clone();
    for nn in 0..n {
        for i in 0..m {
            for j in 0..m {
                let x = out.get(nn * m + i, nn * m + j) - shave.get(i, j);
                out.set(nn * m + i, nn * m + j, x);
            }
        }
    }
    Ok(out)
}

fn proj_t_cap(y: &Mat, m: usize, n: usize) -> Result<Mat> {
    let w = t_map(&SymMatrix::symmetrize(y)?, m, n)?;
    let (vals, v) = sym_eig(&w)?;
    if vals[0] <= 1.0 {
        return Ok(y.clone());
    }
    let shave = excess_matrix(&vals, &v, n, m as f64);
    let mut out = y.clone();
    for mm in 0..m {
        for n1 in 0..n {
            for n2 in 0..n {
                let x = out.get(n1 * m + mm, n2 * m + mm) - shave.get(n1, n2);
                out.set(n1 * m + mm, n2 * m + mm, x);
            }
        }
    }
    Ok(out)
}

/// V·max((D − I)/copies, 0)·Vᵀ, the multiplier spread across the adjoint's
/// diagonal blocks; subtracting its adjoint image is the exact Frobenius
/// projection onto {partial trace ⪯ I}.
fn excess_matrix(vals: &[f64], v: &Mat, dim: usize, copies: f64) -> Mat {
    let mut shave = Mat::zeros(dim, dim);
    for (k, &lam) in vals.iter().enumerate() {
        let e = (lam - 1.0) / copies;
        if e <= 0.0 {
            continue;
        }
        for i in 0..dim {
            let vik = v.get(i, k) * e;
            for j in 0..dim {
                let x = shave.get(i, j) + vik * v.get(j, k);
                shave.set(i, j, x);
            }
        }
    }
    shave
}

/// Worst violation of the cap, inequality, and equality constraints at a
/// PSD candidate: the largest partial-trace eigenvalue excess over 1, the
/// largest B_i•Y excess over 1, and |G•Y|, combined by max.
fn true_feasibility(y: &SymMatrix, problem: &QuadProblem, gram: &Option<SymMatrix>) -> Result<f64> {
    let m = problem.m();
    let n = problem.n();
    let s_excess = (sym_eig_values(&s_map(y, m, n)?)?[0] - 1.0).max(0.0);
    let t_excess = (sym_eig_values(&t_map(y, m, n)?)?[0] - 1.0).max(0.0);
    let mut b_excess = 0.0f64;
    for b in problem.inequality_terms() {
        b_excess = b_excess.max(b.mat().dot(y.mat())? - 1.0);
    }
    b_excess = b_excess.max(0.0);
    let eq_residual = match gram {
        Some(g) => g.mat().dot(y.mat())?.abs(),
        None => 0.0,
    };
    Ok(s_excess.max(t_excess).max(b_excess).max(eq_residual))
}

/// Solves the relaxation to `tol` on every true-feasibility residual, or
/// runs out of `max_iter` and returns the best PSD candidate with
/// `converged = false` so the caller can decide. The returned `y_hat` is
/// always PSD (eigenvalue-clamped), so downstream rounding preconditions
/// hold even on early exit.
pub fn solve_sdp(problem: &QuadProblem, tol: f64, max_iter: u64) -> Result<SdpSolution> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::new(MODULE, "domain", format!("tolerance must be finite and positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::new(MODULE, "domain", "max_iter must be at least 1"));
    }
    let m = problem.m();
    let n = problem.n();
    let mn = m * n;
    if mn > 64 {
        return Err(Error::new(MODULE, "dim_mismatch", format!("MN = {mn} exceeds the supported desk scale of 64")));
    }
    let objective = problem.objective().mat().clone();
    let gram = problem.equality_gram()?;

    let cone_block = match &gram {
        Some(g) => match gram_kernel_basis(g)? {
            Some(basis) => Block::PsdFace { basis },
            None => Block::Psd,
        },
        None => Block::Psd,
    };
    let mut blocks = vec![cone_block, Block::SCap, Block::TCap];
    for b in problem.inequality_terms() {
        let bm = b.mat().clone();
        let norm_sq = bm.frobenius_norm().powi(2);
        if norm_sq > 0.0 {
            blocks.push(Block::Halfspace { b: bm, norm_sq });
        }
    }
    let num = blocks.len() as f64;

    let mut sigma = objective.frobenius_norm().max(1.0);
    let mut z: Vec<Mat> = (0..blocks.len()).map(|_| Mat::zeros(mn, mn)).collect();
    let mut u: Vec<Mat> = (0..blocks.len()).map(|_| Mat::zeros(mn, mn)).collect();
    let mut history = Vec::new();
    let mut last_candidate: Option<(SymMatrix, f64)> = None;

    let mut iterations = 0;
    let mut next_adapt = 2 * CHECK_EVERY;
    while iterations < max_iter {
        iterations += 1;

        let mut acc = Mat::zeros(mn, mn);
        for (zj, uj) in z.iter().zip(u.iter()) {
            acc.add_scaled(zj, 1.0)?;
            acc.add_scaled(uj, -1.0)?;
        }
        acc.scale(1.0 / num);
        acc.add_scaled(&objective, -1.0 / (num * sigma))?;
        let y = acc;

        let mut primal_sq = 0.0;
        let mut dual_sq = 0.0;
        let mut z_norm_sq = 0.0;
        let mut u_norm_sq = 0.0;
        for (j, block) in blocks.iter().enumerate() {
            let mut relaxed = y.clone();
            relaxed.scale(OVER_RELAXATION);
            relaxed.add_scaled(&z[j], 1.0 - OVER_RELAXATION)?;
            let mut arg = relaxed.clone();
            arg.add_scaled(&u[j], 1.0)?;
            let z_new = block.project(&arg, m, n)?;
            u[j].add_scaled(&relaxed, 1.0)?;
            u[j].add_scaled(&z_new, -1.0)?;
            let mut dz = z_new.clone();
            dz.add_scaled(&z[j], -1.0)?;
            dual_sq += (sigma * dz.frobenius_norm()).powi(2);
            let mut py = y.clone();
            py.add_scaled(&z_new, -1.0)?;
            primal_sq += py.frobenius_norm().powi(2);
            z_norm_sq += z_new.frobenius_norm().powi(2);
            u_norm_sq += u[j].frobenius_norm().powi(2);
            z[j] = z_new;
        }

        if iterations % CHECK_EVERY == 0 || iterations == max_iter {
            let candidate = SymMatrix::symmetrize(&blocks[0].project(&y, m, n)?)?;
            let feas = true_feasibility(&candidate, problem, &gram)?;
            history.push(feas);
            let theta = objective.dot(candidate.mat())?;
            last_candidate = Some((candidate, theta));
            let primal = primal_sq.sqrt();
            let dual = dual_sq.sqrt();
            let consensus_scale = y.frobenius_norm().max(1.0);
            if feas <= tol && primal <= tol * consensus_scale && dual <= tol * consensus_scale {
                let (y_hat, theta_hat) = last_candidate.unwrap();
                return Ok(SdpSolution { y_hat, theta_hat, residuals: history, converged: true, iterations });
            }
            if iterations >= next_adapt {
                next_adapt *= 2;
                let primal_scale = (y.frobenius_norm() * num.sqrt()).max(z_norm_sq.sqrt()).max(1e-12);
                let dual_scale = (sigma * u_norm_sq.sqrt()).max(objective.frobenius_norm()).max(1e-12);
                let primal_rel = primal / primal_scale;
                let dual_rel = dual / dual_scale;
                if primal_rel > 0.0 && dual_rel > 0.0 {
                    let factor = (primal_rel / dual_rel).sqrt().clamp(1.0 / BALANCE_FACTOR, BALANCE_FACTOR);
                    if !(0.5..=2.0).contains(&factor) {
                        sigma *= factor;
                        for uj in u.iter_mut() {
                            uj.scale(1.0 / factor);
                        }
                    }
                }
            }
        }
    }

    let (y_hat, theta_hat) = last_candidate.expect("a candidate is always computed at the final iteration");
    Ok(SdpSolution { y_hat, theta_hat, residuals: history, converged: false, iterations })
}
