//! Optimization applications of the series tail bounds: spectral-norm
//! threshold parameters, chance-constraint approximation through a Schur
//! LMI, an SDP relaxation of orthogonality-constrained quadratic problems,
//! and the randomized rounding that maps SDP solutions back to matrices.

mod rounding;
mod sdp;

pub use rounding::{build_rounding, feasibility_bounds, rounding_from_draws, sample_rounding, FeasibilityBounds, RoundingPlan};
pub use sdp::{solve_sdp, SdpSolution};

use crate::error::{Error, Result};
use crate::levy_core::IdModel;
use crate::matrix_core::{lambda_max, sym_eig_transform, sym_eig_values, Mat, SymMatrix};
use crate::scalar_bounds::{tau, BETA0};

const MODULE: &str = "opt_apps";

fn require_unit_variance(model: &IdModel) -> Result<()> {
    let v = model.variance();
    if (v - 1.0).abs() > 1e-8 {
        return Err(Error::new(MODULE, "not_normalized", format!("model variance is {v}, expected 1 (normalize the model first)")));
    }
    Ok(())
}

/// Threshold parameters for the spectral-norm guarantee
/// P{‖Σ ξ_k A_k‖ > t*} ≤ (M+N)^{−α} over rectangular M×N coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NemirovskiParams {
    pub c_alpha: f64,
    pub tau_alpha: f64,
    pub t_star: f64,
    pub condition_ok: bool,
}

/// Computes c_α = (1+α)ln(M+N)/√β₀ · max{1,√R} · max{1,√(ρ₁(σ²+V)/R)},
/// τ_α = τ(β₀, c_α), and the threshold
/// t* = [(1+α)(ρ₁(σ²+V))^{τ_α−1}ln(M+N)/(β₀R^{τ_α−2})]^{1/τ_α}.
/// The (M+N)^{−α} guarantee needs t* > (σ²+V)/R, reported as `condition_ok`.
pub fn nemirovski_params(alpha: f64, m: usize, n: usize, rho1: f64, model: &IdModel) -> Result<NemirovskiParams> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::new(MODULE, "domain", format!("alpha must be finite and positive, got {alpha}")));
    }
    if m == 0 || n == 0 {
        return Err(Error::new(MODULE, "domain", "dimensions must be positive"));
    }
    if !(rho1 > 0.0) || !rho1.is_finite() {
        return Err(Error::new(MODULE, "domain", format!("rho1 must be finite and positive, got {rho1}")));
    }
    require_unit_variance(model)?;
    let r = model.support_radius();
    if r == 0.0 {
        return Err(Error::new(MODULE, "domain", "the threshold formulas divide by R; the model needs an atom"));
    }
    let v = model.variance();
    let log_mn = ((m + n) as f64).ln();
    let c_alpha = (1.0 + alpha) * log_mn / BETA0.sqrt() * r.sqrt().max(1.0) * (rho1 * v / r).sqrt().max(1.0);
    let tau_alpha = tau(BETA0, c_alpha)?;
    let x = rho1 * v;
    let t_star = ((1.0 + alpha) * x.powf(tau_alpha - 1.0) * log_mn / (BETA0 * r.powf(tau_alpha - 2.0))).powf(1.0 / tau_alpha);
    Ok(NemirovskiParams { c_alpha, tau_alpha, t_star, condition_ok: t_star > v / r })
}

/// Output of [`chance_gamma`]: the LMI scale γ₂(ε) with its exponent τ_c and
/// the checked applicability precondition 2M·exp(−c²β₀ρ₂(σ²+V)/R²) ≤ ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChanceGamma {
    pub gamma2: f64,
    pub tau_c: f64,
    pub precondition_value: f64,
    pub precondition_ok: bool,
}

/// γ₂(ε) = (β₀R^{τ_c−2}/([ρ₂(σ²+V)]^{τ_c−1}·ln(2M/ε)))^{1/τ_c}: enforcing
/// Σ(𝒜'_k)² ⪯ γ₂²I makes the random LMI hold with probability ≥ 1−ε.
pub fn chance_gamma(epsilon: f64, m: usize, rho2: f64, model: &IdModel, c: f64) -> Result<ChanceGamma> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::new(MODULE, "domain", format!("epsilon must lie in (0, 1/2], got {epsilon}")));
    }
    if m == 0 {
        return Err(Error::new(MODULE, "domain", "dimension must be positive"));
    }
    if !(rho2 > 0.0) || !rho2.is_finite() {
        return Err(Error::new(MODULE, "domain", format!("rho2 must be finite and positive, got {rho2}")));
    }
    if !(c > 1.0) || !c.is_finite() {
        return Err(Error::new(MODULE, "domain", format!("the partition endpoint needs c > 1, got {c}")));
    }
    let r = model.support_radius();
    if r == 0.0 {
        return Err(Error::new(MODULE, "domain", "gamma2 divides by R; the model needs an atom"));
    }
    let v = model.variance();
    let tau_c = tau(BETA0, c)?;
    let x = rho2 * v;
    let gamma2 = (BETA0 * r.powf(tau_c - 2.0) / (x.powf(tau_c - 1.0) * (2.0 * m as f64 / epsilon).ln())).powf(1.0 / tau_c);
    let precondition_value = 2.0 * m as f64 * (-c * c * BETA0 * x / (r * r)).exp();
    Ok(ChanceGamma { gamma2, tau_c, precondition_value, precondition_ok: precondition_value <= epsilon })
}

/// A chance-constrained LMI instance evaluated at a fixed decision point:
/// the positive definite base 𝒜₀(x) and the random-coefficient terms
/// 𝒜_1(x)..𝒜_K(x), all M×M symmetric.
#[derive(Debug, Clone)]
pub struct ChanceProblem {
    base: SymMatrix,
    terms: Vec<SymMatrix>,
    m: usize,
}

impl ChanceProblem {
    pub fn new(base: SymMatrix, terms: Vec<SymMatrix>) -> Result<Self> {
        let m = base.dim();
        let vals = sym_eig_values(&base)?;
        let lam_min = vals[vals.len() - 1];
        if lam_min <= 1e-10 {
            return Err(Error::new(MODULE, "not_positive_definite", format!("base matrix has smallest eigenvalue {lam_min}")));
        }
        for (k, term) in terms.iter().enumerate() {
            if term.dim() != m {
                return Err(Error::new(MODULE, "dim_mismatch", format!("term {k} has dimension {} but the base is {m}x{m}", term.dim())));
            }
        }
        Ok(ChanceProblem { base, terms, m })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn base(&self) -> &SymMatrix {
        &self.base
    }

    pub fn terms(&self) -> &[SymMatrix] {
        &self.terms
    }

    /// 𝒜'_k = 𝒜₀^{−1/2} 𝒜_k 𝒜₀^{−1/2}.
    pub fn normalized_terms(&self) -> Result<Vec<SymMatrix>> {
        let inv_root = sym_eig_transform(&self.base, |lam| 1.0 / lam.sqrt())?;
        self.terms
            .iter()
            .map(|term| {
                let prod = inv_root.mat().matmul(term.mat())?.matmul(inv_root.mat())?;
                SymMatrix::symmetrize(&prod)
            })
            .collect()
    }

    /// ρ₂ = λ_max(Σ_k (𝒜'_k)²), the curvature entering γ₂(ε).
    pub fn rho2(&self) -> Result<f64> {
        let normalized = self.normalized_terms()?;
        if normalized.is_empty() {
            return Err(Error::new(MODULE, "empty_series", "a chance problem needs at least one random term"));
        }
        let mut sum = Mat::zeros(self.m, self.m);
        for a in &normalized {
            sum.add_scaled(&a.mat().matmul(a.mat())?, 1.0)?;
        }
        lambda_max(&SymMatrix::symmetrize(&sum)?)
    }
}

/// The Schur-complement arrow matrix certifying Σ(𝒜'_k)² ⪯ γ²I: block
/// diagonal γ𝒜₀ repeated K+1 times, with 𝒜_k in the first block row and
/// column. Positive semidefiniteness of this (K+1)M matrix is equivalent to
/// the squared-sum cap.
pub fn assemble_lmi(gamma: f64, problem: &ChanceProblem) -> Result<SymMatrix> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::new(MODULE, "domain", format!("gamma must be finite and positive, got {gamma}")));
    }
    let m = problem.m;
    let blocks = problem.terms.len() + 1;
    let dim = blocks * m;
    let mut out = Mat::zeros(dim, dim);
    for blk in 0..blocks {
        let off = blk * m;
        for i in 0..m {
            for j in 0..m {
                out.set(off + i, off + j, gamma * problem.base.get(i, j));
            }
        }
    }
    for (k, term) in problem.terms.iter().enumerate() {
        let off = (k + 1) * m;
        for i in 0..m {
            for j in 0..m {
                out.set(i, off + j, term.get(i, j));
                out.set(off + j, i, term.get(i, j));
            }
        }
    }
    SymMatrix::new(out)
}

fn check_vec_dim(y: &SymMatrix, m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 || y.dim() != m * n {
        return Err(Error::new(MODULE, "dim_mismatch", format!("matrix of dimension {} does not match M*N = {}*{}", y.dim(), m, n)));
    }
    Ok(())
}

/// Partial trace S(Y)_{m,m'} = Σ_n Y_{nM+m, nM+m'} over the column-major
/// vec convention; S((vecX)(vecX)ᵀ) = XXᵀ.
pub fn s_map(y: &SymMatrix, m: usize, n: usize) -> Result<SymMatrix> {
    check_vec_dim(y, m, n)?;
    let mut out = Mat::zeros(m, m);
    for row in 0..m {
        for col in 0..m {
            let mut acc = 0.0;
            for nn in 0..n {
                acc += y.get(nn * m + row, nn * m + col);
            }
            out.set(row, col, acc);
        }
    }
    SymMatrix::new(out)
}

/// Partial trace T(Y)_{n,n'} = Σ_m Y_{nM+m, n'M+m}; T((vecX)(vecX)ᵀ) = XᵀX.
pub fn t_map(y: &SymMatrix, m: usize, n: usize) -> Result<SymMatrix> {
    check_vec_dim(y, m, n)?;
    let mut out = Mat::zeros(n, n);
    for row in 0..n {
        for col in 0..n {
            let mut acc = 0.0;
            for mm in 0..m {
                acc += y.get(row * m + mm, col * m + mm);
            }
            out.set(row, col, acc);
        }
    }
    SymMatrix::new(out)
}

/// A quadratic optimization instance over M×N matrices X with XXᵀ ⪯ I_M,
/// XᵀX ⪯ I_N, quadratic caps vecXᵀB_i vecX ≤ 1, and linear equalities
/// C·vecX = 0, relaxed over PSD matrices Y standing in for (vecX)(vecX)ᵀ.
#[derive(Debug, Clone)]
pub struct QuadProblem {
    m: usize,
    n: usize,
    objective: SymMatrix,
    inequality_terms: Vec<SymMatrix>,
    equality_map: Option<Mat>,
}

impl QuadProblem {
    pub fn new(m: usize, n: usize, objective: SymMatrix, inequality_terms: Vec<SymMatrix>, equality_map: Option<Mat>) -> Result<Self> {
        check_vec_dim(&objective, m, n)?;
        let mn = m * n;
        for (i, b) in inequality_terms.iter().enumerate() {
            if b.dim() != mn {
                return Err(Error::new(MODULE, "dim_mismatch", format!("inequality term {i} has dimension {}, expected {mn}", b.dim())));
            }
            let vals = sym_eig_values(b)?;
            let lam_min = vals[vals.len() - 1];
            if lam_min < -1e-8 * vals[0].abs().max(1.0) {
                return Err(Error::new(MODULE, "not_psd", format!("inequality term {i} has eigenvalue {lam_min}")));
            }
        }
        if let Some(c) = &equality_map {
            if c.cols() != mn {
                return Err(Error::new(MODULE, "dim_mismatch", format!("equality map has {} columns, expected {mn}", c.cols())));
            }
        }
        Ok(QuadProblem { m, n, objective, inequality_terms, equality_map })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn objective(&self) -> &SymMatrix {
        &self.objective
    }

    pub fn inequality_terms(&self) -> &[SymMatrix] {
        &self.inequality_terms
    }

    pub fn equality_map(&self) -> Option<&Mat> {
        self.equality_map.as_ref()
    }

    /// G = CᵀC, the Gram matrix of the equality map; C·vecX = 0 for all
    /// columns of a PSD Y iff G•Y = 0.
    pub fn equality_gram(&self) -> Result<Option<SymMatrix>> {
        match &self.equality_map {
            None => Ok(None),
            Some(c) => {
                let g = c.transpose().matmul(c)?;
                Ok(Some(SymMatrix::symmetrize(&g)?))
            }
        }
    }
}
