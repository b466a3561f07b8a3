//! Randomized rounding of an SDP solution Ŷ back to an M×N matrix:
//! vec X̂ = Ŷ^{1/2}Uᵀξ with i.i.d. unit-variance i.d. draws ξ, so that
//! E[(vec X̂)(vec X̂)ᵀ] = Ŷ and the objective decouples across the ξ_i².
//!
//! U diagonalizes Ŷ^{1/2}·D·Ŷ^{1/2}; the columns of P = Ŷ^{1/2}Uᵀ unvec to
//! the coefficient matrices Q_i of the series X̂ = Σ ξ_i Q_i, whose
//! curvatures ρ₃ and ρ₄^{(i)} feed the high-probability feasibility bounds.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{require_unit_variance, QuadProblem, MODULE};
use crate::error::{Error, Result};
use crate::levy_core::{sampler, IdModel};
use crate::matrix_core::{lambda_max, sym_eig, sym_eig_transform, sym_eig_values, Mat, SymMatrix};
use crate::scalar_bounds::{tau, BETA0};

/// Everything the rounding stage derives from one SDP solution.
#[derive(Debug, Clone)]
pub struct RoundingPlan {
    y_hat: SymMatrix,
    theta_hat: f64,
    y_sqrt: SymMatrix,
    u: Mat,
    q_list: Vec<Mat>,
    rho3: f64,
    rho4: Vec<f64>,
    m: usize,
    n: usize,
}

impl RoundingPlan {
    pub fn y_hat(&self) -> &SymMatrix {
        &self.y_hat
    }

    pub fn theta_hat(&self) -> f64 {
        self.theta_hat
    }

    pub fn y_sqrt(&self) -> &SymMatrix {
        &self.y_sqrt
    }

    /// The orthogonal factor with vec X̂ = Ŷ^{1/2}Uᵀξ.
    pub fn u(&self) -> &Mat {
        &self.u
    }

    pub fn q_list(&self) -> &[Mat] {
        &self.q_list
    }

    /// ρ₃ = max{λ_max(Σ Q_jQ_jᵀ), λ_max(Σ Q_jᵀQ_j)}.
    pub fn rho3(&self) -> f64 {
        self.rho3
    }

    /// ρ₄^{(i)} per quadratic cap, the dilation-square curvature of the
    /// columns of (B'_i)^{1/2}: max{λ_max(B'_i), tr B'_i}.
    pub fn rho4(&self) -> &[f64] {
        &self.rho4
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Builds the rounding plan from a PSD Ŷ (eigenvalues ≥ −10⁻¹⁰; small
/// negatives are clamped to zero before the square root).
pub fn build_rounding(y_hat: &SymMatrix, problem: &QuadProblem) -> Result<RoundingPlan> {
    let m = problem.m();
    let n = problem.n();
    let mn = m * n;
    if y_hat.dim() != mn {
        return Err(Error::new(MODULE, "dim_mismatch", format!("Y has dimension {}, expected MN = {mn}", y_hat.dim())));
    }
    let vals = sym_eig_values(y_hat)?;
    let lam_min = vals[vals.len() - 1];
    if lam_min < -1e-10 {
        return Err(Error::new(MODULE, "not_psd", format!("Y has eigenvalue {lam_min}, beyond the clamping tolerance")));
    }
    let floor = 1e-14 * vals[0].max(0.0);
    let y_sqrt = sym_eig_transform(y_hat, |lam| if lam <= floor { 0.0 } else { lam.sqrt() })?;
    let w_raw = y_sqrt.mat().matmul(problem.objective().mat())?.matmul(y_sqrt.mat())?;
    let w = SymMatrix::symmetrize(&w_raw)?;
    let (_, v_w) = sym_eig(&w)?;
    let u = v_w.transpose();
    let p = y_sqrt.mat().matmul(&v_w)?;

    let mut q_list = Vec::with_capacity(mn);
    for i in 0..mn {
        let col: Vec<f64> = (0..mn).map(|row| p.get(row, i)).collect();
        q_list.push(Mat::unvec_columns(m, n, &col)?);
    }

    let mut gram_left = Mat::zeros(m, m);
    let mut gram_right = Mat::zeros(n, n);
    for q in &q_list {
        let qt = q.transpose();
        gram_left.add_scaled(&q.matmul(&qt)?, 1.0)?;
        gram_right.add_scaled(&qt.matmul(q)?, 1.0)?;
    }
    let rho3 = lambda_max(&SymMatrix::symmetrize(&gram_left)?)?
        .max(lambda_max(&SymMatrix::symmetrize(&gram_right)?)?)
        .max(0.0);

    let mut rho4 = Vec::with_capacity(problem.inequality_terms().len());
    for b in problem.inequality_terms() {
        let b_prime_raw = p.transpose().matmul(b.mat())?.matmul(&p)?;
        let b_prime = SymMatrix::symmetrize(&b_prime_raw)?;
        let lam = sym_eig_values(&b_prime)?[0].max(0.0);
        let trace: f64 = (0..mn).map(|i| b_prime.get(i, i)).sum();
        rho4.push(lam.max(trace.max(0.0)));
    }

    let theta_hat = problem.objective().mat().dot(y_hat.mat())?;
    Ok(RoundingPlan { y_hat: y_hat.clone(), theta_hat, y_sqrt, u, q_list, rho3, rho4, m, n })
}

/// X̂ = Σ_i ξ_i Q_i with MN fresh draws from a zero-mean unit-variance
/// model; deterministic per seed.
pub fn sample_rounding(plan: &RoundingPlan, model: &IdModel, seed: u64) -> Result<Mat> {
    require_unit_variance(model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = sampler(model)?;
    let xs: Vec<f64> = (0..plan.q_list.len()).map(|_| draw(&mut rng)).collect();
    rounding_from_draws(plan, &xs)
}

/// The deterministic half of [`sample_rounding`] with the draws supplied
/// explicitly; test hook for degenerate coefficient vectors.
pub fn rounding_from_draws(plan: &RoundingPlan, xs: &[f64]) -> Result<Mat> {
    if xs.len() != plan.q_list.len() {
        return Err(Error::new(MODULE, "dim_mismatch", format!("{} draws for {} coefficient matrices", xs.len(), plan.q_list.len())));
    }
    let mut x_hat = Mat::zeros(plan.m, plan.n);
    for (xi, q) in xs.iter().zip(plan.q_list.iter()) {
        x_hat.add_scaled(q, *xi)?;
    }
    Ok(x_hat)
}

/// High-probability feasibility levels for the rounded iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityBounds {
    pub norm_bound: f64,
    pub quad_bounds: Vec<f64>,
    pub scale: f64,
    pub c2: f64,
    pub tau2: f64,
}

/// With probability at least 1/2 the draw satisfies ‖X̂‖ ≤ norm_bound and
/// X̂•B_iX̂ ≤ quad_bounds[i] jointly:
/// norm_bound = [3(ρ₃(σ²+V))^{τ₂−1}ln(M+N)/(β₀R^{τ₂−2})]^{1/τ₂} with
/// τ₂ = τ(β₀, c₂) at the α = 2 threshold scale c₂; each quad bound is the
/// same expression at ρ₄^{(i)} raised to the power 2/τ₂. `scale` is the
/// curvature normalizer max(ρ₃, max_i ρ₄^{(i)}) used to rescale X̂ into the
/// unit feasible region.
pub fn feasibility_bounds(plan: &RoundingPlan, model: &IdModel) -> Result<FeasibilityBounds> {
    require_unit_variance(model)?;
    let r = model.support_radius();
    if r == 0.0 {
        return Err(Error::new(MODULE, "domain", "the feasibility bounds divide by R; the model needs an atom"));
    }
    let v = model.variance();
    let log_mn = ((plan.m + plan.n) as f64).ln();
    let c2 = 3.0 * log_mn / BETA0.sqrt() * r.sqrt().max(1.0) * (plan.rho3 * v / r).sqrt().max(1.0);
    let tau2 = tau(BETA0, c2)?;
    let level = |rho: f64| 3.0 * (rho * v).powf(tau2 - 1.0) * log_mn / (BETA0 * r.powf(tau2 - 2.0));
    let norm_bound = level(plan.rho3).powf(1.0 / tau2);
    let quad_bounds: Vec<f64> = plan.rho4.iter().map(|&rho| level(rho).powf(2.0 / tau2)).collect();
    let scale = plan.rho4.iter().fold(plan.rho3, |acc, &x| acc.max(x));
    Ok(FeasibilityBounds { norm_bound, quad_bounds, scale, c2, tau2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_core::LevyMeasure;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn unit_poisson() -> IdModel {
        IdModel::new(0.0, LevyMeasure::new(vec![(1.0, 1.0)]).unwrap()).unwrap()
    }

    fn plain_problem(m: usize, n: usize, terms: Vec<SymMatrix>) -> QuadProblem {
        QuadProblem::new(m, n, SymMatrix::identity(m * n), terms, None).unwrap()
    }

    fn random_psd(dim: usize, state: &mut u64) -> SymMatrix {
        let mut next = || {
            *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (*state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = Mat::from_rows(dim, dim, (0..dim * dim).map(|_| next()).collect()).unwrap();
        SymMatrix::symmetrize(&a.transpose().matmul(&a).unwrap()).unwrap()
    }

    #[test]
    fn rounding_identity_reconstructs_y() {
        let mut state = 0x5150u64;
        let y = random_psd(6, &mut state);
        let problem = plain_problem(2, 3, vec![]);
        let plan = build_rounding(&y, &problem).unwrap();
        let mn = 6;
        let mut recon = Mat::zeros(mn, mn);
        for q in plan.q_list() {
            let v = q.vec_columns();
            for i in 0..mn {
                for j in 0..mn {
                    recon.set(i, j, recon.get(i, j) + v[i] * v[j]);
                }
            }
        }
        for i in 0..mn {
            for j in 0..mn {
                assert!(close(recon.get(i, j), y.get(i, j), 1e-8), "({i},{j}): {} vs {}", recon.get(i, j), y.get(i, j));
            }
        }
        let ut_u = plan.u().transpose().matmul(plan.u()).unwrap();
        for i in 0..mn {
            for j in 0..mn {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(close(ut_u.get(i, j), expected, 1e-9));
            }
        }
    }

    #[test]
    fn identity_y_gives_max_dim_rho3() {
        let problem = plain_problem(2, 3, vec![]);
        let plan = build_rounding(&SymMatrix::identity(6), &problem).unwrap();
        assert!(close(plan.rho3(), 3.0, 1e-10), "{}", plan.rho3());
        let square = plain_problem(2, 2, vec![]);
        let plan = build_rounding(&SymMatrix::identity(4), &square).unwrap();
        assert!(close(plan.rho3(), 2.0, 1e-10));
    }

    #[test]
    fn rank_one_y_leaves_one_coefficient() {
        let v = [0.6, -0.2, 0.4, 0.7];
        let mut raw = Mat::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                raw.set(i, j, v[i] * v[j]);
            }
        }
        let y = SymMatrix::new(raw).unwrap();
        let problem = plain_problem(2, 2, vec![]);
        let plan = build_rounding(&y, &problem).unwrap();
        let nonzero: Vec<&Mat> = plan.q_list().iter().filter(|q| q.max_abs() > 1e-9).collect();
        assert_eq!(nonzero.len(), 1);
        let q = nonzero[0];
        let qv = q.vec_columns();
        let sign = if (qv[0] > 0.0) == (v[0] > 0.0) { 1.0 } else { -1.0 };
        for (a, b) in qv.iter().zip(v.iter()) {
            assert!(close(*a, sign * b, 1e-9));
        }
    }

    #[test]
    fn indefinite_y_rejected() {
        let y = SymMatrix::from_rows(4, {
            let mut d = vec![0.0; 16];
            d[0] = 1.0;
            d[5] = -0.5;
            d[10] = 1.0;
            d[15] = 1.0;
            d
        })
        .unwrap();
        let problem = plain_problem(2, 2, vec![]);
        assert_eq!(build_rounding(&y, &problem).unwrap_err().code, "not_psd");
    }

    #[test]
    fn rho4_is_spectral_trace_max_of_transformed_cap() {
        let mut b_raw = vec![0.0; 16];
        b_raw[0] = 2.0;
        let b = SymMatrix::from_rows(4, b_raw).unwrap();
        let problem = plain_problem(2, 2, vec![b]);
        let plan = build_rounding(&SymMatrix::identity(4), &problem).unwrap();
        assert_eq!(plan.rho4().len(), 1);
        assert!(close(plan.rho4()[0], 2.0, 1e-10), "{}", plan.rho4()[0]);
    }

    #[test]
    fn draw_hooks_are_linear() {
        let problem = plain_problem(2, 2, vec![]);
        let plan = build_rounding(&SymMatrix::identity(4), &problem).unwrap();
        let zero = rounding_from_draws(&plan, &[0.0; 4]).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let single = rounding_from_draws(&plan, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(single.get(i, j), plan.q_list()[0].get(i, j), 1e-15));
            }
        }
        assert!(rounding_from_draws(&plan, &[1.0]).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_guarded() {
        let problem = plain_problem(2, 2, vec![]);
        let plan = build_rounding(&SymMatrix::identity(4), &problem).unwrap();
        let model = unit_poisson();
        let a = sample_rounding(&plan, &model, 77).unwrap();
        let b = sample_rounding(&plan, &model, 77).unwrap();
        assert_eq!(a, b);
        let wide = IdModel::new(0.0, LevyMeasure::new(vec![(2.0, 1.0)]).unwrap()).unwrap();
        assert_eq!(sample_rounding(&plan, &wide, 77).unwrap_err().code, "not_normalized");
    }

    #[test]
    fn feasibility_reference_values() {
        let mut b_raw = vec![0.0; 16];
        b_raw[0] = 2.0;
        let b = SymMatrix::from_rows(4, b_raw).unwrap();
        let problem = plain_problem(2, 2, vec![b]);
        let plan = build_rounding(&SymMatrix::identity(4), &problem).unwrap();
        assert!(close(plan.rho3(), 2.0, 1e-10));
        let model = unit_poisson();
        let fb = feasibility_bounds(&plan, &model).unwrap();
        assert!(close(fb.c2, 9.463080290913506, 1e-10), "{}", fb.c2);
        assert!(close(fb.tau2, 1.6312325539756385, 1e-10), "{}", fb.tau2);
        assert!(close(fb.norm_bound, 5.612738018158334, 1e-10), "{}", fb.norm_bound);
        assert!(close(fb.quad_bounds[0], 31.502828060479941, 1e-9), "{}", fb.quad_bounds[0]);
        assert!(close(fb.scale, 2.0, 1e-10));
        let gauss = IdModel::gaussian(1.0).unwrap();
        assert_eq!(feasibility_bounds(&plan, &gauss).unwrap_err().code, "domain");
    }

    #[test]
    fn theta_hat_matches_objective_inner_product() {
        let mut state = 0xc0ffeeu64;
        let y = random_psd(4, &mut state);
        let problem = plain_problem(2, 2, vec![]);
        let plan = build_rounding(&y, &problem).unwrap();
        let trace: f64 = (0..4).map(|i| y.get(i, i)).sum();
        assert!(close(plan.theta_hat(), trace, 1e-12));
    }
}
