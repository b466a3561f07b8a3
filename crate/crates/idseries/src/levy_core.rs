//! Centered infinitely divisible scalar laws with finite discrete Lévy measures.
//!
//! A model is the pair (σ², ν) with ν = Σ_j w_j·δ_{u_j}, u_j ≠ 0 distinct,
//! w_j > 0. The represented random variable is
//!
//!   ξ = σZ + Σ_j u_j N_j - Σ_j u_j w_j,
//!
//! with Z standard normal and N_j independent Poisson(w_j) counts, so ξ has
//! mean 0 and variance σ² + V where V = Σ_j w_j u_j². The drift is never
//! stored; centering holds by construction. For bounded discrete measures
//! the mgf domain is all of [0, ∞).
//!
//! The cumulant quantities used by the tail bounds are
//!
//!   α(s) = σ²s + Σ_j w_j|u_j|(e^{s|u_j|} - 1),
//!   Φ(θ) = σ²θ²/2 + Σ_j w_j(e^{θ|u_j|} - θ|u_j| - 1),
//!
//! with Φ' = α and α strictly increasing from α(0) = 0.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

const MODULE: &str = "levy_core";

/// Exponent arguments beyond this overflow e^x in double precision.
const EXP_ARG_LIMIT: f64 = 709.0;

/// A finite discrete Lévy measure: atoms (u_j, w_j) with distinct u_j ≠ 0
/// and weights w_j > 0. The list may be empty (pure Gaussian law).
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasure {
    atoms: Vec<(f64, f64)>,
}

impl LevyMeasure {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        for &(u, w) in &atoms {
            if !u.is_finite() || u == 0.0 {
                return Err(Error::new(MODULE, "invalid_model", format!("atom location must be finite and nonzero, got {u}")));
            }
            if !w.is_finite() || !(w > 0.0) {
                return Err(Error::new(MODULE, "invalid_model", format!("atom weight must be finite and > 0, got {w}")));
            }
        }
        for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                if atoms[i].0 == atoms[j].0 {
                    return Err(Error::new(MODULE, "invalid_model", format!("duplicate atom location {}", atoms[i].0)));
                }
            }
        }
        Ok(LevyMeasure { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// A centered i.d. law (σ², ν) with its derived scalars: support radius
/// R = max_j |u_j|, second moment V = Σ_j w_j u_j², jump mean
/// m1 = Σ_j u_j w_j (used only for centering), variance σ² + V > 0, and the
/// mgf domain (+∞ for every supported measure).
#[derive(Debug, Clone, PartialEq)]
pub struct IdModel {
    sigma2: f64,
    measure: LevyMeasure,
    r: f64,
    v: f64,
    m1: f64,
    variance: f64,
    mgf_domain: f64,
}

impl IdModel {
    pub fn new(sigma2: f64, measure: LevyMeasure) -> Result<Self> {
        if !sigma2.is_finite() || sigma2 < 0.0 {
            return Err(Error::new(MODULE, "invalid_model", format!("sigma2 must be finite and >= 0, got {sigma2}")));
        }
        let mut r: f64 = 0.0;
        let mut v = 0.0;
        let mut m1 = 0.0;
        for &(u, w) in measure.atoms() {
            r = r.max(u.abs());
            v += w * u * u;
            m1 += w * u;
        }
        let variance = sigma2 + v;
        if !(variance > 0.0) {
            return Err(Error::new(MODULE, "invalid_model", "degenerate point mass: sigma2 + V must be > 0"));
        }
        Ok(IdModel { sigma2, measure, r, v, m1, variance, mgf_domain: f64::INFINITY })
    }

    /// Convenience constructor from raw atom pairs.
    pub fn from_parts(sigma2: f64, atoms: Vec<(f64, f64)>) -> Result<Self> {
        IdModel::new(sigma2, LevyMeasure::new(atoms)?)
    }

    /// Pure Gaussian model (empty Lévy measure).
    pub fn gaussian(sigma2: f64) -> Result<Self> {
        IdModel::new(sigma2, LevyMeasure::new(Vec::new())?)
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn measure(&self) -> &LevyMeasure {
        &self.measure
    }

    /// Support radius R = max_j |u_j| (0 without atoms).
    pub fn support_radius(&self) -> f64 {
        self.r
    }

    /// V = Σ_j w_j u_j².
    pub fn second_moment(&self) -> f64 {
        self.v
    }

    /// Variance σ² + V of the centered law.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Jump mean Σ_j u_j w_j subtracted by the sampler for centering.
    pub fn jump_mean(&self) -> f64 {
        self.m1
    }

    /// sup{θ : E e^{θ|ξ|} < ∞}; +∞ for every finite discrete measure.
    pub fn mgf_domain(&self) -> f64 {
        self.mgf_domain
    }

    /// Rescaled model with unit variance: σ and every atom location are
    /// divided by √(σ² + V), which leaves the weights untouched and maps
    /// the variance to exactly 1. Returns the divisor alongside the model.
    pub fn normalized(&self) -> Result<(IdModel, f64)> {
        let scale = self.variance.sqrt();
        let atoms = self.measure.atoms().iter().map(|&(u, w)| (u / scale, w)).collect();
        let model = IdModel::from_parts(self.sigma2 / (scale * scale), atoms)?;
        Ok((model, scale))
    }
}

/// Σ_j w_j |u_j|^k, the k-th absolute moment of the Lévy measure; equals V
/// at k = 2 and 0 for an empty measure.
pub fn levy_moment(model: &IdModel, k: u32) -> Result<f64> {
    if k < 1 {
        return Err(Error::new(MODULE, "invalid_model", "levy_moment requires k >= 1"));
    }
    Ok(model.measure.atoms().iter().map(|&(u, w)| w * u.abs().powi(k as i32)).sum())
}

/// α(s) = σ²s + Σ_j w_j|u_j|(e^{s|u_j|} - 1), strictly increasing with
/// α(0) = 0. Arguments with s·R beyond the e^x overflow range are rejected.
pub fn alpha(model: &IdModel, s: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::new(MODULE, "range", format!("alpha requires finite s >= 0, got {s}")));
    }
    if s * model.r > EXP_ARG_LIMIT {
        return Err(Error::new(MODULE, "range", format!("alpha overflows at s = {s} (s * R = {})", s * model.r)));
    }
    let mut out = model.sigma2 * s;
    for &(u, w) in model.measure.atoms() {
        let a = u.abs();
        out += w * a * (s * a).exp_m1();
    }
    Ok(out)
}

/// α'(s) = σ² + Σ_j w_j u_j² e^{s|u_j|}, used for the Newton polish.
fn alpha_deriv(model: &IdModel, s: f64) -> f64 {
    let mut out = model.sigma2;
    for &(u, w) in model.measure.atoms() {
        out += w * u * u * (s * u.abs()).exp();
    }
    out
}

/// Inverse of α: returns s ≥ 0 with |α(s) - y| ≤ 1e-12·max(1, y).
///
/// The bracket [0, s_hi] grows geometrically until α(s_hi) ≥ y, then
/// bisection narrows it to 1e-14 absolute and one Newton step polishes the
/// root. Both stages converge unconditionally because α is strictly
/// increasing.
pub fn alpha_inv(model: &IdModel, y: f64) -> Result<f64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::new(MODULE, "range", format!("alpha_inv requires finite y >= 0, got {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0f64;
    let mut grow = 0;
    while alpha(model, hi)? < y {
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::new(MODULE, "no_convergence", format!("bracket growth failed for y = {y}")));
        }
    }
    let mut lo = 0.0f64;
    let mut iter = 0;
    while hi - lo > 1e-14 && iter < 400 {
        let mid = 0.5 * (lo + hi);
        if alpha(model, mid)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
    }
    let mut s = 0.5 * (lo + hi);
    let d = alpha_deriv(model, s);
    if d > 0.0 {
        s -= (alpha(model, s)? - y) / d;
        if s < 0.0 {
            s = 0.0;
        }
    }
    let resid = (alpha(model, s)? - y).abs();
    if resid > 1e-12 * y.max(1.0) {
        return Err(Error::new(MODULE, "no_convergence", format!("alpha_inv residual {resid} exceeds tolerance at y = {y}")));
    }
    Ok(s)
}

/// Φ(θ) = σ²θ²/2 + Σ_j w_j(e^{θ|u_j|} - θ|u_j| - 1), nonnegative with
/// Φ(0) = 0 and Φ' = α.
pub fn phi(model: &IdModel, theta: f64) -> Result<f64> {
    if !(theta >= 0.0) || !theta.is_finite() || theta >= model.mgf_domain {
        return Err(Error::new(MODULE, "range", format!("phi requires 0 <= theta < mgf domain, got {theta}")));
    }
    if theta * model.r > EXP_ARG_LIMIT {
        return Err(Error::new(MODULE, "range", format!("phi overflows at theta = {theta}")));
    }
    let mut out = model.sigma2 * theta * theta / 2.0;
    for &(u, w) in model.measure.atoms() {
        let x = theta * u.abs();
        out += w * (x.exp_m1() - x);
    }
    Ok(out)
}

/// Draws n independent copies of ξ = σZ + Σ_j u_j N_j - Σ_j u_j w_j from a
/// single ChaCha8 stream seeded with `seed`; identical (model, n, seed)
/// always produce the identical list.
pub fn sample(model: &IdModel, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::new(MODULE, "invalid_model", "sample requires n >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = sampler(model)?;
    Ok((0..n).map(|_| draws(&mut rng)).collect())
}

/// Returns a closure drawing one centered ξ from the model per call.
pub(crate) fn sampler(model: &IdModel) -> Result<impl FnMut(&mut ChaCha8Rng) -> f64 + '_> {
    let sigma = model.sigma2.sqrt();
    let mut poissons = Vec::with_capacity(model.measure.atoms().len());
    for &(u, w) in model.measure.atoms() {
        let p = Poisson::new(w)
            .map_err(|e| Error::new(MODULE, "invalid_model", format!("Poisson({w}) rejected: {e}")))?;
        poissons.push((u, p));
    }
    let m1 = model.m1;
    Ok(move |rng: &mut ChaCha8Rng| {
        let mut xi = -m1;
        if sigma > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            xi += sigma * z;
        }
        for &(u, p) in &poissons {
            let count: f64 = p.sample(rng);
            xi += u * count;
        }
        xi
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_poisson() -> IdModel {
        IdModel::from_parts(0.0, vec![(1.0, 1.0)]).unwrap()
    }

    #[test]
    fn model_invariants() {
        let m = IdModel::from_parts(0.25, vec![(-2.0, 0.5), (1.0, 3.0)]).unwrap();
        assert_eq!(m.support_radius(), 2.0);
        assert_eq!(m.second_moment(), 5.0);
        assert_eq!(m.jump_mean(), 2.0);
        assert_eq!(m.variance(), 5.25);
        assert_eq!(m.mgf_domain(), f64::INFINITY);
    }

    #[test]
    fn model_rejects_bad_atoms() {
        assert!(IdModel::from_parts(1.0, vec![(0.0, 1.0)]).is_err());
        assert!(IdModel::from_parts(1.0, vec![(1.0, 0.0)]).is_err());
        assert!(IdModel::from_parts(1.0, vec![(1.0, -1.0)]).is_err());
        assert!(IdModel::from_parts(1.0, vec![(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(IdModel::from_parts(0.0, vec![]).is_err());
        assert!(IdModel::gaussian(1.0).is_ok());
    }

    #[test]
    fn levy_moment_matches_hand_values() {
        let m = IdModel::from_parts(0.0, vec![(1.0, 1.0)]).unwrap();
        assert_eq!(levy_moment(&m, 2).unwrap(), 1.0);
        let m = IdModel::from_parts(1.0, vec![(-2.0, 0.5), (1.0, 3.0)]).unwrap();
        assert_eq!(levy_moment(&m, 2).unwrap(), 5.0);
        let g = IdModel::gaussian(1.0).unwrap();
        assert_eq!(levy_moment(&g, 7).unwrap(), 0.0);
    }

    #[test]
    fn alpha_closed_forms() {
        let g = IdModel::gaussian(1.0).unwrap();
        assert_eq!(alpha(&g, 0.7).unwrap(), 0.7);
        let p = unit_poisson();
        assert!((alpha(&p, 1.0).unwrap() - (1f64.exp() - 1.0)).abs() < 1e-15);
        assert_eq!(alpha(&p, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn alpha_rejects_overflow() {
        let p = unit_poisson();
        let err = alpha(&p, 800.0).unwrap_err();
        assert_eq!(err.code, "range");
    }

    #[test]
    fn alpha_inv_round_trips() {
        let g = IdModel::gaussian(1.0).unwrap();
        assert!((alpha_inv(&g, 0.7).unwrap() - 0.7).abs() < 1e-12);
        let p = unit_poisson();
        assert!((alpha_inv(&p, 1f64.exp() - 1.0).unwrap() - 1.0).abs() < 1e-10);
        let mixed = IdModel::from_parts(1.0, vec![(1.0, 1.0)]).unwrap();
        let y = alpha(&mixed, 0.5).unwrap();
        assert!((alpha_inv(&mixed, y).unwrap() - 0.5).abs() < 1e-10);
        assert_eq!(alpha_inv(&mixed, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn alpha_inv_reference_value() {
        let m = IdModel::from_parts(0.5, vec![(1.0, 1.0)]).unwrap();
        assert!((alpha(&m, 0.5).unwrap() - 0.8987212707001281).abs() < 1e-14);
        assert!((alpha_inv(&m, 1.0).unwrap() - 0.5462991776732221).abs() < 1e-11);
    }

    #[test]
    fn phi_closed_forms() {
        let g = IdModel::gaussian(1.0).unwrap();
        assert_eq!(phi(&g, 2.0).unwrap(), 2.0);
        let p = unit_poisson();
        assert!((phi(&p, 1.0).unwrap() - (1f64.exp() - 2.0)).abs() < 1e-15);
        assert_eq!(phi(&p, 0.0).unwrap(), 0.0);
        let d = IdModel::from_parts(0.5, vec![(1.0, 1.0)]).unwrap();
        assert!((phi(&d, 1.0).unwrap() - 0.9682818284590452).abs() < 1e-14);
    }

    #[test]
    fn sample_is_deterministic_and_centered() {
        let p = unit_poisson();
        let a = sample(&p, 1000, 7).unwrap();
        let b = sample(&p, 1000, 7).unwrap();
        assert_eq!(a, b);
        let c = sample(&p, 1000, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_sample_variance_near_one() {
        let g = IdModel::gaussian(1.0).unwrap();
        let xs = sample(&g, 1_000_000, 20240901).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((var - 1.0).abs() < 0.01, "sample variance {var}");
    }

    #[test]
    fn poisson_sample_mean_near_zero() {
        let p = unit_poisson();
        let xs = sample(&p, 1_000_000, 3).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.005, "sample mean {mean}");
    }

    #[test]
    fn normalized_has_unit_variance() {
        let m = IdModel::from_parts(0.25, vec![(-2.0, 0.5), (1.0, 3.0)]).unwrap();
        let (n, scale) = m.normalized().unwrap();
        assert!((n.variance() - 1.0).abs() < 1e-12);
        assert!((scale - 5.25f64.sqrt()).abs() < 1e-15);
        assert!((n.support_radius() - 2.0 / scale).abs() < 1e-15);
    }
}
