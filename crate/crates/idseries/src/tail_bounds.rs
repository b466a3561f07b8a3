//! Tail and expectation bounds for ‖Σ_k ξ_k A_k‖ with i.d. coefficients.
//!
//! Every bound depends on the coefficient matrices only through the ambient
//! dimension d and the curvature ρ = λ_max(Σ_k A_k²), collected in
//! [`SeriesScale`], and on the scalar law through (σ², V, R). Throughout,
//! x = ρ(σ² + V) and the returned values bound the two-sided norm event
//! P{‖Σ ξ_k A_k‖ > t} (factor 2d, unclipped, may exceed 1); the one-sided
//! λ_max bound is half of it, see [`BoundReport::lambda_max_form`].

use crate::error::{Error, Result};
use crate::levy_core::{alpha_inv, IdModel};
use crate::matrix_core::MatrixSeries;
use crate::scalar_bounds::{eval_curve, tau, CurveKind, BETA0};

const MODULE: &str = "tail_bounds";
const QUAD_REL_TOL: f64 = 1e-10;
const QUAD_MAX_DEPTH: u32 = 20;

/// The two series attributes the bounds read: ambient dimension d and
/// curvature ρ = λ_max(Σ_k A_k²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesScale {
    dim: usize,
    rho: f64,
}

impl SeriesScale {
    pub fn new(dim: usize, rho: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::new(MODULE, "domain", "dimension must be positive"));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::new(MODULE, "domain", format!("curvature rho must be finite and positive, got {rho}")));
        }
        Ok(SeriesScale { dim, rho })
    }

    pub fn of(series: &MatrixSeries) -> Self {
        SeriesScale { dim: series.dim(), rho: series.rho() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn two_d(&self) -> f64 {
        2.0 * self.dim as f64
    }

    fn x(&self, model: &IdModel) -> f64 {
        self.rho * model.variance()
    }
}

impl From<&MatrixSeries> for SeriesScale {
    fn from(series: &MatrixSeries) -> Self {
        SeriesScale::of(series)
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::new(MODULE, "domain", format!("threshold t must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// 2d·exp(−ρ∫₀^{t/ρ} α⁻¹(y)dy), the sharpest bound available: the exponent
/// is the exact Legendre transform rate of the scalar law at scale ρ.
pub fn tail_exact(model: &IdModel, scale: SeriesScale, t: f64) -> Result<f64> {
    check_t(t)?;
    let upper = t / scale.rho();
    let mut f = |y: f64| alpha_inv(model, y);
    let integral = adaptive_simpson(&mut f, 0.0, upper)?;
    Ok(scale.two_d() * (-scale.rho() * integral).exp())
}

/// Bennett form 2d·exp(−(x/R²)·Q(Rt/x)); for a pure Gaussian model (R = 0)
/// the analytic limit 2d·exp(−t²/(2x)) is used.
pub fn tail_bennett(model: &IdModel, scale: SeriesScale, t: f64) -> Result<f64> {
    check_t(t)?;
    let x = scale.x(model);
    let r = model.support_radius();
    let exponent = if r == 0.0 {
        t * t / (2.0 * x)
    } else {
        x / (r * r) * eval_curve(CurveKind::Q, r * t / x)?
    };
    Ok(scale.two_d() * (-exponent).exp())
}

/// Bernstein forms: smooth 2d·exp(−(3/2)t²/(3x + Rt)) and the piecewise
/// variant 2d·exp(−t²/(4x)) for Rt < 3x, 2d·exp(−3t/(4R)) beyond.
pub fn tail_bernstein(model: &IdModel, scale: SeriesScale, t: f64) -> Result<(f64, f64)> {
    check_t(t)?;
    let x = scale.x(model);
    let r = model.support_radius();
    let smooth = scale.two_d() * (-(1.5 * t * t) / (3.0 * x + r * t)).exp();
    let piecewise_exp = if r * t < 3.0 * x {
        t * t / (4.0 * x)
    } else {
        0.75 * t / r
    };
    Ok((smooth, scale.two_d() * (-piecewise_exp).exp()))
}

/// H_{1,c} form: 2d·exp(−β₀t²/x) while Rt/x ≤ 1, then
/// 2d·exp(−β₀R^{τ_c−2}t^{τ_c}/x^{τ_c−1}) up to Rt/x = c, beyond which the
/// partition bound has no value and an error is returned.
pub fn tail_hc(model: &IdModel, scale: SeriesScale, t: f64, c: f64) -> Result<f64> {
    check_t(t)?;
    if !(c > 1.0) || !c.is_finite() {
        return Err(Error::new(MODULE, "domain", format!("the one-point partition needs c > 1, got {c}")));
    }
    let x = scale.x(model);
    let r = model.support_radius();
    let s = r * t / x;
    let exponent = if s <= 1.0 {
        BETA0 * t * t / x
    } else if s <= c {
        let tc = tau(BETA0, c)?;
        BETA0 * r.powf(tc - 2.0) * t.powf(tc) / x.powf(tc - 1.0)
    } else {
        return Err(Error::new(MODULE, "domain", format!("Rt/x = {s} exceeds the partition endpoint c = {c}")));
    };
    Ok(scale.two_d() * (-exponent).exp())
}

/// Special-partition form: 2d·exp(−β₀t²/x) for Rt ≤ x, else 2d·exp(−β₀t/R);
/// the exponent is quadratic near the bulk and linear in the far tail.
pub fn tail_beta0(model: &IdModel, scale: SeriesScale, t: f64) -> Result<f64> {
    check_t(t)?;
    let x = scale.x(model);
    let r = model.support_radius();
    let exponent = if r == 0.0 || r * t <= x {
        BETA0 * t * t / x
    } else {
        BETA0 * t / r
    };
    Ok(scale.two_d() * (-exponent).exp())
}

/// Which of the two published expectation-bound forms to evaluate; they carry
/// different constants (3R/4 with a 9ρ²(σ²+V)²/(2R²) term versus β₀⁻¹ with
/// ρ²(σ²+V)²/(2R²)) and are both exposed rather than reconciled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectationVariant {
    Statement,
    Proof,
}

/// Bound on E‖Σ ξ_k A_k‖. Statement form: (3R/4)(ln(2d) + 1 + 9ρ²(σ²+V)²/(2R²));
/// proof form: β₀⁻¹(ln(2d) + 1 + ρ²(σ²+V)²/(2R²)). Requires R > 0.
pub fn expectation_bound(model: &IdModel, scale: SeriesScale, variant: ExpectationVariant) -> Result<f64> {
    let r = model.support_radius();
    if r == 0.0 {
        return Err(Error::new(MODULE, "domain", "expectation bound needs an atom (R > 0)"));
    }
    let x = scale.x(model);
    let log2d = (scale.two_d()).ln();
    Ok(match variant {
        ExpectationVariant::Statement => 0.75 * r * (log2d + 1.0 + 4.5 * x * x / (r * r)),
        ExpectationVariant::Proof => (log2d + 1.0 + 0.5 * x * x / (r * r)) / BETA0,
    })
}

/// Quantile form selector for [`lambda_max_quantile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantileForm {
    Bernstein,
    Hc,
}

/// Level such that λ_max(Σ ξ_k A_k) stays below it with probability 1 − δ.
/// Bernstein form 4R(ln(2d) − lnδ)/3; H_c form
/// ((ln(2d) − lnδ)·x^{τ_c−1}/(β₀R^{τ_c−2}))^{1/τ_c}. Requires R > 0: both
/// closed forms degenerate to a false zero quantile for a pure Gaussian.
pub fn lambda_max_quantile(model: &IdModel, scale: SeriesScale, delta: f64, form: QuantileForm, c: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::new(MODULE, "domain", format!("delta must lie in (0,1), got {delta}")));
    }
    let r = model.support_radius();
    if r == 0.0 {
        return Err(Error::new(MODULE, "domain", "quantile forms need an atom (R > 0)"));
    }
    let level = scale.two_d().ln() - delta.ln();
    Ok(match form {
        QuantileForm::Bernstein => 4.0 * r * level / 3.0,
        QuantileForm::Hc => {
            let x = scale.x(model);
            let tc = tau(BETA0, c)?;
            (level * x.powf(tc - 1.0) / (BETA0 * r.powf(tc - 2.0))).powf(1.0 / tc)
        }
    })
}

/// Every tail bound evaluated at one threshold; values are two-sided norm
/// bounds (factor 2d), unclipped.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub t: f64,
    pub exact: f64,
    pub bennett: f64,
    pub bernstein_smooth: f64,
    pub bernstein_piecewise: f64,
    pub hc: f64,
    pub beta0_piecewise: f64,
    pub c: f64,
}

impl BoundReport {
    /// The one-sided λ_max form of every bound: exactly half the two-sided
    /// norm values, the dilation spectrum being symmetric.
    pub fn lambda_max_form(&self) -> BoundReport {
        BoundReport {
            t: self.t,
            exact: 0.5 * self.exact,
            bennett: 0.5 * self.bennett,
            bernstein_smooth: 0.5 * self.bernstein_smooth,
            bernstein_piecewise: 0.5 * self.bernstein_piecewise,
            hc: 0.5 * self.hc,
            beta0_piecewise: 0.5 * self.beta0_piecewise,
            c: self.c,
        }
    }
}

/// Evaluates all bounds at one t with the given partition endpoint c.
pub fn bound_report(model: &IdModel, scale: SeriesScale, t: f64, c: f64) -> Result<BoundReport> {
    let exact = tail_exact(model, scale, t)?;
    let bennett = tail_bennett(model, scale, t)?;
    let (bernstein_smooth, bernstein_piecewise) = tail_bernstein(model, scale, t)?;
    let hc = tail_hc(model, scale, t, c)?;
    let beta0_piecewise = tail_beta0(model, scale, t)?;
    Ok(BoundReport { t, exact, bennett, bernstein_smooth, bernstein_piecewise, hc, beta0_piecewise, c })
}

fn adaptive_simpson(f: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let fa = f(a)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let fb = f(b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = QUAD_REL_TOL * whole.abs().max(f64::MIN_POSITIVE);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, QUAD_MAX_DEPTH)
}

fn simpson_step(
    f: &mut impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::new(MODULE, "quadrature", format!("adaptive refinement exhausted on [{a},{b}]")));
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}
