//! Scalar exponent curves and the piecewise lower bound of Q.
//!
//! Q(s) = (1+s)ln(1+s) - s drives the Bennett-type tail bound; its two
//! classical relaxations are B(s) = s²/(2(1+s/3)) (Bernstein, smooth) and
//! T(s) = s²/4 for s < 3, 3s/4 for s ≥ 3 (Bernstein, piecewise), with
//! Q(s) ≥ B(s) ≥ T(s) on s ≥ 0.
//!
//! The exponent τ(β,s) = [ln Q(s) - ln β]/ln s turns Q into power-function
//! lower bounds: with β₀ = 2ln2 - 1, the function H_P(s) equals β₀s² on
//! (0,1] and β₀s^{τ_n} on (p_{n-1}, p_n] over an ordered partition
//! P = {1 = p_0 < p_1 < … < p_N = c}, where τ_n = τ(β₀, p_n). It satisfies
//! Q(s) ≥ H_P(s) ≥ H_{1,c}(s) on (0,c] with equality Q(p_n) = H_P(p_n) at
//! every partition point.

use crate::error::{Error, Result};

const MODULE: &str = "scalar_bounds";

/// β₀ = 2ln2 - 1, the largest β with Q(s) ≥ βs² on (0,1].
pub const BETA0: f64 = 2.0 * std::f64::consts::LN_2 - 1.0;

/// lim_{s→1} τ(β₀, s) = ln2/(2ln2 - 1), the removable-singularity fill.
pub const TAU_AT_ONE: f64 = std::f64::consts::LN_2 / BETA0;

/// Half-width of the interval around s = 1 where `tau` returns the limit
/// value instead of evaluating the 0/0 ratio.
const TAU_FILL_WINDOW: f64 = 1e-4;

/// Selects one of the three scalar exponent curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Q,
    B,
    T,
}

/// Evaluates Q(s) = (1+s)ln(1+s) - s, B(s) = s²/(2(1+s/3)), or
/// T(s) = s²/4 (s < 3), 3s/4 (s ≥ 3) at s ≥ 0.
pub fn eval_curve(kind: CurveKind, s: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::new(MODULE, "domain", format!("curve argument must be finite and >= 0, got {s}")));
    }
    Ok(match kind {
        CurveKind::Q => (1.0 + s) * s.ln_1p() - s,
        CurveKind::B => s * s / (2.0 * (1.0 + s / 3.0)),
        CurveKind::T => {
            if s < 3.0 {
                s * s / 4.0
            } else {
                0.75 * s
            }
        }
    })
}

/// τ(β,s) = [ln((s+1)ln(s+1) - s) - ln β]/ln s for s > 0, s ≠ 1, Q(s) > 0.
///
/// For β = β₀ the singularity at s = 1 is removable and the limit
/// ln2/(2ln2 - 1) is returned whenever |s - 1| < 1e-4; for other β the
/// point s = 1 is a genuine singularity and is rejected.
pub fn tau(beta: f64, s: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::new(MODULE, "domain", format!("tau requires beta > 0, got {beta}")));
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::new(MODULE, "domain", format!("tau requires s > 0, got {s}")));
    }
    if (s - 1.0).abs() < TAU_FILL_WINDOW {
        if (beta - BETA0).abs() <= 1e-15 {
            return Ok(TAU_AT_ONE);
        }
        return Err(Error::new(MODULE, "domain", format!("tau has a genuine singularity at s = 1 for beta = {beta}")));
    }
    let q = eval_curve(CurveKind::Q, s)?;
    if !(q > 0.0) {
        return Err(Error::new(MODULE, "domain", format!("Q(s) underflowed to {q} at s = {s}; tau undefined")));
    }
    Ok((q.ln() - beta.ln()) / s.ln())
}

/// An ordered partition 1 = p_0 < p_1 < … < p_N = c together with the
/// exponents τ_n = τ(β₀, p_n) defining the piecewise bound H_P.
#[derive(Debug, Clone)]
pub struct PartitionBound {
    points: Vec<f64>,
    exponents: Vec<f64>,
}

impl PartitionBound {
    /// Right endpoint c = p_N of the partition.
    pub fn c(&self) -> f64 {
        *self.points.last().unwrap()
    }

    /// Partition points p_0..p_N.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Exponents τ_1..τ_N, one per branch (p_{n-1}, p_n].
    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }
}

/// Builds the H_P bound for an ordered point list starting at 1.
///
/// Each exponent τ_n = τ(β₀, p_n) lies in (1, 2); the resulting H_P
/// satisfies Q ≥ H_P on (0, c] with equality at every p_n.
pub fn build_partition_bound(points: &[f64]) -> Result<PartitionBound> {
    if points.len() < 2 {
        return Err(Error::new(MODULE, "invalid_partition", format!("need at least two points, got {}", points.len())));
    }
    if points[0] != 1.0 {
        return Err(Error::new(MODULE, "invalid_partition", format!("first point must be 1, got {}", points[0])));
    }
    for w in points.windows(2) {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(Error::new(MODULE, "invalid_partition", format!("points must be strictly increasing, got {} then {}", w[0], w[1])));
        }
    }
    let mut exponents = Vec::with_capacity(points.len() - 1);
    for &p in &points[1..] {
        exponents.push(tau(BETA0, p)?);
    }
    Ok(PartitionBound { points: points.to_vec(), exponents })
}

/// Evaluates H_P(s) = β₀s² on (0, 1] and β₀s^{τ_n} on (p_{n-1}, p_n].
///
/// Branch membership uses the half-open intervals (p_{n-1}, p_n]; at a
/// partition point p_n with n ≥ 1 the value equals Q(p_n) by the defining
/// identity β₀·p_n^{τ(β₀,p_n)} = Q(p_n), and Q(p_n) is returned directly so
/// the equality is exact at floating-point scale.
pub fn eval_hp(pb: &PartitionBound, s: f64) -> Result<f64> {
    let c = pb.c();
    if !(s > 0.0 && s <= c) {
        return Err(Error::new(MODULE, "domain", format!("H_P is defined on (0, {c}], got s = {s}")));
    }
    if s <= 1.0 {
        return Ok(BETA0 * s * s);
    }
    for (n, &p) in pb.points.iter().enumerate().skip(1) {
        if s == p {
            return eval_curve(CurveKind::Q, p);
        }
        if s < p {
            return Ok(BETA0 * s.powf(pb.exponents[n - 1]));
        }
    }
    unreachable!("s <= c is guaranteed by the domain check");
}

/// Finds the crossing of H_{1,c} and B near s ≈ 0.883.
///
/// Returns (s*, H_{1,c}(s*)) where s* solves H_{1,c}(s) = B(s), located by a
/// sign-change scan of H - B on (0.5, min(1.5, c)) followed by bisection to
/// 1e-6. For every c > 1 the first crossing sits below 1 where H is the
/// quadratic branch, so s* solves β₀s² = B(s).
pub fn bh_crossing(c: f64) -> Result<(f64, f64)> {
    if !(c > 1.0) || !c.is_finite() {
        return Err(Error::new(MODULE, "domain", format!("bh_crossing requires c > 1, got {c}")));
    }
    let pb = build_partition_bound(&[1.0, c])?;
    let f = |s: f64| -> Result<f64> { Ok(eval_hp(&pb, s)? - eval_curve(CurveKind::B, s)?) };
    let lo0 = 0.5;
    let hi0 = 1.5f64.min(c);
    let n = 1000;
    let mut bracket = None;
    let mut prev_s = lo0;
    let mut prev_f = f(prev_s)?;
    for i in 1..=n {
        let s = lo0 + (hi0 - lo0) * i as f64 / n as f64;
        let fs = f(s)?;
        if prev_f <= 0.0 && fs > 0.0 {
            bracket = Some((prev_s, s));
            break;
        }
        prev_s = s;
        prev_f = fs;
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        Error::new(MODULE, "no_crossing", format!("no sign change of H_c - B found in ({lo0}, {hi0}) for c = {c}"))
    })?;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let s_star = 0.5 * (lo + hi);
    Ok((s_star, eval_hp(&pb, s_star)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn curve_values_at_one() {
        assert!(close(eval_curve(CurveKind::Q, 1.0).unwrap(), BETA0, 1e-15));
        assert_eq!(eval_curve(CurveKind::B, 1.0).unwrap(), 0.375);
        assert_eq!(eval_curve(CurveKind::T, 1.0).unwrap(), 0.25);
    }

    #[test]
    fn bernstein_curves_meet_at_seam() {
        assert_eq!(eval_curve(CurveKind::B, 3.0).unwrap(), 2.25);
        assert_eq!(eval_curve(CurveKind::T, 3.0).unwrap(), 2.25);
    }

    #[test]
    fn q_small_argument_avoids_cancellation() {
        let s = 1e-8;
        let q = eval_curve(CurveKind::Q, s).unwrap();
        assert!((q / (s * s / 2.0) - 1.0).abs() < 1e-6, "Q(1e-8) = {q}");
    }

    #[test]
    fn tau_at_the_removable_singularity() {
        assert_eq!(tau(BETA0, 1.0).unwrap(), TAU_AT_ONE);
        assert!(close(TAU_AT_ONE, 1.794349724781045, 1e-15));
        assert!(close(tau(BETA0, 1.0 + 1e-6).unwrap(), 1.794354, 1e-4));
        assert!(close(tau(BETA0, 1.0 - 1e-6).unwrap(), 1.794354, 1e-4));
    }

    #[test]
    fn tau_rejects_s_one_for_other_beta() {
        let err = tau(0.5, 1.0).unwrap_err();
        assert_eq!(err.code, "domain");
    }

    #[test]
    fn tau_reference_values() {
        assert!(close(tau(BETA0, 3.0).unwrap(), 1.716124966350600, 1e-13));
        assert!(close(tau(BETA0, 1000.0).unwrap(), 1.395028365324075, 1e-13));
        assert!(close(tau(BETA0, 1e-8).unwrap(), 1.985993545718411, 1e-7));
        assert!(close(tau(BETA0, 1e12).unwrap(), 1.153205787526677, 1e-13));
        assert!(close(tau(BETA0, 2.0).unwrap(), 1.746111584269838, 1e-13));
    }

    #[test]
    fn tau_stays_inside_one_two() {
        let mut s: f64 = 1e-5;
        while s < 1e6 {
            if (s - 1.0).abs() >= 1e-4 {
                let t = tau(BETA0, s).unwrap();
                assert!(t > 1.0 && t < 2.0, "tau({s}) = {t}");
            }
            s *= 1.37;
        }
    }

    #[test]
    fn partition_requires_leading_one_and_order() {
        assert!(build_partition_bound(&[1.0]).is_err());
        assert!(build_partition_bound(&[2.0, 3.0]).is_err());
        assert!(build_partition_bound(&[1.0, 5.0, 4.0]).is_err());
        assert!(build_partition_bound(&[1.0, 4.0, 4.0]).is_err());
    }

    #[test]
    fn hp_value_at_one_is_beta0_for_any_partition() {
        for points in [vec![1.0, 2.0], vec![1.0, 15.0, 25.0, 40.0, 50.0], vec![1.0, 1000.0]] {
            let pb = build_partition_bound(&points).unwrap();
            assert_eq!(eval_hp(&pb, 1.0).unwrap(), BETA0);
        }
    }

    #[test]
    fn hp_quadratic_branch() {
        let pb = build_partition_bound(&[1.0, 10.0]).unwrap();
        assert!(close(eval_hp(&pb, 0.5).unwrap(), BETA0 * 0.25, 1e-16));
    }

    #[test]
    fn hp_reference_value_c_1000() {
        let pb = build_partition_bound(&[1.0, 1000.0]).unwrap();
        assert!(close(eval_hp(&pb, 2.0).unwrap(), 1.015929921277002, 1e-12));
    }

    #[test]
    fn hp_equals_q_at_partition_points() {
        let pb = build_partition_bound(&[1.0, 15.0, 25.0, 40.0, 50.0]).unwrap();
        for &p in pb.points() {
            let h = eval_hp(&pb, p).unwrap();
            let q = eval_curve(CurveKind::Q, p).unwrap();
            assert!(close(h, q, 1e-12), "H_P({p}) = {h} vs Q = {q}");
        }
    }

    #[test]
    fn hp_interior_reference_values() {
        let pb = build_partition_bound(&[1.0, 15.0, 25.0, 40.0, 50.0]).unwrap();
        assert!(close(eval_hp(&pb, 20.0).unwrap(), 42.10101700285932, 1e-10));
        assert!(close(eval_hp(&pb, 2.0).unwrap(), 1.170413281462926, 1e-12));
    }

    #[test]
    fn hp_domain_is_zero_to_c() {
        let pb = build_partition_bound(&[1.0, 3.0]).unwrap();
        assert!(eval_hp(&pb, 0.0).is_err());
        assert!(eval_hp(&pb, -1.0).is_err());
        assert!(eval_hp(&pb, 3.0 + 1e-9).is_err());
        assert!(eval_hp(&pb, 3.0).is_ok());
    }

    #[test]
    fn hc_is_continuous_at_one() {
        let pb = build_partition_bound(&[1.0, 50.0]).unwrap();
        let left = eval_hp(&pb, 1.0 - 1e-9).unwrap();
        let right = eval_hp(&pb, 1.0 + 1e-9).unwrap();
        assert!(close(left, BETA0, 1e-8));
        assert!(close(right, BETA0, 1e-8));
    }

    #[test]
    fn crossing_reference_values() {
        let (s, v) = bh_crossing(1000.0).unwrap();
        assert!(close(s, 0.8830491743431347, 1e-6), "s* = {s}");
        assert!(close(v, 0.3012230115937177, 1e-6), "value = {v}");
    }

    #[test]
    fn crossing_sign_pattern_around_s_star() {
        let c = 1000.0;
        let pb = build_partition_bound(&[1.0, c]).unwrap();
        let (s_star, _) = bh_crossing(c).unwrap();
        let mut s = 0.01;
        while s < s_star - 1e-4 {
            assert!(eval_curve(CurveKind::B, s).unwrap() > eval_hp(&pb, s).unwrap(), "B <= H at s = {s}");
            s += 0.01;
        }
    }

    #[test]
    fn hc_exceeds_b_beyond_s_star_for_small_c() {
        let c = 6.0;
        let pb = build_partition_bound(&[1.0, c]).unwrap();
        let (s_star, _) = bh_crossing(c).unwrap();
        let n = 2000;
        for i in 0..n {
            let s = (s_star + 1e-3) + (c - s_star - 1e-3) * i as f64 / n as f64;
            let h = eval_hp(&pb, s).unwrap();
            let b = eval_curve(CurveKind::B, s).unwrap();
            assert!(h > b, "H_c({s}) = {h} <= B = {b}");
        }
    }

    #[test]
    fn crossing_exists_for_any_c_above_one() {
        let (s, _) = bh_crossing(1.0001).unwrap();
        assert!(close(s, 0.8830491743431347, 1e-6));
        assert!(bh_crossing(1.0).is_err());
    }
}
