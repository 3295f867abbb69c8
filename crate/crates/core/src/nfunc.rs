//! Generators `phi` of N-functions `Phi(t) = int_0^|t| phi(s) s ds`.
//!
//! The truncated mean curvature generator replaces `1/sqrt(1 + s)` beyond the
//! level `s = L` by a quadratic cap that meets it with matching value and
//! slope, then by the constant `y_L` for `s >= L + 1`:
//!
//! ```text
//! phi_hat_L(s) = 1/sqrt(1 + s)               0 <= s <= L
//!              = x_L (s - L - 1)^2 + y_L     L <= s <= L + 1
//!              = y_L                         s >= L + 1
//! phi_L(t)     = phi_hat_L(t^2)
//! ```
//!
//! The power-law generator `t^(p-2)` is kept as the negative example for the
//! cosh comparison condition.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numeric::{central_diff5, diff_step, linear_fit};
use crate::report::{ConditionReport, Witness};

/// The two constants that glue the quadratic cap onto `1/sqrt(1 + s)`.
pub fn truncation_constants(level: f64) -> Result<(f64, f64)> {
    if !level.is_finite() || level <= 0.0 {
        return domain(format!("truncation level must be positive and finite, got {level}"));
    }
    let x = (1.0 + level).sqrt() / (4.0 * (1.0 + level).powi(2));
    Ok((x, (4.0 * level + 3.0) * x))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NFunctionSpec {
    TruncatedMeanCurvature {
        level: f64,
        x_l: f64,
        y_l: f64,
    },
    PowerLaw {
        p: f64,
    },
}

impl NFunctionSpec {
    pub fn truncated(level: f64) -> Result<Self> {
        let (x_l, y_l) = truncation_constants(level)?;
        Ok(Self::TruncatedMeanCurvature { level, x_l, y_l })
    }

    pub fn power_law(p: f64) -> Result<Self> {
        if !(p > 1.0 && p <= 2.0) {
            return domain(format!("power-law exponent must lie in (1, 2], got {p}"));
        }
        Ok(Self::PowerLaw { p })
    }

    /// Truncation level `L`, if this is the truncated kind.
    pub fn level(&self) -> Option<f64> {
        match *self {
            Self::TruncatedMeanCurvature { level, .. } => Some(level),
            Self::PowerLaw { .. } => None,
        }
    }

    /// Global bounds `c1 <= phi <= c2` when they exist.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            Self::TruncatedMeanCurvature { y_l, .. } => Some((y_l, 1.0)),
            Self::PowerLaw { p } if p == 2.0 => Some((1.0, 1.0)),
            Self::PowerLaw { .. } => None,
        }
    }

    /// `phi(t)`.
    pub fn phi(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return domain(format!("phi needs a finite t >= 0, got {t}"));
        }
        match *self {
            Self::TruncatedMeanCurvature { .. } => Ok(self.phi_hat(t * t)),
            Self::PowerLaw { p } => {
                if t == 0.0 && p < 2.0 {
                    return Err(Error::Singularity(format!("t^{} at t = 0", p - 2.0)));
                }
                Ok(t.powf(p - 2.0))
            }
        }
    }

    /// `phi` as a function of `s = t^2` (the generator of the truncated kind).
    ///
    /// For the power-law kind this is `s^((p-2)/2)`, infinite at `s = 0`.
    pub fn phi_hat(&self, s: f64) -> f64 {
        match *self {
            Self::TruncatedMeanCurvature { level, x_l, y_l } => {
                if s <= level {
                    1.0 / (1.0 + s).sqrt()
                } else if s <= level + 1.0 {
                    let d = s - level - 1.0;
                    x_l * d * d + y_l
                } else {
                    y_l
                }
            }
            Self::PowerLaw { p } => s.powf(0.5 * (p - 2.0)),
        }
    }

    /// Derivative of [`Self::phi_hat`] in `s`.
    pub fn phi_hat_prime(&self, s: f64) -> f64 {
        match *self {
            Self::TruncatedMeanCurvature { level, x_l, .. } => {
                if s <= level {
                    -0.5 * (1.0 + s).powf(-1.5)
                } else if s <= level + 1.0 {
                    2.0 * x_l * (s - level - 1.0)
                } else {
                    0.0
                }
            }
            Self::PowerLaw { p } => 0.5 * (p - 2.0) * s.powf(0.5 * (p - 4.0)),
        }
    }

    /// `Phi(t)` as a function of `s = t^2`, i.e. `(1/2) int_0^s phi_hat`.
    pub fn big_phi_sq(&self, s: f64) -> f64 {
        match *self {
            Self::TruncatedMeanCurvature { level, x_l, y_l } => {
                if s <= level {
                    // sqrt(1+s) - 1 without cancellation for small s
                    s / ((1.0 + s).sqrt() + 1.0)
                } else {
                    let at_level = level / ((1.0 + level).sqrt() + 1.0);
                    let cap = |u: f64| {
                        let d = u - level - 1.0;
                        x_l * d * d * d / 3.0 + y_l * u
                    };
                    if s <= level + 1.0 {
                        at_level + 0.5 * (cap(s) - cap(level))
                    } else {
                        at_level + 0.5 * (cap(level + 1.0) - cap(level)) + 0.5 * y_l * (s - level - 1.0)
                    }
                }
            }
            Self::PowerLaw { p } => s.powf(0.5 * p) / p,
        }
    }

    /// `big_phi_sq(s1) - big_phi_sq(s0)` given `ds = s1 - s0`, accurate to
    /// rounding relative to the difference itself when both points share a branch.
    pub fn big_phi_sq_diff(&self, s0: f64, s1: f64, ds: f64) -> f64 {
        match *self {
            Self::TruncatedMeanCurvature { level, x_l, y_l } => {
                let branch = |s: f64| (s > level) as u8 + (s > level + 1.0) as u8;
                match (branch(s0), branch(s1)) {
                    (0, 0) => ds / ((1.0 + s0).sqrt() + (1.0 + s1).sqrt()),
                    (1, 1) => {
                        let (a, b) = (s0 - level - 1.0, s1 - level - 1.0);
                        0.5 * ds * (x_l * (a * a + a * b + b * b) / 3.0 + y_l)
                    }
                    (2, 2) => 0.5 * y_l * ds,
                    _ => self.big_phi_sq(s1) - self.big_phi_sq(s0),
                }
            }
            Self::PowerLaw { .. } => self.big_phi_sq(s1) - self.big_phi_sq(s0),
        }
    }

    /// `Phi(t) = int_0^|t| phi(s) s ds`, evaluated in closed form per branch.
    pub fn big_phi(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return domain(format!("Phi needs a finite argument, got {t}"));
        }
        Ok(self.big_phi_sq(t * t))
    }
}

/// Parameters of the cosh comparison function
/// `zeta(t) = delta cosh(a (t - c)) / cosh(a (j - 1/4 - L) / 2)` with
/// `c = (j - 1/4 + L) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaParams {
    pub delta_alpha: f64,
    pub a: f64,
    pub j: f64,
    pub level: f64,
}

impl ZetaParams {
    pub fn new(delta_alpha: f64, a: f64, j: f64, level: f64) -> Result<Self> {
        let p = Self {
            delta_alpha,
            a,
            j,
            level,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta_alpha > 0.0 && self.a > 0.0 && self.level > 0.0) {
            return domain("zeta needs delta_alpha > 0, a > 0 and L > 0");
        }
        if !(self.j - 0.25 - self.level > 0.0) {
            return domain("zeta needs j - 1/4 - L > 0");
        }
        Ok(())
    }

    /// The critical point `c`, where `zeta' = 0`.
    pub fn center(&self) -> f64 {
        0.5 * (self.j - 0.25 + self.level)
    }

    /// Half-width at which `zeta` returns to `delta_alpha`.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.j - 0.25 - self.level)
    }
}

/// `(zeta(t), zeta'(t))`.
pub fn zeta(params: &ZetaParams, t: f64) -> (f64, f64) {
    let denom = (params.a * params.half_width()).cosh();
    let x = params.a * (t - params.center());
    let scale = params.delta_alpha / denom;
    (scale * x.cosh(), scale * params.a * x.sinh())
}

/// Checks `(phi_1)`-`(phi_3)` on a sample grid and estimates their constants.
///
/// * `phi_1`: `phi > 0` and `(phi(t) t)' > 0`, plus finiteness of `phi` at
///   `0+` (the generator must extend continuously to the origin).
/// * `phi_2`: `l - 1 <= (phi t)'/phi <= m - 1` with `1 < l <= m`.
/// * `phi_3`: `c1 t^(s-1) <= phi(t) t <= c2 t^(s-1)` near zero, `s > 1`.
pub fn check_phi_conditions(spec: &NFunctionSpec, grid: &[f64]) -> Result<ConditionReport> {
    if grid.is_empty() {
        return domain("sample grid is empty");
    }
    if grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return domain("sample grid must contain finite positive points");
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("sample grid must be strictly increasing");
    }

    let mut report = ConditionReport::new("phi1-phi3");
    let flux = |t: f64| spec.phi(t).map(|p| p * t).unwrap_or(f64::NAN);

    if let Err(e) = spec.phi(0.0) {
        report.fail(
            "phi1.finite-at-zero",
            Witness::new(vec![0.0], format!("phi blows up at 0+: {e}")),
        );
    }

    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = f64::NEG_INFINITY;
    for &t in grid {
        let phi = spec.phi(t)?;
        if !(phi > 0.0) {
            report.fail("phi1.positive", Witness::new(vec![t], format!("phi = {phi}")));
            continue;
        }
        let h = diff_step(t).min(1e-3 * t);
        let dflux = central_diff5(flux, t, h);
        if !(dflux > 0.0) {
            report.fail(
                "phi1.flux-increasing",
                Witness::new(vec![t], format!("(phi t)' = {dflux}")),
            );
        }
        let ratio = dflux / phi;
        ratio_min = ratio_min.min(ratio);
        ratio_max = ratio_max.max(ratio);
    }
    report.constant("l_minus_1", ratio_min);
    report.constant("m_minus_1", ratio_max);
    report.constant("l", 1.0 + ratio_min);
    report.constant("m", 1.0 + ratio_max);
    if !(ratio_min > 0.0 && ratio_max.is_finite()) {
        report.fail(
            "phi2.ratio-bounds",
            Witness::new(vec![grid[0]], format!("ratio range [{ratio_min}, {ratio_max}]")),
        );
    }

    // Power behaviour near zero: fit log(phi t) against log t on the lower
    // part of the grid, then take the envelope constants.
    let eta = near_zero_cutoff(grid);
    let (lx, ly): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .filter(|t| **t <= eta)
        .map(|&t| (t.ln(), flux(t).ln()))
        .unzip();
    report.constant("eta", eta);
    match linear_fit(&lx, &ly) {
        Some((_, slope, _)) => {
            let s = slope + 1.0;
            let (mut c1, mut c2) = (f64::INFINITY, 0.0_f64);
            for &t in grid.iter().filter(|t| **t <= eta) {
                let r = flux(t) / t.powf(s - 1.0);
                c1 = c1.min(r);
                c2 = c2.max(r);
            }
            report.constant("s", s);
            report.constant("c1", c1);
            report.constant("c2", c2);
            if !(s > 1.0 && c1 > 0.0 && c2.is_finite()) {
                report.fail(
                    "phi3.power-fit",
                    Witness::new(vec![grid[0]], format!("fitted s = {s}, c1 = {c1}, c2 = {c2}")),
                );
            }
        }
        None => report.fail(
            "phi3.power-fit",
            Witness::new(vec![grid[0]], "fewer than two samples below eta"),
        ),
    }

    if let Some((lo, hi)) = spec.bounds() {
        for &t in grid {
            let phi = spec.phi(t)?;
            if phi < lo || phi > hi {
                report.fail(
                    "bounds",
                    Witness::new(vec![t], format!("phi = {phi} outside [{lo}, {hi}]")),
                );
                break;
            }
        }
    }
    Ok(report)
}

/// Upper end of the window used for the near-zero power fit: the grid points
/// below `min(0.1, first decade above the smallest sample)`.
fn near_zero_cutoff(grid: &[f64]) -> f64 {
    let t0 = grid[0];
    let eta = (10.0 * t0).min(0.1).max(t0);
    let below = grid.iter().filter(|t| **t <= eta).count();
    if below >= 2 {
        eta
    } else {
        grid[1.min(grid.len() - 1)]
    }
}

/// Checks `phi(|zeta'(t)|) <= kappa1 phi(kappa2 zeta(t))` on a grid and reports
/// `supRatio = max phi(|zeta'|) / phi(kappa2 zeta)`.
///
/// When `phi` has global bounds `c1 <= phi <= c2` the verdict is
/// `supRatio <= c2/c1`. Otherwise the ratio is also probed at distances
/// `10^-2 .. 10^-12` from the critical point of `zeta`; growth by more than a
/// factor of ten is reported as unboundedness. A singular evaluation
/// (`zeta' = 0` for a power law) is a failing verdict with its witness.
pub fn check_tilde_phi4(
    spec: &NFunctionSpec,
    params: &ZetaParams,
    kappa2: f64,
    grid: &[f64],
) -> Result<ConditionReport> {
    params.validate()?;
    if !(kappa2 > 0.0) {
        return domain("kappa2 must be positive");
    }
    if grid.is_empty() {
        return domain("sample grid is empty");
    }
    let mut report = ConditionReport::new("tilde-phi4");
    report.constant("kappa2", kappa2);
    report.constant("a", params.a);

    let ratio_at = |t: f64| -> Result<f64> {
        let (z, dz) = zeta(params, t);
        let num = spec.phi(dz.abs())?;
        let den = spec.phi(kappa2 * z)?;
        Ok(num / den)
    };

    let mut sup = 0.0_f64;
    let mut arg_sup = grid[0];
    for &t in grid {
        match ratio_at(t) {
            Ok(r) if r.is_finite() => {
                if r > sup {
                    sup = r;
                    arg_sup = t;
                }
            }
            Ok(r) => {
                sup = f64::INFINITY;
                arg_sup = t;
                report.fail("tilde-phi4.finite", Witness::new(vec![t], format!("ratio = {r}")));
                break;
            }
            Err(e) => {
                sup = f64::INFINITY;
                arg_sup = t;
                report.fail("tilde-phi4.finite", Witness::new(vec![t], e.to_string()));
                break;
            }
        }
    }
    report.constant("supRatio", sup);
    report.constant("argSup", arg_sup);

    match spec.bounds() {
        Some((c1, c2)) => {
            let bound = c2 / c1;
            report.constant("kappa1", bound);
            if sup > bound * (1.0 + 1e-12) {
                report.fail(
                    "tilde-phi4.bounded",
                    Witness::new(vec![arg_sup], format!("supRatio {sup} exceeds c2/c1 = {bound}")),
                );
            }
        }
        None if report.pass => {
            let c = params.center();
            let probe = |d: f64| ratio_at(c + d).unwrap_or(f64::INFINITY);
            let near = probe(1e-12);
            let far = probe(1e-2);
            report.constant("probeRatioFar", far);
            report.constant("probeRatioNear", near);
            if !(near.is_finite() && near <= 10.0 * far) {
                report.fail(
                    "tilde-phi4.bounded",
                    Witness::new(vec![c + 1e-12], format!("ratio grows from {far} to {near} towards the critical point")),
                );
            } else {
                report.constant("kappa1", sup.max(near));
            }
        }
        None => {}
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const X1: f64 = 0.08838834764831845;
    const Y1: f64 = 0.6187184335382291;

    #[test]
    fn constants_at_one_and_three() {
        let (x, y) = truncation_constants(1.0).unwrap();
        assert!((x - X1).abs() < 1e-16 && (y - Y1).abs() < 1e-15);
        let (x, y) = truncation_constants(3.0).unwrap();
        assert_eq!(x, 1.0 / 32.0);
        assert_eq!(y, 15.0 / 32.0);
    }

    #[test]
    fn constants_reject_bad_levels() {
        for l in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(truncation_constants(l), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn y_over_x_is_4l_plus_3() {
        for l in [0.01, 0.5, 1.0, 2.5, 7.0, 100.0] {
            let (x, y) = truncation_constants(l).unwrap();
            assert!((y / x - (4.0 * l + 3.0)).abs() <= 1e-15 * (4.0 * l + 3.0));
            assert!(((1.0 + l).powf(-1.5) / 4.0 - x).abs() <= 1e-15 * x);
        }
    }

    #[test]
    fn phi_examples() {
        let s = NFunctionSpec::truncated(1.0).unwrap();
        assert_eq!(s.phi(0.0).unwrap(), 1.0);
        assert!((s.phi(1.0).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.phi(1.5_f64.sqrt()).unwrap() - 0.6408155204503087).abs() < 1e-14);
        assert!((s.phi(10.0).unwrap() - Y1).abs() < 1e-15);
        assert!(matches!(s.phi(-0.1), Err(Error::Domain(_))));
        let p = NFunctionSpec::power_law(1.5).unwrap();
        assert!(matches!(p.phi(0.0), Err(Error::Singularity(_))));
        assert!((p.phi(4.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(NFunctionSpec::power_law(1.0).is_err());
        assert!(NFunctionSpec::power_law(2.5).is_err());
    }

    #[test]
    fn big_phi_examples() {
        let s = NFunctionSpec::truncated(1.0).unwrap();
        assert_eq!(s.big_phi(0.0).unwrap(), 0.0);
        let v = s.big_phi(1.0).unwrap();
        assert!((v - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((Y1 / 2.0..=0.5).contains(&v));
        assert_eq!(s.big_phi(-1.3).unwrap(), s.big_phi(1.3).unwrap());
        // scipy.integrate.quad of s*phi(s)
        assert!((s.big_phi(1.2).unwrap() - 0.562475941016124).abs() < 1e-12);
        assert!((s.big_phi(1.5).unwrap() - 0.815643974609208).abs() < 1e-12);
        assert!((s.big_phi(3.0).unwrap() - 2.9038186878007313).abs() < 1e-12);
        assert!(s.big_phi(f64::NAN).is_err());
    }

    #[test]
    fn big_phi_sq_is_c1_at_knots() {
        for l in [0.5, 1.0, 3.0, 10.0] {
            let s = NFunctionSpec::truncated(l).unwrap();
            for knot in [l, l + 1.0] {
                let e = 1e-9;
                let left = s.big_phi_sq(knot - e);
                let right = s.big_phi_sq(knot + e);
                assert!((right - left - e * s.phi_hat(knot)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zeta_examples() {
        let p = ZetaParams::new(0.05, 0.01, 5.0, 1.0).unwrap();
        assert_eq!(p.center(), 2.875);
        let (v, d) = zeta(&p, 2.875);
        assert!((v - 0.04999121222477629).abs() < 1e-15);
        assert_eq!(d, 0.0);
        assert!(zeta(&p, 2.0).1 < 0.0 && zeta(&p, 3.5).1 > 0.0);
        for t in [p.center() - p.half_width(), p.center() + p.half_width()] {
            assert!((zeta(&p, t).0 - 0.05).abs() < 1e-15);
        }
        assert!(ZetaParams::new(0.05, 0.01, 1.0, 1.0).is_err());
        assert!(ZetaParams::new(0.0, 0.01, 5.0, 1.0).is_err());
    }

    #[test]
    fn phi_conditions_truncated() {
        let s = NFunctionSpec::truncated(1.0).unwrap();
        let grid = crate::numeric::logspace(1e-4, 10.0, 200);
        let r = check_phi_conditions(&s, &grid).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.get("m_minus_1").unwrap() - 1.0).abs() < 1e-6);
        assert!((r.get("l_minus_1").unwrap() - 0.5).abs() < 0.02);
        assert!(r.get("l").unwrap() <= r.get("m").unwrap());
        assert!((r.get("s").unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn phi_conditions_power_law_fails_at_origin() {
        let s = NFunctionSpec::power_law(1.5).unwrap();
        let grid = crate::numeric::logspace(1e-4, 10.0, 200);
        let r = check_phi_conditions(&s, &grid).unwrap();
        assert!(!r.pass);
        assert!(r.witness.is_some());
        assert!((r.get("s").unwrap() - 1.5).abs() < 1e-6);
        assert!((r.get("l_minus_1").unwrap() - 0.5).abs() < 1e-6, "{:?}", r.constants);
        assert_eq!(r.failures, vec!["phi1.finite-at-zero".to_string()]);
    }

    #[test]
    fn phi_conditions_reject_bad_grids() {
        let s = NFunctionSpec::truncated(1.0).unwrap();
        assert!(check_phi_conditions(&s, &[]).is_err());
        assert!(check_phi_conditions(&s, &[0.0, 1.0]).is_err());
        assert!(check_phi_conditions(&s, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn tilde_phi4_truncated_bounded_by_inverse_y() {
        let s = NFunctionSpec::truncated(1.0).unwrap();
        for (delta, a) in [(0.05, 0.01), (0.5, 2.0), (3.0, 5.0)] {
            let p = ZetaParams::new(delta, a, 5.0, 1.0).unwrap();
            let grid = crate::numeric::linspace(-20.0, 25.0, 1000);
            let r = check_tilde_phi4(&s, &p, 1.0, &grid).unwrap();
            assert!(r.pass);
            assert!(r.get("supRatio").unwrap() <= 1.0 / Y1 + 1e-12);
        }
    }

    #[test]
    fn tilde_phi4_power_law_diverges() {
        let s = NFunctionSpec::power_law(1.5).unwrap();
        let p = ZetaParams::new(0.05, 0.01, 5.0, 1.0).unwrap();
        let c = p.center();
        let grid = vec![c - 1.0, c - 1e-3, c - 1e-7, c + 5e-7, c + 1.0];
        let r = check_tilde_phi4(&s, &p, 1.0, &grid).unwrap();
        assert!(!r.pass);
        assert!(r.witness.is_some());
        // including the critical point itself is a singular evaluation
        let r = check_tilde_phi4(&s, &p, 1.0, &[c - 1.0, c, c + 1.0]).unwrap();
        assert!(!r.pass);
        assert_eq!(r.get("supRatio"), Some(f64::INFINITY));
        assert_eq!(r.witness.unwrap().point, vec![c]);
    }

    #[test]
    fn tilde_phi4_constant_phi_passes() {
        let s = NFunctionSpec::power_law(2.0).unwrap();
        let p = ZetaParams::new(0.05, 0.01, 5.0, 1.0).unwrap();
        let grid = crate::numeric::linspace(-5.0, 10.0, 301);
        let r = check_tilde_phi4(&s, &p, 1.0, &grid).unwrap();
        assert!(r.pass);
        assert!(r.get("supRatio").unwrap() <= 1.0);
    }

    #[test]
    fn phi_is_nonincreasing_but_tilde_phi4_holds() {
        let s = NFunctionSpec::truncated(2.0).unwrap();
        let ts = crate::numeric::linspace(0.0, 5.0, 2001);
        assert!(ts.windows(2).all(|w| s.phi(w[1]).unwrap() <= s.phi(w[0]).unwrap()));
        assert!(ts.windows(2).any(|w| s.phi(w[1]).unwrap() < s.phi(w[0]).unwrap()));
        let p = ZetaParams::new(0.1, 0.5, 4.0, 2.0).unwrap();
        assert!(check_tilde_phi4(&s, &p, 1.0, &ts).unwrap().pass);
    }
}
