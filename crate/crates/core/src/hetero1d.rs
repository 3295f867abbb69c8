//! One-dimensional heteroclinic profile of
//! `-(phi_L(|q'|) q')' + a(t) V_alpha'(q) = 0`.
//!
//! The profile is computed on `[0, T]` as the minimiser of
//!
//! ```text
//! E(q) = sum_i h Phi_L(|q_{i+1} - q_i| / h) + sum_i w_i a(t_i) V(q_i)
//! ```
//!
//! (trapezoid weights `w_i`) with `q(0) = 0`, `q(T) = alpha` and `0 <= q <= alpha`.
//! The odd extension gives the full transition from `-alpha` to `alpha`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::Potential;
use crate::nfunc::NFunctionSpec;
use crate::numeric::linear_fit;
use crate::optim::{minimize, IterRecord, MinimizeConfig, Objective};
use crate::report::Witness;

/// Smallest admissible `alpha * T`: the tanh tail `2 alpha exp(-2 sqrt 2 alpha T)`
/// is then below `3e-5 alpha`.
pub const MIN_ALPHA_T: f64 = 4.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Profile1D {
    pub t_max: f64,
    /// Number of intervals; there are `intervals + 1` nodes.
    pub intervals: usize,
    pub h: f64,
    pub values: Vec<f64>,
    pub alpha: f64,
    pub level: f64,
    /// `a(t)` sampled at the nodes.
    pub coefficient: Vec<f64>,
    pub history: Vec<IterRecord>,
    pub converged: bool,
}

impl Profile1D {
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.intervals).map(move |i| i as f64 * self.h)
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// Piecewise-linear evaluation, extended oddly to `t < 0` and by `alpha` past `T`.
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return -self.eval(-t);
        }
        if t >= self.t_max {
            return self.alpha;
        }
        let x = t / self.h;
        let i = (x.floor() as usize).min(self.intervals - 1);
        let s = x - i as f64;
        (1.0 - s) * self.values[i] + s * self.values[i + 1]
    }

    /// `q'` at the nodes: central differences inside, one-sided at the ends.
    pub fn derivative(&self) -> Vec<f64> {
        let n = self.intervals;
        let q = &self.values;
        (0..=n)
            .map(|i| {
                if i == 0 {
                    (q[1] - q[0]) / self.h
                } else if i == n {
                    (q[n] - q[n - 1]) / self.h
                } else {
                    (q[i + 1] - q[i - 1]) / (2.0 * self.h)
                }
            })
            .collect()
    }

    /// `a(t) == 1` at every node.
    pub fn has_unit_coefficient(&self) -> bool {
        self.coefficient.iter().all(|a| *a == 1.0)
    }

    pub fn energy(&self) -> f64 {
        self.objective().energy(&self.values)
    }

    pub(crate) fn objective(&self) -> HeteroObjective {
        HeteroObjective::new(
            self.h,
            self.coefficient.clone(),
            Potential::quartic(self.alpha).expect("profile alpha is positive"),
            NFunctionSpec::truncated(self.level).expect("profile level is positive"),
        )
    }

    /// Writes `t,q,dq` at node resolution.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "t,q,dq")?;
        for ((t, q), dq) in self.nodes().zip(&self.values).zip(self.derivative()) {
            writeln!(out, "{t},{q},{dq}")?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) struct HeteroObjective {
    h: f64,
    a: Vec<f64>,
    pot: Potential,
    phi: NFunctionSpec,
    free: Vec<bool>,
    scale: Vec<f64>,
}

impl HeteroObjective {
    fn new(h: f64, a: Vec<f64>, pot: Potential, phi: NFunctionSpec) -> Self {
        let n = a.len();
        let free = (0..n).map(|i| i > 0 && i + 1 < n).collect();
        let curv = pot.well_curvature().abs();
        let scale = a.iter().map(|ai| 2.0 / h + h * ai * curv).collect();
        Self {
            h,
            a,
            pot,
            phi,
            free,
            scale,
        }
    }
}

impl Objective for HeteroObjective {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn n_terms(&self) -> usize {
        self.a.len() - 1
    }

    fn terms(&self, q: &[f64], out: &mut [f64]) {
        let h = self.h;
        for (i, o) in out.iter_mut().enumerate() {
            let d = (q[i + 1] - q[i]) / h;
            *o = h * self.phi.big_phi_sq(d * d)
                + 0.5 * h * (self.a[i] * self.pot.value(q[i]) + self.a[i + 1] * self.pot.value(q[i + 1]));
        }
    }

    fn term_diffs(&self, q: &[f64], r: &[f64], out: &mut [f64]) {
        let h = self.h;
        let vdiff = |i: usize| self.a[i] * self.pot.value_diff(q[i], r[i], r[i] - q[i]);
        for (i, o) in out.iter_mut().enumerate() {
            let d0 = (q[i + 1] - q[i]) / h;
            let d1 = (r[i + 1] - r[i]) / h;
            let dd = ((r[i + 1] - q[i + 1]) - (r[i] - q[i])) / h;
            *o = h * self.phi.big_phi_sq_diff(d0 * d0, d1 * d1, dd * (d1 + d0))
                + 0.5 * h * (vdiff(i) + vdiff(i + 1));
        }
    }

    fn gradient(&self, q: &[f64], g: &mut [f64]) {
        let h = self.h;
        let n = q.len();
        let flux = |i: usize| {
            let d = (q[i + 1] - q[i]) / h;
            self.phi.phi_hat(d * d) * d
        };
        g[0] = 0.0;
        g[n - 1] = 0.0;
        let mut left = flux(0);
        for i in 1..n - 1 {
            let right = flux(i);
            g[i] = left - right + h * self.a[i] * self.pot.d1(q[i]);
            left = right;
        }
    }

    fn free(&self) -> &[bool] {
        &self.free
    }

    fn lower(&self) -> f64 {
        0.0
    }

    fn upper(&self) -> f64 {
        self.pot.alpha
    }

    fn scaling(&self) -> &[f64] {
        &self.scale
    }
}

/// Computes the heteroclinic half-profile on `[0, T]` with `intervals` cells.
///
/// Starts from `alpha tanh(alpha sqrt2 t)`; fails with [`Error::Convergence`]
/// if the reduced gradient does not reach `cfg.tol_grad`.
pub fn solve_heteroclinic(
    alpha: f64,
    level: f64,
    coeff: impl Fn(f64) -> f64,
    t_max: f64,
    intervals: usize,
    cfg: &MinimizeConfig,
) -> Result<Profile1D> {
    let pot = Potential::quartic(alpha)?;
    let phi = NFunctionSpec::truncated(level)?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return domain("T must be positive");
    }
    if alpha * t_max < MIN_ALPHA_T {
        return domain(format!(
            "T = {t_max} too small for alpha = {alpha}: need alpha T >= {MIN_ALPHA_T}"
        ));
    }
    if intervals < 200 {
        return domain(format!("need at least 200 intervals, got {intervals}"));
    }
    let h = t_max / intervals as f64;
    let a: Vec<f64> = (0..=intervals).map(|i| coeff(i as f64 * h)).collect();
    if let Some((i, v)) = a.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return domain(format!("coefficient a(t) = {v} at t = {} is not positive", i as f64 * h));
    }

    let lambda = alpha * std::f64::consts::SQRT_2;
    let mut q0: Vec<f64> = (0..=intervals)
        .map(|i| alpha * (lambda * i as f64 * h).tanh())
        .collect();
    q0[0] = 0.0;
    q0[intervals] = alpha;

    let obj = HeteroObjective::new(h, a.clone(), pot, phi);
    let res = minimize(&obj, &q0, cfg);
    if !res.converged {
        let grad_inf = res.history.last().map_or(f64::NAN, |r| r.grad_inf);
        return Err(Error::Convergence {
            iterations: res.iterations,
            grad_inf,
            history: res.history,
        });
    }
    Ok(Profile1D {
        t_max,
        intervals,
        h,
        values: res.x,
        alpha,
        level,
        coefficient: a,
        history: res.history,
        converged: true,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketReport {
    pub pass: bool,
    /// `min_i q(t_i) - alpha tanh(alpha sqrt2 t_i)`.
    pub min_slack: f64,
    pub tol_lower: f64,
    /// Smallest `kappa >= 1` with `q(t) <= alpha tanh(kappa alpha sqrt2 t) + tol`.
    pub kappa: f64,
    /// The same bound written with the constant as a divisor of the argument,
    /// `q(t) <= alpha tanh(alpha sqrt2 t / kappa_divisor)`; equals `1 / kappa`.
    pub kappa_divisor: f64,
    pub witness: Option<Witness>,
}

/// Smallest `kappa >= 1` with `q(t_i) <= alpha tanh(kappa alpha sqrt2 t_i) + tol` at all nodes.
pub fn fit_upper_kappa(profile: &Profile1D, tol: f64) -> f64 {
    let alpha = profile.alpha;
    let lambda = alpha * std::f64::consts::SQRT_2;
    let mut kappa = 1.0_f64;
    for (t, q) in profile.nodes().zip(&profile.values) {
        if t <= 0.0 {
            continue;
        }
        let r = ((q - tol) / alpha).min(1.0);
        // a few ulps of slack absorb the rounding of q / alpha
        if r <= (lambda * t).tanh() * (1.0 + 4.0 * f64::EPSILON) {
            continue;
        }
        // atanh is ill-conditioned once q has saturated; leave such nodes to the tolerance
        if r >= 1.0 - 1e-9 {
            continue;
        }
        kappa = kappa.max(r.atanh() / (lambda * t));
    }
    kappa
}

/// Checks `alpha tanh(alpha sqrt2 t) <= q(t)` node-wise (up to `tol_lower`)
/// and fits the upper tanh constant.
pub fn check_tanh_bracket(profile: &Profile1D, tol_lower: f64) -> Result<BracketReport> {
    if !profile.converged {
        return domain("tanh bracket needs a converged profile");
    }
    if !profile.has_unit_coefficient() {
        return domain("tanh bracket is only available for a(t) = 1");
    }
    if !(tol_lower >= 0.0) {
        return domain("tolerance must be non-negative");
    }
    let alpha = profile.alpha;
    let lambda = alpha * std::f64::consts::SQRT_2;
    let mut min_slack = f64::INFINITY;
    let mut witness = None;
    for (t, q) in profile.nodes().zip(&profile.values) {
        let slack = q - alpha * (lambda * t).tanh();
        if slack < min_slack {
            min_slack = slack;
            if slack < -tol_lower {
                witness = Some(Witness::new(vec![t, *q], format!("q below the tanh lower bound by {}", -slack)));
            }
        }
    }
    let kappa = fit_upper_kappa(profile, tol_lower);
    Ok(BracketReport {
        pass: min_slack >= -tol_lower,
        min_slack,
        tol_lower,
        kappa,
        kappa_divisor: 1.0 / kappa,
        witness,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    pub theta1: f64,
    pub theta2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub kappa: f64,
    pub fit_window: (f64, f64),
    /// RMS residuals of the two log-linear fits.
    pub residual_theta: f64,
    pub residual_beta: f64,
}

/// Fits `alpha - q(t) <= theta1 exp(-theta2 t)` and `q'(t) <= beta1 exp(-beta2 t)`
/// on the nodes inside `window`.
///
/// The rates come from least squares on the logarithms; the prefactors are
/// the smallest values for which the bounds hold on every fitted node.
pub fn fit_decay(profile: &Profile1D, window: (f64, f64)) -> Result<DecayFit> {
    let (a, b) = window;
    if !(a > 0.0 && b > a && b < profile.t_max) {
        return domain(format!("fit window ({a}, {b}) must lie inside (0, {})", profile.t_max));
    }
    let alpha = profile.alpha;
    let floor = 10.0 * f64::EPSILON * alpha;
    let dq = profile.derivative();
    let (mut ts, mut lg, mut ld) = (vec![], vec![], vec![]);
    for (i, t) in profile.nodes().enumerate() {
        if t < a || t > b {
            continue;
        }
        let gap = alpha - profile.values[i];
        if !(gap > floor) {
            return domain(format!("alpha - q underflows at t = {t} ({gap:e})"));
        }
        if !(dq[i] > 0.0) {
            return domain(format!("q' is not positive at t = {t}"));
        }
        ts.push(t);
        lg.push(gap.ln());
        ld.push(dq[i].ln());
    }
    let Some((_, s_gap, res_gap)) = linear_fit(&ts, &lg) else {
        return domain("fit window holds fewer than two nodes");
    };
    let (_, s_d, res_d) = linear_fit(&ts, &ld).expect("same abscissae as the gap fit");
    let (theta2, beta2) = (-s_gap, -s_d);
    if !(theta2 > 0.0 && beta2 > 0.0) {
        return domain(format!("data in the window is not decaying (rates {theta2}, {beta2})"));
    }
    let theta1 = ts
        .iter()
        .zip(&lg)
        .map(|(t, l)| (l + theta2 * t).exp())
        .fold(0.0, f64::max);
    let beta1 = ts
        .iter()
        .zip(&ld)
        .map(|(t, l)| (l + beta2 * t).exp())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        theta1,
        theta2,
        beta1,
        beta2,
        kappa: fit_upper_kappa(profile, 0.0),
        fit_window: window,
        residual_theta: res_gap,
        residual_beta: res_d,
    })
}

/// A profile holding exactly `alpha tanh(alpha sqrt2 t)` at the nodes.
pub fn tanh_profile(alpha: f64, level: f64, t_max: f64, intervals: usize) -> Profile1D {
    let h = t_max / intervals as f64;
    let lambda = alpha * std::f64::consts::SQRT_2;
    Profile1D {
        t_max,
        intervals,
        h,
        values: (0..=intervals).map(|i| alpha * (lambda * (i as f64 * h)).tanh()).collect(),
        alpha,
        level,
        coefficient: vec![1.0; intervals + 1],
        history: vec![],
        converged: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> MinimizeConfig {
        MinimizeConfig::default()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(solve_heteroclinic(0.1, 1.0, |_| 1.0, 20.0, 400, &cfg()), Err(Error::Domain(_))));
        assert!(matches!(solve_heteroclinic(0.1, 1.0, |_| 1.0, 80.0, 100, &cfg()), Err(Error::Domain(_))));
        assert!(matches!(solve_heteroclinic(0.1, 1.0, |_| 0.0, 80.0, 400, &cfg()), Err(Error::Domain(_))));
        assert!(matches!(solve_heteroclinic(0.1, -1.0, |_| 1.0, 80.0, 400, &cfg()), Err(Error::Domain(_))));
    }

    #[test]
    fn non_convergence_carries_history() {
        let c = MinimizeConfig {
            max_iter: 3,
            tol_grad: 1e-14,
            ..cfg()
        };
        match solve_heteroclinic(0.1, 1.0, |_| 1.0, 80.0, 400, &c) {
            Err(Error::Convergence { history, iterations, .. }) => {
                assert_eq!(iterations, 3);
                assert_eq!(history.len(), 4);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = tanh_profile(0.1, 1.0, 40.0, 200);
        let obj = p.objective();
        let mut q = p.values.clone();
        // perturb to leave the tanh shape
        for (i, v) in q.iter_mut().enumerate().skip(1).take(199) {
            *v = (*v * (1.0 + 0.3 * ((i as f64) * 0.37).sin())).clamp(0.0, 0.1);
        }
        let mut g = vec![0.0; q.len()];
        obj.gradient(&q, &mut g);
        let gmax = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in [1, 7, 50, 123, 199] {
            let e = 1e-6;
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[i] += e;
            qm[i] -= e;
            let fd = (obj.energy(&qp) - obj.energy(&qm)) / (2.0 * e);
            assert!((fd - g[i]).abs() <= 1e-6 * gmax, "node {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn tanh_bracket_examples() {
        let p = tanh_profile(0.1, 1.0, 80.0, 1600);
        let lb = 0.1 * (0.1 * std::f64::consts::SQRT_2).tanh();
        assert!((lb - 0.014048602910082201).abs() < 1e-16, "{lb}");
        let r = check_tanh_bracket(&p, 0.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.kappa, 1.0);
        let mut var = p.clone();
        var.coefficient[5] = 2.0;
        assert!(check_tanh_bracket(&var, 0.0).is_err());
    }

    #[test]
    fn decay_fit_of_exact_tanh() {
        let p = tanh_profile(0.1, 1.0, 80.0, 1600);
        let fit = fit_decay(&p, (10.0, 40.0)).unwrap();
        let want = 2.0 * std::f64::consts::SQRT_2 * 0.1;
        assert!((fit.theta2 - want).abs() <= 0.02 * want, "{}", fit.theta2);
        assert!(fit.theta1 > 0.0 && fit.beta1 > 0.0 && fit.beta2 > 0.0);
        let a = fit_decay(&p, (10.0, 25.0)).unwrap();
        let b = fit_decay(&p, (25.0, 40.0)).unwrap();
        assert!((a.theta2 - b.theta2).abs() <= 0.05 * b.theta2);
        assert!(fit_decay(&p, (0.0, 10.0)).is_err());
        assert!(fit_decay(&p, (10.0, 90.0)).is_err());
    }

    #[test]
    fn decay_fit_rejects_underflow() {
        let p = tanh_profile(0.5, 1.0, 100.0, 1000);
        assert!(matches!(fit_decay(&p, (50.0, 90.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn eval_is_odd_and_saturates() {
        let p = tanh_profile(0.1, 1.0, 80.0, 800);
        assert_eq!(p.eval(-3.3), -p.eval(3.3));
        assert_eq!(p.eval(100.0), 0.1);
        assert_eq!(p.eval(0.0), 0.0);
    }
}
