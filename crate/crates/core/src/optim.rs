//! Projected Barzilai-Borwein descent with Armijo backtracking on a box.
//!
//! The search direction is the diagonally scaled projected gradient
//! `d = P(x - lambda D^-1 g) - x`, with `lambda` the BB1 step measured in the
//! `D` metric. Backtracking halves along `d` until
//! `E(x + t d) - E(x) <= sigma t g.d`. Energy differences are formed term by
//! term from the step itself, so the sufficient-decrease test stays meaningful
//! when the decrease is far below the rounding error of the total energy.

use serde::{Deserialize, Serialize};

use crate::numeric::pairwise_sum;

/// A separable objective `E(x) = sum_k term_k(x)` on a box with fixed entries.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn n_terms(&self) -> usize;
    /// Writes every term of the energy into `out` (length [`Self::n_terms`]).
    fn terms(&self, x: &[f64], out: &mut [f64]);
    /// Gradient with zero entries at fixed coordinates.
    fn gradient(&self, x: &[f64], g: &mut [f64]);
    fn free(&self) -> &[bool];
    fn lower(&self) -> f64;
    fn upper(&self) -> f64;
    /// Positive diagonal scaling of the descent direction.
    fn scaling(&self) -> &[f64];

    fn energy(&self, x: &[f64]) -> f64 {
        let mut t = vec![0.0; self.n_terms()];
        self.terms(x, &mut t);
        pairwise_sum(&t)
    }

    /// `term_k(y) - term_k(x)` for every term. Implementations should avoid
    /// the cancellation of subtracting two nearly equal terms.
    fn term_diffs(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let mut tx = vec![0.0; self.n_terms()];
        self.terms(x, &mut tx);
        self.terms(y, out);
        for (o, a) in out.iter_mut().zip(&tx) {
            *o -= a;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeConfig {
    pub tol_grad: f64,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub sigma: f64,
    pub step_min: f64,
    pub step_max: f64,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            tol_grad: 1e-10,
            max_iter: 50_000,
            sigma: 1e-4,
            step_min: 1e-10,
            step_max: 1e10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub k: usize,
    pub energy: f64,
    #[serde(rename = "gradInf")]
    pub grad_inf: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    MaxIter,
    /// Backtracking could not produce a decrease above rounding level.
    Stalled,
}

#[derive(Clone, Debug)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    /// One record per accepted iterate, starting with the initial point (`k = 0`).
    pub history: Vec<IterRecord>,
    pub converged: bool,
    pub stop: StopReason,
    pub iterations: usize,
}

/// Infinity norm of the projected gradient `x - P(x - g)` over free coordinates.
pub fn projected_grad_inf(x: &[f64], g: &[f64], free: &[bool], lo: f64, hi: f64) -> f64 {
    x.iter()
        .zip(g)
        .zip(free)
        .filter(|(_, f)| **f)
        .map(|((xi, gi), _)| (xi - (xi - gi).clamp(lo, hi)).abs())
        .fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    pairwise_sum(&prods)
}

pub fn minimize<O: Objective + ?Sized>(obj: &O, x0: &[f64], cfg: &MinimizeConfig) -> MinimizeResult {
    let n = obj.dim();
    assert_eq!(x0.len(), n, "initial point has wrong dimension");
    let (lo, hi) = (obj.lower(), obj.upper());
    let free = obj.free();
    let scale = obj.scaling();

    let mut x: Vec<f64> = x0
        .iter()
        .zip(free)
        .map(|(v, f)| if *f { v.clamp(lo, hi) } else { *v })
        .collect();
    let mut diff = vec![0.0; obj.n_terms()];
    let mut energy = obj.energy(&x);
    let mut g = vec![0.0; n];
    obj.gradient(&x, &mut g);
    let mut gnorm = projected_grad_inf(&x, &g, free, lo, hi);

    let mut history = vec![IterRecord {
        k: 0,
        energy,
        grad_inf: gnorm,
    }];

    // first step: unit Jacobi step, capped so no coordinate moves by more than the box width
    let max_step = (0..n)
        .filter(|&i| free[i])
        .map(|i| (g[i] / scale[i]).abs())
        .fold(0.0, f64::max);
    let mut lambda = if max_step > 0.0 {
        (0.1 * (hi - lo) / max_step).min(1.0)
    } else {
        1.0
    };

    let mut d = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut k = 0;
    let mut stop = StopReason::MaxIter;

    while gnorm > cfg.tol_grad {
        if k >= cfg.max_iter {
            stop = StopReason::MaxIter;
            break;
        }
        for i in 0..n {
            d[i] = if free[i] {
                (x[i] - lambda * g[i] / scale[i]).clamp(lo, hi) - x[i]
            } else {
                0.0
            };
        }
        let slope = dot(&g, &d);
        if !(slope < 0.0) {
            stop = StopReason::Stalled;
            break;
        }
        let mut t = 1.0;
        let mut accepted = false;
        let mut delta_e = 0.0;
        while t > 1e-20 {
            for i in 0..n {
                trial[i] = if free[i] {
                    (x[i] + t * d[i]).clamp(lo, hi)
                } else {
                    x[i]
                };
            }
            obj.term_diffs(&x, &trial, &mut diff);
            delta_e = pairwise_sum(&diff);
            if delta_e <= cfg.sigma * t * slope {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            stop = StopReason::Stalled;
            break;
        }
        k += 1;
        obj.gradient(&trial, &mut g_new);
        for i in 0..n {
            s[i] = trial[i] - x[i];
            y[i] = g_new[i] - g[i];
        }
        let sy = dot(&s, &y);
        let sds: Vec<f64> = s.iter().zip(scale).map(|(si, di)| si * si * di).collect();
        let sds = pairwise_sum(&sds);
        lambda = if sy > 0.0 {
            (sds / sy).clamp(cfg.step_min, cfg.step_max)
        } else {
            cfg.step_max.min(1e3 * lambda.max(1.0))
        };
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut g, &mut g_new);
        energy += delta_e;
        gnorm = projected_grad_inf(&x, &g, free, lo, hi);
        history.push(IterRecord {
            k,
            energy,
            grad_inf: gnorm,
        });
    }
    let converged = gnorm <= cfg.tol_grad;
    if converged {
        stop = StopReason::Converged;
    }
    MinimizeResult {
        x,
        history,
        converged,
        stop,
        iterations: k,
    }
}
