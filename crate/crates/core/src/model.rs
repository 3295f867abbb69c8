//! The double-well family `V_alpha` and the weight `A(x, y)`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::nfunc::NFunctionSpec;
use crate::report::{ConditionReport, Witness};

/// `8 / (3 sqrt 3)`: the maximum of `|V_1'|` over `[-1, 1]` for the quartic.
pub const QUARTIC_SLOPE_BOUND: f64 = 1.539_600_717_839_002;

/// A potential tabulated with its first two derivatives, interpolated by cubic
/// Hermite segments (value from `V, V'`, slope from `V', V''`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialTable {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    /// Family-wide bound on `max |V'|` over `|t| <= alpha`, supplied by the table author.
    pub slope_bound: Option<f64>,
}

impl PotentialTable {
    pub fn new(t: Vec<f64>, v: Vec<f64>, v1: Vec<f64>, v2: Vec<f64>) -> Result<Self> {
        let n = t.len();
        if n < 2 || v.len() != n || v1.len() != n || v2.len() != n {
            return domain("potential table needs at least two rows of t,V,V1,V2");
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return domain("potential table abscissae must be strictly increasing");
        }
        Ok(Self {
            t,
            v,
            v1,
            v2,
            slope_bound: None,
        })
    }

    /// Reads CSV with header `t,V,V1,V2`.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        check_header(rdr.headers()?, &["t", "V", "V1", "V2"])?;
        let (mut t, mut v, mut v1, mut v2) = (vec![], vec![], vec![], vec![]);
        for rec in rdr.deserialize::<(f64, f64, f64, f64)>() {
            let (a, b, c, d) = rec?;
            t.push(a);
            v.push(b);
            v1.push(c);
            v2.push(d);
        }
        Self::new(t, v, v1, v2)
    }

    fn locate(&self, x: f64) -> Option<(usize, f64, f64)> {
        let n = self.t.len();
        if !(x >= self.t[0] && x <= self.t[n - 1]) {
            return None;
        }
        let i = match self.t.partition_point(|v| *v <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.t[i + 1] - self.t[i];
        Some((i, (x - self.t[i]) / h, h))
    }

    fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, s: f64, h: f64) -> (f64, f64) {
        let s2 = s * s;
        let s3 = s2 * s;
        let val = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * d1;
        let der = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * h * d0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * h * d1)
            / h;
        (val, der)
    }

    fn eval(&self, x: f64, order: u8) -> f64 {
        let Some((i, s, h)) = self.locate(x) else {
            return f64::NAN;
        };
        match order {
            0 => Self::hermite(self.v[i], self.v[i + 1], self.v1[i], self.v1[i + 1], s, h).0,
            1 => Self::hermite(self.v1[i], self.v1[i + 1], self.v2[i], self.v2[i + 1], s, h).0,
            _ => Self::hermite(self.v1[i], self.v1[i + 1], self.v2[i], self.v2[i + 1], s, h).1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum PotentialForm {
    /// `V(t) = (t^2 - alpha^2)^2`
    Quartic,
    Tabulated(PotentialTable),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub alpha: f64,
    pub form: PotentialForm,
}

impl Potential {
    pub fn quartic(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return domain(format!("alpha must be positive, got {alpha}"));
        }
        Ok(Self {
            alpha,
            form: PotentialForm::Quartic,
        })
    }

    pub fn tabulated(alpha: f64, table: PotentialTable) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return domain(format!("alpha must be positive, got {alpha}"));
        }
        Ok(Self {
            alpha,
            form: PotentialForm::Tabulated(table),
        })
    }

    /// `V`, `V'` or `V''` at `t`.
    pub fn eval(&self, t: f64, order: u8) -> Result<f64> {
        if order > 2 {
            return domain(format!("potential derivative order {order} is not supported"));
        }
        let v = match order {
            0 => self.value(t),
            1 => self.d1(t),
            _ => self.d2(t),
        };
        if v.is_nan() {
            return domain(format!("t = {t} outside the tabulated range"));
        }
        Ok(v)
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match &self.form {
            PotentialForm::Quartic => {
                let d = t * t - self.alpha * self.alpha;
                d * d
            }
            PotentialForm::Tabulated(tab) => tab.eval(t, 0),
        }
    }

    /// `V(t1) - V(t0)` given `dt = t1 - t0`, without cancellation for the quartic.
    #[inline]
    pub fn value_diff(&self, t0: f64, t1: f64, dt: f64) -> f64 {
        match &self.form {
            PotentialForm::Quartic => {
                let a2 = self.alpha * self.alpha;
                dt * (t1 + t0) * ((t1 * t1 - a2) + (t0 * t0 - a2))
            }
            PotentialForm::Tabulated(tab) => tab.eval(t1, 0) - tab.eval(t0, 0),
        }
    }

    #[inline]
    pub fn d1(&self, t: f64) -> f64 {
        match &self.form {
            PotentialForm::Quartic => 4.0 * t * (t * t - self.alpha * self.alpha),
            PotentialForm::Tabulated(tab) => tab.eval(t, 1),
        }
    }

    #[inline]
    pub fn d2(&self, t: f64) -> f64 {
        match &self.form {
            PotentialForm::Quartic => 12.0 * t * t - 4.0 * self.alpha * self.alpha,
            PotentialForm::Tabulated(tab) => tab.eval(t, 2),
        }
    }

    /// `V''(alpha)`, the curvature of the well.
    pub fn well_curvature(&self) -> f64 {
        self.d2(self.alpha)
    }
}

/// Max of `|V_alpha'|` over `|t| <= alpha` for the quartic, attained at `alpha/sqrt 3`.
pub fn quartic_slope_max(alpha: f64) -> f64 {
    QUARTIC_SLOPE_BOUND * alpha.powi(3)
}

/// Checks `(V1)`-`(V5)` for the quartic family on `alphas` in `(0, lambda)`.
///
/// `(V3)` is verified against `C(lambda) = 8/(3 sqrt 3) lambda^3`. `(V4)` and
/// `(V5)` constants are fitted on `|t - alpha| <= window * alpha` (and on
/// `[0, alpha + window * alpha]` for `(V5)`) and reported per alpha.
pub fn check_potential_family(
    alphas: &[f64],
    lambda: f64,
    phi: &NFunctionSpec,
) -> Result<ConditionReport> {
    check_potential_family_window(alphas, lambda, phi, 0.25)
}

pub fn check_potential_family_window(
    alphas: &[f64],
    lambda: f64,
    phi: &NFunctionSpec,
    window: f64,
) -> Result<ConditionReport> {
    if !(lambda > 0.0) {
        return domain("lambda must be positive");
    }
    if alphas.is_empty() {
        return domain("no alphas given");
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < lambda)) {
        return domain(format!("alpha {a} outside (0, {lambda})"));
    }
    if !(window > 0.0 && window < 1.0) {
        return domain("fit window must lie in (0, 1)");
    }
    let mut report = ConditionReport::new("V1-V5");
    let bound = quartic_slope_max(lambda);
    report.constant("C_lambda", bound);

    for (idx, &alpha) in alphas.iter().enumerate() {
        let pot = Potential::quartic(alpha)?;
        let tag = format!("alpha[{idx}]");
        report.constant(&tag.to_string(), alpha);

        // (V1), (V2)
        let samples = 2001;
        for k in 0..samples {
            let t = -3.0 * alpha + 6.0 * alpha * k as f64 / (samples - 1) as f64;
            let v = pot.value(t);
            let at_well = (t.abs() - alpha).abs() <= 1e-15 * alpha;
            if v < 0.0 || (v == 0.0 && !at_well) {
                report.fail("V1", Witness::new(vec![alpha, t], format!("V = {v}")));
                break;
            }
            if pot.value(-t) != v {
                report.fail("V2.even", Witness::new(vec![alpha, t], "V(-t) != V(t)"));
                break;
            }
        }
        if pot.value(alpha) != 0.0 || pot.value(-alpha) != 0.0 {
            report.fail("V1.zeros", Witness::new(vec![alpha], "V(+-alpha) != 0"));
        }
        if !(pot.d2(alpha) > 0.0 && pot.d2(-alpha) > 0.0) {
            report.fail("V2.curvature", Witness::new(vec![alpha], "V''(+-alpha) <= 0"));
        }

        // (V3): sampled max plus the analytic maximiser
        let mut vmax = pot.d1(alpha / 3f64.sqrt()).abs();
        for k in 0..=4000 {
            let t = alpha * k as f64 / 4000.0;
            vmax = vmax.max(pot.d1(t).abs());
        }
        report.constant(&format!("{tag}.maxSlope"), vmax);
        if vmax > bound + 1e-12 {
            report.fail("V3", Witness::new(vec![alpha], format!("max |V'| = {vmax} > C = {bound}")));
        }

        // (V4): w1 Phi(|t - alpha|) <= V(t) <= w2 Phi(|t - alpha|)
        let (w1, w2) = fit_v4(&pot, phi, window);
        report.constant(&format!("{tag}.w1"), w1);
        report.constant(&format!("{tag}.w2"), w2);
        if !(w1 > 0.0 && w2.is_finite() && w1 <= w2) {
            report.fail("V4", Witness::new(vec![alpha], format!("w1 = {w1}, w2 = {w2}")));
        }

        // (V5)
        let fit = fit_v5(&pot, phi, window);
        report.constant(&format!("{tag}.omega1"), fit.omega1);
        report.constant(&format!("{tag}.omega2"), fit.omega2);
        report.constant(&format!("{tag}.omega3"), fit.omega3);
        report.constant(&format!("{tag}.omega4"), fit.omega4);
        report.constant(&format!("{tag}.tau"), fit.tau);
        if !(fit.omega1 > 0.0 && fit.omega3.is_finite() && fit.omega1 <= fit.omega3) {
            report.fail("V5", Witness::new(vec![alpha], format!("{fit:?}")));
        }
    }
    Ok(report)
}

/// Envelope constants of `V(t) / Phi(|t - alpha|)` on `0 < |t - alpha| <= window * alpha`.
pub fn fit_v4(pot: &Potential, phi: &NFunctionSpec, window: f64) -> (f64, f64) {
    let alpha = pot.alpha;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    let n = 400;
    for k in 1..=n {
        let d = window * alpha * k as f64 / n as f64;
        for t in [alpha - d, alpha + d] {
            let r = pot.value(t) / phi.big_phi_sq(d * d);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct V5Fit {
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
    pub omega4: f64,
    pub tau: f64,
}

/// Fits `-w3 phi(w4 |alpha - t|)(alpha - t) t <= V'(t) <= -w1 phi(w2 |alpha - t|)(alpha - t) t`
/// on `[0, alpha + tau]`, `tau = window * alpha`.
///
/// Both sides reduce to envelopes of `g(t) = -V'(t) / ((alpha - t) t)` against
/// `phi(w |alpha - t|)`. The inner arguments `w2`, `w4` are scanned over a
/// small set and the pair with the tightest ratio `w3 / w1` is kept; the
/// choice is not claimed to be unique.
pub fn fit_v5(pot: &Potential, phi: &NFunctionSpec, window: f64) -> V5Fit {
    let alpha = pot.alpha;
    let tau = window * alpha;
    let n = 800;
    let ts: Vec<f64> = (1..n)
        .map(|k| (alpha + tau) * k as f64 / n as f64)
        .filter(|t| (t - alpha).abs() > 1e-12 * alpha)
        .collect();
    let envelope = |w: f64| {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for &t in &ts {
            let g = -pot.d1(t) / ((alpha - t) * t);
            let p = phi.phi((w * (alpha - t)).abs()).unwrap_or(f64::NAN);
            let r = g / p;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    };
    let scan = [0.5, 1.0, 2.0];
    let mut best = V5Fit {
        omega1: f64::NAN,
        omega2: 1.0,
        omega3: f64::NAN,
        omega4: 1.0,
        tau,
    };
    let mut best_ratio = f64::INFINITY;
    for &w2 in &scan {
        let (w1, _) = envelope(w2);
        for &w4 in &scan {
            let (_, w3) = envelope(w4);
            let ratio = w3 / w1;
            if ratio < best_ratio {
                best_ratio = ratio;
                best = V5Fit {
                    omega1: w1,
                    omega2: w2,
                    omega3: w3,
                    omega4: w4,
                    tau,
                };
            }
        }
    }
    best
}

/// Bilinear table on a rectangular lattice, from CSV rows `x,y,A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major by `y` then `x`: `values[iy * xs.len() + ix]`.
    pub values: Vec<f64>,
}

impl CoefficientTable {
    pub fn from_rows(rows: &[(f64, f64, f64)]) -> Result<Self> {
        let mut xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        if xs.len() < 2 || ys.len() < 2 || xs.len() * ys.len() != rows.len() {
            return domain("coefficient table must be a full rectangular lattice with at least 2x2 points");
        }
        let mut values = vec![f64::NAN; rows.len()];
        for &(x, y, a) in rows {
            let ix = xs.partition_point(|v| *v < x);
            let iy = ys.partition_point(|v| *v < y);
            values[iy * xs.len() + ix] = a;
        }
        if values.iter().any(|v| v.is_nan()) {
            return domain("coefficient table has duplicate lattice points");
        }
        Ok(Self { xs, ys, values })
    }

    /// Reads CSV with header `x,y,A`.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        check_header(rdr.headers()?, &["x", "y", "A"])?;
        let rows = rdr
            .deserialize::<(f64, f64, f64)>()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::from_rows(&rows)
    }

    fn cell(axis: &[f64], v: f64) -> Option<(usize, f64)> {
        let n = axis.len();
        if !(v >= axis[0] && v <= axis[n - 1]) {
            return None;
        }
        let i = axis.partition_point(|a| *a <= v).clamp(1, n - 1) - 1;
        Some((i, (v - axis[i]) / (axis[i + 1] - axis[i])))
    }

    pub fn eval(&self, x: f64, y: f64) -> Option<f64> {
        let (ix, sx) = Self::cell(&self.xs, x)?;
        let (iy, sy) = Self::cell(&self.ys, y)?;
        let nx = self.xs.len();
        let at = |i: usize, j: usize| self.values[j * nx + i];
        Some(
            (1.0 - sx) * (1.0 - sy) * at(ix, iy)
                + sx * (1.0 - sy) * at(ix + 1, iy)
                + (1.0 - sx) * sy * at(ix, iy + 1)
                + sx * sy * at(ix + 1, iy + 1),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoefficientField {
    Constant { b: f64 },
    /// `A(x, y) = cos(2 pi x) cos(2 pi y) + c`, `c > 1`.
    PeriodicModel { c: f64 },
    Tabulated(CoefficientTable),
}

impl CoefficientField {
    pub fn constant(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return domain(format!("constant coefficient must be positive, got {b}"));
        }
        Ok(Self::Constant { b })
    }

    pub fn periodic_model(c: f64) -> Result<Self> {
        if !(c > 1.0 && c.is_finite()) {
            return domain(format!("periodic model needs c > 1, got {c}"));
        }
        Ok(Self::PeriodicModel { c })
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        match self {
            Self::Constant { b } => Ok(*b),
            Self::PeriodicModel { c } => Ok(periodic_model(*c, x, y)),
            Self::Tabulated(t) => match t.eval(x, y) {
                Some(v) => Ok(v),
                None => domain(format!("({x}, {y}) outside the tabulated coefficient range")),
            },
        }
    }

    pub fn is_constant(&self) -> Option<f64> {
        match self {
            Self::Constant { b } => Some(*b),
            _ => None,
        }
    }

    /// Average of `A(t, .)` over one period in the second argument.
    pub fn line_average(&self, t: f64) -> Result<f64> {
        match self {
            Self::Constant { b } => Ok(*b),
            _ => {
                // trapezoid on a periodic integrand, 64 samples
                let m = 64;
                let mut s = 0.0;
                for k in 0..m {
                    s += self.eval(t, k as f64 / m as f64)?;
                }
                Ok(s / m as f64)
            }
        }
    }

    fn sample_box(&self) -> (f64, f64, f64, f64) {
        match self {
            Self::Tabulated(t) => (t.xs[0], *t.xs.last().unwrap(), t.ys[0], *t.ys.last().unwrap()),
            _ => (-2.0, 2.0, -2.0, 2.0),
        }
    }
}

#[inline]
fn periodic_model(c: f64, x: f64, y: f64) -> f64 {
    use std::f64::consts::TAU;
    (TAU * x).cos() * (TAU * y).cos() + c
}

/// Samples `n` seeded random points and checks `(A1)` positivity, `(A2)`
/// evenness in each argument, `(A3)` 1-periodicity in each argument and `(A4)`
/// diagonal symmetry, each to within `tol`. A mirrored or shifted point that
/// falls outside a table counts as a failure of that condition.
pub fn check_coefficient_symmetries(
    field: &CoefficientField,
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<ConditionReport> {
    if n == 0 || !(tol > 0.0) {
        return domain("need n >= 1 and tol > 0");
    }
    let mut report = ConditionReport::new("A1-A4");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x0, x1, y0, y1) = field.sample_box();
    let (mut inf, mut even, mut per, mut diag) = (f64::INFINITY, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut failed = [false; 4];
    for _ in 0..n {
        let x = rng.gen_range(x0..=x1);
        let y = rng.gen_range(y0..=y1);
        let a = field.eval(x, y)?;
        inf = inf.min(a);
        if !(a > 0.0) && !failed[0] {
            failed[0] = true;
            report.fail("A1", Witness::new(vec![x, y], format!("A = {a}")));
        }
        let mut compare = |idx: usize, name: &str, acc: &mut f64, other: Result<f64>, pt: [f64; 2]| {
            match other {
                Ok(b) => {
                    let d = (a - b).abs();
                    *acc = acc.max(d);
                    if d > tol && !failed[idx] {
                        failed[idx] = true;
                        report.fail(name, Witness::new(vec![x, y], format!("|A - A{pt:?}| = {d}")));
                    }
                }
                Err(e) => {
                    *acc = f64::INFINITY;
                    if !failed[idx] {
                        failed[idx] = true;
                        report.fail(name, Witness::new(vec![x, y], e.to_string()));
                    }
                }
            }
        };
        compare(1, "A2", &mut even, field.eval(-x, y), [-x, y]);
        compare(1, "A2", &mut even, field.eval(x, -y), [x, -y]);
        compare(2, "A3", &mut per, field.eval(x + 1.0, y), [x + 1.0, y]);
        compare(2, "A3", &mut per, field.eval(x, y + 1.0), [x, y + 1.0]);
        compare(3, "A4", &mut diag, field.eval(y, x), [y, x]);
    }
    report.constant("infA", inf);
    report.constant("evenDefect", even);
    report.constant("periodDefect", per);
    report.constant("diagonalDefect", diag);
    Ok(report)
}

fn check_header(h: &csv::StringRecord, want: &[&str]) -> Result<()> {
    let got: Vec<&str> = h.iter().map(str::trim).collect();
    if got != want {
        return domain(format!("expected CSV header {}, got {}", want.join(","), got.join(",")));
    }
    Ok(())
}
