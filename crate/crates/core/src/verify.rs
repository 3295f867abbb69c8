//! Pass/fail reports for the checkable items of the saddle and pizza theorems,
//! plus the truncation-consistency certificate.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{domain, Result};
use crate::optim::Objective;
use crate::report::Witness;
use crate::saddle2d::{extend_full, Extension, Solution};

pub const DEFAULT_SEED: u64 = 0x5ADD1E;

const BUG: &str = "implementation bug: the extension violates its own group action";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Tolerances {
    /// Far-field tolerance as a fraction of alpha.
    pub asym: f64,
    /// Tolerance of the reflection and rotation identities.
    pub identity: f64,
    /// Random points per identity check.
    pub samples: usize,
    pub seed: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            asym: 0.05,
            identity: 1e-12,
            samples: 10_000,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemVerdict {
    pub pass: bool,
    pub measured: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl ItemVerdict {
    fn at_most(measured: f64, tol: f64, witness: Witness) -> Self {
        let pass = measured <= tol;
        Self {
            pass,
            measured,
            tol,
            witness: (!pass).then_some(witness),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TheoremReport {
    pub theorem: String,
    pub pass: bool,
    pub items: BTreeMap<String, ItemVerdict>,
    pub seed: u64,
    pub solution_hash: String,
}

impl TheoremReport {
    fn new(theorem: &str, items: BTreeMap<String, ItemVerdict>, seed: u64, sol: &Solution) -> Self {
        Self {
            theorem: theorem.to_string(),
            pass: items.values().all(|v| v.pass),
            items,
            seed,
            solution_hash: solution_hash(sol),
        }
    }

    pub fn item(&self, key: &str) -> Option<&ItemVerdict> {
        self.items.get(key)
    }
}

/// SHA-256 of the little-endian bytes of the node values.
pub fn solution_hash(sol: &Solution) -> String {
    let mut h = Sha256::new();
    for v in &sol.field.values {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Discrete Euler-Lagrange residual: the energy gradient divided by the lumped
/// node weight, as `(max, weighted L2)` over the free nodes.
pub fn pde_residual(sol: &Solution) -> Result<(f64, f64)> {
    if !sol.converged {
        return domain("solution did not converge");
    }
    Ok(residual_norms(sol))
}

/// As [`pde_residual`] without the convergence requirement.
pub fn residual_norms(sol: &Solution) -> (f64, f64) {
    let p = &sol.problem;
    let mut u = sol.field.values.clone();
    p.impose_far_data(&mut u);
    let mut g = vec![0.0; u.len()];
    Objective::gradient(p.as_ref(), &u, &mut g);
    let w = p.node_weights();
    let (mut inf, mut l2) = (0.0_f64, 0.0);
    for ((gi, wi), free) in g.iter().zip(w).zip(p.free_mask()) {
        if *free && *wi > 0.0 {
            let r = gi / wi;
            inf = inf.max(r.abs());
            l2 += wi * r * r;
        }
    }
    (inf, l2.sqrt())
}

/// Strict bounds `0 < u < alpha` at the free nodes.
fn bounds_item(sol: &Solution, alpha: f64) -> ItemVerdict {
    let mut worst = f64::INFINITY;
    let mut at = Witness::new(vec![], "");
    for (n, (&u, free)) in sol
        .grid()
        .nodes
        .iter()
        .zip(sol.field.values.iter().zip(sol.problem.free_mask()))
    {
        if !free {
            continue;
        }
        let m = u.min(alpha - u);
        if m < worst {
            worst = m;
            at = Witness::new(vec![n.x, n.y], format!("u = {u}"));
        }
    }
    let pass = worst > 0.0;
    ItemVerdict {
        pass,
        measured: worst,
        tol: 0.0,
        witness: (!pass).then_some(at),
    }
}

fn gradient_item(sol: &Solution, level: f64) -> Result<ItemVerdict> {
    let grads = sol.problem.cell_gradients(&sol.field)?;
    let centres = sol.problem.cell_centres();
    let (idx, max) = grads
        .iter()
        .enumerate()
        .fold((0, 0.0_f64), |acc, (i, g)| if *g > acc.1 { (i, *g) } else { acc });
    let (x, y) = centres[idx];
    Ok(ItemVerdict::at_most(
        max,
        level.sqrt(),
        Witness::new(vec![x, y], "largest cell gradient"),
    ))
}

/// Largest discrepancy of `f(p)` over seeded random probes.
fn identity_item(
    ext: &Extension,
    tols: &Tolerances,
    stream: u64,
    sample: impl Fn(&mut ChaCha8Rng) -> [f64; 2],
    f: impl Fn(&Extension, [f64; 2]) -> Result<f64>,
) -> Result<ItemVerdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(tols.seed);
    rng.set_stream(stream);
    let mut worst = 0.0_f64;
    let mut at = vec![];
    for _ in 0..tols.samples {
        let p = sample(&mut rng);
        let d = f(ext, p)?;
        if !(d <= worst) {
            worst = d;
            at = p.to_vec();
        }
    }
    Ok(ItemVerdict::at_most(worst, tols.identity, Witness::new(at, BUG)))
}

fn check_level(alpha: f64, level: f64, sol: &Solution) -> Result<()> {
    if !(level > 0.0) {
        return domain("L must be positive");
    }
    if (alpha - sol.alpha()).abs() > 1e-15 * alpha.abs().max(1.0) {
        return domain(format!("alpha {alpha} does not match the solution's {}", sol.alpha()));
    }
    Ok(())
}

/// Items (a)-(f) of the saddle theorem on a triangle-kind solution.
pub fn check_theorem1(sol: &Solution, alpha: f64, level: f64, tols: &Tolerances) -> Result<TheoremReport> {
    if sol.grid().is_polar() {
        return domain("check_theorem1 needs a Cartesian solution");
    }
    check_level(alpha, level, sol)?;
    let ext = extend_full(sol)?;
    let r = ext.radius();
    let mut items = BTreeMap::new();
    items.insert("a".into(), bounds_item(sol, alpha));

    let square = move |rng: &mut ChaCha8Rng| [rng.gen_range(-r..=r), rng.gen_range(-r..=r)];
    items.insert(
        "b".into(),
        identity_item(&ext, tols, 1, square, |e, [x, y]| {
            let v = e.eval(x, y)?;
            Ok((v + e.eval(-x, y)?).abs().max((v + e.eval(x, -y)?).abs()))
        })?,
    );
    items.insert(
        "c".into(),
        identity_item(&ext, tols, 2, square, |e, [x, y]| {
            Ok((e.eval(x, y)? - e.eval(y, x)?).abs())
        })?,
    );

    // far probes on |x|, |y| in [0.75R, 0.975R]
    let m = 10;
    let ticks: Vec<f64> = (0..m)
        .map(|i| r * (0.75 + 0.225 * i as f64 / (m - 1) as f64))
        .collect();
    for (key, target_sign) in [("d", 1.0), ("e", -1.0)] {
        let mut worst = 0.0_f64;
        let mut at = vec![];
        for &a in &ticks {
            for &b in &ticks {
                for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
                    if sx * sy != target_sign {
                        continue;
                    }
                    let (x, y) = (sx * a, sy * b);
                    let d = (ext.eval(x, y)? - target_sign * alpha).abs() / alpha;
                    if d > worst {
                        worst = d;
                        at = vec![x, y];
                    }
                }
            }
        }
        let note = format!("|u {} alpha| / alpha", if target_sign > 0.0 { "-" } else { "+" });
        items.insert(key.into(), ItemVerdict::at_most(worst, tols.asym, Witness::new(at, note)));
    }
    items.insert("f".into(), gradient_item(sol, level)?);
    Ok(TheoremReport::new("1", items, tols.seed, sol))
}

/// Items (a)-(e) of the pizza theorem on a sector-kind solution.
pub fn check_theorem2(
    sol: &Solution,
    alpha: f64,
    level: f64,
    j: u32,
    tols: &Tolerances,
) -> Result<TheoremReport> {
    if sol.grid().j() != Some(j) {
        return domain(format!("check_theorem2 needs a polar solution with j = {j}"));
    }
    check_level(alpha, level, sol)?;
    let ext = extend_full(sol)?;
    let r = ext.radius();
    let w = PI / j as f64;
    let mut items = BTreeMap::new();
    items.insert("a".into(), bounds_item(sol, alpha));

    let disk = move |rng: &mut ChaCha8Rng| [rng.gen_range(0.0..=r), rng.gen_range(-PI..PI)];
    items.insert(
        "b".into(),
        identity_item(&ext, tols, 1, disk, |e, [rho, th]| {
            Ok((e.eval_polar(rho, FRAC_PI_2 + th)? + e.eval_polar(rho, FRAC_PI_2 - th)?).abs())
        })?,
    );
    items.insert(
        "c".into(),
        identity_item(&ext, tols, 2, disk, move |e, [rho, th]| {
            Ok((e.eval_polar(rho, th + w)? + e.eval_polar(rho, th)?).abs())
        })?,
    );

    let rho = 0.9 * r;
    let mut worst = 0.0_f64;
    let mut at = vec![];
    for k in 0..2 * j {
        let th = FRAC_PI_2 + (k as f64 + 0.5) * w;
        let target = if k % 2 == 0 { -alpha } else { alpha };
        let d = (ext.eval_polar(rho, th)? - target).abs() / alpha;
        if d > worst {
            worst = d;
            at = vec![rho, th];
        }
    }
    items.insert(
        "d".into(),
        ItemVerdict::at_most(worst, tols.asym, Witness::new(at, "sector bisector at 0.9R")),
    );
    items.insert("e".into(), gradient_item(sol, level)?);
    Ok(TheoremReport::new("2", items, tols.seed, sol))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TruncationReport {
    pub pass: bool,
    pub level: f64,
    pub max_grad_sq: f64,
    /// `L - max |grad u|^2`.
    pub margin: f64,
    /// Every cell's generator value equals `1/sqrt(1 + g^2)` bit for bit.
    pub branch_identity: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// Certifies that every cell gradient stays on the untruncated branch, so the
/// field also solves the original mean curvature equation discretely.
pub fn truncation_consistency(sol: &Solution, level: f64) -> Result<TruncationReport> {
    if !(level > 0.0) {
        return domain("L must be positive");
    }
    let grads = sol.problem.cell_gradients(&sol.field)?;
    let centres = sol.problem.cell_centres();
    let phi = &sol.problem.phi;
    let mut max_sq = 0.0_f64;
    let mut witness = None;
    let mut branch = true;
    for (g, c) in grads.iter().zip(&centres) {
        let s = g * g;
        if s > max_sq {
            max_sq = s;
            if s > level {
                witness = Some(Witness::new(vec![c.0, c.1], format!("|grad u| = {g}")));
            }
        }
        if s <= level && phi.phi_hat(s) != 1.0 / (1.0 + s).sqrt() {
            branch = false;
            witness.get_or_insert_with(|| Witness::new(vec![c.0, c.1], "branch mismatch"));
        }
    }
    let pass = max_sq <= level && branch && phi.level() == Some(level);
    Ok(TruncationReport {
        pass,
        level,
        max_grad_sq: max_sq,
        margin: level - max_sq,
        branch_identity: branch,
        witness: if pass { None } else { witness },
    })
}
