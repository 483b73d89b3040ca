//! Dyadic lognormal cascades on the `2^d`-adic tree.
//!
//! Level `k` holds `2^{dk}` i.i.d. `N(0, u)` draws in breadth-first order, so
//! the children of node `i` at level `k` are `i·2^d + c` at level `k + 1`.
//! Draws below a fixed split level come from one stream per subtree; the
//! materialized and streaming traversals therefore see the same numbers.

use crate::error::{invalid, Error, Result};
use crate::field::FieldRun;
use crate::kernels::StarCovariance;
use crate::logspace::SignedLog;
use crate::measures::chaos_measure;
use crate::rng::{std_normal, Purpose, StreamKey};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use std::io::Write;

pub const MAX_DEPTH: usize = 24;
pub const MAX_MATERIALIZED_LEAVES: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CascadeSpec {
    dimension: usize,
    depth: usize,
    intensity: f64,
}

impl CascadeSpec {
    pub fn new(dimension: usize, depth: usize, intensity: f64) -> Result<Self> {
        if dimension == 0 || dimension > 2 {
            return Err(invalid(format!("cascade dimension must be 1 or 2, got {dimension}")));
        }
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(invalid(format!("intensity u must be positive, got {intensity}")));
        }
        if depth > MAX_DEPTH {
            return Err(Error::Resource(format!("depth {depth} exceeds the cap of {MAX_DEPTH}")));
        }
        Ok(CascadeSpec {
            dimension,
            depth,
            intensity,
        })
    }

    /// Critical intensity `u = 2d ln 2`.
    pub fn critical(dimension: usize, depth: usize) -> Result<Self> {
        Self::new(dimension, depth, 2.0 * dimension as f64 * std::f64::consts::LN_2)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
    pub fn depth(&self) -> usize {
        self.depth
    }
    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn is_critical(&self) -> bool {
        let uc = 2.0 * self.dimension as f64 * std::f64::consts::LN_2;
        (self.intensity - uc).abs() <= 1e-12 * uc
    }

    pub fn leaf_count(&self) -> usize {
        1usize << (self.dimension * self.depth)
    }

    fn split_level(&self) -> usize {
        self.depth.min(8 / self.dimension)
    }

    /// `2^{−dn}`.
    pub fn leaf_volume(&self) -> f64 {
        (-((self.dimension * self.depth) as f64) * std::f64::consts::LN_2).exp()
    }

    /// `q_n` between two leaves: `u` times the number of shared levels.
    pub fn kernel_q(&self, a: usize, b: usize) -> f64 {
        self.intensity * shared_levels(self.dimension, self.depth, a, b) as f64
    }
}

/// Number of leading levels (out of `n`) whose cylinders contain both leaves.
pub fn shared_levels(d: usize, n: usize, a: usize, b: usize) -> usize {
    (0..n)
        .take_while(|&k| (a >> (d * (n - k - 1))) == (b >> (d * (n - k - 1))))
        .count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeRun {
    spec: CascadeSpec,
    layers: Vec<Vec<f64>>,
    cumulative: Vec<f64>,
}

fn draw_level(rng: &mut ChaCha12Rng, count: usize, sd: f64) -> Vec<f64> {
    (0..count).map(|_| sd * std_normal(rng)).collect()
}

fn top_levels(spec: &CascadeSpec, master: u64, replica: u64) -> Vec<Vec<f64>> {
    let mut rng = StreamKey::new(master, replica, 0, Purpose::CascadeTop).rng();
    let sd = spec.intensity.sqrt();
    (1..=spec.split_level())
        .map(|k| draw_level(&mut rng, 1 << (spec.dimension * k), sd))
        .collect()
}

/// Levels `m+1..=n` of subtree `s` (a node at the split level `m`).
fn subtree_levels(spec: &CascadeSpec, master: u64, replica: u64, s: usize) -> Vec<Vec<f64>> {
    let m = spec.split_level();
    let mut rng = StreamKey::new(master, replica, s as u64, Purpose::CascadeSubtree).rng();
    let sd = spec.intensity.sqrt();
    (m + 1..=spec.depth)
        .map(|k| draw_level(&mut rng, 1 << (spec.dimension * (k - m)), sd))
        .collect()
}

fn accumulate(parent: &[f64], level: &[f64], d: usize) -> Vec<f64> {
    level
        .iter()
        .enumerate()
        .map(|(i, y)| parent[i >> d] + y)
        .collect()
}

/// Materialize every level and the leaf sums `X̄_n`.
pub fn cascade_sample(spec: CascadeSpec, master: u64, replica: u64) -> Result<CascadeRun> {
    if spec.leaf_count() > MAX_MATERIALIZED_LEAVES {
        return Err(Error::Resource(format!(
            "{} leaves exceed the materialization cap; use cascade_totals",
            spec.leaf_count()
        )));
    }
    let d = spec.dimension;
    let m = spec.split_level();
    let mut layers = top_levels(&spec, master, replica);
    let subtrees = 1usize << (d * m);
    for k in m + 1..=spec.depth {
        layers.push(Vec::with_capacity(1 << (d * k)));
    }
    for s in 0..subtrees {
        for (offset, level) in subtree_levels(&spec, master, replica, s).into_iter().enumerate() {
            layers[m + offset].extend(level);
        }
    }
    let mut cumulative = vec![0.0];
    for level in &layers {
        cumulative = accumulate(&cumulative, level, d);
    }
    Ok(CascadeRun {
        spec,
        layers,
        cumulative,
    })
}

/// Totals of the standard and derivative cascades.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CascadeTotals {
    pub standard: f64,
    /// Present only at critical intensity.
    pub derivative: Option<f64>,
}

fn leaf_terms(spec: &CascadeSpec, xbar: f64) -> (f64, f64) {
    let un = spec.intensity * spec.depth as f64;
    let mass = spec.leaf_volume() * (xbar - 0.5 * un).exp();
    (mass, (un - xbar) / spec.intensity.sqrt() * mass)
}

/// Totals by subtree traversal without materializing all leaves.
pub fn cascade_totals(spec: CascadeSpec, master: u64, replica: u64) -> CascadeTotals {
    let d = spec.dimension;
    let mut top = vec![0.0];
    for level in top_levels(&spec, master, replica) {
        top = accumulate(&top, &level, d);
    }
    let (mut standard, mut derivative) = (0.0, 0.0);
    for (s, &root) in top.iter().enumerate() {
        let mut cum = vec![root];
        for level in subtree_levels(&spec, master, replica, s) {
            cum = accumulate(&cum, &level, d);
        }
        for &x in &cum {
            let (m, dm) = leaf_terms(&spec, x);
            standard += m;
            derivative += dm;
        }
    }
    CascadeTotals {
        standard,
        derivative: spec.is_critical().then_some(derivative),
    }
}

impl CascadeRun {
    pub fn spec(&self) -> &CascadeSpec {
        &self.spec
    }

    /// Draws `Y_k` at level `k ∈ 1..=n`.
    pub fn layer(&self, k: usize) -> &[f64] {
        &self.layers[k - 1]
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Leaf-order sums, identical to [`cascade_totals`] for the same key.
    pub fn totals(&self) -> CascadeTotals {
        let (mut standard, mut derivative) = (0.0, 0.0);
        for &x in &self.cumulative {
            let (m, dm) = leaf_terms(&self.spec, x);
            standard += m;
            derivative += dm;
        }
        CascadeTotals {
            standard,
            derivative: self.spec.is_critical().then_some(derivative),
        }
    }
}

/// Per-leaf signed log masses.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafMeasure {
    pub spec: CascadeSpec,
    pub log_masses: Vec<SignedLog<f64>>,
}

impl LeafMeasure {
    pub fn total(&self) -> SignedLog<f64> {
        SignedLog::sum(self.log_masses.iter().copied())
    }
}

/// `2^{−dn} exp(X̄_n − un/2)` per leaf.
pub fn cascade_measure(run: &CascadeRun) -> LeafMeasure {
    let spec = run.spec;
    let lv = spec.leaf_volume().ln();
    let half = 0.5 * spec.intensity * spec.depth as f64;
    LeafMeasure {
        spec,
        log_masses: run
            .cumulative
            .iter()
            .map(|&x| SignedLog::from_parts(1.0, x - half + lv))
            .collect(),
    }
}

/// `(un − X̄_n)/√u · 2^{−dn} exp(X̄_n − un/2)` per leaf, at critical `u` only.
pub fn cascade_derivative(run: &CascadeRun) -> Result<LeafMeasure> {
    let spec = run.spec;
    if !spec.is_critical() {
        return Err(invalid(format!(
            "the derivative cascade needs u = 2d ln 2, got {}",
            spec.intensity
        )));
    }
    let lv = spec.leaf_volume().ln();
    let un = spec.intensity * spec.depth as f64;
    let root = spec.intensity.sqrt();
    Ok(LeafMeasure {
        spec,
        log_masses: run
            .cumulative
            .iter()
            .map(|&x| SignedLog::from_parts((un - x) / root, x - 0.5 * un + lv))
            .collect(),
    })
}

/// Base-`2^d` digits of a leaf from the root down.
pub fn dyadic_address(spec: &CascadeSpec, leaf: usize) -> String {
    let d = spec.dimension;
    let mask = (1usize << d) - 1;
    (1..=spec.depth)
        .map(|k| {
            let digit = (leaf >> (d * (spec.depth - k))) & mask;
            char::from_digit(digit as u32, 10).unwrap()
        })
        .collect()
}

/// Row-major grid index (`2^n` cells per axis) of a leaf. In two dimensions
/// digit bit 0 refines `x` and bit 1 refines `y`.
pub fn leaf_to_cell(spec: &CascadeSpec, leaf: usize) -> usize {
    let n = spec.depth;
    match spec.dimension {
        1 => leaf,
        _ => {
            let (mut x, mut y) = (0usize, 0usize);
            for k in 0..n {
                let digit = (leaf >> (2 * (n - 1 - k))) & 3;
                x = (x << 1) | (digit & 1);
                y = (y << 1) | (digit >> 1);
            }
            y * (1 << n) + x
        }
    }
}

pub fn write_leaf_csv<W: Write>(m: &LeafMeasure, mut w: W) -> Result<()> {
    let mut out = String::from("leaf,address,log_mass,sign\n");
    for (i, lm) in m.log_masses.iter().enumerate() {
        out.push_str(&format!("{i},{},{},{}\n", dyadic_address(&m.spec, i), lm.log_abs, lm.sign));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

/// Smallest `C ≥ 0` with `q_n(s, s') − C ≤ γ² K_{n ln 2}(s − s')` over all embedded
/// leaf pairs, where `γ² = u / ln 2` (`2d` at criticality).
pub fn comparison_constant(cov: &StarCovariance, spec: &CascadeSpec) -> Result<f64> {
    let leaves = spec.leaf_count();
    let side = 1usize << spec.depth;
    let h = 1.0 / side as f64;
    let t = spec.depth as f64 * std::f64::consts::LN_2;
    let g2 = spec.intensity / std::f64::consts::LN_2;
    let cells: Vec<usize> = (0..leaves).map(|l| leaf_to_cell(spec, l)).collect();
    let coords = |c: usize| ((c % side) as f64, (c / side) as f64);
    let mut worst = 0.0f64;
    for a in 0..leaves {
        let (ax, ay) = coords(cells[a]);
        for b in a..leaves {
            let (bx, by) = coords(cells[b]);
            let r = h * (ax - bx).hypot(ay - by);
            let gap = spec.kernel_q(a, b) - g2 * cov.eval_radial(t, r)?;
            worst = worst.max(gap);
        }
    }
    Ok(worst)
}

/// Monte Carlo comparison of `E[F(dominating)]` against
/// `E[F(e^{√C Z − C/2} dominated)]` for `F(x) = x/(1+x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub constant: f64,
    pub replicas: usize,
    pub dominating_mean: f64,
    pub dominating_se: f64,
    pub dominated_mean: f64,
    pub dominated_se: f64,
    /// `dominating_mean − dominated_mean`; nonnegative when the inequality holds.
    pub difference: f64,
    pub combined_se: f64,
    /// The inequality holds within two combined standard errors.
    pub satisfied: bool,
}

pub fn concave_functional(x: f64) -> f64 {
    x / (1.0 + x)
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Kahane-type comparison on replica totals; the dominated side is multiplied by an
/// independent lognormal factor of log-variance `constant` drawn from `key`'s streams.
pub fn compare_concave(dominating: &[f64], dominated: &[f64], constant: f64, master: u64) -> Result<ComparisonReport> {
    if dominating.len() < 2 || dominated.len() < 2 {
        return Err(invalid("comparison needs at least 2 replicas per side"));
    }
    if !(constant >= 0.0) {
        return Err(invalid(format!("comparison constant must be nonnegative, got {constant}")));
    }
    let lhs: Vec<f64> = dominating.iter().map(|&x| concave_functional(x)).collect();
    let rhs: Vec<f64> = dominated
        .iter()
        .enumerate()
        .map(|(r, &x)| {
            let z = std_normal(&mut StreamKey::new(master, r as u64, 0, Purpose::Auxiliary(1)).rng());
            concave_functional((constant.sqrt() * z - 0.5 * constant).exp() * x)
        })
        .collect();
    let (lm, ls) = mean_se(&lhs);
    let (rm, rs) = mean_se(&rhs);
    let combined = ls.hypot(rs);
    Ok(ComparisonReport {
        constant,
        replicas: dominating.len().min(dominated.len()),
        dominating_mean: lm,
        dominating_se: ls,
        dominated_mean: rm,
        dominated_se: rs,
        difference: lm - rm,
        combined_se: combined,
        satisfied: lm - rm >= -2.0 * combined,
    })
}

/// Embed cascades and fields on the same dyadic grid and run the comparison.
pub fn embed_and_compare(
    cascades: &[CascadeRun],
    fields: &[FieldRun<f64>],
    cov: &StarCovariance,
    master: u64,
) -> Result<ComparisonReport> {
    let spec = *cascades
        .first()
        .ok_or_else(|| invalid("no cascade replicas"))?
        .spec();
    let t = spec.depth as f64 * std::f64::consts::LN_2;
    for f in fields {
        let g = f.grid();
        if g.dimension() != spec.dimension
            || g.cells_per_axis() != 1 << spec.depth
            || (g.extent() - 1.0).abs() > 1e-12
            || (f.t() - t).abs() > 1e-9 * t.max(1.0)
        {
            return Err(invalid(format!(
                "field (d={}, n={}, L={}, t={}) does not match cascade depth {} (t = n ln 2 = {t})",
                g.dimension(),
                g.cells_per_axis(),
                g.extent(),
                f.t(),
                spec.depth
            )));
        }
    }
    if cascades.iter().any(|c| c.spec() != &spec) {
        return Err(invalid("cascade replicas disagree on their parameters"));
    }
    let gamma = (spec.intensity / std::f64::consts::LN_2).sqrt();
    let constant = comparison_constant(cov, &spec)?;
    let dominating: Vec<f64> = cascades.iter().map(|c| c.totals().standard).collect();
    let dominated = fields
        .iter()
        .map(|f| Ok(chaos_measure(f, gamma)?.total().value()))
        .collect::<Result<Vec<_>>>()?;
    compare_concave(&dominating, &dominated, constant, master)
}
