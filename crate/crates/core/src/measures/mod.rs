//! Chaos measures built from a completed [`FieldRun`].
//!
//! A [`CellMeasure`] stores each cell mass in factorized form
//! `prefactor_i · exp(log_weight_i + log_scale)`. The prefactor carries the
//! signed polynomial part (the gap `√(2d)t − X` of the derivative measure, the
//! `√t` of Seneta–Heyde, survival indicators); the log-weight carries the
//! exponential part and never leaves log space. Keeping the factors apart
//! makes several identities hold bit-for-bit rather than to rounding.

mod csv;
mod stable;

pub use csv::{read_measure_csv, write_measure_csv, MeasureRow, MeasureTable};
pub use stable::sample_positive_stable;

use crate::error::{invalid, Error, Result};
use crate::field::{FieldRun, GridSpec};
use crate::logspace::SignedLog;
use crate::rng::StreamKey;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureKind {
    Subcritical,
    CriticalStandard,
    SenetaHeyde,
    Derivative,
    StoppedZ,
    StoppedZTilde,
    StableSubordinated,
    SupercriticalRenorm,
    Gibbs,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 9] = [
        MeasureKind::Subcritical,
        MeasureKind::CriticalStandard,
        MeasureKind::SenetaHeyde,
        MeasureKind::Derivative,
        MeasureKind::StoppedZ,
        MeasureKind::StoppedZTilde,
        MeasureKind::StableSubordinated,
        MeasureKind::SupercriticalRenorm,
        MeasureKind::Gibbs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Subcritical => "subcritical",
            MeasureKind::CriticalStandard => "critical_standard",
            MeasureKind::SenetaHeyde => "seneta_heyde",
            MeasureKind::Derivative => "derivative",
            MeasureKind::StoppedZ => "stopped_z",
            MeasureKind::StoppedZTilde => "stopped_z_tilde",
            MeasureKind::StableSubordinated => "stable_subordinated",
            MeasureKind::SupercriticalRenorm => "supercritical_renorm",
            MeasureKind::Gibbs => "gibbs",
        }
    }

    /// Whether masses of this kind may be negative.
    pub fn is_signed(self) -> bool {
        matches!(self, MeasureKind::Derivative | MeasureKind::StoppedZTilde)
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MeasureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = MeasureKind::ALL.iter().map(|k| k.name()).collect();
                invalid(format!("unknown measure kind '{s}', expected one of {}", names.join(", ")))
            })
    }
}

/// Cells over which a total or normalization is taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    All,
    /// Half-open per-axis index ranges `[lo, hi)`; the second axis is ignored in one dimension.
    Box { lo: [usize; 2], hi: [usize; 2] },
    Cells(Vec<usize>),
}

impl Region {
    pub fn contains(&self, grid: &GridSpec, index: usize) -> bool {
        match self {
            Region::All => true,
            Region::Box { lo, hi } => {
                let c = grid.cell_coords(index);
                (lo[0]..hi[0]).contains(&c[0]) && (grid.dimension() == 1 || (lo[1]..hi[1]).contains(&c[1]))
            }
            Region::Cells(cells) => cells.contains(&index),
        }
    }

    pub fn cells(&self, grid: &GridSpec) -> Vec<usize> {
        match self {
            Region::Cells(c) => c.clone(),
            _ => (0..grid.cell_count()).filter(|&i| self.contains(grid, i)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellMeasure<T> {
    kind: MeasureKind,
    gamma: f64,
    t: f64,
    beta: Option<f64>,
    alpha: Option<f64>,
    grid: GridSpec,
    prefactors: Vec<T>,
    log_weights: Vec<T>,
    log_scale: T,
}

impl<T: Scalar> CellMeasure<T> {
    /// Assemble a measure from explicit factors.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        kind: MeasureKind,
        gamma: f64,
        t: f64,
        grid: GridSpec,
        prefactors: Vec<T>,
        log_weights: Vec<T>,
        log_scale: T,
    ) -> Result<Self> {
        if prefactors.len() != grid.cell_count() || log_weights.len() != grid.cell_count() {
            return Err(invalid("factor lengths must match the grid cell count"));
        }
        Ok(CellMeasure {
            kind,
            gamma,
            t,
            beta: None,
            alpha: None,
            grid,
            prefactors,
            log_weights,
            log_scale,
        })
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn beta(&self) -> Option<f64> {
        self.beta
    }
    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn prefactors(&self) -> &[T] {
        &self.prefactors
    }
    pub fn log_weights(&self) -> &[T] {
        &self.log_weights
    }
    pub fn log_scale(&self) -> T {
        self.log_scale
    }
    pub fn len(&self) -> usize {
        self.prefactors.len()
    }
    pub fn is_empty(&self) -> bool {
        self.prefactors.is_empty()
    }

    pub fn log_mass(&self, i: usize) -> SignedLog<T> {
        SignedLog::from_parts(self.prefactors[i], self.log_weights[i]).mul_log(self.log_scale)
    }

    pub fn log_masses(&self) -> Vec<SignedLog<T>> {
        (0..self.len()).map(|i| self.log_mass(i)).collect()
    }

    /// Linear-scale mass; may overflow where the log form does not.
    pub fn mass(&self, i: usize) -> T {
        self.log_mass(i).value()
    }

    pub fn total(&self) -> SignedLog<T> {
        self.total_over(&Region::All)
    }

    pub fn total_over(&self, region: &Region) -> SignedLog<T> {
        SignedLog::sum(
            region
                .cells(&self.grid)
                .into_iter()
                .map(|i| SignedLog::from_parts(self.prefactors[i], self.log_weights[i])),
        )
        .mul_log(self.log_scale)
    }

    /// The same measure multiplied by `c > 0`.
    pub fn scaled(&self, c: T) -> Result<Self> {
        if !(c > T::zero()) {
            return Err(invalid("scale factor must be positive"));
        }
        let mut out = self.clone();
        out.log_scale = out.log_scale + c.ln();
        Ok(out)
    }
}

/// `√(2d) x − d t`, the exponent shared by every critical-type measure.
fn critical_log_weight<T: Scalar>(x: T, t: f64, d: usize) -> T {
    let c = T::lit((2.0 * d as f64).sqrt());
    c * x - T::lit(d as f64 * t)
}

/// Round onto the dyadic lattice `2^GAP_QUANTUM_LOG2`; exact in binary floating point.
pub fn quantize<T: Scalar>(a: T) -> T {
    let q = T::lit(2f64.powi(-T::GAP_QUANTUM_LOG2));
    (a * q).round() / q
}

fn critical_gamma(d: usize) -> f64 {
    (2.0 * d as f64).sqrt()
}

fn is_critical(gamma: f64, d: usize) -> bool {
    (gamma * gamma - 2.0 * d as f64).abs() <= 1e-12 * 2.0 * d as f64
}

fn log_volume<T: Scalar>(grid: &GridSpec) -> T {
    T::lit(grid.dimension() as f64 * grid.spacing().ln())
}

/// `exp(γX_t − γ²t/2) h^d` per cell; critical iff `γ² = 2d`.
pub fn chaos_measure<T: Scalar>(run: &FieldRun<T>, gamma: f64) -> Result<CellMeasure<T>> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("gamma must be nonnegative, got {gamma}")));
    }
    let grid = *run.grid();
    let t = run.t();
    let d = grid.dimension();
    let critical = is_critical(gamma, d);
    let log_weights = if critical {
        run.values().iter().map(|&x| critical_log_weight(x, t, d)).collect()
    } else {
        let g = T::lit(gamma);
        let shift = T::lit(0.5 * gamma * gamma * t);
        run.values().iter().map(|&x| g * x - shift).collect()
    };
    Ok(CellMeasure {
        kind: if critical {
            MeasureKind::CriticalStandard
        } else {
            MeasureKind::Subcritical
        },
        gamma,
        t,
        beta: None,
        alpha: None,
        grid,
        prefactors: vec![T::one(); grid.cell_count()],
        log_weights,
        log_scale: log_volume(&grid),
    })
}

/// `(√(2d)t − X_t) exp(√(2d)X_t − dt) h^d` per cell, signed.
pub fn derivative_measure<T: Scalar>(run: &FieldRun<T>) -> CellMeasure<T> {
    let grid = *run.grid();
    let t = run.t();
    let d = grid.dimension();
    let drift = T::lit(critical_gamma(d) * t);
    CellMeasure {
        kind: MeasureKind::Derivative,
        gamma: critical_gamma(d),
        t,
        beta: None,
        alpha: None,
        grid,
        prefactors: run.values().iter().map(|&x| quantize(drift - x)).collect(),
        log_weights: run.values().iter().map(|&x| critical_log_weight(x, t, d)).collect(),
        log_scale: log_volume(&grid),
    }
}

/// `√t` times the critical standard measure.
pub fn seneta_heyde<T: Scalar>(run: &FieldRun<T>) -> CellMeasure<T> {
    let mut m = chaos_measure(run, critical_gamma(run.grid().dimension())).expect("critical gamma is valid");
    m.kind = MeasureKind::SenetaHeyde;
    let root = T::lit(run.t().sqrt());
    m.prefactors.iter_mut().for_each(|p| *p = root);
    m
}

/// The stopped martingales `Z^β` and `Z̃^β` with their survivor set.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppedPair<T> {
    pub z: CellMeasure<T>,
    pub z_tilde: CellMeasure<T>,
    /// `running_sup ≤ β` per cell.
    pub survivors: Vec<bool>,
}

/// Survival is `sup_{u ≤ t}(X_u − √(2d)u) ≤ β`. The level is rounded to the gap lattice
/// (see [`quantize`]) so that `Z − Z̃` equals `β` times the critical mass exactly.
pub fn stopped_measures<T: Scalar>(run: &FieldRun<T>, beta: f64) -> Result<StoppedPair<T>> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    let base = derivative_measure(run);
    let b = quantize(T::lit(beta));
    let level = T::lit(beta);
    let survivors: Vec<bool> = run.running_sup().iter().map(|&m| m <= level).collect();
    let gate = |p: T, alive: bool| if alive { p } else { T::zero() };
    let z_pref = base
        .prefactors
        .iter()
        .zip(&survivors)
        .map(|(&a, &s)| gate(a + b, s))
        .collect();
    let zt_pref = base
        .prefactors
        .iter()
        .zip(&survivors)
        .map(|(&a, &s)| gate(a, s))
        .collect();
    let mut z = base.clone();
    z.kind = MeasureKind::StoppedZ;
    z.beta = Some(beta);
    z.prefactors = z_pref;
    let mut z_tilde = base;
    z_tilde.kind = MeasureKind::StoppedZTilde;
    z_tilde.beta = Some(beta);
    z_tilde.prefactors = zt_pref;
    Ok(StoppedPair { z, z_tilde, survivors })
}

/// Outcome of the cell-by-cell check of `Z − Z̃ = β · 1{survive} · M_crit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiffzCheck {
    pub cells: usize,
    pub mismatches: usize,
}

/// Compare `Z − Z̃` with `β` times the surviving critical measure in log form, bit for bit.
pub fn check_diffz<T: Scalar>(pair: &StoppedPair<T>, critical: &CellMeasure<T>) -> DiffzCheck {
    let beta = quantize(T::lit(pair.z.beta.unwrap_or(0.0)));
    let mut mismatches = 0;
    for i in 0..critical.len() {
        let diff = SignedLog::from_parts(pair.z.prefactors[i] - pair.z_tilde.prefactors[i], pair.z.log_weights[i])
            .mul_log(pair.z.log_scale);
        let alive = if pair.survivors[i] { T::one() } else { T::zero() };
        let expected = SignedLog::from_parts(beta * alive * critical.prefactors[i], critical.log_weights[i])
            .mul_log(critical.log_scale);
        let same = diff.sign == expected.sign
            && (diff.sign == 0 || diff.log_abs.to_f64_lossy().to_bits() == expected.log_abs.to_f64_lossy().to_bits());
        if !same {
            mismatches += 1;
        }
    }
    DiffzCheck {
        cells: critical.len(),
        mismatches,
    }
}

/// Per cell an independent positive α-stable variable with Laplace transform
/// `exp(−q^α m)`. Negative base cells are clamped to zero and counted.
pub fn stable_subordinate<T: Scalar>(
    base: &CellMeasure<T>,
    alpha: f64,
    key: StreamKey,
) -> Result<(CellMeasure<T>, usize)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !matches!(base.kind, MeasureKind::Subcritical | MeasureKind::Derivative) {
        return Err(invalid(format!(
            "stable subordination expects a subcritical or derivative base, got {}",
            base.kind
        )));
    }
    let clamped = base.prefactors.iter().filter(|&&p| p < T::zero()).count();
    let mut out = base.clone();
    out.kind = MeasureKind::StableSubordinated;
    out.alpha = Some(alpha);
    out.prefactors.iter_mut().for_each(|p| *p = p.max(T::zero()));
    if alpha == 1.0 {
        return Ok((out, clamped));
    }
    let mut rng = key.rng();
    let inv = T::lit(1.0 / alpha);
    for i in 0..out.len() {
        let p = out.prefactors[i];
        // Draw for every cell so the stream position does not depend on the masses.
        let log_s = T::lit(sample_positive_stable(alpha, &mut rng).ln());
        if p > T::zero() {
            out.log_weights[i] = (p.ln() + base.log_weights[i] + base.log_scale) * inv + log_s;
            out.prefactors[i] = T::one();
        }
    }
    out.log_scale = T::zero();
    Ok((out, clamped))
}

/// `(3γ/(2√(2d))) ln t + t(γ/√2 − √d)²`.
pub fn renormalization_log_factor(gamma: f64, t: f64, d: usize) -> f64 {
    let d = d as f64;
    3.0 * gamma / (2.0 * (2.0 * d).sqrt()) * t.ln() + t * (gamma / 2f64.sqrt() - d.sqrt()).powi(2)
}

pub fn supercritical_renorm<T: Scalar>(run: &FieldRun<T>, gamma: f64) -> Result<CellMeasure<T>> {
    let d = run.grid().dimension();
    if !(gamma * gamma > 2.0 * d as f64) || is_critical(gamma, d) {
        return Err(invalid(format!("supercritical renormalization needs γ² > 2d, got γ = {gamma}")));
    }
    if !(run.t() > 0.0) {
        return Err(invalid("supercritical renormalization needs t > 0"));
    }
    let mut m = chaos_measure(run, gamma)?;
    m.kind = MeasureKind::SupercriticalRenorm;
    m.log_scale = m.log_scale + T::lit(renormalization_log_factor(gamma, run.t(), d));
    Ok(m)
}

/// Normalize `base` to a probability measure on `region`; cells outside get mass zero.
/// The constant factor `exp(log_scale)` of the base cancels exactly.
pub fn gibbs_measure<T: Scalar>(base: &CellMeasure<T>, region: &Region) -> Result<CellMeasure<T>> {
    let cells = region.cells(&base.grid);
    if cells.iter().any(|&i| base.prefactors[i] < T::zero()) {
        return Err(invalid("Gibbs normalization needs nonnegative base masses"));
    }
    let total = SignedLog::sum(
        cells
            .iter()
            .map(|&i| SignedLog::from_parts(base.prefactors[i], base.log_weights[i])),
    );
    if total.sign <= 0 {
        return Err(Error::DegenerateNormalization(total.value().to_f64_lossy()));
    }
    let mut out = base.clone();
    out.kind = MeasureKind::Gibbs;
    for i in 0..out.len() {
        if !region.contains(&base.grid, i) {
            out.prefactors[i] = T::zero();
        }
    }
    out.log_scale = -total.log_abs;
    Ok(out)
}
