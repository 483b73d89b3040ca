//! Layered sampling of the log-correlated field on a regular grid.
//!
//! The field `X_t` has independent increments in `t`: the increment over a
//! layer `[t_{j-1}, t_j]` is a stationary Gaussian field with covariance
//! `K_{t_j} - K_{t_{j-1}}`. A [`FieldSampler`] precomputes one factorization
//! per layer for the chosen backend and then advances any number of
//! [`FieldRun`]s, each addressed by `(master seed, replica)`.

pub mod circulant;
mod cholesky;
mod cone;
mod covariance;
mod snapshot;

pub use cone::{ConeBand, ConePlane};
pub use covariance::{empirical_covariance, CovarianceEstimate};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SNAPSHOT_HEADER_LEN, SNAPSHOT_MAGIC};

use crate::error::{invalid, Error, Result};
use crate::kernels::{KernelFamily, StarCovariance};
use crate::rng::{open_uniform, std_normal, Purpose, StreamKey};
use crate::scalar::Scalar;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Regular grid on `[0, L]^d` with `n` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dimension: usize,
    cells_per_axis: usize,
    extent: f64,
}

impl GridSpec {
    pub fn new(dimension: usize, cells_per_axis: usize, extent: f64) -> Result<Self> {
        if !(1..=2).contains(&dimension) {
            return Err(invalid(format!("grid dimension must be 1 or 2, got {dimension}")));
        }
        if cells_per_axis < 2 {
            return Err(invalid(format!("cells_per_axis must be >= 2, got {cells_per_axis}")));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(invalid(format!("extent must be positive, got {extent}")));
        }
        Ok(GridSpec {
            dimension,
            cells_per_axis,
            extent,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// `h = L / n`. Cell geometry is always computed from `L` and `n`, so `n·h = L` holds by construction.
    pub fn spacing(&self) -> f64 {
        self.extent / self.cells_per_axis as f64
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_axis.pow(self.dimension as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dimension as i32)
    }

    /// Per-axis indices of a row-major cell index (`[column, row]` in two dimensions).
    pub fn cell_coords(&self, index: usize) -> [usize; 2] {
        let n = self.cells_per_axis;
        match self.dimension {
            1 => [index, 0],
            _ => [index % n, index / n],
        }
    }

    /// Center `((i + 1/2) L / n)` of a cell; the second entry is unused in one dimension.
    pub fn cell_center(&self, index: usize) -> [f64; 2] {
        let c = self.cell_coords(index);
        let n = self.cells_per_axis as f64;
        [
            self.extent * (c[0] as f64 + 0.5) / n,
            self.extent * (c[1] as f64 + 0.5) / n,
        ]
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (ca, cb) = (self.cell_coords(a), self.cell_coords(b));
        let dx = ca[0].abs_diff(cb[0]) as f64;
        let dy = ca[1].abs_diff(cb[1]) as f64;
        self.spacing() * dx.hypot(dy)
    }
}

/// Layer times `0 = t_0 < t_1 < … < t_m = t_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleLadder {
    times: Vec<f64>,
}

impl ScaleLadder {
    /// Uniform steps of `delta_t`; the last step absorbs the remainder.
    pub fn uniform(t_max: f64, delta_t: f64) -> Result<Self> {
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return Err(invalid(format!("delta_t must be positive, got {delta_t}")));
        }
        if !(t_max.is_finite() && t_max >= 0.0) {
            return Err(invalid(format!("t_max must be nonnegative, got {t_max}")));
        }
        let steps = (t_max / delta_t - 1e-9).ceil().max(0.0) as usize;
        let mut times: Vec<f64> = (0..steps).map(|j| j as f64 * delta_t).collect();
        times.push(t_max);
        if times.len() == 1 && t_max > 0.0 {
            times.insert(0, 0.0);
        }
        Ok(ScaleLadder { times })
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.first() != Some(&0.0) {
            return Err(invalid("ladder must start at t = 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("ladder times must be finite and strictly increasing"));
        }
        Ok(ScaleLadder { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Number of increments.
    pub fn layers(&self) -> usize {
        self.times.len() - 1
    }

    pub fn time(&self, j: usize) -> f64 {
        self.times[j]
    }

    /// Index of the layer boundary at time `t`, if any.
    pub fn position(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| (s - t).abs() <= 1e-12 * t.max(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    /// Dense semidefinite Cholesky, limited to 4096 cells.
    Cholesky,
    /// Circulant embedding on a torus of period at least `2L + R`.
    Circulant,
    /// Half-plane cone construction (`d = 1`, triangle kernel).
    Cone { bands_per_unit: usize },
}

/// How the running supremum of `X_u - √(2d) u` is tracked between layer boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupMode {
    /// Exact Brownian-bridge maximum between consecutive boundaries.
    Bridge,
    /// Boundary values only.
    Boundary,
}

/// Limit on cached factorization storage.
pub const FACTOR_MEMORY_LIMIT: usize = 2 << 30;

pub const CHOLESKY_MAX_CELLS: usize = 4096;

pub const DEFAULT_CONE_BANDS_PER_UNIT: usize = 16;

/// Grid values, layer position and running supremum of one replica.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRun<T> {
    grid: GridSpec,
    ladder: Arc<ScaleLadder>,
    layer: usize,
    values: Vec<T>,
    running_sup: Vec<T>,
    master_seed: u64,
    replica: u64,
}

impl<T: Scalar> FieldRun<T> {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn ladder(&self) -> &ScaleLadder {
        &self.ladder
    }

    /// Index of the last completed layer.
    pub fn layer(&self) -> usize {
        self.layer
    }

    pub fn t(&self) -> f64 {
        self.ladder.time(self.layer)
    }

    pub fn is_complete(&self) -> bool {
        self.layer == self.ladder.layers()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn running_sup(&self) -> &[T] {
        &self.running_sup
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn replica(&self) -> u64 {
        self.replica
    }

    /// Build a run from explicit values (snapshots, tests). The running supremum
    /// is taken as the current drifted value.
    pub fn from_values(grid: GridSpec, t: f64, values: Vec<T>, master_seed: u64, replica: u64) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(invalid(format!(
                "expected {} values, got {}",
                grid.cell_count(),
                values.len()
            )));
        }
        let ladder = if t > 0.0 {
            ScaleLadder::from_times(vec![0.0, t])?
        } else {
            ScaleLadder::from_times(vec![0.0])?
        };
        let drift = T::lit((2.0 * grid.dimension() as f64).sqrt() * t);
        let running_sup = values.iter().map(|&v| (v - drift).max(T::zero())).collect();
        Ok(FieldRun {
            grid,
            layer: ladder.layers(),
            ladder: Arc::new(ladder),
            values,
            running_sup,
            master_seed,
            replica,
        })
    }
}

enum LayerFactor<T> {
    Zero,
    Cholesky(cholesky::LowerFactor<T>),
    Circulant(circulant::CirculantFactor<T>),
    Cone(cone::ConeLayer),
}

/// Per-layer factorizations for one (covariance, grid, ladder, backend).
pub struct FieldSampler<T: Scalar> {
    covariance: StarCovariance,
    grid: GridSpec,
    ladder: Arc<ScaleLadder>,
    backend: Backend,
    sup_mode: SupMode,
    factors: Vec<LayerFactor<T>>,
    circulant_plan: Option<circulant::CirculantPlan<T>>,
}

impl<T: Scalar> FieldSampler<T> {
    pub fn new(
        covariance: StarCovariance,
        grid: GridSpec,
        ladder: ScaleLadder,
        backend: Backend,
        sup_mode: SupMode,
    ) -> Result<Self> {
        let seed = covariance.seed();
        if seed.dimension() != grid.dimension() {
            return Err(invalid(format!(
                "kernel dimension {} does not match grid dimension {}",
                seed.dimension(),
                grid.dimension()
            )));
        }
        let layers = ladder.layers();
        let mut circulant_plan = None;
        let bytes_per_layer = match backend {
            Backend::Cholesky => {
                let n = grid.cell_count();
                if n > CHOLESKY_MAX_CELLS {
                    return Err(Error::Resource(format!(
                        "Cholesky backend supports at most {CHOLESKY_MAX_CELLS} cells, grid has {n}"
                    )));
                }
                n * (n + 1) / 2 * std::mem::size_of::<T>()
            }
            Backend::Circulant => {
                let plan = circulant::CirculantPlan::new(&grid, seed.support_radius());
                let bytes = plan.len() * std::mem::size_of::<T>();
                circulant_plan = Some(plan);
                bytes
            }
            Backend::Cone { bands_per_unit } => {
                if grid.dimension() != 1 || seed.family() != KernelFamily::Triangle1D {
                    return Err(Error::UnsupportedBackend(
                        "the cone construction requires d = 1 and the Triangle1D kernel".into(),
                    ));
                }
                if bands_per_unit == 0 {
                    return Err(invalid("cone bands_per_unit must be positive"));
                }
                64
            }
        };
        if bytes_per_layer.saturating_mul(layers) > FACTOR_MEMORY_LIMIT {
            return Err(Error::Resource(format!(
                "{layers} layers of {bytes_per_layer} bytes exceed the factor memory limit"
            )));
        }
        let cone_plane = match backend {
            Backend::Cone { bands_per_unit } => Some(ConePlane::for_ladder(
                &ladder,
                seed.support_radius(),
                bands_per_unit,
            )),
            _ => None,
        };
        let factors = (1..=layers)
            .map(|j| {
                let (s, t) = (ladder.time(j - 1), ladder.time(j));
                if t == s {
                    return Ok(LayerFactor::Zero);
                }
                Ok(match backend {
                    Backend::Cholesky => LayerFactor::Cholesky(cholesky::LowerFactor::new(&covariance, &grid, s, t)?),
                    Backend::Circulant => LayerFactor::Circulant(
                        circulant_plan.as_ref().unwrap().factor(&covariance, s, t)?,
                    ),
                    Backend::Cone { .. } => LayerFactor::Cone(cone_plane.as_ref().unwrap().layer(j)),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FieldSampler {
            covariance,
            grid,
            ladder: Arc::new(ladder),
            backend,
            sup_mode,
            factors,
            circulant_plan,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn ladder(&self) -> &ScaleLadder {
        &self.ladder
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn sup_mode(&self) -> SupMode {
        self.sup_mode
    }

    pub fn covariance(&self) -> &StarCovariance {
        &self.covariance
    }

    fn drift(&self) -> f64 {
        (2.0 * self.grid.dimension() as f64).sqrt()
    }

    /// A fresh run at `t = 0` (all values zero).
    pub fn start(&self, master_seed: u64, replica: u64) -> FieldRun<T> {
        let n = self.grid.cell_count();
        FieldRun {
            grid: self.grid,
            ladder: Arc::clone(&self.ladder),
            layer: 0,
            values: vec![T::zero(); n],
            running_sup: vec![T::zero(); n],
            master_seed,
            replica,
        }
    }

    /// Independent draw of the layer-`j` increment (`j ≥ 1`) for a replica.
    pub fn increment(&self, j: usize, master_seed: u64, replica: u64) -> Vec<T> {
        let n = self.grid.cell_count();
        let key = StreamKey::new(master_seed, replica, j as u64, Purpose::FieldLayer);
        let mut rng = key.rng();
        match &self.factors[j - 1] {
            LayerFactor::Zero => vec![T::zero(); n],
            LayerFactor::Cholesky(f) => f.sample(&mut rng),
            LayerFactor::Circulant(f) => self.circulant_plan.as_ref().unwrap().sample(f, &self.grid, &mut rng),
            LayerFactor::Cone(c) => c.sample(&self.grid, &mut rng),
        }
    }

    /// Add the layer-`j` increment to `run` and update its running supremum.
    pub fn sample_increment(&self, run: &mut FieldRun<T>, j: usize) -> Result<()> {
        if j != run.layer + 1 || j > self.ladder.layers() {
            return Err(invalid(format!(
                "layer {j} cannot follow layer {} (ladder has {} layers)",
                run.layer,
                self.ladder.layers()
            )));
        }
        if run.grid != self.grid {
            return Err(invalid("run grid does not match the sampler grid"));
        }
        let inc = self.increment(j, run.master_seed, run.replica);
        let previous = run.values.clone();
        for (v, d) in run.values.iter_mut().zip(&inc) {
            *v = *v + *d;
        }
        self.update_sup(j, &previous, &run.values, &mut run.running_sup, run.master_seed, run.replica);
        run.layer = j;
        Ok(())
    }

    fn update_sup(&self, j: usize, previous: &[T], current: &[T], sup: &mut [T], master: u64, replica: u64) {
        let c = self.drift();
        let (s, t) = (self.ladder.time(j - 1), self.ladder.time(j));
        let (ds, dt) = (T::lit(c * s), T::lit(c * t));
        match self.sup_mode {
            SupMode::Boundary => {
                for (m, &x) in sup.iter_mut().zip(current) {
                    *m = m.max(x - dt);
                }
            }
            SupMode::Bridge => {
                let width = T::lit(t - s);
                let two = T::lit(2.0);
                let mut rng = StreamKey::new(master, replica, j as u64, Purpose::BridgeMaximum).rng();
                for ((m, &x0), &x1) in sup.iter_mut().zip(previous).zip(current) {
                    let (a, b) = (x0 - ds, x1 - dt);
                    let u = T::lit(open_uniform(&mut rng));
                    let gap = a - b;
                    let peak = (a + b + (gap * gap - two * width * u.ln()).sqrt()) / two;
                    *m = m.max(peak.max(a).max(b));
                }
            }
        }
    }

    /// Advance `run` through every remaining layer.
    pub fn complete(&self, run: &mut FieldRun<T>) -> Result<()> {
        for j in run.layer + 1..=self.ladder.layers() {
            self.sample_increment(run, j)?;
        }
        Ok(())
    }

    /// A full run for one replica.
    pub fn run(&self, master_seed: u64, replica: u64) -> FieldRun<T> {
        let mut run = self.start(master_seed, replica);
        self.complete(&mut run).expect("fresh run advances through its own ladder");
        run
    }

    /// A full run, also returning the values at every layer boundary `0..=m`.
    pub fn run_with_snapshots(&self, master_seed: u64, replica: u64) -> (FieldRun<T>, Vec<Vec<T>>) {
        let mut run = self.start(master_seed, replica);
        let mut snaps = vec![run.values.clone()];
        for j in 1..=self.ladder.layers() {
            self.sample_increment(&mut run, j).expect("sequential layers");
            snaps.push(run.values.clone());
        }
        (run, snaps)
    }

    /// Run every replica in `replicas` in parallel and map each completed run,
    /// returning results in replica order.
    pub fn map_replicas<R, F>(&self, master_seed: u64, replicas: std::ops::Range<u64>, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(FieldRun<T>) -> R + Sync + Send,
    {
        replicas
            .into_par_iter()
            .map(|r| f(self.run(master_seed, r)))
            .collect()
    }

    /// Like [`Self::map_replicas`] but hands the callback the run after every layer.
    pub fn scan_replicas<R, F>(&self, master_seed: u64, replicas: std::ops::Range<u64>, f: F) -> Vec<Vec<R>>
    where
        R: Send,
        F: Fn(&FieldRun<T>) -> R + Sync + Send,
    {
        replicas
            .into_par_iter()
            .map(|r| {
                let mut run = self.start(master_seed, r);
                let mut out = Vec::with_capacity(self.ladder.layers() + 1);
                out.push(f(&run));
                for j in 1..=self.ladder.layers() {
                    self.sample_increment(&mut run, j).expect("sequential layers");
                    out.push(f(&run));
                }
                out
            })
            .collect()
    }

    /// Recompute the running supremum from stored layer snapshots.
    pub fn recompute_running_sup(&self, snapshots: &[Vec<T>], master_seed: u64, replica: u64) -> Result<Vec<T>> {
        if snapshots.len() != self.ladder.layers() + 1 {
            return Err(invalid(format!(
                "expected {} snapshots, got {}",
                self.ladder.layers() + 1,
                snapshots.len()
            )));
        }
        let mut sup = vec![T::zero(); self.grid.cell_count()];
        for j in 1..snapshots.len() {
            self.update_sup(j, &snapshots[j - 1], &snapshots[j], &mut sup, master_seed, replica);
        }
        Ok(sup)
    }
}

/// Smallest number `>= n` whose only prime factors are 2, 3 and 5.
pub(crate) fn next_smooth(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

pub(crate) fn normal_pair<R: rand::Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    (std_normal(rng), std_normal(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::SeedKernel;
    use proptest::prelude::*;

    fn tri_sampler(n: usize, ladder: ScaleLadder, backend: Backend, mode: SupMode) -> FieldSampler<f64> {
        FieldSampler::new(
            StarCovariance::new(SeedKernel::triangle(1.0).unwrap()),
            GridSpec::new(1, n, 1.0).unwrap(),
            ladder,
            backend,
            mode,
        )
        .unwrap()
    }

    #[test]
    fn grid_geometry() {
        let g = GridSpec::new(2, 4, 2.0).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.cell_count(), 16);
        assert_eq!(g.cell_center(0), [0.25, 0.25]);
        assert_eq!(g.cell_center(6), [1.25, 0.75]);
        assert_eq!(g.distance(0, 5), 0.5 * 2f64.sqrt());
        assert!(GridSpec::new(3, 4, 1.0).is_err());
        assert!(GridSpec::new(1, 1, 1.0).is_err());
    }

    #[test]
    fn ladder_construction() {
        let l = ScaleLadder::uniform(1.0, 0.3).unwrap();
        assert_eq!(l.layers(), 4);
        assert_eq!(l.t_max(), 1.0);
        let l = ScaleLadder::uniform(1.0, 0.25).unwrap();
        assert_eq!(l.times(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(ScaleLadder::uniform(0.0, 0.1).unwrap().layers(), 0);
        assert!(ScaleLadder::from_times(vec![0.0, 1.0, 1.0]).is_err());
        assert!(ScaleLadder::uniform(1.0, 0.0).is_err());
    }

    #[test]
    fn smooth_sizes() {
        assert_eq!(next_smooth(768), 768);
        assert_eq!(next_smooth(769), 800);
        assert_eq!(next_smooth(7), 8);
    }

    #[test]
    fn runs_are_deterministic() {
        for backend in [Backend::Cholesky, Backend::Circulant, Backend::Cone { bands_per_unit: 16 }] {
            let s = tri_sampler(32, ScaleLadder::uniform(2.0, 0.5).unwrap(), backend, SupMode::Bridge);
            let a = s.run(11, 5);
            let b = s.run(11, 5);
            assert_eq!(a, b);
            assert_ne!(a.values(), s.run(11, 6).values());
        }
    }

    #[test]
    fn zero_width_layer_keeps_values() {
        let s = tri_sampler(16, ScaleLadder::uniform(1.0, 0.5).unwrap(), Backend::Circulant, SupMode::Bridge);
        let c = s.covariance();
        assert_eq!(c.band(0.5, 0.5, &[0.0]).unwrap(), 0.0);
        let plan = circulant::CirculantPlan::<f64>::new(s.grid(), 1.0);
        let f = plan.factor(c, 0.5, 0.5).unwrap();
        let mut rng = StreamKey::new(1, 1, 1, Purpose::FieldLayer).rng();
        assert!(plan.sample(&f, s.grid(), &mut rng).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn layers_must_be_sequential() {
        let s = tri_sampler(16, ScaleLadder::uniform(1.0, 0.5).unwrap(), Backend::Circulant, SupMode::Bridge);
        let mut run = s.start(1, 0);
        assert!(s.sample_increment(&mut run, 2).is_err());
        s.sample_increment(&mut run, 1).unwrap();
        s.sample_increment(&mut run, 2).unwrap();
        assert!(s.sample_increment(&mut run, 3).is_err());
    }

    #[test]
    fn backend_guards() {
        let cov = StarCovariance::new(SeedKernel::spline(2, 1.0).unwrap());
        let grid = GridSpec::new(2, 65, 1.0).unwrap();
        let ladder = ScaleLadder::uniform(1.0, 1.0).unwrap();
        assert!(FieldSampler::<f64>::new(cov.clone(), grid, ladder.clone(), Backend::Cholesky, SupMode::Bridge).is_err());
        let grid = GridSpec::new(2, 8, 1.0).unwrap();
        assert!(matches!(
            FieldSampler::<f64>::new(cov, grid, ladder, Backend::Cone { bands_per_unit: 16 }, SupMode::Bridge),
            Err(Error::UnsupportedBackend(_))
        ));
    }

    #[test]
    fn running_sup_recomputes_exactly() {
        for mode in [SupMode::Bridge, SupMode::Boundary] {
            let s = tri_sampler(32, ScaleLadder::uniform(3.0, 0.25).unwrap(), Backend::Circulant, mode);
            let (run, snaps) = s.run_with_snapshots(3, 9);
            let again = s.recompute_running_sup(&snaps, 3, 9).unwrap();
            assert_eq!(run.running_sup(), &again[..]);
            let c = 2f64.sqrt();
            for (j, snap) in snaps.iter().enumerate() {
                let t = s.ladder().time(j);
                for (m, x) in run.running_sup().iter().zip(snap) {
                    assert!(*m >= x - c * t);
                }
            }
        }
    }

    #[test]
    fn f32_runs() {
        let s = FieldSampler::<f32>::new(
            StarCovariance::new(SeedKernel::triangle(1.0).unwrap()),
            GridSpec::new(1, 16, 1.0).unwrap(),
            ScaleLadder::uniform(1.0, 0.5).unwrap(),
            Backend::Circulant,
            SupMode::Bridge,
        )
        .unwrap();
        let run = s.run(1, 2);
        assert!(run.values().iter().all(|v| v.is_finite()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn sup_dominates_boundary_values(seed in 0u64..1000, dt in 0.05f64..1.0) {
            let s = tri_sampler(8, ScaleLadder::uniform(2.0, dt).unwrap(), Backend::Cholesky, SupMode::Bridge);
            let (run, snaps) = s.run_with_snapshots(seed, 0);
            let c = 2f64.sqrt();
            for (j, snap) in snaps.iter().enumerate() {
                let t = s.ladder().time(j);
                for (m, x) in run.running_sup().iter().zip(snap) {
                    prop_assert!(*m >= x - c * t);
                }
            }
        }
    }
}
