//! Named experiments: each turns a configuration into output files.

use crate::config::Config;
use crate::error::CliError;
use crate::manifest::TOOL_VERSION;
use gmc_core::analysis::{self, RhsForm, SpineMode, StarKind, StarSetup, TestKind};
use gmc_core::cascade::{self, CascadeSpec};
use gmc_core::field::{self, Backend, FieldRun, FieldSampler, GridSpec, ScaleLadder, SupMode};
use gmc_core::kernels::{KernelFamily, SeedKernel, StarCovariance};
use gmc_core::measures::{self, CellMeasure, MeasureKind, Region};
use gmc_core::rng::{Purpose, StreamKey};
use serde::Serialize;
use serde_json::{json, Value};

/// One file produced by an experiment, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub path: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Default)]
pub struct Produced {
    pub outputs: Vec<Output>,
    pub warnings: Vec<String>,
}

type Runner = fn(&Ctx) -> Result<Produced, CliError>;

pub const EXPERIMENTS: &[(&str, Runner)] = &[
    ("sample", sample),
    ("measure", measure),
    ("cascade", cascade_dump),
    ("covariance", covariance),
    ("martingale", martingale),
    ("derivative_mean", derivative_mean),
    ("critical_vanishing", critical_vanishing),
    ("spectrum", spectrum),
    ("diffz", diffz),
    ("subordination", subordination),
    ("spine", spine),
    ("star", star),
    ("null_uniformity", null_uniformity),
    ("kahane", kahane),
    ("calibrate", calibrate),
    ("atoms", atoms),
    ("maxima", maxima),
    ("moments", moments),
    ("pd", pd),
];

pub fn experiment_names() -> Vec<&'static str> {
    EXPERIMENTS.iter().map(|(n, _)| *n).collect()
}

pub fn run_experiment(name: &str, cfg: &Config, master: u64) -> Result<Produced, CliError> {
    let runner = EXPERIMENTS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, r)| *r)
        .ok_or_else(|| CliError::UnknownExperiment {
            name: name.into(),
            accepted: experiment_names().join(", "),
        })?;
    runner(&Ctx { cfg, master })
}

pub struct Ctx<'a> {
    pub cfg: &'a Config,
    pub master: u64,
}

impl Ctx<'_> {
    fn replicas(&self) -> Result<u64, CliError> {
        let r: u64 = self.cfg.get("run.replicas")?;
        if r == 0 {
            return Err(gmc_core::Error::InvalidArgument("run.replicas must be positive".into()).into());
        }
        Ok(r)
    }

    fn dimension(&self) -> Result<usize, CliError> {
        Ok(self.cfg.get("field.dimension")?)
    }

    fn covariance(&self) -> Result<StarCovariance, CliError> {
        let d = self.dimension()?;
        let radius: f64 = self.cfg.get("kernel.radius")?;
        let family = match self.cfg.choice("kernel.family", &["auto", "triangle", "spline"])?.as_str() {
            "triangle" => KernelFamily::Triangle1D,
            "spline" => KernelFamily::CompactSpline,
            _ if d == 1 => KernelFamily::Triangle1D,
            _ => KernelFamily::CompactSpline,
        };
        Ok(StarCovariance::new(SeedKernel::new(family, d, radius)?))
    }

    fn grid(&self) -> Result<GridSpec, CliError> {
        Ok(GridSpec::new(self.dimension()?, self.cfg.get("field.cells")?, self.cfg.get("field.extent")?)?)
    }

    fn backend(&self) -> Result<Backend, CliError> {
        Ok(match self.cfg.choice("field.backend", &["circulant", "cholesky", "cone"])?.as_str() {
            "cholesky" => Backend::Cholesky,
            "cone" => Backend::Cone {
                bands_per_unit: self.cfg.get("field.cone_bands_per_unit")?,
            },
            _ => Backend::Circulant,
        })
    }

    fn t_max(&self) -> Result<f64, CliError> {
        Ok(self.cfg.get("field.t_max")?)
    }

    /// Sampler on the configured grid and ladder, with the depth replaced by `t`.
    fn sampler_at(&self, t: f64) -> Result<FieldSampler<f64>, CliError> {
        let sup = match self.cfg.choice("field.sup_mode", &["bridge", "boundary"])?.as_str() {
            "boundary" => SupMode::Boundary,
            _ => SupMode::Bridge,
        };
        let ladder = ScaleLadder::uniform(t, self.cfg.get("field.delta_t")?)?;
        Ok(FieldSampler::new(self.covariance()?, self.grid()?, ladder, self.backend()?, sup)?)
    }

    fn sampler(&self) -> Result<FieldSampler<f64>, CliError> {
        self.sampler_at(self.t_max()?)
    }

    fn measure_kind(&self) -> Result<MeasureKind, CliError> {
        let raw = self.cfg.raw("measure.kind");
        raw.parse().map_err(|_| {
            crate::config::ConfigError::InvalidValue {
                key: "measure.kind".into(),
                value: raw.into(),
                expected: MeasureKind::ALL.map(|k| k.name()).join(" | "),
            }
            .into()
        })
    }

    fn build_measure(&self, run: &FieldRun<f64>) -> Result<CellMeasure<f64>, CliError> {
        let kind = self.measure_kind()?;
        build_measure(kind, run, self.cfg, self.master)
    }

    fn report(&self, name: &str, parameters: Value, result: impl Serialize) -> Result<Output, CliError> {
        let body = json!({
            "test": name,
            "tool_version": TOOL_VERSION,
            "master_seed": self.master,
            "parameters": parameters,
            "result": result,
        });
        let mut bytes = serde_json::to_vec_pretty(&body).expect("report serializes");
        bytes.push(b'\n');
        Ok(Output {
            path: format!("reports/{name}.json"),
            bytes,
        })
    }
}

/// Build the configured measure kind from a completed run.
pub fn build_measure(kind: MeasureKind, run: &FieldRun<f64>, cfg: &Config, master: u64) -> Result<CellMeasure<f64>, CliError> {
    let gamma: f64 = cfg.get("measure.gamma")?;
    let beta: f64 = cfg.get("measure.beta")?;
    let critical = (2.0 * run.grid().dimension() as f64).sqrt();
    Ok(match kind {
        MeasureKind::Subcritical => measures::chaos_measure(run, gamma)?,
        MeasureKind::CriticalStandard => measures::chaos_measure(run, critical)?,
        MeasureKind::SenetaHeyde => measures::seneta_heyde(run),
        MeasureKind::Derivative => measures::derivative_measure(run),
        MeasureKind::StoppedZ => measures::stopped_measures(run, beta)?.z,
        MeasureKind::StoppedZTilde => measures::stopped_measures(run, beta)?.z_tilde,
        MeasureKind::StableSubordinated => {
            let key = StreamKey::new(master, run.replica(), 0, Purpose::Subordination);
            measures::stable_subordinate(&measures::derivative_measure(run), cfg.get("measure.alpha")?, key)?.0
        }
        MeasureKind::SupercriticalRenorm => measures::supercritical_renorm(run, gamma)?,
        MeasureKind::Gibbs => {
            let base = if gamma > critical {
                measures::supercritical_renorm(run, gamma)?
            } else {
                measures::chaos_measure(run, gamma)?
            };
            measures::gibbs_measure(&base, &Region::All)?
        }
    })
}

fn collect<T>(v: Vec<Result<T, CliError>>) -> Result<Vec<T>, CliError> {
    v.into_iter().collect()
}

fn sample(ctx: &Ctx) -> Result<Produced, CliError> {
    let s = ctx.sampler()?;
    let outputs = collect(s.map_replicas(ctx.master, 0..ctx.replicas()?, |run| {
        let mut bytes = Vec::new();
        field::write_snapshot(&run, &mut bytes)?;
        Ok(Output {
            path: format!("fields/replica_{:05}.snap", run.replica()),
            bytes,
        })
    }))?;
    Ok(Produced {
        outputs,
        warnings: s.covariance().seed().warnings().to_vec(),
    })
}

fn measure(ctx: &Ctx) -> Result<Produced, CliError> {
    let s = ctx.sampler()?;
    let per = collect(s.map_replicas(ctx.master, 0..ctx.replicas()?, |run| {
        let m = ctx.build_measure(&run)?;
        let mut bytes = Vec::new();
        measures::write_measure_csv(&m, &mut bytes)?;
        let total = m.total();
        Ok((
            Output {
                path: format!("measures/replica_{:05}.csv", run.replica()),
                bytes,
            },
            format!("{},{},{}\n", run.replica(), total.log_abs, total.sign),
        ))
    }))?;
    let mut totals = String::from("replica,log_total,sign\n");
    let mut outputs = Vec::with_capacity(per.len() + 1);
    for (o, line) in per {
        outputs.push(o);
        totals.push_str(&line);
    }
    outputs.push(Output {
        path: "measures/totals.csv".into(),
        bytes: totals.into_bytes(),
    });
    Ok(Produced {
        outputs,
        warnings: vec![],
    })
}

fn cascade_spec(ctx: &Ctx) -> Result<CascadeSpec, CliError> {
    let d = ctx.dimension()?;
    let depth: usize = ctx.cfg.get("cascade.depth")?;
    Ok(match ctx.cfg.raw("cascade.intensity") {
        "critical" => CascadeSpec::critical(d, depth)?,
        _ => CascadeSpec::new(d, depth, ctx.cfg.get("cascade.intensity")?)?,
    })
}

fn cascade_dump(ctx: &Ctx) -> Result<Produced, CliError> {
    let spec = cascade_spec(ctx)?;
    let mut outputs = Vec::new();
    let mut totals = String::from("replica,standard,derivative\n");
    for r in 0..ctx.replicas()? {
        let run = cascade::cascade_sample(spec, ctx.master, r)?;
        let mut bytes = Vec::new();
        cascade::write_leaf_csv(&cascade::cascade_measure(&run), &mut bytes)?;
        outputs.push(Output {
            path: format!("cascade/replica_{r:05}.csv"),
            bytes,
        });
        let t = run.totals();
        let der = t.derivative.map(|v| v.to_string()).unwrap_or_default();
        totals.push_str(&format!("{r},{},{der}\n", t.standard));
    }
    outputs.push(Output {
        path: "cascade/totals.csv".into(),
        bytes: totals.into_bytes(),
    });
    Ok(Produced {
        outputs,
        warnings: vec![],
    })
}

fn single(output: Output) -> Produced {
    Produced {
        outputs: vec![output],
        warnings: vec![],
    }
}

fn covariance(ctx: &Ctx) -> Result<Produced, CliError> {
    let s = ctx.sampler()?;
    let grid = *s.grid();
    let t = ctx.t_max()?;
    let n = grid.cell_count();
    let probes = 20.min(n);
    let pairs: Vec<(usize, usize)> = (0..probes).map(|k| (0, k * (n / 2).max(1) / probes)).collect();
    let samples = s.map_replicas(ctx.master, 0..ctx.replicas()?, |run| run.values().to_vec());
    let est = field::empirical_covariance(&samples, &pairs)?;
    let rows = est
        .iter()
        .map(|e| {
            let expected = s.covariance().eval_radial(t, grid.distance(e.pair.0, e.pair.1))?;
            Ok(json!({
                "pair": e.pair,
                "distance": grid.distance(e.pair.0, e.pair.1),
                "estimate": e.estimate,
                "std_err": e.std_err,
                "expected": expected,
                "z": (e.estimate - expected) / e.std_err,
            }))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let pass = rows.iter().all(|r| r["z"].as_f64().map(|z| z.abs() <= 4.0).unwrap_or(false));
    Ok(single(ctx.report(
        "covariance",
        json!({"t": t, "backend": format!("{:?}", s.backend()), "replicas": samples.len()}),
        json!({"probes": rows, "within_4_se": pass}),
    )?))
}

fn martingale(ctx: &Ctx) -> Result<Produced, CliError> {
    let beta: f64 = ctx.cfg.get("measure.beta")?;
    let mut rows = Vec::new();
    for t in ctx.cfg.list::<f64>("analysis.t_values")? {
        let s = ctx.sampler_at(t)?;
        let totals = collect(s.map_replicas(ctx.master, 0..ctx.replicas()?, |run| {
            Ok(measures::stopped_measures(&run, beta)?.z.total().value())
        }))?;
        let est = analysis::mean_se(&totals);
        let target = beta * s.grid().extent().powi(s.grid().dimension() as i32);
        rows.push(json!({"t": t, "estimate": est, "target": target, "z": est.z_score(target)}));
    }
    Ok(single(ctx.report("martingale", json!({"beta": beta}), rows)?))
}

fn derivative_mean(ctx: &Ctx) -> Result<Produced, CliError> {
    let mut rows = Vec::new();
    for t in ctx.cfg.list::<f64>("analysis.t_values")? {
        let s = ctx.sampler_at(t)?;
        rows.push(analysis::rooted_derivative_mean(&s, ctx.master, ctx.replicas()?)?);
    }
    Ok(single(ctx.report("derivative_mean", json!({}), rows)?))
}

fn critical_vanishing(ctx: &Ctx) -> Result<Produced, CliError> {
    let d = ctx.dimension()?;
    let mut field_rows = Vec::new();
    for t in ctx.cfg.list::<f64>("analysis.t_values")? {
        let s = ctx.sampler_at(t)?;
        let totals = collect(s.map_replicas(ctx.master, 0..ctx.replicas()?, |run| {
            Ok(measures::chaos_measure(&run, (2.0 * d as f64).sqrt())?.total().value())
        }))?;
        field_rows.push(json!({"t": t, "median": analysis::median(&totals)}));
    }
    let spec = cascade_spec(ctx)?;
    let mut cascade_rows = Vec::new();
    for depth in [spec.depth() / 2, spec.depth()] {
        let sub = CascadeSpec::new(d, depth, spec.intensity())?;
        let totals: Vec<f64> = (0..ctx.replicas()?)
            .map(|r| cascade::cascade_totals(sub, ctx.master, r).standard)
            .collect();
        cascade_rows.push(json!({"depth": depth, "median": analysis::median(&totals)}));
    }
    Ok(single(ctx.report(
        "critical_vanishing",
        json!({}),
        json!({"field": field_rows, "cascade": cascade_rows}),
    )?))
}

fn spectrum(ctx: &Ctx) -> Result<Produced, CliError> {
    let s = ctx.sampler()?;
    let ms = collect(s.map_replicas(ctx.master, 0..ctx.replicas()?, |run| ctx.build_measure(&run)))?;
    let q = ctx.cfg.list::<f64>("analysis.q")?;
    let est = analysis::estimate_spectrum(&ms, &q)?;
    let gamma = ms[0].gamma();
    let reference: Vec<f64> = q.iter().map(|&q| analysis::lognormal_spectrum(q, gamma, s.grid().dimension())).collect();
    let warnings = est.warnings.clone();
    let out = ctx.report(
        "spectrum",
        json!({"kind": ms[0].kind().name(), "gamma": gamma, "t": ctx.t_max()?}),
        json!({"estimate": est, "lognormal_reference": reference}),
    )?;
    Ok(Produced {
        outputs: vec![out],
        warnings,
    })
}

fn diffz(ctx: &Ctx) -> Result<Produced, CliError> {
    let s = ctx.sampler()?;
    let beta: f64 = ctx.cfg.get("measure.beta")?;
    let d = s.grid().dimension();
    let checks = collect(s.map_replicas(ctx.master, 0..ctx.replicas()?, |run| {
        let pair = measures::stopped_measures(&run, beta)?;
        let crit = measures::chaos_measure(&run, (2.0 * d as f64).sqrt())?;
        let survivors = pair.survivors.iter().filter(|&&a| a).count();
        Ok((measures::check_diffz(&pair, &crit), survivors))
    }))?;
    let mismatches: usize = checks.iter().map(|c| c.0.mismatches).sum();
    let survivors: usize = checks.iter().map(|c| c.1).sum();
    let cells: usize = checks.iter().map(|c| c.0.cells).sum();
    Ok(single(ctx.report(
        "diffz",
        json!({"beta": beta, "t": ctx.t_max()?}),
        json!({"cells": cells, "survivors": survivors, "mismatches": mismatches, "exact": mismatches == 0}),
    )?))
}

fn subordination(ctx: &Ctx) -> Result<Produced, CliError> {
    let s = ctx.sampler()?;
    let alpha: f64 = ctx.cfg.get("measure.alpha")?;
    let base = measures::derivative_measure(&s.run(ctx.master, 0));
    let positive: f64 = (0..base.len()).map(|i| base.mass(i).max(0.0)).sum();
    let draws = ctx.replicas()?;
    let totals: Vec<f64> = collect(
        (0..draws)
            .map(|r| {
                let key = StreamKey::new(ctx.master, r, 0, Purpose::Subordination);
                let (m, _) = measures::stable_subordinate(&base, alpha, key)?;
                Ok(m.total().value())
            })
            .collect(),
    )?;
    let rows: Vec<Value> = ctx
        .cfg
        .list::<f64>("analysis.q")?
        .into_iter()
        .map(|q| {
            let v: Vec<f64> = totals.iter().map(|n| (-q * n).exp()).collect();
            let est = analysis::mean_se(&v);
            let target = (-q.powf(alpha) * positive).exp();
            json!({"q": q, "estimate": est, "target": target, "z": est.z_score(target)})
        })
        .collect();
    Ok(single(ctx.report("subordination", json!({"alpha": alpha, "base_mass": positive}), rows)?))
}

fn spine(ctx: &Ctx) -> Result<Produced, CliError> {
    let s = ctx.sampler()?;
    let mode = match ctx.cfg.choice("analysis.spine_mode", &["tilted", "raw", "unweighted"])?.as_str() {
        "raw" => SpineMode::Raw,
        "unweighted" => SpineMode::Unweighted,
        _ => SpineMode::Tilted,
    };
    let r = analysis::spine_bessel_test(
        &s,
        0,
        ctx.cfg.get("measure.beta")?,
        mode,
        ctx.master,
        ctx.replicas()?,
        ctx.cfg.get("analysis.min_ess")?,
    )?;
    Ok(single(ctx.report("spine", json!({}), r)?))
}

fn star_setup(ctx: &Ctx) -> Result<StarSetup, CliError> {
    Ok(StarSetup {
        covariance: ctx.covariance()?,
        grid: ctx.grid()?,
        backend: ctx.backend()?,
    })
}

fn star_kind(ctx: &Ctx) -> Result<StarKind, CliError> {
    Ok(match ctx.cfg.choice("analysis.star_kind", &["derivative", "chaos"])?.as_str() {
        "chaos" => StarKind::Chaos {
            gamma: ctx.cfg.get("measure.gamma")?,
        },
        _ => StarKind::Derivative,
    })
}

fn star(ctx: &Ctx) -> Result<Produced, CliError> {
    let form = match ctx.cfg.choice("analysis.form", &["exact", "limit"])?.as_str() {
        "limit" => RhsForm::Limit,
        _ => RhsForm::Exact,
    };
    let test = match ctx.cfg.choice("analysis.test", &["ks", "ad"])?.as_str() {
        "ad" => TestKind::AndersonDarling,
        _ => TestKind::KS2,
    };
    let r = analysis::star_equation_test(
        &star_setup(ctx)?,
        star_kind(ctx)?,
        form,
        &Region::All,
        ctx.cfg.get("analysis.s")?,
        ctx.t_max()?,
        ctx.cfg.get("analysis.samples")?,
        test,
        ctx.master,
    )?;
    Ok(single(ctx.report("star", json!({}), r)?))
}

fn null_uniformity(ctx: &Ctx) -> Result<Produced, CliError> {
    let r = analysis::null_uniformity(
        &star_setup(ctx)?,
        star_kind(ctx)?,
        ctx.t_max()?,
        ctx.cfg.get("analysis.samples")?,
        ctx.cfg.get("analysis.reruns")?,
        0.02,
        ctx.master,
    )?;
    Ok(single(ctx.report("null_uniformity", json!({}), r)?))
}

fn kahane(ctx: &Ctx) -> Result<Produced, CliError> {
    let spec = cascade_spec(ctx)?;
    let d = spec.dimension();
    let t = spec.depth() as f64 * std::f64::consts::LN_2;
    let grid = GridSpec::new(d, 1 << spec.depth(), 1.0)?;
    let cov = ctx.covariance()?;
    let s = FieldSampler::<f64>::new(cov.clone(), grid, ScaleLadder::from_times(vec![0.0, t])?, ctx.backend()?, SupMode::Boundary)?;
    let replicas = ctx.replicas()?;
    let cascades = collect((0..replicas).map(|r| Ok(cascade::cascade_sample(spec, ctx.master, r)?)).collect())?;
    let fields = s.map_replicas(StreamKey::derive_master(ctx.master, 1), 0..replicas, |run| run);
    let r = cascade::embed_and_compare(&cascades, &fields, &cov, StreamKey::derive_master(ctx.master, 2))?;
    Ok(single(ctx.report("kahane", json!({"depth": spec.depth(), "intensity": spec.intensity()}), r)?))
}

fn calibrate(ctx: &Ctx) -> Result<Produced, CliError> {
    let s = ctx.sampler()?;
    let gammas = ctx.cfg.list::<f64>("analysis.gammas")?;
    // One set of runs serves every γ (common random numbers).
    let totals: Vec<Vec<f64>> = collect(s.map_replicas(ctx.master, 0..ctx.replicas()?, |run| {
        gammas
            .iter()
            .map(|&g| Ok(measures::chaos_measure(&run, g)?.total().value()))
            .collect::<Result<Vec<f64>, CliError>>()
    }))?;
    let results = gammas
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            let masses: Vec<f64> = totals.iter().map(|row| row[k]).collect();
            Ok(analysis::calibrate_lambda(g, &masses, 0.5)?)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(single(ctx.report("calibrate", json!({"t": ctx.t_max()?}), results)?))
}

fn atoms(ctx: &Ctx) -> Result<Produced, CliError> {
    let s = ctx.sampler()?;
    let ms = collect(s.map_replicas(ctx.master, 0..ctx.replicas()?, |run| ctx.build_measure(&run)))?;
    let curve = analysis::atom_scan(
        &ms,
        &ctx.cfg.list::<f64>("analysis.deltas")?,
        &ctx.cfg.list::<usize>("analysis.resolutions")?,
        1.96,
    )?;
    Ok(single(ctx.report("atoms", json!({"kind": ms[0].kind().name()}), curve)?))
}

fn maxima(ctx: &Ctx) -> Result<Produced, CliError> {
    let mut samples = Vec::new();
    for t in ctx.cfg.list::<f64>("analysis.t_values")? {
        let s = ctx.sampler_at(t)?;
        samples.push((t, s.map_replicas(ctx.master, 0..ctx.replicas()?, |run| analysis::max_statistic(&run))));
    }
    let rows = analysis::max_statistics(&samples, ctx.cfg.get("field.cells")?, ctx.cfg.get("analysis.bootstrap")?, ctx.master)?;
    let warnings = rows
        .iter()
        .filter(|r| r.under_resolved)
        .map(|r| format!("t = {} is under-resolved by the grid", r.t))
        .collect();
    Ok(Produced {
        outputs: vec![ctx.report("maxima", json!({}), rows)?],
        warnings,
    })
}

fn moments(ctx: &Ctx) -> Result<Produced, CliError> {
    let mut samples = Vec::new();
    for t in ctx.cfg.list::<f64>("analysis.t_values")? {
        let s = ctx.sampler_at(t)?;
        let totals = collect(s.map_replicas(ctx.master, 0..ctx.replicas()?, |run| Ok(ctx.build_measure(&run)?.total().value())))?;
        samples.push((t, totals));
    }
    let table = analysis::moment_scan(&samples, &ctx.cfg.list::<f64>("analysis.q")?)?;
    Ok(single(ctx.report("moments", json!({"kind": ctx.cfg.raw("measure.kind")}), table)?))
}

fn pd(ctx: &Ctx) -> Result<Produced, CliError> {
    let s = ctx.sampler()?;
    let gamma: f64 = ctx.cfg.get("measure.gamma")?;
    let d = s.grid().dimension();
    let alpha = (2.0 * d as f64).sqrt() / gamma;
    let gibbs = collect(s.map_replicas(ctx.master, 0..ctx.replicas()?, |run| {
        let base = measures::supercritical_renorm(&run, gamma)?;
        Ok(measures::gibbs_measure(&base, &Region::All)?)
    }))?;
    let report = analysis::poisson_dirichlet_stats(&gibbs, alpha, 10)?;
    let reference = analysis::pd_reference_overlap(alpha, ctx.replicas()? as usize, ctx.cfg.get("analysis.sticks")?, StreamKey::derive_master(ctx.master, 3))?;
    Ok(single(ctx.report(
        "pd",
        json!({"gamma": gamma, "alpha": alpha}),
        json!({"gibbs": report, "reference_sampler": reference}),
    )?))
}
