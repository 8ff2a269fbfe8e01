//! Config-driven experiment runs and their data outputs.
//!
//! A run replicates chains over `kernels × N × seeds` on a worker pool and
//! writes CSV/JSON tables keyed by `(experiment, kernel, N, seed)` together
//! with a manifest holding the fully resolved configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{run_chain, ChainTrace};
use crate::diagnostics::{acf, empirical_tv, mean_acceptance, Binning};
use crate::discrete_walk::{classify, marginal_birth_death, noisy_birth_death, ClassifyOptions, WalkClassification};
use crate::error::{Error, Result};
use crate::hmm_smc::LgssmPosterior;
use crate::kernels::{KernelKind, KernelSpec};
use crate::presets::{run_preset, HmmSetup};
use crate::proposal::ProposalSpec;
use crate::rng::RngStream;
use crate::state::State;
use crate::target::TargetSpec;
use crate::weights::WeightModel;

pub const TOOL: &str = "nmh";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const GIT_DESCRIBE: &str = env!("NMH_GIT_DESCRIBE");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Acceptance,
    Moments,
    Acf,
    Tv,
    Histogram,
    Classification,
}

/// A fully resolved experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub preset: Option<String>,
    pub target: TargetSpec,
    pub proposal: ProposalSpec,
    pub weights: WeightModel,
    pub kernels: Vec<KernelKind>,
    pub n_values: Vec<usize>,
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seeds: Vec<u64>,
    pub x0: State,
    pub diagnostics: Vec<DiagnosticKind>,
    pub acf_max_lag: usize,
    pub binning: Binning,
    pub classify_m: i64,
    pub write_traces: bool,
    pub gnuplot: bool,
    pub hmm: Option<HmmSetup>,
    pub output_dir: PathBuf,
}

/// User-facing config: a preset name plus overrides, or a full explicit model.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub name: Option<String>,
    pub preset: Option<String>,
    pub target: Option<TargetSpec>,
    pub proposal: Option<ProposalSpec>,
    pub weights: Option<WeightModel>,
    pub kernels: Option<Vec<KernelKind>>,
    #[serde(alias = "N")]
    pub n_values: Option<Vec<usize>>,
    pub iterations: Option<usize>,
    pub burnin: Option<usize>,
    pub thin: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub x0: Option<State>,
    pub diagnostics: Option<Vec<DiagnosticKind>>,
    pub acf_max_lag: Option<usize>,
    pub binning: Option<Binning>,
    pub classify_m: Option<i64>,
    pub write_traces: Option<bool>,
    pub gnuplot: Option<bool>,
    pub hmm: Option<HmmSetup>,
    pub output_dir: Option<PathBuf>,
}

/// Emitted next to the outputs of every run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub git_describe: String,
    pub config: ExperimentConfig,
}

fn parse_error(e: serde_json::Error) -> Error {
    let msg = e.to_string();
    let key = msg
        .split('`')
        .nth(1)
        .filter(|_| msg.starts_with("unknown field"))
        .unwrap_or("<root>")
        .to_owned();
    Error::config(key, msg)
}

impl RawConfig {
    /// Parse a config, or the `config` section of a manifest.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(parse_error)?;
        let v = match v {
            serde_json::Value::Object(mut m) if m.contains_key("tool") && m.contains_key("config") => {
                m.remove("config").expect("checked")
            }
            other => other,
        };
        serde_json::from_value(v).map_err(parse_error)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn preset(name: &str) -> Self {
        RawConfig {
            preset: Some(name.to_owned()),
            ..Default::default()
        }
    }

    /// Apply preset defaults and overrides, then validate.
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let base = self.preset.as_deref().map(run_preset).transpose()?;
        let need = |key: &str| Error::config(key, "required when no preset is given");
        let name = self
            .name
            .or_else(|| base.as_ref().map(|b| b.name.to_owned()))
            .unwrap_or_else(|| "experiment".to_owned());
        let hmm = self.hmm.or_else(|| base.as_ref().and_then(|b| b.hmm.clone()));
        let (target, weights) = match &hmm {
            Some(h) => {
                let observations = h.observations().map_err(|e| Error::config("hmm", e.to_string()))?;
                let target = TargetSpec::LgssmPosterior(LgssmPosterior {
                    prior: h.prior.clone(),
                    observations: observations.clone(),
                });
                let weights = WeightModel::SmcLikelihood { observations };
                if let Some(t) = &self.target {
                    if serde_json::to_value(t)? != serde_json::to_value(&target)? {
                        return Err(Error::config("target", "conflicts with the target derived from `hmm`"));
                    }
                }
                if self.weights.as_ref().is_some_and(|w| *w != weights) {
                    return Err(Error::config("weights", "conflicts with the weights derived from `hmm`"));
                }
                (target, weights)
            }
            None => (
                self.target
                    .or_else(|| base.as_ref().map(|b| b.target.clone()))
                    .ok_or_else(|| need("target"))?,
                self.weights
                    .or_else(|| base.as_ref().map(|b| b.weights.clone()))
                    .unwrap_or(WeightModel::Unit),
            ),
        };
        let proposal = self
            .proposal
            .or_else(|| base.as_ref().map(|b| b.proposal.clone()))
            .ok_or_else(|| need("proposal"))?;
        let x0 = self
            .x0
            .or_else(|| base.as_ref().map(|b| b.x0.clone()))
            .ok_or_else(|| need("x0"))?;
        let lattice = matches!(x0, State::Integer(_));
        let default_diagnostics = || {
            let mut d = vec![DiagnosticKind::Acceptance, DiagnosticKind::Moments, DiagnosticKind::Acf];
            if target.pmf(1).is_some() || target.location_scale().is_some() {
                d.extend([DiagnosticKind::Tv, DiagnosticKind::Histogram]);
            }
            if lattice && weights.is_enumerable() && matches!(proposal, ProposalSpec::IntegerWalk { .. }) {
                d.push(DiagnosticKind::Classification);
            }
            d
        };
        let mut diagnostics = self.diagnostics.unwrap_or_else(default_diagnostics);
        diagnostics.sort();
        diagnostics.dedup();
        let cfg = ExperimentConfig {
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from("nmh-out").join(&name)),
            preset: self.preset,
            kernels: self
                .kernels
                .or_else(|| base.as_ref().map(|b| b.kernels.clone()))
                .unwrap_or_else(|| KernelKind::ALL.to_vec()),
            n_values: self
                .n_values
                .or_else(|| base.as_ref().map(|b| b.n_values.clone()))
                .unwrap_or_else(|| vec![1]),
            iterations: self
                .iterations
                .or_else(|| base.as_ref().map(|b| b.iterations))
                .unwrap_or(10_000),
            // a preset burn-in shrinks with an overridden, shorter run
            burnin: self
                .burnin
                .or_else(|| {
                    base.as_ref().map(|b| match self.iterations {
                        Some(it) => b.burnin.min(it / 10),
                        None => b.burnin,
                    })
                })
                .unwrap_or(0),
            thin: self.thin.unwrap_or(1),
            seeds: self
                .seeds
                .or_else(|| base.as_ref().map(|b| b.seeds.clone()))
                .unwrap_or_else(|| vec![1]),
            acf_max_lag: self.acf_max_lag.unwrap_or(50),
            binning: self.binning.unwrap_or(Binning::Default),
            classify_m: self.classify_m.unwrap_or(ClassifyOptions::default().m),
            write_traces: self.write_traces.unwrap_or(true),
            gnuplot: self.gnuplot.unwrap_or(false),
            name,
            target,
            proposal,
            weights,
            x0,
            diagnostics,
            hmm,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, e: Error| Error::config(key, e.to_string());
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::config("name", "must be a non-empty file-name-safe string"));
        }
        self.proposal.validate().map_err(|e| bad("proposal", e))?;
        self.weights.validate().map_err(|e| bad("weights", e))?;
        if self.kernels.is_empty() {
            return Err(Error::config("kernels", "at least one kernel kind is required"));
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(Error::config("n_values", "need a non-empty list of positive N"));
        }
        if self.iterations == 0 {
            return Err(Error::config("iterations", "must be positive"));
        }
        if self.burnin >= self.iterations {
            return Err(Error::config("burnin", "must be smaller than iterations"));
        }
        if self.thin == 0 {
            return Err(Error::config("thin", "must be positive"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        if !self.target.in_support(&self.x0) {
            return Err(Error::config("x0", "initial state is outside the target support"));
        }
        if self.acf_max_lag == 0 || self.acf_max_lag >= self.iterations - self.burnin {
            return Err(Error::config("acf_max_lag", "must lie in [1, iterations - burnin)"));
        }
        if self.classify_m < 4 {
            return Err(Error::config("classify_m", "must be at least 4"));
        }
        let wants = |d| self.diagnostics.contains(&d);
        let lattice = matches!(self.x0, State::Integer(_));
        if (wants(DiagnosticKind::Tv) || wants(DiagnosticKind::Histogram))
            && self.target.pmf(1).is_none()
            && self.target.location_scale().is_none()
        {
            return Err(Error::config("diagnostics", "tv/histogram need a lattice pmf or a 1-d Gaussian target"));
        }
        if wants(DiagnosticKind::Classification)
            && !(lattice && self.weights.is_enumerable() && matches!(self.proposal, ProposalSpec::IntegerWalk { .. }))
        {
            return Err(Error::config(
                "diagnostics",
                "classification needs a lattice target, an integer walk and enumerable weights",
            ));
        }
        for &kind in &self.kernels {
            for &n in &self.n_values {
                self.kernel(kind, n).validate().map_err(|e| bad("kernels", e))?;
            }
        }
        Ok(())
    }

    pub fn kernel(&self, kind: KernelKind, n: usize) -> KernelSpec {
        KernelSpec::new(kind, self.target.clone(), self.proposal.clone(), self.weights.clone(), n)
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            tool: TOOL.to_owned(),
            version: VERSION.to_owned(),
            git_describe: GIT_DESCRIBE.to_owned(),
            config: self.clone(),
        }
    }

    fn dim(&self) -> usize {
        match &self.x0 {
            State::Integer(_) => 1,
            State::Vector(v) => v.len(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub empirical: f64,
    pub target: f64,
}

/// Per-chain results.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JobSummary {
    pub kernel: KernelKind,
    pub n: usize,
    pub seed: u64,
    pub stream: RngStream,
    pub acceptance: Option<f64>,
    pub mean: Option<Vec<f64>>,
    pub variance: Option<Vec<f64>>,
    pub tv: Option<f64>,
    /// One autocorrelation vector per coordinate.
    pub acf: Option<Vec<Vec<f64>>>,
    pub histogram: Option<Vec<HistogramBin>>,
    pub final_state: State,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationEntry {
    pub kernel: KernelKind,
    pub n: usize,
    pub classification: WalkClassification,
}

/// Everything a run produced, in job order.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub jobs: Vec<JobSummary>,
    pub classification: Vec<ClassificationEntry>,
}

impl RunOutput {
    pub fn job(&self, kernel: KernelKind, n: usize, seed: u64) -> Option<&JobSummary> {
        self.jobs.iter().find(|j| j.kernel == kernel && j.n == n && j.seed == seed)
    }
}

/// Chain stream for `(seed, index of N)`; shared by all kernel kinds so
/// kernels with unit weights replay the same draws.
pub fn job_stream(seed: u64, n_index: usize) -> RngStream {
    RngStream::new(seed, n_index as u64)
}

fn histogram(cfg: &ExperimentConfig, states: &[State]) -> Result<Vec<HistogramBin>> {
    let n = states.len() as f64;
    if let Some(_) = cfg.target.pmf(1) {
        let ms: Vec<i64> = states
            .iter()
            .map(|s| s.as_integer().ok_or_else(|| Error::InvalidInput("lattice histogram needs integer states".into())))
            .collect::<Result<_>>()?;
        let top = ms.iter().copied().max().unwrap_or(1).max(1);
        let mut counts = vec![0usize; top as usize + 1];
        for m in ms {
            if m >= 1 {
                counts[m as usize] += 1;
            }
        }
        return Ok((1..=top)
            .map(|m| HistogramBin {
                lo: m as f64,
                hi: (m + 1) as f64,
                empirical: counts[m as usize] as f64 / n,
                target: cfg.target.pmf(m).expect("lattice pmf"),
            })
            .collect());
    }
    let (k, lo, hi) = match cfg.binning {
        Binning::Bins { k, lo, hi } => (k, lo, hi),
        _ => {
            let (m, s) = cfg
                .target
                .location_scale()
                .ok_or_else(|| Error::Unsupported("target has no histogram layout".into()))?;
            (50, m - 4.0 * s, m + 4.0 * s)
        }
    };
    let width = (hi - lo) / k as f64;
    let mut counts = vec![0usize; k];
    for s in states {
        let x = s.coordinate(0).unwrap_or(f64::NAN);
        if x >= lo && x < hi {
            counts[(((x - lo) / width) as usize).min(k - 1)] += 1;
        }
    }
    (0..k)
        .map(|i| {
            let a = lo + i as f64 * width;
            Ok(HistogramBin {
                lo: a,
                hi: a + width,
                empirical: counts[i] as f64 / n,
                target: cfg
                    .target
                    .interval_mass(a, a + width)
                    .ok_or_else(|| Error::Unsupported("target has no interval masses".into()))?,
            })
        })
        .collect()
}

fn summarize(cfg: &ExperimentConfig, trace: &ChainTrace, n: usize, seed: u64) -> Result<JobSummary> {
    let wants = |d| cfg.diagnostics.contains(&d);
    let post = &trace.states[cfg.burnin..];
    let coords: Vec<Vec<f64>> = (0..cfg.dim())
        .map(|i| post.iter().map(|s| s.coordinate(i).unwrap_or(f64::NAN)).collect())
        .collect();
    let (mean, variance) = if wants(DiagnosticKind::Moments) {
        let mut means = Vec::new();
        let mut vars = Vec::new();
        for c in &coords {
            let len = c.len() as f64;
            let m = c.iter().sum::<f64>() / len;
            means.push(m);
            vars.push(c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / len);
        }
        (Some(means), Some(vars))
    } else {
        (None, None)
    };
    Ok(JobSummary {
        kernel: trace.kernel,
        n,
        seed,
        stream: trace.stream,
        acceptance: if wants(DiagnosticKind::Acceptance) {
            Some(mean_acceptance(&trace.accepted)?)
        } else {
            None
        },
        mean,
        variance,
        tv: if wants(DiagnosticKind::Tv) {
            Some(empirical_tv(&trace.states, &cfg.target, cfg.burnin, cfg.binning)?)
        } else {
            None
        },
        acf: if wants(DiagnosticKind::Acf) {
            Some(
                coords
                    .iter()
                    .map(|c| Ok(acf(c, cfg.acf_max_lag)?.values))
                    .collect::<Result<_>>()?,
            )
        } else {
            None
        },
        histogram: if wants(DiagnosticKind::Histogram) {
            Some(histogram(cfg, post)?)
        } else {
            None
        },
        final_state: trace.last().clone(),
    })
}

fn trace_file_name(kind: KernelKind, n: usize, seed: u64) -> String {
    format!("trace_{}_N{n}_seed{seed}.csv", kind.name())
}

fn write_trace(cfg: &ExperimentConfig, trace: &ChainTrace, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let d = cfg.dim();
    let mut header = vec!["iteration".to_owned()];
    if d == 1 {
        header.push("x".into());
    } else {
        header.extend((0..d).map(|i| format!("x{i}")));
    }
    header.push("accepted".into());
    if trace.carried_weight.is_some() {
        header.push("weight".into());
    }
    w.write_record(&header)?;
    for (t, s) in trace.states.iter().enumerate().step_by(cfg.thin) {
        let mut row = vec![t.to_string()];
        match s {
            State::Integer(m) => row.push(m.to_string()),
            State::Vector(v) => row.extend(v.iter().map(|x| x.to_string())),
        }
        row.push(if t == 0 {
            String::new()
        } else {
            u8::from(trace.accepted[t - 1]).to_string()
        });
        if let Some(cw) = &trace.carried_weight {
            row.push(cw[t].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_tables(cfg: &ExperimentConfig, dir: &Path, jobs: &[JobSummary]) -> Result<()> {
    let e = &cfg.name;
    let mut summary = csv::Writer::from_path(dir.join("summary.csv"))?;
    summary.write_record([
        "experiment", "kernel", "N", "seed", "iterations", "burnin", "acceptance", "coordinate", "mean", "variance", "tv",
    ])?;
    for j in jobs {
        for i in 0..cfg.dim() {
            summary.write_record([
                e.clone(),
                j.kernel.name().into(),
                j.n.to_string(),
                j.seed.to_string(),
                cfg.iterations.to_string(),
                cfg.burnin.to_string(),
                opt(j.acceptance),
                i.to_string(),
                opt(j.mean.as_ref().map(|m| m[i])),
                opt(j.variance.as_ref().map(|v| v[i])),
                opt(j.tv),
            ])?;
        }
    }
    summary.flush()?;

    if cfg.diagnostics.contains(&DiagnosticKind::Acf) {
        let mut w = csv::Writer::from_path(dir.join("acf.csv"))?;
        w.write_record(["experiment", "kernel", "N", "seed", "coordinate", "lag", "acf"])?;
        for j in jobs {
            for (i, vals) in j.acf.iter().flatten().enumerate() {
                for (lag, v) in vals.iter().enumerate() {
                    w.write_record([
                        e.clone(),
                        j.kernel.name().into(),
                        j.n.to_string(),
                        j.seed.to_string(),
                        i.to_string(),
                        lag.to_string(),
                        v.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
    }
    if cfg.diagnostics.contains(&DiagnosticKind::Histogram) {
        let mut w = csv::Writer::from_path(dir.join("histogram.csv"))?;
        w.write_record(["experiment", "kernel", "N", "seed", "bin_lo", "bin_hi", "empirical", "target"])?;
        for j in jobs {
            for b in j.histogram.iter().flatten() {
                w.write_record([
                    e.clone(),
                    j.kernel.name().into(),
                    j.n.to_string(),
                    j.seed.to_string(),
                    b.lo.to_string(),
                    b.hi.to_string(),
                    b.empirical.to_string(),
                    b.target.to_string(),
                ])?;
            }
        }
        w.flush()?;
    }
    if cfg.diagnostics.contains(&DiagnosticKind::Tv) {
        let mut w = csv::Writer::from_path(dir.join("tv_vs_n.csv"))?;
        w.write_record(["experiment", "kernel", "N", "seed", "tv"])?;
        for j in jobs {
            w.write_record([e.clone(), j.kernel.name().into(), j.n.to_string(), j.seed.to_string(), opt(j.tv)])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn gnuplot_script(cfg: &ExperimentConfig, jobs: &[JobSummary]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    if cfg.write_traces {
        let _ = writeln!(s, "set terminal pngcairo size 900,500");
        for j in jobs {
            let f = trace_file_name(j.kernel, j.n, j.seed);
            let _ = writeln!(s, "set output '{}.png'", f.trim_end_matches(".csv"));
            let _ = writeln!(s, "plot 'traces/{f}' using 1:2 with steps title '{} N={} seed={}'", j.kernel, j.n, j.seed);
        }
    }
    if cfg.diagnostics.contains(&DiagnosticKind::Histogram) {
        let _ = writeln!(s, "set output 'histogram.png'");
        let _ = writeln!(
            s,
            "plot 'histogram.csv' using (($5+$6)/2):7 with boxes title 'empirical', '' using (($5+$6)/2):8 with lines title 'target'"
        );
    }
    s
}

/// Run `cfg` on `jobs` worker threads (0 = all cores) and write its outputs.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<RunOutput> {
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir)?;
    if cfg.write_traces {
        fs::create_dir_all(dir.join("traces"))?;
    }
    let mut work = Vec::new();
    for &kind in &cfg.kernels {
        for (ni, &n) in cfg.n_values.iter().enumerate() {
            for &seed in &cfg.seeds {
                work.push((kind, ni, n, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))?;
    let summaries: Vec<JobSummary> = pool.install(|| {
        work.par_iter()
            .map(|&(kind, ni, n, seed)| {
                let kernel = cfg.kernel(kind, n);
                let trace = run_chain(&kernel, cfg.x0.clone(), cfg.iterations, job_stream(seed, ni))?;
                if cfg.write_traces {
                    write_trace(cfg, &trace, &dir.join("traces").join(trace_file_name(kind, n, seed)))?;
                }
                summarize(cfg, &trace, n, seed)
            })
            .collect::<Result<_>>()
    })?;

    let mut classification = Vec::new();
    if cfg.diagnostics.contains(&DiagnosticKind::Classification) {
        let theta = match cfg.proposal {
            ProposalSpec::IntegerWalk { theta } => theta,
            _ => unreachable!("validated"),
        };
        let opts = ClassifyOptions {
            m: cfg.classify_m,
            ..Default::default()
        };
        let marginal = classify(&marginal_birth_death(cfg.target.clone(), theta)?, &opts)?;
        classification.push(ClassificationEntry {
            kernel: KernelKind::Marginal,
            n: 1,
            classification: marginal,
        });
        for &n in &cfg.n_values {
            let spec = noisy_birth_death(cfg.target.clone(), theta, cfg.weights.clone(), n)?;
            classification.push(ClassificationEntry {
                kernel: KernelKind::Noisy,
                n,
                classification: classify(&spec, &opts)?,
            });
        }
        write_json(
            &dir.join("classification.json"),
            &serde_json::json!({ "experiment": cfg.name, "M": cfg.classify_m, "entries": classification }),
        )?;
    }

    write_tables(cfg, &dir, &summaries)?;
    write_json(
        &dir.join("diagnostics.json"),
        &serde_json::json!({ "experiment": cfg.name, "jobs": summaries }),
    )?;
    write_json(&dir.join("manifest.json"), &cfg.manifest())?;
    if cfg.gnuplot {
        fs::write(dir.join("plot.gp"), gnuplot_script(cfg, &summaries))?;
    }
    Ok(RunOutput {
        dir,
        jobs: summaries,
        classification,
    })
}
