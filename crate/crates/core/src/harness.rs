//! Run configuration, graph generators and the multi-solver workflows.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{inverse_power_iteration, EigSettings, InverseIterationRecord};
use crate::graph::RotorGraph;
use crate::jastrow::{jastrow_energy, optimize_uniform_weight, JastrowChain};
use crate::rbm::{RbmParams, INIT_STD};
use crate::vmc::{run_vmc_with, SamplerSettings, SrSettings, StepRecord};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Standard errors a VMC energy may sit below the spectral reference before
/// the comparison raises an alarm.
pub const ALARM_STANDARD_ERRORS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Topology {
    Chain { n: usize },
    Grid { rows: usize, cols: usize },
    Complete { n: usize },
}

/// A generated graph with uniform on-site `h` and coupling `beta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    #[serde(flatten)]
    pub topology: Topology,
    pub h: f64,
    pub beta: f64,
}

impl GraphSpec {
    pub fn chain(n: usize) -> Self {
        Self { topology: Topology::Chain { n }, h: 5.0, beta: 1.0 }
    }

    pub fn grid(rows: usize, cols: usize) -> Self {
        Self { topology: Topology::Grid { rows, cols }, h: 5.0, beta: 1.0 }
    }

    pub fn complete(n: usize) -> Self {
        Self { topology: Topology::Complete { n }, h: 5.0, beta: 1.0 }
    }

    pub fn with_couplings(mut self, h: f64, beta: f64) -> Self {
        self.h = h;
        self.beta = beta;
        self
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::Chain { n } => write!(f, "chain:{n}"),
            Topology::Grid { rows, cols } => write!(f, "grid:{rows}x{cols}"),
            Topology::Complete { n } => write!(f, "complete:{n}"),
        }
    }
}

/// Parses `chain:N`, `grid:RxC` or `complete:N`.
impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGraph(format!("cannot parse graph generator '{s}'"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let count = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        match kind.trim() {
            "chain" => Ok(Topology::Chain { n: count(arg)? }),
            "complete" => Ok(Topology::Complete { n: count(arg)? }),
            "grid" => {
                let (r, c) = arg.split_once(['x', 'X']).ok_or_else(bad)?;
                Ok(Topology::Grid { rows: count(r)?, cols: count(c)? })
            }
            _ => Err(bad()),
        }
    }
}

/// Builds the graph described by `spec`. A grid is the open lattice with
/// nearest-neighbour edges; vertex `(r, c)` has index `r * cols + c`.
pub fn generate_graph(spec: &GraphSpec) -> Result<RotorGraph> {
    let positive = |k: usize, what: &str| {
        if k == 0 {
            Err(Error::InvalidGraph(format!("{what} must be positive")))
        } else {
            Ok(k)
        }
    };
    let (n, edges): (usize, Vec<(usize, usize)>) = match spec.topology {
        Topology::Chain { n } => (positive(n, "chain length")?, (1..n).map(|i| (i - 1, i)).collect()),
        Topology::Complete { n } => {
            let n = positive(n, "vertex count")?;
            (n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect())
        }
        Topology::Grid { rows, cols } => {
            let (rows, cols) = (positive(rows, "grid rows")?, positive(cols, "grid columns")?);
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        edges.push((v, v + 1));
                    }
                    if r + 1 < rows {
                        edges.push((v, v + cols));
                    }
                }
            }
            (rows * cols, edges)
        }
    };
    let weighted = edges.into_iter().map(|(i, j)| (i, j, spec.beta)).collect();
    RotorGraph::new(n, weighted, vec![spec.h; n])
}

/// Where a run's graph comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphSource {
    File(PathBuf),
    Generator(GraphSpec),
}

impl GraphSource {
    pub fn load(&self) -> Result<RotorGraph> {
        match self {
            GraphSource::File(path) => RotorGraph::load(path),
            GraphSource::Generator(spec) => generate_graph(spec),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VmcConfig {
    pub hidden: usize,
    #[serde(default = "default_init_std")]
    pub init_std: f64,
    pub sampler: SamplerSettings,
    pub sr: SrSettings,
    /// Parameters to start from instead of a random draw.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_checkpoint: Option<PathBuf>,
}

fn default_init_std() -> f64 {
    INIT_STD
}

impl VmcConfig {
    /// Hidden-unit count `5 n`, a single-rotor-move schedule scaled with
    /// `n`, and default optimizer settings.
    pub fn for_chain(n: usize, seed: u64) -> Self {
        Self {
            hidden: 5 * n,
            init_std: INIT_STD,
            sampler: SamplerSettings::per_rotor_schedule(n, seed),
            sr: SrSettings::default(),
            init_checkpoint: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        self.sr.validate()?;
        if !(self.init_std >= 0.0 && self.init_std.is_finite()) {
            return Err(Error::InvalidSettings(format!("init std must be nonnegative, got {}", self.init_std)));
        }
        Ok(())
    }

    pub fn initial_params(&self, n: usize) -> Result<RbmParams> {
        match &self.init_checkpoint {
            Some(path) => {
                let params = RbmParams::load_checkpoint(path)?;
                if params.visible() != n {
                    return Err(Error::DimensionMismatch { expected: n, actual: params.visible() });
                }
                Ok(params)
            }
            None => Ok(RbmParams::random(self.hidden, n, self.init_std, self.sampler.seed)),
        }
    }
}

/// Exactly one solver and its settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "solver", content = "settings")]
pub enum SolverConfig {
    Vmc(VmcConfig),
    Fourier(EigSettings),
    Jastrow,
}

impl SolverConfig {
    pub fn name(&self) -> &'static str {
        match self {
            SolverConfig::Vmc(_) => "vmc",
            SolverConfig::Fourier(_) => "fourier",
            SolverConfig::Jastrow => "jastrow",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            SolverConfig::Vmc(c) => Some(c.sampler.seed),
            SolverConfig::Fourier(s) => Some(s.seed),
            SolverConfig::Jastrow => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SolverConfig::Vmc(c) => c.validate(),
            SolverConfig::Fourier(s) => s.validate(),
            SolverConfig::Jastrow => Ok(()),
        }
    }
}

/// Output files a run may write; all optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    /// Per-step or per-iteration CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    /// JSON summary ([`RunReport`]).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    /// Final VMC parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    /// Final spectral ground state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub graph: GraphSource,
    #[serde(flatten)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub outputs: OutputPaths,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if let GraphSource::Generator(spec) = &self.graph {
            generate_graph(spec)?;
        }
        self.solver.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run config serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JastrowSummary {
    pub w_star: f64,
    pub energy_per_edge: f64,
    pub edges: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "solver", content = "records")]
pub enum RunRecords {
    Vmc(Vec<StepRecord>),
    Fourier(Vec<InverseIterationRecord>),
    Jastrow(JastrowSummary),
}

/// Summary of one solver run; `config` and `seed` are enough to repeat it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: RunConfig,
    pub seed: Option<u64>,
    pub final_energy: f64,
    /// Energy standard deviation of the VMC samples at the last step.
    pub final_std: Option<f64>,
    /// Retained samples per VMC step.
    pub samples: Option<usize>,
    pub wall_ms: f64,
    /// Diagnostic when a VMC run stopped early.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
    pub records: RunRecords,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run report serializes")
    }

    pub fn standard_error(&self) -> Option<f64> {
        match (self.final_std, self.samples) {
            (Some(std), Some(n)) if n > 0 => Some(std / (n as f64).sqrt()),
            _ => None,
        }
    }
}

/// Artifacts produced alongside the report.
#[derive(Clone, Debug)]
pub enum RunArtifacts {
    Vmc(RbmParams),
    Fourier(crate::fourier::FourierState),
    Jastrow,
}

/// Runs a single solver on an already loaded graph.
pub fn run_solver(graph: &RotorGraph, config: &RunConfig) -> Result<(RunReport, RunArtifacts)> {
    run_solver_with(graph, config, |_| {})
}

/// [`run_solver`] with a per-step callback for VMC runs.
pub fn run_solver_with<F>(graph: &RotorGraph, config: &RunConfig, observer: F) -> Result<(RunReport, RunArtifacts)>
where
    F: FnMut(&StepRecord),
{
    config.solver.validate()?;
    let start = Instant::now();
    let report = |final_energy, final_std, samples, aborted, records| RunReport {
        version: VERSION.to_string(),
        config: config.clone(),
        seed: config.solver.seed(),
        final_energy,
        final_std,
        samples,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        aborted,
        records,
    };
    match &config.solver {
        SolverConfig::Vmc(vmc) => {
            let init = vmc.initial_params(graph.n())?;
            let run = run_vmc_with(graph, init, &vmc.sampler, &vmc.sr, observer)?;
            let last = run.report.last().ok_or_else(|| {
                Error::NonFinite(run.report.aborted.clone().unwrap_or_else(|| "no steps completed".into()))
            })?;
            let r = report(
                last.rolling_mean,
                Some(last.energy_std),
                Some(last.samples),
                run.report.aborted.clone(),
                RunRecords::Vmc(run.report.records.clone()),
            );
            Ok((r, RunArtifacts::Vmc(run.params)))
        }
        SolverConfig::Fourier(settings) => {
            let eig = inverse_power_iteration(graph, settings)?;
            let r = report(eig.lambda_min, None, None, None, RunRecords::Fourier(eig.history));
            Ok((r, RunArtifacts::Fourier(eig.ground_state)))
        }
        SolverConfig::Jastrow => {
            let h = graph.uniform_h()?;
            let beta = uniform_beta(graph)?;
            let opt = optimize_uniform_weight(h, beta)?;
            let chain = JastrowChain::from_graph(graph, vec![opt.w_star; graph.edges().len()])?;
            let summary =
                JastrowSummary { w_star: opt.w_star, energy_per_edge: opt.energy_per_edge, edges: graph.edges().len() };
            let r = report(jastrow_energy(&chain), None, None, None, RunRecords::Jastrow(summary));
            Ok((r, RunArtifacts::Jastrow))
        }
    }
}

fn uniform_beta(graph: &RotorGraph) -> Result<f64> {
    let beta = graph.edges().first().map_or(0.0, |e| e.beta);
    if graph.edges().iter().any(|e| e.beta != beta) {
        return Err(Error::InvalidGraph("the uniform-weight Jastrow state needs equal couplings".into()));
    }
    Ok(beta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub solver: String,
    pub energy: f64,
    pub std: Option<f64>,
    pub standard_error: Option<f64>,
    pub wall_ms: f64,
    /// `energy - reference`, where the reference is the spectral result
    /// when present and the first row otherwise.
    pub diff_from_reference: f64,
    pub alarm: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub reference: String,
    pub rows: Vec<ComparisonRow>,
    pub reports: Vec<RunReport>,
}

pub const COMPARISON_CSV_HEADER: &str = "solver,energy,std,standard_error,diff_from_reference,alarm";

impl Comparison {
    pub fn alarm(&self) -> bool {
        self.rows.iter().any(|r| r.alarm)
    }

    /// Machine-readable table. Wall time is left out so that repeated runs
    /// with the same seeds give identical bytes.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let mut out = String::from(COMPARISON_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:e},{},{},{:e},{}",
                r.solver,
                r.energy,
                opt(r.std),
                opt(r.standard_error),
                r.diff_from_reference,
                r.alarm
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>16} {:>12} {:>12} {:>12} {:>14}",
            "solver", "energy", "std", "std err", "wall (s)", "vs reference"
        );
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<10} {:>16.10} {:>12} {:>12} {:>12.3} {:>+14.3e}{}",
                r.solver,
                r.energy,
                opt(r.std),
                opt(r.standard_error),
                r.wall_ms / 1e3,
                r.diff_from_reference,
                if r.alarm { "  ALARM: below the spectral ground energy" } else { "" }
            );
        }
        for (i, a) in self.rows.iter().enumerate() {
            for b in &self.rows[i + 1..] {
                let _ = writeln!(out, "{} - {} = {:+.3e}", a.solver, b.solver, a.energy - b.energy);
            }
        }
        out
    }
}

/// Runs each solver on `graph` and tabulates the energies.
pub fn compare_solvers(graph: &GraphSource, solvers: &[SolverConfig]) -> Result<Comparison> {
    let loaded = graph.load()?;
    let mut reports = Vec::with_capacity(solvers.len());
    for solver in solvers {
        let config = RunConfig { graph: graph.clone(), solver: solver.clone(), outputs: OutputPaths::default() };
        reports.push(run_solver(&loaded, &config)?.0);
    }
    compare_reports(reports)
}

/// Builds the comparison table from finished runs, which must share a graph.
pub fn compare_reports(reports: Vec<RunReport>) -> Result<Comparison> {
    let first = reports.first().ok_or_else(|| Error::InvalidSettings("nothing to compare".into()))?;
    let graph = first.config.graph.load()?;
    for r in &reports[1..] {
        if r.config.graph.load()? != graph {
            return Err(Error::InvalidGraph("compared runs must share a graph".into()));
        }
    }
    let reference_index = reports.iter().position(|r| r.config.solver.name() == "fourier").unwrap_or(0);
    let reference = &reports[reference_index];
    let spectral = (reference.config.solver.name() == "fourier").then_some(reference.final_energy);
    let rows = reports
        .iter()
        .map(|r| {
            let standard_error = r.standard_error();
            let alarm = match (r.config.solver.name(), spectral, standard_error) {
                ("vmc", Some(lambda), Some(se)) => r.final_energy < lambda - ALARM_STANDARD_ERRORS * se,
                _ => false,
            };
            ComparisonRow {
                solver: r.config.solver.name().to_string(),
                energy: r.final_energy,
                std: r.final_std,
                standard_error,
                wall_ms: r.wall_ms,
                diff_from_reference: r.final_energy - reference.final_energy,
                alarm,
            }
        })
        .collect();
    Ok(Comparison { reference: reference.config.solver.name().to_string(), rows, reports })
}

/// Step indices at which a sweep records the energy spread and gradient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSchedule {
    pub sampler: SamplerSettings,
    pub sr: SrSettings,
    #[serde(default = "default_init_std")]
    pub init_std: f64,
    pub snapshot_steps: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub energy_std: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub hidden: usize,
    pub snapshots: Vec<Snapshot>,
    /// Rolling-average energy at the last step.
    pub final_energy: f64,
    pub final_std: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub version: String,
    pub schedule: SweepSchedule,
    pub entries: Vec<SweepEntry>,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep report serializes")
    }

    /// One row per hidden-unit count: std and gradient norm at each
    /// snapshot step, then the converged energy.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("hidden");
        for s in &self.schedule.snapshot_steps {
            let _ = write!(out, ",std_{s},grad_{s}");
        }
        out.push_str(",final_energy,final_std\n");
        for e in &self.entries {
            let _ = write!(out, "{}", e.hidden);
            for step in &self.schedule.snapshot_steps {
                match e.snapshots.iter().find(|s| s.step == *step) {
                    Some(s) => {
                        let _ = write!(out, ",{:e},{:e}", s.energy_std, s.grad_norm);
                    }
                    None => out.push_str(",,"),
                }
            }
            let _ = writeln!(out, ",{:e},{:e}", e.final_energy, e.final_std);
        }
        out
    }
}

/// Trains one model per hidden-unit count. Entries are independent; with
/// `parallel` they run on separate threads.
pub fn hidden_unit_sweep(
    graph: &RotorGraph,
    hidden: &[usize],
    schedule: &SweepSchedule,
    parallel: bool,
) -> Result<SweepReport> {
    if let Some(bad) = hidden.iter().find(|&&m| m == 0) {
        return Err(Error::InvalidSettings(format!("hidden unit counts must be positive, got {bad}")));
    }
    schedule.sampler.validate()?;
    schedule.sr.validate()?;
    let entry = |m: usize| -> Result<SweepEntry> {
        let init = RbmParams::random(m, graph.n(), schedule.init_std, schedule.sampler.seed);
        let mut snapshots = Vec::new();
        let run = run_vmc_with(graph, init, &schedule.sampler, &schedule.sr, |r| {
            if schedule.snapshot_steps.contains(&r.step) {
                snapshots.push(Snapshot { step: r.step, energy_std: r.energy_std, grad_norm: r.grad_norm });
            }
        })?;
        let last = run.report.last().ok_or_else(|| {
            Error::NonFinite(run.report.aborted.clone().unwrap_or_else(|| "no steps completed".into()))
        })?;
        Ok(SweepEntry {
            hidden: m,
            snapshots,
            final_energy: last.rolling_mean,
            final_std: last.energy_std,
            aborted: run.report.aborted.clone(),
        })
    };
    let entries = if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = hidden.iter().map(|&m| scope.spawn(move || entry(m))).collect();
            handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect::<Result<Vec<_>>>()
        })?
    } else {
        hidden.iter().map(|&m| entry(m)).collect::<Result<Vec<_>>>()?
    };
    Ok(SweepReport { version: VERSION.to_string(), schedule: schedule.clone(), entries })
}
