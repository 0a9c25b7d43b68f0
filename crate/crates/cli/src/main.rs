use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use rotor_core::fourier::write_history_csv;
use rotor_core::harness::{
    compare_reports, generate_graph, hidden_unit_sweep, run_solver_with, GraphSource, GraphSpec, OutputPaths,
    RunArtifacts, RunConfig, RunRecords, RunReport, SolverConfig, SweepSchedule, Topology, VmcConfig,
};
use rotor_core::vmc::{SampleUnit, SamplerSettings, SrSettings, VmcReport};
use rotor_core::{Error, Result};

#[derive(Parser)]
#[command(name = "rotor", version, about = "Ground states of quantum rotor networks")]
struct Cli {
    /// Log progress (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Variational Monte Carlo with a rotor RBM.
    SolveVmc {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        vmc: VmcArgs,
        /// Write the final parameters here.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Per-step CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Frequency-truncated spectral solver.
    SolveFourier {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        fourier: FourierArgs,
        /// Same as --start-seed.
        #[arg(long, conflicts_with = "start_seed")]
        seed: Option<u64>,
        /// Per-iteration CSV.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the ground-state coefficients here.
        #[arg(long)]
        state_out: Option<PathBuf>,
    },
    /// Optimal uniform-weight Jastrow state on a chain.
    SolveJastrow {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Runs several solvers on one graph and tabulates the energies.
    Compare {
        #[command(flatten)]
        graph: GraphArgs,
        /// Solvers to run, in order.
        #[arg(long, value_delimiter = ',', default_value = "fourier,vmc,jastrow")]
        solvers: Vec<SolverName>,
        /// Run configuration files (one per solver) instead of --solvers.
        #[arg(long = "config")]
        configs: Vec<PathBuf>,
        #[command(flatten)]
        vmc: VmcArgs,
        #[command(flatten)]
        fourier: FourierArgs,
        /// Comparison CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// JSON with the comparison and every run report.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Exit with status 3 when a VMC energy falls below the spectral one.
        #[arg(long)]
        fail_on_alarm: bool,
    },
    /// Trains one VMC model per hidden-unit count.
    SweepHidden {
        #[command(flatten)]
        graph: GraphArgs,
        /// Hidden-unit counts.
        #[arg(long = "hidden-list", value_delimiter = ',', required = true)]
        hidden_list: Vec<usize>,
        /// Steps at which the energy spread and gradient norm are recorded.
        #[arg(long, value_delimiter = ',', default_value = "100")]
        snapshots: Vec<usize>,
        #[command(flatten)]
        vmc: VmcArgs,
        /// Run the entries on separate threads.
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Writes a generated graph as JSON.
    GenGraph {
        #[command(flatten)]
        graph: GeneratorArgs,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverName {
    Vmc,
    Fourier,
    Jastrow,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Sweep,
    Move,
}

#[derive(Args, Clone)]
struct GeneratorArgs {
    /// Graph generator: chain:N, grid:RxC or complete:N.
    #[arg(long = "generate", value_name = "SPEC")]
    generate: Option<Topology>,
    /// On-site weight for generated graphs.
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    h: f64,
    /// Coupling for generated graphs.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    beta: f64,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Graph JSON file.
    #[arg(long, conflicts_with = "generate")]
    graph: Option<PathBuf>,
    #[command(flatten)]
    generator: GeneratorArgs,
}

impl GraphArgs {
    fn source(&self) -> Option<GraphSource> {
        match (&self.graph, self.generator.generate) {
            (Some(path), _) => Some(GraphSource::File(path.clone())),
            (None, Some(topology)) => {
                Some(GraphSource::Generator(GraphSpec { topology, h: self.generator.h, beta: self.generator.beta }))
            }
            (None, None) => None,
        }
    }

    fn require(&self) -> Result<GraphSource> {
        self.source().ok_or_else(|| Error::InvalidSettings("give --graph <file> or --generate <spec>".into()))
    }
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Run configuration JSON; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
    /// Write the JSON run report here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct VmcArgs {
    /// Hidden units (default 5 n).
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    sr_shift: Option<f64>,
    /// Metropolis samples per step, burn-in included.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    /// What one sample is: a full sweep or a single-rotor move.
    #[arg(long, value_enum)]
    sample_unit: Option<UnitArg>,
    /// Half-width of the uniform angle proposal, in radians.
    #[arg(long)]
    proposal_width: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    chains: Option<usize>,
    /// Standard deviation of the random initial parameters.
    #[arg(long)]
    init_std: Option<f64>,
    /// Start from saved parameters.
    #[arg(long)]
    init_checkpoint: Option<PathBuf>,
    /// Log every k-th step with -v.
    #[arg(long, default_value_t = 100)]
    log_every: usize,
}

impl VmcArgs {
    fn apply(&self, c: &mut VmcConfig) {
        let s = &mut c.sampler;
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        set!(c.hidden, self.hidden);
        set!(c.sr.steps, self.steps);
        set!(c.sr.learning_rate, self.lr);
        set!(c.sr.sr_shift, self.sr_shift);
        set!(s.total_samples, self.samples);
        set!(s.burn_in, self.burn_in);
        set!(s.thin, self.thin);
        set!(s.proposal_width, self.proposal_width);
        set!(s.seed, self.seed);
        set!(s.chains, self.chains);
        set!(c.init_std, self.init_std);
        if let Some(unit) = self.sample_unit {
            s.unit = match unit {
                UnitArg::Sweep => SampleUnit::Sweep,
                UnitArg::Move => SampleUnit::Move,
            };
        }
        if let Some(p) = &self.init_checkpoint {
            c.init_checkpoint = Some(p.clone());
        }
    }

    fn config(&self, n: usize) -> VmcConfig {
        let mut c = VmcConfig {
            hidden: 5 * n,
            init_std: rotor_core::rbm::INIT_STD,
            sampler: SamplerSettings::default(),
            sr: SrSettings::default(),
            init_checkpoint: None,
        };
        self.apply(&mut c);
        c
    }
}

#[derive(Args, Clone, Default)]
struct FourierArgs {
    #[arg(long)]
    omega_max: Option<usize>,
    #[arg(long)]
    tau_cg: Option<f64>,
    #[arg(long)]
    tau_inv: Option<f64>,
    /// Maximum inverse iterations.
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    max_cg_iters: Option<usize>,
    /// Seed of the random start vector.
    #[arg(long)]
    start_seed: Option<u64>,
}

impl FourierArgs {
    fn apply(&self, s: &mut rotor_core::fourier::EigSettings) {
        if let Some(v) = self.omega_max {
            s.omega_max = v;
        }
        if let Some(v) = self.tau_cg {
            s.tau_cg = v;
        }
        if let Some(v) = self.tau_inv {
            s.tau_inv = v;
        }
        if let Some(v) = self.max_iters {
            s.max_inv_iters = v;
        }
        if let Some(v) = self.max_cg_iters {
            s.max_cg_iters = v;
        }
        if let Some(v) = self.start_seed {
            s.seed = v;
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}

/// Loads the config file if any, checks it names the expected solver, and
/// lets the graph and output flags override it.
fn base_config(
    run: &RunArgs,
    expected: &str,
    default_solver: impl FnOnce(&GraphSource) -> Result<SolverConfig>,
) -> Result<RunConfig> {
    let mut config = match &run.config {
        Some(path) => {
            let config = RunConfig::from_json(&std::fs::read_to_string(path)?)?;
            if config.solver.name() != expected {
                return Err(Error::InvalidSettings(format!(
                    "{} configures the {} solver, not {expected}",
                    path.display(),
                    config.solver.name()
                )));
            }
            config
        }
        None => {
            let graph = run.graph.require()?;
            let solver = default_solver(&graph)?;
            RunConfig { graph, solver, outputs: OutputPaths::default() }
        }
    };
    if let Some(source) = run.graph.source() {
        config.graph = source;
    }
    if let Some(p) = &run.summary {
        config.outputs.summary = Some(p.clone());
    }
    Ok(config)
}

/// The report printed to standard output: everything except the per-step
/// records, which go to the CSV.
fn print_report(report: &RunReport) {
    let mut brief = report.clone();
    match &mut brief.records {
        RunRecords::Vmc(r) => r.clear(),
        RunRecords::Fourier(r) => r.clear(),
        RunRecords::Jastrow(_) => {}
    }
    println!("{}", brief.to_json());
}

fn execute(config: RunConfig, log_every: usize) -> Result<()> {
    config.validate()?;
    let graph = config.graph.load()?;
    info!("{} rotors, {} edges, solver {}", graph.n(), graph.edges().len(), config.solver.name());
    let (report, artifacts) = run_solver_with(&graph, &config, |r| {
        if log_every > 0 && r.step % log_every == 0 {
            info!(
                "step {:>6}  E = {:.6}  std = {:.3e}  rolling = {:.6}  |F| = {:.2e}  acc = {:.2}",
                r.step, r.energy_mean, r.energy_std, r.rolling_mean, r.grad_norm, r.acceptance_rate
            );
        }
    })?;
    let out = &config.outputs;
    match (&report.records, &artifacts) {
        (RunRecords::Vmc(records), RunArtifacts::Vmc(params)) => {
            if let Some(p) = &out.report {
                let vmc = VmcReport { records: records.clone(), aborted: report.aborted.clone() };
                let mut f = create(p)?;
                vmc.write_csv(&mut f)?;
                f.flush()?;
            }
            if let Some(p) = &out.checkpoint {
                params.save_checkpoint(p)?;
            }
        }
        (RunRecords::Fourier(records), RunArtifacts::Fourier(state)) => {
            if let Some(p) = &out.report {
                let mut f = create(p)?;
                write_history_csv(records, &mut f)?;
                f.flush()?;
            }
            if let Some(p) = &out.state {
                state.save(p)?;
            }
        }
        _ => {}
    }
    if let Some(p) = &out.summary {
        write_text(p, &report.to_json())?;
    }
    print_report(&report);
    if let Some(reason) = &report.aborted {
        return Err(Error::NonFinite(format!("run aborted at {reason}")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SolveVmc { run, vmc, checkpoint, report } => {
            let from_file = run.config.is_some();
            let mut config = base_config(&run, "vmc", |g| Ok(SolverConfig::Vmc(vmc.config(g.load()?.n()))))?;
            if let (true, SolverConfig::Vmc(c)) = (from_file, &mut config.solver) {
                vmc.apply(c);
            }
            if checkpoint.is_some() {
                config.outputs.checkpoint = checkpoint;
            }
            if report.is_some() {
                config.outputs.report = report;
            }
            execute(config, vmc.log_every)
        }
        Command::SolveFourier { run, mut fourier, seed, report, state_out } => {
            let mut config = base_config(&run, "fourier", |_| Ok(SolverConfig::Fourier(Default::default())))?;
            fourier.start_seed = fourier.start_seed.or(seed);
            if let SolverConfig::Fourier(s) = &mut config.solver {
                fourier.apply(s);
            }
            if report.is_some() {
                config.outputs.report = report;
            }
            if state_out.is_some() {
                config.outputs.state = state_out;
            }
            execute(config, 0)
        }
        Command::SolveJastrow { run } => execute(base_config(&run, "jastrow", |_| Ok(SolverConfig::Jastrow))?, 0),
        Command::Compare { graph, solvers, configs, vmc, fourier, csv, summary, fail_on_alarm } => {
            let mut reports = Vec::new();
            if configs.is_empty() {
                let source = graph.require()?;
                let loaded = source.load()?;
                for name in solvers {
                    let solver = match name {
                        SolverName::Vmc => SolverConfig::Vmc(vmc.config(loaded.n())),
                        SolverName::Fourier => {
                            let mut s = rotor_core::fourier::EigSettings::default();
                            fourier.apply(&mut s);
                            SolverConfig::Fourier(s)
                        }
                        SolverName::Jastrow => SolverConfig::Jastrow,
                    };
                    let config = RunConfig { graph: source.clone(), solver, outputs: OutputPaths::default() };
                    config.validate()?;
                    info!("running {}", config.solver.name());
                    reports.push(run_solver_with(&loaded, &config, |_| {})?.0);
                }
            } else {
                for path in &configs {
                    let mut config = RunConfig::from_json(&std::fs::read_to_string(path)?)?;
                    if let Some(source) = graph.source() {
                        config.graph = source;
                    }
                    config.validate()?;
                    let loaded = config.graph.load()?;
                    info!("running {} from {}", config.solver.name(), path.display());
                    reports.push(run_solver_with(&loaded, &config, |_| {})?.0);
                }
            }
            let comparison = compare_reports(reports)?;
            print!("{}", comparison.to_table());
            if let Some(p) = csv {
                write_text(&p, &comparison.to_csv())?;
            }
            if let Some(p) = summary {
                write_text(&p, &serde_json::to_string_pretty(&comparison)?)?;
            }
            if comparison.alarm() {
                eprintln!("warning: a VMC energy lies below the spectral ground energy by more than 3 standard errors");
                if fail_on_alarm {
                    std::process::exit(3);
                }
            }
            Ok(())
        }
        Command::SweepHidden { graph, hidden_list, snapshots, vmc, parallel, csv, summary } => {
            let loaded = graph.require()?.load()?;
            let base = vmc.config(loaded.n());
            let schedule = SweepSchedule {
                sampler: base.sampler,
                sr: base.sr,
                init_std: base.init_std,
                snapshot_steps: snapshots,
            };
            let report = hidden_unit_sweep(&loaded, &hidden_list, &schedule, parallel)?;
            print!("{}", report.to_csv());
            if let Some(p) = csv {
                write_text(&p, &report.to_csv())?;
            }
            if let Some(p) = summary {
                write_text(&p, &report.to_json())?;
            }
            Ok(())
        }
        Command::GenGraph { graph, out } => {
            let topology = graph.generate.ok_or_else(|| Error::InvalidSettings("give --generate <spec>".into()))?;
            let g = generate_graph(&GraphSpec { topology, h: graph.h, beta: graph.beta })?;
            match out {
                Some(p) => g.save(p),
                None => {
                    println!("{}", g.to_json());
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
