//! Command-line interface: generate configurations, compute transfer
//! efficiencies, run ensemble sweeps, and analyze record files.
//!
//! Exit codes: 0 on success, 2 on invalid configuration or arguments,
//! 3 on solver failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use excitonet::ensemble::{
    append_record, correlation_report, read_jsonl, run_cell_batch, saturation_site_count,
    summarize_cells, write_csv, SweepPlan,
};
use excitonet::pathways::{summarize_paths, DEFAULT_PATH_CEILING};
use excitonet::tc2::{ete_laplace, ete_time_domain, Method, SinkSpec};
use excitonet::{
    build_hamiltonian, sample_configuration, BathSpec, Configuration, CouplingModel, Error,
};
use serde::Deserialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "excitonet",
    version,
    about = "Excitation transfer in random chromophore networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one random configuration and emit it as JSON.
    Generate {
        #[command(flatten)]
        shared: Shared,
    },
    /// Compute the transfer efficiency of one configuration.
    Ete {
        #[command(flatten)]
        shared: Shared,
        /// Configuration JSON produced by `generate`; sampled fresh if absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Sweep site counts at fixed diameters; writes JSONL records.
    SweepN {
        #[command(flatten)]
        shared: Shared,
    },
    /// Sweep diameters and reorganization energies; writes JSONL records.
    SweepDensity {
        #[command(flatten)]
        shared: Shared,
    },
    /// Tail and correlation analysis of a JSONL record file; emits CSVs.
    Analyze {
        #[command(flatten)]
        shared: Shared,
        /// Records file written by a sweep.
        #[arg(long)]
        input: PathBuf,
        /// Tail size m for top/bottom selections.
        #[arg(short, long)]
        m: Option<usize>,
    },
    /// Pathway summary of one configuration.
    Paths {
        #[command(flatten)]
        shared: Shared,
        /// Configuration JSON produced by `generate`; sampled fresh if absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Refusal ceiling on the number of enumerated paths.
        #[arg(long)]
        path_ceiling: Option<u128>,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct Shared {
    /// JSON file mirroring these flags; explicit flags override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Site counts (comma-separated list for sweeps).
    #[arg(long, value_delimiter = ',')]
    sites: Option<Vec<usize>>,
    /// Bounding-sphere diameters in Å (comma-separated list for sweeps).
    #[arg(long, value_delimiter = ',')]
    diameter: Option<Vec<f64>>,
    /// Reorganization energies λ in cm⁻¹ (comma-separated list for sweeps).
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Bath relaxation rate γ in cm⁻¹ [default: 50].
    #[arg(long)]
    gamma: Option<f64>,
    /// Temperature in K [default: 298].
    #[arg(long)]
    temp: Option<f64>,
    /// Trapping rate at the acceptor in ps⁻¹ [default: 1.0].
    #[arg(long)]
    r_trap: Option<f64>,
    /// Exciton loss rate at every site in ps⁻¹ [default: 0.001].
    #[arg(long)]
    r_loss: Option<f64>,
    /// Static-disorder window in cm⁻¹ [default: 500].
    #[arg(long)]
    energy_window: Option<f64>,
    /// Dipole coupling constant C in cm⁻¹·Å³ [default: 134000].
    #[arg(long)]
    coupling_const: Option<f64>,
    /// Samples per sweep cell [default: 200].
    #[arg(long)]
    samples: Option<usize>,
    /// Master seed [default: 1].
    #[arg(long)]
    seed: Option<u64>,
    /// Transfer-efficiency solver [default: laplace].
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    /// Output path (JSON/JSONL file, or directory for `analyze`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Histogram bins [default: 10].
    #[arg(long)]
    bins: Option<usize>,
    /// Dominant-path strength threshold in cm⁻¹ [default: 1000].
    #[arg(long)]
    threshold: Option<f64>,
    /// Time-domain integration horizon in ps [default: 20000].
    #[arg(long)]
    t_max: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum SolverArg {
    Laplace,
    Time,
}

/// JSON mirror of the shared flags.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    sites: Option<Vec<usize>>,
    diameter: Option<Vec<f64>>,
    lambda: Option<Vec<f64>>,
    gamma: Option<f64>,
    temp: Option<f64>,
    r_trap: Option<f64>,
    r_loss: Option<f64>,
    energy_window: Option<f64>,
    coupling_const: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
    solver: Option<String>,
    out: Option<PathBuf>,
    bins: Option<usize>,
    threshold: Option<f64>,
    t_max: Option<f64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn solver(message: impl Into<String>) -> Failure {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::InvalidParameter(_)
            | Error::PackingInfeasible { .. }
            | Error::TooClose { .. }
            | Error::PathCeilingExceeded { .. }
            | Error::Json(_) => 2,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// All flags resolved against the config file and built-in defaults.
struct Settings {
    sites: Vec<usize>,
    diameters: Vec<f64>,
    lambdas: Vec<f64>,
    gamma: f64,
    temp: f64,
    r_trap: f64,
    r_loss: f64,
    energy_window: f64,
    coupling_const: f64,
    samples: usize,
    seed: u64,
    solver: Method,
    out: Option<PathBuf>,
    bins: usize,
    threshold: f64,
    t_max: f64,
}

struct Defaults {
    sites: Vec<usize>,
    diameters: Vec<f64>,
    lambdas: Vec<f64>,
    samples: usize,
}

fn resolve(shared: &Shared, defaults: Defaults) -> Result<Settings, Failure> {
    let file: FileConfig = match &shared.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::invalid(format!("bad config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let solver = match (&shared.solver, &file.solver) {
        (Some(SolverArg::Laplace), _) => Method::Laplace,
        (Some(SolverArg::Time), _) => Method::TimeDomain,
        (None, Some(s)) => match s.as_str() {
            "laplace" => Method::Laplace,
            "time" | "time-domain" => Method::TimeDomain,
            other => return Err(Failure::invalid(format!("unknown solver '{other}'"))),
        },
        (None, None) => Method::Laplace,
    };
    let base = SweepPlan::default();
    Ok(Settings {
        sites: shared.sites.clone().or(file.sites).unwrap_or(defaults.sites),
        diameters: shared
            .diameter
            .clone()
            .or(file.diameter)
            .unwrap_or(defaults.diameters),
        lambdas: shared
            .lambda
            .clone()
            .or(file.lambda)
            .unwrap_or(defaults.lambdas),
        gamma: shared.gamma.or(file.gamma).unwrap_or(base.gamma),
        temp: shared.temp.or(file.temp).unwrap_or(base.temperature),
        r_trap: shared.r_trap.or(file.r_trap).unwrap_or(base.r_trap),
        r_loss: shared.r_loss.or(file.r_loss).unwrap_or(base.r_loss),
        energy_window: shared
            .energy_window
            .or(file.energy_window)
            .unwrap_or(base.energy_window),
        coupling_const: shared
            .coupling_const
            .or(file.coupling_const)
            .unwrap_or(base.coupling_const),
        samples: shared.samples.or(file.samples).unwrap_or(defaults.samples),
        seed: shared.seed.or(file.seed).unwrap_or(base.master_seed),
        solver,
        out: shared.out.clone().or(file.out),
        bins: shared.bins.or(file.bins).unwrap_or(10),
        threshold: shared
            .threshold
            .or(file.threshold)
            .unwrap_or(base.path_threshold),
        t_max: shared.t_max.or(file.t_max).unwrap_or(base.t_max),
    })
}

impl Settings {
    fn plan(&self) -> SweepPlan {
        SweepPlan {
            diameters: self.diameters.clone(),
            site_counts: self.sites.clone(),
            lambdas: self.lambdas.clone(),
            samples_per_cell: self.samples,
            master_seed: self.seed,
            gamma: self.gamma,
            temperature: self.temp,
            r_trap: self.r_trap,
            r_loss: self.r_loss,
            energy_window: self.energy_window,
            coupling_const: self.coupling_const,
            path_threshold: self.threshold,
            solver: self.solver,
            t_max: self.t_max,
        }
    }

    fn single_site_count(&self) -> Result<usize, Failure> {
        match self.sites.as_slice() {
            [n] => Ok(*n),
            _ => Err(Failure::invalid(
                "this subcommand takes exactly one --sites value",
            )),
        }
    }

    fn single_diameter(&self) -> Result<f64, Failure> {
        match self.diameters.as_slice() {
            [d] => Ok(*d),
            _ => Err(Failure::invalid(
                "this subcommand takes exactly one --diameter value",
            )),
        }
    }

    fn single_lambda(&self) -> Result<f64, Failure> {
        match self.lambdas.as_slice() {
            [l] => Ok(*l),
            _ => Err(Failure::invalid(
                "this subcommand takes exactly one --lambda value",
            )),
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::solver(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_or_sample(
    input: &Option<PathBuf>,
    settings: &Settings,
) -> Result<Configuration, Failure> {
    match input {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
            let config: Configuration = serde_json::from_str(&text)
                .map_err(|e| Failure::invalid(format!("bad configuration JSON: {e}")))?;
            Ok(config)
        }
        None => Ok(sample_configuration(
            settings.single_site_count()?,
            settings.single_diameter()?,
            settings.energy_window,
            settings.seed,
        )?),
    }
}

fn cmd_generate(shared: Shared) -> Result<(), Failure> {
    let settings = resolve(
        &shared,
        Defaults {
            sites: vec![7],
            diameters: vec![30.0],
            lambdas: vec![35.0],
            samples: 1,
        },
    )?;
    let config = sample_configuration(
        settings.single_site_count()?,
        settings.single_diameter()?,
        settings.energy_window,
        settings.seed,
    )?;
    let text = serde_json::to_string_pretty(&config).map_err(Error::from)?;
    emit(&settings.out, &text)
}

fn cmd_ete(shared: Shared, input: Option<PathBuf>) -> Result<(), Failure> {
    let settings = resolve(
        &shared,
        Defaults {
            sites: vec![7],
            diameters: vec![30.0],
            lambdas: vec![35.0],
            samples: 1,
        },
    )?;
    let config = load_or_sample(&input, &settings)?;
    let model = CouplingModel::new(settings.coupling_const)?;
    let h = build_hamiltonian(&config, &model)?;
    let bath = BathSpec::new(settings.single_lambda()?, settings.gamma, settings.temp)?;
    let sinks = SinkSpec::new(settings.r_loss, settings.r_trap, config.trap_index)?;
    let result = match settings.solver {
        Method::Laplace => ete_laplace(&h, &bath, &sinks, config.initial_index)?,
        Method::TimeDomain => ete_time_domain(
            &h,
            &bath,
            &sinks,
            config.initial_index,
            settings.t_max,
        )?,
    };
    let text = serde_json::to_string_pretty(&result).map_err(Error::from)?;
    emit(&settings.out, &text)
}

fn run_sweep(settings: &Settings, default_out: &str) -> Result<(), Failure> {
    let plan = settings.plan();
    plan.validate()?;
    let out_path = settings
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(default_out));
    let file = File::create(&out_path)
        .map_err(|e| Failure::solver(format!("cannot create {}: {e}", out_path.display())))?;
    let mut writer = BufWriter::new(file);
    let mut all = Vec::new();
    for cell in plan.cells() {
        let batch = run_cell_batch(&plan, cell)?;
        for record in &batch {
            append_record(&mut writer, record)?;
        }
        writer.flush().map_err(Error::from)?;
        eprintln!(
            "cell n={} d={} λ={}: {} samples done",
            cell.n,
            cell.diameter,
            cell.lambda,
            batch.len()
        );
        all.extend(batch);
    }
    let summaries = summarize_cells(&all, settings.bins);
    println!(
        "{:>4} {:>8} {:>8} {:>10} {:>10} {:>10} {:>8}",
        "n", "d", "lambda", "mean_eta", "std_eta", "sem_eta", "samples"
    );
    for s in &summaries {
        println!(
            "{:>4} {:>8.1} {:>8.1} {:>10.6} {:>10.6} {:>10.6} {:>8}",
            s.n, s.diameter, s.lambda, s.mean_eta, s.std_eta, s.sem_eta, s.samples
        );
    }
    for &d in &settings.diameters {
        for &l in &settings.lambdas {
            let points: Vec<(usize, f64)> = summaries
                .iter()
                .filter(|s| s.diameter == d && s.lambda == l)
                .map(|s| (s.n, s.mean_eta))
                .collect();
            if points.len() > 1 {
                if let Some(sat) = saturation_site_count(&points) {
                    println!("saturation (d={d}, lambda={l}): n = {sat}");
                }
            }
        }
    }
    println!("records written to {} ({})", out_path.display(), all.len());
    Ok(())
}

fn cmd_sweep_n(shared: Shared) -> Result<(), Failure> {
    let settings = resolve(
        &shared,
        Defaults {
            sites: (2..=7).collect(),
            diameters: vec![30.0],
            lambdas: vec![35.0],
            samples: 200,
        },
    )?;
    run_sweep(&settings, "sweep_n.jsonl")
}

fn cmd_sweep_density(shared: Shared) -> Result<(), Failure> {
    let settings = resolve(
        &shared,
        Defaults {
            sites: vec![7],
            diameters: (3..=10).map(|k| 10.0 * k as f64).collect(),
            lambdas: vec![0.0, 35.0, 350.0],
            samples: 200,
        },
    )?;
    run_sweep(&settings, "sweep_density.jsonl")
}

fn optional(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

fn cmd_analyze(shared: Shared, input: PathBuf, m: Option<usize>) -> Result<(), Failure> {
    let settings = resolve(
        &shared,
        Defaults {
            sites: vec![7],
            diameters: vec![30.0],
            lambdas: vec![35.0],
            samples: 200,
        },
    )?;
    let records = read_jsonl(&input)
        .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", input.display())))?;
    if records.is_empty() {
        return Err(Failure::invalid(format!(
            "no records in {}",
            input.display()
        )));
    }
    let m = m.unwrap_or(100);
    let out_dir = settings.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).map_err(Error::from)?;

    let summaries = summarize_cells(&records, settings.bins);
    let mut hist_rows = Vec::new();
    for s in &summaries {
        for (i, &count) in s.histogram.iter().enumerate() {
            hist_rows.push(vec![
                s.n.to_string(),
                s.diameter.to_string(),
                s.lambda.to_string(),
                format!("{}", s.bin_edges[i]),
                format!("{}", s.bin_edges[i + 1]),
                count.to_string(),
            ]);
        }
    }
    write_csv(
        out_dir.join("histogram.csv"),
        &["n", "diameter", "lambda", "bin_lo", "bin_hi", "count"],
        &hist_rows,
    )?;

    let report = correlation_report(&records, m);
    let mut tail_rows = Vec::new();
    let mut corr_rows = Vec::new();
    let mut dom_rows = Vec::new();
    for cell in &report.cells {
        for (name, tail) in [("top", &cell.top), ("bottom", &cell.bottom)] {
            tail_rows.push(vec![
                cell.n.to_string(),
                cell.diameter.to_string(),
                cell.lambda.to_string(),
                name.to_string(),
                cell.m.to_string(),
                format!("{}", tail.mean_eta),
                format!("{}", tail.mean_overlap),
                format!("{}", tail.gap_mean),
                format!("{}", tail.gap_std),
                optional(tail.mean_z),
                format!("{}", tail.mean_dominant),
            ]);
        }
        corr_rows.push(vec![
            cell.n.to_string(),
            cell.diameter.to_string(),
            cell.lambda.to_string(),
            cell.population.to_string(),
            cell.m.to_string(),
            format!("{}", cell.overlap_ratio),
            optional(cell.z_all),
            optional(cell.top.mean_z),
            optional(cell.bottom.mean_z),
            optional(cell.z_ratio_top_all),
        ]);
        for d in &cell.dominant_vs_m {
            dom_rows.push(vec![
                cell.n.to_string(),
                cell.diameter.to_string(),
                cell.lambda.to_string(),
                d.m.to_string(),
                format!("{}", d.top_mean),
                format!("{}", d.bottom_mean),
            ]);
        }
    }
    write_csv(
        out_dir.join("tails.csv"),
        &[
            "n", "diameter", "lambda", "tail", "m", "mean_eta", "mean_overlap", "gap_mean",
            "gap_std", "mean_z", "mean_dominant",
        ],
        &tail_rows,
    )?;
    write_csv(
        out_dir.join("correlation.csv"),
        &[
            "n",
            "diameter",
            "lambda",
            "population",
            "m",
            "overlap_ratio",
            "z_all",
            "z_top",
            "z_bottom",
            "z_ratio_top_all",
        ],
        &corr_rows,
    )?;
    write_csv(
        out_dir.join("dominant_vs_m.csv"),
        &["n", "diameter", "lambda", "m", "top_mean", "bottom_mean"],
        &dom_rows,
    )?;

    println!(
        "analyzed {} records in {} cells (tail size m = {})",
        records.len(),
        report.cells.len(),
        m
    );
    for cell in &report.cells {
        println!(
            "cell n={} d={} lambda={}: population {}, mean_eta top {:.4} / bottom {:.4}, \
             overlap ratio {:.4}, gap top {:.1} / bottom {:.1} cm^-1{}",
            cell.n,
            cell.diameter,
            cell.lambda,
            cell.population,
            cell.top.mean_eta,
            cell.bottom.mean_eta,
            cell.overlap_ratio,
            cell.top.gap_mean,
            cell.bottom.gap_mean,
            match cell.z_ratio_top_all {
                Some(r) => format!(", z-ratio top/all {r:.3}"),
                None => String::new(),
            }
        );
    }
    println!("CSV tables written to {}", out_dir.display());
    Ok(())
}

fn cmd_paths(
    shared: Shared,
    input: Option<PathBuf>,
    path_ceiling: Option<u128>,
) -> Result<(), Failure> {
    let settings = resolve(
        &shared,
        Defaults {
            sites: vec![7],
            diameters: vec![30.0],
            lambdas: vec![35.0],
            samples: 1,
        },
    )?;
    let config = load_or_sample(&input, &settings)?;
    let model = CouplingModel::new(settings.coupling_const)?;
    let h = build_hamiltonian(&config, &model)?;
    let summary = summarize_paths(
        &h,
        config.initial_index,
        config.trap_index,
        settings.bins,
        settings.threshold,
        path_ceiling.unwrap_or(DEFAULT_PATH_CEILING),
    )?;
    let text = serde_json::to_string_pretty(&summary).map_err(Error::from)?;
    emit(&settings.out, &text)
}

fn main() -> ExitCode {
    // Die quietly like standard filters when the output pipe closes.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { shared } => cmd_generate(shared),
        Command::Ete { shared, input } => cmd_ete(shared, input),
        Command::SweepN { shared } => cmd_sweep_n(shared),
        Command::SweepDensity { shared } => cmd_sweep_density(shared),
        Command::Analyze { shared, input, m } => cmd_analyze(shared, input, m),
        Command::Paths {
            shared,
            input,
            path_ceiling,
        } => cmd_paths(shared, input, path_ceiling),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
