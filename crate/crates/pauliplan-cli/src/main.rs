//! Seeded command-line reports over the measurement planner: group counts,
//! sampled estimation with an optional two-qubit-error sweep, the analytic
//! grouped-versus-ungrouped variance comparison, and the variational
//! optimizer loop. Reports embed version, seed, and config, carry no
//! timestamps, and are byte-identical across re-runs and thread counts.
//!
//! Exit codes: 0 success, 2 malformed input file, 3 bad configuration or
//! I/O failure, 4 runtime limit hit.

mod input;
mod report;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pauliplan::{
    allocate_shots, build_pauli_graph, derive_seed, estimate, group_observable, haar_random_state,
    max_clique, run_vqe, singlet_prep_circuit, standard_error_grouped, standard_error_ungrouped,
    AllocationMode, AnsatzSpec, GraphMode, GroupingMethod, GroupingResult, NoiseModel, Observable,
    Placement, QuantumState, ShotPlan, SpsaConfig,
};
use serde::Serialize;

use input::{load_observable, parse_state_spec, prepare_state, InputFormat, StateSpec};
use report::{
    CliqueBound, EstimateConfig, Format, GroupConfig, GroupDetail, GroupReport, GroupRow,
    HistogramRow, MethodCount, Render, SingleEstimateReport, SweepReport, SweepRow, VarianceConfig,
    VarianceReport, VqeConfig, VqeReport, VqeRow,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    /// Malformed contents of an input file. Exit 2.
    Parse(String),
    /// Bad flags, unusable values, or I/O failure. Exit 3.
    Config(String),
    /// A runtime budget was exhausted. Exit 4.
    Limit(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Config(_) => 3,
            CliError::Limit(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) | CliError::Config(m) | CliError::Limit(m) => f.write_str(m),
        }
    }
}

impl From<pauliplan::Error> for CliError {
    fn from(e: pauliplan::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Depolarizing rates and readout flip probabilities, as given on the
/// command line: p1,p2,p(1|0),p(0|1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseArg {
    pub p1: f64,
    pub p2: f64,
    pub p10: f64,
    pub p01: f64,
}

#[derive(Parser)]
#[command(
    name = "pauliplan",
    version,
    about = "Plans joint Pauli measurements and estimates observables with them"
)]
struct Cli {
    /// Base seed for every sampling stage.
    #[arg(long, global = true, env = "PAULIPLAN_SEED", default_value_t = 7)]
    seed: u64,
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Emit the report as JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit the report as CSV.
    #[arg(long, global = true)]
    csv: bool,
    /// Write the report to a file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count measurement groups for an observable file.
    Group(GroupArgs),
    /// Estimate an expectation value by sampled grouped measurement.
    Estimate(EstimateArgs),
    /// Compare analytic grouped vs per-pauli standard errors over random states.
    VarianceExperiment(VarianceArgs),
    /// Run the variational optimizer over the grouped estimator.
    Vqe(VqeArgs),
}

#[derive(Args)]
struct GroupArgs {
    /// Observable file.
    input: PathBuf,
    /// Planner to run, or all-methods for the comparison table.
    #[arg(long, default_value = "all-methods", value_parser = parse_method_arg)]
    method: MethodArg,
    /// Input file format.
    #[arg(long, value_enum, default_value_t = InputFormat::Native)]
    format: InputFormat,
    /// Also report the exact maximum clique of the incompatibility graph.
    #[arg(long)]
    clique: bool,
    /// Clique search budget in seconds; exceeding it downgrades sizes to
    /// lower bounds and exits 4.
    #[arg(long, value_name = "SECONDS", default_value_t = 10.0, requires = "clique")]
    time_limit: f64,
    /// List every group's members and measurement layout.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct EstimateArgs {
    /// Observable file.
    input: PathBuf,
    /// Grouping method measured with.
    #[arg(long, default_value = "tpb-bell", value_parser = parse_single_method)]
    method: GroupingMethod,
    /// Prepared state: singlet, zeros, or file:PATH holding one `re [im]`
    /// amplitude per line. The singlet runs its preparation circuit under
    /// the noise model; the others are taken as given.
    #[arg(long, default_value = "zeros", value_parser = parse_state_spec)]
    state: StateSpec,
    /// Base shot count: per term under proportional allocation, per group
    /// under uniform.
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    /// Give every group the same shot count instead of scaling by size.
    #[arg(long)]
    uniform: bool,
    /// Apply readout-error mitigation.
    #[arg(long)]
    mitigate: bool,
    /// Noise rates p1,p2,p(1|0),p(0|1): one- and two-qubit depolarizing,
    /// then the readout flip probabilities.
    #[arg(long, value_name = "P1,P2,P10,P01", value_parser = parse_noise)]
    noise: Option<NoiseArg>,
    /// Sweep the two-qubit depolarizing rate over these values, reporting
    /// no-grouping and the chosen method, raw and mitigated, per value.
    /// The other rates come from --noise (default 0.001,_,0.01,0.1).
    #[arg(long, value_name = "P2,P2,...", value_delimiter = ',', value_parser = parse_rate)]
    sweep_p2: Option<Vec<f64>>,
    /// Input file format.
    #[arg(long, value_enum, default_value_t = InputFormat::Native)]
    format: InputFormat,
}

#[derive(Args)]
struct VarianceArgs {
    /// Number of sampled two-qubit states.
    #[arg(long, default_value_t = 10000, value_parser = clap::value_parser!(u64).range(1..))]
    states: u64,
    /// Analytic shot budget per pauli term; the grouped plan pools three
    /// terms' worth on its one circuit.
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
    shots_per_pauli: u64,
    /// Use the singlet state for every row instead of Haar sampling.
    #[arg(long)]
    singlet: bool,
}

#[derive(Args)]
struct VqeArgs {
    /// Observable file.
    input: PathBuf,
    /// Grouping method the energy evaluations measure with.
    #[arg(long, default_value = "tpb-bell", value_parser = parse_single_method)]
    method: GroupingMethod,
    /// Optimizer iterations.
    #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u64).range(1..))]
    iterations: u64,
    /// Entangling-layer count of the ansatz.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Samples per executed circuit.
    #[arg(long, default_value_t = 8192, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    /// Apply readout-error mitigation, recalibrating periodically.
    #[arg(long)]
    mitigate: bool,
    /// Noise rates p1,p2,p(1|0),p(0|1).
    #[arg(long, value_name = "P1,P2,P10,P01", value_parser = parse_noise)]
    noise: Option<NoiseArg>,
    /// Override the auto-calibrated step-size gain.
    #[arg(long, value_name = "GAIN")]
    gain_a: Option<f64>,
    /// Iterations between mitigation recalibrations.
    #[arg(long, default_value_t = 10, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    recalibrate_every: u64,
    /// Input file format.
    #[arg(long, value_enum, default_value_t = InputFormat::Native)]
    format: InputFormat,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum MethodArg {
    One(GroupingMethod),
    AllMethods,
}

impl MethodArg {
    fn label(self) -> String {
        match self {
            MethodArg::AllMethods => "all-methods".into(),
            MethodArg::One(m) => m.name().into(),
        }
    }
}

fn parse_method_arg(s: &str) -> Result<MethodArg, String> {
    if s == "all-methods" {
        return Ok(MethodArg::AllMethods);
    }
    parse_single_method(s).map(MethodArg::One)
}

fn parse_single_method(s: &str) -> Result<GroupingMethod, String> {
    match s {
        "no-grouping" => Ok(GroupingMethod::NoGrouping),
        "tpb" => Ok(GroupingMethod::Tpb),
        "tpb-bell" => Ok(GroupingMethod::TpbBell),
        "tpb-2q" => Ok(GroupingMethod::Tpb2Q),
        "all" => Ok(GroupingMethod::All),
        _ => Err(format!(
            "unknown method {s:?}; use no-grouping, tpb, tpb-bell, tpb-2q, or all"
        )),
    }
}

fn parse_rate(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("invalid rate {s:?}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("rate {v} outside [0, 1]"))
    }
}

fn parse_noise(s: &str) -> Result<NoiseArg, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err("expected four comma-separated rates: p1,p2,p(1|0),p(0|1)".into());
    }
    let mut vals = [0.0; 4];
    for (v, p) in vals.iter_mut().zip(&parts) {
        *v = parse_rate(p)?;
    }
    Ok(NoiseArg {
        p1: vals[0],
        p2: vals[1],
        p10: vals[2],
        p01: vals[3],
    })
}

fn build_noise(arg: &Option<NoiseArg>, width: usize) -> Result<Option<NoiseModel>, CliError> {
    arg.map(|n| NoiseModel::uniform(n.p1, n.p2, n.p10, n.p01, width))
        .transpose()
        .map_err(Into::into)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

struct Rendered {
    body: String,
    limit_hit: bool,
}

impl Rendered {
    fn done(body: String) -> Self {
        Rendered {
            body,
            limit_hit: false,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))?;
    }
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        Format::Human
    };
    let rendered = match &cli.command {
        Command::Group(args) => cmd_group(args, cli.seed, format)?,
        Command::Estimate(args) => cmd_estimate(args, cli.seed, format)?,
        Command::VarianceExperiment(args) => cmd_variance(args, cli.seed, format)?,
        Command::Vqe(args) => cmd_vqe(args, cli.seed, format)?,
    };
    match &cli.output {
        Some(path) => fs::write(path, &rendered.body)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", rendered.body),
    }
    if rendered.limit_hit {
        return Err(CliError::Limit(
            "clique search hit the time limit; reported sizes are lower bounds".into(),
        ));
    }
    Ok(())
}

fn placement_label(p: &Placement) -> String {
    match p.positions.as_slice() {
        [q] => format!("{}@{q}", p.kind.name()),
        [a, b] => format!("{}@({a},{b})", p.kind.name()),
        _ => unreachable!("placement arity is 1 or 2"),
    }
}

fn group_detail(obs: &Observable, grouping: &GroupingResult) -> Vec<GroupDetail> {
    grouping
        .groups()
        .iter()
        .map(|g| GroupDetail {
            members: g.members().to_vec(),
            terms: g
                .members()
                .iter()
                .map(|&i| obs.term(i).1.to_string())
                .collect(),
            layout: g
                .assignment()
                .map(|a| a.placements().iter().map(placement_label).collect())
                .unwrap_or_default(),
        })
        .collect()
}

fn cmd_group(args: &GroupArgs, seed: u64, format: Format) -> Result<Rendered, CliError> {
    let obs = load_observable(&args.input, args.format)?;
    let methods: Vec<GroupingMethod> = match args.method {
        MethodArg::AllMethods => vec![
            GroupingMethod::NoGrouping,
            GroupingMethod::Tpb,
            GroupingMethod::TpbBell,
            GroupingMethod::Tpb2Q,
            GroupingMethod::All,
        ],
        MethodArg::One(m) => vec![m],
    };
    let mut rows = Vec::new();
    for &m in &methods {
        let grouping = group_observable(&obs, m);
        let detail = args.verbose.then(|| group_detail(&obs, &grouping));
        rows.push(MethodCount {
            method: m.name().to_string(),
            groups: grouping.k(),
            detail,
        });
    }
    let mut clique = None;
    let mut limit_hit = false;
    if args.clique {
        let mut modes: Vec<(&str, GraphMode)> = Vec::new();
        if methods.iter().any(|&m| m != GroupingMethod::All) {
            modes.push(("TPB", GraphMode::Tpb));
        }
        if methods.contains(&GroupingMethod::All) {
            modes.push(("ALL", GraphMode::All));
        }
        let mut bounds = Vec::new();
        for (label, mode) in modes {
            let g = build_pauli_graph(&obs, mode);
            let (size, exact) = max_clique(&g, args.time_limit);
            limit_hit |= !exact;
            bounds.push(CliqueBound {
                graph: label.to_string(),
                size,
                exact,
            });
        }
        clique = Some(bounds);
    }
    let report = GroupReport {
        version: VERSION,
        command: "group",
        seed,
        config: GroupConfig {
            input: args.input.display().to_string(),
            format: args.format,
            method: args.method.label(),
            terms: obs.num_terms(),
            qubits: obs.qubit_count(),
        },
        methods: rows,
        clique,
    };
    Ok(Rendered {
        body: report.render(format),
        limit_hit,
    })
}

fn cmd_estimate(args: &EstimateArgs, seed: u64, format: Format) -> Result<Rendered, CliError> {
    let obs = load_observable(&args.input, args.format)?;
    let mode = if args.uniform {
        AllocationMode::Uniform
    } else {
        AllocationMode::Proportional
    };
    let allocation = if args.uniform { "uniform" } else { "proportional" };
    let config = |noise: Option<NoiseArg>| EstimateConfig {
        input: args.input.display().to_string(),
        format: args.format,
        method: args.method.name().to_string(),
        state: args.state.clone(),
        shots: args.shots,
        allocation,
        mitigate: args.mitigate,
        noise,
    };

    match &args.sweep_p2 {
        None => {
            let noise = build_noise(&args.noise, obs.qubit_count())?;
            let state = prepare_state(&args.state, obs.qubit_count(), noise.as_ref())?;
            let grouping = group_observable(&obs, args.method);
            let plan = allocate_shots(&grouping, args.shots, mode);
            let rep = estimate(
                &state,
                &obs,
                &grouping,
                &plan,
                noise.as_ref(),
                args.mitigate,
                seed,
            )?;
            let groups = rep
                .per_group
                .iter()
                .map(|g| GroupRow {
                    group: g.group,
                    terms: grouping.groups()[g.group].size(),
                    shots: g.shots,
                    estimate: g.estimate,
                    sample_variance: g.sample_variance,
                })
                .collect();
            let report = SingleEstimateReport {
                version: VERSION,
                command: "estimate",
                seed,
                config: config(args.noise),
                value: rep.value,
                standard_error: rep.standard_error,
                mitigated: rep.mitigated,
                groups,
            };
            Ok(Rendered::done(report.render(format)))
        }
        Some(values) => {
            // Sweep baseline rates; the p2 slot is replaced per column.
            let base = args.noise.unwrap_or(NoiseArg {
                p1: 0.001,
                p2: 0.0,
                p10: 0.01,
                p01: 0.1,
            });
            let mut methods = vec![GroupingMethod::NoGrouping];
            if args.method != GroupingMethod::NoGrouping {
                methods.push(args.method);
            }
            let plans: Vec<(GroupingMethod, GroupingResult, ShotPlan)> = methods
                .into_iter()
                .map(|m| {
                    let grouping = group_observable(&obs, m);
                    let plan = allocate_shots(&grouping, args.shots, mode);
                    (m, grouping, plan)
                })
                .collect();
            let mut rows = Vec::new();
            let mut cell = 0u64;
            for &p2 in values {
                let noise =
                    NoiseModel::uniform(base.p1, p2, base.p10, base.p01, obs.qubit_count())?;
                let state = prepare_state(&args.state, obs.qubit_count(), Some(&noise))?;
                for (m, grouping, plan) in &plans {
                    for mitigated in [false, true] {
                        let rep = estimate(
                            &state,
                            &obs,
                            grouping,
                            plan,
                            Some(&noise),
                            mitigated,
                            derive_seed(seed, cell),
                        )?;
                        cell += 1;
                        rows.push(SweepRow {
                            p2,
                            method: m.name().to_string(),
                            mitigated,
                            value: rep.value,
                            standard_error: rep.standard_error,
                        });
                    }
                }
            }
            let report = SweepReport {
                version: VERSION,
                command: "estimate",
                seed,
                config: config(Some(base)),
                p2_values: values.clone(),
                rows,
            };
            Ok(Rendered::done(report.render(format)))
        }
    }
}

fn cmd_variance(args: &VarianceArgs, seed: u64, format: Format) -> Result<Rendered, CliError> {
    let obs = Observable::parse("1 XX\n1 YY\n1 ZZ").expect("well-formed built-in observable");
    let grouping = group_observable(&obs, GroupingMethod::TpbBell);
    let plan = allocate_shots(&grouping, args.shots_per_pauli, AllocationMode::Proportional);

    let bins = 60usize;
    // The per-pauli squared standard error is bounded by 3/S.
    let top = 3.0 / args.shots_per_pauli as f64;
    let mut hist_ungrouped = vec![0u64; bins];
    let mut hist_grouped = vec![0u64; bins];
    let mut sum_ungrouped = 0.0;
    let mut sum_grouped = 0.0;
    let mut violations = 0u64;
    for i in 0..args.states {
        let state = if args.singlet {
            QuantumState::zero(2)?.apply_circuit(&singlet_prep_circuit(), None)?
        } else {
            haar_random_state(2, derive_seed(seed, i))?
        };
        let se_ungrouped = standard_error_ungrouped(&state, &obs, args.shots_per_pauli);
        let se_grouped = standard_error_grouped(&state, &obs, &grouping, &plan)?;
        let v_ungrouped = se_ungrouped * se_ungrouped;
        let v_grouped = se_grouped * se_grouped;
        sum_ungrouped += v_ungrouped;
        sum_grouped += v_grouped;
        if v_grouped > v_ungrouped + 1e-12 {
            violations += 1;
        }
        hist_ungrouped[bin_of(v_ungrouped, top, bins)] += 1;
        hist_grouped[bin_of(v_grouped, top, bins)] += 1;
    }
    let histogram = (0..bins)
        .map(|b| HistogramRow {
            bin_low: top * b as f64 / bins as f64,
            bin_high: top * (b + 1) as f64 / bins as f64,
            ungrouped: hist_ungrouped[b],
            grouped: hist_grouped[b],
        })
        .collect();
    let report = VarianceReport {
        version: VERSION,
        command: "variance-experiment",
        seed,
        config: VarianceConfig {
            states: args.states,
            shots_per_pauli: args.shots_per_pauli,
            singlet: args.singlet,
        },
        mean_squared_se_ungrouped: sum_ungrouped / args.states as f64,
        mean_squared_se_grouped: sum_grouped / args.states as f64,
        inequality_violations: violations,
        histogram,
    };
    Ok(Rendered::done(report.render(format)))
}

fn bin_of(v: f64, top: f64, bins: usize) -> usize {
    ((v / top * bins as f64) as usize).min(bins - 1)
}

fn cmd_vqe(args: &VqeArgs, seed: u64, format: Format) -> Result<Rendered, CliError> {
    if let Some(a) = args.gain_a {
        if !(a.is_finite() && a > 0.0) {
            return Err(CliError::Config(format!("gain {a} must be positive")));
        }
    }
    let obs = load_observable(&args.input, args.format)?;
    let noise = build_noise(&args.noise, obs.qubit_count())?;
    let ansatz = AnsatzSpec::new(obs.qubit_count(), args.depth);
    let mut spsa = SpsaConfig::new(args.iterations as usize, seed);
    spsa.a = args.gain_a;
    spsa.recalibration_interval = args.recalibrate_every as usize;
    let t = run_vqe(
        &obs,
        &ansatz,
        args.method,
        args.shots,
        &spsa,
        noise.as_ref(),
        args.mitigate,
    )?;
    let records: Vec<VqeRow> = t
        .records
        .iter()
        .map(|r| VqeRow {
            iteration: r.iteration,
            circuits: r.circuits_executed,
            energy_plus: r.energy_plus,
            energy_minus: r.energy_minus,
            mean: 0.5 * (r.energy_plus + r.energy_minus),
        })
        .collect();
    let report = VqeReport {
        version: VERSION,
        command: "vqe",
        seed,
        config: VqeConfig {
            input: args.input.display().to_string(),
            format: args.format,
            method: args.method.name().to_string(),
            iterations: args.iterations as usize,
            depth: args.depth,
            shots: args.shots,
            mitigate: args.mitigate,
            noise: args.noise,
            gain_a: args.gain_a,
            recalibrate_every: args.recalibrate_every as usize,
        },
        group_count: t.group_count,
        circuits_total: records.last().map(|r| r.circuits).unwrap_or(0),
        recalibrations: t.recalibrations,
        final_mean_energy: records.last().map(|r| r.mean).unwrap_or(f64::NAN),
        final_params: t.final_params.clone(),
        records,
    };
    Ok(Rendered::done(report.render(format)))
}
