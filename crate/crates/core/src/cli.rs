//! `epsrel` command-line front end.
//!
//! Exit codes: 0 on success, 1 on a domain error (bad input file, invalid
//! model, analysis failure), 2 on a usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Serialize};

use crate::document::{load_tree, tree_source, TreeDocument};
use crate::fta::FaultTree;
use crate::quant::{quantify_mission, Method, MissionProfile, QuantOptions};
use crate::report::{emit_report, Provenance, ReportDocument, ReportFormat, TreeSummary};
use crate::riskmx::{classify, read_items_csv, RiskConfig, RiskItem};
use crate::scenario::{enumerate_scenarios, ScenarioClassifierConfig};
use crate::simkit::{
    battery_params_from_curve, compare_traces, simulate_battery, simulate_pv, BatteryFault, BatteryFaultKind,
    DischargeAnchors, LoadProfile, PVFault, PVFaultKind, PVParams, PvLoad, Trace, DEFAULT_STEP_HOURS,
};
use crate::sizing::{
    array_layout, array_power, battery_capacity, ArraySizingInput, BatterySizingInput, ComponentLibrary,
};

pub const LIBRARY_ENV: &str = "EPSREL_COMPONENT_LIBRARY";
pub const RISK_CONFIG_ENV: &str = "EPSREL_RISK_CONFIG";

/// Name accepted in place of a parameter file for the built-in examples.
const EXAMPLE: &str = "example";

#[derive(Debug, Parser)]
#[command(
    name = "epsrel",
    version,
    about = "Reliability analysis for satellite electrical power systems"
)]
struct Cli {
    /// Leave the generation timestamp out of reports.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Reserved; every algorithm is deterministic.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quantify a fault tree over a mission.
    Analyze(AnalyzeArgs),
    /// List minimal cut sets.
    Cutsets(TreeArgs),
    /// Enumerate all fault combinations.
    Enumerate(EnumerateArgs),
    /// Battery and solar-array sizing.
    #[command(subcommand)]
    Size(SizeCommand),
    /// Healthy and faulty time-domain traces.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Classify items into a likelihood-severity matrix.
    Risk(RiskArgs),
}

#[derive(Debug, Args)]
struct TreeArgs {
    /// Tree file, or `eps_example` for the bundled power-system tree.
    tree: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    RareEvent,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => Method::Exact,
            MethodArg::RareEvent => Method::RareEvent,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => ReportFormat::Text,
            FormatArg::Json => ReportFormat::Structured,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
struct LibraryArgs {
    /// Component library TOML; overrides the environment and the bundled table.
    #[arg(long, value_name = "PATH")]
    library: Option<PathBuf>,
    /// Require explicit rates instead of library midpoints.
    #[arg(long)]
    no_library_defaults: bool,
}

#[derive(Debug, Args)]
struct ClassifierArgs {
    /// Gate marking a failed scenario (default: the top gate).
    #[arg(long, value_name = "GATE")]
    fail_gate: Option<String>,
    /// Gates marking a recoverable scenario.
    #[arg(long, value_delimiter = ',', value_name = "GATE,...")]
    recoverable_gates: Vec<String>,
    /// Stochastic events held healthy and left out of the enumeration.
    #[arg(long, value_delimiter = ',', value_name = "EVENT,...")]
    exclude: Vec<String>,
    /// Also exclude every event with a constant-probability model.
    #[arg(long)]
    exclude_constant: bool,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    tree: TreeArgs,
    #[arg(long, value_name = "H")]
    mission_hours: f64,
    #[arg(long, value_enum, default_value = "exact")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Add the scenario enumeration table.
    #[arg(long)]
    scenarios: bool,
    #[command(flatten)]
    classifier: ClassifierArgs,
    /// Place the top event in a risk matrix with this severity (1-5).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    severity: Option<u8>,
    #[command(flatten)]
    library: LibraryArgs,
    /// Write the report here instead of standard output.
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[command(flatten)]
    tree: TreeArgs,
    #[command(flatten)]
    classifier: ClassifierArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Debug, Subcommand)]
enum SizeCommand {
    /// Cell count and capacity from a battery parameter TOML.
    Battery(ParamsArgs),
    /// Array power and layout from an array parameter TOML.
    Array(ParamsArgs),
}

#[derive(Debug, Args)]
struct ParamsArgs {
    /// Parameter TOML, or `example` for built-in values.
    params: String,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Debug, Subcommand)]
enum SimulateCommand {
    /// Discharge a battery fitted from discharge-curve anchors.
    Battery(SimBatteryArgs),
    /// Operate a solar array against a load.
    Pv(SimPvArgs),
}

#[derive(Debug, Args)]
struct SimCommon {
    /// Parameter TOML, or `example` for built-in values.
    params: String,
    /// Time step, hours (default one second).
    #[arg(long, value_name = "H")]
    dt: Option<f64>,
    /// Run length, hours.
    #[arg(long, value_name = "H")]
    duration: Option<f64>,
    /// Fault onset, hours (default half the run).
    #[arg(long, value_name = "H")]
    onset: Option<f64>,
    /// Directory receiving healthy.csv, faulty.csv and their .json sidecars.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct SimBatteryArgs {
    #[command(flatten)]
    common: SimCommon,
    /// `open-circuit`, `internal-short:OHMS`, `resistance-growth:F` or `capacity-fade:F`.
    #[arg(long, value_name = "SPEC")]
    fault: Option<BatteryFaultKind>,
    /// Constant amps, or `START:AMPS,...` steps.
    #[arg(long, default_value = "1.0", value_parser = parse_load)]
    load: LoadProfile,
}

#[derive(Debug, Args)]
struct SimPvArgs {
    #[command(flatten)]
    common: SimCommon,
    /// `ground:S:N`, `line-line:S:N`, `mismatch:S:F` or `open-string:S` (strings from 0).
    #[arg(long, value_name = "SPEC")]
    fault: Option<PVFaultKind>,
    /// `resistive:OHMS` or `bus:VOLTS`.
    #[arg(long, default_value = "resistive:30")]
    load: PvLoad,
}

#[derive(Debug, Args)]
struct RiskArgs {
    /// CSV with columns name,probability,severity.
    items: PathBuf,
    /// Threshold TOML; overrides the environment.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

fn parse_load(s: &str) -> Result<LoadProfile, String> {
    if let Ok(i) = s.parse::<f64>() {
        return Ok(LoadProfile::Constant(i));
    }
    s.split(',')
        .map(|step| {
            let (t, i) = step.split_once(':').ok_or_else(|| format!("bad load step {step:?}"))?;
            let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad number {v:?}"));
            Ok((num(t)?, num(i)?))
        })
        .collect::<Result<Vec<_>, String>>()
        .map(LoadProfile::Piecewise)
}

/// Domain failure; reported on the error stream with exit code 1.
#[derive(Debug)]
struct Failure(String);

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let timestamp = (!cli.no_timestamp).then(Provenance::now);
    let result = match cli.command {
        Command::Analyze(a) => analyze(a, timestamp, out),
        Command::Cutsets(a) => cutsets(&a, out),
        Command::Enumerate(a) => enumerate(&a, out),
        Command::Size(SizeCommand::Battery(a)) => size_battery(&a, out),
        Command::Size(SizeCommand::Array(a)) => size_array(&a, out),
        Command::Simulate(SimulateCommand::Battery(a)) => simulate_battery_cmd(&a, out),
        Command::Simulate(SimulateCommand::Pv(a)) => simulate_pv_cmd(&a, out),
        Command::Risk(a) => risk(&a, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "epsrel: {msg}");
            1
        }
    }
}

fn load(spec: &str) -> Result<(TreeDocument, FaultTree), Failure> {
    let doc = load_tree(spec)?;
    let tree = doc.fault_tree()?;
    Ok((doc, tree))
}

fn library(args: &LibraryArgs) -> Result<Option<ComponentLibrary>, Failure> {
    if args.no_library_defaults {
        return Ok(None);
    }
    let path = args
        .library
        .clone()
        .or_else(|| std::env::var_os(LIBRARY_ENV).map(PathBuf::from));
    Ok(Some(match path {
        Some(p) => ComponentLibrary::from_path(&p).map_err(|e| Failure(format!("{}: {e}", p.display())))?,
        None => ComponentLibrary::bundled(),
    }))
}

fn risk_config(explicit: Option<&Path>) -> Result<RiskConfig, Failure> {
    let path = explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(RISK_CONFIG_ENV).map(PathBuf::from));
    match path {
        Some(p) => RiskConfig::from_path(&p).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => Ok(RiskConfig::default()),
    }
}

fn classifier(doc: &TreeDocument, args: &ClassifierArgs) -> ScenarioClassifierConfig {
    let mut excluded = args.exclude.clone();
    if args.exclude_constant {
        excluded.extend(
            doc.events
                .iter()
                .filter(|e| matches!(e.model, Some(crate::document::ModelSpec::Constant { .. })))
                .map(|e| e.id.clone()),
        );
    }
    excluded.sort();
    excluded.dedup();
    ScenarioClassifierConfig {
        fail_gate: args.fail_gate.clone(),
        recoverable_gates: args.recoverable_gates.clone(),
        excluded_events: excluded,
    }
}

fn emit(out: &mut dyn Write, bytes: &[u8]) -> CmdResult {
    out.write_all(bytes)?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("value serializes");
    serde_json::to_string_pretty(&v).expect("value serializes") + "\n"
}

fn analyze(a: AnalyzeArgs, timestamp: Option<String>, out: &mut dyn Write) -> CmdResult {
    let (doc, tree) = load(&a.tree.tree)?;
    let lib = library(&a.library)?;
    let resolved = doc.resolve_models(lib.as_ref())?;
    let profile = MissionProfile::new(a.mission_hours)?;
    let options = QuantOptions::with_method(a.method.into());
    let results = quantify_mission(&tree, &resolved.models, &profile, options)?;
    let scenarios = if a.scenarios {
        Some(enumerate_scenarios(&tree, &classifier(&doc, &a.classifier))?)
    } else {
        None
    };
    let risk = match a.severity {
        Some(severity) => {
            let item = RiskItem::new(tree.top_id(), 1.0 - results.reliability_mission, severity);
            Some(classify(&[item], &risk_config(None)?)?)
        }
        None => None,
    };
    let report = ReportDocument {
        tree: TreeSummary {
            top: tree.top_id().to_string(),
            gates: tree.gate_count(),
            events: tree.event_count(),
            stochastic_events: tree.stochastic_count(),
        },
        mission_hours: a.mission_hours,
        method: options.method,
        rate_scale: options.rate_scale,
        results,
        cut_sets: tree.minimal_cut_sets()?,
        scenarios,
        risk,
        defaulted_rates: resolved.defaulted,
        provenance: Provenance::new(&tree_source(&a.tree.tree)?, timestamp),
    };
    if !report.is_finite() {
        return Err(Failure("analysis produced a non-finite result".into()));
    }
    let bytes = emit_report(&report, a.format.into());
    match &a.output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Failure(format!("{}: {e}", path.display()))),
        None => emit(out, &bytes),
    }
}

fn cutsets(a: &TreeArgs, out: &mut dyn Write) -> CmdResult {
    let (_, tree) = load(&a.tree)?;
    emit(out, tree.minimal_cut_sets()?.render_text().as_bytes())
}

fn enumerate(a: &EnumerateArgs, out: &mut dyn Write) -> CmdResult {
    let (doc, tree) = load(&a.tree.tree)?;
    let stats = enumerate_scenarios(&tree, &classifier(&doc, &a.classifier))?;
    stats.check()?;
    let text = match a.format {
        FormatArg::Text => stats.render_text(),
        FormatArg::Csv => stats.to_csv(),
        FormatArg::Json => to_json(&stats),
    };
    emit(out, text.as_bytes())
}

fn read_params<T: DeserializeOwned>(spec: &str, example: T) -> Result<T, Failure> {
    if spec == EXAMPLE {
        return Ok(example);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| Failure(format!("{spec}: {e}")))?;
    toml::from_str(&text).map_err(|e| Failure(format!("{spec}: {e}")))
}

/// 18 V line of 3.6 V cells carrying 20 W through a 0.6 h eclipse.
fn battery_sizing_example() -> BatterySizingInput {
    BatterySizingInput {
        v_line: 18.0,
        v_cell: 3.6,
        p_e: 20.0,
        t_e: 0.6,
        n_b: 1,
        eta_dis: 0.9,
        v_cdis: 3.6,
        v_d: 0.6,
        dod: 0.3,
    }
}

fn array_sizing_example() -> ArraySizingInput {
    ArraySizingInput {
        eta_pc: 0.9,
        eta_d: 0.95,
        p_av: 40.0,
        p_p: 60.0,
        t_p: 0.5,
        t_s: 1.0,
        v_max: 16.8,
        v_min: 12.0,
        v_bus: 16.0,
        v_mp_eol: 2.2,
        i_mp_eol: 0.45,
    }
}

fn size_battery(a: &ParamsArgs, out: &mut dyn Write) -> CmdResult {
    let input: BatterySizingInput = read_params(&a.params, battery_sizing_example())?;
    let sizing = battery_capacity(&input)?;
    let text = match a.format {
        FormatArg::Json => to_json(&sizing),
        FormatArg::Csv => format!("cells,capacity_ah\n{},{}\n", sizing.cells, sizing.capacity_ah),
        FormatArg::Text => format!("cells: {}\ncapacity: {:.6} Ah\n", sizing.cells, sizing.capacity_ah),
    };
    emit(out, text.as_bytes())
}

#[derive(Serialize)]
struct ArrayReport {
    power_w: f64,
    bus_current_a: f64,
    series_cells: u64,
    parallel_strings: u64,
}

fn size_array(a: &ParamsArgs, out: &mut dyn Write) -> CmdResult {
    let input: ArraySizingInput = read_params(&a.params, array_sizing_example())?;
    let power = array_power(&input)?;
    let layout = array_layout(power, &input)?;
    let r = ArrayReport {
        power_w: power,
        bus_current_a: layout.bus_current,
        series_cells: layout.series_cells,
        parallel_strings: layout.parallel_strings,
    };
    let text = match a.format {
        FormatArg::Json => to_json(&r),
        FormatArg::Csv => format!(
            "power_w,bus_current_a,series_cells,parallel_strings\n{},{},{},{}\n",
            r.power_w, r.bus_current_a, r.series_cells, r.parallel_strings
        ),
        FormatArg::Text => format!(
            "array power: {:.6} W\nbus current: {:.6} A\nseries cells: {}\nparallel strings: {}\n",
            r.power_w, r.bus_current_a, r.series_cells, r.parallel_strings
        ),
    };
    emit(out, text.as_bytes())
}

/// Single 2.3 Ah lithium-ion cell.
fn battery_anchor_example() -> DischargeAnchors {
    DischargeAnchors {
        v_full: 4.2,
        v_exp: 3.9,
        q_exp: 0.3,
        v_nom: 3.6,
        q_nom: 2.0,
        q_max: 2.3,
        i_rated: 1.0,
        r_int: 0.05,
    }
}

struct SimRun {
    healthy: Trace,
    faulty: Option<(Trace, String, f64)>,
    params: serde_json::Value,
}

fn write_traces(run: SimRun, dir: &Path, out: &mut dyn Write) -> CmdResult {
    std::fs::create_dir_all(dir).map_err(|e| Failure(format!("{}: {e}", dir.display())))?;
    let params = &run.params;
    let write = |name: &str, trace: &Trace, fault: Option<(String, f64)>| -> Result<PathBuf, Failure> {
        let path = dir.join(format!("{name}.csv"));
        std::fs::write(&path, trace.to_csv()).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        let (descriptor, onset) = fault.unzip();
        let sidecar = trace.sidecar(descriptor, onset, params);
        let meta = dir.join(format!("{name}.json"));
        std::fs::write(&meta, to_json(&sidecar)).map_err(|e| Failure(format!("{}: {e}", meta.display())))?;
        Ok(path)
    };
    let mut summary = String::new();
    let healthy_path = write("healthy", &run.healthy, None)?;
    let _ = writeln!(
        summary,
        "healthy: {} ({} samples)",
        healthy_path.display(),
        run.healthy.len()
    );
    if let Some((faulty, descriptor, onset)) = &run.faulty {
        let faulty_path = write("faulty", faulty, Some((descriptor.clone(), *onset)))?;
        let _ = writeln!(summary, "faulty: {} ({} samples)", faulty_path.display(), faulty.len());
        // a faulted battery can run out of charge first; compare the shared grid
        let n = run.healthy.len().min(faulty.len());
        let mut h = run.healthy.clone();
        let mut f = faulty.clone();
        h.rows.truncate(n);
        f.rows.truncate(n);
        let cmp = compare_traces(&h, &f)?;
        match cmp.first_divergence {
            Some(t) => {
                let _ = writeln!(summary, "first divergence: {t} h");
            }
            None => summary.push_str("first divergence: none\n"),
        }
        let _ = writeln!(summary, "rms dV: {:.6e} V\nrms dI: {:.6e} A", cmp.rms_dv, cmp.rms_di);
        if faulty.charge_exhausted {
            summary.push_str("faulty run ended at charge exhaustion\n");
        }
    }
    if run.healthy.charge_exhausted {
        summary.push_str("healthy run ended at charge exhaustion\n");
    }
    emit(out, summary.as_bytes())
}

fn run_window(common: &SimCommon, default_duration: f64) -> (f64, f64, f64) {
    let dt = common.dt.unwrap_or(DEFAULT_STEP_HOURS);
    let duration = common.duration.unwrap_or(default_duration);
    let onset = common.onset.unwrap_or(duration / 2.0);
    (dt, duration, onset)
}

fn simulate_battery_cmd(a: &SimBatteryArgs, out: &mut dyn Write) -> CmdResult {
    let anchors: DischargeAnchors = read_params(&a.common.params, battery_anchor_example())?;
    let params = battery_params_from_curve(&anchors)?;
    let (dt, duration, onset) = run_window(&a.common, 2.0);
    let healthy = simulate_battery(&params, &a.load, None, dt, duration)?;
    let faulty = match a.fault {
        Some(kind) => {
            let fault = BatteryFault { kind, onset };
            let trace = simulate_battery(&params, &a.load, Some(&fault), dt, duration)?;
            Some((trace, kind.to_string(), onset))
        }
        None => None,
    };
    write_traces(
        SimRun {
            healthy,
            faulty,
            params: serde_json::to_value(params).expect("parameters serialize"),
        },
        &a.common.out_dir,
        out,
    )
}

fn simulate_pv_cmd(a: &SimPvArgs, out: &mut dyn Write) -> CmdResult {
    let params: PVParams = read_params(&a.common.params, PVParams::example())?;
    let (dt, duration, onset) = run_window(&a.common, 1.0);
    let healthy = simulate_pv(&params, None, a.load, dt, duration)?;
    let faulty = match a.fault {
        Some(kind) => {
            let fault = PVFault { kind, onset };
            let trace = simulate_pv(&params, Some(&fault), a.load, dt, duration)?;
            Some((trace, kind.to_string(), onset))
        }
        None => None,
    };
    write_traces(
        SimRun {
            healthy,
            faulty,
            params: serde_json::to_value(params).expect("parameters serialize"),
        },
        &a.common.out_dir,
        out,
    )
}

fn risk(a: &RiskArgs, out: &mut dyn Write) -> CmdResult {
    let config = risk_config(a.config.as_deref())?;
    let file = std::fs::File::open(&a.items).map_err(|e| Failure(format!("{}: {e}", a.items.display())))?;
    let items = read_items_csv(file)?;
    let matrix = classify(&items, &config)?;
    let text = match a.format {
        FormatArg::Json => to_json(&matrix),
        FormatArg::Text => matrix.render_text(),
        FormatArg::Csv => {
            let mut s = String::from("likelihood,severity,color,count\n");
            for c in &matrix.cells {
                let _ = writeln!(s, "{},{},{},{}", c.likelihood, c.severity, c.color, c.count);
            }
            s
        }
    };
    emit(out, text.as_bytes())
}
