//! Command-line front end. [`run`] is the whole program; `main` only
//! forwards `std::env::args` and the standard streams.
//!
//! Exit codes: 0 success, 1 usage, 2 parse, 3 verification failure,
//! 4 dimension cap.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::{to_raw_value, RawValue};

use crate::code::{check_kl, CodeKind, CodeSpace};
use crate::error::{Error, Result};
use crate::hnls::{build_span, hnls_verdict, is_commuting, DEFAULT_VERDICT_TOL};
use crate::lindblad::{builtin, LindbladModel};
use crate::operators::DimCap;
use crate::protocol::{
    precision_report, scaling_sweep, sig12, ChannelMode, PrecisionReport, SweepAxis, SweepTemplate,
    DEFAULT_OMEGA, DEFAULT_SLICES,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_CAP: i32 = 4;

/// A named protocol setup.
#[derive(Clone, Debug, Serialize)]
pub struct Scenario {
    pub name: String,
    pub model: LindbladModel,
    #[serde(rename = "N")]
    pub n_probes: usize,
    #[serde(rename = "T")]
    pub total_time: f64,
    #[serde(rename = "D")]
    pub slices: usize,
    pub omega: f64,
    pub code_kind: CodeKind,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioJson {
    name: String,
    model: Box<RawValue>,
    #[serde(rename = "N")]
    n_probes: usize,
    #[serde(rename = "T", default = "one")]
    total_time: f64,
    #[serde(rename = "D", default = "default_slices")]
    slices: usize,
    #[serde(default = "default_omega")]
    omega: f64,
    #[serde(default = "default_code_kind")]
    code_kind: CodeKind,
}

fn one() -> f64 {
    1.0
}
fn default_slices() -> usize {
    DEFAULT_SLICES
}
fn default_omega() -> f64 {
    DEFAULT_OMEGA
}
fn default_code_kind() -> CodeKind {
    CodeKind::AutoQubit
}

pub const BUILTIN_SCENARIOS: [&str; 4] = [
    "paper-3level",
    "qubit-dephasing-perp",
    "qubit-rank1-noncommuting",
    "hnls-fails",
];

impl Scenario {
    fn with(name: &str, model: LindbladModel, code_kind: CodeKind) -> Self {
        Scenario {
            name: name.to_string(),
            model,
            n_probes: 3,
            total_time: 1.0,
            slices: DEFAULT_SLICES,
            omega: DEFAULT_OMEGA,
            code_kind,
        }
    }

    pub fn builtin(name: &str) -> Option<Scenario> {
        Some(match name {
            "paper-3level" => Scenario::with(name, builtin::three_level(), CodeKind::Circular),
            "qubit-dephasing-perp" => {
                Scenario::with(name, builtin::qubit_dephasing(), CodeKind::AutoQubit)
            }
            "qubit-rank1-noncommuting" => {
                Scenario::with(name, builtin::qubit_rank_one_pauli(), CodeKind::AutoQubit)
            }
            "hnls-fails" => Scenario::with(
                name,
                builtin::qubit_dephasing_parallel(),
                CodeKind::AutoQubit,
            ),
            _ => return None,
        })
    }

    /// Parses one scenario object. `model` is either an inline model or the
    /// label of a built-in model.
    pub fn from_json(text: &str) -> Result<Scenario> {
        let raw: ScenarioJson = serde_json::from_str(text)?;
        let model = match serde_json::from_str::<String>(raw.model.get()) {
            Ok(label) => builtin::by_label(&label).ok_or_else(|| {
                Error::InvalidConfig(format!("field `model`: unknown built-in model {label:?}"))
            })?,
            Err(_) => serde_json::from_str(raw.model.get())
                .map_err(|e| Error::InvalidConfig(format!("field `model`: {e}")))?,
        };
        Ok(Scenario {
            name: raw.name,
            model,
            n_probes: raw.n_probes,
            total_time: raw.total_time,
            slices: raw.slices,
            omega: raw.omega,
            code_kind: raw.code_kind,
        })
    }

    /// Parses a file holding one scenario or an array of scenarios with
    /// unique names. `select` picks one by name from an array.
    pub fn from_file_text(text: &str, select: Option<&str>) -> Result<Scenario> {
        let items: Vec<Box<RawValue>> = if text.trim_start().starts_with('[') {
            serde_json::from_str(text)?
        } else {
            vec![serde_json::from_str(text)?]
        };
        let mut scenarios = Vec::new();
        let mut names = HashSet::new();
        for (i, raw) in items.iter().enumerate() {
            let s = Scenario::from_json(raw.get()).map_err(|e| match e {
                Error::Json(e) => Error::InvalidConfig(format!("scenario {i}: {e}")),
                Error::InvalidConfig(m) => Error::InvalidConfig(format!("scenario {i}: {m}")),
                e => e,
            })?;
            if !names.insert(s.name.clone()) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate scenario name {:?}",
                    s.name
                )));
            }
            scenarios.push(s);
        }
        match (select, scenarios.len()) {
            (Some(name), _) => scenarios
                .into_iter()
                .find(|s| s.name == name)
                .ok_or_else(|| Error::InvalidConfig(format!("no scenario named {name:?}"))),
            (None, 1) => Ok(scenarios.pop().expect("one scenario")),
            (None, 0) => Err(Error::InvalidConfig("scenario file is empty".into())),
            (None, _) => Err(Error::InvalidConfig(
                "scenario file holds several scenarios; select one with path#name".into(),
            )),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "hnlsqec",
    version,
    about = "Error-corrected quantum metrology under Markovian noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Span check of the Hamiltonian against the noise.
    HnlsCheck(Common),
    /// Build the code and check the error-correction conditions.
    Verify(Common),
    /// Run the protocol and report the precision.
    Simulate(Common),
    /// Run the protocol for several values of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Built-in scenario name, or a JSON file (`path` or `path#name`).
    #[arg(long, default_value = "paper-3level")]
    scenario: String,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long = "D")]
    d: Option<usize>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    no_correction: bool,
    #[arg(long, default_value = "exact")]
    channel_mode: ChannelMode,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dim_cap: Option<usize>,
}

/// Failure tagged with its exit code.
struct Failure(i32, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::DimCapExceeded { .. } => EXIT_CAP,
            Error::Json(_) | Error::Io(_) => EXIT_PARSE,
            Error::InvalidConfig(_) => EXIT_USAGE,
            _ => EXIT_VERIFY,
        };
        Failure(code, e.to_string())
    }
}

fn parse_failure(e: Error) -> Failure {
    match e {
        Error::DimCapExceeded { .. } => e.into(),
        e => Failure(EXIT_PARSE, e.to_string()),
    }
}

impl Common {
    fn cap(&self) -> DimCap {
        self.dim_cap.map(DimCap).unwrap_or_else(DimCap::from_env)
    }

    fn load(&self) -> std::result::Result<Scenario, Failure> {
        let mut s = match Scenario::builtin(&self.scenario) {
            Some(s) => s,
            None => {
                let (path, select) = match self.scenario.rsplit_once('#') {
                    Some((p, n)) => (p, Some(n)),
                    None => (self.scenario.as_str(), None),
                };
                let text = std::fs::read_to_string(Path::new(path)).map_err(|e| {
                    Failure(EXIT_PARSE, format!("cannot read scenario {path:?}: {e}"))
                })?;
                Scenario::from_file_text(&text, select).map_err(parse_failure)?
            }
        };
        if let Some(n) = self.n {
            s.n_probes = n;
        }
        if let Some(t) = self.t {
            s.total_time = t;
        }
        if let Some(d) = self.d {
            s.slices = d;
        }
        if let Some(w) = self.omega {
            s.omega = w;
        }
        Ok(s)
    }

    fn template(&self, s: &Scenario) -> SweepTemplate {
        SweepTemplate {
            model: s.model.clone(),
            code_kind: s.code_kind,
            corrected: !self.no_correction && s.code_kind != CodeKind::None,
            n_probes: s.n_probes,
            total_time: s.total_time,
            slices: s.slices,
            omega: s.omega,
            channel_mode: self.channel_mode,
            cap: self.cap(),
        }
    }
}

/// JSON object with fields in insertion order.
struct Obj(Vec<(&'static str, Box<RawValue>)>);

impl Obj {
    fn new() -> Self {
        Obj(Vec::new())
    }
    fn num(mut self, key: &'static str, x: f64) -> Self {
        let raw = if x.is_finite() {
            sig12(x)
        } else {
            "null".to_string()
        };
        self.0
            .push((key, RawValue::from_string(raw).expect("valid number")));
        self
    }
    fn val<T: Serialize>(mut self, key: &'static str, v: T) -> Self {
        self.0.push((key, to_raw_value(&v).expect("serializable")));
        self
    }
    fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

impl Serialize for Obj {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_map(self.0.iter().map(|(k, v)| (k, v)))
    }
}

/// Runs the program with `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::HnlsCheck(c) => cmd_hnls_check(c, out),
        Command::Verify(c) => cmd_verify(c, out, err),
        Command::Simulate(c) => cmd_simulate(c, out, err),
        Command::Sweep {
            common,
            axis,
            values,
        } => cmd_sweep(common, *axis, values, out, err),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

fn io(e: std::io::Error) -> Failure {
    Failure(EXIT_PARSE, e.to_string())
}

fn cmd_hnls_check(c: &Common, out: &mut dyn Write) -> CmdResult {
    let s = c.load()?;
    let verdict = hnls_verdict(&s.model, DEFAULT_VERDICT_TOL)?;
    let report = Obj::new()
        .val("scenario", &s.name)
        .val("holds", verdict.holds)
        .val("rank", build_span(&s.model).rank())
        .num("perp_norm", verdict.perp_norm)
        .val("commuting", is_commuting(&s.model, DEFAULT_VERDICT_TOL));
    writeln!(out, "{}", report.render()).map_err(io)?;
    Ok(EXIT_OK)
}

/// The scenario's code; below the construction gate of the example code
/// the same circular-state product is built anyway so it can be reported.
fn verify_code(s: &Scenario, cap: DimCap) -> Result<Option<CodeSpace>> {
    match s.code_kind.build(&s.model, s.n_probes, cap) {
        Err(Error::TooFewProbes(_)) if s.code_kind == CodeKind::Circular => {
            let (ccw, cw) = crate::code::circular_states();
            CodeSpace::tensor_power(&ccw, &cw, s.n_probes, cap).map(Some)
        }
        other => other,
    }
}

fn cmd_verify(c: &Common, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let s = c.load()?;
    let code = match verify_code(&s, c.cap())? {
        Some(code) => code,
        None => {
            return Err(Failure(
                EXIT_VERIFY,
                format!("scenario {:?} has no code", s.name),
            ))
        }
    };
    let report = check_kl(&code, &s.model)?;
    writeln!(out, "{}", report.to_json_string()).map_err(io)?;
    if report.passes() {
        Ok(EXIT_OK)
    } else {
        writeln!(err, "verification failed").map_err(io)?;
        Ok(EXIT_VERIFY)
    }
}

fn summary(s: &Scenario, corrected: bool, r: &PrecisionReport) -> Obj {
    Obj::new()
        .val("scenario", &s.name)
        .val("corrected", corrected)
        .val("N", s.n_probes)
        .num("T", s.total_time)
        .val("D", s.slices)
        .num("omega", s.omega)
        .num("qfi", r.qfi)
        .num("crb", r.crb)
        .num("hl_reference", r.hl_reference)
        .num("norm_bound", r.norm_bound)
        .num("fidelity", r.fidelity_to_ideal)
        .num("per_step_error", r.per_step_error)
}

fn cmd_simulate(c: &Common, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let s = c.load()?;
    let mut template = c.template(&s);
    let cfg = match template.config() {
        Ok(cfg) => cfg,
        Err(e @ Error::DimCapExceeded { .. }) => return Err(e.into()),
        Err(e) if template.corrected => {
            writeln!(err, "warning: no code ({e}); reporting the uncorrected run").map_err(io)?;
            template.corrected = false;
            template.config()?
        }
        Err(e) => return Err(e.into()),
    };
    let report = precision_report(&cfg)?;
    let corrected = cfg.code.is_some();
    writeln!(out, "{}", summary(&s, corrected, &report).render()).map_err(io)?;
    if let Some(path) = &c.out {
        let mut text = String::from("qfi,crb,hl_reference,norm_bound,fidelity,per_step_error\n");
        let row = [
            report.qfi,
            report.crb,
            report.hl_reference,
            report.norm_bound,
            report.fidelity_to_ideal,
            report.per_step_error,
        ];
        text.push_str(&row.iter().map(|&x| sig12(x)).collect::<Vec<_>>().join(","));
        text.push('\n');
        std::fs::write(path, text).map_err(io)?;
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(
    c: &Common,
    axis: SweepAxis,
    values: &[f64],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    if values.is_empty() {
        return Err(Failure(
            EXIT_USAGE,
            "--values needs at least one value".into(),
        ));
    }
    let s = c.load()?;
    let series = scaling_sweep(&c.template(&s), axis, values)?;
    let slope = series.loglog_slope();
    let summary = Obj::new()
        .val("scenario", &s.name)
        .val("axis", axis)
        .val("points", series.points.len())
        .num("loglog_slope", slope.unwrap_or(f64::NAN));
    match &c.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(io)?;
            series.write_csv(std::io::BufWriter::new(file))?;
            writeln!(out, "{}", summary.render()).map_err(io)?;
        }
        None => {
            let mut buf = Vec::new();
            series.write_csv(&mut buf)?;
            out.write_all(&buf).map_err(io)?;
            writeln!(err, "{}", summary.render()).map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}
