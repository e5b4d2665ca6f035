//! Command-line front end.
//!
//! Exit codes: `0` when every check passes, `1` on a failed verification,
//! `2` on malformed input or parameters outside the positivity regime.
//! Numbers are printed as exact `p/q` strings; `--approx` adds a labelled
//! decimal column.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::algebra::{
    build_realization, structure_constants, tilde_presentation, verify_casimir, verify_pentadiagonality,
    verify_relations, verify_tilde,
};
use crate::dual_rep::{
    blocks, build_dual_rep_printed, derive_dual_rep, similarity_to_primal, transcription_notes, verify_dual_rep,
    FreeParams, Transcription,
};
use crate::error::Error;
use crate::exact::{int, parse_rational, to_exact_string, to_f64, Rational};
use crate::hahn::HahnParams;
use crate::report::{Report, SCHEMA_VERSION};
use crate::sl_minus::{
    clebsch_gordan, coupled_operators, verify_cg_casimir, verify_cg_polynomial_match, verify_kappa_is_h,
    verify_module_relations, verify_parabose, CouplingProblem, ModuleLabel,
};
use crate::sweep::{run_sweep, SweepConfig};

#[derive(Debug, Parser)]
#[command(name = "mhahn", version, about = "Exact dual -1 Hahn polynomials, the algebra H and sl_{-1}(2) CG coefficients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recurrence coefficients, grid and weights, norms, and Q_n(x_s).
    Tables(TablesArgs),
    /// Relations, Casimir, orthogonality and pentadiagonality for H.
    VerifyH(HahnCommand),
    /// Module relations for both factors and the coupled operators.
    VerifySl(SlArgs),
    /// Clebsch-Gordan coefficients of a coupling.
    Cg(CgArgs),
    /// Derive and check the representation in which K2 is diagonal.
    DualRep(DualRepArgs),
    /// Run every check over the parameter lattice.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct HahnArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: String,
    #[arg(long = "N")]
    pub n: usize,
}

impl HahnArgs {
    fn params(&self) -> Result<HahnParams, Error> {
        HahnParams::new(parse_rational(&self.alpha)?, parse_rational(&self.beta)?, self.n)
    }
}

#[derive(Debug, Args)]
pub struct HahnCommand {
    #[command(flatten)]
    pub hahn: HahnArgs,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Table {
    Recurrence,
    Grid,
    Norms,
    Values,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[command(flatten)]
    pub hahn: HahnArgs,
    /// Emit a single table; all four otherwise.
    #[arg(long, value_enum)]
    pub table: Option<Table>,
    #[arg(long)]
    pub approx: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CouplingArgs {
    #[arg(long = "mu-a", default_value = "0", allow_hyphen_values = true)]
    pub mu_a: String,
    #[arg(long = "mu-b", default_value = "0", allow_hyphen_values = true)]
    pub mu_b: String,
    #[arg(long = "eps-a", default_value_t = 1, allow_hyphen_values = true)]
    pub eps_a: i8,
    #[arg(long = "eps-b", default_value_t = 1, allow_hyphen_values = true)]
    pub eps_b: i8,
    #[arg(long = "N", default_value_t = 2)]
    pub n: usize,
}

impl CouplingArgs {
    fn labels(&self) -> Result<(ModuleLabel, ModuleLabel), Error> {
        Ok((
            ModuleLabel::new(self.eps_a, parse_rational(&self.mu_a)?)?,
            ModuleLabel::new(self.eps_b, parse_rational(&self.mu_b)?)?,
        ))
    }

    fn problem(&self) -> Result<CouplingProblem, Error> {
        let (a, b) = self.labels()?;
        Ok(CouplingProblem::new(a, b, self.n))
    }
}

#[derive(Debug, Args)]
pub struct SlArgs {
    #[command(flatten)]
    pub coupling: CouplingArgs,
    /// Truncation size of the module matrices.
    #[arg(long, default_value_t = 12)]
    pub cutoff: usize,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CgArgs {
    #[command(flatten)]
    pub coupling: CouplingArgs,
    #[arg(long)]
    pub approx: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Printed {
    Verbatim,
    Corrected,
}

#[derive(Debug, Args)]
pub struct DualRepArgs {
    #[command(flatten)]
    pub hahn: HahnArgs,
    /// Comma-separated nonzero gauge parameters, N+1 of them.
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<String>,
    /// Use the closed-form block formulas instead of the derivation.
    #[arg(long, value_enum)]
    pub printed: Option<Printed>,
    /// Attach the comparison of the displayed formulas with the derivation.
    #[arg(long)]
    pub notes: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "max-n", default_value_t = 9)]
    pub max_n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random gauges per cell for the dual representation.
    #[arg(long, default_value_t = 3)]
    pub gauges: usize,
    /// Report every cell instead of stopping at the first failure.
    #[arg(long = "keep-going")]
    pub keep_going: bool,
    /// Add the displayed Q_CG constant and the strict signed CG comparison.
    #[arg(long)]
    pub literal: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Parses `args` (program name first) and runs the command, writing to
/// stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli.command, out) {
        Ok(passed) => i32::from(!passed),
        Err(CliError::Input(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
        Err(CliError::Failed(e)) => {
            let _ = writeln!(err, "verification failed: {e}");
            1
        }
        Err(CliError::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

enum CliError {
    Input(Error),
    Failed(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::Regime(_)
            | Error::InvalidInput(_)
            | Error::ParameterCount { .. }
            | Error::ZeroParameter(_) => CliError::Input(e),
            other => CliError::Failed(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult = std::result::Result<bool, CliError>;

fn dispatch(cmd: &Command, out: &mut dyn Write) -> CliResult {
    match cmd {
        Command::Tables(a) => cmd_tables(a, out),
        Command::VerifyH(a) => cmd_verify_h(a, out),
        Command::VerifySl(a) => cmd_verify_sl(a, out),
        Command::Cg(a) => cmd_cg(a, out),
        Command::DualRep(a) => cmd_dual_rep(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_csv(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Prints a report; CSV is one `check,passed,detail` row per check.
fn emit_report(report: &Report, format: Format, out: &mut dyn Write) -> CliResult {
    match format {
        Format::Json => write_json(out, report)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .checks
                .iter()
                .map(|c| vec![c.name.clone(), c.passed.to_string(), c.detail.clone().unwrap_or_default()])
                .collect();
            write_csv(out, &["check", "passed", "detail"], &rows)?;
        }
    }
    Ok(report.all_passed())
}

fn params_json(p: &HahnParams) -> serde_json::Value {
    serde_json::to_value(p).expect("parameters serialize")
}

struct Cell {
    table: &'static str,
    row: usize,
    column: String,
    value: Rational,
}

fn table_cells(p: &HahnParams, which: Option<Table>) -> Vec<Cell> {
    let wanted = |t: Table| which.is_none_or(|w| w == t);
    let mut cells = Vec::new();
    let mut push = |table, row, column: &str, value| {
        cells.push(Cell {
            table,
            row,
            column: column.to_string(),
            value,
        })
    };
    if wanted(Table::Recurrence) {
        for n in 0..p.dim() {
            let rc = p.recurrence_coefficients(n);
            push("recurrence", n, "b", rc.b);
            push("recurrence", n, "u", rc.u);
        }
    }
    if wanted(Table::Grid) {
        let w = p.weights();
        for (s, omega) in w.omega.into_iter().enumerate() {
            push("grid", s, "x", p.grid(s).x);
            push("grid", s, "omega", omega);
        }
    }
    if wanted(Table::Norms) {
        for (n, v) in p.weights().v.into_iter().enumerate() {
            push("norms", n, "v", v);
        }
    }
    if wanted(Table::Values) {
        for (n, row) in p.value_table().into_iter().enumerate() {
            for (s, q) in row.into_iter().enumerate() {
                push("values", n, &format!("s={s}"), q);
            }
        }
    }
    cells
}

fn cmd_tables(a: &TablesArgs, out: &mut dyn Write) -> CliResult {
    let p = a.hahn.params()?;
    let cells = table_cells(&p, a.table);
    match a.format {
        Format::Csv => {
            let mut header = vec!["table", "row", "column", "value"];
            if a.approx {
                header.push("approx");
            }
            let rows: Vec<Vec<String>> = cells
                .iter()
                .map(|c| {
                    let mut r = vec![c.table.to_string(), c.row.to_string(), c.column.clone(), to_exact_string(&c.value)];
                    if a.approx {
                        r.push(to_f64(&c.value).to_string());
                    }
                    r
                })
                .collect();
            write_csv(out, &header, &rows)?;
        }
        Format::Json => {
            let mut tables = serde_json::Map::new();
            for c in &cells {
                let mut entry = json!({ "row": c.row, "column": c.column, "value": to_exact_string(&c.value) });
                if a.approx {
                    entry["approx"] = json!(to_f64(&c.value));
                }
                tables
                    .entry(c.table)
                    .or_insert_with(|| json!([]))
                    .as_array_mut()
                    .expect("table is an array")
                    .push(entry);
            }
            let doc = json!({ "schema": SCHEMA_VERSION, "suite": "tables", "params": params_json(&p), "tables": tables });
            write_json(out, &doc)?;
        }
    }
    Ok(true)
}

fn cmd_verify_h(a: &HahnCommand, out: &mut dyn Write) -> CliResult {
    let p = a.hahn.params()?;
    let mut report = Report::new("verify-h", params_json(&p));
    report.record("orthogonality", &p.verify_orthogonality());
    let mismatch = p.grid_values().into_iter().find_map(|x| {
        (0..p.dim()).find_map(|n| match p.eval_hypergeometric(n, &x) {
            Ok(h) if h == p.eval_recurrence(n, &x) => None,
            Ok(h) => Some(format!("n={n}, x={x}: hypergeometric {h}, recurrence {}", p.eval_recurrence(n, &x))),
            Err(e) => Some(format!("n={n}, x={x}: {e}")),
        })
    });
    report.record_bool("hypergeometric = recurrence on the grid", mismatch.is_none(), mismatch);
    let g = build_realization(&p);
    report.record("relations", &verify_relations(&g));
    let casimir = verify_casimir(&g);
    report.record("casimir", &casimir);
    let spectrum = g.k2.scale(&int(2)).has_spectrum(&p.grid_values());
    report.record_bool("spectrum of 2 K2 = grid", spectrum, "characteristic polynomial differs".to_string());
    report.record("pentadiagonality", &verify_pentadiagonality(&p));
    let tilde = tilde_presentation(&g);
    report.record("tilde presentation", &verify_tilde(&tilde));
    let c = structure_constants(&p);
    report.data = Some(json!({
        "nu": to_exact_string(&c.nu),
        "sigma": to_exact_string(&c.sigma),
        "rho": to_exact_string(&c.rho),
        "casimir": to_exact_string(&c.casimir_value()),
        "chi": to_exact_string(&c.chi()),
    }));
    emit_report(&report, a.format, out)
}

fn cmd_verify_sl(a: &SlArgs, out: &mut dyn Write) -> CliResult {
    let cp = a.coupling.problem()?;
    if a.cutoff < 3 {
        return Err(Error::InvalidInput(format!("cutoff {} is below 3", a.cutoff)).into());
    }
    let mut report = Report::new("verify-sl", serde_json::to_value(&cp)?);
    for (tag, l) in [("a", &cp.a), ("b", &cp.b)] {
        report.record(&format!("module {tag}: parabose relation"), &verify_parabose(l, a.cutoff));
        report.record(&format!("module {tag}: relations and Q"), &verify_module_relations(l, a.cutoff));
    }
    let kappa = coupled_operators(&cp);
    report.record("coupled relations", &kappa);
    if let Ok(k) = &kappa {
        report.record("Q_CG scalar", &verify_cg_casimir(k));
    }
    if cp.a.epsilon == 1 && cp.b.epsilon == 1 {
        report.record("coupled operators realize H", &verify_kappa_is_h(&cp));
    }
    emit_report(&report, a.format, out)
}

fn cmd_cg(a: &CgArgs, out: &mut dyn Write) -> CliResult {
    let cp = a.coupling.problem()?;
    let table = clebsch_gordan(&cp)?;
    let mut report = Report::new("cg", serde_json::to_value(&cp)?);
    report.record("orthonormality", &table.verify_orthonormal());
    if cp.a.epsilon == 1 && cp.b.epsilon == 1 {
        let m = verify_cg_polynomial_match(&cp);
        report.record("dual -1 Hahn match", &m);
        if let Ok(m) = &m {
            report.data = Some(json!({ "match": m }));
        }
    }
    match a.format {
        Format::Json => {
            let mut data = report.data.take().unwrap_or_else(|| json!({}));
            data["table"] = serde_json::to_value(&table)?;
            if a.approx {
                let approx: Vec<Vec<f64>> =
                    (0..table.dim()).map(|n| (0..table.dim()).map(|k| table.approx(n, k)).collect()).collect();
                data["approx"] = json!(approx);
            }
            report.data = Some(data);
            write_json(out, &report)?;
        }
        Format::Csv => {
            let mut header = vec!["n", "k", "square", "sign"];
            if a.approx {
                header.push("approx");
            }
            let mut rows = Vec::new();
            for n in 0..table.dim() {
                for k in 0..table.dim() {
                    let mut r = vec![
                        n.to_string(),
                        k.to_string(),
                        to_exact_string(table.square(n, k)),
                        table.sign(n, k).to_string(),
                    ];
                    if a.approx {
                        r.push(table.approx(n, k).to_string());
                    }
                    rows.push(r);
                }
            }
            write_csv(out, &header, &rows)?;
        }
    }
    Ok(report.all_passed())
}

fn parse_params(p: &HahnParams, list: Option<&str>) -> Result<FreeParams, Error> {
    match list {
        None => Ok(FreeParams::ones(p)),
        Some(s) => {
            let values = s.split(',').map(parse_rational).collect::<Result<Vec<_>, _>>()?;
            FreeParams::new(p, values)
        }
    }
}

fn cmd_dual_rep(a: &DualRepArgs, out: &mut dyn Write) -> CliResult {
    let p = a.hahn.params()?;
    let fp = parse_params(&p, a.params.as_deref())?;
    let d = match a.printed {
        None => derive_dual_rep(&p, &fp)?,
        Some(Printed::Verbatim) => build_dual_rep_printed(&p, &fp, Transcription::Verbatim)?,
        Some(Printed::Corrected) => build_dual_rep_printed(&p, &fp, Transcription::Corrected)?,
    };
    let mut report = Report::new("dual-rep", json!({ "hahn": params_json(&p), "params": fp }));
    report.record("representation", &verify_dual_rep(&d));
    let intertwiner = similarity_to_primal(&p, &d);
    report.record("intertwiner with the recurrence realization", &intertwiner);
    let notes = if a.notes { Some(transcription_notes(&p, &fp)?) } else { None };
    if let Some(n) = &notes {
        report.record_bool(
            "transcription notes explained",
            n.unexplained == 0 && n.corrected_equals_derived,
            format!("{} unexplained discrepancies", n.unexplained),
        );
    }
    let bl = blocks(&d);
    match a.format {
        Format::Json => {
            let mut data = json!({
                "k1": d.k1(),
                "k2": d.k2(),
                "p": d.p(),
                "blocks": bl,
            });
            if let Ok(i) = &intertwiner {
                data["intertwiner"] = serde_json::to_value(i)?;
            }
            if let Some(n) = &notes {
                data["notes"] = serde_json::to_value(n)?;
            }
            report.data = Some(data);
            write_json(out, &report)?;
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for b in &bl {
                for (i, r) in b.matrix.iter().enumerate() {
                    for (j, v) in r.iter().enumerate() {
                        rows.push(vec![b.label.to_string(), b.index.to_string(), i.to_string(), j.to_string(), v.clone()]);
                    }
                }
            }
            write_csv(out, &["block", "index", "i", "j", "value"], &rows)?;
        }
    }
    Ok(report.all_passed())
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> CliResult {
    let cfg = SweepConfig {
        max_n: a.max_n,
        dual_max_n: a.max_n.min(9),
        seed: a.seed,
        gauges: a.gauges,
        literal: a.literal,
    };
    let cells = run_sweep(&cfg);
    let shown = if a.keep_going {
        cells.len()
    } else {
        cells.iter().position(|c| !c.passed()).map_or(cells.len(), |i| i + 1)
    };
    let cells = &cells[..shown];
    let passed = cells.iter().all(|c| c.passed());
    match a.format {
        None => {
            for c in cells {
                writeln!(out, "{}", c.summary_line())?;
            }
            let failed = cells.iter().filter(|c| !c.passed()).count();
            writeln!(out, "{} cells, {} failed", cells.len(), failed)?;
        }
        Some(Format::Json) => {
            write_json(out, &json!({ "schema": SCHEMA_VERSION, "suite": "sweep", "seed": a.seed, "passed": passed, "cells": cells }))?;
        }
        Some(Format::Csv) => {
            let rows: Vec<Vec<String>> = cells
                .iter()
                .flat_map(|c| {
                    c.checks.iter().map(move |k| {
                        vec![
                            c.key.clone(),
                            k.criterion.to_string(),
                            k.name.to_string(),
                            k.passed.to_string(),
                            k.detail.clone().unwrap_or_default(),
                        ]
                    })
                })
                .collect();
            write_csv(out, &["cell", "criterion", "check", "passed", "detail"], &rows)?;
        }
    }
    Ok(passed)
}
