//! Command-line front end. [`run`] parses arguments, executes one command
//! and returns the process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | solver or I/O error |
//! | 2 | invalid flags or parameters |
//! | 3 | a verification check failed |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::asymptotics::{c_asym, inner_u, outer_u, outer_u21_with_kappa, CaseId, OuterCorrection};
use crate::error::{Error, Result};
use crate::integral_eq::{solve_c, PicardConfig};
use crate::model::{GeneralF, ModelParams, Nonlinearity};
use crate::ode_shoot::{extract_c, shoot, ShootingConfig};
use crate::verify::{cross_solver, identity_suite, monotonicity_suite, Check, Report};

#[derive(Debug, Parser)]
#[command(
    name = "lagerstrom",
    version,
    about = "Solvers and expansions for the Lagerstrom model problem"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shooting solution: profile (r, u, u', w) and summary (c_star, C, u_inf, bound).
    Solve(SolveArgs),
    /// Integral-equation solution: profile on the rho-grid and (C, Phi, iterations).
    Ie(IeArgs),
    /// Inner or outer expansion on a grid.
    Asym(AsymArgs),
    /// Per-eps summary rows over an eps-grid.
    Sweep(SweepArgs),
    /// Property suite and cross-solver checks.
    Verify(VerifyArgs),
    /// Closed-form identity suite.
    Identities(IdentitiesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to json for a `.json` output file and csv otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl OutputArgs {
    pub fn resolved_format(&self) -> Format {
        match (self.format, &self.out) {
            (Some(f), _) => f,
            (None, Some(p)) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 3.0)]
    pub n: f64,
    /// Constant nonlinearity f(u) = k.
    #[arg(long, conflicts_with = "f_table")]
    pub k: Option<f64>,
    /// Two-column CSV of (u, f(u)) samples on [0, 1].
    #[arg(long)]
    pub f_table: Option<PathBuf>,
    #[arg(long)]
    pub eps: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Tolerance on |u(inf) - 1|.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct IeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sup-norm tolerance of the fixed-point iteration.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 160)]
    pub points_per_decade: usize,
    /// Continue even when Phi >= 1.
    #[arg(long)]
    pub allow_large_phi: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expansion {
    /// Fixed r; the grid is in r.
    Inner,
    /// Fixed rho = eps r; the grid is in rho.
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Correction {
    Corrected,
    Alternate,
}

#[derive(Debug, Clone, Args)]
pub struct AsymArgs {
    /// Case as "n,k": 2,0 or 3,0 or 2,1.
    #[arg(long, value_parser = parse_case)]
    pub case: CaseId,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = Expansion::Inner)]
    pub expansion: Expansion,
    /// Correction coefficient of the (2,1) outer expansion.
    #[arg(long, value_enum, default_value_t = Correction::Corrected)]
    pub correction: Correction,
    /// Evaluation grid "lo:hi:count", evenly spaced.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Grid,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Case as "n,k"; overrides --n and --k.
    #[arg(long, value_parser = parse_case)]
    pub case: Option<CaseId>,
    #[arg(long, default_value_t = 3.0)]
    pub n: f64,
    #[arg(long, default_value_t = 0.0)]
    pub k: f64,
    /// Comma-separated eps values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps_grid: Vec<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Restrict to one case; all three by default.
    #[arg(long, value_parser = parse_case)]
    pub case: Option<CaseId>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1])]
    pub eps_grid: Vec<f64>,
    /// Limit on the shooting vs integral-equation sup-norm on r in [1, 5/eps].
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct IdentitiesArgs {
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.hi
                } else {
                    self.lo + i as f64 * h
                }
            })
            .collect()
    }
}

fn parse_case(s: &str) -> std::result::Result<CaseId, String> {
    s.parse::<CaseId>().map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:count, got {s:?}"));
    }
    let lo: f64 = parts[0].trim().parse().map_err(|e| format!("bad lo: {e}"))?;
    let hi: f64 = parts[1].trim().parse().map_err(|e| format!("bad hi: {e}"))?;
    let count: usize = parts[2].trim().parse().map_err(|e| format!("bad count: {e}"))?;
    if !(lo.is_finite() && hi.is_finite()) || count == 0 || (count > 1 && !(hi > lo)) {
        return Err(format!("grid needs finite lo < hi and count >= 1, got {s:?}"));
    }
    Ok(Grid { lo, hi, count })
}

/// Errors that map to distinct exit codes.
enum Failure {
    Flags(String),
    Solver(Error),
    Verification(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Solver(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn load_f_table(path: &Path) -> std::result::Result<GeneralF, Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::Flags(format!("cannot read {}: {e}", path.display())))?;
    let (mut u, mut f) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Failure::Flags(format!("{}: {e}", path.display())))?;
        if rec.len() < 2 {
            return Err(Failure::Flags(format!(
                "{}: row {} needs two columns",
                path.display(),
                i + 1
            )));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                u.push(a);
                f.push(b);
            }
            // A non-numeric first row is a header.
            _ if i == 0 => continue,
            _ => {
                return Err(Failure::Flags(format!(
                    "{}: row {} is not numeric",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    GeneralF::from_samples(&u, &f).map_err(|e| Failure::Flags(e.to_string()))
}

fn model_params(m: &ModelArgs) -> std::result::Result<ModelParams, Failure> {
    let nonlinearity = match &m.f_table {
        Some(path) => Nonlinearity::GeneralF(load_f_table(path)?),
        None => Nonlinearity::ConstantK { k: m.k.unwrap_or(0.0) },
    };
    ModelParams::new(m.n, m.eps, nonlinearity).map_err(|e| Failure::Flags(e.to_string()))
}

fn check_tol(tol: f64) -> std::result::Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::Flags(format!("--tol must be positive, got {tol}")))
    }
}

fn emit(out: &OutputArgs, bytes: &[u8]) -> CmdResult {
    let res = match &out.out {
        Some(path) => std::fs::write(path, bytes),
        None => std::io::stdout().write_all(bytes),
    };
    res.map_err(|e| Failure::Solver(Error::from(e)))
}

/// Columns of equal length, written either as CSV or as a JSON object of
/// arrays together with a summary object.
struct Table {
    headers: Vec<&'static str>,
    columns: Vec<Vec<f64>>,
}

impl Table {
    fn csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        let rows = self.columns.first().map_or(0, Vec::len);
        for i in 0..rows {
            w.write_record(self.columns.iter().map(|c| num(c[i])))?;
        }
        w.into_inner().map_err(|e| Error::from(e.into_error()))
    }

    fn json_value(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (h, c) in self.headers.iter().zip(&self.columns) {
            map.insert((*h).to_string(), json!(c));
        }
        serde_json::Value::Object(map)
    }
}

fn summary_csv(pairs: &[(&str, f64)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(pairs.iter().map(|p| p.0))?;
    w.write_record(pairs.iter().map(|p| num(p.1)))?;
    w.into_inner().map_err(|e| Error::from(e.into_error()))
}

fn summary_json(pairs: &[(&str, f64)]) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (k, v) in pairs {
        map.insert((*k).to_string(), json!(v));
    }
    serde_json::Value::Object(map)
}

/// CSV: the table goes to the output and the summary to standard output
/// (standard error when the table itself goes to standard output). JSON: a
/// single document with both.
fn emit_table(out: &OutputArgs, table: &Table, summary: &[(&str, f64)], extra: serde_json::Value) -> CmdResult {
    match out.resolved_format() {
        Format::Csv => {
            emit(out, &table.csv()?)?;
            let s = summary_csv(summary)?;
            if out.out.is_some() {
                std::io::stdout().write_all(&s).map_err(Error::from)?;
            } else {
                std::io::stderr().write_all(&s).map_err(Error::from)?;
            }
            Ok(())
        }
        Format::Json => {
            let doc = json!({
                "summary": summary_json(summary),
                "params": extra,
                "profile": table.json_value(),
            });
            let mut bytes = serde_json::to_vec_pretty(&doc).map_err(Error::from)?;
            bytes.push(b'\n');
            emit(out, &bytes)
        }
    }
}

fn cmd_solve(a: &SolveArgs) -> CmdResult {
    check_tol(a.tol)?;
    let params = model_params(&a.model)?;
    let cfg = ShootingConfig {
        root_tol: a.tol,
        ivp_tol: (a.tol * 1e-2).min(1e-10),
        ..ShootingConfig::default()
    };
    let (c_star, prof) = shoot(&params, &cfg)?;
    let big_c = extract_c(c_star, &prof, &params)?;
    let table = Table {
        headers: vec!["r", "u", "du_dr", "w"],
        columns: vec![prof.r_grid.clone(), prof.u.clone(), prof.du.clone(), prof.w.clone()],
    };
    let summary = [
        ("c_star", c_star),
        ("C", big_c),
        ("u_inf", prof.u_inf),
        ("u_inf_bound", prof.u_inf_bound),
        ("r_max", prof.r_max()),
    ];
    emit_table(&a.output, &table, &summary, json!(params))
}

fn cmd_ie(a: &IeArgs) -> CmdResult {
    check_tol(a.tol)?;
    let params = model_params(&a.model)?;
    let cfg = PicardConfig {
        points_per_decade: a.points_per_decade,
        tol: a.tol,
        allow_large_phi: a.allow_large_phi,
        ..PicardConfig::default()
    };
    let (big_c, prof, diag) = solve_c(&params, &cfg)?;
    let du = prof.du_drho(&params)?;
    let table = Table {
        headers: vec!["rho", "r", "u", "g", "du_drho"],
        columns: vec![
            prof.rho_grid.clone(),
            prof.rho_grid.iter().map(|x| x / params.eps).collect(),
            prof.u_values(&params),
            prof.v.clone(),
            du,
        ],
    };
    let summary = [
        ("C", big_c),
        ("Phi", diag.phi),
        ("iterations", diag.iterations as f64),
        ("final_residual", diag.final_residual),
        ("c_star", prof.implied_slope(&params)?),
        ("P", prof.p),
    ];
    emit_table(&a.output, &table, &summary, json!(params))
}

fn cmd_asym(a: &AsymArgs) -> CmdResult {
    if !(a.eps > 0.0 && a.eps < 0.2) {
        return Err(Failure::Flags(format!("--eps must lie in (0, 0.2), got {}", a.eps)));
    }
    if a.order == 0 {
        return Err(Failure::Flags("--order must be >= 1".into()));
    }
    let xs = a.grid.points();
    let (x_name, y_name) = match a.expansion {
        Expansion::Inner => ("r", "u_inner"),
        Expansion::Outer => ("rho", "u_outer"),
    };
    let ys: Result<Vec<f64>> = xs
        .iter()
        .map(|&x| match a.expansion {
            Expansion::Inner => inner_u(a.case, a.eps, x, a.order),
            Expansion::Outer if a.case == CaseId::N2K1 && a.order >= 2 => {
                let kappa = match a.correction {
                    Correction::Corrected => OuterCorrection::Corrected,
                    Correction::Alternate => OuterCorrection::Alternate,
                }
                .kappa();
                outer_u21_with_kappa(a.eps, x, kappa)
            }
            Expansion::Outer => outer_u(a.case, a.eps, x, a.order),
        })
        .collect();
    let table = Table {
        headers: vec![x_name, y_name],
        columns: vec![xs, ys?],
    };
    let summary = [
        ("eps", a.eps),
        ("order", a.order as f64),
        ("C", c_asym(a.case, a.eps, a.order.min(3))?),
    ];
    emit_table(&a.output, &table, &summary, json!({ "case": a.case.label() }))
}

#[derive(Debug, Serialize)]
struct SweepRow {
    eps: f64,
    c_star: f64,
    c_shoot: f64,
    c_ie: f64,
    c_asym: f64,
    phi: f64,
}

fn sweep_row(params: &ModelParams, case: Option<CaseId>, tol: f64) -> Result<SweepRow> {
    let cfg = ShootingConfig {
        root_tol: tol,
        ivp_tol: (tol * 1e-2).min(1e-10),
        ..ShootingConfig::default()
    };
    let (c_star, prof) = shoot(params, &cfg)?;
    let c_shoot = extract_c(c_star, &prof, params)?;
    let (c_ie, phi) = if params.n >= 2.0 {
        let (c, _, diag) = solve_c(params, &PicardConfig::default())?;
        (c, diag.phi)
    } else {
        (f64::NAN, f64::NAN)
    };
    let c_asym = match case {
        Some(case) if params.eps < 0.2 => c_asym(case, params.eps, 3)?,
        _ => f64::NAN,
    };
    Ok(SweepRow {
        eps: params.eps,
        c_star,
        c_shoot,
        c_ie,
        c_asym,
        phi,
    })
}

fn cmd_sweep(a: &SweepArgs) -> CmdResult {
    check_tol(a.tol)?;
    let (n, k) = match a.case {
        Some(c) => (c.n() as f64, c.k() as f64),
        None => (a.n, a.k),
    };
    let case = a.case.or_else(|| CaseId::from_params(n, k));
    let params: Vec<ModelParams> = a
        .eps_grid
        .iter()
        .map(|&e| ModelParams::constant_k(n, k, e).map_err(|e| Failure::Flags(e.to_string())))
        .collect::<std::result::Result<_, _>>()?;
    let rows: Vec<Result<SweepRow>> = params.par_iter().map(|p| sweep_row(p, case, a.tol)).collect();
    let rows: Vec<SweepRow> = rows.into_iter().collect::<Result<_>>()?;
    let bytes = match a.output.resolved_format() {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["eps", "c_star", "C", "C_ie", "C_asym", "Phi"])
                .map_err(Error::from)?;
            for r in &rows {
                w.write_record([r.eps, r.c_star, r.c_shoot, r.c_ie, r.c_asym, r.phi].map(num))
                    .map_err(Error::from)?;
            }
            w.into_inner().map_err(|e| Error::from(e.into_error()))?
        }
        Format::Json => {
            let mut b = serde_json::to_vec_pretty(&json!({ "n": n, "k": k, "rows": rows })).map_err(Error::from)?;
            b.push(b'\n');
            b
        }
    };
    emit(&a.output, &bytes)
}

fn write_report(out: &OutputArgs, report: &Report) -> CmdResult {
    let mut bytes = Vec::new();
    match out.resolved_format() {
        Format::Csv => report.write_csv(&mut bytes)?,
        Format::Json => report.write_json(&mut bytes)?,
    }
    emit(out, &bytes)?;
    let failed = report.failures().count();
    for c in report.failures() {
        eprintln!(
            "check failed: {} (measured {}, reference {})",
            c.name, c.measured, c.reference
        );
    }
    if failed > 0 {
        Err(Failure::Verification(failed))
    } else {
        Ok(())
    }
}

fn cmd_verify(a: &VerifyArgs) -> CmdResult {
    check_tol(a.tol)?;
    let cases: Vec<CaseId> = match a.case {
        Some(c) => vec![c],
        None => CaseId::ALL.to_vec(),
    };
    let mut list = Vec::new();
    for &case in &cases {
        for &eps in &a.eps_grid {
            list.push(
                ModelParams::constant_k(case.n() as f64, case.k() as f64, eps)
                    .map_err(|e| Failure::Flags(e.to_string()))?,
            );
        }
    }
    let shoot_cfg = ShootingConfig::default();
    let mut report = monotonicity_suite(&list, &shoot_cfg);
    let cross: Vec<Check> = list
        .par_iter()
        .map(|p| {
            let name = format!(
                "shooting vs integral equation sup-norm, n={} k={} eps={}",
                p.n,
                p.nonlinearity.is_constant().unwrap_or(f64::NAN),
                p.eps
            );
            match cross_solver(p, &shoot_cfg, &PicardConfig::default(), 5.0 / p.eps) {
                Ok(r) => Check::at_most(name, r.metrics.sup_norm, a.tol),
                Err(_) => Check::failed(name),
            }
        })
        .collect();
    for c in cross {
        report.push(c);
    }
    report.metadata.config = json!({ "tol": a.tol, "eps_grid": a.eps_grid });
    write_report(&a.output, &report)
}

fn cmd_identities(a: &IdentitiesArgs) -> CmdResult {
    check_tol(a.tol)?;
    write_report(&a.output, &identity_suite(a.tol))
}

/// Parse `args` (including the program name) and execute; returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Ie(a) => cmd_ie(a),
        Command::Asym(a) => cmd_asym(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Identities(a) => cmd_identities(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Flags(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(Failure::Verification(n)) => {
            eprintln!("verification failed: {n} check(s)");
            3
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("1:5:5").unwrap();
        assert_eq!(g.points(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(parse_grid("0.5:0.5:1").unwrap().points(), vec![0.5]);
        assert!(parse_grid("1:5").is_err());
        assert!(parse_grid("5:1:3").is_err());
        assert!(parse_grid("1:5:0").is_err());
    }

    #[test]
    fn case_parsing() {
        assert_eq!(parse_case("3,0").unwrap(), CaseId::N3K0);
        assert!(parse_case("4,0").is_err());
    }

    #[test]
    fn flag_errors_exit_2() {
        assert_eq!(run(["lagerstrom", "solve", "--n", "3"]), 2);
        assert_eq!(run(["lagerstrom", "solve", "--eps", "-1"]), 2);
        assert_eq!(run(["lagerstrom", "bogus"]), 2);
        assert_eq!(
            run(["lagerstrom", "asym", "--case", "3,0", "--eps", "0.5", "--grid", "1:2:3"]),
            2
        );
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(run(["lagerstrom", "--help"]), 0);
    }
}
