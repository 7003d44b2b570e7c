//! `blw` — construct Battle-Lemarie-type spline wavelets, verify their
//! localisation identities, and compute Besov sequence norms.
//!
//! Exit codes: 0 success, 1 verification failure (a residual above its
//! tolerance), 2 usage or validation error.

use blw_core::besov::{
    dyadic_grid, equivalence_report, modulus_norm, norm_circ, norm_star, BesovParams, NormReport,
};
use blw_core::bspline::{
    bspline, derivative_identity_check, two_scale_expand, verify_bspline_properties,
};
use blw_core::dyadic::DyadicRational;
use blw_core::euler_frobenius::{EulerFrobeniusData, TFlag};
use blw_core::localisation::{build_phi, build_psi, verify_dym_identities};
use blw_core::piecewise::PiecewisePolynomial;
use blw_core::wavelet::{
    gram_matrix, phi_series, psi_series, vanishing_moments, GramSystem, Sign, WaveletSpec,
};
use blw_core::TranslateSeries;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "blw",
    version,
    about = "spline wavelet construction, localisation checks and Besov norms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Symbol-polynomial roots, factors and constants for one order
    Roots(RootsArgs),
    /// Build a scaling function or wavelet series and emit it
    Build(BuildArgs),
    /// Run a verification suite; exits 1 if any residual exceeds tolerance
    Verify(VerifyArgs),
    /// Compute sequence norms of a function loaded from a file
    Norm(NormArgs),
    /// Gram matrix of a translated system
    Gram(GramArgs),
    /// Sample data behind one of the family figures
    PlotData(PlotDataArgs),
}

#[derive(Args)]
struct RootsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Phi,
    Psi,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    /// "+" or "-"
    #[arg(long, default_value = "-", allow_hyphen_values = true)]
    sign: String,
    /// comma-separated per-factor choice: r or invr (default all r)
    #[arg(long)]
    t: Option<String>,
    #[arg(long, default_value_t = 1e-10)]
    epsilon: f64,
    /// sampling window "a,b" for csv output
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// bspline | localisation | moments | orthonormality | all
    suite: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1e-12)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NormArgs {
    /// piecewise polynomial json, translate-series json, or samples csv
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    /// "inf" allowed
    #[arg(long)]
    p: String,
    /// "inf" allowed
    #[arg(long)]
    q: String,
    /// deepest wavelet level
    #[arg(long, default_value_t = 8)]
    max_level: i32,
    /// star | circ | both | modulus
    #[arg(long, default_value = "both")]
    which: String,
    #[arg(long, default_value_t = 1e-10)]
    epsilon: f64,
    /// difference order for the modulus oracle (default n + 1)
    #[arg(long)]
    modulus_order: Option<usize>,
    /// dyadic grid depth for the modulus oracle
    #[arg(long, default_value_t = 12)]
    grid_levels: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GramArgs {
    /// phi | psi | cross
    #[arg(long)]
    system: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "-", allow_hyphen_values = true)]
    sign: String,
    #[arg(long, default_value_t = 8)]
    range: i64,
    #[arg(long, default_value_t = 1e-10)]
    epsilon: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotDataArgs {
    /// one of: phi1+ phi1- psi_r1+ r1psi_invr1+ psi_r1- r1psi_invr1- phi2+ phi2- psi_r1r2+
    #[arg(long)]
    figure: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Validation(String),
    Verification(String),
}

impl From<blw_core::Error> for CliError {
    fn from(e: blw_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Roots(a) => cmd_roots(a),
        Command::Build(a) => cmd_build(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Norm(a) => cmd_norm(a),
        Command::Gram(a) => cmd_gram(a),
        Command::PlotData(a) => cmd_plot_data(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

// ---- output helpers ----

/// JSON formatter printing every float with 17 significant digits.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + std::io::Write>(
        &mut self,
        writer: &mut W,
        value: f64,
    ) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

fn render_json(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    serde::Serialize::serialize(v, &mut ser).expect("in-memory serialization");
    let mut s = String::from_utf8(buf).expect("json is utf-8");
    s.push('\n');
    s
}

/// Write atomically via a sibling temp file, or print to stdout.
fn emit(out: Option<&Path>, content: &str) -> CliResult<()> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let tmp = path.with_extension("tmp~");
            std::fs::write(&tmp, content)
                .and_then(|()| std::fs::rename(&tmp, path))
                .map_err(|e| CliError::Validation(format!("writing {}: {e}", path.display())))
        }
    }
}

fn parse_sign(s: &str) -> CliResult<Sign> {
    match s {
        "+" | "plus" => Ok(Sign::Plus),
        "-" | "minus" => Ok(Sign::Minus),
        other => Err(CliError::Validation(format!(
            "sign must be + or -, got {other:?}"
        ))),
    }
}

fn parse_tchoice(t: Option<&str>, n: usize) -> CliResult<Vec<TFlag>> {
    match t {
        None => Ok(vec![TFlag::UseR; n]),
        Some(spec) => {
            let flags: CliResult<Vec<TFlag>> = spec
                .split(',')
                .map(|tok| match tok.trim() {
                    "r" => Ok(TFlag::UseR),
                    "invr" | "1/r" => Ok(TFlag::UseInvR),
                    other => Err(CliError::Validation(format!(
                        "t entries must be r or invr, got {other:?}"
                    ))),
                })
                .collect();
            let flags = flags?;
            if flags.len() != n {
                return Err(CliError::Validation(format!(
                    "t has {} entries but n = {n}",
                    flags.len()
                )));
            }
            Ok(flags)
        }
    }
}

fn parse_exponent(s: &str) -> CliResult<f64> {
    if s.eq_ignore_ascii_case("inf") || s == "∞" {
        return Ok(f64::INFINITY);
    }
    s.parse::<f64>()
        .map_err(|_| CliError::Validation(format!("cannot parse exponent {s:?}")))
}

fn max_psi_order() -> usize {
    std::env::var("BLW_MAX_N")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(4)
}

// ---- roots ----

fn cmd_roots(a: RootsArgs) -> CliResult<()> {
    if a.n == 0 {
        return Err(CliError::Validation("roots are defined for n >= 1".into()));
    }
    let data = EulerFrobeniusData::compute(a.n)?;
    let content = match a.format {
        Format::Json => render_json(&json!({
            "schema": 1,
            "n": a.n,
            "alphas": data.alphas,
            "rs": data.rs,
            "beta": data.beta,
            "delta": data.delta,
            "residuals": data.residuals,
        })),
        _ => {
            let mut t = format!("order n = {}\n", a.n);
            t.push_str("  j          alpha_j                      r_j          residual\n");
            for j in 0..a.n {
                t.push_str(&format!(
                    "{:>3} {:>20.15} {:>24.17e} {:>12.2e}\n",
                    j + 1,
                    data.alphas[j],
                    data.rs[j],
                    data.residuals[j]
                ));
            }
            t.push_str(&format!(
                "beta = {:.17e}\ndelta = {:.17e}\n",
                data.beta, data.delta
            ));
            t
        }
    };
    emit(a.out.as_deref(), &content)
}

// ---- build ----

fn build_series(kind: Kind, spec: &WaveletSpec, epsilon: f64) -> CliResult<TranslateSeries> {
    Ok(match kind {
        Kind::Phi => phi_series(spec, epsilon)?,
        Kind::Psi => psi_series(spec, epsilon)?,
    })
}

fn parse_window(w: &str) -> CliResult<(f64, f64)> {
    let parts: Vec<&str> = w.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Validation(format!(
            "window must be \"a,b\", got {w:?}"
        )));
    }
    let a: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("bad window endpoint {:?}", parts[0])))?;
    let b: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("bad window endpoint {:?}", parts[1])))?;
    if a >= b {
        return Err(CliError::Validation("window must satisfy a < b".into()));
    }
    Ok((a, b))
}

fn sample_csv(f: &PiecewisePolynomial, lo: f64, hi: f64) -> String {
    let mut out = String::from("x,value\n");
    let mut k = (lo * 64.0).ceil() as i64;
    let hi_k = (hi * 64.0).floor() as i64;
    while k <= hi_k {
        let x = k as f64 / 64.0;
        out.push_str(&format!("{x},{:.16e}\n", f.evaluate(x)));
        k += 1;
    }
    out
}

fn cmd_build(a: BuildArgs) -> CliResult<()> {
    let sign = parse_sign(&a.sign)?;
    let tchoice = parse_tchoice(a.t.as_deref(), a.n)?;
    let spec = WaveletSpec::new(a.n, sign, tchoice)?;
    let series = build_series(a.kind, &spec, a.epsilon)?;
    let content = match a.format {
        Format::Csv => {
            let (lo, hi) = match a.window.as_deref() {
                Some(w) => parse_window(w)?,
                None => {
                    let (lo, hi) = series.support().expect("built series is nonempty");
                    (lo.value(), hi.value())
                }
            };
            let grid = (
                DyadicRational::new((lo * 64.0).floor() as i64, 6),
                DyadicRational::new((hi * 64.0).ceil() as i64, 6),
            );
            let (poly, _) = series.materialize(Some(grid));
            sample_csv(&poly, lo, hi)
        }
        _ => render_json(&json!({
            "schema": 1,
            "kind": match a.kind { Kind::Phi => "phi", Kind::Psi => "psi" },
            "n": a.n,
            "sign": match sign { Sign::Plus => "+", Sign::Minus => "-" },
            "series": serde_json::to_value(&series).expect("series serializes"),
        })),
    };
    emit(a.out.as_deref(), &content)
}

// ---- verify ----

struct Check {
    name: String,
    residual: f64,
    tolerance: f64,
}

fn run_suite(suite: &str, n: usize, epsilon: f64) -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    let push = |checks: &mut Vec<Check>, name: &str, residual: f64, tolerance: f64| {
        checks.push(Check {
            name: name.into(),
            residual,
            tolerance,
        });
    };
    match suite {
        "bspline" => {
            if n < 1 {
                return Err(CliError::Validation("bspline suite needs n >= 1".into()));
            }
            let rep = verify_bspline_properties(n);
            push(&mut checks, "support_positivity", if rep.support_ok && rep.positivity_ok { 0.0 } else { 1.0 }, 0.5);
            push(&mut checks, "knot_smoothness", rep.max_knot_jump, 1e-10);
            push(&mut checks, "symmetry", rep.max_symmetry_err, 1e-12);
            push(
                &mut checks,
                "derivative_identity",
                if derivative_identity_check(n) { 0.0 } else { 1.0 },
                0.5,
            );
            let b = bspline(n);
            let parts: Vec<PiecewisePolynomial> = two_scale_expand(n)
                .iter()
                .map(|&(k, _)| b.translate_dilate(DyadicRational::integer(k), 1))
                .collect();
            let terms: Vec<(f64, &PiecewisePolynomial)> = two_scale_expand(n)
                .iter()
                .zip(parts.iter())
                .map(|(&(_, w), p)| (w, p))
                .collect();
            let combo = PiecewisePolynomial::linear_combine(&terms);
            push(
                &mut checks,
                "two_scale_reproduction",
                PiecewisePolynomial::sup_distance(&combo, &b, 8),
                1e-13,
            );
        }
        "localisation" => {
            let cap = max_psi_order();
            if n > cap {
                return Err(CliError::Validation(format!(
                    "n = {n} exceeds the wavelet-sum cap {cap} (set BLW_MAX_N to raise)"
                )));
            }
            if n < 1 {
                return Err(CliError::Validation("localisation suite needs n >= 1".into()));
            }
            for sign in [Sign::Plus, Sign::Minus] {
                let phi = build_phi(n, sign, epsilon)?;
                let tag = if sign == Sign::Plus { "plus" } else { "minus" };
                push(
                    &mut checks,
                    &format!("phi_off_center_{tag}"),
                    phi.max_off_center,
                    10.0 * epsilon,
                );
            }
            let psi = build_psi(n, Sign::Plus, epsilon)?;
            push(&mut checks, "psi_sup_distance", psi.sup_distance, 1e-8);
            push(
                &mut checks,
                "psi_outside_support",
                psi.max_outside_support,
                1e-8,
            );
            let dym = verify_dym_identities(n)?;
            if let Some(d1) = dym.dym1 {
                push(&mut checks, "dym_order1", d1, 1e-11);
            }
            if let Some(d2) = dym.dym2 {
                push(&mut checks, "dym_order2", d2, 1e-11);
            }
            push(
                &mut checks,
                "dym_general",
                dym.dymm,
                if n <= 2 { 1e-11 } else { 1e-10 },
            );
        }
        "moments" => {
            let spec = WaveletSpec::all_r(n, Sign::Plus)?;
            for (m, v) in vanishing_moments(&spec, epsilon)?.iter().enumerate() {
                push(&mut checks, &format!("moment_{m}"), v.abs(), 1e-7);
            }
        }
        "orthonormality" => {
            let spec = WaveletSpec::all_r(n, Sign::Plus)?;
            let gp = gram_matrix(GramSystem::Phi, &spec, 8, epsilon)?;
            let gs = gram_matrix(GramSystem::Psi, &spec, 8, epsilon)?;
            let gc = gram_matrix(GramSystem::Cross, &spec, 8, epsilon)?;
            push(&mut checks, "phi_gram_dev", gp.max_dev_identity(), 1e-6);
            push(&mut checks, "psi_gram_dev", gs.max_dev_identity(), 1e-6);
            push(&mut checks, "cross_gram", gc.max_abs(), 1e-6);
        }
        "all" => {
            for s in ["bspline", "localisation", "moments", "orthonormality"] {
                checks.extend(run_suite(s, n, epsilon)?);
            }
        }
        other => {
            return Err(CliError::Validation(format!(
                "unknown suite {other:?}; expected bspline, localisation, moments, orthonormality or all"
            )))
        }
    }
    Ok(checks)
}

fn cmd_verify(a: VerifyArgs) -> CliResult<()> {
    let checks = run_suite(&a.suite, a.n, a.epsilon)?;
    let all_pass = checks.iter().all(|c| c.residual <= c.tolerance);
    if a.format == Format::Table {
        let mut t = format!(
            "suite {} (n = {}, epsilon = {:e})\n",
            a.suite, a.n, a.epsilon
        );
        for c in &checks {
            t.push_str(&format!(
                "  {:<24} residual {:>12.3e}  tolerance {:>9.1e}  {}\n",
                c.name,
                c.residual,
                c.tolerance,
                if c.residual <= c.tolerance {
                    "pass"
                } else {
                    "FAIL"
                }
            ));
        }
        emit(a.out.as_deref(), &t)?;
        return if all_pass {
            Ok(())
        } else {
            Err(CliError::Verification("see table above".into()))
        };
    }
    let report = json!({
        "schema": 1,
        "suite": a.suite,
        "n": a.n,
        "epsilon": a.epsilon,
        "tolerances": checks.iter().map(|c| json!({
            "name": c.name,
            "tolerance": c.tolerance,
        })).collect::<Vec<_>>(),
        "checks": checks.iter().map(|c| json!({
            "name": c.name,
            "residual": c.residual,
            "tolerance": c.tolerance,
            "pass": c.residual <= c.tolerance,
        })).collect::<Vec<_>>(),
        "pass": all_pass,
    });
    emit(a.out.as_deref(), &render_json(&report))?;
    if all_pass {
        Ok(())
    } else {
        let failed: Vec<&str> = checks
            .iter()
            .filter(|c| c.residual > c.tolerance)
            .map(|c| c.name.as_str())
            .collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}

// ---- norm ----

fn load_function(path: &Path) -> CliResult<PiecewisePolynomial> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("reading {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "csv") {
        return interpolate_samples(&text);
    }
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("parsing {}: {e}", path.display())))?;
    // direct polynomial, bare series, or a `build` wrapper
    if value.get("knots").is_some() {
        let f: PiecewisePolynomial = serde_json::from_value(value)
            .map_err(|e| CliError::Validation(format!("bad piecewise polynomial: {e}")))?;
        return Ok(f);
    }
    let series_value = if value.get("terms").is_some() {
        value
    } else if let Some(inner) = value.get("series") {
        inner.clone()
    } else {
        return Err(CliError::Validation(
            "input json is neither a piecewise polynomial nor a translate series".into(),
        ));
    };
    let series: TranslateSeries = serde_json::from_value(series_value)
        .map_err(|e| CliError::Validation(format!("bad translate series: {e}")))?;
    Ok(series.materialize(None).0)
}

/// Piecewise-linear interpolant of `x,value` samples; abscissas are
/// snapped to the dyadic grid at scale 20.
fn interpolate_samples(text: &str) -> CliResult<PiecewisePolynomial> {
    let mut pts: Vec<(DyadicRational, f64)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("x,") || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(',');
        let (Some(xs), Some(vs)) = (it.next(), it.next()) else {
            return Err(CliError::Validation(format!(
                "line {}: expected x,value",
                i + 1
            )));
        };
        let x: f64 = xs
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("line {}: bad x {xs:?}", i + 1)))?;
        let v: f64 = vs
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("line {}: bad value {vs:?}", i + 1)))?;
        pts.push((
            DyadicRational::new((x * (1u64 << 20) as f64).round() as i64, 20),
            v,
        ));
    }
    pts.sort_by_key(|a| a.0);
    pts.dedup_by(|a, b| a.0 == b.0);
    if pts.len() < 2 {
        return Err(CliError::Validation("need at least two samples".into()));
    }
    let knots: Vec<DyadicRational> = pts.iter().map(|(x, _)| *x).collect();
    let pieces: Vec<Vec<f64>> = pts
        .windows(2)
        .map(|w| {
            let width = w[1].0.diff_value(&w[0].0);
            vec![w[0].1, (w[1].1 - w[0].1) / width]
        })
        .collect();
    PiecewisePolynomial::new(knots, pieces)
        .map_err(|e| CliError::Validation(format!("building interpolant: {e}")))
}

fn norm_report_value(rep: &NormReport) -> Value {
    json!({
        "value": rep.value,
        "first_term": rep.first_term,
        "level_masses": rep.level_masses,
        "level_terms": rep.level_terms,
    })
}

fn cmd_norm(a: NormArgs) -> CliResult<()> {
    let f = load_function(&a.input)?;
    let p = parse_exponent(&a.p)?;
    let q = parse_exponent(&a.q)?;
    let which = a.which.as_str();
    let mut body = serde_json::Map::new();
    body.insert("schema".into(), json!(1));
    body.insert("which".into(), json!(which));
    body.insert("n".into(), json!(a.n));
    body.insert("s".into(), json!(a.s));
    match which {
        "modulus" => {
            let order = a.modulus_order.unwrap_or(a.n + 1);
            let grid = dyadic_grid(a.grid_levels);
            let v = modulus_norm(&f, order, a.s, p, q, &grid)?;
            body.insert("value".into(), json!(v));
            body.insert("modulus_order".into(), json!(order));
            body.insert("grid_levels".into(), json!(a.grid_levels));
        }
        "star" | "circ" | "both" => {
            let params = BesovParams::new(a.n, a.s, p, q)?;
            let mut values = serde_json::Map::new();
            let mut star_v = None;
            let mut circ_v = None;
            if which != "circ" {
                let rep = norm_star(&f, &params, a.max_level, a.epsilon)?;
                star_v = Some(rep.value);
                values.insert("star".into(), norm_report_value(&rep));
            }
            if which != "star" {
                let rep = norm_circ(&f, &params, a.max_level, a.epsilon)?;
                circ_v = Some(rep.value);
                values.insert("circ".into(), norm_report_value(&rep));
            }
            body.insert("values".into(), Value::Object(values));
            if let (Some(s), Some(c)) = (star_v, circ_v) {
                if c > 0.0 {
                    body.insert("ratio".into(), json!(s / c));
                }
                let rep = equivalence_report(&f, &params, a.max_level, a.epsilon)?;
                body.insert(
                    "bounds".into(),
                    json!({
                        "block_lower": rep.block_lower,
                        "block_upper": rep.block_upper,
                        "block_ratio": rep.block_ratio,
                        "violation": rep.violation,
                    }),
                );
            }
            body.insert(
                "tail_bounds".into(),
                json!({
                    "basis_truncation": a.epsilon,
                    "max_level": a.max_level,
                }),
            );
        }
        other => {
            return Err(CliError::Validation(format!(
                "--which must be star, circ, both or modulus, got {other:?}"
            )))
        }
    }
    emit(a.out.as_deref(), &render_json(&Value::Object(body)))
}

// ---- gram ----

fn cmd_gram(a: GramArgs) -> CliResult<()> {
    let system = match a.system.as_str() {
        "phi" => GramSystem::Phi,
        "psi" => GramSystem::Psi,
        "cross" => GramSystem::Cross,
        other => {
            return Err(CliError::Validation(format!(
                "--system must be phi, psi or cross, got {other:?}"
            )))
        }
    };
    if a.range < 1 {
        return Err(CliError::Validation("--range must be >= 1".into()));
    }
    let spec = WaveletSpec::all_r(a.n, parse_sign(&a.sign)?)?;
    let g = gram_matrix(system, &spec, a.range, a.epsilon)?;
    let report = json!({
        "schema": 1,
        "system": a.system,
        "n": a.n,
        "shift_range": a.range,
        "epsilon": a.epsilon,
        "max_dev_identity": g.max_dev_identity(),
        "max_abs": g.max_abs(),
        "rows": g.rows,
    });
    emit(a.out.as_deref(), &render_json(&report))
}

// ---- plot-data ----

struct Figure {
    kind: Kind,
    n: usize,
    sign: Sign,
    tchoice: Vec<TFlag>,
    scale: FigureScale,
}

enum FigureScale {
    One,
    R1,
}

fn figure_spec(id: &str) -> CliResult<Figure> {
    use TFlag::{UseInvR, UseR};
    let fig = match id {
        "phi1+" => Figure {
            kind: Kind::Phi,
            n: 1,
            sign: Sign::Plus,
            tchoice: vec![UseR],
            scale: FigureScale::One,
        },
        "phi1-" => Figure {
            kind: Kind::Phi,
            n: 1,
            sign: Sign::Minus,
            tchoice: vec![UseR],
            scale: FigureScale::One,
        },
        "psi_r1+" => Figure {
            kind: Kind::Psi,
            n: 1,
            sign: Sign::Plus,
            tchoice: vec![UseR],
            scale: FigureScale::One,
        },
        "r1psi_invr1+" => Figure {
            kind: Kind::Psi,
            n: 1,
            sign: Sign::Plus,
            tchoice: vec![UseInvR],
            scale: FigureScale::R1,
        },
        "psi_r1-" => Figure {
            kind: Kind::Psi,
            n: 1,
            sign: Sign::Minus,
            tchoice: vec![UseR],
            scale: FigureScale::One,
        },
        "r1psi_invr1-" => Figure {
            kind: Kind::Psi,
            n: 1,
            sign: Sign::Minus,
            tchoice: vec![UseInvR],
            scale: FigureScale::R1,
        },
        "phi2+" => Figure {
            kind: Kind::Phi,
            n: 2,
            sign: Sign::Plus,
            tchoice: vec![UseR, UseR],
            scale: FigureScale::One,
        },
        "phi2-" => Figure {
            kind: Kind::Phi,
            n: 2,
            sign: Sign::Minus,
            tchoice: vec![UseR, UseR],
            scale: FigureScale::One,
        },
        "psi_r1r2+" => Figure {
            kind: Kind::Psi,
            n: 2,
            sign: Sign::Plus,
            tchoice: vec![UseR, UseR],
            scale: FigureScale::One,
        },
        other => {
            return Err(CliError::Validation(format!(
                "unknown figure {other:?}; see --help for the known ids"
            )))
        }
    };
    Ok(fig)
}

/// Smallest key window holding 99.99% of the absolute weight mass.
fn mass_window(series: &TranslateSeries) -> (f64, f64) {
    let total = series.l1_mass();
    let budget = 5e-5 * total;
    let keys: Vec<(f64, f64)> = series
        .terms()
        .iter()
        .map(|(k, &w)| (k.value(), w.abs()))
        .collect();
    let mut lo_idx = 0;
    let mut acc = 0.0;
    while lo_idx + 1 < keys.len() && acc + keys[lo_idx].1 <= budget {
        acc += keys[lo_idx].1;
        lo_idx += 1;
    }
    let mut hi_idx = keys.len() - 1;
    acc = 0.0;
    while hi_idx > lo_idx && acc + keys[hi_idx].1 <= budget {
        acc += keys[hi_idx].1;
        hi_idx -= 1;
    }
    let scale = (-(series.log2_dilation() as f64)).exp2();
    (
        keys[lo_idx].0 * scale,
        (keys[hi_idx].0 + series.base() as f64 + 1.0) * scale,
    )
}

fn cmd_plot_data(a: PlotDataArgs) -> CliResult<()> {
    let fig = figure_spec(&a.figure)?;
    let spec = WaveletSpec::new(fig.n, fig.sign, fig.tchoice)?;
    let mut series = build_series(fig.kind, &spec, 1e-10)?;
    if let FigureScale::R1 = fig.scale {
        let data = EulerFrobeniusData::compute(fig.n)?;
        series = series.scaled(data.rs[0]);
    }
    let (lo, hi) = mass_window(&series);
    let (poly, _) = series.materialize(None);
    emit(a.out.as_deref(), &sample_csv(&poly, lo, hi))
}
