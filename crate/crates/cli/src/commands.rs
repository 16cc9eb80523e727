use std::io::Write;
use std::path::{Path, PathBuf};

use pp_borrow::binomial::alpha_posterior_binomial;
use pp_borrow::ingest::{arm_summary, log_risk_ratio_summary, presets, risk_ratio_ci};
use pp_borrow::linear::{alpha_posterior_linear, ols_estimate, relative_precision_c};
use pp_borrow::normal::{
    alpha_limit_beta, alpha_posterior, best_case_theta_posterior, beta_grid, complete_pooling_posterior,
    default_theta_grid, equal_estimates_grid, precise_current_grid, theta_marginal_posterior,
};
use pp_borrow::quadrature::{grid_summaries, summarize_curve};
use pp_borrow::{
    AlphaPosteriorGrid, Arm, BetaParams, BinomialSummary, DensitySummary, GridSpec, LinearData, Matrix, NormalSummary,
    RelativeVariance, ThetaCurve, TwoArmCounts,
};

use crate::config::{parse_list, Settings};
use crate::output::{fmt_num, Table};
use crate::CliError;

const LEVEL: f64 = 0.95;
const THETA_POINTS: usize = 801;
const THETA_WIDTH: f64 = 8.0;

pub const FIT_KEYS: &[&str] = &[
    "model",
    "theta-hat",
    "sigma",
    "theta0-hat",
    "sigma0",
    "x",
    "n",
    "x0",
    "n0",
    "data",
    "data0",
    "prior",
    "grid-points",
    "tol",
    "output",
];

fn spec(points: usize) -> Result<GridSpec, CliError> {
    if points < 16 {
        return Err(CliError::Invalid(format!(
            "--grid-points must be at least 16, got {points}"
        )));
    }
    Ok(GridSpec::with_points(points))
}

fn alpha_table(grid: &AlphaPosteriorGrid) -> Table {
    let mut t = Table::new("alpha", grid.alphas().to_vec());
    t.push("density", grid.density());
    t
}

fn theta_table(curve: &ThetaCurve) -> Table {
    let mut t = Table::new("theta", curve.thetas.clone());
    t.push("density", curve.density.clone());
    t
}

fn summary_line(name: &str, s: &DensitySummary) -> String {
    format!(
        "{name}: mean={} sd={} mode={} median={} {}% ETI=({}, {})",
        fmt_num(s.mean),
        fmt_num(s.sd),
        fmt_num(s.mode),
        fmt_num(s.median),
        fmt_num(100.0 * s.level),
        fmt_num(s.lower),
        fmt_num(s.upper)
    )
}

fn normal_summary(s: &Settings, theta: &str, sigma: &str) -> Result<NormalSummary, CliError> {
    let t = s.f64(theta)?;
    let sd = s.positive(sigma)?;
    Ok(NormalSummary::new(t, sd)?)
}

fn binomial_summary(s: &Settings, x: &str, n: &str) -> Result<BinomialSummary, CliError> {
    Ok(BinomialSummary::new(s.count(x)?, s.count(n)?)?)
}

/// Reads a design CSV with a header; the `y` column is the response and all
/// other columns are regressors in file order.
pub fn read_design(path: &Path, sigma: f64) -> Result<LinearData, CliError> {
    let bad = |msg: String| CliError::Invalid(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let y_col = headers
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| bad("missing a 'y' column".into()))?;
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let mut row = Vec::with_capacity(rec.len().saturating_sub(1));
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| bad(format!("row {}: '{field}' is not a number", i + 1)))?;
            if !v.is_finite() {
                return Err(bad(format!("row {}: non-finite value", i + 1)));
            }
            if j == y_col {
                y.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    let x = Matrix::from_rows(&rows).map_err(|e| bad(e.to_string()))?;
    LinearData::new(x, y, sigma).map_err(|e| bad(e.to_string()))
}

pub fn fit(s: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let model = s.require("model")?.to_string();
    let prior = s.prior()?;
    let spec = spec(s.grid_points()?)?;
    let tol = s.tol()?;
    let mut lines = vec![
        format!("model: {model}"),
        format!("prior: Be({}, {})", fmt_num(prior.p), fmt_num(prior.q)),
    ];

    let grid = match model.as_str() {
        "normal" => {
            let cur = normal_summary(s, "theta-hat", "sigma")?;
            let hist = normal_summary(s, "theta0-hat", "sigma0")?;
            let grid = alpha_posterior(&cur, &hist, prior, &spec, tol)?;
            lines.push(format!(
                "c: {}",
                fmt_num(RelativeVariance::from_summaries(&cur, &hist).value())
            ));
            lines.push(summary_line("alpha", &grid_summaries(&grid, LEVEL)?));
            let thetas = default_theta_grid(&cur, &hist, THETA_POINTS, THETA_WIDTH);
            let curve = theta_marginal_posterior(&thetas, &cur, &hist, prior, tol)?;
            lines.push(summary_line(
                "theta",
                &summarize_curve(&curve.thetas, &curve.density, LEVEL)?,
            ));
            grid
        }
        "binomial" => {
            let cur = binomial_summary(s, "x", "n")?;
            let hist = binomial_summary(s, "x0", "n0")?;
            let grid = alpha_posterior_binomial(&cur, &hist, prior, &spec, tol)?;
            lines.push(format!("c: {}", fmt_num(cur.n as f64 / hist.n as f64)));
            lines.push(summary_line("alpha", &grid_summaries(&grid, LEVEL)?));
            grid
        }
        "linear" => {
            let sigma = s.positive("sigma")?;
            let cur = ols_estimate(&read_design(Path::new(s.require("data")?), sigma)?)?;
            let hist = ols_estimate(&read_design(Path::new(s.require("data0")?), sigma)?)?;
            let grid = alpha_posterior_linear(&cur, &hist, sigma, prior, &spec, tol)?;
            lines.push(format!("c: {}", fmt_num(relative_precision_c(&cur, &hist)?.value())));
            lines.push(summary_line("alpha", &grid_summaries(&grid, LEVEL)?));
            grid
        }
        other => {
            return Err(CliError::Invalid(format!(
                "unknown model '{other}' (expected normal, binomial or linear)"
            )))
        }
    };

    let table = alpha_table(&grid);
    let summary = lines.join("\n") + "\n";
    match s.get("output") {
        Some(path) => {
            table.write_path(Path::new(path))?;
            out.write_all(summary.as_bytes())?;
        }
        None => {
            table.write_to(&mut *out)?;
            eprint!("{summary}");
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub enum LimitKind {
    EqualEstimates,
    PreciseCurrent,
}

pub fn limit(
    kind: LimitKind,
    values: &str,
    prior: BetaParams,
    points: usize,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (key, label) = match kind {
        LimitKind::EqualEstimates => ("c", "c"),
        LimitKind::PreciseCurrent => ("d", "d"),
    };
    let params = parse_list(key, values)?;
    let spec = spec(points)?;
    let mut grids = Vec::with_capacity(params.len());
    for &v in &params {
        let grid = match kind {
            LimitKind::EqualEstimates => {
                let c = RelativeVariance::new(v).map_err(|e| CliError::Invalid(format!("--c: {e}")))?;
                equal_estimates_grid(c, prior, &spec)?
            }
            LimitKind::PreciseCurrent => precise_current_grid(v, prior, &spec)?,
        };
        grids.push(grid);
    }
    let mut table = Table::new("alpha", grids[0].alphas().to_vec());
    for (v, g) in params.iter().zip(&grids) {
        let name = if grids.len() == 1 {
            "density".to_string()
        } else {
            format!("density_{label}={}", fmt_num(*v))
        };
        table.push(name, g.density());
    }
    match output {
        Some(path) => table.write_path(path),
        None => table.write_to(out),
    }
}

fn write_curve(outdir: &Path, name: &str, table: &Table, out: &mut dyn Write) -> Result<(), CliError> {
    let path: PathBuf = outdir.join(format!("{name}.csv"));
    table.write_path(&path)?;
    writeln!(out, "{}", path.display())?;
    Ok(())
}

pub fn figures(which: u8, outdir: &Path, prior: BetaParams, tol: f64, out: &mut dyn Write) -> Result<(), CliError> {
    if !(1..=3).contains(&which) {
        return Err(CliError::Invalid(format!(
            "unknown figure {which} (expected 1, 2 or 3)"
        )));
    }
    std::fs::create_dir_all(outdir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", outdir.display())))?;
    let spec = GridSpec::default();
    match which {
        1 => {
            let (t, sd) = presets::CURRENT_LOG_RR;
            let (t0, sd0) = presets::HISTORICAL_LOG_RR;
            let cur = NormalSummary::new(t, sd)?;
            let hist = NormalSummary::new(t0, sd0)?;
            let observed = alpha_posterior(&cur, &hist, prior, &spec, tol)?;
            write_curve(outdir, "fig1_alpha_observed", &alpha_table(&observed), out)?;
            let limit = beta_grid(alpha_limit_beta(prior), &spec)?;
            write_curve(outdir, "fig1_alpha_limit", &alpha_table(&limit), out)?;

            let thetas = default_theta_grid(&cur, &hist, THETA_POINTS, THETA_WIDTH);
            let marginal = theta_marginal_posterior(&thetas, &cur, &hist, prior, tol)?;
            write_curve(outdir, "fig1_theta_observed", &theta_table(&marginal), out)?;
            let best = best_case_theta_posterior(&thetas, &cur, &hist, prior, tol)?;
            write_curve(outdir, "fig1_theta_best_case", &theta_table(&best), out)?;
            let pooled = complete_pooling_posterior(&cur, &hist);
            let curve = ThetaCurve {
                density: thetas.iter().map(|&x| pooled.log_pdf(x).exp()).collect(),
                thetas,
            };
            write_curve(outdir, "fig1_theta_pooled", &theta_table(&curve), out)?;
        }
        2 => {
            for d in 0..=3 {
                let grid = precise_current_grid(d as f64, prior, &spec)?;
                write_curve(outdir, &format!("fig2_d{d}"), &alpha_table(&grid), out)?;
            }
        }
        _ => {
            let cur = arm_summary(&presets::CORNELY, Arm::A);
            let hist = arm_summary(&presets::LOUIE, Arm::A);
            let observed = alpha_posterior_binomial(&cur, &hist, prior, &spec, tol)?;
            write_curve(outdir, "fig3_observed", &alpha_table(&observed), out)?;
            for c in [1u64, 10, 100] {
                let mirrored = BinomialSummary::new(c * hist.x, c * hist.n)?;
                let grid = alpha_posterior_binomial(&mirrored, &hist, prior, &spec, tol)?;
                write_curve(outdir, &format!("fig3_c{c}"), &alpha_table(&grid), out)?;
            }
            let limit = beta_grid(alpha_limit_beta(prior), &spec)?;
            write_curve(outdir, "fig3_limit", &alpha_table(&limit), out)?;
        }
    }
    Ok(())
}

/// One study in `study,events_a,n_a,events_b,n_b` form.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub study: String,
    pub counts: TwoArmCounts,
}

pub fn parse_row(fields: &[&str]) -> Result<StudyRow, CliError> {
    if fields.len() != 5 {
        return Err(CliError::Invalid(format!(
            "expected study,events_a,n_a,events_b,n_b but got {} fields",
            fields.len()
        )));
    }
    let num = |i: usize| -> Result<u64, CliError> {
        fields[i]
            .trim()
            .parse()
            .map_err(|_| CliError::Invalid(format!("'{}' is not a non-negative integer", fields[i].trim())))
    };
    let counts = TwoArmCounts::new(num(1)?, num(2)?, num(3)?, num(4)?)?;
    Ok(StudyRow {
        study: fields[0].trim().to_string(),
        counts,
    })
}

pub fn read_rows(path: &Path) -> Result<Vec<StudyRow>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        if i == 0 && rec.get(0).is_some_and(|f| f.eq_ignore_ascii_case("study")) {
            continue;
        }
        rows.push(parse_row(&rec.iter().collect::<Vec<_>>())?);
    }
    if rows.is_empty() {
        return Err(CliError::Invalid(format!("{}: no study rows", path.display())));
    }
    Ok(rows)
}

pub fn preset_row(name: &str) -> Result<StudyRow, CliError> {
    let counts = presets::by_name(name)
        .ok_or_else(|| CliError::Invalid(format!("unknown preset '{name}' (expected cornely or louie)")))?;
    Ok(StudyRow {
        study: name.to_string(),
        counts,
    })
}

pub fn ingest(rows: &[StudyRow], level: f64, out: &mut dyn Write) -> Result<(), CliError> {
    for row in rows {
        let summary = log_risk_ratio_summary(&row.counts)?;
        let ci = risk_ratio_ci(&summary, level)?;
        let label = if row.study.is_empty() {
            String::new()
        } else {
            format!("{}: ", row.study)
        };
        writeln!(
            out,
            "{label}logRR={:.4} se={:.4} RR={:.2} ({:.2}, {:.2})",
            summary.theta_hat, summary.sigma, ci.rr, ci.lower, ci.upper
        )?;
        for arm in [Arm::A, Arm::B] {
            let b = arm_summary(&row.counts, arm);
            writeln!(out, "  arm {arm:?}: x={} n={} rate={:.4}", b.x, b.n, b.rate())?;
        }
    }
    Ok(())
}
