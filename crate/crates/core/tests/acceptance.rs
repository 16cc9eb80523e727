//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;

use pp_borrow::binomial::alpha_posterior_binomial;
use pp_borrow::ingest::{log_risk_ratio_summary, presets, risk_ratio_ci};
use pp_borrow::linear::{alpha_posterior_linear, ols_estimate, relative_precision_c, Cholesky};
use pp_borrow::normal::{
    alpha_limit_beta, alpha_posterior, beta_grid, default_theta_grid, equal_estimates_grid, precise_current_grid,
    theta_conditional_posterior, theta_marginal_posterior, EqualEstimatesPosterior, PreciseCurrentPosterior,
};
use pp_borrow::quadrature::log_integrate_01_split;
use pp_borrow::specfun::{beta_binomial_log_pmf, log_beta, normal_log_pdf, std_normal_quantile};
use pp_borrow::{
    AlphaPosteriorGrid, BetaParams, BinomialSummary, GridSpec, LinearData, LinearSummary, Matrix, NormalSummary,
    RelativeVariance, DEFAULT_TOL,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn beta(p: f64, q: f64) -> BetaParams {
    BetaParams::new(p, q).unwrap()
}

fn normal(t: f64, s: f64) -> NormalSummary {
    NormalSummary::new(t, s).unwrap()
}

fn binomial(x: u64, n: u64) -> BinomialSummary {
    BinomialSummary::new(x, n).unwrap()
}

fn max_rel_diff(a: &AlphaPosteriorGrid, b: &AlphaPosteriorGrid) -> f64 {
    a.density()
        .iter()
        .zip(b.density())
        .map(|(x, y)| ((x - y) / y).abs())
        .fold(0.0, f64::max)
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (x * s).round() / s
}

fn trial_summaries() -> Outcome {
    let rows = [
        ("Cornely", presets::CORNELY, (0.15, 0.06), (1.16, 1.04, 1.31)),
        ("Louie", presets::LOUIE, (0.16, 0.06), (1.17, 1.04, 1.31)),
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, counts, (t, s), (rr, lo, hi)) in rows {
        let summary = log_risk_ratio_summary(&counts).map_err(|e| e.to_string())?;
        let ci = risk_ratio_ci(&summary, 0.95).map_err(|e| e.to_string())?;
        let got = (
            round_to(summary.theta_hat, 2),
            round_to(summary.sigma, 2),
            round_to(ci.rr, 2),
            round_to(ci.lower, 2),
            round_to(ci.upper, 2),
        );
        let want = (t, s, rr, lo, hi);
        let matches = got == want;
        ok &= matches;
        notes.push(format!(
            "{name} ({:.4}, {:.4}) RR={:.2} ({:.2}, {:.2}){}",
            summary.theta_hat,
            summary.sigma,
            ci.rr,
            ci.lower,
            ci.upper,
            if matches {
                String::new()
            } else {
                format!(" expected {rr:.2} ({lo:.2}, {hi:.2})")
            }
        ));
    }
    let msg = notes.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn closed_form_equivalence() -> Outcome {
    let spec = GridSpec::default();
    let values = [0.5, 1.0, 2.0];
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &p in &values {
        for &q in &values {
            for &c in &[0.1f64, 1.0, 10.0] {
                let prior = beta(p, q);
                let cur = normal(0.2, 1.0);
                let hist = normal(0.2, c.sqrt());
                let quad = alpha_posterior(&cur, &hist, prior, &spec, DEFAULT_TOL).map_err(|e| e.to_string())?;
                let rv = RelativeVariance::from_summaries(&cur, &hist);
                let closed = equal_estimates_grid(rv, prior, &spec).map_err(|e| e.to_string())?;
                worst = worst.max(max_rel_diff(&quad, &closed));
                cases += 1;
            }
        }
    }
    let msg = format!("{cases} cases (p, q in {{0.5, 1, 2}}, c in {{0.1, 1, 10}}), max relative error {worst:.2e}");
    if worst <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn limit_law() -> Outcome {
    let spec = GridSpec::default();
    let cs = [1.0, 10.0, 100.0, 1e4, 1e6];
    let mut notes = Vec::new();
    let mut ok = true;
    for prior in [beta(1.0, 1.0), beta(0.5, 1.0), beta(2.0, 2.0)] {
        let limit = beta_grid(alpha_limit_beta(prior), &spec).map_err(|e| e.to_string())?;
        let dists = cs
            .iter()
            .map(|&c| {
                let g = equal_estimates_grid(RelativeVariance::new(c).unwrap(), prior, &spec)?;
                g.sup_distance(&limit)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let monotone = dists.windows(2).all(|w| w[1] < w[0]);
        let last = dists[dists.len() - 1];
        ok &= monotone && last <= 1e-3;
        notes.push(format!(
            "Be({}, {}): sup at c=1e6 {last:.2e}{}",
            prior.p,
            prior.q,
            if monotone { "" } else { " (not monotone)" }
        ));
    }
    let msg = notes.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn conflict_mode() -> Outcome {
    let grid = precise_current_grid(3.0, beta(1.0, 1.0), &GridSpec::default()).map_err(|e| e.to_string())?;
    let dens = grid.density();
    let a = grid.alphas();
    let i = (0..dens.len()).max_by(|&i, &j| dens[i].total_cmp(&dens[j])).unwrap();
    let step = (a[i] - a[i.saturating_sub(1)]).max(a[(i + 1).min(a.len() - 1)] - a[i]);
    let msg = format!("grid mode {:.6}, target {:.6}, step {step:.2e}", a[i], 1.0 / 9.0);
    if (a[i] - 1.0 / 9.0).abs() <= step {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn scale_invariance() -> Outcome {
    let spec = GridSpec::default();
    let mut worst = 0.0f64;
    for (s, s0, prior) in [
        (0.06, 0.06, beta(1.0, 1.0)),
        (0.3, 0.1, beta(0.5, 2.0)),
        (1.0, 2.5, beta(2.0, 0.5)),
    ] {
        let base = alpha_posterior(&normal(0.15, s), &normal(0.15, s0), prior, &spec, DEFAULT_TOL)
            .map_err(|e| e.to_string())?;
        let scaled = alpha_posterior(
            &normal(0.15, 100.0 * s),
            &normal(0.15, 100.0 * s0),
            prior,
            &spec,
            DEFAULT_TOL,
        )
        .map_err(|e| e.to_string())?;
        for (x, y) in base.density().iter().zip(scaled.density()) {
            worst = worst.max((x - y).abs() / x.abs().max(1.0));
        }
    }
    let msg = format!("max difference {worst:.2e} over 3 configurations");
    if worst <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn stirling_accuracy() -> Outcome {
    let spec = GridSpec::default();
    let hist = binomial(214, 302);
    let prior = beta(1.0, 1.0);
    let mut notes = Vec::new();
    let mut ok = true;
    for c in [0.5, 1.0, 2.0] {
        let cur = binomial((c * 214.0f64).round() as u64, (c * 302.0f64).round() as u64);
        let exact = alpha_posterior_binomial(&cur, &hist, prior, &spec, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let rv = RelativeVariance::new(cur.n as f64 / hist.n as f64).unwrap();
        let approx = equal_estimates_grid(rv, prior, &spec).map_err(|e| e.to_string())?;
        let sup = exact.sup_distance(&approx).map_err(|e| e.to_string())?;
        let (i, _) = exact
            .density()
            .iter()
            .zip(approx.density())
            .enumerate()
            .map(|(i, (x, y))| (i, (x - y).abs()))
            .fold((0, 0.0), |m, v| if v.1 > m.1 { v } else { m });
        ok &= sup <= 0.02;
        notes.push(format!("c={c}: sup {sup:.4} at alpha {:.2e}", exact.alphas()[i]));
    }
    let msg = notes.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn case_study_proximity() -> Outcome {
    // Brute-force midpoint oracle over 2e6 points.
    const ORACLE_TV: f64 = 0.004509;
    let spec = GridSpec::default();
    let hist = binomial(214, 302);
    let prior = beta(1.0, 1.0);
    let obs =
        alpha_posterior_binomial(&binomial(193, 270), &hist, prior, &spec, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let best = alpha_posterior_binomial(&hist, &hist, prior, &spec, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let tv = obs.total_variation(&best).map_err(|e| e.to_string())?;
    let msg = format!("TV {tv:.6} (oracle {ORACLE_TV}, threshold 0.05)");
    if tv <= 0.05 && (tv - ORACLE_TV).abs() <= 2e-4 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn linear_reduction() -> Outcome {
    let spec = GridSpec::default();
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let mut worst_scalar = 0.0f64;
    let mut worst_closed = 0.0f64;
    for &(n, n0, sigma, prior) in &[
        (40usize, 25usize, 0.5, beta(1.0, 1.0)),
        (10, 60, 2.0, beta(0.5, 2.0)),
        (100, 100, 1.0, beta(2.0, 0.5)),
    ] {
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y0: Vec<f64> = (0..n0).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let design = |rows: usize| Matrix::new(rows, 1, vec![1.0; rows]).unwrap();
        let cur = ols_estimate(&LinearData::new(design(n), y.clone(), sigma).unwrap()).map_err(|e| e.to_string())?;
        let hist = ols_estimate(&LinearData::new(design(n0), y0.clone(), sigma).unwrap()).map_err(|e| e.to_string())?;
        let lin = alpha_posterior_linear(&cur, &hist, sigma, prior, &spec, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let scalar = alpha_posterior(
            &normal(mean(&y), sigma / (n as f64).sqrt()),
            &normal(mean(&y0), sigma / (n0 as f64).sqrt()),
            prior,
            &spec,
            DEFAULT_TOL,
        )
        .map_err(|e| e.to_string())?;
        worst_scalar = worst_scalar.max(max_rel_diff(&lin, &scalar));

        let same = LinearSummary::new(hist.theta_hat.clone(), cur.xtx.clone()).unwrap();
        let lin_eq =
            alpha_posterior_linear(&same, &hist, sigma, prior, &spec, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let c = relative_precision_c(&same, &hist).map_err(|e| e.to_string())?;
        let closed = equal_estimates_grid(c, prior, &spec).map_err(|e| e.to_string())?;
        worst_closed = worst_closed.max(max_rel_diff(&lin_eq, &closed));
    }
    let msg = format!("vs scalar model {worst_scalar:.2e}; vs determinant-ratio closed form {worst_closed:.2e}");
    if worst_scalar <= 1e-8 && worst_closed <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Beta log density written out independently of the library's helpers.
fn beta_kernel(a: f64, s: f64, prior: BetaParams) -> f64 {
    (prior.p - 1.0) * a.ln() + (prior.q - 1.0) * s.ln() - log_beta(prior.p, prior.q).unwrap()
}

fn universal_normalization() -> Outcome {
    const CHECK_TOL: f64 = 1e-12;
    let spec = GridSpec::default();
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let prior = |rng: &mut ChaCha20Rng| beta(rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0));
    // (label, log of the integral of the normalized density)
    let mut results: Vec<(String, f64)> = Vec::new();

    for i in 0..12 {
        let pr = prior(&mut rng);
        let cur = normal(rng.gen_range(-1.0..1.0), rng.gen_range(0.05..1.0));
        let hist = normal(rng.gen_range(-1.0..1.0), rng.gen_range(0.05..1.0));
        let grid = alpha_posterior(&cur, &hist, pr, &spec, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let log_z = grid.log_normalizer();
        let log_i = log_integrate_01_split(
            |a, s| {
                normal_log_pdf(
                    cur.theta_hat,
                    hist.theta_hat,
                    cur.sigma.powi(2) + hist.sigma.powi(2) / a,
                ) + beta_kernel(a, s, pr)
                    - log_z
            },
            CHECK_TOL,
        )
        .map_err(|e| e.to_string())?;
        results.push((format!("normal #{i}"), log_i));
    }

    for i in 0..12 {
        let pr = prior(&mut rng);
        let n0 = rng.gen_range(10..500u64);
        let hist = binomial(rng.gen_range(1..n0), n0);
        let n = rng.gen_range(5..500u64);
        let cur = binomial(rng.gen_range(0..=n), n);
        let grid = alpha_posterior_binomial(&cur, &hist, pr, &spec, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let log_z = grid.log_normalizer();
        let (x0, f0) = (hist.x as f64, (hist.n - hist.x) as f64);
        let log_i = log_integrate_01_split(
            |a, s| {
                beta_binomial_log_pmf(cur.x, cur.n, a * x0, a * f0).unwrap_or(f64::NEG_INFINITY) + beta_kernel(a, s, pr)
                    - log_z
            },
            CHECK_TOL,
        )
        .map_err(|e| e.to_string())?;
        results.push((format!("binomial #{i}"), log_i));
    }

    for i in 0..8 {
        let pr = prior(&mut rng);
        let k = 1 + i % 3;
        let sigma = rng.gen_range(0.2..2.0);
        let mut study = |rows: usize| {
            let x = Matrix::new(rows, k, (0..rows * k).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let y = (0..rows).map(|_| rng.gen_range(-2.0..2.0)).collect();
            ols_estimate(&LinearData::new(x, y, sigma).unwrap()).unwrap()
        };
        let cur = study(30);
        let hist = study(20);
        let grid = alpha_posterior_linear(&cur, &hist, sigma, pr, &spec, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let log_z = grid.log_normalizer();
        let a_inv = Cholesky::new(&cur.xtx).unwrap().inverse();
        let b_inv = Cholesky::new(&hist.xtx).unwrap().inverse();
        let diff: Vec<f64> = cur.theta_hat.iter().zip(&hist.theta_hat).map(|(x, y)| x - y).collect();
        let log_i = log_integrate_01_split(
            |a, s| {
                let cov = a_inv.add_scaled(1.0 / a, &b_inv).unwrap().scale(sigma * sigma);
                let Ok(ch) = Cholesky::new(&cov) else {
                    return f64::NEG_INFINITY;
                };
                let q = ch.quad_form(&diff);
                -0.5 * (k as f64 * (2.0 * std::f64::consts::PI).ln() + ch.log_det() + q) + beta_kernel(a, s, pr) - log_z
            },
            CHECK_TOL,
        )
        .map_err(|e| e.to_string())?;
        results.push((format!("linear k={k} #{i}"), log_i));
    }

    for (label, pr, c) in [
        ("equal-estimates", beta(0.5, 2.0), 3.0),
        ("equal-estimates", beta(2.0, 0.7), 0.2),
    ] {
        let post = EqualEstimatesPosterior::new(RelativeVariance::new(c).unwrap(), pr).unwrap();
        let log_i = log_integrate_01_split(|a, _| post.log_density(a).unwrap_or(f64::NEG_INFINITY), CHECK_TOL)
            .map_err(|e| e.to_string())?;
        results.push((format!("{label} c={c}"), log_i));
    }
    for d in [0.5, 3.0] {
        let post = PreciseCurrentPosterior::new(d, beta(1.5, 1.0)).unwrap();
        let log_i = log_integrate_01_split(|a, _| post.log_density(a).unwrap_or(f64::NEG_INFINITY), CHECK_TOL)
            .map_err(|e| e.to_string())?;
        results.push((format!("precise-current d={d}"), log_i));
    }

    let (label, worst) = results
        .iter()
        .map(|(l, v)| (l, v.exp_m1().abs()))
        .fold((&results[0].0, 0.0), |m, v| if v.1 > m.1 { v } else { m });
    let msg = format!(
        "{} configurations, worst |integral - 1| {worst:.2e} ({label})",
        results.len()
    );
    if results.len() >= 30 && worst <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Inverse of a piecewise-linear CDF sampled at `xs`.
fn invert_cdf(xs: &[f64], cdf: &[f64], u: f64) -> f64 {
    let j = cdf.partition_point(|&c| c < u).clamp(1, xs.len() - 1);
    let (c0, c1) = (cdf[j - 1], cdf[j]);
    if c1 <= c0 {
        return xs[j];
    }
    xs[j - 1] + (xs[j] - xs[j - 1]) * (u - c0) / (c1 - c0)
}

fn theta_monte_carlo() -> Outcome {
    const DRAWS: usize = 100_000;
    const BANDWIDTH: f64 = 0.01;
    let (t, s) = presets::CURRENT_LOG_RR;
    let (t0, s0) = presets::HISTORICAL_LOG_RR;
    let (cur, hist) = (normal(t, s), normal(t0, s0));
    let prior = beta(1.0, 1.0);

    let thetas = default_theta_grid(&cur, &hist, 801, 8.0);
    let curve = theta_marginal_posterior(&thetas, &cur, &hist, prior, DEFAULT_TOL).map_err(|e| e.to_string())?;

    // Two-stage Latin hypercube draws: α from the grid posterior, then θ | α.
    let grid =
        alpha_posterior(&cur, &hist, prior, &GridSpec::with_points(4096), DEFAULT_TOL).map_err(|e| e.to_string())?;
    let cdf = grid.cdf();
    let mut rng = ChaCha20Rng::seed_from_u64(20_260_101);
    let strata = |rng: &mut ChaCha20Rng| -> Vec<f64> {
        let mut u: Vec<f64> = (0..DRAWS)
            .map(|i| (i as f64 + rng.gen::<f64>()) / DRAWS as f64)
            .collect();
        u.shuffle(rng);
        u
    };
    let ua = strata(&mut rng);
    let ut = strata(&mut rng);
    let draws: Vec<f64> = ua
        .iter()
        .zip(&ut)
        .map(|(&u, &v)| {
            let a = invert_cdf(grid.alphas(), &cdf, u);
            let post = theta_conditional_posterior(a, &cur, &hist);
            post.theta_hat + post.sigma * std_normal_quantile(v.clamp(1e-300, 1.0 - 1e-16)).unwrap()
        })
        .collect();

    let kernel = |x: f64| (-0.5 * (x / BANDWIDTH).powi(2)).exp() / (BANDWIDTH * (2.0 * std::f64::consts::PI).sqrt());
    let eval: Vec<f64> = thetas.iter().step_by(4).copied().collect();
    let mut sup = 0.0f64;
    for &x in &eval {
        let kde = draws.iter().map(|&d| kernel(x - d)).sum::<f64>() / DRAWS as f64;
        let smoothed: f64 = curve
            .thetas
            .windows(2)
            .zip(curve.density.windows(2))
            .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] * kernel(x - t[0]) + f[1] * kernel(x - t[1])))
            .sum();
        sup = sup.max((kde - smoothed).abs());
    }
    let msg = format!("{DRAWS} draws, bandwidth {BANDWIDTH}, smoothed sup-norm {sup:.4}");
    if sup <= 0.05 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("trial summary reproduction", trial_summaries),
        ("closed-form equivalence", closed_form_equivalence),
        ("limit law", limit_law),
        ("conflict mode", conflict_mode),
        ("scale invariance", scale_invariance),
        ("Stirling accuracy", stirling_accuracy),
        ("case-study proximity", case_study_proximity),
        ("linear-model reduction", linear_reduction),
        ("universal normalization", universal_normalization),
        ("theta-posterior oracle", theta_monte_carlo),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
