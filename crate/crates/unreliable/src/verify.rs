//! The invariant suite behind `unreliable verify`.
//!
//! Each check runs over seeded random parameter grids and reports the worst
//! deviation it saw. The product-form balance of the rerouting network is
//! left out; see the README.

use serde::Serialize;
use unreliable_core::asymptotics;
use unreliable_core::grid::{parameter_grid, GridKind};
use unreliable_core::kernels::{free_kernel, full_kernel};
use unreliable_core::qbd::{self, Model1Solution};
use unreliable_core::simulate;
use unreliable_core::twist::{self, MarkovPartLaw};
use unreliable_core::{default_uniformization, spectral, Model, ModelParams, ServerStatus, State};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub grid: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { grid: 200, seed: 7 }
    }
}

type Check = fn(&VerifyOptions) -> Result<(bool, String), unreliable_core::Error>;

const CHECKS: &[(&str, Check)] = &[
    ("kernel rows are distributions", kernel_rows),
    ("uniformization is monotone", uniformization_monotone),
    ("harmonic function", harmonicity),
    ("twisted rows sum to one", twisted_rows),
    ("twisted phase law is stationary", phase_law),
    ("horizontal drift positive and consistent", drift),
    ("rate matrix closed form matches iteration", rate_matrix),
    ("Neuts criterion matches stability", neuts),
    ("decay rate below one iff stable", decay_rate),
    ("tandem summability gate", summability),
    ("decay rate dominates the M/M/1 ratio", mm1_dominance),
    ("Up/Down tail ratio", ratio_law),
    ("exact and truncated tables agree", truncation),
    ("seeded simulation is reproducible", determinism),
];

pub fn run(options: &VerifyOptions) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, check)| match check(options) {
            Ok((pass, detail)) => CheckResult { name, pass, detail },
            Err(e) => CheckResult {
                name,
                pass: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}

fn stable(opts: &VerifyOptions, model: Model, salt: u64) -> Vec<ModelParams> {
    parameter_grid(opts.grid, opts.seed.wrapping_add(salt), model, GridKind::Stable, None)
}

fn mixed(opts: &VerifyOptions, model: Model, salt: u64) -> Vec<ModelParams> {
    parameter_grid(opts.grid, opts.seed.wrapping_add(salt), model, GridKind::Mixed, None)
}

fn kernel_rows(opts: &VerifyOptions) -> Result<(bool, String), unreliable_core::Error> {
    let mut worst = 0.0_f64;
    let mut negative = 0;
    for model in [Model::Model1, Model::Model2, Model::RsRd] {
        for p in mixed(opts, model, 1) {
            let ys = if model == Model::Model1 { 0..=0 } else { 0..=3 };
            for x in 0..=3 {
                for y in ys.clone() {
                    for s in ServerStatus::ALL {
                        let row = full_kernel(&p, State::new(model, x, y, s))?;
                        worst = worst.max((row.total() - 1.0).abs());
                        negative += row.iter().filter(|(_, v)| *v < 0.0).count();
                    }
                }
            }
        }
    }
    Ok((worst <= 1e-12 && negative == 0, format!("max |row sum - 1| {worst:.2e}, {negative} negative entries")))
}

fn uniformization_monotone(opts: &VerifyOptions) -> Result<(bool, String), unreliable_core::Error> {
    let mut violations = 0;
    for model in [Model::Model1, Model::Model2] {
        for p in mixed(opts, model, 2) {
            let base = default_uniformization(p.lambda, p.mu, p.alpha, p.beta, model)?;
            let bumped = [
                default_uniformization(p.lambda * 1.1, p.mu, p.alpha, p.beta, model)?,
                default_uniformization(p.lambda, p.mu * 1.1, p.alpha, p.beta, model)?,
                default_uniformization(p.lambda, p.mu, p.alpha * 1.1, p.beta, model)?,
                default_uniformization(p.lambda, p.mu, p.alpha, p.beta * 1.1, model)?,
            ];
            violations += bumped.iter().filter(|&&c| c <= base).count();
        }
    }
    Ok((violations == 0, format!("{violations} violations")))
}

fn harmonicity(opts: &VerifyOptions) -> Result<(bool, String), unreliable_core::Error> {
    let mut worst = 0.0_f64;
    for (model, fixed_p) in [(Model::Model1, None), (Model::Model2, Some(0.5)), (Model::Model2, Some(1.0))] {
        for p in parameter_grid(opts.grid, opts.seed.wrapping_add(3), model, GridKind::Stable, fixed_p) {
            let h = twist::harmonic(&p, model)?;
            let ys = if model == Model::Model1 { 0..=0 } else { 0..=20 };
            for x in -20..=20 {
                for y in ys.clone() {
                    for s in ServerStatus::ALL {
                        let from = State::new(model, x, y, s);
                        let kh: f64 = free_kernel(&p, from)?.iter().map(|(to, v)| v * h.ratio(&from, to)).sum();
                        worst = worst.max((kh - 1.0).abs());
                    }
                }
            }
        }
    }
    Ok((worst <= 1e-10, format!("max relative residual {worst:.2e}")))
}

fn twisted_rows(opts: &VerifyOptions) -> Result<(bool, String), unreliable_core::Error> {
    let mut worst = 0.0_f64;
    for p in stable(opts, Model::Model1, 4) {
        for x in -3..=3 {
            for s in ServerStatus::ALL {
                worst = worst.max((twist::twisted_kernel(&p, State::model1(x, s))?.total() - 1.0).abs());
            }
        }
    }
    Ok((worst <= 1e-12, format!("max |row sum - 1| {worst:.2e}")))
}

fn phase_law(opts: &VerifyOptions) -> Result<(bool, String), unreliable_core::Error> {
    let mut worst = 0.0_f64;
    for p in stable(opts, Model::Model1, 5) {
        let MarkovPartLaw::TwoState { up, down } = twist::markov_part_stationary(&p, Model::Model1)? else {
            return Err(unreliable_core::Error::Unsupported("expected a two-state law"));
        };
        let moved = twist::model1_phase_kernel(&p)?.left_mul([up, down]);
        worst = worst.max((moved[0] - up).abs()).max((moved[1] - down).abs());
    }
    for p in parameter_grid(opts.grid.min(50), opts.seed.wrapping_add(5), Model::Model2, GridKind::Stable, Some(1.0)) {
        let rates = twist::model2_twist_rates(&p)?;
        let phi = twist::markov_part_stationary(&p, Model::Model2)?;
        for y in 1..=10 {
            for s in ServerStatus::ALL {
                let mut inflow = 0.0;
                for from_y in (y - 1)..=(y + 1) {
                    for from_s in ServerStatus::ALL {
                        for (to_y, to_s, v) in twist::model2_phase_row(&rates, from_y, from_s) {
                            if to_y == y && to_s == s {
                                inflow += phi.prob(from_y, from_s) * v;
                            }
                        }
                    }
                }
                let target = phi.prob(y, s);
                worst = worst.max((inflow - target).abs() / target);
            }
        }
    }
    Ok((worst <= 1e-10, format!("max |phi K - phi| {worst:.2e}")))
}

fn drift(opts: &VerifyOptions) -> Result<(bool, String), unreliable_core::Error> {
    let mut smallest = f64::INFINITY;
    let mut count = 0;
    for p in stable(opts, Model::Model1, 6) {
        smallest = smallest.min(twist::horizontal_drift(&p, Model::Model1)?.closed_form * p.c);
        count += 1;
    }
    for p in parameter_grid(opts.grid.min(50), opts.seed.wrapping_add(6), Model::Model2, GridKind::Stable, Some(1.0)) {
        smallest = smallest.min(twist::horizontal_drift(&p, Model::Model2)?.closed_form * p.c);
        count += 1;
    }
    Ok((smallest > 0.0, format!("{count} parameter sets, smallest C d~ {smallest:.3e}")))
}

fn rate_matrix(opts: &VerifyOptions) -> Result<(bool, String), unreliable_core::Error> {
    let mut worst_r = 0.0_f64;
    let mut worst_eig = 0.0_f64;
    for p in stable(opts, Model::Model1, 7) {
        let closed = qbd::rate_matrix_closed_form(&p)?;
        let iterated = qbd::rate_matrix_iterate(&qbd::qbd_blocks(&p), 1e-15)?;
        worst_r = worst_r.max(closed.max_abs_diff(&iterated.r));
        let roots = spectral::characteristic_roots(&p);
        let (large, small) = qbd::rate_matrix_spectrum(&closed)?;
        worst_eig = worst_eig.max((large - roots.gamma_p).abs()).max((small - roots.gamma_secondary).abs());
    }
    Ok((
        worst_r <= 1e-12 && worst_eig <= 1e-10,
        format!("max entry gap {worst_r:.2e}, max eigenvalue gap {worst_eig:.2e}"),
    ))
}

fn neuts(opts: &VerifyOptions) -> Result<(bool, String), unreliable_core::Error> {
    let grid = mixed(opts, Model::Model1, 8);
    let mismatches = grid
        .iter()
        .filter(|p| qbd::neuts_stability(&qbd::qbd_blocks(p)) != spectral::stability(p, Model::Model1).stable)
        .count();
    Ok((mismatches == 0, format!("{mismatches} mismatches over {} points", grid.len())))
}

fn decay_rate(opts: &VerifyOptions) -> Result<(bool, String), unreliable_core::Error> {
    let mut mismatches = 0;
    for model in [Model::Model1, Model::Model2] {
        for p in mixed(opts, model, 9) {
            let below = spectral::characteristic_roots(&p).gamma_p < 1.0;
            mismatches += usize::from(below != spectral::stability(&p, model).stable);
        }
    }
    Ok((mismatches == 0, format!("{mismatches} mismatches")))
}

fn summability(opts: &VerifyOptions) -> Result<(bool, String), unreliable_core::Error> {
    let failures = stable(opts, Model::Model2, 10)
        .iter()
        .filter(|p| !(p.lambda / (p.mu * p.p) < spectral::characteristic_roots(p).gamma_p))
        .count();
    Ok((failures == 0, format!("{failures} points with lambda/(mu p) >= gamma_p")))
}

fn mm1_dominance(opts: &VerifyOptions) -> Result<(bool, String), unreliable_core::Error> {
    let mut failures = 0;
    for p in stable(opts, Model::Model1, 11) {
        failures += usize::from(!asymptotics::mm1_comparison(&p)?.dominance);
    }
    Ok((failures == 0, format!("{failures} points with gamma_1 below the M/M/1 ratio")))
}

fn ratio_law(opts: &VerifyOptions) -> Result<(bool, String), unreliable_core::Error> {
    let mut worst = 0.0_f64;
    for p in stable(opts, Model::Model1, 12).iter().take(50) {
        let v = Model1Solution::solve(p)?.level_direction(400);
        let roots = spectral::characteristic_roots(p);
        let q = p.mu + p.alpha - p.lambda - p.beta;
        // (lambda + beta - mu - alpha + sqrt(s_1)) / (2 alpha)
        let predicted = if q > 0.0 {
            2.0 * (p.lambda + p.beta) / (roots.sqrt_s_p + q)
        } else {
            (roots.sqrt_s_p - q) / (2.0 * p.alpha)
        };
        worst = worst.max((v[0] / v[1] / predicted - 1.0).abs());
    }
    Ok((worst <= 1e-6, format!("max relative gap {worst:.2e}")))
}

fn truncation(opts: &VerifyOptions) -> Result<(bool, String), unreliable_core::Error> {
    let mut worst = 0.0_f64;
    for p in parameter_grid(5, opts.seed.wrapping_add(13), Model::Model1, GridKind::Stable, None) {
        let rho = spectral::characteristic_roots(&p).gamma_p;
        // enough levels for the cut face to carry less than 1e-14
        let x_max = ((1e-14_f64.ln() / rho.ln()).ceil() as u32).clamp(50, 4000);
        let exact = qbd::exact_stationary_model1(&p, x_max)?;
        let trunc = qbd::truncated_stationary(&p, Model::Model1, x_max, 0)?;
        worst = worst.max(exact.total_variation(&trunc));
    }
    Ok((worst <= 1e-9, format!("max total variation {worst:.2e}")))
}

fn determinism(opts: &VerifyOptions) -> Result<(bool, String), unreliable_core::Error> {
    let p = ModelParams::with_default_uniformization(10.0, 11.0, 0.1, 10.0, 1.0, Model::Model1)?;
    let start = State::model1(0, ServerStatus::Up);
    let a = simulate::simulate(&p, Model::Model1, 10_000, opts.seed, start)?;
    let b = simulate::simulate(&p, Model::Model1, 10_000, opts.seed, start)?;
    let c = simulate::simulate(&p, Model::Model1, 10_000, opts.seed.wrapping_add(1), start)?;
    Ok((a == b && a != c, format!("repeat identical: {}, new seed differs: {}", a == b, a != c)))
}
