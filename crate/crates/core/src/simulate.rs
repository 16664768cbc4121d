//! Seeded simulation of the uniformized chains, occupation estimates and
//! large-deviation excursions.
//!
//! Every run draws from `ChaCha20Rng::seed_from_u64(seed)`. Replication
//! `i` of a batch uses the same seed with stream number `i`, so batches can
//! be split across threads without changing any draw.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::kernels;
use crate::params::{Model, ModelParams, ServerStatus, State};
use crate::qbd::StationaryTable;

/// Recorded in output metadata so runs can be reproduced.
pub const RNG_IDENTITY: &str = "rand_chacha 0.3 ChaCha20Rng, seed_from_u64(seed), stream = replication index";

/// Generator for replication `index` of a batch seeded with `master_seed`.
pub fn replication_rng(master_seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// A simulated path, stored every `thin` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModelParams,
    pub model: Model,
    pub seed: u64,
    pub thin: u64,
    /// `(step, state)` pairs, starting with `(0, start)`.
    pub steps: Vec<(u64, State)>,
    /// Number of transitions simulated.
    pub step_count: u64,
}

impl Trajectory {
    pub fn start(&self) -> State {
        self.steps[0].1
    }
}

fn checked_start(params: &ModelParams, model: Model, start: State) -> Result<(ModelParams, State)> {
    let params = params.validate(model)?;
    let start = State::new(model, start.x, start.y, start.status);
    if !start.is_full_chain_state() {
        return Err(Error::InvalidState {
            model,
            state: start,
            reason: "simulation starts need nonnegative queue lengths",
        });
    }
    Ok((params, start))
}

/// `steps` transitions of the chain of `model` from `start`, keeping every
/// state.
pub fn simulate(params: &ModelParams, model: Model, steps: u64, seed: u64, start: State) -> Result<Trajectory> {
    simulate_thinned(params, model, steps, seed, start, 1)
}

/// As [`simulate`], storing only every `thin`-th state (and the last).
pub fn simulate_thinned(
    params: &ModelParams,
    model: Model,
    steps: u64,
    seed: u64,
    start: State,
    thin: u64,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    if thin == 0 {
        return Err(Error::InvalidParameter("thinning interval must be at least 1".into()));
    }
    let (params, start) = checked_start(params, model, start)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity((steps / thin) as usize + 2);
    out.push((0, start));
    let mut state = start;
    for step in 1..=steps {
        state = kernels::full_kernel(&params, state)?.sample(rng.gen());
        if step % thin == 0 || step == steps {
            out.push((step, state));
        }
    }
    Ok(Trajectory {
        params,
        model,
        seed,
        thin,
        steps: out,
        step_count: steps,
    })
}

/// Occupation counts on a box that grows with the path.
#[derive(Debug, Clone, Default)]
struct Occupation {
    counts: Vec<Vec<[u64; 2]>>,
    total: u64,
}

impl Occupation {
    fn record(&mut self, s: &State) {
        let (x, y) = (s.x as usize, s.y as usize);
        if self.counts.len() <= x {
            self.counts.resize(x + 1, Vec::new());
        }
        let row = &mut self.counts[x];
        if row.len() <= y {
            row.resize(y + 1, [0, 0]);
        }
        row[y][s.status.index()] += 1;
        self.total += 1;
    }

    fn into_table(self, model: Model) -> Result<StationaryTable> {
        if self.total == 0 {
            return Err(Error::EmptyWindow("no steps after burn-in"));
        }
        let x_max = self.counts.len() - 1;
        let y_max = self.counts.iter().map(|r| r.len()).max().unwrap_or(1) - 1;
        let mut probs = vec![0.0; (x_max + 1) * (y_max + 1) * 2];
        let n = self.total as f64;
        for (x, row) in self.counts.iter().enumerate() {
            for (y, c) in row.iter().enumerate() {
                for s in 0..2 {
                    probs[(x * (y_max + 1) + y) * 2 + s] = c[s] as f64 / n;
                }
            }
        }
        Ok(StationaryTable::from_parts(model, x_max as u32, y_max as u32, probs))
    }
}

/// Occupation frequencies of the stored states with `step > burn_in`.
pub fn empirical_distribution(trajectory: &Trajectory, burn_in: u64) -> Result<StationaryTable> {
    if burn_in >= trajectory.step_count {
        return Err(Error::EmptyWindow("burn-in covers the whole trajectory"));
    }
    let mut occ = Occupation::default();
    for (step, s) in &trajectory.steps {
        if *step > burn_in {
            occ.record(s);
        }
    }
    occ.into_table(trajectory.model)
}

/// Result of a long run that keeps only occupation counts.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationRun {
    pub table: StationaryTable,
    pub steps: u64,
    pub burn_in: u64,
    pub max_level: i64,
    /// Set when the mean level keeps climbing across the run, the symptom
    /// of a transient chain.
    pub transient_suspected: bool,
}

/// `steps` transitions from `start`, counting visits after `burn_in`
/// without storing the path. `rng` is advanced in place.
pub fn simulate_occupation_with(
    params: &ModelParams,
    model: Model,
    steps: u64,
    burn_in: u64,
    start: State,
    rng: &mut ChaCha20Rng,
) -> Result<OccupationRun> {
    if burn_in >= steps {
        return Err(Error::EmptyWindow("burn-in covers the whole run"));
    }
    let (params, start) = checked_start(params, model, start)?;
    let mut occ = Occupation::default();
    let mut state = start;
    let mut max_level = start.x;
    let quarter = ((steps - burn_in) / 4).max(1);
    let mut level_sums = [0.0_f64; 4];
    for step in 1..=steps {
        state = kernels::full_kernel(&params, state)?.sample(rng.gen());
        if step > burn_in {
            occ.record(&state);
            max_level = max_level.max(state.x);
            let q = (((step - burn_in - 1) / quarter) as usize).min(3);
            level_sums[q] += state.x as f64;
        }
    }
    let means = level_sums.map(|s| s / quarter as f64);
    let transient_suspected = means[3] > 50.0 && means[3] > 1.5 * means[1] && means[2] > means[1];
    Ok(OccupationRun {
        table: occ.into_table(model)?,
        steps,
        burn_in,
        max_level,
        transient_suspected,
    })
}

pub fn simulate_occupation(
    params: &ModelParams,
    model: Model,
    steps: u64,
    burn_in: u64,
    seed: u64,
    start: State,
) -> Result<OccupationRun> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    simulate_occupation_with(params, model, steps, burn_in, start, &mut rng)
}

/// A climb from `base_level` to the first passage at level `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Excursion {
    /// Last step at or below the base level before the passage.
    pub start_step: u64,
    /// Step of the first passage to `K`.
    pub end_step: u64,
    pub peak: i64,
    /// Fraction of the steps in `start_step..end_step` spent `Down`.
    pub down_fraction: f64,
    /// `(K - x(start_step)) / (end_step - start_step)`, levels per step.
    pub slope_estimate: f64,
}

pub const DEFAULT_BASE_LEVEL: i64 = 2;

/// Excursions of the unreliable-server queue `x` from `base_level` to
/// `level_k`. After each passage the level must drop back to `base_level`
/// before another one counts.
pub fn ld_excursions(trajectory: &Trajectory, level_k: i64, base_level: i64) -> Result<Vec<Excursion>> {
    if !(level_k > base_level && base_level >= 0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "need level_K > base_level >= 0, got {level_k} and {base_level}"
        )));
    }
    if trajectory.thin != 1 {
        return Err(Error::Unsupported("excursions need an unthinned trajectory"));
    }
    let states = &trajectory.steps;
    let mut out = Vec::new();
    let mut armed = states[0].1.x <= base_level;
    let mut last_base = 0usize;
    // prefix counts of Down steps
    let mut down_prefix = Vec::with_capacity(states.len() + 1);
    down_prefix.push(0u64);
    for (_, s) in states {
        let last = *down_prefix.last().expect("nonempty");
        down_prefix.push(last + u64::from(s.status == ServerStatus::Down));
    }
    for (i, (_, s)) in states.iter().enumerate() {
        if s.x <= base_level {
            last_base = i;
            armed = true;
        } else if armed && s.x >= level_k {
            let duration = (i - last_base) as f64;
            let downs = down_prefix[i] - down_prefix[last_base];
            out.push(Excursion {
                start_step: states[last_base].0,
                end_step: states[i].0,
                peak: s.x,
                down_fraction: downs as f64 / duration,
                slope_estimate: (s.x - states[last_base].1.x) as f64 / duration,
            });
            armed = false;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Regime {
    UpDominated,
    DownDominated,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::UpDominated => "UpDominated",
            Regime::DownDominated => "DownDominated",
        }
    }
}

/// Which status dominates the most likely climb to a large queue, from the
/// sign of `mu p - (lambda + beta)`.
pub fn regime_prediction(params: &ModelParams) -> Result<Regime> {
    let mp = params.mu * params.p;
    let lb = params.lambda + params.beta;
    if mp < lb {
        Ok(Regime::UpDominated)
    } else if mp > lb {
        Ok(Regime::DownDominated)
    } else {
        Err(Error::Degenerate("degenerate regime boundary (mu p = lambda + beta)"))
    }
}

/// Majority vote over excursions: more than half with `down_fraction > 0.5`
/// gives `DownDominated`, more than half below gives `UpDominated`.
pub fn majority_regime(excursions: &[Excursion]) -> Option<Regime> {
    let down = excursions.iter().filter(|e| e.down_fraction > 0.5).count();
    let up = excursions.iter().filter(|e| e.down_fraction < 0.5).count();
    let half = excursions.len() / 2;
    if down > half {
        Some(Regime::DownDominated)
    } else if up > half {
        Some(Regime::UpDominated)
    } else {
        None
    }
}

/// Counts of `down_fraction` in ten equal bins over `[0, 1]`.
pub fn down_fraction_histogram(excursions: &[Excursion]) -> [usize; 10] {
    let mut h = [0; 10];
    for e in excursions {
        let bin = ((e.down_fraction * 10.0) as usize).min(9);
        h[bin] += 1;
    }
    h
}
