//! Game-by-game simulation, kept independent of the analytic code paths.
//!
//! # Random numbers
//!
//! Each game draws from its own SplitMix64 stream (Steele, Lea and Flood 2014):
//!
//! ```text
//! state  <- state + 0x9E3779B97F4A7C15
//! z      <- state
//! z      <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z      <- (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output <- z ^ (z >> 31)
//! ```
//!
//! all arithmetic modulo 2^64. The stream for game `i` (0-based) of a run with
//! seed `s` starts from `state = mix(s ^ mix(i + 0x9E3779B97F4A7C15))`, where
//! `mix` is the output finalizer above applied to its argument. A uniform in
//! `[0, 1)` is `(output >> 11) * 2^-53`, and F wins a point with chance `p`
//! when that uniform is below `p`.
//!
//! Totals are kept as integers, so results do not depend on how the games are
//! split across threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{ServeProfile, ServeSchedule};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(state: u64) -> Self {
        SplitMix64 { state }
    }

    /// Independent stream for game `index` of a run seeded with `seed`.
    pub fn for_game(seed: u64, index: u64) -> Self {
        SplitMix64::new(mix64(seed ^ mix64(index.wrapping_add(GOLDEN_GAMMA))))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub n_games: u64,
    pub seed: u64,
    pub max_deuce_cycles: u64,
}

impl SimConfig {
    pub const DEFAULT_DEUCE_CAP: u64 = 1_000_000;

    pub fn new(n_games: u64, seed: u64) -> Result<Self> {
        let cfg = SimConfig {
            n_games,
            seed,
            max_deuce_cycles: Self::DEFAULT_DEUCE_CAP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_games == 0 {
            return Err(Error::InvalidArgument("n_games must be at least 1".into()));
        }
        if self.max_deuce_cycles == 0 {
            return Err(Error::InvalidArgument("max_deuce_cycles must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameOutcome {
    pub f_won: bool,
    pub points: u32,
    /// `None` when S serves any point of the schedule.
    pub bps: Option<u32>,
}

/// Plays one game point by point, including the deuce loop.
pub fn simulate_game(
    sched: &ServeSchedule,
    prof: &ServeProfile,
    rng: &mut SplitMix64,
    max_deuce_cycles: u64,
) -> Result<GameOutcome> {
    let track_bp = sched.server_always_f();
    let (mut f, mut s): (u32, u32) = if sched.is_deuce_only() { (3, 3) } else { (0, 0) };
    let mut played = 0u32;
    let mut bps = 0u32;
    let mut deuce_returns = 0u64;

    loop {
        let p = prof.resolve(sched.source_at(played as usize));
        if rng.next_f64() < p {
            f += 1;
        } else {
            s += 1;
        }
        played += 1;

        if f >= 4 && f >= s + 2 {
            return Ok(outcome(true, played, bps, track_bp));
        }
        if s >= 4 && s >= f + 2 {
            return Ok(outcome(false, played, bps, track_bp));
        }
        if f == 4 && s == 4 {
            f = 3;
            s = 3;
            deuce_returns += 1;
            if deuce_returns > max_deuce_cycles {
                return Err(Error::DeuceCapExceeded(max_deuce_cycles));
            }
        }
        if s >= 3 && s > f {
            bps += 1;
        }
    }
}

fn outcome(f_won: bool, points: u32, bps: u32, track_bp: bool) -> GameOutcome {
    GameOutcome {
        f_won,
        points,
        bps: track_bp.then_some(bps),
    }
}

/// Sample mean with its standard error. `std_err` is absent for a single game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricEstimate {
    pub mean: f64,
    pub std_err: Option<f64>,
}

impl MetricEstimate {
    fn from_sums(n: u64, sum: u64, sum_sq: u64) -> Self {
        let nf = n as f64;
        let mean = sum as f64 / nf;
        let std_err = (n > 1).then(|| {
            // n * sum_sq - sum^2 is exact in u128.
            let spread = u128::from(n) * u128::from(sum_sq) - u128::from(sum) * u128::from(sum);
            let variance = spread as f64 / (nf * (nf - 1.0));
            (variance / nf).sqrt()
        });
        MetricEstimate { mean, std_err }
    }

    /// Signed distance from `exact` in standard errors.
    pub fn z_score(&self, exact: f64) -> Option<f64> {
        match self.std_err {
            Some(se) if se > 0.0 => Some((self.mean - exact) / se),
            Some(_) if self.mean == exact => Some(0.0),
            Some(_) => Some(f64::INFINITY.copysign(self.mean - exact)),
            None => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimResult {
    pub n_games: u64,
    pub win_prob: MetricEstimate,
    pub bp_prob: Option<MetricEstimate>,
    pub expected_points: MetricEstimate,
    pub expected_bps: Option<MetricEstimate>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    games: u64,
    wins: u64,
    points: u64,
    points_sq: u64,
    bp_games: u64,
    bps: u64,
    bps_sq: u64,
}

impl Tally {
    fn record(mut self, g: GameOutcome) -> Self {
        self.games += 1;
        self.wins += u64::from(g.f_won);
        let pts = u64::from(g.points);
        self.points += pts;
        self.points_sq += pts * pts;
        if let Some(b) = g.bps {
            let b = u64::from(b);
            self.bp_games += u64::from(b > 0);
            self.bps += b;
            self.bps_sq += b * b;
        }
        self
    }

    fn merge(self, o: Tally) -> Self {
        Tally {
            games: self.games + o.games,
            wins: self.wins + o.wins,
            points: self.points + o.points,
            points_sq: self.points_sq + o.points_sq,
            bp_games: self.bp_games + o.bp_games,
            bps: self.bps + o.bps,
            bps_sq: self.bps_sq + o.bps_sq,
        }
    }
}

const CHUNK: u64 = 16_384;

/// Simulates `cfg.n_games` games and summarises all four metrics.
pub fn estimate_metrics(sched: &ServeSchedule, prof: &ServeProfile, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let n = cfg.n_games;
    let chunks = n.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n);
            (start..end).try_fold(Tally::default(), |t, i| {
                let mut rng = SplitMix64::for_game(cfg.seed, i);
                simulate_game(sched, prof, &mut rng, cfg.max_deuce_cycles).map(|g| t.record(g))
            })
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;

    let track_bp = sched.server_always_f();
    Ok(SimResult {
        n_games: tally.games,
        win_prob: MetricEstimate::from_sums(n, tally.wins, tally.wins),
        bp_prob: track_bp.then(|| MetricEstimate::from_sums(n, tally.bp_games, tally.bp_games)),
        expected_points: MetricEstimate::from_sums(n, tally.points, tally.points_sq),
        expected_bps: track_bp.then(|| MetricEstimate::from_sums(n, tally.bps, tally.bps_sq)),
    })
}
