//! Exact evaluation of a game under any [`ServeSchedule`].
//!
//! Probability mass is pushed point by point over the pre-deuce lattice
//! `(f_points, s_points, bp_seen)` for points 1 to 6. Mass that reaches 4 points
//! for either player is absorbed, mass that reaches 3:3 is handed to the deuce
//! closure, which sums the geometric series of returns to deuce analytically.
//!
//! A break point is a state where S is one point from taking F's service game:
//! 0:40, 15:40, 30:40 and advantage S. Break-point metrics are only produced
//! when F serves every point.

use crate::error::{Error, Result};
use crate::types::{GameMetrics, Probability, ServeProfile, ServeSchedule, Server, PRE_DEUCE_POINTS};

/// Denominators below this are treated as zero.
pub const SINGULAR_EPS: f64 = 1e-300;

/// Largest barrier accepted by [`walk_expected_duration`].
pub const MAX_WALK_BARRIER: usize = 10_000;

/// Pre-deuce score, with a flag recording whether a break point has occurred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScoreState {
    pub f_points: u8,
    pub s_points: u8,
    pub bp_seen: bool,
}

impl ScoreState {
    pub const LOVE_ALL: ScoreState = ScoreState {
        f_points: 0,
        s_points: 0,
        bp_seen: false,
    };

    /// S needs one more point and F cannot reach deuce first.
    pub fn is_break_point(&self) -> bool {
        self.s_points == 3 && self.f_points <= 2
    }

    fn index(&self) -> usize {
        (usize::from(self.f_points) * 4 + usize::from(self.s_points)) * 2 + usize::from(self.bp_seen)
    }
}

/// One point of the repeating deuce unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeucePoint {
    pub p_win: f64,
    pub server: Server,
}

/// Closed-form outcome of play from deuce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeuceClosure {
    pub win: Probability,
    pub expected_len: f64,
    /// Chance that advantage S occurs at least once.
    pub bp_indicator: Option<Probability>,
    /// Expected number of visits to advantage S.
    pub bp_count: Option<f64>,
}

/// Sums the return-to-deuce geometric series for a cycle of one or two points.
///
/// For a cycle `(a, b)` a pair of points returns to deuce with probability
/// `R = a(1-b) + (1-a)b`, so the win chance is `ab / (1 - R)` and the
/// expected length `2 / (1 - R)`. A one-point cycle is the pair `(a, a)`.
pub fn deuce_closure(cycle: &[DeucePoint]) -> Result<DeuceClosure> {
    let (first, second) = match cycle {
        [only] => (*only, *only),
        [first, second] => (*first, *second),
        _ => {
            return Err(Error::InvalidSchedule(format!(
                "deuce cycle must have length 1 or 2, got {}",
                cycle.len()
            )))
        }
    };
    let (a, b) = (first.p_win, second.p_win);
    let denominator = a * b + (1.0 - a) * (1.0 - b);
    if denominator < SINGULAR_EPS {
        return Err(Error::SingularProfile { denominator });
    }
    let win = Probability::saturating(a * b / denominator);
    let expected_len = 2.0 / denominator;

    let all_f = first.server == Server::F && second.server == Server::F;
    let (bp_indicator, bp_count) = if all_f {
        // First passage to advantage S: lose the first point of a pair, or win
        // it and lose the second (back to deuce, no break point yet).
        let indicator = (1.0 - a) / (1.0 - a * (1.0 - b));
        let count = (1.0 - a) / denominator;
        (Some(Probability::saturating(indicator)), Some(count))
    } else {
        (None, None)
    };

    Ok(DeuceClosure {
        win,
        expected_len,
        bp_indicator,
        bp_count,
    })
}

/// Raw accumulators of the pre-deuce sweep, before the closure is applied.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PreDeuceMass {
    pub f_wins: f64,
    pub s_wins: f64,
    /// Mass entering 3:3, split by whether a break point was already seen.
    pub deuce_fresh: f64,
    pub deuce_after_bp: f64,
    /// `sum k * P(game ends on point k)` over absorbed mass.
    pub weighted_length: f64,
    /// First-passage mass into a break-point state.
    pub bp_first: f64,
    /// Expected visits to break-point states.
    pub bp_visits: f64,
}

impl PreDeuceMass {
    pub fn deuce(&self) -> f64 {
        self.deuce_fresh + self.deuce_after_bp
    }

    pub fn total(&self) -> f64 {
        self.f_wins + self.s_wins + self.deuce()
    }
}

/// Propagates mass over points 1 to 6 of a complete-game schedule.
pub fn pre_deuce_mass(sched: &ServeSchedule, prof: &ServeProfile) -> Result<PreDeuceMass> {
    if sched.is_deuce_only() {
        return Err(Error::InvalidSchedule(
            "deuce-only schedule has no pre-deuce section".into(),
        ));
    }
    let track_bp = sched.server_always_f();
    let mut acc = PreDeuceMass::default();
    let mut mass = [0.0f64; 32];
    mass[ScoreState::LOVE_ALL.index()] = 1.0;

    for (k, &source) in sched.prefix().iter().enumerate().take(PRE_DEUCE_POINTS) {
        let p = prof.resolve(source);
        let q = 1.0 - p;
        let point_no = (k + 1) as f64;
        let mut next = [0.0f64; 32];

        for f in 0..4u8 {
            for s in 0..4u8 {
                if usize::from(f + s) != k {
                    continue;
                }
                for seen in [false, true] {
                    let m = mass[ScoreState {
                        f_points: f,
                        s_points: s,
                        bp_seen: seen,
                    }
                    .index()];
                    if m == 0.0 {
                        continue;
                    }
                    // F takes the point.
                    let won = m * p;
                    if f == 3 {
                        acc.f_wins += won;
                        acc.weighted_length += point_no * won;
                    } else if f + 1 == 3 && s == 3 {
                        if seen {
                            acc.deuce_after_bp += won;
                        } else {
                            acc.deuce_fresh += won;
                        }
                    } else {
                        let to = ScoreState {
                            f_points: f + 1,
                            s_points: s,
                            bp_seen: seen,
                        };
                        next[to.index()] += won;
                        if track_bp && to.is_break_point() {
                            acc.bp_visits += won;
                        }
                    }

                    // S takes the point.
                    let lost = m * q;
                    if s == 3 {
                        acc.s_wins += lost;
                        acc.weighted_length += point_no * lost;
                    } else if f == 3 && s + 1 == 3 {
                        if seen {
                            acc.deuce_after_bp += lost;
                        } else {
                            acc.deuce_fresh += lost;
                        }
                    } else {
                        let mut to = ScoreState {
                            f_points: f,
                            s_points: s + 1,
                            bp_seen: seen,
                        };
                        if track_bp && to.is_break_point() {
                            acc.bp_visits += lost;
                            if !seen {
                                acc.bp_first += lost;
                            }
                            to.bp_seen = true;
                        }
                        next[to.index()] += lost;
                    }
                }
            }
        }
        mass = next;
    }
    Ok(acc)
}

fn closure_for(sched: &ServeSchedule, prof: &ServeProfile) -> Result<DeuceClosure> {
    let cycle: Vec<DeucePoint> = sched
        .deuce_cycle()
        .iter()
        .map(|&src| DeucePoint {
            p_win: prof.resolve(src),
            server: src.server(),
        })
        .collect();
    deuce_closure(&cycle)
}

/// Exact win probability, break-point probability, expected points and
/// expected break points.
pub fn metrics_exact(sched: &ServeSchedule, prof: &ServeProfile) -> Result<GameMetrics> {
    let closure = closure_for(sched, prof)?;
    let track_bp = sched.server_always_f();

    if sched.is_deuce_only() {
        return Ok(GameMetrics {
            win_prob: closure.win,
            bp_prob: closure.bp_indicator,
            expected_points: closure.expected_len,
            expected_bps: closure.bp_count,
        });
    }

    let acc = pre_deuce_mass(sched, prof)?;
    let deuce = acc.deuce();
    let win = acc.f_wins + deuce * closure.win.value();
    let expected_points = acc.weighted_length + deuce * (PRE_DEUCE_POINTS as f64 + closure.expected_len);

    let (bp_prob, expected_bps) = match (track_bp, closure.bp_indicator, closure.bp_count) {
        (true, Some(indicator), Some(count)) => (
            Some(Probability::saturating(
                acc.bp_first + acc.deuce_fresh * indicator.value(),
            )),
            Some(acc.bp_visits + deuce * count),
        ),
        _ => (None, None),
    };

    Ok(GameMetrics {
        win_prob: Probability::saturating(win),
        bp_prob,
        expected_points,
        expected_bps,
    })
}

/// Break-point probability and expected count, or an error when S serves.
pub fn breakpoints_exact(sched: &ServeSchedule, prof: &ServeProfile) -> Result<(Probability, f64)> {
    if !sched.server_always_f() {
        return Err(Error::MixedServerBreakpoint);
    }
    let m = metrics_exact(sched, prof)?;
    match (m.bp_prob, m.expected_bps) {
        (Some(p), Some(e)) => Ok((p, e)),
        _ => Err(Error::MixedServerBreakpoint),
    }
}

/// Expected steps for a +-1 walk started at 0 to hit `+n` or `-n`, where each
/// step goes up with probability `p`.
///
/// Solves `E_i = 1 + p E_{i+1} + q E_{i-1}` on the interior states with a
/// tridiagonal sweep.
pub fn walk_expected_duration(n: usize, p: Probability) -> Result<f64> {
    if n == 0 || n > MAX_WALK_BARRIER {
        return Err(Error::InvalidArgument(format!(
            "barrier must be in 1..={MAX_WALK_BARRIER}, got {n}"
        )));
    }
    let p = p.value();
    if p <= 0.0 || p >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "step probability must be in (0, 1), got {p}"
        )));
    }
    let q = 1.0 - p;
    let size = 2 * n - 1;
    // Row i: -q E_{i-1} + E_i - p E_{i+1} = 1.
    let mut c_prime = vec![0.0f64; size];
    let mut d_prime = vec![0.0f64; size];
    for i in 0..size {
        let lower = if i == 0 { 0.0 } else { -q };
        let upper = if i + 1 == size { 0.0 } else { -p };
        let denom = 1.0 - lower * if i == 0 { 0.0 } else { c_prime[i - 1] };
        c_prime[i] = upper / denom;
        let prev_d = if i == 0 { 0.0 } else { d_prime[i - 1] };
        d_prime[i] = (1.0 - lower * prev_d) / denom;
    }
    let mut e = vec![0.0f64; size];
    e[size - 1] = d_prime[size - 1];
    for i in (0..size - 1).rev() {
        e[i] = d_prime[i] - c_prime[i] * e[i + 1];
    }
    Ok(e[n - 1])
}
