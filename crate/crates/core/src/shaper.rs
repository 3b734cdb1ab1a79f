//! Choosing how many points keep a second serve.
//!
//! The target is a band of game-win probabilities for the server. The band
//! edges are mapped back to point-win chances through the existing-game curve,
//! and each edge player's blend of full-serve and single-serve chances is
//! solved for the number of full-serve points `x`:
//!
//! ```text
//! x / E * p_emp + (E - x) / E * p_s_won = p_target,   E = E_T(p_target)
//! ```
//!
//! `E` is the expected game length of the existing game evaluated at the target
//! chance, which is an approximation; [`compare_table`] then evaluates the
//! resulting rule exactly.

use std::io::Write;

use serde::Serialize;

use crate::atp::{p_emp, PlayerStats};
use crate::closed_form::{self, e_points_t, p_win_t};
use crate::engine::metrics_exact;
use crate::error::{Error, Result};
use crate::types::{GameMetrics, Probability, RuleKind, ServeProfile, ServeSchedule};

pub const BISECTION_LO: f64 = 1e-6;
pub const BISECTION_HI: f64 = 1.0 - 1e-6;
pub const BISECTION_MAX_ITER: usize = 200;
pub const BISECTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapingTargets {
    pub p_win_low: Probability,
    pub p_win_high: Probability,
}

impl ShapingTargets {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(0.5 < low && low < high && high < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "targets must satisfy 0.5 < low < high < 1, got ({low}, {high})"
            )));
        }
        Ok(ShapingTargets {
            p_win_low: Probability::new(low)?,
            p_win_high: Probability::new(high)?,
        })
    }
}

impl Default for ShapingTargets {
    fn default() -> Self {
        ShapingTargets {
            p_win_low: Probability::saturating(0.60),
            p_win_high: Probability::saturating(0.75),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapingSolution {
    pub p_trad: Probability,
    pub p_exc: Probability,
    pub x_low: f64,
    pub x_high: f64,
    pub x_recommended: i64,
    pub warnings: Vec<String>,
}

/// The point-win chance at which the existing game is won with probability
/// `target`, by bisection on the increasing curve [`p_win_t`].
pub fn invert_p_win_t(target: Probability) -> Result<Probability> {
    let t = target.value();
    if t <= 0.0 || t >= 1.0 {
        return Err(Error::InvalidArgument(format!("target must be in (0, 1), got {t}")));
    }
    let (mut lo, mut hi) = (BISECTION_LO, BISECTION_HI);
    let f = |p: f64| p_win_t(Probability::saturating(p)).value() - t;
    if f(lo) >= 0.0 {
        return Ok(Probability::saturating(lo));
    }
    if f(hi) <= 0.0 {
        return Ok(Probability::saturating(hi));
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECTION_TOL {
            break;
        }
    }
    Ok(Probability::saturating(0.5 * (lo + hi)))
}

/// Number of full-serve points that blends the player's two chances to
/// `p_target`. Not clamped: values outside `[0, E_T]` mean the target lies
/// outside the player's reach.
pub fn solve_x(stats: &PlayerStats, p_target: Probability) -> Result<f64> {
    let full = p_emp(stats).value();
    let single = stats.p_s_won.value();
    let spread = full - single;
    if spread.abs() < 1e-12 {
        return Err(Error::DegenerateProfile(full));
    }
    Ok((p_target.value() - single) / spread * e_points_t(p_target))
}

/// True when `p_target` lies between the player's single-serve and blended chances.
pub fn target_reachable(stats: &PlayerStats, p_target: Probability) -> bool {
    let (a, b) = (stats.p_s_won.value(), p_emp(stats).value());
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    (lo..=hi).contains(&p_target.value())
}

/// Solves for both edge players. `low` is the weaker player, matched to the
/// lower edge of the band.
///
/// The two cutoffs are rounded separately; when they disagree the weaker
/// player's value is recommended and a warning is attached.
pub fn recommend_cutoff(low: &PlayerStats, high: &PlayerStats, targets: &ShapingTargets) -> Result<ShapingSolution> {
    let p_trad = invert_p_win_t(targets.p_win_low)?;
    let p_exc = invert_p_win_t(targets.p_win_high)?;
    let x_low = solve_x(low, p_trad)?;
    let x_high = solve_x(high, p_exc)?;

    let mut warnings = Vec::new();
    for (stats, target, x) in [(low, p_trad, x_low), (high, p_exc, x_high)] {
        if !target_reachable(stats, target) {
            warnings.push(format!(
                "{}: target {:.4} lies outside [p_s_won, p_emp], x = {x:.2} is an extrapolation",
                stats.name,
                target.value()
            ));
        }
    }
    let (r_low, r_high) = (x_low.round() as i64, x_high.round() as i64);
    if r_low != r_high {
        warnings.push(format!(
            "cutoffs disagree after rounding ({r_low} for {}, {r_high} for {}); using the weaker player's {r_low}",
            low.name, high.name
        ));
    }
    Ok(ShapingSolution {
        p_trad,
        p_exc,
        x_low,
        x_high,
        x_recommended: r_low,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub rank: u32,
    pub name: String,
    pub p_emp: Probability,
    pub p_s_won: Probability,
    /// Existing game at `p_emp`.
    pub existing: GameMetrics,
    /// Single-serve rule at `(p_emp, p_s_won)`.
    pub proposed: GameMetrics,
    /// Engine versus closed form for the proposed rule, when a closed form exists.
    pub closed_form_gap: Option<f64>,
}

impl CompareRow {
    /// `P_T, P_C, P_T_br, P_C_br, E_T, E_C, E_T_br, E_C_br`.
    pub fn columns(&self) -> [f64; 8] {
        let (t, c) = (&self.existing, &self.proposed);
        [
            t.win_prob.value(),
            c.win_prob.value(),
            t.bp_prob.map_or(f64::NAN, Probability::value),
            c.bp_prob.map_or(f64::NAN, Probability::value),
            t.expected_points,
            c.expected_points,
            t.expected_bps.unwrap_or(f64::NAN),
            c.expected_bps.unwrap_or(f64::NAN),
        ]
    }
}

pub const COMPARE_HEADER: [&str; 11] = [
    "rank", "p_emp", "p_s_won", "P_T", "P_C", "P_T_br", "P_C_br", "E_T", "E_C", "E_T_br", "E_C_br",
];

/// Existing versus single-serve-after-`x` game for each player, with
/// `p_F = p_emp` and `p_S = p_s_won`.
pub fn compare_table(players: &[PlayerStats], x: u8) -> Result<Vec<CompareRow>> {
    let sched = ServeSchedule::c(x)?;
    players
        .iter()
        .map(|stats| {
            let full = p_emp(stats);
            let prof = ServeProfile::from_probabilities(full, stats.p_s_won);
            let existing = closed_form::metrics(RuleKind::T, &ServeProfile::from_probabilities(full, full))
                .expect("existing game has a closed form")?;
            let proposed = metrics_exact(&sched, &prof)?;
            let closed_form_gap = closed_form::metrics(RuleKind::C(x), &prof)
                .transpose()?
                .map(|m| m.max_abs_diff(&proposed));
            Ok(CompareRow {
                rank: stats.rank,
                name: stats.name.clone(),
                p_emp: full,
                p_s_won: stats.p_s_won,
                existing,
                proposed,
                closed_form_gap,
            })
        })
        .collect()
}

/// CSV with [`COMPARE_HEADER`], values at `decimals` places.
pub fn write_compare_csv<W: Write>(rows: &[CompareRow], decimals: usize, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_HEADER)?;
    for row in rows {
        let mut record = vec![
            row.rank.to_string(),
            format!("{:.*}", decimals, row.p_emp.value()),
            format!("{:.*}", decimals, row.p_s_won.value()),
        ];
        record.extend(row.columns().iter().map(|v| format!("{v:.decimals$}")));
        w.write_record(&record)?;
    }
    w.flush()
}
