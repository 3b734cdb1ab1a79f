//! Direct formulas for each rule variant.
//!
//! One-variable forms (A, T) take the single point-win chance `p`. Two-variable
//! forms (Bj, B, C) take a [`ServeProfile`] and are written in the monomial
//! shorthand of [`AlgebraTerm`]: `[a, b, c, d] = p_S^a q_S^b p_F^c q_F^d`.
//!
//! Every function here is checked against [`crate::engine::metrics_exact`] on
//! the matching schedule. Where a published coefficient disagreed with the
//! lattice, the lattice wins and the deviation is noted next to the term.

use crate::engine::SINGULAR_EPS;
use crate::error::{Error, Result};
use crate::types::{eval_sum, AlgebraTerm, GameMetrics, Probability, RuleKind, ServeProfile};

const fn t(coeff: u32, e: [i32; 4]) -> AlgebraTerm {
    AlgebraTerm::plain(coeff, e)
}

const fn sym(coeff: u32, e: [i32; 4]) -> AlgebraTerm {
    AlgebraTerm::sym(coeff, e)
}

#[inline]
fn square_sum(p: f64) -> f64 {
    let q = 1.0 - p;
    p * p + q * q
}

// ---------------------------------------------------------------------------
// A: deuce only, F serves

pub fn p_win_a(p: Probability) -> Probability {
    let p = p.value();
    Probability::saturating(p * p / square_sum(p))
}

/// Chance that advantage S occurs at least once.
pub fn p_bp_a(p: Probability) -> Probability {
    let p = p.value();
    let q = 1.0 - p;
    Probability::saturating(q / (q + p * p))
}

pub fn e_points_a(p: Probability) -> f64 {
    2.0 / square_sum(p.value())
}

pub fn e_bp_a(p: Probability) -> f64 {
    let p = p.value();
    (1.0 - p) / square_sum(p)
}

// ---------------------------------------------------------------------------
// Bj: deuce only, alternating servers

fn bj_denominator(prof: &ServeProfile) -> Result<f64> {
    let d = prof.p_f() * prof.p_s() + prof.q_f() * prof.q_s();
    if d < SINGULAR_EPS {
        Err(Error::SingularProfile { denominator: d })
    } else {
        Ok(d)
    }
}

pub fn p_win_bj(prof: &ServeProfile) -> Result<Probability> {
    let d = bj_denominator(prof)?;
    Ok(Probability::saturating(prof.p_f() * prof.p_s() / d))
}

pub fn e_points_bj(prof: &ServeProfile) -> Result<f64> {
    Ok(2.0 / bj_denominator(prof)?)
}

// ---------------------------------------------------------------------------
// T: the existing game

/// Sum over the 4:0, 4:1, 4:2 finishes plus the deuce entry times the A closure.
pub fn p_win_t(p: Probability) -> Probability {
    let p = p.value();
    let q = 1.0 - p;
    let p4 = p.powi(4);
    let value = p4 + 4.0 * p4 * q + 10.0 * p4 * q * q + 20.0 * (p * q).powi(3) * p * p / square_sum(p);
    Probability::saturating(value)
}

/// `p^4 (15 - 4p - 10p^2 / (1 - 2p(1-p)))`, the same function as [`p_win_t`].
pub fn p_win_t_omalley(p: Probability) -> Probability {
    let p = p.value();
    let value = p.powi(4) * (15.0 - 4.0 * p - 10.0 * p * p / (1.0 - 2.0 * p * (1.0 - p)));
    Probability::saturating(value)
}

pub fn p_bp_t(p: Probability) -> Probability {
    let pv = p.value();
    let q = 1.0 - pv;
    let q3 = q.powi(3);
    let value = q3 + 3.0 * pv * q3 + 6.0 * pv * pv * q3 + 10.0 * pv.powi(3) * q3 * p_bp_a(p).value();
    Probability::saturating(value)
}

pub fn e_points_t(p: Probability) -> f64 {
    let p = p.value();
    let q = 1.0 - p;
    let pq3 = (p * q).powi(3);
    4.0 * (p.powi(4) + q.powi(4))
        + 20.0 * p * q * (p.powi(3) + q.powi(3))
        + 60.0 * p * p * q * q * (p * p + q * q)
        + 120.0 * pq3
        + 20.0 * pq3 * 2.0 / square_sum(p)
}

pub fn e_bp_t(p: Probability) -> f64 {
    let pv = p.value();
    let q = 1.0 - pv;
    let q3 = q.powi(3);
    q3 + 4.0 * pv * q3 + 10.0 * pv * pv * q3 + 20.0 * (pv * q).powi(3) * e_bp_a(p)
}

// ---------------------------------------------------------------------------
// B: complete game, alternating servers (F S F S F S, then F S at deuce)

/// Finishes won by F in 4, 5 and 6 points.
const B_WIN_4: [AlgebraTerm; 1] = [t(1, [2, 0, 2, 0])];
const B_WIN_5: [AlgebraTerm; 2] = [t(2, [1, 1, 3, 0]), t(2, [2, 0, 2, 1])];
const B_WIN_6: [AlgebraTerm; 3] = [t(6, [2, 1, 2, 1]), t(3, [3, 0, 1, 2]), t(1, [1, 2, 3, 0])];

/// Mass reaching 3:3; shared by B and C since both play three points of
/// each source in the first six.
const DEUCE_ENTRY: [AlgebraTerm; 2] = [sym(9, [1, 2, 2, 1]), sym(1, [3, 0, 0, 3])];

fn mirrored(terms: &[AlgebraTerm]) -> impl Iterator<Item = AlgebraTerm> + '_ {
    terms.iter().map(|t| AlgebraTerm::sym(t.coeff, t.exponents))
}

fn sym_sum(terms: &[AlgebraTerm], prof: &ServeProfile) -> f64 {
    mirrored(terms).map(|t| t.eval(prof)).sum()
}

pub fn p_win_b(prof: &ServeProfile) -> Result<Probability> {
    let closure = p_win_bj(prof)?.value();
    let pre = eval_sum(&B_WIN_4, prof) + eval_sum(&B_WIN_5, prof) + eval_sum(&B_WIN_6, prof);
    Ok(Probability::saturating(pre + eval_sum(&DEUCE_ENTRY, prof) * closure))
}

/// Expected rally count. Each finish group carries both players' terms; the
/// multiplicities 2, 2 (five points) and 6, 3, 1 (six points) are the same as
/// in the win probability.
pub fn e_points_b(prof: &ServeProfile) -> Result<f64> {
    let deuce_len = e_points_bj(prof)?;
    Ok(4.0 * sym_sum(&B_WIN_4, prof)
        + 5.0 * sym_sum(&B_WIN_5, prof)
        + 6.0 * sym_sum(&B_WIN_6, prof)
        + eval_sum(&DEUCE_ENTRY, prof) * (deuce_len + 6.0))
}

// ---------------------------------------------------------------------------
// C: second serve on the first three points only (F F F s s s, then s)

const C_WIN_4: [AlgebraTerm; 1] = [t(1, [1, 0, 3, 0])];
const C_WIN_5: [AlgebraTerm; 2] = [t(1, [1, 1, 3, 0]), t(3, [2, 0, 2, 1])];
const C_WIN_6: [AlgebraTerm; 3] = [t(1, [1, 2, 3, 0]), t(6, [2, 1, 2, 1]), t(3, [3, 0, 1, 2])];

/// First arrival at 0:40, 15:40 and 30:40.
const C_BP_FIRST: [AlgebraTerm; 4] = [
    t(1, [0, 0, 0, 3]),
    t(3, [0, 1, 1, 2]),
    t(3, [0, 2, 2, 1]),
    t(3, [1, 1, 1, 2]),
];

/// 3:3 reached from 40:30, i.e. without any break point.
const C_DEUCE_FRESH: [AlgebraTerm; 3] = [t(6, [1, 2, 2, 1]), t(3, [2, 1, 1, 2]), t(1, [0, 3, 3, 0])];

/// Every visit to 0:40, 15:40 and 30:40.
const C_BP_VISITS: [AlgebraTerm; 6] = [
    t(1, [0, 0, 0, 3]),
    t(1, [1, 0, 0, 3]),
    t(3, [0, 1, 1, 2]),
    t(1, [2, 0, 0, 3]),
    t(6, [1, 1, 1, 2]),
    t(3, [0, 2, 2, 1]),
];

fn c_deuce_profile(prof: &ServeProfile) -> Probability {
    Probability::saturating(prof.p_s())
}

pub fn p_win_c(prof: &ServeProfile) -> Probability {
    let closure = p_win_a(c_deuce_profile(prof)).value();
    let pre = eval_sum(&C_WIN_4, prof) + eval_sum(&C_WIN_5, prof) + eval_sum(&C_WIN_6, prof);
    Probability::saturating(pre + eval_sum(&DEUCE_ENTRY, prof) * closure)
}

pub fn p_bp_c(prof: &ServeProfile) -> Probability {
    let closure = p_bp_a(c_deuce_profile(prof)).value();
    Probability::saturating(eval_sum(&C_BP_FIRST, prof) + eval_sum(&C_DEUCE_FRESH, prof) * closure)
}

pub fn e_points_c(prof: &ServeProfile) -> f64 {
    let deuce_len = e_points_a(c_deuce_profile(prof));
    4.0 * sym_sum(&C_WIN_4, prof)
        + 5.0 * sym_sum(&C_WIN_5, prof)
        + 6.0 * sym_sum(&C_WIN_6, prof)
        + eval_sum(&DEUCE_ENTRY, prof) * (deuce_len + 6.0)
}

pub fn e_bp_c(prof: &ServeProfile) -> f64 {
    let closure = e_bp_a(c_deuce_profile(prof));
    eval_sum(&C_BP_VISITS, prof) + eval_sum(&DEUCE_ENTRY, prof) * closure
}

// ---------------------------------------------------------------------------
// Bundles

/// All metrics a rule has formulas for, or `None` when there is no closed
/// form (C with a cutoff other than three). One-variable rules read `p_f`.
pub fn metrics(kind: RuleKind, prof: &ServeProfile) -> Option<Result<GameMetrics>> {
    let p = Probability::saturating(prof.p_f());
    let m = match kind {
        RuleKind::A => Ok(GameMetrics {
            win_prob: p_win_a(p),
            bp_prob: Some(p_bp_a(p)),
            expected_points: e_points_a(p),
            expected_bps: Some(e_bp_a(p)),
        }),
        RuleKind::T => Ok(GameMetrics {
            win_prob: p_win_t(p),
            bp_prob: Some(p_bp_t(p)),
            expected_points: e_points_t(p),
            expected_bps: Some(e_bp_t(p)),
        }),
        RuleKind::Bj(_) => p_win_bj(prof).and_then(|win| {
            Ok(GameMetrics {
                win_prob: win,
                bp_prob: None,
                expected_points: e_points_bj(prof)?,
                expected_bps: None,
            })
        }),
        RuleKind::B(_) => p_win_b(prof).and_then(|win| {
            Ok(GameMetrics {
                win_prob: win,
                bp_prob: None,
                expected_points: e_points_b(prof)?,
                expected_bps: None,
            })
        }),
        RuleKind::C(3) => Ok(GameMetrics {
            win_prob: p_win_c(prof),
            bp_prob: Some(p_bp_c(prof)),
            expected_points: e_points_c(prof),
            expected_bps: Some(e_bp_c(prof)),
        }),
        RuleKind::C(_) => return None,
    };
    Some(m)
}
