//! Shared vocabulary: probabilities, serve profiles, serving schedules for the
//! rule variants, metric bundles and the monomial shorthand used by the
//! two-variable closed forms.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// A real number in `[0, 1]`.
///
/// Complements are computed on demand and never stored.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);
    pub const HALF: Probability = Probability(0.5);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::InvalidProbability(value))
        }
    }

    /// Clamps values that drifted outside `[0, 1]` by rounding.
    pub(crate) fn saturating(value: f64) -> Self {
        Probability(value.clamp(0.0, 1.0))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn complement(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Point-win chances of player F, who serves first.
///
/// `p_f` applies on F's full (two-attempt) serve. `p_s` applies when the
/// alternative source is in force: either S is serving, or F is restricted
/// to a single serve. Both are seen from F's side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ServeProfile {
    p_f: Probability,
    p_s: Probability,
}

impl ServeProfile {
    pub fn new(p_f: f64, p_s: f64) -> Result<Self> {
        Ok(ServeProfile {
            p_f: Probability::new(p_f)?,
            p_s: Probability::new(p_s)?,
        })
    }

    /// Same point-win chance on every point.
    pub fn uniform(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn from_probabilities(p_f: Probability, p_s: Probability) -> Self {
        ServeProfile { p_f, p_s }
    }

    #[inline]
    pub fn p_f(&self) -> f64 {
        self.p_f.value()
    }

    #[inline]
    pub fn p_s(&self) -> f64 {
        self.p_s.value()
    }

    #[inline]
    pub fn q_f(&self) -> f64 {
        self.p_f.complement()
    }

    #[inline]
    pub fn q_s(&self) -> f64 {
        self.p_s.complement()
    }

    /// The profile seen from S's side: every p swapped with its q.
    pub fn mirrored(&self) -> Self {
        ServeProfile {
            p_f: Probability(self.q_f()),
            p_s: Probability(self.q_s()),
        }
    }

    /// F's chance of winning a point played under `source`.
    pub fn resolve(&self, source: PointSource) -> f64 {
        match source {
            PointSource::FullServe => self.p_f(),
            PointSource::SingleServe | PointSource::Receive => self.p_s(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Server {
    F,
    S,
}

/// Which probability governs a point, and who serves it.
///
/// `SingleServe` and `Receive` resolve to the same number (`p_s`) but only the
/// former keeps F as the server, which matters for break points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PointSource {
    /// F serves with a second serve available.
    FullServe,
    /// F serves without a second serve.
    SingleServe,
    /// S serves.
    Receive,
}

impl PointSource {
    pub fn server(self) -> Server {
        match self {
            PointSource::FullServe | PointSource::SingleServe => Server::F,
            PointSource::Receive => Server::S,
        }
    }

    pub fn letter(self) -> char {
        match self {
            PointSource::FullServe => 'F',
            PointSource::SingleServe => 's',
            PointSource::Receive => 'S',
        }
    }
}

/// The two published orderings of the alternating-serve variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ServeOrder {
    /// F S F S ...
    First,
    /// F S S F F S ... (each player serves twice in a row after the opener)
    Second,
}

/// Rule variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RuleKind {
    /// Deuce only, F serves throughout.
    A,
    /// Deuce only, servers alternate every point.
    Bj(ServeOrder),
    /// The existing game.
    T,
    /// Complete game, servers alternate.
    B(ServeOrder),
    /// Complete game; F keeps a second serve only on the first `x` points.
    C(u8),
}

impl RuleKind {
    pub fn schedule(self) -> Result<ServeSchedule> {
        match self {
            RuleKind::A => Ok(ServeSchedule::a()),
            RuleKind::Bj(order) => Ok(ServeSchedule::bj(order)),
            RuleKind::T => Ok(ServeSchedule::t()),
            RuleKind::B(order) => Ok(ServeSchedule::b(order)),
            RuleKind::C(x) => ServeSchedule::c(x),
        }
    }

    pub fn is_deuce_only(self) -> bool {
        matches!(self, RuleKind::A | RuleKind::Bj(_))
    }

    pub fn label(self) -> String {
        match self {
            RuleKind::A => "A".into(),
            RuleKind::Bj(ServeOrder::First) => "Bj1".into(),
            RuleKind::Bj(ServeOrder::Second) => "Bj2".into(),
            RuleKind::T => "T".into(),
            RuleKind::B(ServeOrder::First) => "B1".into(),
            RuleKind::B(ServeOrder::Second) => "B2".into(),
            RuleKind::C(x) => format!("C{x}"),
        }
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    /// Accepts the labels produced by [`RuleKind::label`]; `Bj` and `B` alone
    /// mean the first ordering.
    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "A" => RuleKind::A,
            "Bj" | "Bj1" => RuleKind::Bj(ServeOrder::First),
            "Bj2" => RuleKind::Bj(ServeOrder::Second),
            "T" => RuleKind::T,
            "B" | "B1" => RuleKind::B(ServeOrder::First),
            "B2" => RuleKind::B(ServeOrder::Second),
            _ => match s.strip_prefix('C').map(str::parse::<u8>) {
                Some(Ok(x)) if usize::from(x) <= PRE_DEUCE_POINTS => RuleKind::C(x),
                _ => return Err(Error::InvalidArgument(format!("unknown game '{s}'"))),
            },
        };
        Ok(kind)
    }
}

/// Number of points before the score can first reach 3:3.
pub const PRE_DEUCE_POINTS: usize = 6;

/// Per-point probability sources for a whole game.
///
/// `prefix` covers points 1 to 6 (the game is decided or at 3:3 by then) and is
/// empty for games that start at deuce. `deuce_cycle` repeats from the first
/// point after 3:3 onward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ServeSchedule {
    prefix: Vec<PointSource>,
    deuce_cycle: Vec<PointSource>,
}

impl ServeSchedule {
    pub fn new(prefix: Vec<PointSource>, deuce_cycle: Vec<PointSource>) -> Result<Self> {
        if !prefix.is_empty() && prefix.len() != PRE_DEUCE_POINTS {
            return Err(Error::InvalidSchedule(format!(
                "prefix must be empty or define exactly {PRE_DEUCE_POINTS} points, got {}",
                prefix.len()
            )));
        }
        if !(1..=2).contains(&deuce_cycle.len()) {
            return Err(Error::InvalidSchedule(format!(
                "deuce cycle must have length 1 or 2, got {}",
                deuce_cycle.len()
            )));
        }
        Ok(ServeSchedule { prefix, deuce_cycle })
    }

    pub fn a() -> Self {
        ServeSchedule {
            prefix: Vec::new(),
            deuce_cycle: vec![PointSource::FullServe],
        }
    }

    pub fn bj(order: ServeOrder) -> Self {
        use PointSource::*;
        let deuce_cycle = match order {
            ServeOrder::First => vec![FullServe, Receive],
            ServeOrder::Second => vec![Receive, FullServe],
        };
        ServeSchedule {
            prefix: Vec::new(),
            deuce_cycle,
        }
    }

    pub fn t() -> Self {
        ServeSchedule {
            prefix: vec![PointSource::FullServe; PRE_DEUCE_POINTS],
            deuce_cycle: vec![PointSource::FullServe],
        }
    }

    pub fn b(order: ServeOrder) -> Self {
        use PointSource::*;
        match order {
            ServeOrder::First => ServeSchedule {
                prefix: vec![FullServe, Receive, FullServe, Receive, FullServe, Receive],
                deuce_cycle: vec![FullServe, Receive],
            },
            ServeOrder::Second => ServeSchedule {
                prefix: vec![FullServe, Receive, Receive, FullServe, FullServe, Receive],
                deuce_cycle: vec![Receive, FullServe],
            },
        }
    }

    /// Second serve allowed on the first `x` points only (`x <= 6`).
    pub fn c(x: u8) -> Result<Self> {
        let x = usize::from(x);
        if x > PRE_DEUCE_POINTS {
            return Err(Error::InvalidSchedule(format!(
                "single-serve cutoff must be in 0..={PRE_DEUCE_POINTS}, got {x}"
            )));
        }
        let prefix = (0..PRE_DEUCE_POINTS)
            .map(|i| {
                if i < x {
                    PointSource::FullServe
                } else {
                    PointSource::SingleServe
                }
            })
            .collect();
        Ok(ServeSchedule {
            prefix,
            deuce_cycle: vec![PointSource::SingleServe],
        })
    }

    pub fn prefix(&self) -> &[PointSource] {
        &self.prefix
    }

    pub fn deuce_cycle(&self) -> &[PointSource] {
        &self.deuce_cycle
    }

    pub fn is_deuce_only(&self) -> bool {
        self.prefix.is_empty()
    }

    /// True when F serves every point, so break points are meaningful.
    pub fn server_always_f(&self) -> bool {
        self.prefix
            .iter()
            .chain(&self.deuce_cycle)
            .all(|s| s.server() == Server::F)
    }

    /// Source of the point with 0-based index `k`.
    pub fn source_at(&self, k: usize) -> PointSource {
        if k < self.prefix.len() {
            self.prefix[k]
        } else {
            let offset = k - self.prefix.len();
            self.deuce_cycle[offset % self.deuce_cycle.len()]
        }
    }
}

impl fmt::Display for ServeSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix: String = self.prefix.iter().map(|s| s.letter()).collect();
        let cycle: String = self.deuce_cycle.iter().map(|s| s.letter()).collect();
        write!(f, "{prefix}({cycle})*")
    }
}

/// The four model outputs for one game.
///
/// Break-point fields are `None` whenever S serves any point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameMetrics {
    pub win_prob: Probability,
    pub bp_prob: Option<Probability>,
    pub expected_points: f64,
    pub expected_bps: Option<f64>,
}

impl GameMetrics {
    /// Largest absolute difference over the metrics both bundles define.
    pub fn max_abs_diff(&self, other: &GameMetrics) -> f64 {
        let mut gap = (self.win_prob.value() - other.win_prob.value())
            .abs()
            .max((self.expected_points - other.expected_points).abs());
        if let (Some(a), Some(b)) = (self.bp_prob, other.bp_prob) {
            gap = gap.max((a.value() - b.value()).abs());
        }
        if let (Some(a), Some(b)) = (self.expected_bps, other.expected_bps) {
            gap = gap.max((a - b).abs());
        }
        gap
    }
}

/// `coeff * p_S^a * q_S^b * p_F^c * q_F^d`, optionally plus its mirror
/// image with `(a, b, c, d)` replaced by `(b, a, d, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgebraTerm {
    pub coeff: u32,
    pub exponents: [i32; 4],
    pub symmetric: bool,
}

impl AlgebraTerm {
    pub const fn plain(coeff: u32, exponents: [i32; 4]) -> Self {
        AlgebraTerm {
            coeff,
            exponents,
            symmetric: false,
        }
    }

    pub const fn sym(coeff: u32, exponents: [i32; 4]) -> Self {
        AlgebraTerm {
            coeff,
            exponents,
            symmetric: true,
        }
    }

    pub fn eval(&self, prof: &ServeProfile) -> f64 {
        let [a, b, c, d] = self.exponents;
        let monomial = |a: i32, b: i32, c: i32, d: i32| {
            prof.p_s().powi(a) * prof.q_s().powi(b) * prof.p_f().powi(c) * prof.q_f().powi(d)
        };
        let mut value = monomial(a, b, c, d);
        if self.symmetric {
            value += monomial(b, a, d, c);
        }
        f64::from(self.coeff) * value
    }
}

pub fn eval_term(term: &AlgebraTerm, prof: &ServeProfile) -> f64 {
    term.eval(prof)
}

/// Sum of several terms.
pub fn eval_sum(terms: &[AlgebraTerm], prof: &ServeProfile) -> f64 {
    terms.iter().map(|t| t.eval(prof)).sum()
}
