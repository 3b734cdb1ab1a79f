use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use deuce::engine::metrics_exact;
use deuce::{Error, GameMetrics, Probability, Result, RuleKind, ServeProfile};
use serde::{Deserialize, Serialize};

use crate::svg::Series;

pub const SWEEP_HEADER: [&str; 6] = ["game", "metric", "p", "p_f", "p_s", "value"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// One probability for every point: `p_F = p_S = p`.
    P,
    /// Vary `p_F`; `p_S` is fixed or tied to it through `delta`.
    PF,
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(SweepVariable::P),
            "p_F" | "p_f" | "pf" => Ok(SweepVariable::PF),
            _ => Err(Error::InvalidArgument(format!(
                "unknown sweep variable '{s}' (p or p_F)"
            ))),
        }
    }
}

/// Grid over one probability. With `delta`, the partner is
/// `p_S = 1 - p_F + delta`; points where that leaves `[0, 1]` are skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    variable: SweepVariable,
    start: Probability,
    stop: Probability,
    step: f64,
    delta: Option<f64>,
    fixed_ps: Option<Probability>,
}

impl SweepSpec {
    pub fn new(
        variable: SweepVariable,
        start: f64,
        stop: f64,
        step: f64,
        delta: Option<f64>,
        fixed_ps: Option<f64>,
    ) -> Result<Self> {
        let start = Probability::new(start)?;
        let stop = Probability::new(stop)?;
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if start.value() >= stop.value() {
            return bad(format!("start {} must be below stop {}", start, stop));
        }
        if !(step > 0.0 && step <= stop.value() - start.value() + 1e-12) {
            return bad(format!("step {step} must be positive and no wider than the range"));
        }
        if let Some(d) = delta {
            if !(0.0..=0.5).contains(&d) {
                return bad(format!("delta {d} outside [0, 0.5]"));
            }
        }
        let fixed_ps = fixed_ps.map(Probability::new).transpose()?;
        match (variable, delta, fixed_ps) {
            (SweepVariable::P, None, None)
            | (SweepVariable::PF, Some(_), None)
            | (SweepVariable::PF, None, Some(_)) => {}
            (SweepVariable::P, _, _) => return bad("delta and p_S only apply when sweeping p_F".into()),
            (SweepVariable::PF, None, None) => return bad("sweeping p_F needs either delta or a fixed p_S".into()),
            (SweepVariable::PF, Some(_), Some(_)) => return bad("give delta or a fixed p_S, not both".into()),
        }
        Ok(SweepSpec {
            variable,
            start,
            stop,
            step,
            delta,
            fixed_ps,
        })
    }

    pub fn variable(&self) -> SweepVariable {
        self.variable
    }

    /// Grid values from `start` to `stop` inclusive (when `stop` lies on the grid).
    pub fn points(&self) -> Vec<f64> {
        let (a, b) = (self.start.value(), self.stop.value());
        let n = ((b - a) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| (a + i as f64 * self.step).min(b)).collect()
    }

    pub fn profile_at(&self, v: f64) -> Option<ServeProfile> {
        let ps = match (self.variable, self.delta, self.fixed_ps) {
            (SweepVariable::P, _, _) => v,
            (_, Some(d), _) => 1.0 - v + d,
            (_, _, Some(ps)) => ps.value(),
            _ => unreachable!("validated in new"),
        };
        ServeProfile::new(v, ps).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Win,
    Bp,
    Points,
    Bps,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Win, Metric::Bp, Metric::Points, Metric::Bps];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Win => "win",
            Metric::Bp => "bp",
            Metric::Points => "points",
            Metric::Bps => "bps",
        }
    }

    /// Plot label prefix: `P`, `P_br`, `E`, `E_br`.
    pub fn symbol(self) -> &'static str {
        match self {
            Metric::Win => "P",
            Metric::Bp => "P_br",
            Metric::Points => "E",
            Metric::Bps => "E_br",
        }
    }

    pub fn of(self, m: &GameMetrics) -> Option<f64> {
        match self {
            Metric::Win => Some(m.win_prob.value()),
            Metric::Bp => m.bp_prob.map(Probability::value),
            Metric::Points => Some(m.expected_points),
            Metric::Bps => m.expected_bps,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s || m.symbol() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown metric '{s}' (win, bp, points, bps)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub game: String,
    pub metric: String,
    pub p: f64,
    pub p_f: f64,
    pub p_s: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// Grid points dropped because the profile was invalid or singular.
    pub skipped: usize,
}

/// Engine values for every game, metric and grid point. Break-point metrics
/// are left out for games where S serves.
pub fn run_sweep(games: &[RuleKind], metrics: &[Metric], spec: &SweepSpec) -> Result<SweepOutput> {
    let schedules = games.iter().map(|g| g.schedule()).collect::<Result<Vec<_>>>()?;
    let mut out = SweepOutput::default();
    for (game, sched) in games.iter().zip(&schedules) {
        for v in spec.points() {
            let Some(prof) = spec.profile_at(v) else {
                out.skipped += 1;
                continue;
            };
            let m = match metrics_exact(sched, &prof) {
                Ok(m) => m,
                Err(Error::SingularProfile { .. }) => {
                    out.skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            for metric in metrics {
                if let Some(value) = metric.of(&m) {
                    out.rows.push(SweepRow {
                        game: game.label(),
                        metric: metric.name().to_string(),
                        p: v,
                        p_f: prof.p_f(),
                        p_s: prof.p_s(),
                        value,
                    });
                }
            }
        }
    }
    Ok(out)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.game.clone(),
            r.metric.clone(),
            format!("{:.6}", r.p),
            format!("{:.6}", r.p_f),
            format!("{:.6}", r.p_s),
            format!("{:.6}", r.value),
        ])?;
    }
    w.flush()
}

pub fn read_sweep_csv<R: Read>(source: R) -> std::result::Result<Vec<SweepRow>, csv::Error> {
    csv::Reader::from_reader(source).deserialize().collect()
}

/// One plot series per (game, metric), in first-seen order.
pub fn to_series(rows: &[SweepRow]) -> Vec<Series> {
    let mut series: Vec<Series> = Vec::new();
    for r in rows {
        let symbol = r.metric.parse::<Metric>().map(Metric::symbol).unwrap_or(&r.metric);
        let label = format!("{symbol}_{}", r.game);
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((r.p, r.value)),
            None => series.push(Series {
                label,
                points: vec![(r.p, r.value)],
            }),
        }
    }
    series
}
