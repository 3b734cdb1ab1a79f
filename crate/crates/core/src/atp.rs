//! Player serve statistics, the blended point-win chance, and the fit of the
//! existing-game model against observed service games won.
//!
//! Input is a comma-separated table with header
//! `rank,name,p_f_in,p_f_won,p_s_won,p_t_won`. Rates are decimals in `[0, 1]`;
//! percentages (62 instead of 0.62) are rejected. Lines starting with `#` are
//! comments. `p_t_won` is read as the share of service games won.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::closed_form::p_win_t;
use crate::error::{Error, Result};
use crate::types::Probability;

pub const STATS_HEADER: [&str; 6] = ["rank", "name", "p_f_in", "p_f_won", "p_s_won", "p_t_won"];

/// The bundled sample table.
pub const SAMPLE_STATS_CSV: &str = include_str!("../data/sample_stats.csv");

/// Upper bound accepted for the double-fault rate.
pub const MAX_DOUBLE_FAULT_RATE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerStats {
    pub rank: u32,
    pub name: String,
    /// First serve in.
    pub p_f_in: Probability,
    /// Point won behind a first serve.
    pub p_f_won: Probability,
    /// Point won behind a second serve.
    pub p_s_won: Probability,
    /// Service games won.
    pub p_t_won: Probability,
}

impl PlayerStats {
    pub fn new(rank: u32, name: impl Into<String>, rates: [f64; 4]) -> Result<Self> {
        let [p_f_in, p_f_won, p_s_won, p_t_won] = rates;
        Ok(PlayerStats {
            rank,
            name: name.into(),
            p_f_in: Probability::new(p_f_in)?,
            p_f_won: Probability::new(p_f_won)?,
            p_s_won: Probability::new(p_s_won)?,
            p_t_won: Probability::new(p_t_won)?,
        })
    }
}

#[derive(Debug, Deserialize)]
struct RawRow {
    rank: u32,
    name: String,
    p_f_in: f64,
    p_f_won: f64,
    p_s_won: f64,
    p_t_won: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsFile {
    pub players: Vec<PlayerStats>,
    pub warnings: Vec<String>,
}

fn line_of(pos: Option<&csv::Position>) -> u64 {
    pos.map(|p| p.line()).unwrap_or(0)
}

pub fn parse_stats<R: Read>(source: R) -> Result<StatsFile> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: line_of(e.position()),
            message: e.to_string(),
        })?
        .clone();
    if headers.iter().ne(STATS_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: line_of(headers.position()),
            message: format!(
                "expected header `{}`, found `{}`",
                STATS_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut players = Vec::new();
    let mut warnings = Vec::new();
    let mut seen_ranks: HashMap<u32, u64> = HashMap::new();

    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: line_of(e.position()),
            message: e.to_string(),
        })?;
        let line = line_of(record.position());
        let raw: RawRow = record.deserialize(Some(&headers)).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;

        let check =
            |field: &'static str, value: f64| Probability::new(value).map_err(|_| Error::Range { line, field, value });
        let stats = PlayerStats {
            rank: raw.rank,
            p_f_in: check("p_f_in", raw.p_f_in)?,
            p_f_won: check("p_f_won", raw.p_f_won)?,
            p_s_won: check("p_s_won", raw.p_s_won)?,
            p_t_won: check("p_t_won", raw.p_t_won)?,
            name: raw.name,
        };
        if stats.rank == 0 {
            return Err(Error::Parse {
                line,
                message: "rank must be at least 1".into(),
            });
        }
        if let Some(first) = seen_ranks.insert(stats.rank, line) {
            warnings.push(format!("line {line}: rank {} already used on line {first}", stats.rank));
        }
        players.push(stats);
    }
    Ok(StatsFile { players, warnings })
}

/// Point-win chance on serve, blending first- and second-serve points by
/// the first-serve-in rate.
pub fn p_emp(stats: &PlayerStats) -> Probability {
    let first_in = stats.p_f_in.value();
    let blended = first_in * stats.p_f_won.value() + (1.0 - first_in) * stats.p_s_won.value();
    Probability::saturating(blended)
}

/// Removes the share of points lost to double faults: `p_emp * (1 - p_dbl)`.
pub fn dbl_fault_correct(p_emp: Probability, p_dbl: Probability) -> Result<Probability> {
    if p_dbl.value() > MAX_DOUBLE_FAULT_RATE {
        return Err(Error::DoubleFaultRange(p_dbl.value()));
    }
    Ok(Probability::saturating(p_emp.value() * p_dbl.complement()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRow {
    pub stats: PlayerStats,
    pub p_emp: Probability,
    pub predicted: Probability,
    /// Observed minus predicted.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitSummary {
    pub count: usize,
    pub max_abs_residual: f64,
    pub mean_residual: f64,
    /// Rows whose observation sits on or below the model curve.
    pub non_positive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub rows: Vec<FitRow>,
    pub summary: FitSummary,
}

pub fn fit_report(players: &[PlayerStats]) -> Result<FitReport> {
    if players.is_empty() {
        return Err(Error::EmptyInput);
    }
    let rows: Vec<FitRow> = players
        .iter()
        .map(|stats| {
            let p = p_emp(stats);
            let predicted = p_win_t(p);
            FitRow {
                stats: stats.clone(),
                p_emp: p,
                predicted,
                residual: stats.p_t_won.value() - predicted.value(),
            }
        })
        .collect();

    let count = rows.len();
    let summary = FitSummary {
        count,
        max_abs_residual: rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max),
        mean_residual: rows.iter().map(|r| r.residual).sum::<f64>() / count as f64,
        non_positive: rows.iter().filter(|r| r.residual <= 0.0).count(),
    };
    Ok(FitReport { rows, summary })
}

/// Writes `rank,name,p_emp,predicted,observed,residual`.
pub fn write_fit_csv<W: Write>(report: &FitReport, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "name", "p_emp", "predicted", "observed", "residual"])?;
    for row in &report.rows {
        w.write_record([
            row.stats.rank.to_string(),
            row.stats.name.clone(),
            format!("{:.6}", row.p_emp.value()),
            format!("{:.6}", row.predicted.value()),
            format!("{:.6}", row.stats.p_t_won.value()),
            format!("{:.6}", row.residual),
        ])?;
    }
    w.flush()
}

impl fmt::Display for FitSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "players:             {}", self.count)?;
        writeln!(f, "max |residual|:      {:.6}", self.max_abs_residual)?;
        writeln!(f, "mean residual:       {:.6}", self.mean_residual)?;
        write!(f, "residuals <= 0:      {} of {}", self.non_positive, self.count)
    }
}
