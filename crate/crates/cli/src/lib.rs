//! Support code for the `deuce` binary: parameter sweeps with their CSV
//! format, and a small SVG line-chart writer.

pub mod svg;
pub mod sweep;
