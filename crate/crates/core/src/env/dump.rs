//! Line-oriented snapshot format used by golden-file tests.
//!
//! ```text
//! # t=<t> season=<Summer|Winter> season_step=<k> width=<w> height=<h>
//! x y seeds1 seeds2 growth1 growth2 water_source watered w_time p3 agents
//! ```
//!
//! Booleans are written as `0`/`1`; reals use the shortest representation
//! that round-trips exactly.

use std::fmt::Write as _;

use super::{CellState, EnvState};
use crate::error::{Error, Result};

pub fn write_dump(state: &EnvState) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# t={} season={:?} season_step={} width={} height={}",
        state.t,
        state.season,
        state.season_step,
        state.width(),
        state.height()
    );
    for y in 0..state.height() {
        for x in 0..state.width() {
            let c = state.cell(x, y);
            let _ = writeln!(
                out,
                "{x} {y} {} {} {} {} {} {} {} {} {}",
                c.seeds1,
                c.seeds2,
                c.growth1,
                c.growth2,
                u8::from(c.water_source),
                u8::from(c.watered),
                c.w_time,
                u8::from(c.p3_present),
                c.agents_here
            );
        }
    }
    out
}

/// Parse the cell lines of a dump back into `(x, y, cell)` triples.
pub fn parse_dump(text: &str) -> Result<Vec<(usize, usize, CellState)>> {
    fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T> {
        tok.and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("dump line {line}")))
    }
    fn flag(tok: Option<&str>, line: usize) -> Result<bool> {
        Ok(field::<u8>(tok, line)? != 0)
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
        .map(|(n, l)| {
            let mut it = l.split_whitespace();
            let x = field(it.next(), n)?;
            let y = field(it.next(), n)?;
            let cell = CellState {
                seeds1: field(it.next(), n)?,
                seeds2: field(it.next(), n)?,
                growth1: field(it.next(), n)?,
                growth2: field(it.next(), n)?,
                water_source: flag(it.next(), n)?,
                watered: flag(it.next(), n)?,
                w_time: field(it.next(), n)?,
                p3_present: flag(it.next(), n)?,
                agents_here: field(it.next(), n)?,
            };
            Ok((x, y, cell))
        })
        .collect()
}
