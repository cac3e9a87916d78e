//! Result files: CSV tables and snapshot images.
//!
//! Floats are written with six significant digits in the shortest of fixed
//! or exponent notation, `.` as decimal separator and `\n` line endings.
//! Snapshots are written both as a plain-text (P3) pixmap and as a CSV grid
//! of state codes `0=HC, 1=HD, 2=LC, 3=LD`.

use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::PopulationState;
use crate::error::{Error, Result};
use crate::experiments::{ObservableRecord, SnapshotGrid, StateCode, SweepCell};
use crate::model::classify;

pub const TIMESERIES_HEADER: &str = "step,f_c,theta,n_HC,n_HD,n_LC,n_LD,mean_payoff";
pub const SWEEP_HEADER: &str = "p,m,b_l,topology,replicates,f_c_mean,f_c_std,theta_mean";
pub const NODE_STATES_HEADER: &str = "node,strategy,reputation,state";

/// Formats `x` with six significant digits, like C's `%g`.
pub fn fmt_g6(x: f64) -> String {
    const DIGITS: i32 = 6;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // Exponent after rounding to six digits, read back from `{:e}`.
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-4..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let mantissa = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn timeseries_csv(records: &[ObservableRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.step,
            fmt_g6(r.f_c),
            fmt_g6(r.theta),
            r.n_hc,
            r.n_hd,
            r.n_lc,
            r.n_ld,
            fmt_g6(r.mean_payoff)
        );
    }
    out
}

pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut out = String::with_capacity(64 * (cells.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_g6(c.p),
            fmt_g6(c.m),
            fmt_g6(c.b_l),
            c.topology,
            c.replicates,
            fmt_g6(c.f_c_mean),
            fmt_g6(c.f_c_std),
            fmt_g6(c.theta_mean)
        );
    }
    out
}

/// Plain-text pixmap: `P3`, dimensions, maxval 255, one image row per line.
pub fn snapshot_ppm(grid: &SnapshotGrid) -> String {
    let mut out = format!("P3\n{} {}\n255\n", grid.side, grid.side);
    for row in grid.cells.chunks(grid.side) {
        let line: Vec<String> = row
            .iter()
            .map(|c| {
                let [r, g, b] = c.rgb();
                format!("{r} {g} {b}")
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// State codes, one lattice row per line.
pub fn snapshot_csv(grid: &SnapshotGrid) -> String {
    let mut out = String::with_capacity(2 * grid.cells.len() + grid.side);
    for row in grid.cells.chunks(grid.side) {
        let line: Vec<String> = row.iter().map(|c| c.code().to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Per-node states for graphs without a 2-D layout.
pub fn node_states_csv(pop: &PopulationState) -> String {
    let theta = pop.theta();
    let mut out = String::from(NODE_STATES_HEADER);
    out.push('\n');
    for (i, a) in pop.agents().iter().enumerate() {
        let state = StateCode::of(a.strategy, classify(a.reputation, theta));
        let s = if a.strategy.is_cooperator() { "C" } else { "D" };
        let _ = writeln!(out, "{i},{s},{},{}", fmt_g6(a.reputation), state.code());
    }
    out
}

/// Decodes [`snapshot_ppm`] output back into state codes.
pub fn parse_snapshot_ppm(text: &str) -> Result<Vec<StateCode>> {
    let bad = |msg: &str| Error::InvalidInput(format!("pixmap: {msg}"));
    let mut tokens = text.split_ascii_whitespace();
    if tokens.next() != Some("P3") {
        return Err(bad("missing P3 magic"));
    }
    let mut num = || -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("truncated or non-numeric data"))
    };
    let (w, h, maxval) = (num()?, num()?, num()?);
    if maxval != 255 {
        return Err(bad("maxval must be 255"));
    }
    let mut cells = Vec::with_capacity(w * h);
    for _ in 0..w * h {
        let rgb = [num()? as u8, num()? as u8, num()? as u8];
        cells.push(StateCode::from_rgb(rgb).ok_or_else(|| bad("color outside the palette"))?);
    }
    Ok(cells)
}

/// Decodes [`snapshot_csv`] output back into state codes.
pub fn parse_snapshot_csv(text: &str) -> Result<Vec<StateCode>> {
    text.lines()
        .filter(|l| !l.is_empty())
        .flat_map(|l| l.split(','))
        .map(|t| {
            t.trim()
                .parse::<u8>()
                .ok()
                .and_then(StateCode::from_code)
                .ok_or_else(|| Error::InvalidInput(format!("snapshot csv: bad code `{t}`")))
        })
        .collect()
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_timeseries_csv(records: &[ObservableRecord], path: &Path) -> Result<()> {
    write(path, &timeseries_csv(records))
}

pub fn write_sweep_csv(cells: &[SweepCell], path: &Path) -> Result<()> {
    write(path, &sweep_csv(cells))
}

pub fn write_node_states_csv(pop: &PopulationState, path: &Path) -> Result<()> {
    write(path, &node_states_csv(pop))
}

/// Writes `<stem>.ppm` and `<stem>.csv` next to each other.
pub fn write_snapshot(grid: &SnapshotGrid, stem: &Path) -> Result<()> {
    write(&stem.with_extension("ppm"), &snapshot_ppm(grid))?;
    write(&stem.with_extension("csv"), &snapshot_csv(grid))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell() -> SweepCell {
        SweepCell {
            p: 0.9,
            m: 0.1,
            b_l: 1.1,
            topology: "SL".into(),
            replicates: 10,
            f_c_mean: 0.987654321,
            f_c_std: 0.0123456789,
            theta_mean: 1.5,
            replicate_f_c: vec![],
            replicate_theta: vec![],
        }
    }

    #[test]
    fn g6_formatting() {
        assert_eq!(fmt_g6(0.0), "0");
        assert_eq!(fmt_g6(1.0), "1");
        assert_eq!(fmt_g6(0.1), "0.1");
        assert_eq!(fmt_g6(1.1), "1.1");
        assert_eq!(fmt_g6(0.987654321), "0.987654");
        assert_eq!(fmt_g6(-0.0123456789), "-0.0123457");
        assert_eq!(fmt_g6(123456.7), "123457");
        assert_eq!(fmt_g6(1234567.0), "1.23457e+06");
        assert_eq!(fmt_g6(0.00001234567), "1.23457e-05");
        assert_eq!(fmt_g6(0.0001234567), "0.000123457");
        assert_eq!(fmt_g6(999999.7), "1e+06");
        assert_eq!(fmt_g6(2.0 / 3.0), "0.666667");
    }

    #[test]
    fn empty_timeseries_is_header_only() {
        assert_eq!(timeseries_csv(&[]), format!("{TIMESERIES_HEADER}\n"));
    }

    #[test]
    fn single_cell_sweep_has_two_lines() {
        let text = sweep_csv(&[cell()]);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines[1], "0.9,0.1,1.1,SL,10,0.987654,0.0123457,1.5");
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }

    #[test]
    fn timeseries_row_format() {
        let r = ObservableRecord {
            step: 3,
            f_c: 0.5,
            theta: 1.23456789,
            n_hc: 1,
            n_hd: 2,
            n_lc: 3,
            n_ld: 4,
            mean_payoff: -0.25,
        };
        assert_eq!(
            timeseries_csv(&[r]).lines().nth(1).unwrap(),
            "3,0.5,1.23457,1,2,3,4,-0.25"
        );
    }

    #[test]
    fn all_lc_grid_bytes() {
        let grid = SnapshotGrid {
            step: 0,
            side: 3,
            cells: vec![StateCode::Lc; 9],
        };
        let pink = "240 150 170";
        let row = [pink, pink, pink].join(" ");
        assert_eq!(
            snapshot_ppm(&grid),
            format!("P3\n3 3\n255\n{row}\n{row}\n{row}\n")
        );
        assert_eq!(snapshot_csv(&grid), "2,2,2\n2,2,2\n2,2,2\n");
    }

    #[test]
    fn snapshot_encodings_cross_decode() {
        let codes = [StateCode::Hc, StateCode::Hd, StateCode::Lc, StateCode::Ld];
        let cells: Vec<_> = (0..25).map(|i| codes[(i * 7 + i / 3) % 4]).collect();
        let grid = SnapshotGrid {
            step: 9,
            side: 5,
            cells,
        };
        let from_ppm = parse_snapshot_ppm(&snapshot_ppm(&grid)).unwrap();
        let from_csv = parse_snapshot_csv(&snapshot_csv(&grid)).unwrap();
        assert_eq!(from_ppm, grid.cells);
        assert_eq!(from_csv, grid.cells);
        assert!(parse_snapshot_ppm("P3\n1 1\n255\n1 2 3\n").is_err());
        assert!(parse_snapshot_csv("0,4\n").is_err());
    }

    #[test]
    fn unwritable_path_errors() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = write_sweep_csv(&[cell()], &blocker.join("sub/out.csv")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
