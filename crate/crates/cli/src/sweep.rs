//! Grid sweeps through the channel → discrimination pipeline.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

use nvconf::{conditional_error, helstrom, mc_solve, state_pair_at, threshold_measurement, Branch, Error, StatePair, C64};

use crate::config::SweepConfig;
use crate::error::CliError;

/// Columns after the axis column, in output order.
pub const COLUMNS: [&str; 13] = [
    "nu",
    "abs_mu",
    "arg_mu",
    "C0_max",
    "C1_max",
    "P_inc_opt",
    "C0_thresh",
    "C1_thresh",
    "P_inc_thresh",
    "helstrom_err",
    "cond_err",
    "rel_err",
    "branch",
];

/// Below this the Helstrom error is treated as zero and `rel_err` is NA.
const HELSTROM_FLOOR: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholded {
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub p_inc: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub axis: f64,
    pub nu: f64,
    pub mu: C64,
    pub c0_max: f64,
    pub c1_max: f64,
    pub p_inc_opt: f64,
    /// Present when the config sets `p_inc_threshold`.
    pub thresh: Option<Thresholded>,
    pub helstrom_err: f64,
    /// Conditional error of the thresholded measurement if there is one,
    /// else of the maximum-confidence measurement.
    pub cond_err: Option<f64>,
    pub rel_err: Option<f64>,
    pub branch: Branch,
}

pub fn pair_at(config: &SweepConfig, x: f64) -> Result<StatePair, CliError> {
    Ok(state_pair_at(&config.noise, &config.field, &config.protocol(x)?, config.eta0)?)
}

pub fn compute_row(config: &SweepConfig, x: f64) -> Result<SweepRow, CliError> {
    let pair = pair_at(config, x)?;
    let sol = mc_solve(&pair)?;
    let helstrom_err = helstrom(&pair)?;
    let (thresh, povm) = match config.p_inc_threshold {
        Some(p) => {
            let t = threshold_measurement(&sol, &pair, p)?;
            (Some(Thresholded { c0: t.c0, c1: t.c1, p_inc: t.p_inc }), t.povm)
        }
        None => (None, sol.povm),
    };
    let cond_err = match conditional_error(&povm, &pair) {
        Ok(e) => Some(e),
        Err(Error::AllInconclusive) => None,
        Err(e) => return Err(e.into()),
    };
    let rel_err = cond_err.filter(|_| helstrom_err > HELSTROM_FLOOR).map(|e| e / helstrom_err);
    Ok(SweepRow {
        axis: x,
        nu: pair.nu,
        mu: pair.mu,
        c0_max: sol.c0_max,
        c1_max: sol.c1_max,
        p_inc_opt: sol.p_inc_opt,
        thresh,
        helstrom_err,
        cond_err,
        rel_err,
        branch: sol.branch,
    })
}

/// One row per grid point, in grid order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>, CliError> {
    config.grid()?.par_iter().map(|&x| compute_row(config, x)).collect()
}

fn num(out: &mut String, x: Option<f64>) {
    match x {
        Some(v) => write!(out, "{v:.16e}").expect("writing to a String"),
        None => out.push_str("NA"),
    }
}

pub fn header(config: &SweepConfig) -> String {
    let mut h = config.axis().header().to_owned();
    for c in COLUMNS {
        h.push(',');
        h.push_str(c);
    }
    h
}

pub fn format_row(row: &SweepRow) -> String {
    let mut s = String::new();
    let t = row.thresh;
    let cells = [
        Some(row.axis),
        Some(row.nu),
        Some(row.mu.norm()),
        Some(row.mu.arg()),
        Some(row.c0_max),
        Some(row.c1_max),
        Some(row.p_inc_opt),
        t.and_then(|t| t.c0),
        t.and_then(|t| t.c1),
        t.map(|t| t.p_inc),
        Some(row.helstrom_err),
        row.cond_err,
        row.rel_err,
    ];
    for (i, c) in cells.into_iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        num(&mut s, c);
    }
    s.push(',');
    s.push_str(row.branch.as_str());
    s
}

pub fn to_csv(config: &SweepConfig, rows: &[SweepRow]) -> String {
    let mut s = header(config);
    s.push('\n');
    for r in rows {
        s.push_str(&format_row(r));
        s.push('\n');
    }
    s
}

/// Runs the sweep and writes the CSV to `config.out`, or to `stdout` when no
/// output path is set.
pub fn write_sweep(config: &SweepConfig, stdout: &mut dyn Write) -> Result<Vec<SweepRow>, CliError> {
    let rows = run_sweep(config)?;
    let csv = to_csv(config, &rows);
    match &config.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
            }
            std::fs::write(path, csv).map_err(CliError::io(path))?
        }
        None => stdout.write_all(csv.as_bytes()).map_err(CliError::io("<stdout>"))?,
    }
    Ok(rows)
}
