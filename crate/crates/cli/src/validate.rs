//! Monte Carlo consistency report: trajectory estimates of ν against the
//! closed form, and click statistics against the optimal measurement.

use std::fmt;

use nvconf::channel::nu_ou;
use nvconf::noise::{empirical_confidence, empirical_nu, simulate_clicks, Estimate, OuParams};
use nvconf::{mc_solve, NoiseModel, Protocol};

use crate::config::SweepConfig;
use crate::error::CliError;
use crate::sweep::pair_at;

/// Largest accepted |z|.
pub const Z_MAX: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub std_err: f64,
    pub expected: f64,
    pub z: f64,
}

impl Check {
    fn new(name: String, est: Estimate, expected: f64) -> Self {
        Check { name, observed: est.value, std_err: est.std_err, expected, z: est.z(expected) }
    }

    pub fn pass(&self) -> bool {
        self.z <= Z_MAX
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: observed {:.6e} ± {:.3e}, expected {:.6e}, z = {:.3}",
            if self.pass() { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.std_err,
            self.expected,
            self.z
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.notes {
            writeln!(f, "NOTE {n}")?;
        }
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.pass()).count();
        writeln!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

/// Axis values for the trajectory checks: `point` if set, else three
/// interior grid points.
fn sample_points(config: &SweepConfig) -> Result<Vec<f64>, CliError> {
    if let Some(x) = config.point {
        return Ok(vec![x]);
    }
    let g: Vec<f64> = config.grid()?.iter().copied().filter(|&x| x > 0.0).collect();
    let n = g.len();
    let mut pts: Vec<f64> = [n / 4, n / 2, (3 * n) / 4].into_iter().filter(|&i| i < n).map(|i| g[i]).collect();
    pts.dedup();
    Ok(pts)
}

/// Time step for the trajectory integration at one protocol.
fn step(tau_c: f64, protocol: &Protocol) -> f64 {
    let mut dt = (tau_c / 50.0).min(protocol.total_time() / 200.0);
    if let Protocol::Cpmg { tau, .. } = *protocol {
        dt = dt.min(tau / 50.0);
    }
    dt
}

pub fn run_validate(config: &SweepConfig) -> Result<Report, CliError> {
    let mut report = Report::default();

    match config.noise {
        NoiseModel::OuCpmg { kappa, tau_c } => {
            for x in sample_points(config)? {
                let protocol = config.protocol(x)?;
                let xi = protocol.switching()?;
                let params = OuParams { kappa, tau_c, dt: step(tau_c, &protocol), seed: config.seed, n_traj: config.n_traj };
                let est = empirical_nu(&params, &xi)?;
                let axis = config.axis().header();
                report.checks.push(Check::new(format!("nu at {axis} = {x}"), est.nu, nu_ou(kappa, tau_c, &xi)?));
                report.checks.push(Check::new(format!("Im average at {axis} = {x}"), est.imag, 0.0));
            }
        }
        _ => report.notes.push("noise model has no trajectory representation; nu checks skipped".into()),
    }

    // click test at `point`, or at the grid point of highest C0_max
    let x = match config.point {
        Some(x) => x,
        None => {
            let mut best = (f64::NEG_INFINITY, 0.0);
            for &x in config.grid()? {
                let c0 = mc_solve(&pair_at(config, x)?)?.c0_max;
                if c0 > best.0 {
                    best = (c0, x);
                }
            }
            best.1
        }
    };
    let pair = pair_at(config, x)?;
    let sol = mc_solve(&pair)?;
    let tally = simulate_clicks(&sol.povm, &pair, config.shots, config.seed)?;
    let emp = empirical_confidence(&tally)?;
    let axis = config.axis().header();
    report.notes.push(format!("click test at {axis} = {x}, branch {}, {} shots", sol.branch, config.shots));
    for (name, est, want) in [("C0", emp.c0, sol.c0_max), ("C1", emp.c1, sol.c1_max)] {
        match est {
            Some(e) => report.checks.push(Check::new(format!("{name} at {axis} = {x}"), e, want)),
            None => report.notes.push(format!("{name}: detector never fired")),
        }
    }
    report.checks.push(Check::new(format!("P_inc at {axis} = {x}"), emp.p_inc, sol.p_inc_opt));
    Ok(report)
}
