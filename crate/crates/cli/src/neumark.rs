//! Text dump of the Neumark construction at one parameter point.

use std::fmt::Write as _;

use nvconf::dilation::compose;
use nvconf::{decompose_two_level, dilate, mc_solve, CMat2, CMat3, Outcome, Povm, StatePair, C64};

use crate::config::SweepConfig;
use crate::error::CliError;
use crate::sweep::pair_at;

fn cx(z: C64) -> String {
    format!("{:+.12e}{:+.12e}i", z.re, z.im)
}

fn mat2(out: &mut String, name: &str, m: &CMat2) {
    writeln!(out, "{name} =").unwrap();
    for i in 0..2 {
        writeln!(out, "  [{}, {}]", cx(m[(i, 0)]), cx(m[(i, 1)])).unwrap();
    }
}

fn mat3(out: &mut String, name: &str, m: &CMat3) {
    writeln!(out, "{name} =").unwrap();
    for i in 0..3 {
        writeln!(out, "  [{}, {}, {}]", cx(m[(i, 0)]), cx(m[(i, 1)]), cx(m[(i, 2)])).unwrap();
    }
}

/// Dilation report for an arbitrary measurement of `pair`.
pub fn dump_povm(povm: &Povm, pair: &StatePair) -> Result<(String, f64), CliError> {
    let d = dilate(povm)?;
    let factors = decompose_two_level(&d.u)?;
    let residual = d.born_residual(povm, pair);
    let mut out = String::new();
    for k in Outcome::ALL {
        mat2(&mut out, &format!("Pi_{k}"), povm.element(k));
    }
    writeln!(out, "c = [{}, {}, {}]", cx(d.c[0]), cx(d.c[1]), cx(d.c[2])).unwrap();
    mat3(&mut out, "U", &d.u);
    writeln!(out, "unitarity_error = {:.3e}", d.u.unitarity_error()).unwrap();
    writeln!(out, "two_level_factors = {}", factors.len()).unwrap();
    for (i, f) in factors.iter().enumerate() {
        mat2(&mut out, &format!("  factor {i} on {f}"), &f.block);
    }
    writeln!(out, "reconstruction_error = {:.3e}", compose(&factors).max_abs_diff(&d.u)).unwrap();
    writeln!(out, "born_residual = {residual:.3e}").unwrap();
    Ok((out, residual))
}

/// Dump for the maximum-confidence measurement at the config's `point`.
pub fn run_neumark(config: &SweepConfig) -> Result<String, CliError> {
    let x = config.point()?;
    let pair = pair_at(config, x)?;
    let sol = mc_solve(&pair)?;
    let mut out = String::new();
    writeln!(out, "scenario = {}", config.scenario).unwrap();
    writeln!(out, "{} = {x}", config.axis().header()).unwrap();
    writeln!(out, "nu = {:.16e}", pair.nu).unwrap();
    writeln!(out, "mu = {}", cx(pair.mu)).unwrap();
    writeln!(out, "eta0 = {}", pair.eta0).unwrap();
    writeln!(out, "branch = {}", sol.branch).unwrap();
    writeln!(out, "C0_max = {:.16e}", sol.c0_max).unwrap();
    writeln!(out, "C1_max = {:.16e}", sol.c1_max).unwrap();
    writeln!(out, "P_inc_opt = {:.16e}", sol.p_inc_opt).unwrap();
    out.push_str(&dump_povm(&sol.povm, &pair)?.0);
    Ok(out)
}
