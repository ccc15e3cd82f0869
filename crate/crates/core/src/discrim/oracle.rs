//! Brute-force search over rank-one measurements.
//!
//! Independent of the closed form in the parent module: detector directions
//! are scanned on a polar/azimuthal Bloch-sphere grid, weights on a uniform
//! grid in [0, 1], and positivity of Π_? is checked through its eigenvalues.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::channel::StatePair;
use crate::error::{ensure, Result};
use crate::qmat::{c, cr, herm_eig2, CMat2, Ket2};

pub const ORACLE_MIN_DENSITY: usize = 64;

/// Directions whose confidence is this close to the best found are
/// candidates when minimizing the inconclusive rate.
const CONFIDENCE_SLACK: f64 = 1e-3;
/// At most this many slack candidates per outcome, highest confidence first.
const MAX_CANDIDATES: usize = 32;
/// Tolerance on the smallest eigenvalue of Π_?.
const PSD_SLACK: f64 = 1e-12;
/// Zoom levels of the local direction search, each 4× finer.
const REFINE_LEVELS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleResult {
    pub c0: f64,
    pub c1: f64,
    /// Smallest inconclusive rate among measurements whose confidences are
    /// within the slack of `c0` and `c1`.
    pub p_inc: f64,
    pub v: Ket2,
    pub w: Ket2,
    pub a: f64,
    pub b: f64,
}

fn ket(theta: f64, phi: f64) -> Ket2 {
    let (ct, st) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    [cr(ct), c(st * phi.cos(), st * phi.sin())]
}

/// (θ, φ) pairs: θ = πi/n for i = 0..=n, φ = 2πk/n, one azimuth at the poles.
fn bloch_grid(density: usize) -> Vec<(f64, f64)> {
    let mut dirs = Vec::with_capacity(density * density);
    for i in 0..=density {
        let theta = PI * i as f64 / density as f64;
        let azimuths = if i == 0 || i == density { 1 } else { density };
        for k in 0..azimuths {
            dirs.push((theta, 2.0 * PI * k as f64 / density as f64));
        }
    }
    dirs
}

#[derive(Clone, Copy)]
struct Scored {
    dir: Ket2,
    conf: f64,
    weight: f64,
}

fn score(pair: &StatePair, j: usize, dir: Ket2) -> Option<Scored> {
    let fire = pair.rho.expect(&dir);
    (fire > 1e-14).then(|| Scored { dir, conf: pair.eta(j) * pair.state(j).expect(&dir) / fire, weight: fire })
}

/// Grid scan for outcome j, then zoomed local scans around the best point.
/// Returns the refined best and every coarse grid point.
fn search(pair: &StatePair, j: usize, density: usize) -> (Scored, Vec<Scored>) {
    let grid = bloch_grid(density);
    let coarse: Vec<(f64, f64, Scored)> =
        grid.iter().filter_map(|&(t, p)| score(pair, j, ket(t, p)).map(|s| (t, p, s))).collect();
    let &(mut theta, mut phi, mut top) = coarse.iter().max_by(|x, y| x.2.conf.total_cmp(&y.2.conf)).expect("grid is never empty");
    let mut step = PI / density as f64;
    for _ in 0..REFINE_LEVELS {
        step /= 4.0;
        let (t0, p0) = (theta, phi);
        for di in -8..=8 {
            for dk in -8..=8 {
                let (t, p) = (t0 + di as f64 * step, p0 + dk as f64 * step);
                if let Some(s) = score(pair, j, ket(t, p)) {
                    if s.conf > top.conf {
                        (theta, phi, top) = (t, p, s);
                    }
                }
            }
        }
    }
    (top, coarse.into_iter().map(|x| x.2).collect())
}

/// Best confidences over the refined direction search.
pub fn oracle_confidences(pair: &StatePair, grid_density: usize) -> Result<(f64, f64)> {
    ensure(grid_density >= ORACLE_MIN_DENSITY, "grid_density", grid_density as f64, ">= 64")?;
    Ok((search(pair, 0, grid_density).0.conf, search(pair, 1, grid_density).0.conf))
}

fn inconclusive_is_psd(a: f64, v: &Ket2, b: f64, w: &Ket2) -> bool {
    let pi_inc = CMat2::identity() - CMat2::projector(v) * a - CMat2::projector(w) * b;
    herm_eig2(&pi_inc).map(|e| e.min() >= -PSD_SLACK).unwrap_or(false)
}

/// Largest b in [0, 1] keeping Π_? positive for the given a, by bisection.
fn max_b(a: f64, v: &Ket2, w: &Ket2) -> Option<f64> {
    if !inconclusive_is_psd(a, v, 0.0, w) {
        return None;
    }
    if inconclusive_is_psd(a, v, 1.0, w) {
        return Some(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if inconclusive_is_psd(a, v, mid, w) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Smallest P_inc for fixed directions: a on a uniform grid, b maximal for
/// each a, then a ternary search between the grid neighbours of the best a
/// (the feasible set is convex, so P_inc is convex along its boundary).
fn best_weights(x: &Scored, y: &Scored, density: usize) -> (f64, f64, f64) {
    let p_at = |a: f64| max_b(a, &x.dir, &y.dir).map(|b| (1.0 - a * x.weight - b * y.weight, a, b));
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let mut best_k = 0;
    for k in 0..density {
        let a = k as f64 / (density - 1) as f64;
        match p_at(a) {
            Some(r) if r.0 < best.0 => {
                best = r;
                best_k = k;
            }
            Some(_) => {}
            None => break,
        }
    }
    let h = 1.0 / (density - 1) as f64;
    let (mut lo, mut hi) = ((best_k as f64 - 1.0).max(0.0) * h, ((best_k + 1) as f64 * h).min(1.0));
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        let p1 = p_at(m1).map_or(f64::INFINITY, |r| r.0);
        let p2 = p_at(m2).map_or(f64::INFINITY, |r| r.0);
        if p1 <= p2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    if let Some(r) = p_at(0.5 * (lo + hi)) {
        if r.0 < best.0 {
            best = r;
        }
    }
    best
}

/// Exhaustive search for the best rank-one three-outcome measurement, with
/// detector directions allowed within `CONFIDENCE_SLACK` of the best
/// confidences when minimizing the inconclusive rate.
pub fn povm_oracle(pair: &StatePair, grid_density: usize) -> Result<OracleResult> {
    povm_oracle_with_slack(pair, grid_density, CONFIDENCE_SLACK)
}

/// As [`povm_oracle`] with an explicit confidence slack. With `slack = 0`
/// only the best directions are used, which pins down the inconclusive rate
/// of the maximum-confidence measurement itself.
pub fn povm_oracle_with_slack(pair: &StatePair, grid_density: usize, slack: f64) -> Result<OracleResult> {
    ensure(grid_density >= ORACLE_MIN_DENSITY, "grid_density", grid_density as f64, ">= 64")?;
    ensure(slack >= 0.0, "slack", slack, ">= 0")?;
    let (top0, s0) = search(pair, 0, grid_density);
    let (top1, s1) = search(pair, 1, grid_density);
    let near = |top: Scored, all: Vec<Scored>| {
        let mut rest: Vec<Scored> = all.into_iter().filter(|s| slack > 0.0 && s.conf >= top.conf - slack).collect();
        rest.sort_by(|x, y| y.conf.total_cmp(&x.conf));
        rest.truncate(MAX_CANDIDATES);
        let mut v = vec![top];
        v.extend(rest);
        v
    };
    let near0 = near(top0, s0);
    let near1 = near(top1, s1);
    let pairs: Vec<(&Scored, &Scored)> = near0.iter().flat_map(|x| near1.iter().map(move |y| (x, y))).collect();

    let found: Vec<((f64, f64, f64), Ket2, Ket2)> =
        pairs.par_iter().map(|(x, y)| (best_weights(x, y, grid_density), x.dir, y.dir)).collect();
    let ((p_inc, a, b), v, w) = found
        .into_iter()
        .min_by(|l, r| l.0 .0.total_cmp(&r.0 .0))
        .expect("at least the best pair is searched");
    Ok(OracleResult { c0: top0.conf, c1: top1.conf, p_inc: p_inc.clamp(0.0, 1.0), v, w, a, b })
}
