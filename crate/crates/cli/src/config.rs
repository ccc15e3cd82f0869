//! Flat `key = value` sweep configuration.
//!
//! Blank lines and text after `#` are ignored. Keys are case-sensitive and may
//! appear once. Keys that the chosen scenario does not use are rejected so a
//! typo never silently falls back to a default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nvconf::{FieldModel, NoiseModel, Protocol};

use crate::error::CliError;

pub const KNOWN_KEYS: [&str; 23] = [
    "scenario",
    "b0_uT",
    "sigma_b_uT",
    "f_MHz",
    "kappa_per_us",
    "tau_c_us",
    "T2_star_us",
    "p",
    "s",
    "T2_us",
    "delta_ms",
    "eta0",
    "p_inc_threshold",
    "grid_start",
    "grid_stop",
    "grid_points",
    "grid_scale",
    "point",
    "seed",
    "shots",
    "n_traj",
    "out",
    "label",
];

/// Keys accepted by every scenario.
const COMMON_KEYS: [&str; 13] = [
    "scenario",
    "b0_uT",
    "eta0",
    "p_inc_threshold",
    "grid_start",
    "grid_stop",
    "grid_points",
    "grid_scale",
    "point",
    "seed",
    "shots",
    "n_traj",
    "out",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    StaticSingle,
    StaticGaussianSingle,
    CpmgSingle,
    StaticEnsemble,
    StaticEnsembleDq,
    GaussianEnsemble,
    CpmgEnsemble,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::StaticSingle,
        Scenario::StaticGaussianSingle,
        Scenario::CpmgSingle,
        Scenario::StaticEnsemble,
        Scenario::StaticEnsembleDq,
        Scenario::GaussianEnsemble,
        Scenario::CpmgEnsemble,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::StaticSingle => "static_single",
            Scenario::StaticGaussianSingle => "static_gaussian_single",
            Scenario::CpmgSingle => "cpmg_single",
            Scenario::StaticEnsemble => "static_ensemble",
            Scenario::StaticEnsembleDq => "static_ensemble_dq",
            Scenario::GaussianEnsemble => "gaussian_ensemble",
            Scenario::CpmgEnsemble => "cpmg_ensemble",
        }
    }

    pub fn axis(self) -> AxisKind {
        match self {
            Scenario::CpmgSingle | Scenario::CpmgEnsemble => AxisKind::Pulses,
            _ => AxisKind::Time,
        }
    }

    fn is_ensemble(self) -> bool {
        matches!(self, Scenario::StaticEnsemble | Scenario::StaticEnsembleDq | Scenario::GaussianEnsemble | Scenario::CpmgEnsemble)
    }

    fn extra_keys(self) -> &'static [&'static str] {
        match self {
            Scenario::StaticSingle => &["kappa_per_us", "tau_c_us", "T2_star_us", "p", "label"],
            Scenario::StaticGaussianSingle => &["sigma_b_uT", "kappa_per_us", "tau_c_us", "T2_star_us", "p", "label"],
            Scenario::CpmgSingle => &["sigma_b_uT", "f_MHz", "kappa_per_us", "tau_c_us", "label"],
            Scenario::StaticEnsemble => &["T2_star_us", "p", "delta_ms", "label"],
            Scenario::StaticEnsembleDq => &["T2_star_us", "p", "delta_ms", "label"],
            Scenario::GaussianEnsemble => &["sigma_b_uT", "T2_star_us", "p", "label"],
            Scenario::CpmgEnsemble => &["sigma_b_uT", "f_MHz", "T2_us", "s", "p", "label"],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Scenario::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| CliError::Invalid {
            key: "scenario",
            value: s.to_owned(),
            reason: "expected one of static_single, static_gaussian_single, cpmg_single, static_ensemble, static_ensemble_dq, gaussian_ensemble, cpmg_ensemble".into(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisKind {
    /// Free-evolution time T in µs.
    Time,
    /// CPMG pulse count N.
    Pulses,
}

impl AxisKind {
    pub fn header(self) -> &'static str {
        match self {
            AxisKind::Time => "T_us",
            AxisKind::Pulses => "N",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridScale {
    Lin,
    Log,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub scenario: Scenario,
    pub label: Option<String>,
    pub noise: NoiseModel,
    pub field: FieldModel,
    pub eta0: f64,
    pub p_inc_threshold: Option<f64>,
    /// Strictly increasing axis values; `None` when no grid keys are given.
    pub grid: Option<Vec<f64>>,
    pub point: Option<f64>,
    pub seed: u64,
    pub shots: u64,
    pub n_traj: usize,
    pub out: Option<PathBuf>,
}

impl SweepConfig {
    pub fn axis(&self) -> AxisKind {
        self.scenario.axis()
    }

    /// Protocol at one axis value: free evolution for T, CPMG at the field
    /// nodes for N.
    pub fn protocol(&self, x: f64) -> Result<Protocol, CliError> {
        Ok(match self.axis() {
            AxisKind::Time => Protocol::Free { t: x },
            AxisKind::Pulses => Protocol::cpmg_at_nodes(x as u32, self.field.f)?,
        })
    }

    pub fn grid(&self) -> Result<&[f64], CliError> {
        self.grid.as_deref().ok_or(CliError::Missing { key: "grid_start", scenario: self.scenario })
    }

    pub fn point(&self) -> Result<f64, CliError> {
        self.point.ok_or(CliError::Missing { key: "point", scenario: self.scenario })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        Raw::parse(text)?.build()
    }
}

struct Raw {
    map: BTreeMap<String, (usize, String)>,
}

impl Raw {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Syntax { line: i + 1, message: format!("expected `key = value`, got `{line}`") })?;
            let (k, v) = (k.trim(), v.trim());
            if !KNOWN_KEYS.contains(&k) {
                return Err(CliError::UnknownKey { line: i + 1, key: k.to_owned() });
            }
            if map.insert(k.to_owned(), (i + 1, v.to_owned())).is_some() {
                return Err(CliError::Syntax { line: i + 1, message: format!("duplicate key `{k}`") });
            }
        }
        Ok(Raw { map })
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(_, v)| v.as_str())
    }

    fn get<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, CliError> {
        match self.str(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Invalid { key, value: v.to_owned(), reason: "not a valid number".into() }),
        }
    }

    fn f64(&self, key: &'static str) -> Result<Option<f64>, CliError> {
        match self.get::<f64>(key)? {
            Some(x) if !x.is_finite() => Err(CliError::Invalid { key, value: x.to_string(), reason: "must be finite".into() }),
            other => Ok(other),
        }
    }

    fn need(&self, key: &'static str, scenario: Scenario) -> Result<f64, CliError> {
        self.f64(key)?.ok_or(CliError::Missing { key, scenario })
    }

    fn build(&self) -> Result<SweepConfig, CliError> {
        let scenario: Scenario = self.str("scenario").ok_or(CliError::MissingScenario)?.parse()?;
        for key in self.map.keys() {
            if !COMMON_KEYS.contains(&key.as_str()) && !scenario.extra_keys().contains(&key.as_str()) {
                return Err(CliError::NotApplicable { key: key.clone(), scenario });
            }
        }

        let b0 = self.need("b0_uT", scenario)?;
        let default_p = if scenario.is_ensemble() { 1.0 } else { 2.0 };
        let p = self.f64("p")?.unwrap_or(default_p);

        let noise = match scenario {
            Scenario::StaticSingle | Scenario::StaticGaussianSingle => {
                let ou = (self.f64("kappa_per_us")?, self.f64("tau_c_us")?);
                let stretched = self.f64("T2_star_us")?;
                match (ou, stretched) {
                    ((Some(kappa), Some(tau_c)), None) if self.str("p").is_none() => NoiseModel::OuCpmg { kappa, tau_c },
                    ((None, None), Some(t2_star)) => NoiseModel::StretchedExp { t2_star, p },
                    ((None, None), None) => return Err(CliError::Missing { key: "kappa_per_us", scenario }),
                    ((Some(_), None), None) => return Err(CliError::Missing { key: "tau_c_us", scenario }),
                    ((None, Some(_)), None) => return Err(CliError::Missing { key: "kappa_per_us", scenario }),
                    _ => {
                        return Err(CliError::Conflict {
                            message: "give either kappa_per_us and tau_c_us, or T2_star_us with optional p".into(),
                        })
                    }
                }
            }
            Scenario::CpmgSingle => {
                NoiseModel::OuCpmg { kappa: self.need("kappa_per_us", scenario)?, tau_c: self.need("tau_c_us", scenario)? }
            }
            Scenario::StaticEnsemble | Scenario::StaticEnsembleDq | Scenario::GaussianEnsemble => {
                NoiseModel::StretchedExp { t2_star: self.need("T2_star_us", scenario)?, p }
            }
            Scenario::CpmgEnsemble => {
                NoiseModel::EnsembleCpmg { t2: self.need("T2_us", scenario)?, s: self.f64("s")?.unwrap_or(2.0 / 3.0), p }
            }
        };
        noise.validate()?;

        let delta_ms = match (scenario, self.get::<u8>("delta_ms")?) {
            (Scenario::StaticEnsembleDq, None | Some(2)) => 2,
            (Scenario::StaticEnsembleDq, Some(d)) => {
                return Err(CliError::Invalid { key: "delta_ms", value: d.to_string(), reason: "must be 2 for static_ensemble_dq".into() })
            }
            (_, d) => d.unwrap_or(1),
        };
        let field = match scenario {
            Scenario::StaticSingle | Scenario::StaticEnsemble | Scenario::StaticEnsembleDq => FieldModel::static_known(b0),
            Scenario::StaticGaussianSingle | Scenario::GaussianEnsemble => {
                FieldModel::static_gaussian(b0, self.need("sigma_b_uT", scenario)?)
            }
            Scenario::CpmgSingle | Scenario::CpmgEnsemble => {
                FieldModel::oscillating(b0, self.need("sigma_b_uT", scenario)?, self.need("f_MHz", scenario)?)
            }
        }
        .with_delta_ms(delta_ms);
        field.validate()?;

        let eta0 = self.f64("eta0")?.unwrap_or(0.5);
        if !(eta0 > 0.0 && eta0 < 1.0) {
            return Err(CliError::Invalid { key: "eta0", value: eta0.to_string(), reason: "must lie in (0, 1)".into() });
        }
        let p_inc_threshold = self.f64("p_inc_threshold")?;
        if let Some(t) = p_inc_threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(CliError::Invalid { key: "p_inc_threshold", value: t.to_string(), reason: "must lie in [0, 1]".into() });
            }
        }

        let axis = scenario.axis();
        let point = self.f64("point")?;
        if let Some(x) = point {
            check_axis_value(axis, "point", x)?;
        }
        let shots = self.get::<u64>("shots")?.unwrap_or(1_000_000);
        let n_traj = self.get::<usize>("n_traj")?.unwrap_or(100_000);
        if shots == 0 {
            return Err(CliError::Invalid { key: "shots", value: "0".into(), reason: "must be positive".into() });
        }
        if n_traj < 2 {
            return Err(CliError::Invalid { key: "n_traj", value: n_traj.to_string(), reason: "must be at least 2".into() });
        }

        Ok(SweepConfig {
            scenario,
            label: self.str("label").map(str::to_owned),
            noise,
            field,
            eta0,
            p_inc_threshold,
            grid: self.grid(axis)?,
            point,
            seed: self.get::<u64>("seed")?.unwrap_or(0),
            shots,
            n_traj,
            out: self.str("out").map(PathBuf::from),
        })
    }

    fn grid(&self, axis: AxisKind) -> Result<Option<Vec<f64>>, CliError> {
        let start = self.f64("grid_start")?;
        let stop = self.f64("grid_stop")?;
        let points = self.get::<usize>("grid_points")?;
        let scale = match self.str("grid_scale") {
            None | Some("lin") => GridScale::Lin,
            Some("log") => GridScale::Log,
            Some(other) => {
                return Err(CliError::Invalid { key: "grid_scale", value: other.to_owned(), reason: "expected lin or log".into() })
            }
        };
        let (start, stop) = match (start, stop) {
            (None, None) if points.is_none() && self.str("grid_scale").is_none() => return Ok(None),
            (Some(a), Some(b)) => (a, b),
            (None, _) => return Err(CliError::MissingGrid { key: "grid_start" }),
            (_, None) => return Err(CliError::MissingGrid { key: "grid_stop" }),
        };
        check_axis_value(axis, "grid_start", start)?;
        check_axis_value(axis, "grid_stop", stop)?;
        if stop <= start {
            return Err(CliError::Invalid { key: "grid_stop", value: stop.to_string(), reason: "must exceed grid_start".into() });
        }
        if scale == GridScale::Log && start <= 0.0 {
            return Err(CliError::Invalid { key: "grid_start", value: start.to_string(), reason: "must be positive on a log grid".into() });
        }

        let spaced = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let u = i as f64 / (n - 1) as f64;
                    match scale {
                        GridScale::Lin => start + (stop - start) * u,
                        GridScale::Log => (start.ln() + (stop.ln() - start.ln()) * u).exp(),
                    }
                })
                .collect()
        };
        let values = match (axis, points) {
            (_, Some(n)) if n < 2 => {
                return Err(CliError::Invalid { key: "grid_points", value: n.to_string(), reason: "must be at least 2".into() })
            }
            (AxisKind::Time, None) => return Err(CliError::MissingGrid { key: "grid_points" }),
            (AxisKind::Time, Some(n)) => {
                let mut v = spaced(n);
                // pin the end point exactly
                v[n - 1] = stop;
                v
            }
            (AxisKind::Pulses, None) => (start as u64..=stop as u64).step_by(2).map(|n| n as f64).collect(),
            (AxisKind::Pulses, Some(n)) => {
                let mut v: Vec<f64> = spaced(n).into_iter().map(|x| 2.0 * (x / 2.0).round()).collect();
                v.dedup();
                v
            }
        };
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Invalid { key: "grid_points", value: format!("{}", values.len()), reason: "grid is not strictly increasing".into() });
        }
        Ok(Some(values))
    }
}

fn check_axis_value(axis: AxisKind, key: &'static str, x: f64) -> Result<(), CliError> {
    match axis {
        AxisKind::Time if x < 0.0 => Err(CliError::Invalid { key, value: x.to_string(), reason: "time must be >= 0".into() }),
        AxisKind::Pulses if x < 2.0 || x.fract() != 0.0 || x as u64 % 2 != 0 || x > u32::MAX as f64 => {
            Err(CliError::Invalid { key, value: x.to_string(), reason: "pulse count must be an even integer >= 2".into() })
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STATIC: &str = "scenario = static_single\nb0_uT = 50\nkappa_per_us = 3.6\ntau_c_us = 25\ngrid_start = 0\ngrid_stop = 2\ngrid_points = 5\n";

    #[test]
    fn parses_static_single() {
        let c = SweepConfig::parse(STATIC).unwrap();
        assert_eq!(c.noise, NoiseModel::OuCpmg { kappa: 3.6, tau_c: 25.0 });
        assert_eq!(c.grid.unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(c.eta0, 0.5);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = format!("# header\n\n{STATIC}seed = 7 # trailing\n");
        assert_eq!(SweepConfig::parse(&text).unwrap().seed, 7);
    }

    #[test]
    fn named_errors() {
        let missing = STATIC.replace("b0_uT = 50\n", "");
        assert!(matches!(SweepConfig::parse(&missing), Err(CliError::Missing { key: "b0_uT", .. })));
        let unknown = format!("{STATIC}bogus = 1\n");
        assert!(matches!(SweepConfig::parse(&unknown), Err(CliError::UnknownKey { line: 8, .. })));
        let foreign = format!("{STATIC}T2_us = 53\n");
        assert!(matches!(SweepConfig::parse(&foreign), Err(CliError::NotApplicable { .. })));
        let dup = format!("{STATIC}seed = 1\nseed = 2\n");
        assert!(matches!(SweepConfig::parse(&dup), Err(CliError::Syntax { line: 9, .. })));
        let reversed = STATIC.replace("grid_stop = 2", "grid_stop = 0");
        assert!(matches!(SweepConfig::parse(&reversed), Err(CliError::Invalid { key: "grid_stop", .. })));
        let bad = STATIC.replace("b0_uT = 50", "b0_uT = fifty");
        assert!(matches!(SweepConfig::parse(&bad), Err(CliError::Invalid { key: "b0_uT", .. })));
        let neg = STATIC.replace("kappa_per_us = 3.6", "kappa_per_us = -1");
        assert!(matches!(SweepConfig::parse(&neg), Err(CliError::Core(_))));
    }

    #[test]
    fn pulse_grids() {
        let base = "scenario = cpmg_single\nb0_uT = 1\nsigma_b_uT = 0.2\nf_MHz = 1\nkappa_per_us = 3.6\ntau_c_us = 25\ngrid_start = 2\ngrid_stop = 10\n";
        assert_eq!(SweepConfig::parse(base).unwrap().grid.unwrap(), vec![2.0, 4.0, 6.0, 8.0, 10.0]);
        let spaced = format!("{base}grid_points = 4\n");
        assert_eq!(SweepConfig::parse(&spaced).unwrap().grid.unwrap(), vec![2.0, 4.0, 8.0, 10.0]);
        let odd = base.replace("grid_start = 2", "grid_start = 3");
        assert!(SweepConfig::parse(&odd).is_err());
    }

    #[test]
    fn double_quantum_forces_delta_ms() {
        let text = "scenario = static_ensemble_dq\nb0_uT = 1\nT2_star_us = 1.3\npoint = 0.5\n";
        let c = SweepConfig::parse(text).unwrap();
        assert_eq!(c.field.delta_ms, 2);
        assert_eq!(c.noise, NoiseModel::StretchedExp { t2_star: 1.3, p: 1.0 });
        assert!(c.grid.is_none());
        assert!(SweepConfig::parse(&format!("{text}delta_ms = 1\n")).is_err());
    }

    #[test]
    fn log_grid_is_geometric() {
        let text = STATIC.replace("grid_start = 0", "grid_start = 0.01").replace("grid_points = 5", "grid_points = 3\ngrid_scale = log");
        let g = SweepConfig::parse(&text).unwrap().grid.unwrap();
        assert!((g[1] - (0.01_f64 * 2.0).sqrt()).abs() < 1e-15);
    }
}
