//! Resolved run configurations. A config file supplies a JSON object; flags
//! given on the command line replace its keys; the merged object must then
//! deserialize into the subcommand's config type.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fermidicke::hilbert::StatisticsConfig;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Largest grid a sweep may request.
pub const MAX_SWEEP_POINTS: usize = 10_000;

/// An angle given as radians or as a multiple of pi: `pi`, `-pi/2`,
/// `3pi/4`, `0.25pi`, `1.5`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Angle(pub f64);

impl FromStr for Angle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let t = t.to_ascii_lowercase();
        let bad = || format!("cannot parse angle {s:?}");
        let Some(pos) = t.find("pi") else {
            return t.parse::<f64>().map(Angle).map_err(|_| bad());
        };
        let (head, tail) = (&t[..pos], &t[pos + 2..]);
        let coeff = match head.trim_end_matches('*') {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => h.parse::<f64>().map_err(|_| bad())?,
        };
        let denom = match tail {
            "" => 1.0,
            d => d
                .strip_prefix('/')
                .and_then(|d| d.parse::<f64>().ok())
                .filter(|d| *d != 0.0)
                .ok_or_else(bad)?,
        };
        Ok(Angle(coeff * std::f64::consts::PI / denom))
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Angle(x)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Density,
    Moments,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SweepParam {
    N,
    G,
    Kappa,
    KappaPhi,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::N => "n",
            Self::G => "g",
            Self::Kappa => "kappa",
            Self::KappaPhi => "kappa_phi",
        })
    }
}

/// Unit of sweep values: absolute, multiples of `N Gamma_0`, or multiples
/// of `g sqrt(N)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SweepUnit {
    #[default]
    Abs,
    NGamma0,
    GSqrtN,
}

fn default_gamma0() -> f64 {
    1.0
}
fn default_g() -> f64 {
    1.0
}
fn default_points() -> usize {
    201
}
fn default_rtol() -> f64 {
    1e-8
}
fn default_atol() -> f64 {
    1e-10
}
fn default_density() -> Engine {
    Engine::Density
}
fn default_moments() -> Engine {
    Engine::Moments
}
fn default_stats() -> StatisticsConfig {
    StatisticsConfig::BOSON_FERMION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub n: usize,
    /// Absent: report every statistics configuration.
    #[serde(default)]
    pub stats: Option<StatisticsConfig>,
    #[serde(default = "default_gamma0")]
    pub gamma0: f64,
    #[serde(default)]
    pub phi: Angle,
    #[serde(default)]
    pub phases: Option<Vec<f64>>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub n: usize,
    #[serde(default = "default_stats")]
    pub stats: StatisticsConfig,
    #[serde(default = "default_gamma0")]
    pub gamma0: f64,
    #[serde(default)]
    pub dump: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub n: usize,
    pub modes: usize,
    #[serde(default = "default_stats")]
    pub stats: StatisticsConfig,
    /// Total rate split evenly over the modes when `rates` is absent.
    #[serde(default = "default_gamma0")]
    pub gamma0: f64,
    #[serde(default)]
    pub rates: Option<Vec<f64>>,
    /// Base path; `.dot`, `.json` and `.config.json` are appended.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub n: usize,
    #[serde(default = "default_stats")]
    pub stats: StatisticsConfig,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub kappa_phi: f64,
    /// Absent: chosen from the regime and recorded in the resolved config.
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_density")]
    pub engine: Engine,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub log: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: usize,
    #[serde(default = "default_stats")]
    pub stats: StatisticsConfig,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub kappa_phi: f64,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_moments")]
    pub engine: Engine,
    pub param: SweepParam,
    #[serde(default)]
    pub unit: SweepUnit,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub range: Option<SweepRange>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl SweepConfig {
    /// Grid values in the configured unit.
    pub fn grid(&self) -> CliResult<Vec<f64>> {
        let values = match (&self.values, &self.range) {
            (Some(v), None) => v.clone(),
            (None, Some(r)) => {
                if r.count == 0 {
                    return Err(CliError::Usage("range count must be positive".into()));
                }
                if r.count > MAX_SWEEP_POINTS {
                    return Err(CliError::Usage(format!(
                        "sweep has {} points, limit is {MAX_SWEEP_POINTS}",
                        r.count
                    )));
                }
                if r.log && !(r.start > 0.0 && r.stop > 0.0) {
                    return Err(CliError::Usage("log range needs positive bounds".into()));
                }
                (0..r.count)
                    .map(|i| {
                        let f = if r.count == 1 {
                            0.0
                        } else {
                            i as f64 / (r.count - 1) as f64
                        };
                        if r.log {
                            (r.start.ln() + f * (r.stop.ln() - r.start.ln())).exp()
                        } else {
                            r.start + f * (r.stop - r.start)
                        }
                    })
                    .collect()
            }
            _ => {
                return Err(CliError::Usage(
                    "give exactly one of `values` and `range`".into(),
                ))
            }
        };
        if values.is_empty() || values.len() > MAX_SWEEP_POINTS {
            return Err(CliError::Usage(format!(
                "sweep needs 1 to {MAX_SWEEP_POINTS} points, got {}",
                values.len()
            )));
        }
        Ok(values)
    }
}

/// Reads a config file into a JSON object.
pub fn load_file(path: &Path) -> CliResult<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    match serde_json::from_str::<Value>(&text)? {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::Usage(format!(
            "{}: config must be a JSON object",
            path.display()
        ))),
    }
}

/// File values overlaid with flag values, deserialized into `T`.
pub fn resolve<T, F>(file: Option<&Path>, flags: &F) -> CliResult<T>
where
    T: for<'de> Deserialize<'de>,
    F: Serialize,
{
    resolve_with(file, serde_json::to_value(flags)?)
}

/// As [`resolve`], with the flags already converted to a JSON object.
pub fn resolve_with<T>(file: Option<&Path>, flags: Value) -> CliResult<T>
where
    T: for<'de> Deserialize<'de>,
{
    let mut merged = match file {
        Some(p) => load_file(p)?,
        None => Map::new(),
    };
    if let Value::Object(flags) = flags {
        for (k, v) in flags {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    Ok(serde_json::from_value(Value::Object(merged))?)
}

/// Comma-separated numbers; entries may use the [`Angle`] syntax.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct List(pub Vec<f64>);

impl FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|x| {
                x.parse::<Angle>()
                    .map(|a| a.0)
                    .map_err(|_| format!("cannot parse list entry {x:?}"))
            })
            .collect::<Result<_, _>>()
            .map(List)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angles() {
        let a = |s: &str| s.parse::<Angle>().unwrap().0;
        assert_eq!(a("pi"), PI);
        assert_eq!(a("-pi"), -PI);
        assert_eq!(a("pi/2"), PI / 2.0);
        assert_eq!(a("3pi/4"), 3.0 * PI / 4.0);
        assert_eq!(a("0.5*pi"), 0.5 * PI);
        assert_eq!(a("1.25"), 1.25);
        assert_eq!(a(" PI / 3 "), PI / 3.0);
        assert!("pi/0".parse::<Angle>().is_err());
        assert!("tau".parse::<Angle>().is_err());
        assert!("2pi3".parse::<Angle>().is_err());
    }

    #[test]
    fn config_round_trip() {
        let c: EvolveConfig =
            serde_json::from_str(r#"{"n": 3, "kappa": 0.5, "t_max": 2}"#).unwrap();
        assert_eq!(c.points, 201);
        assert_eq!(c.stats, StatisticsConfig::BOSON_FERMION);
        let back: EvolveConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let r: RatesConfig = serde_json::from_str(r#"{"n": 3, "phi": "pi/2"}"#).unwrap();
        assert_eq!(r.phi.0, PI / 2.0);
        let back: RatesConfig = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RatesConfig>(r#"{"n": 3, "bogus": 1}"#).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"n": 3, "gamma0": 2.0}"#).unwrap();
        #[derive(Serialize)]
        struct Flags {
            n: Option<usize>,
            gamma0: Option<f64>,
        }
        let c: RatesConfig = resolve(
            Some(&path),
            &Flags {
                n: Some(5),
                gamma0: None,
            },
        )
        .unwrap();
        assert_eq!((c.n, c.gamma0), (5, 2.0));
    }

    #[test]
    fn sweep_grids() {
        let mut c: SweepConfig = serde_json::from_str(
            r#"{"n": 4, "param": "kappa_phi", "range": {"start": 0.01, "stop": 100, "count": 5, "log": true}}"#,
        )
        .unwrap();
        let g = c.grid().unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[2] - 1.0).abs() < 1e-12);
        c.values = Some(vec![1.0]);
        assert!(c.grid().is_err());
        c.range = None;
        assert_eq!(c.grid().unwrap(), vec![1.0]);
    }

    proptest::proptest! {
        #[test]
        fn configs_round_trip_losslessly(
            n in 1usize..16,
            g in 0.0f64..1e3,
            kappa in proptest::num::f64::POSITIVE | proptest::num::f64::ZERO,
            phi in proptest::num::f64::NORMAL,
            rtol in 1e-14f64..1e-2,
        ) {
            let c = EvolveConfig {
                n, stats: StatisticsConfig::FERMION_BOSON, g, kappa, kappa_phi: kappa / 3.0,
                t_max: Some(g + 1.0 / 3.0), points: n + 2, rtol, atol: rtol * 1e-3,
                engine: Engine::Moments, format: Format::Json, out: Some("x/y.json".into()),
            };
            let back: EvolveConfig = serde_json::from_str(&serde_json::to_string_pretty(&c).unwrap()).unwrap();
            proptest::prop_assert_eq!(back, c);
            let r = RatesConfig {
                n, stats: None, gamma0: g + 1e-300, phi: Angle(phi),
                phases: Some(vec![phi, -phi / 7.0]), format: Format::Csv, out: None,
            };
            let back: RatesConfig = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
            proptest::prop_assert_eq!(back, r);
        }
    }

    #[test]
    fn lists() {
        assert_eq!("1, 2,pi".parse::<List>().unwrap().0, vec![1.0, 2.0, PI]);
        assert!("1,,2".parse::<List>().is_err());
    }
}
