//! Run configuration: a single canonical JSON tree, strictly validated.
//! Unknown keys are rejected; every constraint failure names the field.

use crate::lattice::{LatticeWindow, PotentialSpec};
use crate::report::{fmt_complex, parse_complex};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Deserialize;
use std::collections::BTreeMap;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    delta: Option<f64>,
    potential: RawPotential,
    window: RawWindow,
    #[serde(default)]
    tolerances: Option<RawTolerances>,
    #[serde(default)]
    ivp: Option<RawIvp>,
    #[serde(default)]
    weyl: Option<RawWeyl>,
    #[serde(default)]
    green: Option<RawGreen>,
    #[serde(default)]
    spectrum: Option<RawSpectrum>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
enum RawPotential {
    Constant {
        c: f64,
    },
    Power {
        c: f64,
        m: f64,
    },
    Explicit {
        c: f64,
        values: BTreeMap<String, f64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWindow {
    a: i64,
    b: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    #[serde(default)]
    identity_tol: Option<f64>,
    #[serde(default)]
    disk_tol: Option<f64>,
    #[serde(default)]
    eigen_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIvp {
    n0: i64,
    c0: String,
    c1: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeyl {
    #[serde(default)]
    disk_indices: Option<Vec<i64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGreen {
    #[serde(default)]
    num_random_rhs: Option<usize>,
    #[serde(default)]
    kernel_rows: Option<Vec<i64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    #[serde(default)]
    disk_radius: Option<f64>,
    #[serde(default)]
    window_halves: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub identity_tol: f64,
    pub disk_tol: f64,
    pub eigen_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity_tol: 1e-10,
            disk_tol: 1e-8,
            eigen_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpConfig {
    pub n0: i64,
    pub c0: Complex64,
    pub c1: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylConfig {
    pub disk_indices: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenConfig {
    pub num_random_rhs: usize,
    pub kernel_rows: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumConfig {
    pub disk_radius: f64,
    pub window_halves: Vec<i64>,
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub delta: f64,
    pub potential: PotentialSpec,
    pub window: LatticeWindow,
    pub tolerances: Tolerances,
    pub ivp: IvpConfig,
    pub weyl: WeylConfig,
    pub green: GreenConfig,
    pub spectrum: SpectrumConfig,
}

fn check(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg.into()))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let delta = raw.delta.unwrap_or(0.0);
        check(
            (0.0..std::f64::consts::FRAC_PI_2).contains(&delta),
            format!("delta must lie in [0, pi/2), got {delta}"),
        )?;

        let window = LatticeWindow::new(raw.window.a, raw.window.b).map_err(|_| {
            Error::Config(format!(
                "window must satisfy a <= -1 and b >= 2, got a = {}, b = {}",
                raw.window.a, raw.window.b
            ))
        })?;
        check(
            raw.window.a >= -100_000 && raw.window.b <= 100_000,
            "window endpoints must stay within +/-100000",
        )?;

        let potential = match raw.potential {
            RawPotential::Constant { c } => PotentialSpec::constant(c)
                .map_err(|_| Error::Config(format!("potential c must be > 0, got {c}")))?,
            RawPotential::Power { c, m } => PotentialSpec::power(c, m).map_err(|_| {
                Error::Config(format!(
                    "potential must have c > 0 and m >= 0, got c = {c}, m = {m}"
                ))
            })?,
            RawPotential::Explicit { c, values } => {
                let mut map = BTreeMap::new();
                for (key, v) in values {
                    let n: i64 = key.parse().map_err(|_| {
                        Error::Config(format!("explicit potential key '{key}' is not an integer"))
                    })?;
                    map.insert(n, v);
                }
                let spec = PotentialSpec::explicit(c, map).map_err(|e| {
                    Error::Config(format!("explicit potential violates its bound: {e}"))
                })?;
                // Explicit tables must cover every active site the solvers
                // touch, including the extension sites next to the window.
                for n in (window.lo()..=window.hi()).filter(|n| *n != 0 && *n != 1) {
                    spec.value(n).map_err(|_| {
                        Error::Config(format!(
                            "explicit potential must define q_n for n = {n} \
                             (needed by window [{}, {}])",
                            window.a(),
                            window.b()
                        ))
                    })?;
                }
                spec
            }
        };

        let tolerances = match raw.tolerances {
            None => Tolerances::default(),
            Some(t) => {
                let d = Tolerances::default();
                let out = Tolerances {
                    identity_tol: t.identity_tol.unwrap_or(d.identity_tol),
                    disk_tol: t.disk_tol.unwrap_or(d.disk_tol),
                    eigen_tol: t.eigen_tol.unwrap_or(d.eigen_tol),
                };
                for (name, v) in [
                    ("identity_tol", out.identity_tol),
                    ("disk_tol", out.disk_tol),
                    ("eigen_tol", out.eigen_tol),
                ] {
                    check(
                        v.is_finite() && v > 0.0 && v < 1.0,
                        format!("{name} must lie in (0, 1), got {v}"),
                    )?;
                }
                out
            }
        };

        let ivp = match raw.ivp {
            None => IvpConfig {
                n0: 1,
                c0: Complex64::new(1.0, 0.0),
                c1: Complex64::new(0.0, 0.0),
            },
            Some(r) => {
                check(
                    r.n0 >= window.lo() && r.n0 < window.hi(),
                    format!(
                        "ivp.n0 must satisfy {} <= n0 <= {} for this window, got {}",
                        window.lo(),
                        window.hi() - 1,
                        r.n0
                    ),
                )?;
                IvpConfig {
                    n0: r.n0,
                    c0: parse_complex(&r.c0).map_err(|e| Error::Config(format!("ivp.c0: {e}")))?,
                    c1: parse_complex(&r.c1).map_err(|e| Error::Config(format!("ivp.c1: {e}")))?,
                }
            }
        };

        let weyl = match raw.weyl {
            None => WeylConfig {
                disk_indices: Vec::new(),
            },
            Some(r) => {
                let disk_indices = r.disk_indices.unwrap_or_default();
                for &i in &disk_indices {
                    check(
                        (i >= 2 && i <= window.b()) || (i <= -1 && i >= window.a()),
                        format!(
                            "weyl.disk_indices entries must be forward (2..={}) or \
                             backward ({}..=-1) indices, got {i}",
                            window.b(),
                            window.a()
                        ),
                    )?;
                }
                WeylConfig { disk_indices }
            }
        };

        let green = match raw.green {
            None => GreenConfig {
                num_random_rhs: 25,
                kernel_rows: vec![2],
            },
            Some(r) => {
                let num = r.num_random_rhs.unwrap_or(25);
                check(
                    (1..=10_000).contains(&num),
                    format!("green.num_random_rhs must lie in [1, 10000], got {num}"),
                )?;
                let rows = r.kernel_rows.unwrap_or_else(|| vec![2]);
                for &n in &rows {
                    check(
                        window.contains_site(n),
                        format!("green.kernel_rows entries must be active sites, got {n}"),
                    )?;
                }
                GreenConfig {
                    num_random_rhs: num,
                    kernel_rows: rows,
                }
            }
        };

        let spectrum_given = raw.spectrum.is_some();
        let spectrum = match raw.spectrum {
            None => SpectrumConfig {
                disk_radius: 10.0,
                window_halves: vec![10, 20],
            },
            Some(r) => {
                let radius = r.disk_radius.unwrap_or(10.0);
                check(
                    radius.is_finite() && radius > 0.0,
                    format!("spectrum.disk_radius must be positive, got {radius}"),
                )?;
                let halves = r.window_halves.unwrap_or_else(|| vec![10, 20]);
                check(
                    halves.len() >= 2,
                    "spectrum.window_halves needs at least two entries",
                )?;
                for pair in halves.windows(2) {
                    check(
                        pair[0] >= 1 && pair[1] > pair[0],
                        "spectrum.window_halves must be >= 1 and strictly increasing",
                    )?;
                }
                check(
                    *halves.last().unwrap() <= 200,
                    "spectrum.window_halves entries must be <= 200 \
                     (eigenvector extraction scales as the fourth power)",
                )?;
                SpectrumConfig {
                    disk_radius: radius,
                    window_halves: halves,
                }
            }
        };
        // When a spectrum ladder is requested, explicit tables must also
        // cover its largest window.
        if spectrum_given && matches!(&potential, PotentialSpec::Explicit { .. }) {
            let top = *spectrum.window_halves.last().unwrap();
            let ladder = LatticeWindow::symmetric(top).map_err(|e| Error::Config(e.to_string()))?;
            for n in ladder.sites() {
                potential.value(n).map_err(|_| {
                    Error::Config(format!(
                        "explicit potential must define q_n for n = {n} \
                         (needed by spectrum.window_halves = {top})"
                    ))
                })?;
            }
        }

        Ok(RunConfig {
            delta,
            potential,
            window,
            tolerances,
            ivp,
            weyl,
            green,
            spectrum,
        })
    }

    /// Canonical serialized form: parsing it reproduces this config exactly.
    pub fn to_canonical_json(&self) -> String {
        use serde_json::{json, Map, Value};
        let mut root = Map::new();
        root.insert("delta".into(), json!(self.delta));
        let potential = match &self.potential {
            PotentialSpec::Constant { c } => json!({"kind": "constant", "c": c}),
            PotentialSpec::Power { c, m } => json!({"kind": "power", "c": c, "m": m}),
            PotentialSpec::Explicit { c, values } => {
                let mut vals = Map::new();
                for (n, v) in values {
                    vals.insert(n.to_string(), json!(v));
                }
                json!({"kind": "explicit", "c": c, "values": Value::Object(vals)})
            }
        };
        root.insert("potential".into(), potential);
        root.insert(
            "window".into(),
            json!({"a": self.window.a(), "b": self.window.b()}),
        );
        root.insert(
            "tolerances".into(),
            json!({
                "identity_tol": self.tolerances.identity_tol,
                "disk_tol": self.tolerances.disk_tol,
                "eigen_tol": self.tolerances.eigen_tol,
            }),
        );
        root.insert(
            "ivp".into(),
            json!({
                "n0": self.ivp.n0,
                "c0": fmt_complex(self.ivp.c0),
                "c1": fmt_complex(self.ivp.c1),
            }),
        );
        root.insert(
            "weyl".into(),
            json!({"disk_indices": self.weyl.disk_indices}),
        );
        root.insert(
            "green".into(),
            json!({
                "num_random_rhs": self.green.num_random_rhs,
                "kernel_rows": self.green.kernel_rows,
            }),
        );
        root.insert(
            "spectrum".into(),
            json!({
                "disk_radius": self.spectrum.disk_radius,
                "window_halves": self.spectrum.window_halves,
            }),
        );
        serde_json::to_string_pretty(&Value::Object(root)).expect("config serialization")
    }

    /// Digest string used by manifests; stable across runs.
    pub fn fingerprint(text: &str) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}
