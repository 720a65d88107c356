//! Subcommand drivers: each produces a deterministic CSV table and JSON
//! document from a validated configuration, plus an overall pass flag.

use crate::config::RunConfig;
use crate::lattice::{norm, ComplexSeq, ImpulseParams, LatticeWindow};
use crate::operators::{apply_l, GreenOperator};
use crate::recurrence::{solution_residual, solve_ivp, wronskian_profile, CoefficientSeq, IvpSpec};
use crate::report::{fmt_complex, fmt_f64, json_complex, json_document, json_f64, CsvWriter};
use crate::spectrum::convergence_study;
use crate::verify::run_full_suite;
use crate::weyl::{backward_disk, base_solutions, disk_ladders, forward_disk, limit_points};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

/// Everything a subcommand emits.
#[derive(Debug)]
pub struct RunOutput {
    pub csv: String,
    pub json: Value,
    pub passed: bool,
    /// Human-readable lines for stdout (used by `verify`).
    pub lines: Vec<String>,
}

const CSV_HEADER: [&str; 4] = ["section", "key", "value", "extra"];

pub fn run_ivp(cfg: &RunConfig) -> Result<RunOutput> {
    let imp = ImpulseParams::standard(cfg.delta)?;
    let coeff = CoefficientSeq::on_window(&cfg.potential, &cfg.window)?;
    let spec = IvpSpec::new(cfg.ivp.n0, cfg.ivp.c0, cfg.ivp.c1);
    let y = solve_ivp(&spec, &coeff, &imp, &cfg.window)?;
    // Companion solution from the same site completes a fundamental pair.
    let companion = solve_ivp(
        &IvpSpec::new(
            cfg.ivp.n0,
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ),
        &coeff,
        &imp,
        &cfg.window,
    )?;
    let profile = wronskian_profile(&y, &companion)?;
    let (worst_site, residual) = solution_residual(&y, &coeff, &imp, None)?;
    let passed = residual <= cfg.tolerances.identity_tol;

    let mut csv = CsvWriter::new();
    csv.row(&CSV_HEADER);
    for (n, v) in y.iter_indexed() {
        csv.row(&["y", &n.to_string(), &fmt_complex(v), ""]);
    }
    csv.row(&[
        "wronskian_profile",
        "omega_minus",
        &fmt_complex(profile.omega_minus),
        "",
    ]);
    csv.row(&[
        "wronskian_profile",
        "omega_plus",
        &fmt_complex(profile.omega_plus),
        "",
    ]);
    csv.row(&["wronskian_profile", "w0", &fmt_complex(profile.w0), ""]);
    csv.row(&[
        "wronskian_profile",
        "max_deviation",
        &fmt_f64(profile.max_deviation),
        &format!("scale {}", fmt_f64(profile.scale)),
    ]);
    csv.row(&[
        "residual",
        "max_relative",
        &fmt_f64(residual),
        &format!("site {worst_site}"),
    ]);

    let mut body = Map::new();
    body.insert(
        "solution".into(),
        Value::Array(
            y.iter_indexed()
                .map(|(n, v)| {
                    let mut row = Map::new();
                    row.insert("n".into(), Value::from(n));
                    row.insert("y".into(), json_complex(v));
                    Value::Object(row)
                })
                .collect(),
        ),
    );
    let mut prof = Map::new();
    prof.insert("omega_minus".into(), json_complex(profile.omega_minus));
    prof.insert("omega_plus".into(), json_complex(profile.omega_plus));
    prof.insert("w0".into(), json_complex(profile.w0));
    prof.insert("max_deviation".into(), json_f64(profile.max_deviation));
    prof.insert("scale".into(), json_f64(profile.scale));
    body.insert("wronskian_profile".into(), Value::Object(prof));
    body.insert("max_relative_residual".into(), json_f64(residual));
    body.insert("worst_site".into(), Value::from(worst_site));
    body.insert("passed".into(), Value::Bool(passed));

    Ok(RunOutput {
        csv: csv.finish(),
        json: json_document("ivp", body),
        passed,
        lines: vec![format!(
            "{} ivp residual {:.3e} (tolerance {:.3e})",
            if passed { "PASS" } else { "FAIL" },
            residual,
            cfg.tolerances.identity_tol
        )],
    })
}

pub fn run_weyl(cfg: &RunConfig) -> Result<RunOutput> {
    let (fwd, bwd, skipped) = disk_ladders(&cfg.potential, cfg.delta, &cfg.window)?;
    let pair = limit_points(
        &cfg.potential,
        cfg.delta,
        &cfg.window,
        cfg.tolerances.disk_tol,
    )?;

    // Radii must shrink strictly along both ladders.
    let mut monotone = true;
    for ladder in [&fwd, &bwd] {
        for two in ladder.windows(2) {
            monotone &= two[1].radius < two[0].radius;
        }
    }
    let passed = monotone && !pair.limit_circle_suspected;

    let mut csv = CsvWriter::new();
    csv.row(&CSV_HEADER);
    for d in &fwd {
        csv.row(&[
            "forward_disk",
            &d.index.to_string(),
            &fmt_complex(d.center),
            &fmt_f64(d.radius),
        ]);
    }
    for d in &bwd {
        csv.row(&[
            "backward_disk",
            &d.index.to_string(),
            &fmt_complex(d.center),
            &fmt_f64(d.radius),
        ]);
    }
    // Individually requested disks, recomputed from plain base solutions.
    if !cfg.weyl.disk_indices.is_empty() {
        let (phi, theta) = base_solutions(&cfg.potential, cfg.delta, &cfg.window)?;
        for &i in &cfg.weyl.disk_indices {
            let d = if i >= 2 {
                forward_disk(i, &phi, &theta, cfg.delta, &cfg.potential)?
            } else {
                backward_disk(i, &phi, &theta, cfg.delta, &cfg.potential)?
            };
            csv.row(&[
                "requested_disk",
                &i.to_string(),
                &fmt_complex(d.center),
                &fmt_f64(d.radius),
            ]);
        }
    }
    csv.row(&[
        "limit",
        "v_hat",
        &fmt_complex(pair.v_hat),
        &format!("enclosure {}", fmt_f64(pair.v_enclosure)),
    ]);
    csv.row(&[
        "limit",
        "u_hat",
        &fmt_complex(pair.u_hat),
        &format!("enclosure {}", fmt_f64(pair.u_enclosure)),
    ]);
    for (n, v) in pair.psi.iter_indexed() {
        csv.row(&["psi", &n.to_string(), &fmt_complex(v), ""]);
    }
    for (n, v) in pair.chi.iter_indexed() {
        csv.row(&["chi", &n.to_string(), &fmt_complex(v), ""]);
    }
    for s in &skipped {
        csv.row(&["skipped_index", &s.to_string(), "", ""]);
    }

    let disk_json = |d: &crate::weyl::WeylDisk| -> Value {
        let mut m = Map::new();
        m.insert("index".into(), Value::from(d.index));
        m.insert("center".into(), json_complex(d.center));
        m.insert("radius".into(), json_f64(d.radius));
        m.insert("energy".into(), json_f64(d.energy));
        Value::Object(m)
    };
    let seq_json = |s: &ComplexSeq| -> Value {
        Value::Array(
            s.iter_indexed()
                .map(|(n, v)| {
                    let mut row = Map::new();
                    row.insert("n".into(), Value::from(n));
                    row.insert("value".into(), json_complex(v));
                    Value::Object(row)
                })
                .collect(),
        )
    };
    let mut body = Map::new();
    body.insert(
        "forward_disks".into(),
        Value::Array(fwd.iter().map(disk_json).collect()),
    );
    body.insert(
        "backward_disks".into(),
        Value::Array(bwd.iter().map(disk_json).collect()),
    );
    body.insert("v_hat".into(), json_complex(pair.v_hat));
    body.insert("u_hat".into(), json_complex(pair.u_hat));
    body.insert("v_enclosure".into(), json_f64(pair.v_enclosure));
    body.insert("u_enclosure".into(), json_f64(pair.u_enclosure));
    body.insert("b_used".into(), Value::from(pair.b_used));
    body.insert("a_used".into(), Value::from(pair.a_used));
    body.insert(
        "limit_circle_suspected".into(),
        Value::Bool(pair.limit_circle_suspected),
    );
    body.insert("psi".into(), seq_json(&pair.psi));
    body.insert("chi".into(), seq_json(&pair.chi));
    body.insert(
        "skipped_indices".into(),
        Value::Array(skipped.iter().map(|s| Value::from(*s)).collect()),
    );
    body.insert("passed".into(), Value::Bool(passed));

    Ok(RunOutput {
        csv: csv.finish(),
        json: json_document("weyl", body),
        passed,
        lines: vec![format!(
            "{} weyl ladders to b = {}, a = {} (radii {:.3e}, {:.3e})",
            if passed { "PASS" } else { "FAIL" },
            pair.b_used,
            pair.a_used,
            pair.v_enclosure / 2.0,
            pair.u_enclosure / 2.0,
        )],
    })
}

pub fn run_green(cfg: &RunConfig) -> Result<RunOutput> {
    let imp = ImpulseParams::standard(cfg.delta)?;
    let g = GreenOperator::build(
        &cfg.potential,
        cfg.delta,
        &cfg.window,
        cfg.tolerances.disk_tol,
    )?;
    let window = cfg.window;

    let mut csv = CsvWriter::new();
    csv.row(&CSV_HEADER);
    for &row in &cfg.green.kernel_rows {
        for k in window.sites() {
            csv.row(&[
                "kernel",
                &format!("{row}:{k}"),
                &fmt_complex(g.kernel(row, k)?),
                "",
            ]);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut worst_residual = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let mut inverse_rows = Vec::new();
    for i in 0..cfg.green.num_random_rhs {
        let mut f = ComplexSeq::zeros_on(&window);
        for n in window.sites() {
            f.set(
                n,
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
        }
        let x = g.apply_inverse(&f)?;
        let lx = apply_l(&x, &cfg.potential, &imp)?;
        let fnorm = norm(&f)?;
        let mut res = 0.0f64;
        for n in (window.a() + 1)..=(window.b() - 1) {
            if window.contains_site(n) {
                res = res.max((lx.at(n) - f.at(n)).norm() / fnorm);
            }
        }
        let ratio = norm(&x)? * g.c_bound() * cfg.delta.cos() / fnorm;
        worst_residual = worst_residual.max(res);
        worst_ratio = worst_ratio.max(ratio);
        csv.row(&["inverse", &i.to_string(), &fmt_f64(res), &fmt_f64(ratio)]);
        let mut row = Map::new();
        row.insert("rhs".into(), Value::from(i));
        row.insert("max_relative_residual".into(), json_f64(res));
        row.insert("norm_bound_ratio".into(), json_f64(ratio));
        inverse_rows.push(Value::Object(row));
    }
    let passed = worst_residual <= 1e-8 && worst_ratio <= 1.0 + 1e-9;
    csv.row(&["summary", "worst_residual", &fmt_f64(worst_residual), ""]);
    csv.row(&["summary", "worst_norm_ratio", &fmt_f64(worst_ratio), ""]);

    let mut body = Map::new();
    let mut kernel_rows = Vec::new();
    for &row in &cfg.green.kernel_rows {
        for k in window.sites() {
            let mut m = Map::new();
            m.insert("n".into(), Value::from(row));
            m.insert("k".into(), Value::from(k));
            m.insert("value".into(), json_complex(g.kernel(row, k)?));
            kernel_rows.push(Value::Object(m));
        }
    }
    body.insert("kernel".into(), Value::Array(kernel_rows));
    body.insert("inverse_checks".into(), Value::Array(inverse_rows));
    body.insert("worst_residual".into(), json_f64(worst_residual));
    body.insert("worst_norm_ratio".into(), json_f64(worst_ratio));
    body.insert("passed".into(), Value::Bool(passed));

    Ok(RunOutput {
        csv: csv.finish(),
        json: json_document("green", body),
        passed,
        lines: vec![format!(
            "{} green inverse: worst residual {:.3e}, worst bound ratio {:.9}",
            if passed { "PASS" } else { "FAIL" },
            worst_residual,
            worst_ratio
        )],
    })
}

pub fn run_spectrum(cfg: &RunConfig) -> Result<RunOutput> {
    let imp = ImpulseParams::standard(cfg.delta)?;
    let windows: Vec<LatticeWindow> = cfg
        .spectrum
        .window_halves
        .iter()
        .map(|&h| LatticeWindow::symmetric(h))
        .collect::<Result<_>>()?;
    let table = convergence_study(&cfg.potential, &imp, &windows, cfg.spectrum.disk_radius)?;

    let mut csv = CsvWriter::new();
    csv.row(&CSV_HEADER);
    for row in &table.rows {
        csv.row(&[
            "census",
            &row.num_sites.to_string(),
            &row.count_in_disk.to_string(),
            "",
        ]);
        for (i, ev) in row.eigenvalues_in_disk.iter().enumerate() {
            csv.row(&[
                "eigenvalue",
                &format!("{}:{}", row.num_sites, i),
                &fmt_complex(*ev),
                "",
            ]);
        }
    }
    let mut stable = true;
    for t in &table.transitions {
        csv.row(&[
            "drift",
            &format!("{}->{}", t.from_sites, t.to_sites),
            &fmt_f64(t.max_drift),
            &format!("matched {} ambiguous {}", t.matched, t.ambiguous),
        ]);
        stable &= t.ambiguous == 0;
    }
    let passed = stable;

    let mut body = Map::new();
    body.insert("disk_radius".into(), json_f64(table.disk_radius));
    body.insert(
        "census".into(),
        Value::Array(
            table
                .rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    m.insert("num_sites".into(), Value::from(r.num_sites));
                    m.insert("count_in_disk".into(), Value::from(r.count_in_disk));
                    m.insert(
                        "eigenvalues".into(),
                        Value::Array(
                            r.eigenvalues_in_disk
                                .iter()
                                .map(|e| json_complex(*e))
                                .collect(),
                        ),
                    );
                    Value::Object(m)
                })
                .collect(),
        ),
    );
    body.insert(
        "transitions".into(),
        Value::Array(
            table
                .transitions
                .iter()
                .map(|t| {
                    let mut m = Map::new();
                    m.insert("from_sites".into(), Value::from(t.from_sites));
                    m.insert("to_sites".into(), Value::from(t.to_sites));
                    m.insert("matched".into(), Value::from(t.matched));
                    m.insert("unmatched".into(), Value::from(t.unmatched));
                    m.insert("ambiguous".into(), Value::from(t.ambiguous));
                    m.insert("max_drift".into(), json_f64(t.max_drift));
                    m.insert("mean_drift".into(), json_f64(t.mean_drift));
                    Value::Object(m)
                })
                .collect(),
        ),
    );
    body.insert("passed".into(), Value::Bool(passed));

    let lines = table
        .transitions
        .iter()
        .map(|t| {
            format!(
                "{} spectrum drift {} -> {} sites: max {:.3e} ({} matched, {} ambiguous)",
                if passed { "PASS" } else { "FAIL" },
                t.from_sites,
                t.to_sites,
                t.max_drift,
                t.matched,
                t.ambiguous
            )
        })
        .collect();

    Ok(RunOutput {
        csv: csv.finish(),
        json: json_document("spectrum", body),
        passed,
        lines,
    })
}

pub fn run_verify(_cfg: &RunConfig) -> Result<RunOutput> {
    let reports = run_full_suite();
    let passed = reports.iter().all(|r| r.passed);

    let mut csv = CsvWriter::new();
    csv.row(&["id", "name", "passed", "metric", "threshold"]);
    for r in &reports {
        csv.row(&[
            r.id,
            r.name,
            if r.passed { "true" } else { "false" },
            &fmt_f64(r.metric),
            &fmt_f64(r.threshold),
        ]);
    }

    let mut body = Map::new();
    body.insert(
        "properties".into(),
        Value::Array(
            reports
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    m.insert("id".into(), Value::String(r.id.into()));
                    m.insert("name".into(), Value::String(r.name.into()));
                    m.insert("passed".into(), Value::Bool(r.passed));
                    m.insert("metric".into(), json_f64(r.metric));
                    m.insert("threshold".into(), json_f64(r.threshold));
                    m.insert("detail".into(), Value::String(r.detail.clone()));
                    Value::Object(m)
                })
                .collect(),
        ),
    );
    body.insert("passed".into(), Value::Bool(passed));

    let lines = reports.iter().map(|r| r.line()).collect();
    Ok(RunOutput {
        csv: csv.finish(),
        json: json_document("verify", body),
        passed,
        lines,
    })
}

/// Dispatch by subcommand name.
pub fn run(subcommand: &str, cfg: &RunConfig) -> Result<RunOutput> {
    match subcommand {
        "ivp" => run_ivp(cfg),
        "weyl" => run_weyl(cfg),
        "green" => run_green(cfg),
        "spectrum" => run_spectrum(cfg),
        "verify" => run_verify(cfg),
        other => Err(Error::Config(format!(
            "unknown subcommand '{other}' (expected ivp|weyl|green|spectrum|verify)"
        ))),
    }
}
