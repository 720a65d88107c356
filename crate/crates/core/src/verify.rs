//! The full invariant suite: every numbered acceptance property as a
//! self-contained check with its observed metric and threshold. Shared by the
//! `verify` subcommand and the acceptance test target.

use crate::lattice::{
    forward_diff, inner_product, norm, sbp_residuals, ComplexSeq, ImpulseParams, LatticeWindow,
    PotentialSpec, WeightSeq,
};
use crate::linalg;
use crate::operators::{
    apply_l, apply_m, hermiticity_defect_a, hermiticity_defect_l, GreenOperator,
};
use crate::recurrence::{solve_ivp, wronskian, wronskian_profile, CoefficientSeq, IvpSpec};
use crate::spectrum::{
    assemble, convergence_study, dirichlet_chain_eigenvalues, eigenvalues, oracle_eigenvalues,
    OperatorKind,
};
use crate::weyl::{
    base_solutions, characteristic_root, disk_ladders, limit_points, minimal_solution_oracle,
};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Outcome of one verified property.
#[derive(Debug, Clone)]
pub struct PropertyReport {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the property's metric.
    pub metric: f64,
    /// Bound the metric must stay under.
    pub threshold: f64,
    pub detail: String,
}

impl PropertyReport {
    fn from_metric(
        id: &'static str,
        name: &'static str,
        metric: f64,
        threshold: f64,
        detail: String,
    ) -> Self {
        Self {
            id,
            name,
            passed: metric <= threshold && metric.is_finite(),
            metric,
            threshold,
            detail,
        }
    }

    fn failure(id: &'static str, name: &'static str, detail: String) -> Self {
        Self {
            id,
            name,
            passed: false,
            metric: f64::INFINITY,
            threshold: 0.0,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<28} metric {:.3e} vs {:.3e}  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.metric,
            self.threshold,
            self.detail
        )
    }
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn five_potentials() -> Vec<PotentialSpec> {
    let explicit = {
        let mut vals = std::collections::BTreeMap::new();
        for n in -60..=60i64 {
            vals.insert(n, 2.0 + (n.rem_euclid(3)) as f64);
        }
        PotentialSpec::explicit(2.0, vals).expect("explicit table")
    };
    vec![
        PotentialSpec::constant(2.0).expect("potential"),
        PotentialSpec::constant(0.5).expect("potential"),
        PotentialSpec::power(1.0, 1.0).expect("potential"),
        PotentialSpec::power(1.0, 2.0).expect("potential"),
        explicit,
    ]
}

/// Criterion 1: piecewise-constant Wronskians with the junction relations,
/// over 200 random systems with windows up to +/-50.
pub fn criterion_wronskian_theory() -> PropertyReport {
    const ID: &str = "criterion-1";
    const NAME: &str = "wronskian piecewise theory";
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let a = -rng.gen_range(1..=50i64);
        let b = rng.gen_range(2..=51i64);
        let w = match LatticeWindow::new(a, b) {
            Ok(w) => w,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        let coeff = CoefficientSeq::from_fn(a, b, |_| {
            c64(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
        });
        let d1 = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-3.1..3.1));
        let d2 = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-3.1..3.1));
        let imp = match ImpulseParams::new(rng.gen_range(0.0..1.5), d1, d2) {
            Ok(i) => i,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        let mut seed = || {
            let lo = (-3i64).max(w.lo());
            let hi = 3i64.min(w.hi() - 1);
            IvpSpec::new(
                rng.gen_range(lo..=hi),
                c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        };
        let (s1, s2) = (seed(), seed());
        let solve = |s: &IvpSpec| solve_ivp(s, &coeff, &imp, &w);
        let (y, z) = match (solve(&s1), solve(&s2)) {
            (Ok(y), Ok(z)) => (y, z),
            _ => return PropertyReport::failure(ID, NAME, format!("solve failed, case {case}")),
        };
        let profile = match wronskian_profile(&y, &z) {
            Ok(p) => p,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        worst = worst.max(profile.max_deviation / profile.scale.max(f64::MIN_POSITIVE));
        let mag = profile.omega_plus.norm().max(profile.omega_minus.norm());
        if mag > 1e-10 {
            let (r1, r2) = profile.junction_residuals(&imp);
            worst = worst.max(r1 / mag).max(r2 / mag);
        }
    }
    PropertyReport::from_metric(ID, NAME, worst, 1e-9, "200 random systems".into())
}

/// Criterion 2: the base-solution Wronskian takes its exact piecewise values
/// for four junction angles and five potentials.
pub fn criterion_base_wronskian_values() -> PropertyReport {
    const ID: &str = "criterion-2";
    const NAME: &str = "base wronskian exact values";
    let w = match LatticeWindow::new(-10, 11) {
        Ok(w) => w,
        Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
    };
    let mut worst = 0.0f64;
    for delta in [
        0.0,
        std::f64::consts::FRAC_PI_6,
        std::f64::consts::FRAC_PI_4,
        1.4,
    ] {
        for q in five_potentials() {
            let (phi, theta) = match base_solutions(&q, delta, &w) {
                Ok(p) => p,
                Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
            };
            let e2 = Complex64::from_polar(1.0, 2.0 * delta);
            for n in w.lo()..w.hi() {
                let expect = match n {
                    0 => -e2,
                    n if n <= -1 => e2,
                    _ => c64(1.0, 0.0),
                };
                let got = wronskian(&phi, &theta, n).expect("range");
                // Far from the junction the two Wronskian products grow while
                // their difference stays unimodular, so rounding scales with
                // the product magnitude; near the junction (scale ~ 1) the
                // bound is the plain absolute one.
                let scale = phi.at(n).norm() * theta.at(n + 1).norm()
                    + phi.at(n + 1).norm() * theta.at(n).norm();
                worst = worst.max((got - expect).norm() / scale.max(1.0));
            }
        }
    }
    PropertyReport::from_metric(ID, NAME, worst, 1e-10, "4 angles x 5 potentials".into())
}

/// Criterion 3: both Hermiticity-defect identities on random decaying pairs,
/// with exact Hermiticity at angle zero.
pub fn criterion_hermiticity_defects() -> PropertyReport {
    const ID: &str = "criterion-3";
    const NAME: &str = "hermiticity defect identities";
    let w = match LatticeWindow::new(-9, 10) {
        Ok(w) => w,
        Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
    };
    let q = PotentialSpec::power(1.0, 1.0).expect("potential");
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut worst = 0.0f64;
    for delta in [
        0.0,
        std::f64::consts::FRAC_PI_6,
        std::f64::consts::FRAC_PI_4,
        1.3,
    ] {
        let imp = ImpulseParams::standard(delta).expect("impulse");
        for _ in 0..25 {
            let mut make = || {
                let mut y = ComplexSeq::zeros_on(&w);
                for n in (w.a() + 2)..=(w.b() - 2) {
                    if n != 0 && n != 1 {
                        y.set(n, c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                    }
                }
                y
            };
            let (y, z) = (make(), make());
            for (lhs, rhs) in [
                hermiticity_defect_l(&y, &z, &q, &imp).expect("defect L"),
                hermiticity_defect_a(&y, &z, &q, &imp).expect("defect A"),
            ] {
                let scale = (lhs.norm() + rhs.norm()).max(1.0);
                worst = worst.max((lhs - rhs).norm() / (1e-9 * scale) * 1e-9);
                if delta == 0.0 {
                    // Hermitian case: the defect itself must vanish.
                    worst = worst.max(lhs.norm() / (1e-12 * scale) * 1e-9);
                }
            }
        }
    }
    PropertyReport::from_metric(ID, NAME, worst, 1e-9, "100 random decaying pairs".into())
}

/// Criterion 4: nested disks, the radius/energy identity, oracle agreement
/// for the limit points, sign conditions, energy inequalities.
pub fn criterion_weyl_disks() -> PropertyReport {
    const ID: &str = "criterion-4";
    const NAME: &str = "weyl disk geometry";
    let mut worst = 0.0f64;
    let mut detail = String::new();
    let grid = [
        (PotentialSpec::constant(2.0).expect("q"), 0.0),
        (
            PotentialSpec::constant(2.0).expect("q"),
            std::f64::consts::FRAC_PI_6,
        ),
        (
            PotentialSpec::constant(0.5).expect("q"),
            std::f64::consts::FRAC_PI_4,
        ),
        (PotentialSpec::power(1.0, 1.0).expect("q"), 1.4),
        (
            PotentialSpec::power(1.0, 2.0).expect("q"),
            std::f64::consts::FRAC_PI_6,
        ),
    ];
    for (q, delta) in &grid {
        let w = match LatticeWindow::new(-30, 31) {
            Ok(w) => w,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        let (fwd, bwd, _) = match disk_ladders(q, *delta, &w) {
            Ok(l) => l,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        // Nesting on both sides, every consecutive pair.
        for ladder in [&fwd, &bwd] {
            for pair in ladder.windows(2) {
                let gap =
                    (pair[1].center - pair[0].center).norm() + pair[1].radius - pair[0].radius;
                worst = worst.max(gap / 1e-10 * 1e-9);
            }
        }
        // Geometric radius cross-check where the difference is conditioned.
        let (phi, theta) = match base_solutions(q, *delta, &w) {
            Ok(p) => p,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        for d in &fwd {
            if d.radius >= 1e-6 {
                let v0 = -phi.delta(d.index).expect("range") / theta.delta(d.index).expect("range");
                let err = ((d.center - v0).norm() - d.radius).abs();
                worst = worst.max(err / (1e-10 * d.center.norm().max(1.0)) * 1e-9);
            }
        }
        for d in &bwd {
            if d.radius >= 1e-6 {
                let u0 = -phi.delta(d.index - 1).expect("range")
                    / theta.delta(d.index - 1).expect("range");
                let err = ((d.center - u0).norm() - d.radius).abs();
                worst = worst.max(err / (1e-10 * d.center.norm().max(1.0)) * 1e-9);
            }
        }
        // Limit points: sign conditions and the energy inequalities are
        // enforced inside; oracle agreement is the two-route check.
        let pair = match limit_points(q, *delta, &w, 1e-8) {
            Ok(p) => p,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        let oracle = match minimal_solution_oracle(q, *delta, &w) {
            Ok(o) => o,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        let dv = (pair.v_hat - oracle.v_hat_alt).norm();
        let du = (pair.u_hat - oracle.u_hat_alt).norm();
        worst = worst.max(dv / (pair.v_enclosure + 1e-9) * 1e-9);
        worst = worst.max(du / (pair.u_enclosure + 1e-9) * 1e-9);
        detail = format!(
            "last forward radius {:.2e}",
            fwd.last().map(|d| d.radius).unwrap_or(0.0)
        );
    }
    // One deep ladder through the magnitude cap.
    let q = PotentialSpec::constant(2.0).expect("q");
    let w = match LatticeWindow::new(-300, 301) {
        Ok(w) => w,
        Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
    };
    match disk_ladders(&q, 0.3, &w) {
        Ok((fwd, bwd, _)) => {
            for ladder in [&fwd, &bwd] {
                for pair in ladder.windows(2) {
                    let gap =
                        (pair[1].center - pair[0].center).norm() + pair[1].radius - pair[0].radius;
                    worst = worst.max(gap / 1e-10 * 1e-9);
                }
            }
        }
        Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
    }
    PropertyReport::from_metric(ID, NAME, worst, 1e-9, detail)
}

/// Criterion 5: constant-potential closed forms: the summable solution's
/// ratio and the zero-angle chain spectra.
pub fn criterion_constant_closed_form() -> PropertyReport {
    const ID: &str = "criterion-5";
    const NAME: &str = "constant-potential closed form";
    let q = PotentialSpec::constant(2.0).expect("q");
    let w = match LatticeWindow::new(-30, 31) {
        Ok(w) => w,
        Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
    };
    let r = characteristic_root(2.0);
    let pair = match limit_points(&q, 0.0, &w, 1e-8) {
        Ok(p) => p,
        Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
    };
    let mut ratio_worst = 0.0f64;
    for n in 2..=(w.b() - 2) {
        let ratio = pair.psi.at(n + 1) / pair.psi.at(n);
        ratio_worst = ratio_worst.max((ratio - c64(r, 0.0)).norm());
    }
    let mut worst = ratio_worst / 1e-8 * 1e-9;

    let imp = ImpulseParams::standard(0.0).expect("impulse");
    for half in [1i64, 3, 5, 25] {
        let w = LatticeWindow::symmetric(half).expect("window");
        let n = w.num_sites(); // 2, 6, 10, 50
        let mat = match assemble(OperatorKind::A, &q, &imp, &w) {
            Ok(m) => m,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        let spec = match eigenvalues(&mat) {
            Ok(s) => s,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        let expect = dirichlet_chain_eigenvalues(2.0, n);
        for (got, want) in spec.eigenvalues.iter().zip(&expect) {
            worst = worst.max((got - c64(*want, 0.0)).norm());
        }
    }
    PropertyReport::from_metric(
        ID,
        NAME,
        worst,
        1e-9,
        format!("ratio deviation {ratio_worst:.3e} (<= 1e-8 scaled)"),
    )
}

/// Criterion 6: the Green operator inverts the truncated operator, matches a
/// dense solve away from the edges, and obeys the norm bound on the grid.
pub fn criterion_green_operator() -> PropertyReport {
    const ID: &str = "criterion-6";
    const NAME: &str = "green operator inverse";
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(1006);

    // (a) Defining-equation residual over 100 random inputs.
    {
        let w = match LatticeWindow::new(-40, 41) {
            Ok(w) => w,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        let delta = std::f64::consts::FRAC_PI_6;
        let q = PotentialSpec::constant(2.0).expect("q");
        let imp = ImpulseParams::standard(delta).expect("impulse");
        let g = match GreenOperator::build(&q, delta, &w, 1e-8) {
            Ok(g) => g,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        for _ in 0..100 {
            let mut f = ComplexSeq::zeros_on(&w);
            for n in w.sites() {
                f.set(n, c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
            let x = match g.apply_inverse(&f) {
                Ok(x) => x,
                Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
            };
            let lx = match apply_l(&x, &q, &imp) {
                Ok(l) => l,
                Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
            };
            let fnorm = norm(&f).expect("norm");
            for n in (w.a() + 1)..=(w.b() - 1) {
                if w.contains_site(n) {
                    worst = worst.max((lx.at(n) - f.at(n)).norm() / fnorm / 1e-8 * 1e-9);
                }
            }
        }
    }

    // (b) Dense-solve agreement away from the truncation edges.
    {
        let w = match LatticeWindow::new(-80, 81) {
            Ok(w) => w,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        let delta = std::f64::consts::FRAC_PI_6;
        let q = PotentialSpec::constant(2.0).expect("q");
        let imp = ImpulseParams::standard(delta).expect("impulse");
        let g = match GreenOperator::build(&q, delta, &w, 1e-8) {
            Ok(g) => g,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        let mat = match assemble(OperatorKind::L, &q, &imp, &w) {
            Ok(m) => m,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        let fac = linalg::lu_factor(mat.entries());
        let sites = mat.sites().to_vec();
        let nn = sites.len();
        let depth = (nn as f64 * 0.1).ceil() as usize;
        for _ in 0..20 {
            let mut f = ComplexSeq::zeros_on(&w);
            for &s in &sites {
                f.set(s, c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
            let fvec: Vec<Complex64> = sites.iter().map(|&s| f.at(s)).collect();
            let dense = fac.solve(&fvec);
            let x = match g.apply_inverse(&f) {
                Ok(x) => x,
                Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
            };
            let fnorm = norm(&f).expect("norm");
            for (i, &s) in sites.iter().enumerate() {
                if i >= depth && i < nn - depth {
                    worst = worst.max((x.at(s) - dense[i]).norm() / fnorm / 1e-7 * 1e-9);
                }
            }
        }
    }

    // (c) Norm bound across the angle/bound grid.
    {
        for &delta in &[
            0.0,
            std::f64::consts::FRAC_PI_6,
            std::f64::consts::FRAC_PI_4,
            std::f64::consts::FRAC_PI_3 - 0.1,
        ] {
            for &cq in &[0.5, 1.0, 2.0, 10.0] {
                let w = match LatticeWindow::new(-40, 41) {
                    Ok(w) => w,
                    Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
                };
                let q = PotentialSpec::constant(cq).expect("q");
                let g = match GreenOperator::build(&q, delta, &w, 1e-8) {
                    Ok(g) => g,
                    Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
                };
                for _ in 0..10 {
                    let mut f = ComplexSeq::zeros_on(&w);
                    for n in w.sites() {
                        f.set(n, c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                    }
                    let x = match g.apply_inverse(&f) {
                        Ok(x) => x,
                        Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
                    };
                    let ratio =
                        norm(&x).expect("norm") * cq * delta.cos() / norm(&f).expect("norm");
                    worst = worst.max((ratio - 1.0) / 1e-9 * 1e-9);
                }
            }
        }
    }
    PropertyReport::from_metric(ID, NAME, worst, 1e-9, "identity, dense solve, bound".into())
}

fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_way = |x: &[Complex64], y: &[Complex64]| -> f64 {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Criterion 7: QR spectra match determinant-based root finding on every
/// small assembled matrix.
pub fn criterion_spectrum_oracle() -> PropertyReport {
    const ID: &str = "criterion-7";
    const NAME: &str = "small-matrix spectrum oracle";
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for q in [
        PotentialSpec::constant(2.0).expect("q"),
        PotentialSpec::power(1.0, 1.0).expect("q"),
    ] {
        for (a, b) in [(-1i64, 2i64), (-2, 3), (-3, 4), (-4, 5), (-5, 6), (-6, 7)] {
            for delta in [
                0.0,
                std::f64::consts::FRAC_PI_6,
                std::f64::consts::FRAC_PI_4,
                1.3,
            ] {
                let w = match LatticeWindow::new(a, b) {
                    Ok(w) => w,
                    Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
                };
                if w.num_sites() > 12 {
                    continue;
                }
                let imp = ImpulseParams::standard(delta).expect("impulse");
                let mat = match assemble(OperatorKind::A, &q, &imp, &w) {
                    Ok(m) => m,
                    Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
                };
                let spec = match eigenvalues(&mat) {
                    Ok(s) => s,
                    Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
                };
                let oracle = match oracle_eigenvalues(&mat) {
                    Ok(o) => o,
                    Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
                };
                worst = worst.max(hausdorff(&spec.eigenvalues, &oracle));
                count += 1;
            }
        }
    }
    PropertyReport::from_metric(ID, NAME, worst, 1e-6, format!("{count} matrices"))
}

/// Criterion 8: the eigenvalue census in a fixed disk stabilizes under window
/// growth for a growing potential and keeps growing for the constant control.
pub fn criterion_discreteness_evidence() -> PropertyReport {
    const ID: &str = "criterion-8";
    const NAME: &str = "discreteness evidence";
    let imp = ImpulseParams::standard(std::f64::consts::FRAC_PI_6).expect("impulse");
    let windows = [
        LatticeWindow::symmetric(20).expect("window"),
        LatticeWindow::symmetric(40).expect("window"),
    ];
    let growing = PotentialSpec::power(1.0, 1.0).expect("q");
    let table = match convergence_study(&growing, &imp, &windows, 10.0) {
        Ok(t) => t,
        Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
    };
    let counts_equal = table.rows[0].count_in_disk == table.rows[1].count_in_disk;
    let drift = table.transitions[0].max_drift;
    let no_ambiguity = table.transitions[0].ambiguous == 0;

    let control = PotentialSpec::constant(2.0).expect("q");
    let control_table = match convergence_study(&control, &imp, &windows, 10.0) {
        Ok(t) => t,
        Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
    };
    let control_grows = control_table.rows[1].count_in_disk > control_table.rows[0].count_in_disk;

    let metric = if counts_equal && no_ambiguity && control_grows {
        drift
    } else {
        f64::INFINITY
    };
    PropertyReport::from_metric(
        ID,
        NAME,
        metric,
        1e-6,
        format!(
            "census {} -> {}, control {} -> {}",
            table.rows[0].count_in_disk,
            table.rows[1].count_in_disk,
            control_table.rows[0].count_in_disk,
            control_table.rows[1].count_in_disk
        ),
    )
}

/// Criterion 9: the two-site matrix matches the hand elimination and its
/// quadratic-formula eigenvalues on a grid of angles and bounds.
pub fn criterion_minimal_window() -> PropertyReport {
    const ID: &str = "criterion-9";
    const NAME: &str = "minimal-window analytic case";
    let w = match LatticeWindow::new(-1, 2) {
        Ok(w) => w,
        Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
    };
    let mut worst = 0.0f64;
    for delta in [0.0, 0.3, std::f64::consts::FRAC_PI_4, 1.2] {
        for cq in [0.5, 1.0, 2.0, 10.0] {
            let q = PotentialSpec::constant(cq).expect("q");
            let imp = ImpulseParams::standard(delta).expect("impulse");
            let mat = match assemble(OperatorKind::A, &q, &imp, &w) {
                Ok(m) => m,
                Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
            };
            let e2 = Complex64::from_polar(1.0, 2.0 * delta);
            let expect = [
                [e2.conj() * (1.0 + cq) + 1.0, c64(-1.0, 0.0)],
                [-e2, e2 * (2.0 + cq)],
            ];
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((mat.at(i, j) - expect[i][j]).norm());
                }
            }
            // Quadratic-formula eigenvalues of the hand matrix.
            let (ma, mb, mc, md) = (expect[0][0], expect[0][1], expect[1][0], expect[1][1]);
            let half = (ma + md) * 0.5;
            let disc = (half * half - (ma * md - mb * mc)).sqrt();
            let mut want = vec![half + disc, half - disc];
            want.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
            let spec = match eigenvalues(&mat) {
                Ok(s) => s,
                Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
            };
            for (got, w2) in spec.eigenvalues.iter().zip(&want) {
                worst = worst.max((got - w2).norm());
            }
            if delta == 0.0 {
                worst = worst.max((spec.eigenvalues[0] - c64(cq + 1.0, 0.0)).norm());
                worst = worst.max((spec.eigenvalues[1] - c64(cq + 3.0, 0.0)).norm());
            }
        }
    }
    PropertyReport::from_metric(ID, NAME, worst, 1e-12, "4 angles x 4 bounds".into())
}

/// Summation-by-parts identities over random data.
pub fn invariant_summation_by_parts() -> PropertyReport {
    const ID: &str = "invariant-sbp";
    const NAME: &str = "summation by parts";
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = rng.gen_range(-8..-1i64);
        let b = a + rng.gen_range(2..10i64);
        let make = |rng: &mut ChaCha8Rng| {
            ComplexSeq::from_fn(a - 1, b + 1, |_| {
                c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
        };
        let f = make(&mut rng);
        let g = make(&mut rng);
        let scale = (f.max_abs() * g.max_abs() * (b - a + 1) as f64).max(1.0);
        match sbp_residuals(&f, &g, a, b) {
            Ok(res) => {
                for r in res {
                    worst = worst.max(r.norm() / scale);
                }
            }
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        }
    }
    PropertyReport::from_metric(ID, NAME, worst, 1e-12, "100 random pairs".into())
}

/// Unimodular weights and the unitarity of the weight operator.
pub fn invariant_weight_unitarity() -> PropertyReport {
    const ID: &str = "invariant-weights";
    const NAME: &str = "weight operator unitarity";
    let mut worst = 0.0f64;
    let w = LatticeWindow::new(-8, 9).expect("window");
    let mut rng = ChaCha8Rng::seed_from_u64(1011);
    for delta in [0.0, 0.4, 1.1, 1.5] {
        let weights = WeightSeq::new(delta).expect("weights");
        for n in w.sites() {
            worst = worst.max((weights.rho(n).norm() - 1.0).abs() / 1e-15 * 1e-14);
        }
        for n in w.lo()..=w.hi() {
            worst = worst.max((weights.sigma(n).norm() - 1.0).abs() / 1e-15 * 1e-14);
        }
        let y = ComplexSeq::from_fn(w.lo(), w.hi(), |_| {
            c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let my = apply_m(&y, delta, false).expect("apply");
        let ny = norm(&y).expect("norm");
        worst = worst.max((norm(&my).expect("norm") - ny).abs() / ny);
        let back = apply_m(&my, delta, true).expect("apply");
        for n in w.lo()..=w.hi() {
            worst = worst.max((back.at(n) - y.at(n)).norm() / (1.0 + y.at(n).norm()));
        }
    }
    PropertyReport::from_metric(ID, NAME, worst, 1e-14, "angles {0, .4, 1.1, 1.5}".into())
}

/// Inner product positivity and puncture exclusion.
pub fn invariant_inner_product() -> PropertyReport {
    const ID: &str = "invariant-inner-product";
    const NAME: &str = "inner product structure";
    let w = LatticeWindow::new(-7, 8).expect("window");
    let mut rng = ChaCha8Rng::seed_from_u64(1012);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let y = ComplexSeq::from_fn(w.lo(), w.hi(), |_| {
            c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let ip = inner_product(&y, &y).expect("inner product");
        let sum_sq: f64 = w.sites().map(|n| y.at(n).norm_sqr()).sum();
        if ip.re < 0.0 {
            return PropertyReport::failure(ID, NAME, "negative self inner product".into());
        }
        worst = worst.max(ip.im.abs() / sum_sq.max(f64::MIN_POSITIVE));
        // forward then backward difference reproduces the second difference
        let fd = forward_diff(&y).expect("diff");
        for n in (y.lo() + 1)..fd.hi() {
            let dd = fd.at(n) - fd.at(n - 1);
            let direct = y.at(n + 1) - 2.0 * y.at(n) + y.at(n - 1);
            worst = worst.max((dd - direct).norm() / (1.0 + direct.norm()));
        }
    }
    PropertyReport::from_metric(ID, NAME, worst, 1e-15, "50 random sequences".into())
}

/// The truncated operator's smallest singular value respects the resolvent
/// bound at the matrix level.
pub fn invariant_sigma_min_bound() -> PropertyReport {
    const ID: &str = "invariant-sigma-min";
    const NAME: &str = "kernel triviality bound";
    let w = LatticeWindow::new(-15, 16).expect("window");
    let mut worst: f64 = f64::NEG_INFINITY;
    for delta in [0.0, std::f64::consts::FRAC_PI_6, 1.2] {
        for cq in [0.5, 2.0, 10.0] {
            let q = PotentialSpec::constant(cq).expect("q");
            let imp = ImpulseParams::standard(delta).expect("impulse");
            let mat = match assemble(OperatorKind::L, &q, &imp, &w) {
                Ok(m) => m,
                Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
            };
            let sigma = match linalg::smallest_singular_value(mat.entries(), 60) {
                Ok(s) => s,
                Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
            };
            // Violation amount; must stay below 1e-9.
            worst = worst.max(cq * delta.cos() - 1e-9 - sigma);
        }
    }
    PropertyReport::from_metric(
        ID,
        NAME,
        worst.max(0.0),
        0.0,
        "sigma_min >= c cos(delta) - 1e-9".into(),
    )
}

/// Junction structure of assembled matrices: exactly two couplings reach
/// across the puncture.
pub fn invariant_junction_structure() -> PropertyReport {
    const ID: &str = "invariant-junction";
    const NAME: &str = "junction matrix structure";
    let q = PotentialSpec::power(1.0, 1.0).expect("q");
    for (a, b) in [(-1i64, 2i64), (-3, 5), (-8, 9)] {
        let w = LatticeWindow::new(a, b).expect("window");
        let imp = ImpulseParams::standard(0.77).expect("impulse");
        let mat = match assemble(OperatorKind::A, &q, &imp, &w) {
            Ok(m) => m,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        let cross = mat.cross_puncture_entries();
        if cross.len() != 2 {
            return PropertyReport::failure(
                ID,
                NAME,
                format!("expected 2 cross-puncture entries, got {}", cross.len()),
            );
        }
    }
    PropertyReport::from_metric(ID, NAME, 0.0, 0.5, "three window shapes".into())
}

/// Square-summability proxy: geometric decay of tail mass for the constant
/// potential.
pub fn invariant_tail_proxy() -> PropertyReport {
    const ID: &str = "invariant-tail";
    const NAME: &str = "summable tail proxy";
    let q = PotentialSpec::constant(2.0).expect("q");
    let w = LatticeWindow::new(-25, 26).expect("window");
    let pair = match limit_points(&q, 0.0, &w, 1e-8) {
        Ok(p) => p,
        Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
    };
    let r2 = characteristic_root(2.0).powi(2);
    let tail = |n1: i64| -> f64 { (n1..=w.b()).map(|n| pair.psi.at(n).norm_sqr()).sum() };
    let mut worst = 0.0f64;
    for n1 in 2..=(w.b() - 4) {
        worst = worst.max(tail(n1 + 1) / tail(n1) - r2);
    }
    PropertyReport::from_metric(ID, NAME, worst, 0.05, "tail ratio minus r^2".into())
}

/// Hermitian control: at angle zero every truncated eigenvalue is real.
pub fn invariant_zero_angle_reality() -> PropertyReport {
    const ID: &str = "invariant-reality";
    const NAME: &str = "zero-angle real spectrum";
    let imp = ImpulseParams::standard(0.0).expect("impulse");
    let mut worst = 0.0f64;
    for q in [
        PotentialSpec::constant(2.0).expect("q"),
        PotentialSpec::power(1.0, 1.0).expect("q"),
    ] {
        let w = LatticeWindow::symmetric(15).expect("window");
        let mat = match assemble(OperatorKind::A, &q, &imp, &w) {
            Ok(m) => m,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        let spec = match eigenvalues(&mat) {
            Ok(s) => s,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        for ev in &spec.eigenvalues {
            worst = worst.max(ev.im.abs());
        }
    }
    PropertyReport::from_metric(ID, NAME, worst, 1e-10, "constant and growing q".into())
}

/// Unit Wronskian anchor at every index of the right half-line.
pub fn invariant_unit_wronskian_anchor() -> PropertyReport {
    const ID: &str = "invariant-anchor";
    const NAME: &str = "unit wronskian anchor";
    let q = PotentialSpec::power(1.0, 1.0).expect("q");
    let w = LatticeWindow::new(-8, 9).expect("window");
    let mut worst = 0.0f64;
    for delta in [0.0, 0.9] {
        let (phi, theta) = match base_solutions(&q, delta, &w) {
            Ok(p) => p,
            Err(e) => return PropertyReport::failure(ID, NAME, e.to_string()),
        };
        for b in 1..w.hi() {
            let direct = phi.at(b + 1) * theta.delta(b).expect("range")
                - phi.delta(b).expect("range") * theta.at(b + 1);
            let scale = phi.at(b + 1).norm() * theta.at(b).norm()
                + phi.at(b).norm() * theta.at(b + 1).norm();
            worst = worst.max((direct - c64(1.0, 0.0)).norm() / scale.max(1.0));
        }
    }
    PropertyReport::from_metric(ID, NAME, worst, 1e-9, "both halves of the grid".into())
}

/// Runs every property in order; oracle-backed checks come before the larger
/// spectral runs they validate.
pub fn run_full_suite() -> Vec<PropertyReport> {
    vec![
        invariant_summation_by_parts(),
        invariant_weight_unitarity(),
        invariant_inner_product(),
        criterion_wronskian_theory(),
        criterion_base_wronskian_values(),
        criterion_hermiticity_defects(),
        criterion_weyl_disks(),
        criterion_constant_closed_form(),
        criterion_spectrum_oracle(),
        criterion_green_operator(),
        invariant_sigma_min_bound(),
        invariant_junction_structure(),
        invariant_tail_proxy(),
        invariant_unit_wronskian_anchor(),
        invariant_zero_angle_reality(),
        criterion_discreteness_evidence(),
        criterion_minimal_window(),
    ]
}
