//! The difference operators on a truncated window: ghost-point evaluation,
//! the unitary weight operator, Hermiticity-defect identities, the Green
//! kernel built from the square-summable pair, and the bounded inverse it
//! generates.

use crate::csum::{ComplexSum, NeumaierSum};
use crate::lattice::{
    inner_product, norm, ComplexSeq, ImpulseParams, LatticeWindow, PotentialSpec, WeightSeq,
};
use crate::recurrence::{solution_residual, wronskian, CoefficientSeq};
use crate::weyl::{limit_points, WeylPair};
use crate::{Error, Result};
use num_complex::Complex64;

/// Ghost values `(y_0, y_1)` reconstructed from the junction conditions.
pub fn junction_ghosts(y: &ComplexSeq, imp: &ImpulseParams) -> Result<(Complex64, Complex64)> {
    let ym1 = y.try_at(-1)?;
    let y2 = y.try_at(2)?;
    let y1 = ym1 / imp.d1();
    let y0 = ym1 + imp.d2() * (y2 - y1);
    Ok((y0, y1))
}

/// Applies the second-difference operator with potential `q` to `y`,
/// reconstructing the ghost values from the junction conditions. The result
/// carries values on the active sites; the punctured and edge slots are zero.
/// Rows at the window edges use the values stored at `a-1` and `b+1` (zero
/// for truncated-operator semantics).
pub fn apply_l(y: &ComplexSeq, q: &PotentialSpec, imp: &ImpulseParams) -> Result<ComplexSeq> {
    if !imp.is_standard() {
        return Err(Error::InvalidImpulse(
            "the operator is defined for the standard junction d1 = 1, d2 = e^(2 i delta)"
                .to_string(),
        ));
    }
    let window = y.window()?;
    let (g0, g1) = junction_ghosts(y, imp)?;
    let val = |n: i64| -> Complex64 {
        match n {
            0 => g0,
            1 => g1,
            _ => y.at(n),
        }
    };
    let mut out = ComplexSeq::zeros(y.lo(), y.hi());
    for n in window.sites() {
        let qn = q.value(n)?;
        let ly = -(val(n + 1) - 2.0 * val(n) + val(n - 1)) + qn * val(n);
        out.set(n, ly);
    }
    Ok(out)
}

/// Applies the unitary weight operator (or its inverse) on the active sites;
/// all other stored slots pass through unchanged.
pub fn apply_m(y: &ComplexSeq, delta: f64, inverse: bool) -> Result<ComplexSeq> {
    let window = y.window()?;
    let weights = WeightSeq::new(delta)?;
    let mut out = y.clone();
    for n in window.sites() {
        let rho = weights.rho(n);
        let factor = if inverse { rho.conj() } else { rho };
        out.set(n, factor * y.at(n));
    }
    Ok(out)
}

fn require_edge_decay(y: &ComplexSeq, window: &LatticeWindow) -> Result<()> {
    let scale = y.max_abs().max(f64::MIN_POSITIVE);
    for n in [window.lo(), window.a(), window.b(), window.hi()] {
        let mag = y.at(n).norm();
        if mag > 1e-12 * scale {
            return Err(Error::DecayViolation {
                index: n,
                magnitude: mag,
            });
        }
    }
    Ok(())
}

/// Both sides of the Hermiticity-defect identity for the second-difference
/// operator: the inner-product defect and its closed junction-boundary form.
pub fn hermiticity_defect_l(
    y: &ComplexSeq,
    z: &ComplexSeq,
    q: &PotentialSpec,
    imp: &ImpulseParams,
) -> Result<(Complex64, Complex64)> {
    let window = y.window()?;
    require_edge_decay(y, &window)?;
    require_edge_decay(z, &window)?;
    let ly = apply_l(y, q, imp)?;
    let lz = apply_l(z, q, imp)?;
    let lhs = inner_product(&ly, z)? - inner_product(y, &lz)?;

    let (y0, _) = junction_ghosts(y, imp)?;
    let (z0, _) = junction_ghosts(z, imp)?;
    let dy = y0 - y.at(-1);
    let dz = z0 - z.at(-1);
    let e2 = Complex64::from_polar(1.0, 2.0 * imp.delta());
    let rhs = (e2.conj() - 1.0) * dy * z.at(-1).conj() - (e2 - 1.0) * y.at(-1) * dz.conj();
    Ok((lhs, rhs))
}

/// Both sides of the Hermiticity-defect identity for the weighted operator
/// `M^{-1} L`: boundary terms plus the side-split energy sums.
pub fn hermiticity_defect_a(
    y: &ComplexSeq,
    z: &ComplexSeq,
    q: &PotentialSpec,
    imp: &ImpulseParams,
) -> Result<(Complex64, Complex64)> {
    let window = y.window()?;
    require_edge_decay(y, &window)?;
    require_edge_decay(z, &window)?;
    let delta = imp.delta();
    let ay = apply_m(&apply_l(y, q, imp)?, delta, true)?;
    let az = apply_m(&apply_l(z, q, imp)?, delta, true)?;
    let lhs = inner_product(&ay, z)? - inner_product(y, &az)?;

    let (y0, y1) = junction_ghosts(y, imp)?;
    let (z0, z1) = junction_ghosts(z, imp)?;
    let yv = |n: i64| match n {
        0 => y0,
        1 => y1,
        _ => y.at(n),
    };
    let zv = |n: i64| match n {
        0 => z0,
        1 => z1,
        _ => z.at(n),
    };
    let e2 = Complex64::from_polar(1.0, 2.0 * delta);
    let dy = y0 - y.at(-1);
    let dz = z0 - z.at(-1);
    let boundary = (1.0 - e2.conj()) * dy * z.at(-1).conj() - (1.0 - e2) * y.at(-1) * dz.conj();
    let two_i_sin = Complex64::new(0.0, 2.0 * (2.0 * delta).sin());
    let mut left = ComplexSum::new();
    for n in window.a()..=-1 {
        let grad = (yv(n) - yv(n - 1)) * (zv(n) - zv(n - 1)).conj();
        left.add(grad + q.value(n)? * yv(n) * zv(n).conj());
    }
    let mut right = ComplexSum::new();
    for n in 2..=window.b() {
        let grad = (yv(n) - yv(n - 1)) * (zv(n) - zv(n - 1)).conj();
        right.add(grad + q.value(n)? * yv(n) * zv(n).conj());
    }
    let rhs = boundary - two_i_sin * left.value() + two_i_sin * right.value();
    Ok((lhs, rhs))
}

/// The Green kernel data: the square-summable pair and the piecewise-constant
/// Wronskian that divides it.
#[derive(Debug, Clone)]
pub struct GreenOperator {
    psi: ComplexSeq,
    chi: ComplexSeq,
    w_left: Complex64,
    w_zero: Complex64,
    w_right: Complex64,
    potential: PotentialSpec,
    delta: f64,
}

impl GreenOperator {
    /// Builds the kernel from a limit-point pair, validating the stored
    /// piecewise Wronskian constants against direct evaluation at every index.
    pub fn new(pair: &WeylPair, delta: f64, q: &PotentialSpec) -> Result<Self> {
        let diff = pair.u_hat - pair.v_hat;
        if diff.norm() == 0.0 {
            return Err(Error::InvariantBreach(
                "limit points coincide; kernel denominator vanishes".to_string(),
            ));
        }
        let e2 = Complex64::from_polar(1.0, 2.0 * delta);
        let op = Self {
            psi: pair.psi.clone(),
            chi: pair.chi.clone(),
            w_left: diff * e2,
            w_zero: -diff * e2,
            w_right: diff,
            potential: q.clone(),
            delta,
        };
        for k in op.psi.lo()..op.psi.hi() {
            let direct = wronskian(&op.psi, &op.chi, k)?;
            let stored = op.wronskian_at(k);
            if (direct - stored).norm() > 1e-8 * stored.norm() {
                return Err(Error::InvariantBreach(format!(
                    "kernel Wronskian mismatch at k = {k}: direct {direct}, stored {stored}"
                )));
            }
        }
        Ok(op)
    }

    /// Convenience constructor running the disk machinery first.
    pub fn build(
        q: &PotentialSpec,
        delta: f64,
        window: &LatticeWindow,
        disk_tol: f64,
    ) -> Result<Self> {
        let pair = limit_points(q, delta, window, disk_tol)?;
        Self::new(&pair, delta, q)
    }

    pub fn psi(&self) -> &ComplexSeq {
        &self.psi
    }

    pub fn chi(&self) -> &ComplexSeq {
        &self.chi
    }

    pub fn c_bound(&self) -> f64 {
        self.potential.c()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The piecewise-constant Wronskian dividing the kernel.
    pub fn wronskian_at(&self, k: i64) -> Complex64 {
        match k {
            0 => self.w_zero,
            k if k <= -1 => self.w_left,
            _ => self.w_right,
        }
    }

    /// Two-branch kernel value; both branches agree on the diagonal.
    pub fn kernel(&self, n: i64, k: i64) -> Result<Complex64> {
        let (psi, chi) = (&self.psi, &self.chi);
        let v = if k <= n {
            chi.try_at(k)? * psi.try_at(n)? / self.wronskian_at(k)
        } else {
            chi.try_at(n)? * psi.try_at(k)? / self.wronskian_at(k)
        };
        Ok(v)
    }

    /// Applies the inverse operator to data `f` (punctured sites forced to
    /// zero) through prefix/suffix compensated sums, then verifies the
    /// defining equation, the junction conditions, and the norm bound.
    pub fn apply_inverse(&self, f: &ComplexSeq) -> Result<ComplexSeq> {
        let window = self.psi.window()?;
        if !f.covers(window.a(), window.b()) {
            return Err(Error::InsufficientCoverage {
                lo: window.a(),
                hi: window.b(),
            });
        }
        let (lo, hi) = (self.psi.lo(), self.psi.hi());
        let data = |k: i64| -> Complex64 {
            if window.contains_site(k) {
                f.at(k)
            } else {
                Complex64::new(0.0, 0.0)
            }
        };

        // Prefix sums of chi_k f_k / W_k and suffix sums of psi_k f_k / W_k.
        let len = (hi - lo + 1) as usize;
        let mut prefix = vec![Complex64::new(0.0, 0.0); len];
        let mut acc = ComplexSum::new();
        for (i, k) in (lo..=hi).enumerate() {
            acc.add(self.chi.at(k) * data(k) / self.wronskian_at(k));
            prefix[i] = acc.value();
        }
        let mut suffix = vec![Complex64::new(0.0, 0.0); len + 1];
        let mut acc = ComplexSum::new();
        for i in (0..len).rev() {
            let k = lo + i as i64;
            acc.add(self.psi.at(k) * data(k) / self.wronskian_at(k));
            suffix[i] = acc.value();
        }

        let mut g = ComplexSeq::zeros(lo, hi);
        for (i, n) in (lo..=hi).enumerate() {
            let v = self.psi.at(n) * prefix[i] + self.chi.at(n) * suffix[i + 1];
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Overflow { index: n });
            }
            g.set(n, v);
        }

        self.verify_inverse(&g, f, &window)?;
        Ok(g)
    }

    fn verify_inverse(&self, g: &ComplexSeq, f: &ComplexSeq, window: &LatticeWindow) -> Result<()> {
        let f_norm = {
            let mut s = NeumaierSum::new();
            for n in window.sites() {
                s.add(f.at(n).norm_sqr());
            }
            s.value().sqrt()
        };
        let imp = ImpulseParams::standard(self.delta)?;

        // Defining equation at the active sites, with the ghost values
        // reconstructed from the junction conditions.
        let (g0, g1) = junction_ghosts(g, &imp)?;
        let gv = |n: i64| match n {
            0 => g0,
            1 => g1,
            _ => g.at(n),
        };
        for n in window.sites() {
            let qn = Complex64::new(self.potential.value(n)?, 0.0);
            let resid = -(gv(n + 1) - 2.0 * gv(n) + gv(n - 1)) + qn * gv(n) - f.at(n);
            if resid.norm() > 1e-8 * f_norm.max(f64::MIN_POSITIVE) {
                return Err(Error::InvariantBreach(format!(
                    "inverse application fails the defining equation at n = {n}: \
                     residual {:.3e} vs scale {:.3e}",
                    resid.norm(),
                    f_norm
                )));
            }
        }

        // Junction conditions.
        let scale = g.at(-1).norm() + g0.norm() + g1.norm() + g.at(2).norm();
        let r1 = (g.at(-1) - imp.d1() * g1).norm();
        let r2 = ((g0 - g.at(-1)) - imp.d2() * (g.at(2) - g1)).norm();
        if r1 + r2 > 1e-8 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::InvariantBreach(format!(
                "inverse application violates the junction conditions: {:.3e}",
                r1 + r2
            )));
        }

        // Norm bound.
        let g_norm = norm(g)?;
        let bound = f_norm / (self.potential.c() * self.delta.cos());
        if g_norm > bound + 1e-9 {
            return Err(Error::InvariantBreach(format!(
                "norm bound violated: |g| = {g_norm:.6e} > {bound:.6e} + 1e-9"
            )));
        }
        Ok(())
    }
}

/// Left-minus-right residuals of the two one-sided energy identities and the
/// combined weighted identity, for a verified solution `y` of the
/// nonhomogeneous problem with data `f`.
pub fn energy_identity_residual(
    y: &ComplexSeq,
    f: &ComplexSeq,
    q: &PotentialSpec,
    imp: &ImpulseParams,
    a: i64,
    b: i64,
) -> Result<(Complex64, Complex64, f64)> {
    let window = y.window()?;
    if a < window.a() || a > -1 || b > window.b() || b < 2 {
        return Err(Error::IndexOutOfRange {
            index: if a < window.a() { a } else { b },
            lo: window.a(),
            hi: window.b(),
        });
    }
    let coeff = CoefficientSeq::on_window(q, &window)?;
    let (site, resid) = solution_residual(y, &coeff, imp, Some(f))?;
    if resid > 1e-8 {
        return Err(Error::NotASolution {
            site,
            residual: resid,
        });
    }
    let data = |n: i64| -> Complex64 {
        if f.covers(n, n) && window.contains_site(n) {
            f.at(n)
        } else {
            Complex64::new(0.0, 0.0)
        }
    };

    // Right-side identity over [2, b].
    let mut sum_r = NeumaierSum::new();
    let mut fsum_r = ComplexSum::new();
    for n in 2..=b {
        sum_r.add(y.delta(n)?.norm_sqr() + q.value(n)? * y.at(n).norm_sqr());
        fsum_r.add(data(n) * y.at(n).conj());
    }
    let boundary_r = y.delta(b)? * y.at(b + 1).conj() - y.delta(1)? * y.at(2).conj();
    let res_57 = Complex64::new(sum_r.value(), 0.0) - boundary_r - fsum_r.value();

    // Left-side identity over [a, -1].
    let mut sum_l = NeumaierSum::new();
    let mut fsum_l = ComplexSum::new();
    for n in a..=-1 {
        sum_l.add(y.delta(n)?.norm_sqr() + q.value(n)? * y.at(n).norm_sqr());
        fsum_l.add(data(n) * y.at(n).conj());
    }
    let boundary_l = y.delta(-1)? * y.at(0).conj() - y.delta(a - 1)? * y.at(a).conj();
    let res_58 = Complex64::new(sum_l.value(), 0.0) - boundary_l - fsum_l.value();

    // Combined weighted identity.
    let weights = WeightSeq::new(imp.delta())?;
    let cosd = imp.delta().cos();
    let lhs_62 = cosd * (sum_l.value() + sum_r.value());
    let mut fsum_c = ComplexSum::new();
    for n in a..=-1 {
        fsum_c.add(weights.sigma(n) * data(n) * y.at(n).conj());
    }
    for n in 2..=b {
        fsum_c.add(weights.sigma(n) * data(n) * y.at(n).conj());
    }
    let boundary_c = weights.sigma(b) * y.delta(b)? * y.at(b + 1).conj()
        - weights.sigma(a - 1) * y.delta(a - 1)? * y.at(a).conj();
    let res_62 = lhs_62 - (boundary_c + fsum_c.value()).re;

    Ok((res_57, res_58, res_62))
}
