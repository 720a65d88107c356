//! Second-order difference equations with junction (impulse) conditions:
//! initial-value propagation across the puncture, Wronskians and their
//! piecewise structure, and the variation-of-parameters particular solution.

use crate::csum::ComplexSum;
use crate::lattice::{ComplexSeq, ImpulseParams, LatticeWindow, PotentialSpec};
use crate::{Error, Result};
use num_complex::Complex64;

/// Initial data `y_{n0} = c0`, `delta y_{n0} = c1`.
#[derive(Debug, Clone, Copy)]
pub struct IvpSpec {
    pub n0: i64,
    pub c0: Complex64,
    pub c1: Complex64,
}

impl IvpSpec {
    pub fn new(n0: i64, c0: Complex64, c1: Complex64) -> Self {
        Self { n0, c0, c1 }
    }

    /// Seed pair `(y_{n0}, y_{n0 + 1})`.
    pub fn seed_pair(&self) -> (Complex64, Complex64) {
        (self.c0, self.c0 + self.c1)
    }
}

/// Equation coefficients `p_n` on the active sites of an index range, with
/// the shifted form `p_n + 2` used by the three-term recurrence.
#[derive(Debug, Clone)]
pub struct CoefficientSeq {
    lo: i64,
    p: Vec<Complex64>,
}

impl CoefficientSeq {
    /// Coefficients from a closure, evaluated at active sites of `[lo, hi]`.
    pub fn from_fn(lo: i64, hi: i64, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let p = (lo..=hi)
            .map(|n| {
                if n == 0 || n == 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    f(n)
                }
            })
            .collect();
        Self { lo, p }
    }

    /// Homogeneous coefficients `p_n = q_n` at spectral parameter zero.
    pub fn from_potential(q: &PotentialSpec, lo: i64, hi: i64) -> Result<Self> {
        let mut p = Vec::with_capacity((hi - lo + 1) as usize);
        for n in lo..=hi {
            if n == 0 || n == 1 {
                p.push(Complex64::new(0.0, 0.0));
            } else {
                p.push(Complex64::new(q.value(n)?, 0.0));
            }
        }
        Ok(Self { lo, p })
    }

    /// Coefficients covering the active sites of `window`.
    pub fn on_window(q: &PotentialSpec, window: &LatticeWindow) -> Result<Self> {
        Self::from_potential(q, window.a(), window.b())
    }

    /// Coefficients of the spectral problem at parameter `lambda`:
    /// `p_n = q_n - lambda * rho_n` with the side weight for angle `delta`.
    pub fn from_spectral(
        q: &PotentialSpec,
        lambda: Complex64,
        delta: f64,
        window: &LatticeWindow,
    ) -> Result<Self> {
        let weights = crate::lattice::WeightSeq::new(delta)?;
        let mut p = Vec::with_capacity((window.b() - window.a() + 1) as usize);
        for n in window.a()..=window.b() {
            if n == 0 || n == 1 {
                p.push(Complex64::new(0.0, 0.0));
            } else {
                p.push(Complex64::new(q.value(n)?, 0.0) - lambda * weights.rho(n));
            }
        }
        Ok(Self { lo: window.a(), p })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.p.len() as i64 - 1
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        self.lo <= lo && self.hi() >= hi
    }

    pub fn p(&self, n: i64) -> Result<Complex64> {
        if n < self.lo || n > self.hi() || n == 0 || n == 1 {
            return Err(Error::IndexOutOfRange {
                index: n,
                lo: self.lo,
                hi: self.hi(),
            });
        }
        Ok(self.p[(n - self.lo) as usize])
    }

    /// `p_n + 2`, the recurrence multiplier.
    pub fn ptilde(&self, n: i64) -> Result<Complex64> {
        Ok(self.p(n)? + 2.0)
    }
}

/// Sequence in scaled form: `value_n = mantissa_n * 2^exp_n`. Propagation
/// rebases the working pair whenever its magnitude leaves `[1e-100, 1e100]`,
/// so intermediate growth never overflows; consumers read values back through
/// [`ScaledSeq::value`] or materialize with [`ScaledSeq::to_seq`].
#[derive(Debug, Clone)]
pub struct ScaledSeq {
    lo: i64,
    mantissa: Vec<Complex64>,
    exp: Vec<i32>,
}

impl ScaledSeq {
    fn with_range(lo: i64, hi: i64) -> Self {
        let len = (hi - lo + 1) as usize;
        Self {
            lo,
            mantissa: vec![Complex64::new(0.0, 0.0); len],
            exp: vec![0; len],
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.mantissa.len() as i64 - 1
    }

    fn idx(&self, n: i64) -> usize {
        (n - self.lo) as usize
    }

    fn store(&mut self, n: i64, m: Complex64, e: i32) {
        let i = self.idx(n);
        self.mantissa[i] = m;
        self.exp[i] = e;
    }

    /// Raw mantissa at `n` (value is `mantissa * 2^exp`).
    pub fn mantissa_at(&self, n: i64) -> Complex64 {
        self.mantissa[self.idx(n)]
    }

    /// Raw exponent at `n`.
    pub fn exp_at(&self, n: i64) -> i32 {
        self.exp[self.idx(n)]
    }

    /// Descaled value; saturates to infinity/zero outside double range.
    pub fn value(&self, n: i64) -> Complex64 {
        let i = self.idx(n);
        self.mantissa[i] * pow2(self.exp[i])
    }

    /// Descaled value, erroring when it leaves double range.
    pub fn try_value(&self, n: i64) -> Result<Complex64> {
        let v = self.value(n);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow { index: n })
        }
    }

    /// `value_n / value_m` computed through the exponent ledger.
    pub fn ratio(&self, n: i64, m: i64) -> Complex64 {
        let (i, j) = (self.idx(n), self.idx(m));
        (self.mantissa[i] / self.mantissa[j]) * pow2(self.exp[i] - self.exp[j])
    }

    /// Base-2 log of `|value_n|`.
    pub fn log2_abs(&self, n: i64) -> f64 {
        let i = self.idx(n);
        self.mantissa[i].norm().log2() + self.exp[i] as f64
    }

    pub fn to_seq(&self) -> Result<ComplexSeq> {
        let mut out = ComplexSeq::zeros(self.lo, self.hi());
        for n in self.lo..=self.hi() {
            out.set(n, self.try_value(n)?);
        }
        Ok(out)
    }
}

fn pow2(e: i32) -> f64 {
    // Exact for |e| <= 1023; saturates to 0 / inf beyond, which is the
    // desired descaling behaviour.
    if e >= 1024 {
        f64::INFINITY
    } else if e <= -1075 {
        0.0
    } else {
        2f64.powi(e)
    }
}

const REBASE_HI: f64 = 1e100;
const REBASE_LO: f64 = 1e-100;

/// Propagates the three-term recurrence with junction conditions from a seed
/// pair over the storage range `[lo, hi]`. The junction is crossed by the
/// rearranged transition formulas appropriate to the travel direction; every
/// other step applies the recurrence at the inner site of the moving pair.
pub fn propagate(
    spec: &IvpSpec,
    coeff: &CoefficientSeq,
    imp: &ImpulseParams,
    lo: i64,
    hi: i64,
) -> Result<ScaledSeq> {
    if spec.n0 < lo || spec.n0 + 1 > hi {
        return Err(Error::IndexOutOfRange {
            index: spec.n0,
            lo,
            hi: hi - 1,
        });
    }
    for k in (lo + 1)..hi {
        if k != 0 && k != 1 && !coeff.covers(k, k) {
            return Err(Error::InsufficientCoverage {
                lo: lo + 1,
                hi: hi - 1,
            });
        }
    }

    let (d1, d2) = (imp.d1(), imp.d2());
    let mut out = ScaledSeq::with_range(lo, hi);
    let (s0, s1) = spec.seed_pair();
    out.store(spec.n0, s0, 0);
    out.store(spec.n0 + 1, s1, 0);

    // Upward sweep: from (y_{k-1}, y_k) obtain y_{k+1}.
    let (mut prev, mut cur, mut e) = (s0, s1, 0i32);
    for k in (spec.n0 + 1)..hi {
        let next = match k {
            0 => prev / d1,                    // y_1 from y_{-1} = d1 y_1
            1 => cur + (prev - d1 * cur) / d2, // y_2 from the delta condition
            _ => coeff.ptilde(k)? * cur - prev,
        };
        let (cur2, next2, e2) = rebase(cur, next, e);
        out.store(k + 1, next2, e2);
        prev = cur2;
        cur = next2;
        e = e2;
    }

    // Downward sweep: from (y_k, y_{k+1}) obtain y_{k-1}.
    let (mut cur, mut above, mut e) = (s0, s1, 0i32);
    for k in (lo + 1..=spec.n0).rev() {
        let below = match k {
            1 => d1 * cur + d2 * (above - cur), // y_0 from both conditions
            0 => d1 * above,                    // y_{-1} = d1 y_1
            _ => coeff.ptilde(k)? * cur - above,
        };
        let (cur2, below2, e2) = rebase(cur, below, e);
        out.store(k - 1, below2, e2);
        above = cur2;
        cur = below2;
        e = e2;
    }

    Ok(out)
}

fn rebase(a: Complex64, b: Complex64, e: i32) -> (Complex64, Complex64, i32) {
    let mag = a.norm().max(b.norm());
    if mag > REBASE_HI || (mag < REBASE_LO && mag > 0.0) {
        let s = mag.log2().floor() as i32;
        let f = pow2(-s);
        (a * f, b * f, e + s)
    } else {
        (a, b, e)
    }
}

/// Unique solution of the junction problem with the given initial data,
/// materialized to plain doubles.
pub fn solve_ivp(
    spec: &IvpSpec,
    coeff: &CoefficientSeq,
    imp: &ImpulseParams,
    window: &LatticeWindow,
) -> Result<ComplexSeq> {
    propagate(spec, coeff, imp, window.lo(), window.hi())?.to_seq()
}

/// Discrete Wronskian `y_n z_{n+1} - y_{n+1} z_n`.
pub fn wronskian(y: &ComplexSeq, z: &ComplexSeq, n: i64) -> Result<Complex64> {
    Ok(y.try_at(n)? * z.try_at(n + 1)? - y.try_at(n + 1)? * z.try_at(n)?)
}

/// Piecewise structure of the Wronskian of two sequences: the constants on
/// each half, the junction value, and the worst deviation from constancy.
#[derive(Debug, Clone, Copy)]
pub struct WronskianProfile {
    pub omega_minus: Complex64,
    pub omega_plus: Complex64,
    pub w0: Complex64,
    pub max_deviation: f64,
    /// Largest term magnitude `|y_n z_{n+1}| + |y_{n+1} z_n|` observed; the
    /// natural scale for deviation checks.
    pub scale: f64,
}

impl WronskianProfile {
    /// Residuals of the junction relations `omega^- = d1 d2 omega^+` and
    /// `W_0 = -d2 omega^+`.
    pub fn junction_residuals(&self, imp: &ImpulseParams) -> (f64, f64) {
        let r1 = (self.omega_minus - imp.d1() * imp.d2() * self.omega_plus).norm();
        let r2 = (self.w0 + imp.d2() * self.omega_plus).norm();
        (r1, r2)
    }
}

/// Measures the piecewise-constant structure of `W_n(y, z)` over the common
/// range. Requires the range to reach across the junction.
pub fn wronskian_profile(y: &ComplexSeq, z: &ComplexSeq) -> Result<WronskianProfile> {
    if y.lo() != z.lo() || y.hi() != z.hi() {
        return Err(Error::RangeMismatch {
            lo_a: y.lo(),
            hi_a: y.hi(),
            lo_b: z.lo(),
            hi_b: z.hi(),
        });
    }
    if y.lo() > -2 || y.hi() < 2 {
        return Err(Error::InsufficientCoverage { lo: -2, hi: 2 });
    }
    let omega_minus = wronskian(y, z, -1)?;
    let omega_plus = wronskian(y, z, 1)?;
    let w0 = wronskian(y, z, 0)?;
    let mut max_deviation = 0.0f64;
    let mut scale = 0.0f64;
    for n in y.lo()..y.hi() {
        let w = wronskian(y, z, n)?;
        scale =
            scale.max(y.at(n).norm() * z.at(n + 1).norm() + y.at(n + 1).norm() * z.at(n).norm());
        if n <= -1 {
            max_deviation = max_deviation.max((w - omega_minus).norm());
        } else if n >= 1 {
            max_deviation = max_deviation.max((w - omega_plus).norm());
        }
    }
    Ok(WronskianProfile {
        omega_minus,
        omega_plus,
        w0,
        max_deviation,
        scale,
    })
}

/// Residual diagnostics of a candidate solution of
/// `-(y_{n+1} - 2 y_n + y_{n-1}) + p_n y_n = h_n` with junction conditions.
/// `h = None` means the homogeneous equation. Returns the worst site and its
/// relative residual.
pub fn solution_residual(
    y: &ComplexSeq,
    coeff: &CoefficientSeq,
    imp: &ImpulseParams,
    h: Option<&ComplexSeq>,
) -> Result<(i64, f64)> {
    let mut worst = (y.lo(), 0.0f64);
    for n in (y.lo() + 1)..y.hi() {
        if n == 0 || n == 1 || !coeff.covers(n, n) {
            continue;
        }
        let pt = coeff.ptilde(n)?;
        let data = match h {
            Some(h) if h.covers(n, n) => h.at(n),
            _ => Complex64::new(0.0, 0.0),
        };
        let res = (-y.at(n + 1) + pt * y.at(n) - y.at(n - 1)) - data;
        let scale = y.at(n + 1).norm() + (pt * y.at(n)).norm() + y.at(n - 1).norm() + data.norm();
        let rel = res.norm() / scale.max(f64::MIN_POSITIVE);
        if rel > worst.1 {
            worst = (n, rel);
        }
    }
    // Junction conditions, relative to the local magnitude.
    if y.lo() <= -1 && y.hi() >= 2 {
        let scale = y.at(-1).norm() + y.at(0).norm() + y.at(1).norm() + y.at(2).norm();
        let r1 = (y.at(-1) - imp.d1() * y.at(1)).norm();
        let r2 = ((y.at(0) - y.at(-1)) - imp.d2() * (y.at(2) - y.at(1))).norm();
        let rel = (r1 + r2) / scale.max(f64::MIN_POSITIVE);
        if rel > worst.1 {
            worst = (0, rel);
        }
    }
    Ok(worst)
}

/// Particular solution of the nonhomogeneous problem built from a fundamental
/// system `(u, v)` by variation of parameters. The data at the punctured
/// sites is forced to zero, which pins the four values `x_{-1}`, `x_0`,
/// `x_1`, `x_2` at zero.
pub fn particular_solution(h: &ComplexSeq, u: &ComplexSeq, v: &ComplexSeq) -> Result<ComplexSeq> {
    if u.lo() != v.lo() || u.hi() != v.hi() {
        return Err(Error::RangeMismatch {
            lo_a: u.lo(),
            hi_a: u.hi(),
            lo_b: v.lo(),
            hi_b: v.hi(),
        });
    }
    let window = u.window()?;
    let (lo, hi) = (u.lo(), u.hi());
    if !h.covers(window.a(), window.b()) {
        return Err(Error::InsufficientCoverage {
            lo: window.a(),
            hi: window.b(),
        });
    }
    let data = |s: i64| -> Complex64 {
        if window.contains_site(s) {
            h.at(s)
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let weighted = |s: i64| -> Result<Option<(Complex64, Complex64)>> {
        let hs = data(s);
        if hs.norm() == 0.0 {
            return Ok(None);
        }
        let w = wronskian(u, v, s)?;
        let floor =
            1e-13 * (u.at(s).norm() * v.at(s + 1).norm() + u.at(s + 1).norm() * v.at(s).norm());
        if w.norm() < floor {
            return Err(Error::FundamentalSystemDegenerate { index: s });
        }
        Ok(Some((u.at(s) * hs / w, v.at(s) * hs / w)))
    };

    let mut x = ComplexSeq::zeros(lo, hi);
    // Left branch: suffix sums running from 0 down.
    let (mut su, mut sv) = (ComplexSum::new(), ComplexSum::new());
    for n in (lo..=0.min(hi)).rev() {
        if let Some((tu, tv)) = weighted(n)? {
            su.add(tu);
            sv.add(tv);
        }
        x.set(n, -(u.at(n) * sv.value() - su.value() * v.at(n)));
    }
    // Right branch: prefix sums running from 1 up.
    let (mut tu, mut tv) = (ComplexSum::new(), ComplexSum::new());
    for n in 1.max(lo)..=hi {
        if let Some((wu, wv)) = weighted(n)? {
            tu.add(wu);
            tv.add(wv);
        }
        x.set(n, u.at(n) * tv.value() - tu.value() * v.at(n));
    }

    // Pinned values at the junction.
    let local = x.max_abs().max(h.max_abs()).max(f64::MIN_POSITIVE);
    for n in [-1, 0, 1, 2] {
        if x.at(n).norm() > 1e-12 * local {
            return Err(Error::InvariantBreach(format!(
                "particular solution not pinned at n = {n}: |x| = {:.3e}",
                x.at(n).norm()
            )));
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::PotentialSpec;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn const_coeff(window: &LatticeWindow, p: f64) -> CoefficientSeq {
        CoefficientSeq::from_fn(window.a(), window.b(), |_| c(p, 0.0))
    }

    #[test]
    fn one_forward_step() {
        // ptilde = 4, seed (y_1, y_2) = (1, 1): y_3 = 4 - 1 = 3.
        let w = LatticeWindow::new(-1, 3).unwrap();
        let imp = ImpulseParams::standard(0.9).unwrap();
        let y = solve_ivp(
            &IvpSpec::new(1, c(1.0, 0.0), c(0.0, 0.0)),
            &const_coeff(&w, 2.0),
            &imp,
            &w,
        )
        .unwrap();
        assert!((y.at(3) - c(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn theta_seed_crosses_junction() {
        let w = LatticeWindow::new(-4, 5).unwrap();
        for delta in [0.0, 0.5, 1.2] {
            let imp = ImpulseParams::standard(delta).unwrap();
            let theta = solve_ivp(
                &IvpSpec::new(1, c(1.0, 0.0), c(0.0, 0.0)),
                &const_coeff(&w, 2.0),
                &imp,
                &w,
            )
            .unwrap();
            assert!((theta.at(-1) - c(1.0, 0.0)).norm() < 1e-14);
            assert!((theta.at(0) - c(1.0, 0.0)).norm() < 1e-14);
            assert!(theta.nabla(0).unwrap().norm() < 1e-14); // delta theta_{-1} = 0
        }
    }

    #[test]
    fn phi_seed_crosses_junction() {
        let w = LatticeWindow::new(-4, 5).unwrap();
        for delta in [0.0, 0.5, 1.2] {
            let imp = ImpulseParams::standard(delta).unwrap();
            let phi = solve_ivp(
                &IvpSpec::new(1, c(1.0, 0.0), c(-1.0, 0.0)),
                &const_coeff(&w, 2.0),
                &imp,
                &w,
            )
            .unwrap();
            assert!(phi.at(2).norm() < 1e-14);
            // Independent evaluation of the junction formula
            // y_0 = (d1 - d2) y_1 + d2 y_2.
            let hand = (imp.d1() - imp.d2()) * phi.at(1) + imp.d2() * phi.at(2);
            assert!((phi.at(0) - hand).norm() < 1e-14);
            let expect = c(1.0, 0.0) - Complex64::from_polar(1.0, 2.0 * delta);
            assert!((phi.at(0) - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn equation_residual_vanishes_everywhere() {
        let w = LatticeWindow::new(-30, 31).unwrap();
        let q = PotentialSpec::power(1.0, 1.0).unwrap();
        let coeff = CoefficientSeq::on_window(&q, &w).unwrap();
        let imp = ImpulseParams::standard(0.7).unwrap();
        for n0 in [-5, -1, 0, 1, 2, 7] {
            let y = solve_ivp(
                &IvpSpec::new(n0, c(0.3, -0.4), c(1.1, 0.2)),
                &coeff,
                &imp,
                &w,
            )
            .unwrap();
            let (site, res) = solution_residual(&y, &coeff, &imp, None).unwrap();
            assert!(res <= 1e-12, "residual {res} at {site} for seed {n0}");
            assert!((y.at(n0) - c(0.3, -0.4)).norm() < 1e-14);
            assert!((y.at(n0 + 1) - c(1.4, -0.2)).norm() < 1e-14);
        }
    }

    #[test]
    fn wronskian_examples() {
        let w = LatticeWindow::new(-6, 7).unwrap();
        let coeff = const_coeff(&w, 2.0);
        for delta in [0.0, 0.6, 1.4] {
            let imp = ImpulseParams::standard(delta).unwrap();
            let phi = solve_ivp(
                &IvpSpec::new(1, c(1.0, 0.0), c(-1.0, 0.0)),
                &coeff,
                &imp,
                &w,
            )
            .unwrap();
            let theta =
                solve_ivp(&IvpSpec::new(1, c(1.0, 0.0), c(0.0, 0.0)), &coeff, &imp, &w).unwrap();
            assert!((wronskian(&phi, &theta, 1).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
            let e2id = Complex64::from_polar(1.0, 2.0 * delta);
            assert!((wronskian(&phi, &theta, -1).unwrap() - e2id).norm() < 1e-13);
            assert!(wronskian(&phi, &phi, 3).unwrap().norm() == 0.0);

            let profile = wronskian_profile(&phi, &theta).unwrap();
            assert!((profile.omega_minus - e2id).norm() < 1e-13);
            assert!((profile.omega_plus - c(1.0, 0.0)).norm() < 1e-13);
            assert!((profile.w0 + e2id).norm() < 1e-13);
            assert!(profile.max_deviation <= 1e-10 * profile.scale.max(1.0));

            // A solution against itself: every profile quantity vanishes.
            let own = wronskian_profile(&phi, &phi).unwrap();
            assert_eq!(own.omega_minus, c(0.0, 0.0));
            assert_eq!(own.omega_plus, c(0.0, 0.0));
            assert_eq!(own.w0, c(0.0, 0.0));
            assert_eq!(own.max_deviation, 0.0);
        }
    }

    fn random_system(
        rng: &mut ChaCha8Rng,
        max_half: i64,
    ) -> (LatticeWindow, CoefficientSeq, ImpulseParams) {
        let a = -rng.gen_range(1..=max_half);
        let b = rng.gen_range(2..=max_half.max(2) + 1);
        let w = LatticeWindow::new(a, b).unwrap();
        let coeff = CoefficientSeq::from_fn(a, b, |_| {
            c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
        });
        let d1 = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-3.1..3.1));
        let d2 = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-3.1..3.1));
        let imp = ImpulseParams::new(rng.gen_range(0.0..1.5), d1, d2).unwrap();
        (w, coeff, imp)
    }

    fn random_seed_near_junction(rng: &mut ChaCha8Rng, w: &LatticeWindow) -> IvpSpec {
        let lo = (-3i64).max(w.lo());
        let hi = 3i64.min(w.hi() - 1);
        IvpSpec::new(
            rng.gen_range(lo..=hi),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        )
    }

    #[test]
    fn profile_consistency_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let (w, coeff, imp) = random_system(&mut rng, 20);
            let y = solve_ivp(&random_seed_near_junction(&mut rng, &w), &coeff, &imp, &w).unwrap();
            let z = solve_ivp(&random_seed_near_junction(&mut rng, &w), &coeff, &imp, &w).unwrap();
            let profile = wronskian_profile(&y, &z).unwrap();
            let (r1, r2) = profile.junction_residuals(&imp);
            let mag = profile.omega_plus.norm().max(profile.omega_minus.norm());
            if mag > 1e-10 {
                assert!(r1 <= 1e-9 * mag, "junction relation 1: {r1} vs {mag}");
                assert!(r2 <= 1e-9 * mag, "junction relation 2: {r2} vs {mag}");
            }
            assert!(profile.max_deviation <= 1e-9 * profile.scale.max(1.0));
        }
    }

    #[test]
    fn uniqueness_under_reseeding() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (w, coeff, imp) = random_system(&mut rng, 15);
            let y = solve_ivp(&random_seed_near_junction(&mut rng, &w), &coeff, &imp, &w).unwrap();
            // Re-seed from an arbitrary interior point of the result.
            let n1 = rng.gen_range(w.lo()..w.hi());
            let reseeded = solve_ivp(
                &IvpSpec::new(n1, y.at(n1), y.at(n1 + 1) - y.at(n1)),
                &coeff,
                &imp,
                &w,
            )
            .unwrap();
            for n in w.lo()..=w.hi() {
                let diff = (reseeded.at(n) - y.at(n)).norm();
                assert!(
                    diff <= 1e-9 * y.at(n).norm().max(1e-3 * y.max_abs()),
                    "reseeding mismatch at {n}: {diff:.3e}"
                );
            }
        }
    }

    #[test]
    fn linear_in_initial_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..20 {
            let (w, coeff, imp) = random_system(&mut rng, 12);
            let s1 = random_seed_near_junction(&mut rng, &w);
            let s2 = IvpSpec::new(s1.n0, c(0.3, 0.7), c(-0.2, 0.1));
            let al = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let be = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let y1 = solve_ivp(&s1, &coeff, &imp, &w).unwrap();
            let y2 = solve_ivp(&s2, &coeff, &imp, &w).unwrap();
            let combo = solve_ivp(
                &IvpSpec::new(s1.n0, al * s1.c0 + be * s2.c0, al * s1.c1 + be * s2.c1),
                &coeff,
                &imp,
                &w,
            )
            .unwrap();
            let mut scale = 0.0f64;
            for n in w.lo()..=w.hi() {
                scale = scale.max((al * y1.at(n)).norm() + (be * y2.at(n)).norm());
            }
            for n in w.lo()..=w.hi() {
                let diff = (combo.at(n) - (al * y1.at(n) + be * y2.at(n))).norm();
                assert!(diff <= 1e-10 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn third_solution_is_combination() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let (w, coeff, imp) = random_system(&mut rng, 12);
            let u = solve_ivp(
                &IvpSpec::new(1, c(1.0, 0.0), c(-1.0, 0.0)),
                &coeff,
                &imp,
                &w,
            )
            .unwrap();
            let v =
                solve_ivp(&IvpSpec::new(1, c(1.0, 0.0), c(0.0, 0.0)), &coeff, &imp, &w).unwrap();
            let y = solve_ivp(&random_seed_near_junction(&mut rng, &w), &coeff, &imp, &w).unwrap();
            // 2x2 solve at indices 1, 2.
            let det = u.at(1) * v.at(2) - u.at(2) * v.at(1);
            let c1 = (y.at(1) * v.at(2) - y.at(2) * v.at(1)) / det;
            let c2 = (u.at(1) * y.at(2) - u.at(2) * y.at(1)) / det;
            for n in w.lo()..=w.hi() {
                let diff = (y.at(n) - (c1 * u.at(n) + c2 * v.at(n))).norm();
                let scale = (c1 * u.at(n)).norm() + (c2 * v.at(n)).norm() + y.at(n).norm();
                assert!(diff <= 1e-9 * scale.max(1e-6 * y.max_abs()));
            }
        }
    }

    #[test]
    fn wronskian_dichotomy() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let (w, coeff, imp) = random_system(&mut rng, 10);
            let s = random_seed_near_junction(&mut rng, &w);
            let y = solve_ivp(&s, &coeff, &imp, &w).unwrap();
            let z = if rng.gen_bool(0.3) {
                // Forced dependence: scalar multiple of y.
                let lam = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                solve_ivp(
                    &IvpSpec::new(s.n0, lam * s.c0, lam * s.c1),
                    &coeff,
                    &imp,
                    &w,
                )
                .unwrap()
            } else {
                solve_ivp(&random_seed_near_junction(&mut rng, &w), &coeff, &imp, &w).unwrap()
            };
            let profile = wronskian_profile(&y, &z).unwrap();
            let scale = profile.scale.max(f64::MIN_POSITIVE);
            let mut all_small = true;
            let mut min_abs = f64::INFINITY;
            for n in w.lo()..w.hi() {
                let wn = wronskian(&y, &z, n).unwrap().norm();
                all_small &= wn <= 1e-12 * scale;
                min_abs = min_abs.min(wn);
            }
            assert!(
                all_small || min_abs >= 1e-12 * scale || scale < 1e-280,
                "dichotomy violated: min |W| = {min_abs:.3e}, scale = {scale:.3e}"
            );
        }
    }

    #[test]
    fn particular_solution_zero_data() {
        let w = LatticeWindow::new(-5, 6).unwrap();
        let coeff = const_coeff(&w, 2.0);
        let imp = ImpulseParams::standard(0.4).unwrap();
        let u = solve_ivp(
            &IvpSpec::new(1, c(1.0, 0.0), c(-1.0, 0.0)),
            &coeff,
            &imp,
            &w,
        )
        .unwrap();
        let v = solve_ivp(&IvpSpec::new(1, c(1.0, 0.0), c(0.0, 0.0)), &coeff, &imp, &w).unwrap();
        let h = ComplexSeq::zeros_on(&w);
        let x = particular_solution(&h, &u, &v).unwrap();
        assert_eq!(x.max_abs(), 0.0);
    }

    #[test]
    fn particular_solution_unit_impulse() {
        let w = LatticeWindow::new(-5, 7).unwrap();
        let coeff = const_coeff(&w, 2.0);
        let imp = ImpulseParams::standard(0.4).unwrap();
        let u = solve_ivp(
            &IvpSpec::new(1, c(1.0, 0.0), c(-1.0, 0.0)),
            &coeff,
            &imp,
            &w,
        )
        .unwrap();
        let v = solve_ivp(&IvpSpec::new(1, c(1.0, 0.0), c(0.0, 0.0)), &coeff, &imp, &w).unwrap();
        let mut h = ComplexSeq::zeros_on(&w);
        h.set(2, c(1.0, 0.0));
        let x = particular_solution(&h, &u, &v).unwrap();
        // Direct term-by-term evaluation of the closed form.
        let w2 = wronskian(&u, &v, 2).unwrap();
        for n in 2..=w.hi() {
            let expect = (u.at(n) * v.at(2) - u.at(2) * v.at(n)) / w2;
            assert!((x.at(n) - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
        }
        for n in w.lo()..=0 {
            assert_eq!(x.at(n), c(0.0, 0.0));
        }
        // Nonhomogeneous residual at interior active sites.
        let (site, res) = solution_residual(&x, &coeff, &imp, Some(&h)).unwrap();
        assert!(res <= 1e-9, "residual {res} at {site}");
    }

    #[test]
    fn particular_solution_right_supported_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = LatticeWindow::new(-6, 9).unwrap();
        let coeff = const_coeff(&w, 3.0);
        let imp = ImpulseParams::standard(1.0).unwrap();
        let u = solve_ivp(
            &IvpSpec::new(1, c(1.0, 0.0), c(-1.0, 0.0)),
            &coeff,
            &imp,
            &w,
        )
        .unwrap();
        let v = solve_ivp(&IvpSpec::new(1, c(1.0, 0.0), c(0.0, 0.0)), &coeff, &imp, &w).unwrap();
        let mut h = ComplexSeq::zeros_on(&w);
        for n in 2..=w.b() {
            h.set(n, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        let x = particular_solution(&h, &u, &v).unwrap();
        for n in w.lo()..=0 {
            assert_eq!(x.at(n), c(0.0, 0.0), "left branch must be empty");
        }
    }

    #[test]
    fn degenerate_fundamental_system_is_rejected() {
        let w = LatticeWindow::new(-4, 5).unwrap();
        let coeff = const_coeff(&w, 2.0);
        let imp = ImpulseParams::standard(0.0).unwrap();
        let u = solve_ivp(
            &IvpSpec::new(1, c(1.0, 0.0), c(-1.0, 0.0)),
            &coeff,
            &imp,
            &w,
        )
        .unwrap();
        let v = solve_ivp(
            &IvpSpec::new(1, c(2.0, 0.0), c(-2.0, 0.0)),
            &coeff,
            &imp,
            &w,
        )
        .unwrap();
        let mut h = ComplexSeq::zeros_on(&w);
        h.set(3, c(1.0, 0.0));
        match particular_solution(&h, &u, &v) {
            Err(Error::FundamentalSystemDegenerate { .. }) => {}
            other => panic!("expected degenerate system error, got {other:?}"),
        }
    }

    #[test]
    fn scaled_propagation_survives_overflow() {
        // Growth factor ~3.73 per step overflows doubles near n = 710; the
        // scaled form keeps ratios readable far beyond.
        let w = LatticeWindow::new(-1, 900).unwrap();
        let q = PotentialSpec::constant(2.0).unwrap();
        let coeff = CoefficientSeq::on_window(&q, &w).unwrap();
        let imp = ImpulseParams::standard(0.0).unwrap();
        let spec = IvpSpec::new(1, c(1.0, 0.0), c(0.0, 0.0));
        let scaled = propagate(&spec, &coeff, &imp, w.lo(), w.hi()).unwrap();
        let r_plus = 2.0 + 3.0f64.sqrt();
        let ratio = scaled.ratio(850, 849);
        assert!((ratio - c(r_plus, 0.0)).norm() < 1e-9);
        assert!(scaled.try_value(890).is_err());
        match solve_ivp(&spec, &coeff, &imp, &w) {
            Err(Error::Overflow { .. }) => {}
            other => panic!("expected overflow, got {other:?}"),
        }
        // The same run truncated to a modest window matches plain doubles.
        let w2 = LatticeWindow::new(-1, 60).unwrap();
        let coeff2 = CoefficientSeq::on_window(&q, &w2).unwrap();
        let plain = solve_ivp(&spec, &coeff2, &imp, &w2).unwrap();
        for n in w2.lo()..=w2.hi() {
            assert!((scaled.value(n) - plain.at(n)).norm() <= 1e-12 * plain.at(n).norm());
        }
    }
}
