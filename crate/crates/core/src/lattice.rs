//! Index windows over the punctured lattice, complex sequences, difference
//! calculus, the unimodular weights, and the inner product that skips the
//! punctured sites 0 and 1.

use crate::csum::ComplexSum;
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Finite index window `[a, b]` with `a <= -1`, `b >= 2`. Sequences attached
/// to a window store values on the full range `[a-1, b+1]` so that operator
/// evaluation near the puncture and at the truncation edges has every value
/// it needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeWindow {
    a: i64,
    b: i64,
}

impl LatticeWindow {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a > -1 || b < 2 {
            return Err(Error::InvalidWindow { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    /// Lowest stored index, `a - 1`.
    pub fn lo(&self) -> i64 {
        self.a - 1
    }

    /// Highest stored index, `b + 1`.
    pub fn hi(&self) -> i64 {
        self.b + 1
    }

    /// Number of active (non-punctured) sites in `[a, b]`.
    pub fn num_sites(&self) -> usize {
        (self.b - self.a + 1) as usize - 2
    }

    /// Active sites of the window in ascending order: `[a, -1]` then `[2, b]`.
    pub fn sites(&self) -> impl Iterator<Item = i64> {
        let (a, b) = (self.a, self.b);
        (a..=b).filter(|n| *n != 0 && *n != 1)
    }

    pub fn contains_site(&self, n: i64) -> bool {
        n >= self.a && n <= self.b && n != 0 && n != 1
    }

    /// Symmetric window holding `half` active sites on each side.
    pub fn symmetric(half: i64) -> Result<Self> {
        Self::new(-half, half + 1)
    }
}

/// Complex-valued sequence over a contiguous index range. Every index in the
/// range has exactly one stored value; access outside the range is an error,
/// never a silent zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeq {
    lo: i64,
    values: Vec<Complex64>,
}

impl ComplexSeq {
    pub fn zeros(lo: i64, hi: i64) -> Self {
        assert!(hi >= lo, "empty sequence range");
        Self {
            lo,
            values: vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize],
        }
    }

    /// Zero sequence on the full range of a window.
    pub fn zeros_on(window: &LatticeWindow) -> Self {
        Self::zeros(window.lo(), window.hi())
    }

    pub fn from_values(lo: i64, values: Vec<Complex64>) -> Self {
        assert!(!values.is_empty(), "empty sequence");
        Self { lo, values }
    }

    pub fn from_fn(lo: i64, hi: i64, mut f: impl FnMut(i64) -> Complex64) -> Self {
        Self {
            lo,
            values: (lo..=hi).map(&mut f).collect::<Vec<_>>(),
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        self.lo <= lo && self.hi() >= hi
    }

    pub fn try_at(&self, n: i64) -> Result<Complex64> {
        if n < self.lo || n > self.hi() {
            return Err(Error::IndexOutOfRange {
                index: n,
                lo: self.lo,
                hi: self.hi(),
            });
        }
        Ok(self.values[(n - self.lo) as usize])
    }

    /// Panicking accessor for indices already validated by the caller.
    pub fn at(&self, n: i64) -> Complex64 {
        self.try_at(n).expect("index out of range")
    }

    pub fn set(&mut self, n: i64, v: Complex64) {
        assert!(n >= self.lo && n <= self.hi(), "index out of range");
        self.values[(n - self.lo) as usize] = v;
    }

    pub fn iter_indexed(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.lo + i as i64, *v))
    }

    /// Forward difference at `n`: `s_{n+1} - s_n`.
    pub fn delta(&self, n: i64) -> Result<Complex64> {
        Ok(self.try_at(n + 1)? - self.try_at(n)?)
    }

    /// Backward difference at `n`: `s_n - s_{n-1}`.
    pub fn nabla(&self, n: i64) -> Result<Complex64> {
        Ok(self.try_at(n)? - self.try_at(n - 1)?)
    }

    /// The window whose full range `[a-1, b+1]` is exactly this sequence's
    /// range, when that window is admissible.
    pub fn window(&self) -> Result<LatticeWindow> {
        LatticeWindow::new(self.lo + 1, self.hi() - 1)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Junction data gluing the half-lattices: `y_{-1} = d1 * y_1` and
/// `delta y_{-1} = d2 * delta y_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseParams {
    delta: f64,
    d1: Complex64,
    d2: Complex64,
}

impl ImpulseParams {
    pub fn new(delta: f64, d1: Complex64, d2: Complex64) -> Result<Self> {
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&delta) {
            return Err(Error::InvalidDelta { delta });
        }
        if d1.norm() == 0.0 || d2.norm() == 0.0 {
            return Err(Error::InvalidImpulse(
                "d1 and d2 must be nonzero".to_string(),
            ));
        }
        Ok(Self { delta, d1, d2 })
    }

    /// The standard junction: `d1 = 1`, `d2 = exp(2 i delta)`.
    pub fn standard(delta: f64) -> Result<Self> {
        let d2 = Complex64::from_polar(1.0, 2.0 * delta);
        Self::new(delta, Complex64::new(1.0, 0.0), d2)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn d1(&self) -> Complex64 {
        self.d1
    }

    pub fn d2(&self) -> Complex64 {
        self.d2
    }

    /// True when the parameters are the standard junction for their `delta`.
    pub fn is_standard(&self) -> bool {
        let want = Complex64::from_polar(1.0, 2.0 * self.delta);
        (self.d1 - Complex64::new(1.0, 0.0)).norm() <= 1e-12 && (self.d2 - want).norm() <= 1e-12
    }
}

/// Real potential generator with a certified lower bound `c > 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `q_n = c`.
    Constant { c: f64 },
    /// `q_n = c + |n|^m`.
    Power { c: f64, m: f64 },
    /// Explicit table of values, all `>= c`.
    Explicit { c: f64, values: BTreeMap<i64, f64> },
}

impl PotentialSpec {
    pub fn constant(c: f64) -> Result<Self> {
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::Config(format!(
                "potential lower bound c must be positive, got {c}"
            )));
        }
        Ok(Self::Constant { c })
    }

    pub fn power(c: f64, m: f64) -> Result<Self> {
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::Config(format!(
                "potential lower bound c must be positive, got {c}"
            )));
        }
        if m < 0.0 || !m.is_finite() {
            return Err(Error::Config(format!(
                "growth exponent m must be >= 0, got {m}"
            )));
        }
        Ok(Self::Power { c, m })
    }

    pub fn explicit(c: f64, values: BTreeMap<i64, f64>) -> Result<Self> {
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::Config(format!(
                "potential lower bound c must be positive, got {c}"
            )));
        }
        for (&n, &q) in &values {
            if !q.is_finite() || q < c {
                return Err(Error::PotentialBound {
                    index: n,
                    value: q,
                    bound: c,
                });
            }
        }
        Ok(Self::Explicit { c, values })
    }

    /// Certified lower bound.
    pub fn c(&self) -> f64 {
        match self {
            Self::Constant { c } | Self::Power { c, .. } | Self::Explicit { c, .. } => *c,
        }
    }

    pub fn value(&self, n: i64) -> Result<f64> {
        match self {
            Self::Constant { c } => Ok(*c),
            Self::Power { c, m } => Ok(c + (n.abs() as f64).powf(*m)),
            Self::Explicit { values, .. } => values
                .get(&n)
                .copied()
                .ok_or(Error::PotentialUndefined { index: n }),
        }
    }

    /// Checks the lower bound on every active site of `window` plus the two
    /// extension sites used by backward-recurrence seeding.
    pub fn validate_on(&self, window: &LatticeWindow) -> Result<()> {
        for n in window.sites() {
            let q = self.value(n)?;
            if q < self.c() {
                return Err(Error::PotentialBound {
                    index: n,
                    value: q,
                    bound: self.c(),
                });
            }
        }
        Ok(())
    }
}

/// The unimodular weights attached to a junction angle `delta`.
#[derive(Debug, Clone, Copy)]
pub struct WeightSeq {
    delta: f64,
}

impl WeightSeq {
    pub fn new(delta: f64) -> Result<Self> {
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&delta) {
            return Err(Error::InvalidDelta { delta });
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Row weight: `exp(2 i delta)` for `n <= -1`, `exp(-2 i delta)` for `n >= 2`.
    pub fn rho(&self, n: i64) -> Complex64 {
        debug_assert!(n != 0 && n != 1, "rho is defined on active sites only");
        if n <= -1 {
            Complex64::from_polar(1.0, 2.0 * self.delta)
        } else {
            Complex64::from_polar(1.0, -2.0 * self.delta)
        }
    }

    /// Side phase: `exp(-i delta)` for `n <= -1`, `exp(i delta)` for `n >= 0`.
    pub fn sigma(&self, n: i64) -> Complex64 {
        if n <= -1 {
            Complex64::from_polar(1.0, -self.delta)
        } else {
            Complex64::from_polar(1.0, self.delta)
        }
    }
}

/// Forward difference of a whole sequence; the result covers one fewer index
/// on the right.
pub fn forward_diff(s: &ComplexSeq) -> Result<ComplexSeq> {
    if s.len() < 2 {
        return Err(Error::WindowTooShort {
            need: 2,
            have: s.len(),
        });
    }
    Ok(ComplexSeq::from_fn(s.lo(), s.hi() - 1, |n| {
        s.at(n + 1) - s.at(n)
    }))
}

/// Backward difference of a whole sequence; the result loses the left index.
pub fn backward_diff(s: &ComplexSeq) -> Result<ComplexSeq> {
    if s.len() < 2 {
        return Err(Error::WindowTooShort {
            need: 2,
            have: s.len(),
        });
    }
    Ok(ComplexSeq::from_fn(s.lo() + 1, s.hi(), |n| {
        s.at(n) - s.at(n - 1)
    }))
}

/// Centered second difference `s_{n+1} - 2 s_n + s_{n-1}`.
pub fn second_diff(s: &ComplexSeq, n: i64) -> Result<Complex64> {
    Ok(s.try_at(n + 1)? - 2.0 * s.try_at(n)? + s.try_at(n - 1)?)
}

/// Left-minus-right residuals of the four summation-by-parts identities over
/// `[a, b]`. All four vanish identically for any pair of sequences covering
/// `[a-1, b+1]`, so this doubles as a permanent self-test of the difference
/// calculus.
pub fn sbp_residuals(f: &ComplexSeq, g: &ComplexSeq, a: i64, b: i64) -> Result<[Complex64; 4]> {
    if a >= b {
        return Err(Error::Config(format!(
            "summation range needs a < b, got a = {a}, b = {b}"
        )));
    }
    if !f.covers(a - 1, b + 1) || !g.covers(a - 1, b + 1) {
        return Err(Error::InsufficientCoverage {
            lo: a - 1,
            hi: b + 1,
        });
    }

    let dd = |s: &ComplexSeq, k: i64| s.at(k + 1) - 2.0 * s.at(k) + s.at(k - 1);

    // nabla f against g, moving the difference onto g.
    let mut lhs1 = ComplexSum::new();
    let mut sum1 = ComplexSum::new();
    // second difference against g, producing nabla-nabla.
    let mut lhs2 = ComplexSum::new();
    let mut sum2 = ComplexSum::new();
    // second difference against g, producing delta-delta.
    let mut sum3 = ComplexSum::new();
    // the two-sided (Green) identity.
    let mut lhs4 = ComplexSum::new();
    for k in a..=b {
        lhs1.add(f.nabla(k)? * g.at(k));
        sum1.add(f.at(k) * g.delta(k)?);
        lhs2.add(dd(f, k) * g.at(k));
        sum2.add(f.nabla(k)? * g.nabla(k)?);
        sum3.add(f.delta(k)? * g.delta(k)?);
        lhs4.add(dd(f, k) * g.at(k) - f.at(k) * dd(g, k));
    }

    let r1 = lhs1.value() - (f.at(b) * g.at(b + 1) - f.at(a - 1) * g.at(a) - sum1.value());
    let r2 = lhs2.value() - (f.delta(b)? * g.at(b) - f.delta(a - 1)? * g.at(a - 1) - sum2.value());
    let r3 = lhs2.value() - (f.delta(b)? * g.at(b + 1) - f.delta(a - 1)? * g.at(a) - sum3.value());
    let boundary4 = (f.delta(b)? * g.at(b) - f.at(b) * g.delta(b)?)
        - (f.delta(a - 1)? * g.at(a - 1) - f.at(a - 1) * g.delta(a - 1)?);
    let r4 = lhs4.value() - boundary4;

    Ok([r1, r2, r3, r4])
}

/// Inner product over the active sites only; the punctured sites 0 and 1 and
/// the edge storage do not contribute.
pub fn inner_product(y: &ComplexSeq, z: &ComplexSeq) -> Result<Complex64> {
    if y.lo() != z.lo() || y.hi() != z.hi() {
        return Err(Error::RangeMismatch {
            lo_a: y.lo(),
            hi_a: y.hi(),
            lo_b: z.lo(),
            hi_b: z.hi(),
        });
    }
    let window = y.window()?;
    let mut acc = ComplexSum::new();
    for n in window.sites() {
        acc.add(y.at(n) * z.at(n).conj());
    }
    Ok(acc.value())
}

/// Norm induced by [`inner_product`].
pub fn norm(y: &ComplexSeq) -> Result<f64> {
    let ip = inner_product(y, y)?;
    debug_assert!(ip.im.abs() <= 1e-15 * (ip.re.abs() + 1.0));
    Ok(ip.re.max(0.0).sqrt())
}
