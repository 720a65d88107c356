//! Small dense complex linear algebra: LU with partial pivoting, Hessenberg
//! reduction, shifted QR eigenvalues, inverse iteration, a determinant-based
//! polynomial root finder, and a smallest-singular-value estimator. Written
//! for the modest matrix sizes this crate produces (a few hundred rows).

use crate::{Error, Result};
use num_complex::Complex64;

type C = Complex64;

fn czero() -> C {
    C::new(0.0, 0.0)
}

/// Dense square complex matrix, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![czero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, C::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_assign(&mut self, i: usize, j: usize, v: C) {
        self.data[i * self.n + j] += v;
    }

    pub fn matvec(&self, x: &[C]) -> Vec<C> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let mut acc = czero();
                for j in 0..self.n {
                    acc += self.at(i, j) * x[j];
                }
                acc
            })
            .collect()
    }

    /// Largest row sum of magnitudes.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.at(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

pub fn vec_norm(x: &[C]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// LU factorization with partial pivoting. Exactly singular pivots are
/// replaced by a tiny multiple of the matrix scale so that downstream solves
/// remain usable for inverse iteration.
pub struct LuFactors {
    lu: CMatrix,
    perm: Vec<usize>,
    swaps: usize,
    pivot_floored: bool,
}

pub fn lu_factor(a: &CMatrix) -> LuFactors {
    let n = a.n();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    let mut pivot_floored = false;
    let floor = a.max_abs().max(f64::MIN_POSITIVE) * f64::EPSILON * n as f64;

    for k in 0..n {
        let mut p = k;
        let mut best = lu.at(k, k).norm();
        for i in (k + 1)..n {
            let m = lu.at(i, k).norm();
            if m > best {
                best = m;
                p = i;
            }
        }
        if p != k {
            for j in 0..n {
                let tmp = lu.at(k, j);
                lu.set(k, j, lu.at(p, j));
                lu.set(p, j, tmp);
            }
            perm.swap(k, p);
            swaps += 1;
        }
        let mut piv = lu.at(k, k);
        if piv.norm() < floor {
            piv = C::new(floor.max(f64::MIN_POSITIVE), 0.0);
            lu.set(k, k, piv);
            pivot_floored = true;
        }
        for i in (k + 1)..n {
            let m = lu.at(i, k) / piv;
            lu.set(i, k, m);
            if m.norm() != 0.0 {
                for j in (k + 1)..n {
                    let v = lu.at(i, j) - m * lu.at(k, j);
                    lu.set(i, j, v);
                }
            }
        }
    }
    LuFactors {
        lu,
        perm,
        swaps,
        pivot_floored,
    }
}

impl LuFactors {
    pub fn pivot_floored(&self) -> bool {
        self.pivot_floored
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[C]) -> Vec<C> {
        let n = self.lu.n();
        assert_eq!(b.len(), n);
        let mut x: Vec<C> = self.perm.iter().map(|&p| b[p]).collect();
        // Forward: L y = P b (unit lower).
        for i in 0..n {
            for j in 0..i {
                let m = self.lu.at(i, j);
                x[i] = x[i] - m * x[j];
            }
        }
        // Backward: U x = y.
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let m = self.lu.at(i, j);
                x[i] = x[i] - m * x[j];
            }
            x[i] /= self.lu.at(i, i);
        }
        x
    }

    /// Solves `A^H x = b` reusing the same factors.
    pub fn solve_adjoint(&self, b: &[C]) -> Vec<C> {
        let n = self.lu.n();
        assert_eq!(b.len(), n);
        // A = P^T L U, so A^H = U^H L^H P and U^H (L^H (P x)) = b.
        let mut t = b.to_vec();
        // U^H is lower triangular.
        for i in 0..n {
            for j in 0..i {
                let m = self.lu.at(j, i).conj();
                t[i] = t[i] - m * t[j];
            }
            t[i] /= self.lu.at(i, i).conj();
        }
        // L^H is unit upper triangular.
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let m = self.lu.at(j, i).conj();
                t[i] = t[i] - m * t[j];
            }
        }
        // x = P^T t.
        let mut x = vec![czero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = t[i];
        }
        x
    }

    pub fn det(&self) -> C {
        let n = self.lu.n();
        let mut d = if self.swaps % 2 == 0 {
            C::new(1.0, 0.0)
        } else {
            C::new(-1.0, 0.0)
        };
        for i in 0..n {
            d *= self.lu.at(i, i);
        }
        d
    }
}

/// Determinant through a fresh factorization.
pub fn det(a: &CMatrix) -> C {
    lu_factor(a).det()
}

/// Reduces to upper Hessenberg form by Householder similarity.
pub fn hessenberg(a: &CMatrix) -> CMatrix {
    let n = a.n();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    for k in 0..(n - 2) {
        // Householder vector annihilating column k below row k+1.
        let mut scale = 0.0;
        for i in (k + 1)..n {
            scale += h.at(i, k).norm();
        }
        if scale == 0.0 {
            continue;
        }
        let mut v: Vec<C> = ((k + 1)..n).map(|i| h.at(i, k) / scale).collect();
        let alpha = vec_norm(&v);
        if alpha == 0.0 {
            continue;
        }
        let phase = if v[0].norm() > 0.0 {
            v[0] / v[0].norm()
        } else {
            C::new(1.0, 0.0)
        };
        let w0 = v[0] + phase * alpha;
        v[0] = w0;
        let vnorm2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // H <- (I - 2 v v^H / |v|^2) H (same from the right).
        for j in 0..n {
            let mut dot = czero();
            for (idx, i) in ((k + 1)..n).enumerate() {
                dot += v[idx].conj() * h.at(i, j);
            }
            let f = dot * (2.0 / vnorm2);
            for (idx, i) in ((k + 1)..n).enumerate() {
                let val = h.at(i, j) - f * v[idx];
                h.set(i, j, val);
            }
        }
        for i in 0..n {
            let mut dot = czero();
            for (idx, j) in ((k + 1)..n).enumerate() {
                dot += h.at(i, j) * v[idx];
            }
            let f = dot * (2.0 / vnorm2);
            for (idx, j) in ((k + 1)..n).enumerate() {
                let val = h.at(i, j) - f * v[idx].conj();
                h.set(i, j, val);
            }
        }
        // Clean the annihilated entries.
        for i in (k + 2)..n {
            h.set(i, k, czero());
        }
    }
    h
}

/// Complex Givens rotation `[c, s; -conj(s), c]` with real `c` that maps
/// `(a, b)` to `(r, 0)`.
fn givens(a: C, b: C) -> (f64, C) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, czero());
    }
    let an = a.norm();
    if an == 0.0 {
        return (0.0, C::new(1.0, 0.0));
    }
    let h = an.hypot(bn);
    let c = an / h;
    let s = (a / an) * b.conj() * (1.0 / h);
    (c, s)
}

/// Eigenvalues of the trailing 2x2 block, used as shifts.
fn two_by_two_eigs(a: C, b: C, c: C, d: C) -> (C, C) {
    let tr = a + d;
    let half = tr * 0.5;
    let disc = (half * half - (a * d - b * c)).sqrt();
    (half + disc, half - disc)
}

/// Eigenvalues of an upper Hessenberg matrix by explicit single-shift QR with
/// deflation. Returns values in no particular order.
fn hessenberg_eigenvalues(mut h: CMatrix, max_sweeps_per_eig: usize) -> Result<Vec<C>> {
    let n = h.n();
    if n == 0 {
        return Ok(vec![]);
    }
    let mut eigs: Vec<C> = Vec::with_capacity(n);
    let mut hi = n - 1; // active block is [0, hi]
    let mut sweeps_here = 0usize;
    let total_cap = max_sweeps_per_eig * n + 32;
    let mut total = 0usize;

    loop {
        // Deflate any negligible subdiagonal inside [0, hi].
        let mut lo = hi;
        while lo > 0 {
            let sub = h.at(lo, lo - 1).norm();
            let local = h.at(lo - 1, lo - 1).norm() + h.at(lo, lo).norm();
            if sub <= f64::EPSILON * local.max(f64::MIN_POSITIVE) {
                h.set(lo, lo - 1, czero());
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            // 1x1 block converged.
            eigs.push(h.at(hi, hi));
            if hi == 0 {
                break;
            }
            hi -= 1;
            sweeps_here = 0;
            continue;
        }
        total += 1;
        sweeps_here += 1;
        if total > total_cap {
            return Err(Error::NoConvergence {
                what: "qr eigenvalue iteration",
                iterations: total,
                diagnostics: format!(
                    "block [{lo}, {hi}] stalled; subdiagonal {:.3e}",
                    h.at(hi, hi - 1).norm()
                ),
            });
        }

        // Shift: trailing 2x2 eigenvalue closest to the corner entry, with an
        // exceptional kick every 12 sweeps on this block.
        let corner = h.at(hi, hi);
        let shift = if sweeps_here % 12 == 0 {
            corner + C::new(1.5 * h.at(hi, hi - 1).norm(), 0.0)
        } else {
            let (e1, e2) = two_by_two_eigs(
                h.at(hi - 1, hi - 1),
                h.at(hi - 1, hi),
                h.at(hi, hi - 1),
                h.at(hi, hi),
            );
            if (e1 - corner).norm() <= (e2 - corner).norm() {
                e1
            } else {
                e2
            }
        };

        // Explicit QR sweep of (H - shift I) on the active block.
        let mut rots: Vec<(f64, C)> = Vec::with_capacity(hi - lo);
        for i in lo..=hi {
            h.set(i, i, h.at(i, i) - shift);
        }
        for k in lo..hi {
            let (c, s) = givens(h.at(k, k), h.at(k + 1, k));
            rots.push((c, s));
            for j in k..=hi {
                let x = h.at(k, j);
                let y = h.at(k + 1, j);
                h.set(k, j, c * x + s * y);
                h.set(k + 1, j, -s.conj() * x + c * y);
            }
        }
        for (k, (c, s)) in rots.iter().enumerate() {
            let k = lo + k;
            let top = hi.min(k + 2);
            for i in lo..=top {
                let x = h.at(i, k);
                let y = h.at(i, k + 1);
                h.set(i, k, c * x + y * s.conj());
                h.set(i, k + 1, -x * *s + c * y);
            }
        }
        for i in lo..=hi {
            h.set(i, i, h.at(i, i) + shift);
        }
    }
    Ok(eigs)
}

/// Eigenvalues of a general dense complex matrix.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C>> {
    hessenberg_eigenvalues(hessenberg(a), 40)
}

/// One eigenvector for an approximate eigenvalue by inverse iteration.
/// Returns the normalized vector and its residual `|A v - lambda v|`.
pub fn inverse_iteration(a: &CMatrix, lambda: C) -> Result<(Vec<C>, f64)> {
    let n = a.n();
    let mut shifted = a.clone();
    for i in 0..n {
        shifted.set(i, i, shifted.at(i, i) - lambda);
    }
    let fac = lu_factor(&shifted);
    // Deterministic start with incommensurate components.
    let mut v: Vec<C> = (0..n)
        .map(|i| {
            C::new(
                1.0 + 0.3 * ((i + 1) as f64).sin(),
                0.1 * ((i + 1) as f64).cos(),
            )
        })
        .collect();
    let nv = vec_norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut best: Option<(Vec<C>, f64)> = None;
    for _ in 0..4 {
        let mut w = fac.solve(&v);
        let nw = vec_norm(&w);
        if !nw.is_finite() || nw == 0.0 {
            break;
        }
        w.iter_mut().for_each(|x| *x /= nw);
        let av = a.matvec(&w);
        let res = (0..n)
            .map(|i| (av[i] - lambda * w[i]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let better = match &best {
            None => true,
            Some((_, r)) => res < *r,
        };
        if better {
            best = Some((w.clone(), res));
        }
        v = w;
        if res <= 1e-13 * a.norm_inf().max(1.0) {
            break;
        }
    }
    best.ok_or_else(|| Error::NoConvergence {
        what: "inverse iteration",
        iterations: 4,
        diagnostics: format!("lambda = {lambda}"),
    })
}

/// Roots of `det(A - z I)` by Weierstrass (Durand-Kerner) simultaneous
/// iteration, with the polynomial evaluated through LU determinants. This is
/// an independent route to the spectrum, suitable for small matrices.
pub fn char_poly_roots(a: &CMatrix, max_iter: usize) -> Result<Vec<C>> {
    let n = a.n();
    if n == 0 {
        return Ok(vec![]);
    }
    let scale = a.norm_inf().max(1.0);
    let p = |z: C| -> C {
        let mut m = a.clone();
        for i in 0..n {
            m.set(i, i, m.at(i, i) - z);
        }
        det(&m)
    };
    // Leading coefficient of det(A - zI) is (-1)^n.
    let lead = if n % 2 == 0 {
        C::new(1.0, 0.0)
    } else {
        C::new(-1.0, 0.0)
    };
    // Standard staggered start on a circle slightly off the real axis.
    let seed = C::new(0.4, 0.9);
    let mut z: Vec<C> = (0..n)
        .map(|i| {
            let mut w = C::new(1.0, 0.0);
            for _ in 0..i {
                w *= seed;
            }
            w * scale * 0.7 + C::new(scale * 0.05, scale * 0.02)
        })
        .collect();

    for _ in 0..max_iter {
        let mut moved = 0.0f64;
        for i in 0..n {
            let mut denom = lead;
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                // Nudge coincident iterates apart deterministically.
                z[i] += C::new(1e-8 * scale, 1e-8 * scale);
                continue;
            }
            let step = p(z[i]) / denom;
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved <= 1e-13 * scale {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence {
        what: "determinant root search",
        iterations: max_iter,
        diagnostics: format!("n = {n}, scale = {scale:.3e}"),
    })
}

/// Smallest singular value by inverse power iteration on `A^H A`.
pub fn smallest_singular_value(a: &CMatrix, iters: usize) -> Result<f64> {
    let n = a.n();
    if n == 0 {
        return Ok(0.0);
    }
    let fac = lu_factor(a);
    let mut v: Vec<C> = (0..n)
        .map(|i| C::new(1.0 + ((i * 7 + 3) % 13) as f64 * 0.05, 0.02 * (i as f64)))
        .collect();
    let nv = vec_norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut sigma = 0.0;
    for _ in 0..iters {
        // w = (A^H A)^{-1} v = A^{-1} A^{-H} v.
        let t = fac.solve_adjoint(&v);
        let w = fac.solve(&t);
        let nw = vec_norm(&w);
        if !nw.is_finite() || nw == 0.0 {
            return Err(Error::NoConvergence {
                what: "smallest singular value iteration",
                iterations: iters,
                diagnostics: "solve produced a non-finite iterate".to_string(),
            });
        }
        sigma = 1.0 / nw.sqrt();
        v = w.into_iter().map(|x| x / nw).collect();
    }
    // One Rayleigh-style refinement: sigma = |A v| at the converged direction.
    let av = a.matvec(&v);
    Ok(vec_norm(&av).min(sigma.max(0.0)).max(0.0))
}
