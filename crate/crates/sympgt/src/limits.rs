//! ε-scaling of the q-Whittaker functions and classical so(2n+1) Whittaker numerics.
//!
//! With `q = e^{-ε}` and `a_l = e^{iελ_l}` the rescaled function
//! `Ψ_{iλ,ε}(x) = ε^{n²} e^{n²𝒜(ε)} 𝒫_z(a; q)` converges to the Givental integral
//! `Ψ^{so(2n+1)}_{iλ}(x)`. Everything here is floating point; Pochhammer products are
//! accumulated in log space.

use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Scaling parameters for a fixed `ε`.
#[derive(Clone, Debug, Serialize)]
pub struct ScalingCtx {
    eps: f64,
    m: i64,
    correction: f64,
}

impl ScalingCtx {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain(format!("ε must lie in (0,1), got {eps}")));
        }
        let m = -((eps.ln() / eps).floor() as i64);
        if m < 1 {
            return Err(Error::Domain(format!("m(ε) = {m} < 1")));
        }
        let correction = -PI * PI / (6.0 * eps) - 0.5 * (eps / (2.0 * PI)).ln();
        Ok(Self { eps, m, correction })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `m(ε) = -⌊ε⁻¹ log ε⌋`.
    pub fn m(&self) -> i64 {
        self.m
    }

    /// `𝒜(ε)`.
    pub fn correction(&self) -> f64 {
        self.correction
    }

    pub fn q(&self) -> f64 {
        (-self.eps).exp()
    }

    /// Table of `log (q;q)_k` for `k = 0..=kmax`.
    pub fn log_qfactorials(&self, kmax: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(kmax + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for j in 1..=kmax {
            acc += (-(-self.eps * j as f64).exp_m1()).ln();
            out.push(acc);
        }
        out
    }

    /// Lattice index `⌊ε⁻¹y⌋`. A relative guard of 1e-9 absorbs representation error for
    /// values that are meant to sit on the lattice.
    pub fn floor_index(&self, y: f64) -> i64 {
        let r = y / self.eps;
        (r + 1e-9 * r.abs().max(1.0)).floor() as i64
    }

    /// `log f_α(y, ε) − 𝒜(ε)`.
    pub fn log_pochhammer_ratio(&self, alpha: i64, y: f64) -> Result<f64> {
        let k = self.floor_index(y) + alpha * self.m;
        if k < 0 {
            return Err(Error::Domain(format!("f_{alpha}({y}) has negative index {k}")));
        }
        let table = self.log_qfactorials(k as usize);
        Ok(table[k as usize] - self.correction)
    }

    /// Integer coordinates `z_i = ε⁻¹x_i + (2n − 2(i−1)) m(ε)` of the bottom level of a
    /// `2n`-level pattern, together with the distance from `x` to the lattice point used.
    pub fn bottom_lattice(&self, x: &[f64]) -> (Vec<i64>, f64) {
        let n = x.len() as i64;
        let mut snap: f64 = 0.0;
        let z = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| {
                let r = (xi / self.eps).round();
                snap = snap.max((r * self.eps - xi).abs());
                r as i64 + (2 * n - 2 * i as i64) * self.m
            })
            .collect();
        (z, snap)
    }
}

/// A rescaled q-Whittaker value.
#[derive(Clone, Debug, Serialize)]
pub struct ScaledValue {
    pub eps: f64,
    pub x: Vec<f64>,
    pub lattice: Vec<i64>,
    pub snap: f64,
    pub re: f64,
    pub im: f64,
}

impl ScaledValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

struct ScaledBinomials {
    table: Vec<f64>,
    correction: f64,
}

impl ScaledBinomials {
    /// `binom(n, k)_q · e^{𝒜}`.
    fn get(&self, n: i64, k: i64) -> f64 {
        if k < 0 || k > n {
            return 0.0;
        }
        let (n, k) = (n as usize, k as usize);
        (self.table[n] - self.table[k] - self.table[n - k] + self.correction).exp()
    }
}

fn phase(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// `Ψ_{iλ,ε}(x)` for `n = λ.len() ∈ {1, 2}`, evaluated at the lattice point nearest `x`.
///
/// Returns zero when the lattice point is not a partition.
pub fn scaled_qwhittaker(ctx: &ScalingCtx, lambda: &[f64], x: &[f64]) -> Result<ScaledValue> {
    let n = lambda.len();
    if x.len() != n {
        return Err(Error::Domain("λ and x must have the same length".into()));
    }
    if !(1..=2).contains(&n) {
        return Err(Error::Domain(format!("scaled sums are implemented for n ≤ 2, got {n}")));
    }
    let (z, snap) = ctx.bottom_lattice(x);
    let eps = ctx.eps;
    let ordered = z.windows(2).all(|w| w[0] >= w[1]) && *z.last().unwrap() >= 0;
    let mut out = ScaledValue { eps, x: x.to_vec(), lattice: z.clone(), snap, re: 0.0, im: 0.0 };
    if !ordered {
        return Ok(out);
    }
    let bin = ScaledBinomials { table: ctx.log_qfactorials(z[0] as usize), correction: ctx.correction };
    let level_two = |top: i64| -> Vec<Complex64> {
        (0..=top)
            .map(|z2| {
                let mut acc = Complex64::new(0.0, 0.0);
                for z1 in 0..=z2 {
                    acc += phase(eps * lambda[0] * (2 * z1 - z2) as f64) * bin.get(z2, z1);
                }
                acc * eps
            })
            .collect()
    };
    let v = if n == 1 {
        level_two(z[0])[z[0] as usize]
    } else {
        let (top1, top2) = (z[0], z[1]);
        let psi1 = level_two(top1);
        let l2 = lambda[1];
        (top2..=top1)
            .into_par_iter()
            .map(|u1| {
                let outer1 = bin.get(top1 - top2, top1 - u1);
                if outer1 == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for u2 in 0..=top2 {
                    let outer = outer1 * bin.get(top2, top2 - u2);
                    if outer == 0.0 {
                        continue;
                    }
                    let mut inner = Complex64::new(0.0, 0.0);
                    for y in u2..=u1 {
                        let w = bin.get(u1 - u2, u1 - y);
                        if w != 0.0 {
                            inner += phase(eps * l2 * (u1 + u2 - y) as f64) * w * psi1[y as usize];
                        }
                    }
                    acc += phase(-eps * l2 * (top1 + top2 - u1 - u2) as f64) * outer * inner;
                }
                acc
            })
            .sum::<Complex64>()
            * eps.powi(3)
    };
    out.re = v.re;
    out.im = v.im;
    Ok(out)
}

/// Modified Bessel function `K_ν(z) = ∫₀^∞ e^{−z cosh u} cosh(νu) du` for complex order
/// and `z > 0`, by the trapezoidal rule in `u` (double-exponential decay makes it
/// converge geometrically in the step).
pub fn bessel_k(order: Complex64, z: f64) -> Complex64 {
    bessel_k_scaled(order, z) * (-z).exp()
}

/// `e^{z} K_ν(z)`, finite for large `z` where `K_ν` itself underflows.
pub fn bessel_k_scaled(order: Complex64, z: f64) -> Complex64 {
    assert!(z > 0.0, "bessel_k needs z > 0");
    let h = 0.02;
    let shift = order.re.abs();
    let mut acc = Complex64::new(0.5, 0.0);
    let mut k = 1;
    loop {
        let u = k as f64 * h;
        let damp = -z * (u.cosh() - 1.0);
        if damp + shift * u < -60.0 && u > 1.0 {
            break;
        }
        acc += (order * u).cosh() * damp.exp();
        k += 1;
        if k > 200_000 {
            break;
        }
    }
    acc * h
}

/// `Ψ^{so3}_λ(x) = 2K_{2λ}(2e^{−x/2})`.
pub fn so3_whittaker(lambda: Complex64, x: f64) -> Complex64 {
    bessel_k(2.0 * lambda, 2.0 * (-x / 2.0).exp()) * 2.0
}

/// `Ψ^{so3}_λ(x)` straight from its one-dimensional Givental integral, trapezoid with
/// `nodes` points on a box of width `30 + |x|` centred at the mode of the real exponent.
pub fn so3_whittaker_integral(lambda: Complex64, x: f64, nodes: usize) -> Complex64 {
    let centre = x / 2.0;
    let half = 0.5 * (30.0 + x.abs());
    let h = 2.0 * half / nodes as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..=nodes {
        let u = centre - half + j as f64 * h;
        let real = -(-u).exp() - (u - x).exp();
        if real < -745.0 {
            continue;
        }
        acc += (lambda * (2.0 * u - x) + real).exp();
    }
    acc * h
}

/// A classical Whittaker value with its quadrature diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct WhittakerValue {
    pub re: f64,
    pub im: f64,
    pub nodes: usize,
    /// `|I(h) − I(h/2)|`: change on halving the outer step.
    pub refinement_change: f64,
}

impl WhittakerValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn so5_outer(lambda: &[Complex64], x: &[f64], h: f64) -> (Complex64, usize) {
    let (l1, l2) = (lambda[0], lambda[1]);
    let (x1, x2) = (x[0], x[1]);
    let lo = x1.min(x2).min(0.0) - 15.0;
    let hi = x1.max(x2).max(0.0) + 15.0;
    let nodes = ((hi - lo) / h).ceil() as usize;
    let acc: Complex64 = (0..=nodes)
        .into_par_iter()
        .map(|j| {
            let y = lo + j as f64 * h;
            let inner = so3_whittaker(l1, y);
            if inner.norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let a1 = (-x1).exp();
            let b1 = x2.exp() + y.exp();
            let a2 = (-x2).exp() + (-y).exp();
            let first = (l2 * (b1.ln() + x1)).exp() * bessel_k(2.0 * l2, 2.0 * (a1 * b1).sqrt()) * 2.0;
            let second = (-l2 * a2.ln()).exp() * bessel_k(2.0 * l2, 2.0 * a2.sqrt()) * 2.0;
            inner * (-l2 * (x1 + x2 + y)).exp() * first * second
        })
        .sum();
    (acc * h, nodes + 1)
}

/// `Ψ^{so(2n+1)}_λ(x)` for `n ≤ 2`.
///
/// At `n = 2` the two variables of the middle level separate and integrate in closed form
/// to Bessel functions, leaving a one-dimensional integral over the second level.
pub fn so_whittaker(lambda: &[Complex64], x: &[f64]) -> Result<WhittakerValue> {
    match (lambda.len(), x.len()) {
        (1, 1) => {
            let v = so3_whittaker(lambda[0], x[0]);
            let w = so3_whittaker_integral(lambda[0], x[0], 4000);
            Ok(WhittakerValue { re: v.re, im: v.im, nodes: 0, refinement_change: (v - w).norm() })
        }
        (2, 2) => {
            let (coarse, _) = so5_outer(lambda, x, 0.05);
            let (fine, nodes) = so5_outer(lambda, x, 0.025);
            Ok(WhittakerValue { re: fine.re, im: fine.im, nodes, refinement_change: (fine - coarse).norm() })
        }
        _ => Err(Error::Domain("so_whittaker supports n ≤ 2 with matching λ and x".into())),
    }
}

/// `Ψ^{so5}_λ(x)` by brute-force trapezoid over all three integration variables of the
/// Givental integral, real `λ` only. Slow; used as an independent check.
pub fn so5_whittaker_nested(lambda: &[f64], x: &[f64], h: f64) -> f64 {
    let (l1, l2) = (lambda[0], lambda[1]);
    let (x1, x2) = (x[0], x[1]);
    let lo = x1.min(x2).min(0.0) - 12.0;
    let hi = x1.max(x2).max(0.0) + 12.0;
    let nodes = ((hi - lo) / h).ceil() as usize;
    let grid: Vec<f64> = (0..=nodes).map(|j| lo + j as f64 * h).collect();
    let acc: f64 = grid
        .par_iter()
        .map(|&y| {
            let so3 = so3_whittaker(Complex64::new(l1, 0.0), y).re;
            if so3 == 0.0 {
                return 0.0;
            }
            let mut s = 0.0;
            for &u1 in &grid {
                let e1 = 2.0 * l2 * u1 - (u1 - x1).exp() - (x2 - u1).exp() - (y - u1).exp();
                if e1 < -745.0 {
                    continue;
                }
                for &u2 in &grid {
                    let e2 = 2.0 * l2 * u2 - (-u2).exp() - (u2 - x2).exp() - (u2 - y).exp();
                    let total = e1 + e2 - l2 * (x1 + x2 + y);
                    if total > -745.0 {
                        s += total.exp();
                    }
                }
            }
            s * so3
        })
        .sum();
    acc * h * h * h
}

/// `|ℋ^{so3}Ψ − ½λ²Ψ| / |Ψ|` at `x`, with a fourth-order central second difference.
pub fn so3_eigen_residual(lambda: Complex64, x: f64, step: f64) -> f64 {
    let f = |y: f64| so3_whittaker(lambda, y);
    let d2 = (-f(x + 2.0 * step) + f(x + step) * 16.0 - f(x) * 30.0 + f(x - step) * 16.0 - f(x - 2.0 * step))
        / (12.0 * step * step);
    let psi = f(x);
    let lhs = d2 * 0.5 - psi * (0.5 * (-x).exp());
    (lhs - psi * (lambda * lambda * 0.5)).norm() / psi.norm()
}

/// One row of a convergence table.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub m: i64,
    pub x: f64,
    pub scaled_re: f64,
    pub scaled_im: f64,
    pub limit: f64,
    pub error: f64,
    pub snap: f64,
}

/// Convergence of `Ψ_{iλ,ε}` to `Ψ^{so3}_{iλ}` at `n = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub lambda: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Max error over `x` at each `ε`, in the order the ε values were given.
    pub fn max_errors(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|(e, _)| *e == r.eps) {
                Some(entry) => entry.1 = entry.1.max(r.error),
                None => out.push((r.eps, r.error)),
            }
        }
        out
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.max_errors().windows(2).all(|w| w[1].1 < w[0].1)
    }
}

pub fn convergence_table(lambda: f64, xs: &[f64], eps: &[f64]) -> Result<ConvergenceTable> {
    let mut rows = Vec::new();
    for &e in eps {
        let ctx = ScalingCtx::new(e)?;
        for &x in xs {
            let s = scaled_qwhittaker(&ctx, &[lambda], &[x])?;
            let limit = so3_whittaker(Complex64::new(0.0, lambda), x);
            rows.push(ConvergenceRow {
                eps: e,
                m: ctx.m,
                x,
                scaled_re: s.re,
                scaled_im: s.im,
                limit: limit.re,
                error: (s.value() - limit).norm(),
                snap: s.snap,
            });
        }
    }
    Ok(ConvergenceTable { lambda, rows })
}

/// Out-of-order decay probe for the scaled function.
#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeProbe {
    pub x: Vec<f64>,
    pub modulus: f64,
    /// `Σ_{i∈σ(x)} e^{−(x_i − x_{i+1})/2}` with `x_{n+1} = 0`.
    pub decay_argument: f64,
    /// Largest `c` with `|Ψ| ≤ (1 + |x|²)² exp(−c · decay_argument)` at this point.
    pub fitted_c: f64,
}

/// Fits the constant of the double-exponential envelope at each out-of-order point.
/// The envelope holds on the probe set with `c* = min(1, min fitted_c)` whenever that is
/// positive.
pub fn envelope_probe(ctx: &ScalingCtx, lambda: &[f64], points: &[Vec<f64>]) -> Result<Vec<EnvelopeProbe>> {
    points
        .iter()
        .map(|x| {
            let v = scaled_qwhittaker(ctx, lambda, x)?;
            let mut padded = x.clone();
            padded.push(0.0);
            let decay: f64 = padded
                .windows(2)
                .filter(|w| w[0] <= w[1])
                .map(|w| (-(w[0] - w[1]) / 2.0).exp())
                .sum();
            let poly = (1.0 + x.iter().map(|t| t * t).sum::<f64>()).powi(2);
            let modulus = v.value().norm();
            let fitted_c = if decay == 0.0 {
                f64::INFINITY
            } else if modulus == 0.0 {
                f64::INFINITY
            } else {
                -(modulus / poly).ln() / decay
            };
            Ok(EnvelopeProbe { x: x.clone(), modulus, decay_argument: decay, fitted_c })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, LaurentPoly, QSeriesCtx};
    use crate::characters::WhittakerCache;
    use crate::combinatorics::Partition;
    use crate::spectral::FloatPoly;

    #[test]
    fn scaling_constants() {
        let c = ScalingCtx::new(0.1).unwrap();
        assert_eq!(c.m(), 24);
        assert_eq!(ScalingCtx::new(0.05).unwrap().m(), 60);
        assert!(ScalingCtx::new(1.5).is_err());
    }

    #[test]
    fn pochhammer_asymptotics() {
        let c = ScalingCtx::new(0.02).unwrap();
        let f1 = c.log_pochhammer_ratio(1, 1.0).unwrap().exp();
        let target = (-1.0f64).exp().exp();
        assert!((f1 / target - 1.0).abs() < 3e-2, "{f1} vs {target}");
        // f_2 e^{-𝒜} = 1 + O(ε e^{-y})
        let f2 = c.log_pochhammer_ratio(2, 0.5).unwrap().exp();
        assert!((f2 - 1.0).abs() < 2.0 * 0.02 * (-0.5f64).exp());
        let coarse = ScalingCtx::new(0.1).unwrap().log_pochhammer_ratio(2, 0.5).unwrap().abs();
        assert!(c.log_pochhammer_ratio(2, 0.5).unwrap().abs() < coarse);
    }

    fn exact_scaled(n: usize, lam: &[f64], z: &[i64]) -> Complex64 {
        // q = 1/2 exactly, so ε = log 2.
        let eps = 2f64.ln();
        let ctx = QSeriesCtx::exact(rat(1, 2)).unwrap();
        let mut cache = WhittakerCache::new(ctx);
        let p: LaurentPoly = cache.get(n, &Partition::new(z.to_vec()).unwrap());
        let a: Vec<Complex64> = lam.iter().map(|l| Complex64::from_polar(1.0, eps * l)).collect();
        let sc = ScalingCtx { eps, m: 0, correction: -PI * PI / (6.0 * eps) - 0.5 * (eps / (2.0 * PI)).ln() };
        let nn = (n * n) as i32;
        FloatPoly::new(&p).eval(&a) * (eps.powi(nn) * (nn as f64 * sc.correction).exp())
    }

    #[test]
    fn scaled_sum_matches_exact_polynomial() {
        let eps = 2f64.ln();
        let mut ctx = ScalingCtx::new(0.5).unwrap();
        ctx.eps = eps;
        ctx.m = 1;
        ctx.correction = -PI * PI / (6.0 * eps) - 0.5 * (eps / (2.0 * PI)).ln();
        for (lam, z) in [(vec![0.7], vec![4i64]), (vec![0.9, 0.3], vec![4, 2]), (vec![0.9, 0.3], vec![3, 3])] {
            let n = lam.len();
            let x: Vec<f64> = z
                .iter()
                .enumerate()
                .map(|(i, &zi)| eps * (zi - (2 * n as i64 - 2 * i as i64) * ctx.m) as f64)
                .collect();
            let got = scaled_qwhittaker(&ctx, &lam, &x).unwrap();
            assert_eq!(got.lattice, z);
            let want = exact_scaled(n, &lam, &z);
            assert!((got.value() - want).norm() <= 1e-10 * want.norm().max(1e-300), "{z:?}: {:?} vs {want}", got.value());
        }
    }

    #[test]
    fn scaled_value_is_real() {
        let ctx = ScalingCtx::new(0.05).unwrap();
        let v = scaled_qwhittaker(&ctx, &[0.7], &[0.5]).unwrap();
        assert!(v.im.abs() <= 1e-8 * v.re.abs());
        let w = scaled_qwhittaker(&ScalingCtx::new(0.1).unwrap(), &[0.8, 0.3], &[1.0, 0.5]).unwrap();
        assert!(w.im.abs() <= 1e-8 * w.re.abs().max(1e-12));
    }

    #[test]
    fn bessel_properties() {
        let nu = Complex64::new(0.6, 0.0);
        let z = 1.7;
        assert!((bessel_k(nu, z) - bessel_k(-nu, z)).norm() < 1e-15);
        // K_{1/2}(z) = sqrt(π/2z) e^{-z}
        let half = bessel_k(Complex64::new(0.5, 0.0), z).re;
        let exact = (PI / (2.0 * z)).sqrt() * (-z).exp();
        assert!((half / exact - 1.0).abs() < 1e-13);
        for nu in [0.0, 0.8, 2.5] {
            let r = bessel_k(Complex64::new(nu, 0.0), 10.0).re / bessel_k(Complex64::new(nu, 0.0), 8.0).re;
            assert!(r < (-1.9f64).exp());
        }
        let imag = bessel_k(Complex64::new(0.0, 1.4), 0.8);
        assert!(imag.im.abs() < 1e-15);
    }

    #[test]
    fn so3_two_ways() {
        for x in [-1.0, 0.0, 1.5, 3.0] {
            for lam in [Complex64::new(0.0, 0.7), Complex64::new(0.4, 0.0), Complex64::new(0.0, 0.0)] {
                let a = so3_whittaker(lam, x);
                let b = so3_whittaker_integral(lam, x, 2000);
                assert!((a - b).norm() <= 1e-8 * a.norm(), "x={x} λ={lam}: {a} vs {b}");
            }
            assert!(so3_whittaker(Complex64::new(0.0, 0.0), x).re > 0.0);
        }
    }

    #[test]
    fn so3_eigenrelation() {
        for x in [-1.0, 0.3, 2.0] {
            assert!(so3_eigen_residual(Complex64::new(0.0, 0.7), x, 1e-3) < 1e-4);
            assert!(so3_eigen_residual(Complex64::new(0.5, 0.0), x, 1e-3) < 1e-4);
        }
    }

    #[test]
    fn so5_reduction_matches_nested_quadrature() {
        let lam = [0.8, 0.3];
        let x = [1.0, 0.2];
        let reduced = so_whittaker(&[Complex64::new(lam[0], 0.0), Complex64::new(lam[1], 0.0)], &x).unwrap();
        let nested = so5_whittaker_nested(&lam, &x, 0.1);
        assert!((reduced.re - nested).abs() <= 1e-6 * nested.abs(), "{} vs {nested}", reduced.re);
        assert!(reduced.refinement_change <= 1e-10 * reduced.re.abs());
    }

    #[test]
    fn convergence_improves() {
        let t = convergence_table(0.7, &[-1.0, 0.0, 1.0, 2.0], &[0.1, 0.05]).unwrap();
        assert!(t.strictly_decreasing(), "{:?}", t.max_errors());
        assert!(t.rows.iter().all(|r| r.snap < 1e-9));
    }

    #[test]
    fn two_variable_limit_approaches_so5() {
        let lam = [Complex64::new(0.0, 0.8), Complex64::new(0.0, 0.3)];
        let target = so_whittaker(&lam, &[1.0, 0.5]).unwrap().value();
        let err = |e: f64| {
            let v = scaled_qwhittaker(&ScalingCtx::new(e).unwrap(), &[0.8, 0.3], &[1.0, 0.5]).unwrap();
            (v.value() - target).norm()
        };
        let (coarse, fine) = (err(0.1), err(0.05));
        assert!(fine < coarse && fine < 0.25 * target.norm(), "{coarse} {fine}");
    }

    #[test]
    fn envelope_on_out_of_order_points() {
        let ctx = ScalingCtx::new(0.05).unwrap();
        let pts = vec![vec![-1.0], vec![-2.0], vec![-3.0]];
        let probes = envelope_probe(&ctx, &[0.7], &pts).unwrap();
        let c = probes.iter().map(|p| p.fitted_c).fold(f64::INFINITY, f64::min);
        assert!(c > 0.0, "{probes:?}");
    }
}
