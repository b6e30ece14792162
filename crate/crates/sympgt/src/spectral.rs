//! Torus quadrature, the time-`t` law of the shape process, the Koornwinder
//! operator and moment formulas.
//!
//! The inner product is
//! `⟨f, g⟩ = |W_n|^{-1} (2π)^{-n} ∫_{[0,2π]^n} f(a) conj(g(a)) Δ̂(a) dθ`
//! with `|W_n| = 2^n n!`, the normalisation under which `⟨𝒫_λ, 𝒫_λ⟩ = 1/Δ_λ`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{q_hermite, to_f64, LaurentPoly, QSeriesCtx, Rational, DEFAULT_TRUNCATION};
use crate::characters::{monomial_symmetric, pieri_coefficients, WhittakerCache};
use crate::combinatorics::{partitions_up_to, Partition};
use crate::error::{Error, Result};

/// `(x; q)_m` for complex `x`.
fn pochhammer(x: Complex64, q: f64, m: usize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut term = x;
    for _ in 0..m {
        acc *= 1.0 - term;
        term *= q;
    }
    acc
}

/// `(q; q)_m`; `m = usize::MAX` is read as the truncated infinite product.
fn qfact(q: f64, m: usize, truncation: usize) -> f64 {
    pochhammer(Complex64::new(q, 0.0), q, m.min(truncation)).re
}

/// Order of the hyperoctahedral group `W_n`.
pub fn weyl_group_order(n: usize) -> f64 {
    (1..=n).fold(2f64.powi(n as i32), |acc, k| acc * k as f64)
}

/// Weight `Δ̂(a)`, divided by `∏_j (t0 a_j, t0/a_j; q)_∞` when `t0 ≠ 0`.
pub fn torus_weight(a: &[Complex64], q: f64, t0: f64, truncation: usize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (j, &aj) in a.iter().enumerate() {
        acc *= pochhammer(aj * aj, q, truncation) * pochhammer(1.0 / (aj * aj), q, truncation);
        if t0 != 0.0 {
            acc /= pochhammer(t0 * aj, q, truncation) * pochhammer(t0 / aj, q, truncation);
        }
        for &ak in &a[j + 1..] {
            for x in [aj * ak, ak / aj, aj / ak, 1.0 / (aj * ak)] {
                acc *= pochhammer(x, q, truncation);
            }
        }
    }
    acc
}

/// Trapezoid rule on the product of unit circles, weights included.
#[derive(Clone, Debug)]
pub struct TorusQuadrature {
    n: usize,
    points: usize,
    q: f64,
    t0: f64,
    truncation: usize,
    nodes: Vec<Vec<Complex64>>,
    weights: Vec<f64>,
}

impl TorusQuadrature {
    /// Grid with `points` nodes per circle (a power of two) and weight `Δ̂` at deformation `t0`.
    pub fn new(n: usize, points: usize, q: f64, t0: f64, truncation: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        if !points.is_power_of_two() {
            return Err(Error::Domain(format!("points per circle must be a power of two, got {points}")));
        }
        if !(0.0..1.0).contains(&q) || t0.abs() >= 1.0 {
            return Err(Error::Domain("need 0 ≤ q < 1 and |t0| < 1".into()));
        }
        let circle: Vec<Complex64> =
            (0..points).map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / points as f64)).collect();
        let total = points.pow(n as u32);
        let nodes: Vec<Vec<Complex64>> = (0..total)
            .map(|mut idx| {
                (0..n)
                    .map(|_| {
                        let c = circle[idx % points];
                        idx /= points;
                        c
                    })
                    .collect()
            })
            .collect();
        let scale = 1.0 / (weyl_group_order(n) * total as f64);
        let weights = nodes.par_iter().map(|a| torus_weight(a, q, t0, truncation).re * scale).collect();
        Ok(Self { n, points, q, t0, truncation, nodes, weights })
    }

    /// Plain weight with the default truncation.
    pub fn plain(n: usize, points: usize, q: f64) -> Result<Self> {
        Self::new(n, points, q, 0.0, DEFAULT_TRUNCATION)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn nodes(&self) -> &[Vec<Complex64>] {
        &self.nodes
    }

    /// `|W_n|^{-1} (2πi)^{-n} ∮ f Δ̂ da/a`.
    pub fn integrate<F: Fn(&[Complex64]) -> Complex64 + Sync>(&self, f: F) -> Complex64 {
        self.nodes.par_iter().zip(&self.weights).map(|(a, &w)| f(a) * w).sum()
    }

    /// `⟨f, g⟩`.
    pub fn inner_product<F, G>(&self, f: F, g: G) -> Complex64
    where
        F: Fn(&[Complex64]) -> Complex64 + Sync,
        G: Fn(&[Complex64]) -> Complex64 + Sync,
    {
        self.integrate(|a| f(a) * g(a).conj())
    }

    /// Largest relative change of the weights when the truncation goes from the current depth to 200.
    pub fn truncation_check(&self) -> f64 {
        let step = (self.nodes.len() / 64).max(1);
        self.nodes
            .iter()
            .step_by(step)
            .map(|a| {
                let w1 = torus_weight(a, self.q, self.t0, self.truncation).re;
                let w2 = torus_weight(a, self.q, self.t0, 200).re;
                (w1 - w2).abs() / w2.abs().max(1e-300)
            })
            .fold(0.0, f64::max)
    }
}

/// Laurent polynomial with `f64` coefficients for fast evaluation at complex points.
#[derive(Clone, Debug)]
pub struct FloatPoly {
    terms: Vec<(Vec<i64>, f64)>,
}

impl FloatPoly {
    pub fn new(p: &LaurentPoly) -> Self {
        Self { terms: p.terms().map(|(e, c)| (e.clone(), to_f64(c))).collect() }
    }

    pub fn eval(&self, a: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(a).fold(Complex64::new(*c, 0.0), |acc, (&k, x)| acc * x.powi(k as i32)))
            .sum()
    }
}

/// The recursion polynomials `𝒫^{(n)}_λ`, cached, with float copies.
pub struct PolynomialFamily {
    n: usize,
    cache: WhittakerCache,
}

impl PolynomialFamily {
    pub fn new(n: usize, q: &Rational) -> Result<Self> {
        Ok(Self { n, cache: WhittakerCache::new(QSeriesCtx::exact(q.clone())?) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> &Rational {
        self.cache.ctx().q()
    }

    pub fn exact(&self, lam: &Partition) -> LaurentPoly {
        if self.n == 1 {
            return q_hermite(self.cache.ctx(), lam.get(0) as usize);
        }
        self.cache.get(self.n, lam)
    }

    pub fn float(&self, lam: &Partition) -> FloatPoly {
        FloatPoly::new(&self.exact(lam))
    }
}

/// `Δ^{(n)}_z = (q;q)_∞^n / ((q;q)_{z_n} ∏_{j<n} (q;q)_{z_j - z_{j+1}})`.
pub fn norm_weight(z: &[i64], q: f64) -> f64 {
    let n = z.len();
    let inf = qfact(q, usize::MAX, DEFAULT_TRUNCATION);
    let mut den = qfact(q, z[n - 1] as usize, DEFAULT_TRUNCATION);
    for w in z.windows(2) {
        den *= qfact(q, (w[0] - w[1]) as usize, DEFAULT_TRUNCATION);
    }
    inf.powi(n as i32) / den
}

/// `Π(a; t) = exp(t Σ (a_i + 1/a_i))`.
pub fn pi_function(a: &[Complex64], t: f64) -> Complex64 {
    (a.iter().map(|x| x + 1.0 / x).sum::<Complex64>() * t).exp()
}

/// Gram matrix `⟨𝒫_λ, 𝒫_μ⟩ Δ_λ` over the given partitions.
pub fn orthogonality_matrix(family: &PolynomialFamily, parts: &[Partition], quad: &TorusQuadrature) -> Vec<Vec<f64>> {
    let polys: Vec<FloatPoly> = parts.iter().map(|p| family.float(p)).collect();
    let q = quad.q();
    parts
        .iter()
        .enumerate()
        .map(|(i, lam)| {
            let d = norm_weight(&lam.padded(family.n()), q);
            (0..parts.len()).map(|j| quad.inner_product(|a| polys[i].eval(a), |a| polys[j].eval(a)).re * d).collect()
        })
        .collect()
}

/// Shapes with `z_1 ≤ window` and `n` parts, zero parts included.
pub fn window_shapes(n: usize, window: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut z = vec![0i64; n];
    loop {
        out.push(z.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            let bound = if i == 0 { window } else { z[i - 1] };
            if z[i] < bound {
                z[i] += 1;
                for v in z.iter_mut().skip(i + 1) {
                    *v = 0;
                }
                break;
            }
        }
    }
}

/// `z ↦ p_t(z)` on a finite window.
#[derive(Clone, Debug, Serialize)]
pub struct LawTable {
    pub n: usize,
    pub t: f64,
    pub a: Vec<f64>,
    pub q: f64,
    pub window: i64,
    pub entries: Vec<(Vec<i64>, f64)>,
    /// `Π(a; t)`.
    pub normalizer: f64,
    pub mass: f64,
    pub mass_defect: f64,
    pub min_entry: f64,
}

impl LawTable {
    pub fn get(&self, z: &[i64]) -> f64 {
        self.entries.iter().find(|(w, _)| w == z).map(|e| e.1).unwrap_or(0.0)
    }

    /// `Σ_z f(z) p_t(z)` over the window.
    pub fn expectation(&self, f: impl Fn(&[i64]) -> f64) -> f64 {
        self.entries.iter().map(|(z, p)| f(z) * p).sum()
    }
}

/// `Q_z(t) = Δ_z ⟨Π(·; t), 𝒫_z⟩` for every shape in the window.
pub fn coefficient_integrals(
    family: &PolynomialFamily,
    t: f64,
    window: i64,
    quad: &TorusQuadrature,
) -> Result<Vec<(Vec<i64>, f64)>> {
    let n = family.n();
    if quad.n() != n {
        return Err(Error::Domain("quadrature dimension differs from n".into()));
    }
    let q = quad.q();
    let shapes = window_shapes(n, window);
    let polys: Vec<FloatPoly> =
        shapes.iter().map(|z| family.float(&Partition::new(z.clone()).expect("decreasing"))).collect();
    Ok(shapes
        .into_iter()
        .zip(polys)
        .map(|(z, p)| {
            let d = norm_weight(&z, q);
            let v = quad.integrate(|b| pi_function(b, t) * p.eval(b).conj()).re * d;
            (z, v)
        })
        .collect())
}

/// `Q_z(t)` from the expansion of `Π(·; t) = exp(t e_1)`, `e_1 = Σ a_i + 1/a_i`, in the `𝒫` basis.
///
/// Multiplication by `e_1` acts on coefficients through the Pieri rule, so every term is
/// nonnegative and the result keeps full relative precision even where `Q_z(t)` is tiny.
pub fn coefficient_series(n: usize, q: &Rational, t: f64, window: i64) -> Result<Vec<(Vec<i64>, f64)>> {
    if t < 0.0 {
        return Err(Error::Domain("time must be nonnegative".into()));
    }
    let ctx = QSeriesCtx::numeric(to_f64(q), DEFAULT_TRUNCATION)?;
    let cap = window + 40 + (6.0 * t * n as f64).ceil() as i64;
    let states = window_shapes(n, cap);
    let index: std::collections::HashMap<Vec<i64>, usize> =
        states.iter().cloned().enumerate().map(|(i, z)| (z, i)).collect();
    let moves: Vec<Vec<(usize, f64)>> = states
        .iter()
        .map(|z| {
            let f = pieri_coefficients(n, z, &ctx);
            let mut out = Vec::new();
            for i in 0..n {
                for (d, c) in [(1, f.plus[i]), (-1, f.minus[i])] {
                    let mut w = z.clone();
                    w[i] += d;
                    if c != 0.0 {
                        if let Some(&j) = index.get(&w) {
                            out.push((j, c));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut term = vec![0.0; states.len()];
    term[0] = 1.0;
    let mut acc = term.clone();
    for m in 1..100_000 {
        let mut next = vec![0.0; states.len()];
        for (i, row) in moves.iter().enumerate() {
            if term[i] != 0.0 {
                for &(j, c) in row {
                    next[j] += term[i] * c * t / m as f64;
                }
            }
        }
        term = next;
        let size: f64 = term.iter().sum();
        for (a, x) in acc.iter_mut().zip(&term) {
            *a += x;
        }
        if size <= 1e-18 * acc.iter().sum::<f64>() && m as f64 > 2.0 * t * n as f64 {
            break;
        }
    }
    Ok(states.into_iter().zip(acc).filter(|(z, _)| z[0] <= window).collect())
}

/// How `Q_z(t) = Δ_z ⟨Π(·; t), 𝒫_z⟩` is evaluated.
#[derive(Clone, Copy, Debug)]
pub enum CoefficientMethod<'a> {
    /// Torus quadrature of the inner product; carries an absolute noise floor.
    Quadrature(&'a TorusQuadrature),
    /// [`coefficient_series`].
    Series,
}

/// `p_t(z) = 𝒫_z(a) Q_z(t) / Π(a; t)` on the window `z_1 ≤ window`.
pub fn law(
    family: &PolynomialFamily,
    t: f64,
    a: &[f64],
    window: i64,
    method: CoefficientMethod<'_>,
    tolerance: f64,
) -> Result<LawTable> {
    let n = family.n();
    if a.len() != n {
        return Err(Error::Domain(format!("expected {n} entries in a")));
    }
    if t < 0.0 {
        return Err(Error::Domain("time must be nonnegative".into()));
    }
    let ac: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let normalizer = pi_function(&ac, t).re;
    let coeffs = match method {
        CoefficientMethod::Quadrature(quad) => coefficient_integrals(family, t, window, quad)?,
        CoefficientMethod::Series => coefficient_series(n, family.q(), t, window)?,
    };
    let entries: Vec<(Vec<i64>, f64)> = coeffs
        .into_iter()
        .map(|(z, c)| {
            let pz = family.float(&Partition::new(z.clone()).expect("decreasing")).eval(&ac).re;
            (z, pz * c / normalizer)
        })
        .collect();
    let mass: f64 = entries.iter().map(|e| e.1).sum();
    let min_entry = entries.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let mass_defect = 1.0 - mass;
    if mass_defect.abs() > tolerance {
        return Err(Error::Numerical(format!(
            "law window z_1 ≤ {window} misses mass {mass_defect:.3e}; enlarge the window"
        )));
    }
    Ok(LawTable { n, t, a: a.to_vec(), q: to_f64(family.q()), window, entries, normalizer, mass, mass_defect, min_entry })
}

/// `A_i(a; q)`.
pub fn koornwinder_coefficient(a: &[Complex64], i: usize, q: f64) -> Complex64 {
    let ai = a[i];
    let mut den = (1.0 - ai * ai) * (1.0 - q * ai * ai);
    for (j, &aj) in a.iter().enumerate() {
        if j != i {
            den *= (1.0 - ai * aj) * (1.0 - ai / aj);
        }
    }
    1.0 / den
}

fn pole_distance(a: &[Complex64], q: f64) -> f64 {
    let mut d = f64::INFINITY;
    for (i, &ai) in a.iter().enumerate() {
        d = d.min((1.0 - ai * ai).norm()).min((1.0 - q * ai * ai).norm()).min((1.0 - q / (ai * ai)).norm());
        for &aj in &a[i + 1..] {
            for x in [ai * aj, ai / aj] {
                d = d.min((1.0 - x).norm()).min((1.0 - 1.0 / x).norm());
            }
        }
    }
    d
}

/// `(D_n^j F)(a)` by nested application of the shift-operator sum.
pub fn koornwinder_apply<F>(f: &F, a: &[Complex64], q: f64, power: u32) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Complex64 + ?Sized,
{
    if power == 0 {
        return Ok(f(a));
    }
    if pole_distance(a, q) < 1e-8 {
        return Err(Error::Pole(format!("point {a:?} is within 1e-8 of a pole of A_i")));
    }
    let inverse: Vec<Complex64> = a.iter().map(|x| 1.0 / x).collect();
    let here = koornwinder_apply(f, a, q, power - 1)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.len() {
        for (coef, factor) in [(koornwinder_coefficient(a, i, q), q), (koornwinder_coefficient(&inverse, i, q), 1.0 / q)] {
            let mut shifted = a.to_vec();
            shifted[i] *= factor;
            acc += coef * (koornwinder_apply(f, &shifted, q, power - 1)? - here);
        }
    }
    Ok(acc)
}

/// `Σ_j binom(k, j) D^j Π / Π` at a real point.
pub fn moment_operator(k: u32, t: f64, a: &[f64], q: f64) -> Result<f64> {
    let ac: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let pi = pi_function(&ac, t);
    let f = |b: &[Complex64]| pi_function(b, t);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    for j in 0..=k {
        acc += binom * koornwinder_apply(&f, &ac, q, j)? / pi;
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    Ok(acc.re)
}

/// `Σ_z q^{-k z_1} p_t(z)` over a law table.
pub fn moment_direct(table: &LawTable, k: u32) -> f64 {
    let q = table.q;
    table.expectation(|z| q.powi(-(k as i32) * z[0] as i32))
}

/// A circle `center + radius e^{iθ}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Circle {
    pub center: (f64, f64),
    pub radius: f64,
}

impl Circle {
    fn c(&self) -> Complex64 {
        Complex64::new(self.center.0, self.center.1)
    }

    fn encloses(&self, z: Complex64) -> bool {
        (z - self.c()).norm() < self.radius
    }

    fn sample(&self, m: usize) -> impl Iterator<Item = Complex64> + '_ {
        (0..m).map(move |j| self.c() + Complex64::from_polar(self.radius, 2.0 * PI * j as f64 / m as f64))
    }
}

/// Circles for the nested moment integral with `l` variables; `circles[j]` carries `s_{j+1}`.
#[derive(Clone, Debug, Serialize)]
pub struct ContourSpec {
    pub circles: Vec<Circle>,
}

fn enclosing_circle(required: &[Complex64], excluded: &[Complex64]) -> Result<Circle> {
    let (mut lo_re, mut hi_re, mut lo_im, mut hi_im) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in required {
        lo_re = lo_re.min(z.re);
        hi_re = hi_re.max(z.re);
        lo_im = lo_im.min(z.im);
        hi_im = hi_im.max(z.im);
    }
    let c = Complex64::new(0.5 * (lo_re + hi_re), 0.5 * (lo_im + hi_im));
    let inner = required.iter().map(|z| (z - c).norm()).fold(0.0, f64::max);
    let outer = excluded.iter().map(|z| (z - c).norm()).fold(f64::INFINITY, f64::min);
    if inner >= outer {
        return Err(Error::Domain(format!(
            "no circle centred at {c} separates the poles (need radius > {inner:.4} and < {outer:.4}); \
             choose a with a_i^{{±1}} away from 0 and -q^{{-1/2}}"
        )));
    }
    // hug the enclosed poles: the outer circles and the essential singularity at 0 need the slack
    Ok(Circle { center: (c.re, c.im), radius: inner + 0.35 * (outer - inner) })
}

/// Picks circles enclosing `q^{-1/2}`, `a_i^{±1}` and `(q s_i)^{±1}` for inner variables, avoiding `0` and `-q^{-1/2}`.
pub fn choose_contours(l: usize, a: &[Complex64], q: f64) -> Result<ContourSpec> {
    let base: Vec<Complex64> = a
        .iter()
        .flat_map(|&x| [x, 1.0 / x])
        .chain(std::iter::once(Complex64::new(q.powf(-0.5), 0.0)))
        .collect();
    let excluded = [Complex64::new(0.0, 0.0), Complex64::new(-q.powf(-0.5), 0.0)];
    let mut circles: Vec<Circle> = Vec::with_capacity(l);
    for _ in 0..l {
        let mut req = base.clone();
        for c in &circles {
            for s in c.sample(256) {
                req.push(q * s);
                req.push(1.0 / (q * s));
            }
        }
        circles.push(enclosing_circle(&req, &excluded)?);
    }
    circles.reverse();
    let spec = ContourSpec { circles };
    validate_contours(&spec, a, q)?;
    Ok(spec)
}

/// Checks that every circle encloses exactly the prescribed poles.
pub fn validate_contours(spec: &ContourSpec, a: &[Complex64], q: f64) -> Result<()> {
    let sq = q.powf(-0.5);
    for (j, c) in spec.circles.iter().enumerate() {
        let ok = c.encloses(Complex64::new(sq, 0.0))
            && !c.encloses(Complex64::new(-sq, 0.0))
            && !c.encloses(Complex64::new(0.0, 0.0))
            && a.iter().all(|&x| c.encloses(x) && c.encloses(1.0 / x));
        if !ok {
            return Err(Error::Domain(format!("contour {} misses a required pole or encloses 0 or -q^(-1/2)", j + 1)));
        }
        for inner in &spec.circles[j + 1..] {
            if !inner.sample(256).all(|s| c.encloses(q * s) && c.encloses(1.0 / (q * s))) {
                return Err(Error::Domain(format!("contour {} does not enclose (q s)^(±1) of an inner variable", j + 1)));
            }
        }
        for outer in &spec.circles[..j] {
            if outer.sample(256).any(|s| c.encloses(s / q) || c.encloses(1.0 / (q * s))) {
                return Err(Error::Domain(format!("contour {} encloses a pole from an outer variable", j + 1)));
            }
        }
    }
    Ok(())
}

fn contour_term(l: usize, t: f64, a: &[Complex64], q: f64, points: usize) -> Result<Complex64> {
    if l == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let spec = choose_contours(l, a, q)?;
    let samples: Vec<Vec<(Complex64, Complex64)>> = spec
        .circles
        .iter()
        .map(|c| {
            (0..points)
                .map(|m| {
                    let e = Complex64::from_polar(1.0, 2.0 * PI * m as f64 / points as f64);
                    (c.c() + c.radius * e, c.radius * e / points as f64)
                })
                .collect()
        })
        .collect();
    let single = |s: Complex64| -> Complex64 {
        let mut v = 1.0 / ((1.0 - q * s * s) * s);
        for &ai in a {
            v /= (s - ai) * (s - 1.0 / ai);
        }
        v
    };
    let exp_ratio = |s: Complex64| (((q - 1.0) * s + (1.0 / q - 1.0) / s) * t).exp();
    let total = points.pow(l as u32);
    let sum: Complex64 = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut s = Vec::with_capacity(l);
            let mut w = Complex64::new(1.0, 0.0);
            for circle in &samples {
                let (sj, dj) = circle[idx % points];
                idx /= points;
                s.push(sj);
                w *= dj;
            }
            let mut v = w;
            for j in 0..l {
                let mut cross = Complex64::new(1.0, 0.0);
                for i in 0..j {
                    cross *= (s[i] - s[j]) * (s[i] - 1.0 / s[j]) / ((s[i] - q * s[j]) * (s[i] - 1.0 / (q * s[j])));
                }
                v *= single(s[j]) * (cross * exp_ratio(s[j]) - 1.0);
            }
            v
        })
        .sum();
    Ok(if l % 2 == 1 { -sum } else { sum })
}

/// The nested contour-integral form of `⟨q^{-k Z_1}⟩`.
pub fn moment_contour(k: u32, t: f64, a: &[f64], q: f64, points: usize) -> Result<f64> {
    let ac: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    for l in 0..=k {
        acc += binom * contour_term(l as usize, t, &ac, q, points)?;
        binom = binom * (k - l) as f64 / (l + 1) as f64;
    }
    Ok(acc.re)
}

/// The three evaluations of `⟨q^{-k Z_1}⟩`.
#[derive(Clone, Debug, Serialize)]
pub struct MomentRoutes {
    pub k: u32,
    /// `Σ_z q^{-k z_1} p_t(z)` with the series coefficients.
    pub direct: f64,
    /// The same sum with torus-quadrature coefficients.
    pub direct_quadrature: f64,
    pub operator: f64,
    pub contour: f64,
    pub law_mass_defect: f64,
}

impl MomentRoutes {
    /// Largest pairwise relative difference.
    pub fn max_relative_spread(&self) -> f64 {
        let v = [self.direct, self.operator, self.contour];
        let mut m: f64 = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                m = m.max((v[i] - v[j]).abs() / v[j].abs().max(1e-300));
            }
        }
        m
    }
}

/// Settings for [`moments`].
#[derive(Clone, Debug)]
pub struct MomentSettings {
    pub window: i64,
    pub torus_points: usize,
    pub contour_points: usize,
}

impl Default for MomentSettings {
    fn default() -> Self {
        Self { window: 40, torus_points: 1024, contour_points: 1024 }
    }
}

/// `⟨q^{-k Z_1}⟩` at time `t` from the origin, by three routes.
pub fn moments(n: usize, k: u32, t: f64, a: &[f64], q: &Rational, settings: &MomentSettings) -> Result<MomentRoutes> {
    if k > 3 {
        return Err(Error::Domain("moments are supported for k ≤ 3".into()));
    }
    let qf = to_f64(q);
    let family = PolynomialFamily::new(n, q)?;
    let quad = TorusQuadrature::plain(n, settings.torus_points, qf)?;
    let table = law(&family, t, a, settings.window, CoefficientMethod::Series, 1e-9)?;
    let noisy = law(&family, t, a, settings.window, CoefficientMethod::Quadrature(&quad), 1e-3)?;
    Ok(MomentRoutes {
        k,
        direct: moment_direct(&table, k),
        direct_quadrature: moment_direct(&noisy, k),
        operator: moment_operator(k, t, a, qf)?,
        contour: moment_contour(k, t, a, qf, settings.contour_points)?,
        law_mass_defect: table.mass_defect,
    })
}

/// Total order refining dominance: by weight, then lexicographically.
pub fn graded_lex_basis(n: usize, max_weight: i64) -> Vec<Partition> {
    let mut v: Vec<Partition> = partitions_up_to(max_weight, n);
    v.sort_by(|x, y| x.weight().cmp(&y.weight()).then_with(|| x.parts().cmp(y.parts())));
    v
}

/// One member of the orthogonalised family, in the `m_μ` basis.
#[derive(Clone, Debug, Serialize)]
pub struct OrthogonalPolynomial {
    pub lambda: Vec<i64>,
    /// `(μ, c_{λμ})` with `c_{λλ} = 1`.
    pub coefficients: Vec<(Vec<i64>, f64)>,
    /// Smallest pivot ratio met while solving the Gram system.
    pub conditioning: f64,
}

impl OrthogonalPolynomial {
    pub fn coefficient(&self, mu: &[i64]) -> f64 {
        self.coefficients.iter().find(|(m, _)| m.as_slice() == mu).map(|c| c.1).unwrap_or(0.0)
    }

    /// Largest coefficient distance to a Laurent polynomial read in the `m_μ` basis.
    pub fn distance_to(&self, p: &LaurentPoly, n: usize) -> f64 {
        let mut d: f64 = 0.0;
        for (mu, c) in &self.coefficients {
            d = d.max((c - to_f64(&p.coeff(&pad(mu, n)))).abs());
        }
        for (e, c) in p.terms() {
            let sorted = {
                let mut v: Vec<i64> = e.iter().map(|x| x.abs()).collect();
                v.sort_unstable_by(|x, y| y.cmp(x));
                v
            };
            if &sorted == e && !self.coefficients.iter().any(|(m, _)| pad(m, n) == sorted) {
                d = d.max(to_f64(c).abs());
            }
        }
        d
    }
}

fn pad(v: &[i64], n: usize) -> Vec<i64> {
    let mut out = v.to_vec();
    out.resize(n, 0);
    out
}

/// Orthogonalises `m_μ`, `μ ≤ λ` in graded-lex order, under the `t0`-deformed weight.
pub fn gram_schmidt_koornwinder(
    n: usize,
    lam: &Partition,
    q: f64,
    t0: f64,
    points: usize,
) -> Result<OrthogonalPolynomial> {
    if t0.abs() >= 1.0 {
        return Err(Error::Domain("need |t0| < 1".into()));
    }
    let basis: Vec<Partition> = graded_lex_basis(n, lam.weight())
        .into_iter()
        .take_while(|mu| mu != lam)
        .chain(std::iter::once(lam.clone()))
        .collect();
    let quad = TorusQuadrature::new(n, points, q, t0, DEFAULT_TRUNCATION)?;
    let polys: Vec<FloatPoly> = basis.iter().map(|mu| FloatPoly::new(&monomial_symmetric(n, mu))).collect();
    // values of every m_μ at every node, then the Gram matrix
    let values: Vec<Vec<Complex64>> = polys.iter().map(|p| quad.nodes().par_iter().map(|a| p.eval(a)).collect()).collect();
    let dim = basis.len();
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..=i {
            let v: f64 = values[i].iter().zip(&values[j]).zip(&quad.weights).map(|((x, y), w)| (x * y.conj()).re * w).sum();
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let m = dim - 1;
    let mut coefficients = vec![(lam.parts().to_vec(), 1.0)];
    let mut conditioning = 1.0;
    if m > 0 {
        let g = gram.view((0, 0), (m, m)).into_owned();
        let rhs = -DVector::from_iterator(m, (0..m).map(|i| gram[(i, m)]));
        let lu = g.clone().lu();
        let u = lu.u();
        let diag: Vec<f64> = (0..m).map(|i| u[(i, i)].abs()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        conditioning = diag.iter().cloned().fold(f64::INFINITY, f64::min) / max;
        if conditioning < 1e-10 {
            return Err(Error::Numerical(format!("Gram matrix is ill-conditioned (pivot ratio {conditioning:.2e})")));
        }
        let c = lu.solve(&rhs).ok_or_else(|| Error::Numerical("singular Gram matrix".into()))?;
        for (i, mu) in basis[..m].iter().enumerate() {
            coefficients.push((mu.parts().to_vec(), c[i]));
        }
    }
    Ok(OrthogonalPolynomial { lambda: lam.parts().to_vec(), coefficients, conditioning })
}

/// `g(a) ≈ Σ_{|λ| ≤ cap} 𝒫_λ(a) Δ_λ ⟨g, 𝒫_λ⟩` evaluated at `points`.
pub fn reconstruct<G>(family: &PolynomialFamily, g: G, cap: i64, quad: &TorusQuadrature, at: &[Vec<Complex64>]) -> Vec<Complex64>
where
    G: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let n = family.n();
    let mut out = vec![Complex64::new(0.0, 0.0); at.len()];
    for lam in partitions_up_to(cap, n) {
        let p = family.float(&lam);
        let c = quad.inner_product(&g, |a| p.eval(a)) * norm_weight(&lam.padded(n), quad.q());
        for (o, x) in out.iter_mut().zip(at) {
            *o += c * p.eval(x);
        }
    }
    out
}

/// `(Σ_i a_i + 1/a_i) 𝒫_λ - Σ f(λ, λ') 𝒫_{λ'}` at a point; zero when the Pieri identity holds.
pub fn pieri_residual(family: &PolynomialFamily, lam: &Partition, a: &[Complex64]) -> Complex64 {
    let n = family.n();
    let ctx = QSeriesCtx::exact(family.q().clone()).expect("valid q");
    let z = lam.padded(n);
    let f = pieri_coefficients(n, &z, &ctx);
    let mut acc = a.iter().map(|x| x + 1.0 / x).sum::<Complex64>() * family.float(lam).eval(a);
    for i in 0..n {
        for (d, c) in [(1, &f.plus[i]), (-1, &f.minus[i])] {
            let mut w = z.clone();
            w[i] += d;
            if let Ok(p) = Partition::new(w) {
                acc -= to_f64(c) * family.float(&p).eval(a);
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{big_q_hermite_poly, rat};

    #[test]
    fn hermite_orthogonality_n1() {
        let q = rat(2, 5);
        let family = PolynomialFamily::new(1, &q).unwrap();
        let quad = TorusQuadrature::plain(1, 1024, 0.4).unwrap();
        let parts: Vec<Partition> = (0..5).map(|k| Partition::new(vec![k]).unwrap()).collect();
        let g = orthogonality_matrix(&family, &parts, &quad);
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g[i][j] - expect).abs() < 1e-10, "{i} {j} {}", g[i][j]);
            }
        }
    }

    #[test]
    fn weights_are_real_and_nonnegative() {
        let quad = TorusQuadrature::plain(2, 32, 0.4).unwrap();
        assert!(quad.weights.iter().all(|&w| w > -1e-14));
        assert!(quad.truncation_check() < 1e-12);
    }

    #[test]
    fn law_starts_at_origin_and_sums_to_one() {
        let family = PolynomialFamily::new(1, &rat(1, 2)).unwrap();
        let quad = TorusQuadrature::plain(1, 1024, 0.5).unwrap();
        let t0 = law(&family, 0.0, &[1.0], 10, CoefficientMethod::Quadrature(&quad), 1e-9).unwrap();
        assert!((t0.get(&[0]) - 1.0).abs() < 1e-12);
        let t1 = law(&family, 1.0, &[1.0], 40, CoefficientMethod::Quadrature(&quad), 1e-6).unwrap();
        assert!(t1.mass >= 0.999999);
        assert!(t1.min_entry > -1e-12);
    }

    #[test]
    fn law_solves_forward_equation() {
        let family = PolynomialFamily::new(1, &rat(1, 2)).unwrap();
        let quad = TorusQuadrature::plain(1, 1024, 0.5).unwrap();
        let a = [1.3];
        let h = 1e-4;
        let lo = law(&family, 1.0 - h, &a, 30, CoefficientMethod::Quadrature(&quad), 1e-6).unwrap();
        let mid = law(&family, 1.0, &a, 30, CoefficientMethod::Quadrature(&quad), 1e-6).unwrap();
        let hi = law(&family, 1.0 + h, &a, 30, CoefficientMethod::Quadrature(&quad), 1e-6).unwrap();
        let pz = |k: i64| family.float(&Partition::new(vec![k]).unwrap()).eval(&[Complex64::new(1.3, 0.0)]).re;
        for z in 0..8i64 {
            let deriv = (hi.get(&[z]) - lo.get(&[z])) / (2.0 * h);
            // generator Q(z, z±1) = 𝒫_{z±1}/𝒫_z f(z, z±1), diagonal -(a + 1/a)
            let mut flow = -(1.3 + 1.0 / 1.3) * mid.get(&[z]);
            if z > 0 {
                flow += mid.get(&[z - 1]) * pz(z) / pz(z - 1);
            }
            flow += mid.get(&[z + 1]) * pz(z) / pz(z + 1) * (1.0 - 0.5f64.powi(z as i32 + 1));
            assert!((deriv - flow).abs() < 1e-6, "z = {z}: {deriv} vs {flow}");
        }
    }

    #[test]
    fn series_and_quadrature_coefficients_agree() {
        for n in 1..=2 {
            let family = PolynomialFamily::new(n, &rat(2, 5)).unwrap();
            let quad = TorusQuadrature::plain(n, if n == 1 { 512 } else { 64 }, 0.4).unwrap();
            let a = vec![1.1; n];
            let s = law(&family, 0.7, &a, 6, CoefficientMethod::Series, 1e-2).unwrap();
            let t = law(&family, 0.7, &a, 6, CoefficientMethod::Quadrature(&quad), 1e-2).unwrap();
            for ((z, x), (_, y)) in s.entries.iter().zip(&t.entries) {
                assert!((x - y).abs() < 1e-9, "n = {n}, z = {z:?}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn direct_moments_match_operator() {
        let m = moments(1, 2, 1.0, &[1.3], &rat(1, 2), &MomentSettings { window: 40, torus_points: 256, contour_points: 256 })
            .unwrap();
        assert!((m.direct - m.operator).abs() / m.operator < 1e-8, "{m:?}");
    }

    #[test]
    fn eigenrelation_n1() {
        let family = PolynomialFamily::new(1, &rat(2, 5)).unwrap();
        let a = [Complex64::new(0.7, 0.2)];
        for k in 0..=4 {
            let p = family.float(&Partition::new(vec![k]).unwrap());
            let f = |b: &[Complex64]| p.eval(b);
            let lhs = koornwinder_apply(&f, &a, 0.4, 1).unwrap();
            let rhs = (0.4f64.powi(-(k as i32)) - 1.0) * p.eval(&a);
            assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1e-300) + 1e-12, "k = {k}");
        }
        let one = |_: &[Complex64]| Complex64::new(1.0, 0.0);
        assert!(koornwinder_apply(&one, &a, 0.4, 2).unwrap().norm() < 1e-14);
        assert!(koornwinder_apply(&one, &[Complex64::new(1.0, 0.0)], 0.4, 1).is_err());
    }

    #[test]
    fn moment_routes_trivial_cases() {
        assert!((moment_operator(0, 1.0, &[1.3], 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((moment_operator(2, 0.0, &[1.3], 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((moment_contour(2, 0.0, &[1.3], 0.5, 128).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn operator_and_contour_agree() {
        for k in 1..=2 {
            let op = moment_operator(k, 1.0, &[1.3], 0.5).unwrap();
            let ct = moment_contour(k, 1.0, &[1.3], 0.5, 1024).unwrap();
            assert!((op - ct).abs() / op < 1e-8, "k = {k}: {op} vs {ct}");
        }
    }

    #[test]
    fn gram_schmidt_recovers_big_hermite() {
        let lam = Partition::new(vec![2]).unwrap();
        let gs = gram_schmidt_koornwinder(1, &lam, 0.4, 0.3, 512).unwrap();
        let ctx = QSeriesCtx::exact(rat(2, 5)).unwrap();
        let big = big_q_hermite_poly(&ctx, 2, &rat(3, 10)).unwrap();
        assert!(gs.distance_to(&big, 1) < 1e-8, "{gs:?}");
    }

    #[test]
    fn reconstruction_of_symmetric_function() {
        let family = PolynomialFamily::new(1, &rat(2, 5)).unwrap();
        let quad = TorusQuadrature::plain(1, 256, 0.4).unwrap();
        let at: Vec<Vec<Complex64>> = (0..5).map(|j| vec![Complex64::from_polar(1.0, 0.3 + j as f64)]).collect();
        let g = |a: &[Complex64]| (a[0] + 1.0 / a[0]).powi(3);
        let r = reconstruct(&family, g, 6, &quad, &at);
        for (x, v) in at.iter().zip(r) {
            assert!((g(x) - v).norm() < 1e-8);
        }
    }
}
