//! Exact rationals, multivariate Laurent polynomials and the q-series toolkit.
//!
//! Everything q-dependent is parametrised by a [`QSeriesCtx`], which fixes a
//! concrete value of `q` either as an exact [`Rational`] or as a float. Exact
//! mode refuses infinite products; numeric mode truncates them.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number with arbitrary-precision numerator and denominator.
pub type Rational = BigRational;

/// Builds `p/q` as a [`Rational`].
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `p/q`, an integer, a finite decimal such as `0.4` or `1e-3` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((mantissa, exp)) = s.split_once(['e', 'E']) {
        let exp: i32 = exp.parse().map_err(|_| bad())?;
        let scale = Rational::from_integer(BigInt::from(10)).powi(exp as i64);
        return Ok(parse_rational(mantissa)? * scale);
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let frac_num: BigInt = frac.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let mut r = Rational::from_integer(int_part.abs()) + Rational::new(frac_num, den);
        if neg {
            r = -r;
        }
        return Ok(r);
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

/// Lossy conversion to `f64`.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Field of scalars used by the generic algorithms: exact rationals, `f64` and `Complex64`.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// Modulus as a float, used for tolerances and convergence checks.
    fn magnitude(&self) -> f64;
    /// Whether arithmetic is exact.
    fn is_exact() -> bool;

    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }

    fn powi(&self, e: i64) -> Self {
        let mut base = if e < 0 { self.inv() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Scalar for Rational {
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn magnitude(&self) -> f64 {
        to_f64(self).abs()
    }
    fn is_exact() -> bool {
        true
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        to_f64(r)
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_exact() -> bool {
        false
    }
    fn powi(&self, e: i64) -> Self {
        f64::powi(*self, e as i32)
    }
}

impl Scalar for Complex64 {
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_rational(r: &Rational) -> Self {
        Complex64::new(to_f64(r), 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_exact() -> bool {
        false
    }
    fn powi(&self, e: i64) -> Self {
        Complex64::powi(self, e as i32)
    }
}

/// Number of factors in a q-Pochhammer symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Count {
    Finite(usize),
    Infinite,
}

/// Default depth used for `(x;q)_∞` in numeric mode.
pub const DEFAULT_TRUNCATION: usize = 60;

/// A concrete value of `q` together with the evaluation mode.
#[derive(Clone, Debug, PartialEq)]
pub struct QSeriesCtx<F> {
    q: F,
    truncation: Option<usize>,
}

impl QSeriesCtx<Rational> {
    /// Exact mode: `q` rational with `|q| < 1`; infinite products are rejected.
    pub fn exact(q: Rational) -> Result<Self> {
        if q.abs() >= Rational::one() {
            return Err(Error::Domain(format!("|q| must be < 1, got {q}")));
        }
        Ok(Self { q, truncation: None })
    }

    /// Same `q` evaluated in double precision.
    pub fn to_numeric(&self, truncation: usize) -> QSeriesCtx<f64> {
        QSeriesCtx { q: to_f64(&self.q), truncation: Some(truncation) }
    }
}

impl<F: Scalar> QSeriesCtx<F> {
    /// Numeric mode with `(x;q)_∞` truncated at `truncation` factors.
    pub fn numeric(q: F, truncation: usize) -> Result<Self> {
        if q.magnitude() >= 1.0 {
            return Err(Error::Domain(format!("|q| must be < 1, got {q:?}")));
        }
        if truncation == 0 {
            return Err(Error::Domain("truncation depth must be at least 1".into()));
        }
        Ok(Self { q, truncation: Some(truncation) })
    }

    pub fn q(&self) -> &F {
        &self.q
    }

    pub fn truncation(&self) -> Option<usize> {
        self.truncation
    }

    pub fn is_exact(&self) -> bool {
        self.truncation.is_none()
    }

    /// `q^e` for any integer `e`.
    pub fn power(&self, e: i64) -> F {
        self.q.powi(e)
    }

    /// `(x;q)_k = ∏_{j<k} (1 - x q^j)`, truncated when `k` is infinite.
    pub fn pochhammer(&self, x: &F, k: Count) -> Result<F> {
        match k {
            Count::Finite(k) => Ok(self.pochhammer_finite(x, k)),
            Count::Infinite => match self.truncation {
                Some(depth) => Ok(self.pochhammer_finite(x, depth)),
                None => Err(Error::UnsupportedMode(
                    "(x;q)_inf requires numeric mode".into(),
                )),
            },
        }
    }

    pub fn pochhammer_finite(&self, x: &F, k: usize) -> F {
        let mut acc = F::one();
        let mut term = x.clone();
        for _ in 0..k {
            acc = acc * (F::one() - term.clone());
            term = term * self.q.clone();
        }
        acc
    }

    /// `(q;q)_k`.
    pub fn qfactorial(&self, k: usize) -> F {
        self.pochhammer_finite(&self.q, k)
    }

    /// Gaussian binomial `[n choose k]_q`; errors outside `0 ≤ k ≤ n`.
    pub fn binomial(&self, n: i64, k: i64) -> Result<F> {
        if n < 0 || k < 0 || k > n {
            return Err(Error::Domain(format!("q-binomial({n}, {k}) out of range")));
        }
        let k = k.min(n - k) as usize;
        let n = n as usize;
        // ∏_{j=1}^{k} (1 - q^{n-k+j}) / (1 - q^j)
        let mut num = F::one();
        let mut den = F::one();
        for j in 1..=k {
            num = num * (F::one() - self.power((n - k + j) as i64));
            den = den * (F::one() - self.power(j as i64));
        }
        Ok(num / den)
    }

    /// Gaussian binomial, zero outside the valid range.
    pub fn binomial_or_zero(&self, n: i64, k: i64) -> F {
        self.binomial(n, k).unwrap_or_else(|_| F::zero())
    }

    /// Pascal table of Gaussian binomials up to row `nmax`.
    pub fn binomial_table(&self, nmax: usize) -> BinomialTable<F> {
        BinomialTable::new(self, nmax)
    }
}

/// Precomputed `[n choose k]_q` for `0 ≤ k ≤ n ≤ nmax`.
#[derive(Clone, Debug)]
pub struct BinomialTable<F> {
    rows: Vec<Vec<F>>,
}

impl<F: Scalar> BinomialTable<F> {
    pub fn new(ctx: &QSeriesCtx<F>, nmax: usize) -> Self {
        let mut rows: Vec<Vec<F>> = Vec::with_capacity(nmax + 1);
        rows.push(vec![F::one()]);
        for n in 1..=nmax {
            let prev = &rows[n - 1];
            let mut row = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let left = if k >= 1 { prev[k - 1].clone() } else { F::zero() };
                let right = if k < n { prev[k].clone() * ctx.power(k as i64) } else { F::zero() };
                row.push(left + right);
            }
            rows.push(row);
        }
        Self { rows }
    }

    pub fn nmax(&self) -> usize {
        self.rows.len() - 1
    }

    /// `None` when `(n, k)` is out of range.
    pub fn get(&self, n: i64, k: i64) -> Option<&F> {
        if n < 0 || k < 0 || k > n {
            return None;
        }
        self.rows.get(n as usize).map(|r| &r[k as usize])
    }

    pub fn get_or_zero(&self, n: i64, k: i64) -> F {
        self.get(n, k).cloned().unwrap_or_else(F::zero)
    }
}

/// `(x;q)_k` as a free function.
pub fn q_pochhammer<F: Scalar>(ctx: &QSeriesCtx<F>, x: &F, k: Count) -> Result<F> {
    ctx.pochhammer(x, k)
}

/// `[n choose k]_q` as a free function.
pub fn q_binomial<F: Scalar>(ctx: &QSeriesCtx<F>, n: i64, k: i64) -> Result<F> {
    ctx.binomial(n, k)
}

/// Multivariate Laurent polynomial in `a1..an` with exact rational coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    nvars: usize,
    terms: BTreeMap<Vec<i64>, Rational>,
}

impl LaurentPoly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn monomial(exponents: Vec<i64>, c: Rational) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    /// The variable `a_{i+1}` (zero-based `i`).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, Rational::one())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exponents: &[i64]) -> Rational {
        self.terms.get(exponents).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds `c * a^exponents`, dropping the term if it cancels.
    pub fn add_term(&mut self, exponents: Vec<i64>, c: Rational) {
        assert_eq!(exponents.len(), self.nvars, "exponent length mismatch");
        if num_traits::Zero::is_zero(&c) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exponents) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if num_traits::Zero::is_zero(&s) {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add_assign_scaled(&mut self, other: &LaurentPoly, c: &Rational) {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        for (e, v) in &other.terms {
            self.add_term(e.clone(), v * c);
        }
    }

    pub fn scale(&self, c: &Rational) -> LaurentPoly {
        if num_traits::Zero::is_zero(c) {
            return Self::zero(self.nvars);
        }
        LaurentPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Multiplies by the monomial `a^shift`.
    pub fn shift(&self, shift: &[i64]) -> LaurentPoly {
        LaurentPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, v)| (e.iter().zip(shift).map(|(a, b)| a + b).collect(), v.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> LaurentPoly {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluates at a point, one scalar per variable.
    pub fn eval<F: Scalar>(&self, point: &[F]) -> F {
        assert_eq!(point.len(), self.nvars, "point dimension mismatch");
        let mut acc = F::zero();
        for (e, c) in &self.terms {
            let mut t = F::from_rational(c);
            for (x, &k) in point.iter().zip(e) {
                if k != 0 {
                    t = t * x.powi(k);
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Renames variables: variable `i` becomes variable `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> LaurentPoly {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut ne = vec![0; self.nvars];
            for (i, &k) in e.iter().enumerate() {
                ne[perm[i]] = k;
            }
            out.add_term(ne, c.clone());
        }
        out
    }

    /// Substitutes `a_i -> 1/a_i`.
    pub fn invert_var(&self, i: usize) -> LaurentPoly {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            ne[i] = -ne[i];
            out.add_term(ne, c.clone());
        }
        out
    }

    /// Applies a map to every coefficient, dropping zeros.
    pub fn map_coeffs(&self, f: impl Fn(&Rational) -> Rational) -> LaurentPoly {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    /// Largest `|coefficient|` of `self - other`, as a float.
    pub fn max_coeff_distance(&self, other: &LaurentPoly) -> f64 {
        (self - other).terms.values().map(|c| to_f64(c).abs()).fold(0.0, f64::max)
    }

    /// Parses the canonical text form, e.g. `3/2 * a1^2 a2^-1 - 1`.
    pub fn parse(s: &str, nvars: usize) -> Result<LaurentPoly> {
        let mut out = Self::zero(nvars);
        let tokens: Vec<&str> = s.split_whitespace().collect();
        if tokens.len() == 1 && tokens[0] == "0" {
            return Ok(out);
        }
        let mut i = 0;
        let mut sign = Rational::one();
        let err = |m: &str| Error::Parse(format!("{m} in {s:?}"));
        while i < tokens.len() {
            match tokens[i] {
                "+" => {
                    i += 1;
                }
                "-" => {
                    sign = -sign;
                    i += 1;
                }
                _ => {}
            }
            if i >= tokens.len() {
                return Err(err("dangling sign"));
            }
            let mut coeff = Rational::one();
            let mut exps = vec![0i64; nvars];
            if !tokens[i].starts_with('a') {
                coeff = parse_rational(tokens[i])?;
                i += 1;
                if i < tokens.len() && tokens[i] == "*" {
                    i += 1;
                } else {
                    out.add_term(exps, sign * coeff);
                    sign = Rational::one();
                    continue;
                }
            }
            let mut saw_var = false;
            while i < tokens.len() && tokens[i].starts_with('a') {
                let (idx, e) = match tokens[i][1..].split_once('^') {
                    Some((idx, e)) => (idx, e.parse::<i64>().map_err(|_| err("bad exponent"))?),
                    None => (&tokens[i][1..], 1),
                };
                let idx: usize = idx.parse().map_err(|_| err("bad variable"))?;
                if idx == 0 || idx > nvars {
                    return Err(err("variable index out of range"));
                }
                exps[idx - 1] += e;
                saw_var = true;
                i += 1;
            }
            if !saw_var {
                return Err(err("expected a variable after '*'"));
            }
            out.add_term(exps, sign * coeff);
            sign = Rational::one();
        }
        Ok(out)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(i, &k)| if k == 1 { format!("a{}", i + 1) } else { format!("a{}^{}", i + 1, k) })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else {
                write!(f, "{mag} * {}", vars.join(" "))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out.add_assign_scaled(rhs, &Rational::one());
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out.add_assign_scaled(rhs, &-Rational::one());
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = LaurentPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

/// Continuous q-Hermite polynomial `H_l(a|q) = Σ_m [l choose m]_q a^{2m-l}` in one variable.
pub fn q_hermite(ctx: &QSeriesCtx<Rational>, l: usize) -> LaurentPoly {
    let mut p = LaurentPoly::zero(1);
    for m in 0..=l {
        let c = ctx.binomial(l as i64, m as i64).expect("in range");
        p.add_term(vec![2 * m as i64 - l as i64], c);
    }
    p
}

/// Evaluates `H_l(a|q)` directly.
pub fn q_hermite_value<F: Scalar>(ctx: &QSeriesCtx<F>, l: usize, a: &F) -> F {
    let mut acc = F::zero();
    for m in 0..=l {
        let c = ctx.binomial(l as i64, m as i64).expect("in range");
        acc = acc + c * a.powi(2 * m as i64 - l as i64);
    }
    acc
}

/// Terminating or truncated `_{s+1}φ_s(numerators; denominators | q; z)`.
///
/// With `depth = None` the series must terminate: some numerator has to equal
/// `q^{-l}` for `l ≤ 256`, and the sum stops after the `k = l` term.
pub fn basic_hypergeometric<F: Scalar>(
    ctx: &QSeriesCtx<F>,
    numerators: &[F],
    denominators: &[F],
    z: &F,
    depth: Option<usize>,
) -> Result<F> {
    if numerators.len() != denominators.len() + 1 {
        return Err(Error::Domain("expected r = s + 1 parameters".into()));
    }
    let depth = match depth {
        Some(d) => d,
        None => terminating_degree(ctx, numerators)
            .map(|l| l + 1)
            .ok_or_else(|| Error::Domain("non-terminating series needs a truncation depth".into()))?,
    };
    let mut sum = F::zero();
    let mut term = F::one();
    for k in 0..depth {
        sum = sum + term.clone();
        let qk = ctx.power(k as i64);
        let mut num = z.clone();
        for a in numerators {
            num = num * (F::one() - a.clone() * qk.clone());
        }
        let mut den = F::one() - ctx.power(k as i64 + 1);
        for b in denominators {
            den = den * (F::one() - b.clone() * qk.clone());
        }
        if num.is_zero() {
            break;
        }
        term = term * num / den;
    }
    Ok(sum)
}

fn terminating_degree<F: Scalar>(ctx: &QSeriesCtx<F>, numerators: &[F]) -> Option<usize> {
    let tol = if F::is_exact() { 0.0 } else { 1e-12 };
    numerators
        .iter()
        .filter_map(|a| (0..=256).find(|&l| (a.clone() * ctx.power(l as i64) - F::one()).magnitude() <= tol))
        .min()
}

/// Big q-Hermite polynomial via `t0^{-l} 3φ2(q^{-l}, t0 x, t0/x; 0, 0 | q; q)`.
pub fn big_q_hermite_3phi2<F: Scalar>(ctx: &QSeriesCtx<F>, l: usize, t0: &F, x: &F) -> Result<F> {
    check_t0_x(t0, x)?;
    // The termination degree is known, so pass it explicitly.
    let nums = [ctx.power(-(l as i64)), t0.clone() * x.clone(), t0.clone() / x.clone()];
    let dens = [F::zero(), F::zero()];
    let s = basic_hypergeometric(ctx, &nums, &dens, ctx.q(), Some(l + 1))?;
    Ok(s * t0.powi(-(l as i64)))
}

/// Big q-Hermite polynomial via `t0^{-l} Σ_r [l choose r]_q t0^r q^{r²-lr} ⟨x;t0⟩_r`.
pub fn big_q_hermite_expansion<F: Scalar>(ctx: &QSeriesCtx<F>, l: usize, t0: &F, x: &F) -> Result<F> {
    check_t0_x(t0, x)?;
    let l = l as i64;
    let mut acc = F::zero();
    for r in 0..=l {
        let c = ctx.binomial(l, r)? * t0.powi(r) * ctx.power(r * r - l * r);
        acc = acc + c * expanding_value(ctx, r as usize, t0, x)?;
    }
    Ok(acc * t0.powi(-l))
}

fn check_t0_x<F: Scalar>(t0: &F, x: &F) -> Result<()> {
    if t0.is_zero() {
        return Err(Error::Domain("t0 must be nonzero".into()));
    }
    if x.is_zero() {
        return Err(Error::Domain("x must be nonzero".into()));
    }
    Ok(())
}

/// `⟨x;t0⟩_r = ∏_{l=1}^{r} (x + 1/x - t0 q^{l-1} - q^{1-l}/t0)`.
pub fn expanding_value<F: Scalar>(ctx: &QSeriesCtx<F>, r: usize, t0: &F, x: &F) -> Result<F> {
    check_t0_x(t0, x)?;
    let s = x.clone() + x.inv();
    let mut acc = F::one();
    for l in 0..r as i64 {
        acc = acc * (s.clone() - t0.clone() * ctx.power(l) - ctx.power(-l) / t0.clone());
    }
    Ok(acc)
}

/// `⟨x;t0⟩_r` as a Laurent polynomial in one variable.
pub fn expanding_poly(ctx: &QSeriesCtx<Rational>, r: usize, t0: &Rational) -> Result<LaurentPoly> {
    if num_traits::Zero::is_zero(t0) {
        return Err(Error::Domain("t0 must be nonzero".into()));
    }
    let mut acc = LaurentPoly::one(1);
    for l in 0..r as i64 {
        let mut factor = LaurentPoly::zero(1);
        factor.add_term(vec![1], Rational::one());
        factor.add_term(vec![-1], Rational::one());
        factor.add_term(vec![0], -(t0 * ctx.power(l) + ctx.power(-l) / t0));
        acc = &acc * &factor;
    }
    Ok(acc)
}

/// Big q-Hermite polynomial as a Laurent polynomial in one variable.
pub fn big_q_hermite_poly(ctx: &QSeriesCtx<Rational>, l: usize, t0: &Rational) -> Result<LaurentPoly> {
    if num_traits::Zero::is_zero(t0) {
        return Err(Error::Domain("t0 must be nonzero".into()));
    }
    let l = l as i64;
    let mut acc = LaurentPoly::zero(1);
    for r in 0..=l {
        let c = ctx.binomial(l, r)? * t0.powi(r - l) * ctx.power(r * r - l * r);
        acc.add_assign_scaled(&expanding_poly(ctx, r as usize, t0)?, &c);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: i64, q: i64) -> QSeriesCtx<Rational> {
        QSeriesCtx::exact(rat(p, q)).unwrap()
    }

    #[test]
    fn pochhammer_small_cases() {
        let c = ctx(1, 2);
        assert_eq!(c.pochhammer(&rat(7, 3), Count::Finite(0)).unwrap(), rat(1, 1));
        assert_eq!(c.pochhammer(&rat(1, 2), Count::Finite(2)).unwrap(), rat(3, 8));
        assert!(matches!(c.pochhammer(&rat(1, 2), Count::Infinite), Err(Error::UnsupportedMode(_))));
    }

    #[test]
    fn truncated_infinite_product_is_stable() {
        let c60 = QSeriesCtx::numeric(0.4, 60).unwrap();
        let c200 = QSeriesCtx::numeric(0.4, 200).unwrap();
        let a = c60.pochhammer(&0.4, Count::Infinite).unwrap();
        let b = c200.pochhammer(&0.4, Count::Infinite).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn binomial_basics() {
        let c = ctx(1, 3);
        let q = rat(1, 3);
        assert_eq!(c.binomial(5, 0).unwrap(), rat(1, 1));
        assert_eq!(c.binomial(2, 1).unwrap(), rat(1, 1) + &q);
        assert_eq!(c.binomial(3, 1).unwrap(), rat(1, 1) + &q + &q * &q);
        assert!(c.binomial(2, 3).is_err());
        assert!(c.binomial(2, -1).is_err());
    }

    #[test]
    fn binomial_identities() {
        for c in [ctx(1, 3), ctx(1, 2), ctx(2, 5)] {
            let one = Rational::one();
            let qp = |e: i64| c.power(e);
            for n in 0..=10i64 {
                for k in 0..=n {
                    let b = c.binomial(n, k).unwrap();
                    assert_eq!(b, c.binomial(n, n - k).unwrap());
                    assert_eq!(
                        c.binomial(n + 1, k).unwrap(),
                        &b * (&one - qp(n + 1)) / (&one - qp(n - k + 1))
                    );
                    if n >= 1 && k <= n - 1 {
                        assert_eq!(c.binomial(n - 1, k).unwrap(), &b * (&one - qp(n - k)) / (&one - qp(n)));
                    }
                    if k + 1 <= n {
                        assert_eq!(c.binomial(n, k + 1).unwrap(), &b * (&one - qp(n - k)) / (&one - qp(k + 1)));
                    }
                    if k >= 1 {
                        assert_eq!(c.binomial(n, k - 1).unwrap(), &b * (&one - qp(k)) / (&one - qp(n - k + 1)));
                    }
                }
            }
        }
    }

    #[test]
    fn table_matches_direct() {
        let c = ctx(2, 5);
        let t = c.binomial_table(12);
        for n in 0..=12 {
            for k in 0..=n {
                assert_eq!(t.get(n, k).unwrap(), &c.binomial(n, k).unwrap());
            }
        }
        assert!(t.get(3, 4).is_none());
    }

    #[test]
    fn q_factorial_classical_limit() {
        let q = 1.0 - 1e-6;
        let c = QSeriesCtx::numeric(q, 60).unwrap();
        let mut fact = 1.0;
        for n in 1..=8usize {
            fact *= n as f64;
            let v = c.qfactorial(n) / (1.0 - q).powi(n as i32);
            assert!((v - fact).abs() / fact < 1e-4, "n={n}: {v}");
        }
    }

    #[test]
    fn hermite_small_degrees() {
        let c = ctx(1, 3);
        assert_eq!(q_hermite(&c, 0), LaurentPoly::one(1));
        assert_eq!(q_hermite(&c, 1).to_string(), "1 * a1 + 1 * a1^-1");
        assert_eq!(q_hermite(&c, 2).to_string(), "1 * a1^2 + 4/3 + 1 * a1^-2");
    }

    #[test]
    fn hermite_is_palindromic() {
        let c = ctx(2, 5);
        for l in 0..8 {
            let h = q_hermite(&c, l);
            assert_eq!(h, h.invert_var(0));
        }
    }

    #[test]
    fn big_hermite_forms_agree_exactly() {
        let c = ctx(1, 2);
        let t0 = rat(1, 3);
        let x = rat(2, 1);
        for l in 0..6 {
            let a = big_q_hermite_3phi2(&c, l, &t0, &x).unwrap();
            let b = big_q_hermite_expansion(&c, l, &t0, &x).unwrap();
            assert_eq!(a, b, "l={l}");
            assert_eq!(big_q_hermite_poly(&c, l, &t0).unwrap().eval(&[x.clone()]), a);
        }
        assert_eq!(big_q_hermite_3phi2(&c, 0, &t0, &x).unwrap(), rat(1, 1));
        assert!(big_q_hermite_3phi2(&c, 2, &rat(0, 1), &x).is_err());
    }

    #[test]
    fn big_hermite_tends_to_hermite() {
        // Negative powers of t0 cancel catastrophically in floats, so stay exact.
        let c = ctx(2, 5);
        let x = rat(17, 10);
        for l in 0..5 {
            let target = q_hermite(&c, l).eval(&[x.clone()]);
            let err = |t0: Rational| to_f64(&(big_q_hermite_expansion(&c, l, &t0, &x).unwrap() - &target)).abs();
            let (e1, e2) = (err(rat(1, 1000)), err(rat(1, 10000)));
            assert!(e2 <= e1 * 0.2 + 1e-300, "l={l}: {e1} {e2}");
        }
    }

    #[test]
    fn three_phi_two_requires_termination() {
        let c = QSeriesCtx::numeric(0.5, 60).unwrap();
        let r = basic_hypergeometric(&c, &[0.3, 0.2, 0.1], &[0.0, 0.0], &0.5, None);
        assert!(r.is_err());
        let r = basic_hypergeometric(&c, &[4.0, 0.2, 0.1], &[0.0, 0.0], &0.5, None).unwrap();
        // q^{-2} = 4: terminates after the k = 2 term.
        let direct = basic_hypergeometric(&c, &[4.0, 0.2, 0.1], &[0.0, 0.0], &0.5, Some(3)).unwrap();
        assert_eq!(r, direct);
    }

    #[test]
    fn text_round_trip() {
        let p = LaurentPoly::parse("3/2 * a1^2 a2^-1 - 1 + 1 * a2", 2).unwrap();
        assert_eq!(LaurentPoly::parse(&p.to_string(), 2).unwrap(), p);
        assert_eq!(p.coeff(&[2, -1]), rat(3, 2));
        assert_eq!(p.coeff(&[0, 0]), rat(-1, 1));
        assert_eq!(LaurentPoly::parse("0", 3).unwrap(), LaurentPoly::zero(3));
        assert!(LaurentPoly::parse("1 * b1", 1).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("2/5").unwrap(), rat(2, 5));
        assert_eq!(parse_rational("0.4").unwrap(), rat(2, 5));
        assert_eq!(parse_rational("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(parse_rational("7").unwrap(), rat(7, 1));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational("2.5E2").unwrap(), rat(250, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
