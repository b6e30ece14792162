//! Branching polynomials of the deformed hyperoctahedral q-Whittaker family
//! (parameters `t1 = t2 = t3 = 0`) and checks against the recursion kernel.
//!
//! A [`BranchingPair`] is a pair `λ ∈ Λ_n`, `ν ∈ Λ_{n-1}` differing by two
//! horizontal strips. Its branching polynomial is
//! `P(x) = Σ_r B^r ⟨x;t0⟩_r` with `B^r = c · Σ_{|I+|+|I-| = d-r} A(I+, I-)`.

use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{expanding_poly, q_hermite, rat, to_f64, LaurentPoly, QSeriesCtx, Rational, Scalar};
use crate::characters::recursion_kernel;
use crate::combinatorics::{partitions_of, Partition, INF};
use crate::error::{Error, Result};

/// Largest `|J^c|` for which the `3^|J^c|` sign assignments are enumerated.
pub const MAX_FREE_COLUMNS: usize = 12;

/// A pair `λ ∈ Λ_n`, `ν ∈ Λ_{n-1}` with `λᵀ_i − νᵀ_i ∈ {0,1,2}`, plus derived data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchingPair {
    n: usize,
    lambda: Partition,
    nu: Partition,
    lambda_t: Vec<i64>,
    nu_t: Vec<i64>,
    d: usize,
    nu_star: Vec<i64>,
    lambda_star: Vec<i64>,
    /// 1-based column indices `j` with `ν*_j = λ*_j`.
    free: Vec<usize>,
}

impl BranchingPair {
    pub fn new(lambda: Partition, nu: Partition, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("rank n must be at least 1".into()));
        }
        if lambda.len() > n || nu.len() > n - 1 {
            return Err(Error::Domain(format!(
                "need λ with at most {n} parts and ν with at most {} parts",
                n - 1
            )));
        }
        let lambda_t = lambda.transpose().parts().to_vec();
        let m = lambda_t.len();
        let nu_t = nu.transpose();
        if nu_t.len() > m {
            return Err(Error::Domain(format!("{nu} is not contained in {lambda}")));
        }
        let nu_t = nu_t.padded(m);
        let mut d = 0;
        for i in 0..m {
            match lambda_t[i] - nu_t[i] {
                0 | 2 => {}
                1 => d += 1,
                _ => {
                    return Err(Error::Domain(format!(
                        "{lambda} and {nu} do not differ by two horizontal strips"
                    )))
                }
            }
        }
        let nu_star: Vec<i64> = (1..=m).map(|j| n as i64 - nu_t[m - j]).collect();
        let lambda_star: Vec<i64> = (1..=m).map(|j| n as i64 + 1 - lambda_t[m - j]).collect();
        let free: Vec<usize> = (1..=m).filter(|&j| nu_star[j - 1] == lambda_star[j - 1]).collect();
        debug_assert_eq!(free.len(), d);
        Ok(Self { n, lambda, nu, lambda_t, nu_t, d, nu_star, lambda_star, free })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> &Partition {
        &self.lambda
    }

    pub fn nu(&self) -> &Partition {
        &self.nu
    }

    /// Number of columns of `λ`.
    pub fn m(&self) -> usize {
        self.lambda_t.len()
    }

    /// Number of columns where `λ` and `ν` differ by exactly one box.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nu_star(&self) -> &[i64] {
        &self.nu_star
    }

    pub fn lambda_star(&self) -> &[i64] {
        &self.lambda_star
    }

    /// The index set `J^c` (1-based).
    pub fn free_columns(&self) -> &[usize] {
        &self.free
    }

    /// `λ_i` for `1 ≤ i`, zero past the end.
    fn lam_at(&self, i: usize) -> i64 {
        if i == 0 {
            INF
        } else {
            self.lambda.get(i - 1)
        }
    }

    /// `ν_i` with `ν_0 = ∞` and `ν_i = 0` for `i ≥ n`.
    fn nu_at(&self, i: usize) -> i64 {
        if i == 0 {
            INF
        } else {
            self.nu.get(i - 1)
        }
    }

    /// `min(ν_{i-1}, λ_i) − max(ν_i, λ_{i+1})` for `1 ≤ i ≤ n`.
    pub fn gap(&self, i: usize) -> i64 {
        self.nu_at(i - 1).min(self.lam_at(i)) - self.nu_at(i).max(self.lam_at(i + 1))
    }

    pub fn gaps(&self) -> Vec<i64> {
        (1..=self.n).map(|i| self.gap(i)).collect()
    }

    /// `λ` padded to `n` parts.
    pub fn lambda_parts(&self) -> Vec<i64> {
        self.lambda.padded(self.n)
    }

    /// `ν` padded to `n − 1` parts.
    pub fn nu_parts(&self) -> Vec<i64> {
        self.nu.padded(self.n - 1)
    }
}

/// Signs `ε_j ∈ {+1, −1, 0}` on `J^c`; `I+` is where `ε = +1`, `I-` where `ε = −1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignAssignment {
    eps: Vec<i8>,
}

impl SignAssignment {
    /// Builds the assignment from `I+` and `I-`, given as 1-based column indices in `J^c`.
    pub fn new(pair: &BranchingPair, plus: &[usize], minus: &[usize]) -> Result<Self> {
        let free = pair.free_columns();
        let mut eps = vec![0i8; free.len()];
        for (set, sign) in [(plus, 1i8), (minus, -1i8)] {
            for j in set {
                let pos = free
                    .iter()
                    .position(|f| f == j)
                    .ok_or_else(|| Error::Domain(format!("column {j} is not in J^c")))?;
                if eps[pos] != 0 {
                    return Err(Error::Domain(format!("column {j} is in both I+ and I-")));
                }
                eps[pos] = sign;
            }
        }
        Ok(Self { eps })
    }

    /// Signs listed in the order of `J^c`.
    pub fn from_signs(eps: Vec<i8>) -> Self {
        Self { eps }
    }

    pub fn signs(&self) -> &[i8] {
        &self.eps
    }

    /// `|I+| + |I-|`.
    pub fn support(&self) -> usize {
        self.eps.iter().filter(|&&e| e != 0).count()
    }

    /// The `idx`-th assignment in base-3 order.
    fn nth(len: usize, mut idx: usize) -> Self {
        let mut eps = Vec::with_capacity(len);
        for _ in 0..len {
            eps.push(match idx % 3 {
                0 => 0,
                1 => 1,
                _ => -1,
            });
            idx /= 3;
        }
        Self { eps }
    }
}

fn ratio_factor<F: Scalar>(ctx: &QSeriesCtx<F>, diff: i64) -> F {
    (F::one() - ctx.power(1 + diff)) / (F::one() - ctx.power(diff))
}

/// `c(λ, ν; q)` from its defining product over column pairs.
pub fn c_factor<F: Scalar>(pair: &BranchingPair, ctx: &QSeriesCtx<F>) -> F {
    let (lt, nt) = (&pair.lambda_t, &pair.nu_t);
    let mut acc = F::one();
    for j in 0..lt.len() {
        for k in j + 1..lt.len() {
            if nt[k] < nt[j] && lt[k] == lt[j] {
                acc = acc * ratio_factor(ctx, (k - j) as i64);
            }
        }
    }
    acc
}

/// `c(λ, ν; q)` as the product of q-binomials read off the top coefficient of the kernel.
pub fn c_factor_min_form<F: Scalar>(pair: &BranchingPair, ctx: &QSeriesCtx<F>) -> F {
    let mut acc = F::one();
    for i in 1..=pair.n {
        let (li, li1) = (pair.lam_at(i), pair.lam_at(i + 1));
        let hi = pair.nu_at(i - 1).min(li);
        let hi_next = pair.nu_at(i).min(li1);
        acc = acc * ctx.binomial_or_zero(li - li1, li - hi);
        if i < pair.n {
            acc = acc * ctx.binomial_or_zero(hi - hi_next, hi - pair.nu_at(i));
        }
    }
    acc
}

/// `c(λ, ν; q)` as the product of q-binomials read off the bottom coefficient of the kernel.
pub fn c_factor_max_form<F: Scalar>(pair: &BranchingPair, ctx: &QSeriesCtx<F>) -> F {
    let mut acc = F::one();
    for i in 1..=pair.n {
        let (li, li1) = (pair.lam_at(i), pair.lam_at(i + 1));
        let lo = pair.nu_at(i).max(li1);
        acc = acc * ctx.binomial_or_zero(li - li1, li - lo);
        if i > 1 {
            let lo_prev = pair.nu_at(i - 1).max(li);
            acc = acc * ctx.binomial_or_zero(lo_prev - lo, lo_prev - pair.nu_at(i - 1));
        }
    }
    acc
}

/// Contribution `A(ν*; I+, I-, t0)` of one sign assignment.
pub fn contribution_a<F: Scalar>(
    pair: &BranchingPair,
    assignment: &SignAssignment,
    t0: &F,
    ctx: &QSeriesCtx<F>,
) -> Result<F> {
    if t0.is_zero() {
        return Err(Error::Domain("t0 must be nonzero".into()));
    }
    let free = &pair.free;
    let eps = assignment.signs();
    if eps.len() != free.len() {
        return Err(Error::Domain(format!(
            "assignment has {} signs but |J^c| = {}",
            eps.len(),
            free.len()
        )));
    }
    let star = |j: usize| pair.nu_star[j - 1];
    let mut acc = F::one();
    let mut t0_exp = 0i64;
    let mut q_exp = 0i64;
    for (a, &j) in free.iter().enumerate() {
        t0_exp -= eps[a] as i64;
        for (b, &k) in free.iter().enumerate() {
            let diff = k as i64 - j as i64;
            // ordered pairs, no j < k restriction
            if star(j) == star(k) && eps[a] > eps[b] {
                if diff == -1 {
                    return Ok(F::zero());
                }
                acc = acc * ratio_factor(ctx, diff);
            }
            if eps[a] == -1 && eps[b] == 1 && star(j) == star(k) + 1 {
                acc = acc * ratio_factor(ctx, diff);
            }
            if j < k {
                if eps[a] != eps[b] && eps[b] == 0 {
                    q_exp -= eps[a] as i64;
                }
                if star(j) == star(k) && eps[b] - eps[a] == 1 {
                    q_exp -= 1;
                }
            }
        }
    }
    Ok(acc * t0.powi(t0_exp) * ctx.power(q_exp))
}

fn check_free_size(pair: &BranchingPair) -> Result<()> {
    if pair.free.len() > MAX_FREE_COLUMNS {
        return Err(Error::Domain(format!(
            "|J^c| = {} exceeds the supported maximum {MAX_FREE_COLUMNS}",
            pair.free.len()
        )));
    }
    Ok(())
}

/// `B^r` for `r = 0..=d`.
pub fn b_coefficients<F: Scalar>(pair: &BranchingPair, t0: &F, ctx: &QSeriesCtx<F>) -> Result<Vec<F>> {
    check_free_size(pair)?;
    if t0.is_zero() {
        return Err(Error::Domain("t0 must be nonzero".into()));
    }
    let d = pair.d;
    let len = pair.free.len();
    let total = 3usize.pow(len as u32);
    let sums = (0..total)
        .into_par_iter()
        .fold(
            || vec![F::zero(); d + 1],
            |mut acc, idx| {
                let s = SignAssignment::nth(len, idx);
                let a = contribution_a(pair, &s, t0, ctx).expect("t0 checked");
                let r = d - s.support();
                acc[r] = acc[r].clone() + a;
                acc
            },
        )
        .reduce(
            || vec![F::zero(); d + 1],
            |a, b| a.into_iter().zip(b).map(|(x, y)| x + y).collect(),
        );
    let c = c_factor(pair, ctx);
    Ok(sums.into_iter().map(|s| c.clone() * s).collect())
}

/// `P_{λ\ν}(x; q, t0)` as an exact Laurent polynomial in `x`.
pub fn branching_polynomial(pair: &BranchingPair, t0: &Rational, ctx: &QSeriesCtx<Rational>) -> Result<LaurentPoly> {
    let b = b_coefficients(pair, t0, ctx)?;
    let mut out = LaurentPoly::zero(1);
    for (r, br) in b.iter().enumerate() {
        if !br.is_zero() {
            out.add_assign_scaled(&expanding_poly(ctx, r, t0)?, br);
        }
    }
    Ok(out)
}

/// The kernel `Q^{(n-1,n)}(ν, λ)` for the pair.
pub fn kernel(pair: &BranchingPair, ctx: &QSeriesCtx<Rational>) -> LaurentPoly {
    let lam = pair.lambda_parts();
    let nmax = lam.first().copied().unwrap_or(0).max(1) as usize;
    recursion_kernel(&ctx.binomial_table(nmax), &pair.nu_parts(), &lam)
}

/// Whether the coefficients of `x^j` and `x^{-j}` agree for every `j`.
pub fn is_palindromic(p: &LaurentPoly) -> bool {
    p.terms().all(|(e, c)| &p.coeff(&[-e[0]]) == c)
}

/// The unique index `s` with a positive gap when every other gap vanishes.
pub fn single_gap_index(pair: &BranchingPair) -> Option<usize> {
    let gaps = pair.gaps();
    let mut positive = gaps.iter().enumerate().filter(|(_, &g)| g != 0);
    let (s, &g) = positive.next()?;
    if positive.next().is_some() || g <= 0 {
        return None;
    }
    Some(s + 1)
}

/// Indices `s_1 < … < s_d` when all gaps are `0` or `1`, the unit gaps are
/// pairwise non-adjacent and at least one exists.
pub fn separated_unit_gaps(pair: &BranchingPair) -> Option<Vec<usize>> {
    let gaps = pair.gaps();
    if gaps.iter().any(|&g| g != 0 && g != 1) {
        return None;
    }
    let idx: Vec<usize> = (1..=pair.n).filter(|&i| gaps[i - 1] == 1).collect();
    if idx.is_empty() || idx.windows(2).any(|w| w[1] <= w[0] + 1) {
        return None;
    }
    Some(idx)
}

/// Richardson extrapolation to `t0 → 0` of values sampled on a geometric ladder
/// `t0_k = t0_0 ρ^k`, assuming an expansion in integer powers of `t0`.
pub fn richardson_limit(values: &[LaurentPoly], ratio: &Rational) -> Option<LaurentPoly> {
    let mut table: Vec<LaurentPoly> = values.to_vec();
    let mut factor = ratio.clone();
    while table.len() > 1 {
        let denom = Rational::one() - &factor;
        table = table
            .windows(2)
            .map(|w| {
                let mut next = w[1].clone();
                next.add_assign_scaled(&w[0], &-factor.clone());
                next.scale(&(Rational::one() / &denom))
            })
            .collect();
        factor = &factor * ratio;
    }
    table.pop()
}

/// The default ladder `t0 ∈ {10^-3, 10^-4, 10^-5}`.
pub fn default_t0_ladder() -> Vec<Rational> {
    vec![rat(1, 1_000), rat(1, 10_000), rat(1, 100_000)]
}

/// Distances between `P(·; t0)` and the kernel along a `t0` ladder.
#[derive(Clone, Debug, Serialize)]
pub struct LadderReport {
    pub t0: Vec<f64>,
    pub distances: Vec<f64>,
    /// Successive error ratios `e_{k+1} / e_k`.
    pub ratios: Vec<f64>,
    /// Distance from the Richardson extrapolant to the kernel, when the ladder is geometric.
    pub extrapolated_distance: Option<f64>,
}

/// Result of the Prop.-2 style check.
#[derive(Clone, Debug, Serialize)]
pub struct SeparatedGapsReport {
    pub indices: Vec<usize>,
    pub t0: Vec<String>,
    pub t0_independent: bool,
    pub equals_kernel: bool,
}

/// Summary of the checks run by [`conjecture_checks`].
#[derive(Clone, Debug, Serialize)]
pub struct BranchingReport {
    pub lambda: Partition,
    pub nu: Partition,
    pub n: usize,
    pub d: usize,
    pub free_columns: Vec<usize>,
    pub c: String,
    pub kernel: String,
    pub leading_coefficients_match: bool,
    pub palindromic: bool,
    /// `P(·; 1/2)` equals the kernel exactly.
    pub matches_kernel_at_half: bool,
    /// Unique gap index when the single-gap hypotheses hold.
    pub single_gap: Option<usize>,
    /// Kernel equals `c · H_d(x;q)` (only computed under the single-gap hypotheses).
    pub kernel_is_hermite: Option<bool>,
    /// Convergence data toward the kernel; proven only under the single-gap hypotheses.
    pub ladder: Option<LadderReport>,
    pub separated_gaps: Option<SeparatedGapsReport>,
}

impl BranchingReport {
    /// Every check that is backed by a proof passed.
    pub fn passed(&self) -> bool {
        self.leading_coefficients_match
            && self.palindromic
            && self.kernel_is_hermite.unwrap_or(true)
            && self
                .separated_gaps
                .as_ref()
                .map_or(true, |s| s.t0_independent && s.equals_kernel)
    }
}

/// Top and bottom coefficients of the kernel compared with `c(λ, ν; q)`.
pub fn leading_coefficients_match(pair: &BranchingPair, ctx: &QSeriesCtx<Rational>) -> bool {
    let q = kernel(pair, ctx);
    let c = c_factor(pair, ctx);
    let d = pair.d as i64;
    let top = q.terms().map(|(e, _)| e[0]).max();
    top == Some(d) && q.coeff(&[d]) == c && q.coeff(&[-d]) == c
}

/// Distances `|P(·; t0) − Q|` along `ladder`.
pub fn ladder_distances(
    pair: &BranchingPair,
    ctx: &QSeriesCtx<Rational>,
    ladder: &[Rational],
) -> Result<LadderReport> {
    let q = kernel(pair, ctx);
    let polys: Vec<LaurentPoly> =
        ladder.iter().map(|t0| branching_polynomial(pair, t0, ctx)).collect::<Result<_>>()?;
    let distances: Vec<f64> = polys.iter().map(|p| p.max_coeff_distance(&q)).collect();
    let ratios = distances.windows(2).map(|w| w[1] / w[0]).collect();
    let geometric = ladder.len() >= 2 && {
        let rho = &ladder[1] / &ladder[0];
        ladder.windows(2).all(|w| &w[1] / &w[0] == rho)
    };
    let extrapolated_distance = if geometric {
        richardson_limit(&polys, &(&ladder[1] / &ladder[0])).map(|p| p.max_coeff_distance(&q))
    } else {
        None
    };
    Ok(LadderReport { t0: ladder.iter().map(to_f64).collect(), distances, ratios, extrapolated_distance })
}

/// `P(·; t0)` agrees at every `t0` in `values` and equals the kernel.
pub fn t0_independence_check(
    pair: &BranchingPair,
    ctx: &QSeriesCtx<Rational>,
    values: &[Rational],
) -> Result<(bool, bool)> {
    let q = kernel(pair, ctx);
    let polys: Vec<LaurentPoly> =
        values.iter().map(|t0| branching_polynomial(pair, t0, ctx)).collect::<Result<_>>()?;
    let independent = polys.windows(2).all(|w| w[0] == w[1]);
    let equal = polys.iter().all(|p| *p == q);
    Ok((independent, equal))
}

/// Runs every applicable check for `pair`.
///
/// The ladder is always evaluated; only the single-gap case is a proven statement.
pub fn conjecture_checks(
    pair: &BranchingPair,
    ctx: &QSeriesCtx<Rational>,
    ladder: &[Rational],
) -> Result<BranchingReport> {
    let q = kernel(pair, ctx);
    let c = c_factor(pair, ctx);
    let single_gap = single_gap_index(pair);
    let kernel_is_hermite = single_gap.map(|_| q == q_hermite(ctx, pair.d).scale(&c));
    let ladder_report = if ladder.is_empty() { None } else { Some(ladder_distances(pair, ctx, ladder)?) };
    let separated_gaps = match separated_unit_gaps(pair) {
        Some(indices) => {
            let values = vec![rat(3, 10), rat(1, 2), rat(7, 10), rat(13, 10)];
            let (t0_independent, equals_kernel) = t0_independence_check(pair, ctx, &values)?;
            Some(SeparatedGapsReport {
                indices,
                t0: values.iter().map(|v| v.to_string()).collect(),
                t0_independent,
                equals_kernel,
            })
        }
        None => None,
    };
    let sample = branching_polynomial(pair, &rat(1, 2), ctx)?;
    Ok(BranchingReport {
        lambda: pair.lambda.clone(),
        nu: pair.nu.clone(),
        n: pair.n,
        d: pair.d,
        free_columns: pair.free.clone(),
        c: c.to_string(),
        kernel: q.to_string(),
        leading_coefficients_match: leading_coefficients_match(pair, ctx),
        palindromic: is_palindromic(&sample) && is_palindromic(&q),
        matches_kernel_at_half: sample == q,
        single_gap,
        kernel_is_hermite,
        ladder: ladder_report,
        separated_gaps,
    })
}

/// Draws `λ ∈ Λ_n` with `|λ| ≤ max_weight`, then `μ ⪯ λ` and `ν ⪯ μ` uniformly
/// inside the interlacing boxes.
pub fn random_two_strip_pair<R: Rng + ?Sized>(rng: &mut R, n: usize, max_weight: i64) -> BranchingPair {
    let w = rng.gen_range(0..=max_weight);
    let shapes = partitions_of(w, n);
    let lambda = shapes[rng.gen_range(0..shapes.len())].padded(n);
    let at = |v: &[i64], i: usize| v.get(i).copied().unwrap_or(0);
    let mu: Vec<i64> = (0..n).map(|i| rng.gen_range(at(&lambda, i + 1)..=lambda[i])).collect();
    let nu: Vec<i64> = (0..n - 1).map(|i| rng.gen_range(at(&mu, i + 1)..=mu[i])).collect();
    BranchingPair::new(
        Partition::new(lambda).expect("valid"),
        Partition::new(nu).expect("valid"),
        n,
    )
    .expect("interlacing twice gives two horizontal strips")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q_binomial;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair(l: &str, v: &str, n: usize) -> BranchingPair {
        BranchingPair::new(Partition::parse(l).unwrap(), Partition::parse(v).unwrap(), n).unwrap()
    }

    fn ctx() -> QSeriesCtx<Rational> {
        QSeriesCtx::exact(rat(2, 5)).unwrap()
    }

    #[test]
    fn derived_data() {
        let p = pair("4,3,1", "4", 3);
        assert_eq!(p.m(), 4);
        assert_eq!(p.d(), 2);
        assert_eq!(p.nu_star(), &[2, 2, 2, 2]);
        assert_eq!(p.lambda_star(), &[3, 2, 2, 1]);
        assert_eq!(p.free_columns(), &[2, 3]);
        assert!(BranchingPair::new(Partition::parse("3").unwrap(), Partition::empty(), 1).is_ok());
        assert!(BranchingPair::new(Partition::parse("3,3,3").unwrap(), Partition::empty(), 3).is_err());
        assert!(BranchingPair::new(Partition::parse("2").unwrap(), Partition::parse("3").unwrap(), 2).is_err());
    }

    #[test]
    fn c_forms_agree() {
        let ctx = QSeriesCtx::exact(rat(1, 3)).unwrap();
        for (l, v, n) in [("4,3,1", "4", 3), ("4,4,3,1,1", "3,3,2,1", 5), ("3,3,1", "2,1", 3), ("2", "", 1)] {
            let p = pair(l, v, n);
            let c = c_factor(&p, &ctx);
            assert_eq!(c, c_factor_min_form(&p, &ctx), "{l} / {v}");
            assert_eq!(c, c_factor_max_form(&p, &ctx), "{l} / {v}");
        }
    }

    #[test]
    fn empty_assignment_contributes_one() {
        let p = pair("4,3,1", "4", 3);
        let s = SignAssignment::from_signs(vec![0, 0]);
        assert_eq!(contribution_a(&p, &s, &rat(1, 7), &ctx()).unwrap(), Rational::one());
        assert!(contribution_a(&p, &s, &Rational::zero(), &ctx()).is_err());
    }

    #[test]
    fn out_of_order_assignment_vanishes() {
        let p = pair("4,3,1", "4", 3);
        let s = SignAssignment::new(&p, &[3], &[2]).unwrap();
        assert!(contribution_a(&p, &s, &rat(1, 7), &ctx()).unwrap().is_zero());
    }

    #[test]
    fn single_block_closed_form() {
        let ctx = ctx();
        let p = pair("4,3,1", "4", 3);
        let t0 = rat(3, 7);
        let d = p.d() as i64;
        for l in 0..=d {
            for r in 0..=d - l {
                let mut sum = Rational::zero();
                for idx in 0..9 {
                    let s = SignAssignment::nth(2, idx);
                    let plus = s.signs().iter().filter(|&&e| e == 1).count() as i64;
                    if plus == l && s.support() as i64 == d - r {
                        sum += contribution_a(&p, &s, &t0, &ctx).unwrap();
                    }
                }
                let expected = q_binomial(&ctx, d, l).unwrap()
                    * q_binomial(&ctx, d - l, r).unwrap()
                    * t0.powi(d - 2 * l - r)
                    * ctx.power(-r * l);
                assert_eq!(sum, expected, "l={l} r={r}");
            }
        }
    }

    #[test]
    fn single_gap_pair_matches_kernel_at_every_t0() {
        let ctx = ctx();
        let p = pair("4,3,1", "4", 3);
        assert_eq!(single_gap_index(&p), Some(2));
        assert_eq!(p.gap(2), 2);
        let q = kernel(&p, &ctx);
        assert_eq!(q, q_hermite(&ctx, 2).scale(&c_factor(&p, &ctx)));
        for t0 in [rat(1, 1000), rat(1, 3), rat(5, 2)] {
            assert_eq!(branching_polynomial(&p, &t0, &ctx).unwrap(), q);
        }
    }

    #[test]
    fn richardson_removes_linear_term() {
        let base = LaurentPoly::var(1, 0);
        let slope = LaurentPoly::constant(1, rat(3, 1));
        let ladder = default_t0_ladder();
        let values: Vec<LaurentPoly> = ladder.iter().map(|t| &base + &slope.scale(t)).collect();
        let lim = richardson_limit(&values, &rat(1, 10)).unwrap();
        assert_eq!(lim, base);
    }

    #[test]
    fn separated_gaps_pair_is_exact() {
        let ctx = ctx();
        let p = pair("4,4,3,1,1", "3,3,2,1", 5);
        assert!(separated_unit_gaps(&p).is_some());
        let vals = [rat(3, 10), rat(7, 10), rat(13, 10)];
        assert_eq!(t0_independence_check(&p, &ctx, &vals).unwrap(), (true, true));
    }

    #[test]
    fn trivial_d_gives_constant() {
        let ctx = ctx();
        let p = pair("2,2", "", 2);
        assert_eq!(p.d(), 0);
        let poly = branching_polynomial(&p, &rat(1, 3), &ctx).unwrap();
        assert_eq!(poly, LaurentPoly::constant(1, c_factor(&p, &ctx)));
    }

    #[test]
    fn random_pairs_leading_terms_and_symmetry() {
        let ctx = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.gen_range(1..=4);
            let p = random_two_strip_pair(&mut rng, n, 7);
            assert!(leading_coefficients_match(&p, &ctx), "{p:?}");
            assert!(is_palindromic(&branching_polynomial(&p, &rat(2, 3), &ctx).unwrap()));
        }
    }

    #[test]
    fn random_pairs_match_kernel_exactly() {
        let ctx = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let n = rng.gen_range(1..=4);
            let p = random_two_strip_pair(&mut rng, n, 7);
            let (independent, equal) = t0_independence_check(&p, &ctx, &[rat(1, 5), rat(9, 4)]).unwrap();
            assert!(independent && equal, "{p:?}");
        }
    }
}
