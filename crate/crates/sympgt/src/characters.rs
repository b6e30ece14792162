//! Invariant Laurent polynomials: hyperoctahedral monomials, symplectic Schur
//! functions, type-A Schur functions and the q-Whittaker family.

use std::collections::{BTreeSet, HashMap};
use std::sync::RwLock;

use num_traits::{One, Zero};

use crate::algebra::{q_hermite, BinomialTable, LaurentPoly, QSeriesCtx, Rational, Scalar};
use crate::combinatorics::{
    enumerate_patterns, enumerate_patterns_a, enumerate_tableaux, level_len, GTPattern,
    Partition, INF,
};
use crate::error::{Error, Result};

/// `m_λ`: sum over the deduplicated orbit of `λ` under signed permutations.
pub fn monomial_symmetric(n: usize, lam: &Partition) -> LaurentPoly {
    let base = lam.padded(n);
    let mut orbit: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut perm = base.clone();
    perm.sort();
    loop {
        for signs in 0u32..(1 << n) {
            let v: Vec<i64> =
                perm.iter().enumerate().map(|(i, &x)| if signs >> i & 1 == 1 { -x } else { x }).collect();
            orbit.insert(v);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let mut p = LaurentPoly::zero(n);
    for e in orbit {
        p.add_term(e, Rational::one());
    }
    p
}

fn next_permutation(v: &mut [i64]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Determinant by Gaussian elimination (exact over rationals).
pub fn determinant<F: Scalar>(mut m: Vec<Vec<F>>) -> F {
    let n = m.len();
    let mut det = F::one();
    for c in 0..n {
        let pivot = if F::is_exact() {
            (c..n).find(|&r| !m[r][c].is_zero())
        } else {
            (c..n).max_by(|&a, &b| m[a][c].magnitude().total_cmp(&m[b][c].magnitude()))
        };
        let Some(p) = pivot.filter(|&p| !m[p][c].is_zero()) else {
            return F::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let piv = m[c][c].clone();
        det = det * piv.clone();
        for r in c + 1..n {
            let f = m[r][c].clone() / piv.clone();
            if f.is_zero() {
                continue;
            }
            for k in c..n {
                let v = m[c][k].clone() * f.clone();
                m[r][k] = m[r][k].clone() - v;
            }
        }
    }
    det
}

/// `Sp_λ(a)` by the Weyl character formula, evaluated at a point.
pub fn symplectic_schur_weyl<F: Scalar>(n: usize, lam: &Partition, a: &[F]) -> Result<F> {
    if a.len() != n {
        return Err(Error::Domain(format!("expected {n} coordinates")));
    }
    let lam = lam.padded(n);
    let matrix = |shift: &dyn Fn(usize) -> i64| -> Vec<Vec<F>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let e = shift(j) + (n - j) as i64;
                        a[i].powi(e) - a[i].powi(-e)
                    })
                    .collect()
            })
            .collect()
    };
    let den = determinant(matrix(&|_| 0));
    let tiny = if F::is_exact() { 0.0 } else { 1e-300 };
    if den.magnitude() <= tiny {
        return Err(Error::Pole("Weyl denominator vanishes at this point".into()));
    }
    Ok(determinant(matrix(&|j| lam[j])) / den)
}

/// `Sp_λ` as a sum of tableau weights.
pub fn symplectic_schur_tableaux(n: usize, lam: &Partition) -> LaurentPoly {
    let mut p = LaurentPoly::zero(n);
    for t in enumerate_tableaux(lam, n as u32) {
        p.add_term(t.weight(n), Rational::one());
    }
    p
}

/// `Sp_λ` as a sum of pattern weights over `2n`-level patterns.
pub fn symplectic_schur_patterns(n: usize, lam: &Partition) -> LaurentPoly {
    let mut p = LaurentPoly::zero(n);
    for z in enumerate_patterns(lam, 2 * n) {
        p.add_term(pattern_exponents(&z, n), Rational::one());
    }
    p
}

/// Exponent of `a_l` is `Σ ±(|z^k| - |z^{k-1}|)`, plus for odd `k`, minus for even `k`.
fn pattern_exponents(z: &GTPattern, n: usize) -> Vec<i64> {
    let mut e = vec![0; n];
    for k in 1..=z.n_levels() {
        let d = z.level_weight(k) - z.level_weight(k - 1);
        let l = level_len(k) - 1;
        e[l] += if k % 2 == 1 { d } else { -d };
    }
    e
}

/// Coefficient of the slice weight between levels `k-1` and `k`, without the `a` power.
fn slice_coefficient(table: &BinomialTable<Rational>, lower: &[i64], upper: &[i64], k: usize) -> Rational {
    let l = level_len(k);
    let at = |v: &[i64], i: usize| v.get(i).copied().unwrap_or(0);
    let mut c = Rational::one();
    for i in 0..l.saturating_sub(1) {
        c *= table.get_or_zero(at(upper, i) - at(upper, i + 1), at(upper, i) - at(lower, i));
    }
    if k % 2 == 0 {
        c *= table.get_or_zero(at(upper, l - 1), at(upper, l - 1) - at(lower, l - 1));
    }
    c
}

/// Weight `w^{(N)}(z)` of a pattern as a monomial in `a_1..a_n`.
pub fn pattern_weight(table: &BinomialTable<Rational>, z: &GTPattern, n: usize) -> LaurentPoly {
    let mut c = Rational::one();
    for k in 1..=z.n_levels() {
        c *= slice_coefficient(table, z.level(k - 1), z.level(k), k);
    }
    LaurentPoly::monomial(pattern_exponents(z, n), c)
}

/// Ch.4 form of the weight: product of three-level factors `Λ_{k-1,k}(z^{2k-2}, z^{2k-1}, z^{2k})`.
pub fn pattern_weight_three_level(table: &BinomialTable<Rational>, z: &GTPattern, n: usize) -> LaurentPoly {
    assert_eq!(z.n_levels(), 2 * n, "three-level weight needs an even pattern");
    let mut c = Rational::one();
    let mut e = vec![0; n];
    for k in 1..=n {
        let (x, y, w) = (z.level(2 * k - 2), z.level(2 * k - 1), z.level(2 * k));
        let at = |v: &[i64], i: usize| v.get(i).copied().unwrap_or(0);
        e[k - 1] = 2 * z.level_weight(2 * k - 1) - z.level_weight(2 * k - 2) - z.level_weight(2 * k);
        for i in 0..k - 1 {
            c *= table.get_or_zero(at(y, i) - at(y, i + 1), at(y, i) - at(x, i));
            c *= table.get_or_zero(at(w, i) - at(w, i + 1), at(w, i) - at(y, i));
        }
        c *= table.get_or_zero(at(w, k - 1), at(w, k - 1) - at(y, k - 1));
    }
    LaurentPoly::monomial(e, c)
}

/// `𝒫̂^{(N)}_z`: sum of slice weights over all `N`-level patterns with top row `z`.
pub fn qwhittaker_pattern_sum(n_levels: usize, z: &Partition, ctx: &QSeriesCtx<Rational>) -> LaurentPoly {
    let n = level_len(n_levels);
    let table = ctx.binomial_table(z.get(0) as usize);
    let mut p = LaurentPoly::zero(n);
    for pat in enumerate_patterns(z, n_levels) {
        p.add_assign_scaled(&pattern_weight(&table, &pat, n), &Rational::one());
    }
    p
}

/// The kernel `Q^{(n-1,n)}_{x,q}(ν, λ)` as a Laurent polynomial in `x`.
///
/// `ν` is read with `n-1` parts and `λ` with `n` parts; the result is zero
/// when no `μ` with `ν ⪯ μ ⪯ λ` exists.
pub fn recursion_kernel(table: &BinomialTable<Rational>, nu: &[i64], lam: &[i64]) -> LaurentPoly {
    let n = lam.len();
    let nu_at = |i: usize| if i == 0 { INF } else { nu.get(i - 1).copied().unwrap_or(0) };
    let lam_at = |i: usize| lam.get(i - 1).copied().unwrap_or(0);
    let mut out = LaurentPoly::zero(1);
    if nu.len() + 1 != n {
        return out;
    }
    let ranges: Vec<(i64, i64)> =
        (1..=n).map(|i| (nu_at(i).max(lam_at(i + 1)), nu_at(i - 1).min(lam_at(i)))).collect();
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return out;
    }
    let weight_nu: i64 = nu.iter().sum();
    let weight_lam: i64 = lam.iter().sum();
    let mut mu: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        let mu_at = |i: usize| mu.get(i - 1).copied().unwrap_or(0);
        let mut c = Rational::one();
        for i in 1..n {
            c *= table.get_or_zero(lam_at(i) - lam_at(i + 1), lam_at(i) - mu_at(i));
            c *= table.get_or_zero(mu_at(i) - mu_at(i + 1), mu_at(i) - nu_at(i));
        }
        c *= table.get_or_zero(lam_at(n), lam_at(n) - mu_at(n));
        let e = 2 * mu.iter().sum::<i64>() - weight_nu - weight_lam;
        out.add_term(vec![e], c);
        // odometer over the μ box
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if mu[i] < ranges[i].1 {
                mu[i] += 1;
                for (j, r) in ranges.iter().enumerate().skip(i + 1) {
                    mu[j] = r.0;
                }
                break;
            }
        }
    }
}

/// Places a polynomial in `k` variables into `nvars` variables starting at `offset`.
pub fn embed(p: &LaurentPoly, nvars: usize, offset: usize) -> LaurentPoly {
    let mut out = LaurentPoly::zero(nvars);
    for (e, c) in p.terms() {
        let mut ne = vec![0; nvars];
        ne[offset..offset + e.len()].copy_from_slice(e);
        out.add_term(ne, c.clone());
    }
    out
}

/// Memoised evaluation of the q-Whittaker recursion at a fixed rational `q`.
///
/// Readers share the memo; insertions take the write lock.
pub struct WhittakerCache {
    ctx: QSeriesCtx<Rational>,
    table: RwLock<BinomialTable<Rational>>,
    memo: RwLock<HashMap<(usize, Partition), LaurentPoly>>,
}

impl WhittakerCache {
    pub fn new(ctx: QSeriesCtx<Rational>) -> Self {
        let table = ctx.binomial_table(8);
        Self { ctx, table: RwLock::new(table), memo: RwLock::new(HashMap::new()) }
    }

    pub fn ctx(&self) -> &QSeriesCtx<Rational> {
        &self.ctx
    }

    fn ensure_table(&self, nmax: usize) {
        if self.table.read().expect("lock").nmax() < nmax {
            let mut t = self.table.write().expect("lock");
            if t.nmax() < nmax {
                *t = self.ctx.binomial_table(nmax.max(2 * t.nmax()));
            }
        }
    }

    /// `𝒫^{(n)}_λ` in `n` variables.
    pub fn get(&self, n: usize, lam: &Partition) -> LaurentPoly {
        assert!(lam.len() <= n, "partition {lam} has more than {n} parts");
        if let Some(p) = self.memo.read().expect("lock").get(&(n, lam.clone())) {
            return p.clone();
        }
        let p = self.compute(n, lam);
        self.memo.write().expect("lock").insert((n, lam.clone()), p.clone());
        p
    }

    fn compute(&self, n: usize, lam: &Partition) -> LaurentPoly {
        if n == 0 {
            return LaurentPoly::one(0);
        }
        if n == 1 {
            return q_hermite(&self.ctx, lam.get(0) as usize);
        }
        self.ensure_table(lam.get(0) as usize);
        let lp = lam.padded(n);
        let mut out = LaurentPoly::zero(n);
        // ν_i ranges over [λ_{i+2}, λ_i]
        let ranges: Vec<(i64, i64)> = (0..n - 1).map(|i| (lp.get(i + 2).copied().unwrap_or(0), lp[i])).collect();
        let mut nu: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            if nu.windows(2).all(|w| w[0] >= w[1]) {
                let kernel = {
                    let t = self.table.read().expect("lock");
                    recursion_kernel(&t, &nu, &lp)
                };
                if !kernel.is_zero() {
                    let lower = self.get(n - 1, &Partition::new(nu.clone()).expect("decreasing"));
                    let term = &embed(&lower, n, 0) * &embed(&kernel, n, n - 1);
                    out.add_assign_scaled(&term, &Rational::one());
                }
            }
            let mut i = n - 1;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if nu[i] < ranges[i].1 {
                    nu[i] += 1;
                    for (j, r) in ranges.iter().enumerate().skip(i + 1) {
                        nu[j] = r.0;
                    }
                    break;
                }
            }
        }
    }
}

/// `𝒫^{(n)}_λ` via the recursion, with a fresh memo.
pub fn qwhittaker_recursion(n: usize, lam: &Partition, ctx: &QSeriesCtx<Rational>) -> LaurentPoly {
    WhittakerCache::new(ctx.clone()).get(n, lam)
}

/// Coefficients `f_n(λ, λ ± e_i)` of the Pieri operator.
#[derive(Clone, Debug, PartialEq)]
pub struct PieriOperatorResult<F> {
    pub plus: Vec<F>,
    pub minus: Vec<F>,
}

/// `f_n(λ, λ+e_i) = 1 - q^{λ_{i-1}-λ_i}` and `f_n(λ, λ-e_i) = 1 - q^{λ_i-λ_{i+1}}`,
/// with `λ_0 = ∞` and `λ_{n+1} = 0`.
pub fn pieri_coefficients<F: Scalar>(n: usize, lam: &[i64], ctx: &QSeriesCtx<F>) -> PieriOperatorResult<F> {
    let at = |i: usize| if i == 0 { INF } else { lam.get(i - 1).copied().unwrap_or(0) };
    let plus = (1..=n)
        .map(|i| if i == 1 { F::one() } else { F::one() - ctx.power(at(i - 1) - at(i)) })
        .collect();
    let minus = (1..=n).map(|i| F::one() - ctx.power(at(i) - at(i + 1))).collect();
    PieriOperatorResult { plus, minus }
}

/// `(H^n g)(λ) = Σ_i f(λ,λ+e_i) g(λ+e_i) + Σ_i f(λ,λ-e_i) g(λ-e_i)`; vanishing terms are skipped.
pub fn pieri_apply<F: Scalar>(n: usize, lam: &[i64], ctx: &QSeriesCtx<F>, g: impl Fn(&[i64]) -> F) -> F {
    let f = pieri_coefficients(n, lam, ctx);
    let mut acc = F::zero();
    let mut v = lam.to_vec();
    v.resize(n, 0);
    for i in 0..n {
        if !f.plus[i].is_zero() {
            v[i] += 1;
            acc = acc + f.plus[i].clone() * g(&v);
            v[i] -= 1;
        }
        if !f.minus[i].is_zero() {
            v[i] -= 1;
            acc = acc + f.minus[i].clone() * g(&v);
            v[i] += 1;
        }
    }
    acc
}

/// Type-A Schur function `S^{(N)}_z` as a sum over Gelfand-Tsetlin patterns.
pub fn schur_type_a(n_vars: usize, z: &Partition) -> LaurentPoly {
    let mut p = LaurentPoly::zero(n_vars);
    for pat in enumerate_patterns_a(z, n_vars) {
        let levels = pat.levels();
        let mut prev = 0;
        let e: Vec<i64> = levels
            .iter()
            .map(|lv| {
                let s: i64 = lv.iter().sum();
                let d = s - prev;
                prev = s;
                d
            })
            .collect();
        p.add_term(e, Rational::one());
    }
    p
}

/// `|∏_{i<j}(1-b_i b_j) ∏_{i,j}(1-b_i a_j)^{-1}(1-b_i/a_j)^{-1} - Σ_{|μ|≤M} Sp_μ(a) S_μ(b)|`.
pub fn cauchy_identity_check(n: usize, truncation: i64, a: &[f64], b: &[f64]) -> f64 {
    let mut lhs = 1.0;
    for i in 0..n {
        for j in i + 1..n {
            lhs *= 1.0 - b[i] * b[j];
        }
        for j in 0..n {
            lhs /= (1.0 - b[i] * a[j]) * (1.0 - b[i] / a[j]);
        }
    }
    let mut rhs = 0.0;
    for mu in crate::combinatorics::partitions_up_to(truncation, n) {
        rhs += symplectic_schur_tableaux(n, &mu).eval(a) * schur_type_a(n, &mu).eval(b);
    }
    (lhs - rhs).abs()
}

/// True if the polynomial is unchanged by every permutation and inversion of variables.
pub fn is_hyperoctahedral_invariant(p: &LaurentPoly) -> bool {
    let n = p.nvars();
    if n == 0 {
        return true;
    }
    if p.invert_var(0) != *p {
        return false;
    }
    (0..n.saturating_sub(1)).all(|i| {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(i, i + 1);
        p.permute(&perm) == *p
    })
}

/// Dominant representative of an exponent vector: absolute values sorted decreasingly.
pub fn dominant_representative(e: &[i64]) -> Partition {
    let mut v: Vec<i64> = e.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| b.cmp(a));
    Partition::new(v).expect("sorted nonnegative")
}

/// Checks `p = m_λ + Σ_{μ<λ} c_μ m_μ`: unit coefficient on `a^λ` and every
/// other orbit strictly dominated by `λ`.
pub fn is_triangular_with_leading(p: &LaurentPoly, lam: &Partition) -> bool {
    let n = p.nvars();
    if p.coeff(&lam.padded(n)) != Rational::one() {
        return false;
    }
    p.terms().all(|(e, c)| {
        let mu = dominant_representative(e);
        c.is_zero() || mu == *lam || (lam.weight() >= mu.weight() && dominates_padded(lam, &mu))
    })
}

/// Dominance allowing unequal weights of equal parity, as used for hyperoctahedral orbits.
fn dominates_padded(lam: &Partition, mu: &Partition) -> bool {
    let n = lam.len().max(mu.len());
    let (mut s1, mut s2) = (0, 0);
    for i in 0..n {
        s1 += lam.get(i);
        s2 += mu.get(i);
        if s1 < s2 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::combinatorics::partitions_up_to;

    fn p(v: &[i64]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    fn ctx(a: i64, b: i64) -> QSeriesCtx<Rational> {
        QSeriesCtx::exact(rat(a, b)).unwrap()
    }

    #[test]
    fn monomials() {
        assert_eq!(monomial_symmetric(1, &p(&[2])).to_string(), "1 * a1^2 + 1 * a1^-2");
        assert_eq!(monomial_symmetric(2, &p(&[1])).len(), 4);
        assert_eq!(monomial_symmetric(2, &p(&[1, 1])).len(), 4);
        assert_eq!(monomial_symmetric(2, &p(&[2, 1])).len(), 8);
        assert_eq!(monomial_symmetric(3, &p(&[])).len(), 1);
    }

    #[test]
    fn weyl_one_variable_is_geometric() {
        let a = rat(3, 2);
        for l in 0..6 {
            let w = symplectic_schur_weyl(1, &p(&[l]), &[a.clone()]).unwrap();
            let g: Rational = (0..=l).map(|k| a.powi(2 * k - l)).fold(Rational::zero(), |s, t| s + t);
            assert_eq!(w, g);
        }
        assert!(symplectic_schur_weyl(1, &p(&[1]), &[rat(1, 1)]).is_err());
    }

    #[test]
    fn small_symplectic_schur() {
        assert_eq!(symplectic_schur_tableaux(2, &p(&[1])), monomial_symmetric(2, &p(&[1])));
        let s11 = symplectic_schur_tableaux(2, &p(&[1, 1]));
        let expect = &monomial_symmetric(2, &p(&[1, 1])) + &LaurentPoly::one(2);
        assert_eq!(s11, expect);
        let pt = [rat(2, 1), rat(5, 3)];
        assert_eq!(symplectic_schur_weyl(2, &p(&[1, 1]), &pt).unwrap(), s11.eval(&pt));
    }

    #[test]
    fn tableaux_match_patterns() {
        for n in 1..=3 {
            for lam in partitions_up_to(4, n) {
                assert_eq!(symplectic_schur_tableaux(n, &lam), symplectic_schur_patterns(n, &lam));
            }
        }
    }

    #[test]
    fn pattern_sum_small_cases() {
        let c = ctx(1, 3);
        assert_eq!(qwhittaker_pattern_sum(2, &p(&[2]), &c), q_hermite(&c, 2));
        assert_eq!(qwhittaker_pattern_sum(2, &p(&[]), &c), LaurentPoly::one(1));
        let a = [rat(2, 1), rat(3, 1)];
        assert_eq!(
            qwhittaker_pattern_sum(4, &p(&[1]), &c).eval(&a),
            qwhittaker_recursion(2, &p(&[1]), &c).eval(&a)
        );
    }

    #[test]
    fn three_level_weight_agrees() {
        let c = ctx(2, 5);
        let t = c.binomial_table(6);
        for z in enumerate_patterns(&p(&[3, 2, 1]), 6) {
            assert_eq!(pattern_weight(&t, &z, 3), pattern_weight_three_level(&t, &z, 3));
        }
    }

    #[test]
    fn recursion_base_and_invariance() {
        let c = ctx(1, 3);
        assert_eq!(qwhittaker_recursion(1, &p(&[3]), &c), q_hermite(&c, 3));
        for lam in partitions_up_to(4, 2) {
            let w = qwhittaker_recursion(2, &lam, &c);
            assert!(is_hyperoctahedral_invariant(&w), "{lam}");
            assert!(is_triangular_with_leading(&w, &lam), "{lam}: {w}");
        }
    }

    #[test]
    fn q_zero_gives_symplectic_schur() {
        let c = QSeriesCtx::exact(Rational::zero()).unwrap();
        for lam in partitions_up_to(4, 2) {
            assert_eq!(qwhittaker_recursion(2, &lam, &c), symplectic_schur_tableaux(2, &lam));
        }
    }

    #[test]
    fn pieri_one_variable() {
        let c = ctx(1, 2);
        let a = rat(3, 1);
        for k in 0..6i64 {
            let lhs = pieri_apply(1, &[k], &c, |v| q_hermite(&c, v[0] as usize).eval(&[a.clone()]));
            let rhs = (&a + a.inv()) * q_hermite(&c, k as usize).eval(&[a.clone()]);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn pieri_two_variables() {
        let c = ctx(1, 2);
        let a = [rat(2, 1), rat(3, 1)];
        let cache = WhittakerCache::new(c.clone());
        let val = |v: &[i64]| cache.get(2, &Partition::new(v.to_vec()).unwrap()).eval(&a);
        let lhs = pieri_apply(2, &[2, 1], &c, val);
        let e = &a[0] + a[0].inv() + &a[1] + a[1].inv();
        assert_eq!(lhs, e * val(&[2, 1]));
        let f = pieri_coefficients(2, &[2, 2], &c);
        assert!(f.plus[1].is_zero());
    }

    #[test]
    fn type_a_schur_single_row() {
        let s = schur_type_a(1, &p(&[4]));
        assert_eq!(s.to_string(), "1 * a1^4");
    }

    #[test]
    fn cauchy_residual_decays() {
        let r8 = cauchy_identity_check(1, 8, &[0.5], &[1.0 / 3.0]);
        let r12 = cauchy_identity_check(1, 12, &[0.5], &[1.0 / 3.0]);
        assert!(r12 < r8 && r8 < (2.0f64 / 3.0).powi(9) / (1.0 - 2.0 / 3.0) * 2.0);
        assert!(cauchy_identity_check(2, 6, &[0.5, 2.0], &[0.0, 0.0]) < 1e-15);
        let r: Vec<f64> = [6, 8, 10].iter().map(|&m| cauchy_identity_check(2, m, &[0.7, 1.3], &[0.1, 0.2])).collect();
        assert!(r[1] < 0.2 * r[0] && r[2] < 0.2 * r[1] && r[2] < 1e-3, "{r:?}");
    }
}
