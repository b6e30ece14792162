//! Continuous-time dynamics on symplectic Gelfand-Tsetlin patterns.
//!
//! Two models share the pattern state space `𝕂^N_0`:
//!
//! * [`Model::Berele`]: the q-deformed Berele dynamics. Only edge particles
//!   carry clocks, and every jump cascades to the bottom level using the
//!   push/pull probabilities `r_i`, `l_i`. Needs an even number of levels.
//! * [`Model::Randomized`]: every particle jumps with its own rates `ā_k R_j`,
//!   `ā_k^{-1} L_j`, and pushes lower neighbours only to keep interlacing.
//!
//! Levels are stored as `Vec<Vec<i64>>` indexed by the absolute level `k`,
//! with `levels[0]` the empty level. Particle `i` of level `k` is 1-based and
//! reads `∞` at `i = 0` and `0` past the end of the level.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{QSeriesCtx, Rational, Scalar};
use crate::characters::pieri_coefficients;
use crate::combinatorics::{enumerate_patterns, level_len, GTPattern, Letter, Partition, INF};
use crate::error::{Error, Result};

/// Level-indexed particle positions; `levels[0]` is empty.
pub type Levels = Vec<Vec<i64>>;

/// Which pattern dynamics to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Berele,
    Randomized,
}

fn at(v: &[i64], i: usize) -> i64 {
    if i == 0 {
        INF
    } else {
        v.get(i - 1).copied().unwrap_or(0)
    }
}

/// `q^e`, with `q^∞ = 0`.
fn qpow<F: Scalar>(ctx: &QSeriesCtx<F>, e: i64) -> F {
    if e >= INF / 2 {
        F::zero()
    } else {
        ctx.power(e)
    }
}

/// Push probability `r_i(y; x) = q^{y_i - x_i} (1 - q^{x_{i-1} - y_i}) / (1 - q^{x_{i-1} - x_i})`.
///
/// Equals 1 when `x_i = y_i`, which also covers the `0/0` case `x_{i-1} = x_i`.
pub fn push_probability<F: Scalar>(ctx: &QSeriesCtx<F>, y: &[i64], x: &[i64], i: usize) -> F {
    if at(x, i) == at(y, i) {
        return F::one();
    }
    qpow(ctx, at(y, i) - at(x, i)) * (F::one() - qpow(ctx, at(x, i - 1) - at(y, i)))
        / (F::one() - qpow(ctx, at(x, i - 1) - at(x, i)))
}

/// Pull probability `l_i(y; x) = q^{x_i - y_{i+1}} (1 - q^{y_{i+1} - x_{i+1}}) / (1 - q^{x_i - x_{i+1}})`.
///
/// Equals 1 when `x_i = y_{i+1}`.
pub fn pull_probability<F: Scalar>(ctx: &QSeriesCtx<F>, y: &[i64], x: &[i64], i: usize) -> F {
    if at(x, i) == at(y, i + 1) {
        return F::one();
    }
    qpow(ctx, at(x, i) - at(y, i + 1)) * (F::one() - qpow(ctx, at(y, i + 1) - at(x, i + 1)))
        / (F::one() - qpow(ctx, at(x, i) - at(x, i + 1)))
}

/// `R_j(z^k; z^{k-1}) = (1 - q^{z^{k-1}_{j-1} - z^k_j}) (1 - q^{z^k_j - z^k_{j+1} + 1}) / (1 - q^{z^k_j - z^{k-1}_j + 1})`.
pub fn right_factor<F: Scalar>(ctx: &QSeriesCtx<F>, upper: &[i64], lower: &[i64], j: usize) -> F {
    let zj = at(upper, j);
    (F::one() - qpow(ctx, at(lower, j - 1) - zj)) * (F::one() - qpow(ctx, zj - at(upper, j + 1) + 1))
        / (F::one() - qpow(ctx, zj - at(lower, j) + 1))
}

/// `L_j(z^k; z^{k-1}) = (1 - q^{z^k_j - z^{k-1}_j}) (1 - q^{z^k_{j-1} - z^k_j + 1}) / (1 - q^{z^{k-1}_{j-1} - z^k_j + 1})`.
pub fn left_factor<F: Scalar>(ctx: &QSeriesCtx<F>, upper: &[i64], lower: &[i64], j: usize) -> F {
    let zj = at(upper, j);
    (F::one() - qpow(ctx, zj - at(lower, j))) * (F::one() - qpow(ctx, at(upper, j - 1) - zj + 1))
        / (F::one() - qpow(ctx, at(lower, j - 1) - zj + 1))
}

/// One particle displacement inside a transition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Move {
    pub level: usize,
    pub index: usize,
    pub delta: i8,
}

/// A possible outcome of one event, with its rate.
#[derive(Clone, Debug)]
pub struct Transition<F> {
    pub levels: Levels,
    pub rate: F,
    pub moves: Vec<Move>,
}

fn cascade_right<F: Scalar>(
    ctx: &QSeriesCtx<F>,
    mut levels: Levels,
    k: usize,
    i: usize,
    w: F,
    mut moves: Vec<Move>,
    out: &mut Vec<Transition<F>>,
) {
    let bottom = levels.len() - 1;
    if k == bottom {
        levels[k][i - 1] += 1;
        moves.push(Move { level: k, index: i, delta: 1 });
        out.push(Transition { levels, rate: w, moves });
        return;
    }
    let r = push_probability(ctx, &levels[k + 1], &levels[k], i);
    let not_r = F::one() - r.clone();
    if k % 2 == 1 && i == (k + 1) / 2 {
        if !r.is_zero() {
            let mut l = levels.clone();
            l[k][i - 1] += 1;
            let mut m = moves.clone();
            m.push(Move { level: k, index: i, delta: 1 });
            cascade_right(ctx, l, k + 1, i, w.clone() * r, m, out);
        }
        if !not_r.is_zero() {
            // suppressed: the lower neighbour is pulled left instead
            cascade_left(ctx, levels, k + 1, i, w * not_r, moves, out);
        }
    } else {
        levels[k][i - 1] += 1;
        moves.push(Move { level: k, index: i, delta: 1 });
        if !r.is_zero() {
            cascade_right(ctx, levels.clone(), k + 1, i, w.clone() * r, moves.clone(), out);
        }
        if !not_r.is_zero() {
            cascade_right(ctx, levels, k + 1, i + 1, w * not_r, moves, out);
        }
    }
}

fn cascade_left<F: Scalar>(
    ctx: &QSeriesCtx<F>,
    mut levels: Levels,
    k: usize,
    i: usize,
    w: F,
    mut moves: Vec<Move>,
    out: &mut Vec<Transition<F>>,
) {
    let bottom = levels.len() - 1;
    let l = if k < bottom { pull_probability(ctx, &levels[k + 1], &levels[k], i) } else { F::zero() };
    levels[k][i - 1] -= 1;
    moves.push(Move { level: k, index: i, delta: -1 });
    if k == bottom {
        out.push(Transition { levels, rate: w, moves });
        return;
    }
    let not_l = F::one() - l.clone();
    if !l.is_zero() {
        cascade_left(ctx, levels.clone(), k + 1, i + 1, w.clone() * l, moves.clone(), out);
    }
    if !not_l.is_zero() {
        cascade_left(ctx, levels, k + 1, i, w * not_l, moves, out);
    }
}

/// Pushes lower neighbours after `z^k_j` moved by `delta`, keeping interlacing.
fn push_down(levels: &mut Levels, k: usize, j: usize, delta: i8, moves: &mut Vec<Move>) {
    let bottom = levels.len() - 1;
    let (mut m, mut idx) = (k, j);
    while m < bottom {
        let before = levels[m][idx - 1] - delta as i64;
        let next = if delta > 0 { idx } else { idx + 1 };
        if next > levels[m + 1].len() || levels[m + 1][next - 1] != before {
            break;
        }
        levels[m + 1][next - 1] += delta as i64;
        moves.push(Move { level: m + 1, index: next, delta });
        m += 1;
        idx = next;
    }
}

/// Rate parameters: `a`, and the context fixing `q`.
#[derive(Clone, Debug)]
pub struct Params<F> {
    pub a: Vec<F>,
    pub ctx: QSeriesCtx<F>,
}

impl<F: Scalar> Params<F> {
    pub fn new(a: Vec<F>, ctx: QSeriesCtx<F>) -> Result<Self> {
        if a.iter().any(|x| x.is_zero()) {
            return Err(Error::Domain("a must have nonzero entries".into()));
        }
        Ok(Self { a, ctx })
    }

    /// `ā_k`: `a_l` for `k = 2l-1` and `a_l^{-1}` for `k = 2l`.
    pub fn abar(&self, k: usize) -> F {
        let a = self.a[level_len(k) - 1].clone();
        if k % 2 == 1 {
            a
        } else {
            a.inv()
        }
    }
}

/// All outcomes of one event of the q-Berele dynamics from `levels` (even number of levels).
pub fn berele_transitions<F: Scalar>(levels: &Levels, params: &Params<F>) -> Vec<Transition<F>> {
    let n_levels = levels.len() - 1;
    let mut out = Vec::new();
    for k in 1..=n_levels {
        cascade_right(&params.ctx, levels.clone(), k, 1, params.abar(k), Vec::new(), &mut out);
    }
    out
}

/// All outcomes of one event of the randomized dynamics from `levels`.
pub fn randomized_transitions<F: Scalar>(levels: &Levels, params: &Params<F>) -> Vec<Transition<F>> {
    let ctx = &params.ctx;
    let n_levels = levels.len() - 1;
    let mut out = Vec::new();
    for k in 1..=n_levels {
        let ab = params.abar(k);
        for j in 1..=levels[k].len() {
            let right = ab.clone() * right_factor(ctx, &levels[k], &levels[k - 1], j);
            if !right.is_zero() {
                let mut l = levels.clone();
                l[k][j - 1] += 1;
                let mut moves = vec![Move { level: k, index: j, delta: 1 }];
                push_down(&mut l, k, j, 1, &mut moves);
                out.push(Transition { levels: l, rate: right, moves });
            }
            let left = ab.inv() * left_factor(ctx, &levels[k], &levels[k - 1], j);
            if !left.is_zero() {
                let mut l = levels.clone();
                l[k][j - 1] -= 1;
                let mut moves = vec![Move { level: k, index: j, delta: -1 }];
                push_down(&mut l, k, j, -1, &mut moves);
                out.push(Transition { levels: l, rate: left, moves });
            }
        }
    }
    out
}

/// Outcomes for either model.
pub fn transitions<F: Scalar>(model: Model, levels: &Levels, params: &Params<F>) -> Vec<Transition<F>> {
    match model {
        Model::Berele => berele_transitions(levels, params),
        Model::Randomized => randomized_transitions(levels, params),
    }
}

/// Off-diagonal row of the pattern generator: target ↦ total rate.
pub fn pattern_generator_row<F: Scalar>(model: Model, levels: &Levels, params: &Params<F>) -> HashMap<Levels, F> {
    let mut row: HashMap<Levels, F> = HashMap::new();
    for t in transitions(model, levels, params) {
        let e = row.entry(t.levels).or_insert_with(F::zero);
        *e = e.clone() + t.rate;
    }
    row
}

/// Converts a pattern into level-indexed form.
pub fn to_levels(p: &GTPattern) -> Levels {
    let mut v = vec![Vec::new()];
    v.extend(p.levels().iter().cloned());
    v
}

/// Converts level-indexed positions back into a validated pattern.
pub fn from_levels(levels: &Levels) -> Result<GTPattern> {
    GTPattern::new(levels[1..].to_vec())
}

/// Deterministic Berele dynamics (`q = 0`): the pattern after inserting `letter`.
pub fn deterministic_insert(p: &GTPattern, letter: Letter) -> Result<GTPattern> {
    let n_levels = p.n_levels();
    let k = letter.0 as usize;
    if k == 0 || k > n_levels {
        return Err(Error::Domain(format!("letter {letter} needs at most {n_levels} levels")));
    }
    let ctx = QSeriesCtx::exact(Rational::zero())?;
    let mut out = Vec::new();
    cascade_right(&ctx, to_levels(p), k, 1, Rational::one(), Vec::new(), &mut out);
    debug_assert_eq!(out.len(), 1);
    from_levels(&out.pop().expect("one branch at q = 0").levels)
}

/// Slice weights `Λ_{k-1,k}` and memoised pattern sums `𝒫̂^{(k)}_z` at fixed `a`, `q`.
#[derive(Clone, Debug)]
pub struct SliceWeights<F> {
    params: Params<F>,
    memo: HashMap<(usize, Vec<i64>), F>,
}

/// All `x` of length `len` with `u_{i+1} ≤ x_i ≤ u_i`.
pub fn interlacing_below(upper: &[i64], len: usize) -> Vec<Vec<i64>> {
    let ranges: Vec<(i64, i64)> = (1..=len).map(|i| (at(upper, i + 1), at(upper, i))).collect();
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut x: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        out.push(x.clone());
        let mut i = len;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if x[i] < ranges[i].1 {
                x[i] += 1;
                break;
            }
            x[i] = ranges[i].0;
        }
    }
}

impl<F: Scalar> SliceWeights<F> {
    pub fn new(params: Params<F>) -> Self {
        Self { params, memo: HashMap::new() }
    }

    pub fn params(&self) -> &Params<F> {
        &self.params
    }

    pub fn ctx(&self) -> &QSeriesCtx<F> {
        &self.params.ctx
    }

    /// `Λ_{k-1,k}(lower, upper)`.
    pub fn slice(&self, k: usize, lower: &[i64], upper: &[i64]) -> F {
        let ctx = &self.params.ctx;
        let l = level_len(k);
        let diff: i64 = upper.iter().sum::<i64>() - lower.iter().sum::<i64>();
        let mut acc = self.params.abar(k).powi(diff);
        for i in 1..l {
            acc = acc * ctx.binomial_or_zero(at(upper, i) - at(upper, i + 1), at(upper, i) - at(lower, i));
        }
        if k % 2 == 0 {
            acc = acc * ctx.binomial_or_zero(at(upper, l), at(upper, l) - at(lower, l));
        }
        acc
    }

    /// `𝒫̂^{(k)}_z(a; q)`, the sum of pattern weights over `k`-level patterns with bottom `z`.
    pub fn value(&mut self, k: usize, z: &[i64]) -> F {
        if k == 0 {
            return F::one();
        }
        let key = (k, z.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let mut acc = F::zero();
        for x in interlacing_below(z, level_len(k - 1)) {
            let s = self.slice(k, &x, z);
            if !s.is_zero() {
                acc = acc + s * self.value(k - 1, &x);
            }
        }
        self.memo.insert(key, acc.clone());
        acc
    }

    /// Weight `w^{(N)}` of a full pattern.
    pub fn pattern_weight(&self, levels: &Levels) -> F {
        let mut acc = F::one();
        for k in 1..levels.len() {
            acc = acc * self.slice(k, &levels[k - 1], &levels[k]);
        }
        acc
    }

    /// `M(𝐳; z) = w(𝐳) / 𝒫̂_z`.
    pub fn pattern_probability(&mut self, levels: &Levels) -> F {
        let n = levels.len() - 1;
        let w = self.pattern_weight(levels);
        w / self.value(n, &levels[n])
    }

    /// `f_N(z, z')` of the shape chain.
    pub fn shape_factor(&self, z: &[i64], target: &[i64]) -> F {
        let n = z.len();
        let diff: Vec<i64> = target.iter().zip(z).map(|(a, b)| a - b).collect();
        let nonzero: Vec<usize> = (0..n).filter(|&i| diff[i] != 0).collect();
        if nonzero.len() != 1 || diff[nonzero[0]].abs() != 1 {
            return F::zero();
        }
        let i = nonzero[0];
        let f = pieri_coefficients(n, z, self.ctx());
        if diff[i] > 0 {
            f.plus[i].clone()
        } else {
            f.minus[i].clone()
        }
    }

    /// Diagonal entry `Q_N(z, z)` of the shape chain on `N` levels.
    pub fn shape_diagonal(&self, n_levels: usize, z: &[i64]) -> F {
        let n = level_len(n_levels);
        let a = &self.params.a;
        let mut acc = F::zero();
        for ai in a.iter().take(if n_levels % 2 == 0 { n } else { n - 1 }) {
            acc = acc - (ai.clone() + ai.inv());
        }
        if n_levels % 2 == 1 {
            let an = a[n - 1].clone();
            acc = acc - an.clone() - an.inv() * (F::one() - self.ctx().power(at(z, n)));
        }
        acc
    }

    /// `Q_N(z, z')`; zero when `z'` is not a neighbour or not a partition.
    pub fn shape_rate(&mut self, n_levels: usize, z: &[i64], target: &[i64]) -> F {
        if z == target {
            return self.shape_diagonal(n_levels, z);
        }
        if target.iter().any(|&v| v < 0) || target.windows(2).any(|w| w[0] < w[1]) {
            return F::zero();
        }
        let f = self.shape_factor(z, target);
        if f.is_zero() {
            return f;
        }
        f * self.value(n_levels, target) / self.value(n_levels, z)
    }
}

/// Neighbours `z ± e_i` that are partitions.
pub fn shape_neighbours(z: &[i64]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for i in 0..z.len() {
        for d in [1, -1] {
            let mut w = z.to_vec();
            w[i] += d;
            if w[i] >= 0 && w.windows(2).all(|p| p[0] >= p[1]) {
                out.push(w);
            }
        }
    }
    out
}

/// Draws a pattern from `M(·; z)` level by level, from the bottom up.
pub fn sample_initial<R: Rng + ?Sized>(
    z: &Partition,
    n_levels: usize,
    weights: &mut SliceWeights<f64>,
    rng: &mut R,
) -> Result<GTPattern> {
    let n = level_len(n_levels);
    if z.len() > n {
        return Err(Error::Domain(format!("shape {z} has more than {n} parts")));
    }
    let mut levels: Levels = vec![Vec::new(); n_levels + 1];
    levels[n_levels] = z.padded(n);
    for k in (1..=n_levels).rev() {
        let cands = interlacing_below(&levels[k], level_len(k - 1));
        let w: Vec<f64> = cands.iter().map(|x| weights.slice(k, x, &levels[k]) * weights.value(k - 1, x)).collect();
        let dist = WeightedIndex::new(&w).map_err(|e| Error::Numerical(format!("initial law: {e}")))?;
        levels[k - 1] = cands[dist.sample(rng)].clone();
    }
    from_levels(&levels)
}

/// Generator of the bottom-level chain on `{z : z_1 ≤ cap}`.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix<F> {
    pub n_levels: usize,
    pub states: Vec<Vec<i64>>,
    pub index: HashMap<Vec<i64>, usize>,
    /// Off-diagonal entries per row.
    pub rows: Vec<Vec<(usize, F)>>,
    pub diagonal: Vec<F>,
    /// Rows with a neighbour beyond the cap; these are not conservative.
    pub truncated: Vec<bool>,
}

fn shapes_below_cap(n: usize, cap: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut z = vec![0i64; n];
    loop {
        out.push(z.clone());
        // next weakly decreasing vector in lexicographic order with z_1 ≤ cap
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            let bound = if i == 0 { cap } else { z[i - 1] };
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

/// Assembles the bottom-level generator `Q_N` on a truncation.
pub fn build_generator<F: Scalar>(n_levels: usize, weights: &mut SliceWeights<F>, cap: i64) -> GeneratorMatrix<F> {
    let n = level_len(n_levels);
    let states = shapes_below_cap(n, cap);
    let index: HashMap<Vec<i64>, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let mut rows = Vec::with_capacity(states.len());
    let mut diagonal = Vec::with_capacity(states.len());
    let mut truncated = Vec::with_capacity(states.len());
    for z in &states {
        let mut row = Vec::new();
        let mut cut = false;
        for w in shape_neighbours(z) {
            let rate = weights.shape_rate(n_levels, z, &w);
            if rate.is_zero() {
                continue;
            }
            match index.get(&w) {
                Some(&j) => row.push((j, rate)),
                None => cut = true,
            }
        }
        rows.push(row);
        diagonal.push(weights.shape_diagonal(n_levels, z));
        truncated.push(cut);
    }
    GeneratorMatrix { n_levels, states, index, rows, diagonal, truncated }
}

impl<F: Scalar> GeneratorMatrix<F> {
    /// Row sums including the diagonal.
    pub fn row_sums(&self) -> Vec<F> {
        self.rows
            .iter()
            .zip(&self.diagonal)
            .map(|(row, d)| row.iter().fold(d.clone(), |acc, (_, r)| acc + r.clone()))
            .collect()
    }

    /// Whether every non-truncated row sums to zero exactly.
    pub fn interior_rows_conservative(&self) -> bool {
        self.row_sums().iter().zip(&self.truncated).all(|(s, &cut)| cut || s.is_zero())
    }
}

impl GeneratorMatrix<f64> {
    /// `δ_start · exp(t Q)` by uniformization; returns the law and the mass lost at the cap.
    pub fn transient_law(&self, start: &[i64], t: f64) -> Result<(Vec<f64>, f64)> {
        if t < 0.0 {
            return Err(Error::Config("time must be nonnegative".into()));
        }
        let s = *self
            .index
            .get(start)
            .ok_or_else(|| Error::Domain(format!("start {start:?} is outside the truncation")))?;
        let lambda = self.diagonal.iter().fold(0.0f64, |m, d| m.max(-d)) * 1.05 + 1e-12;
        let mut v = vec![0.0; self.states.len()];
        v[s] = 1.0;
        let mut out = vec![0.0; self.states.len()];
        let mut log_weight = -lambda * t;
        let mut cumulative = 0.0;
        let mut m = 0u32;
        loop {
            let w = log_weight.exp();
            for (o, x) in out.iter_mut().zip(&v) {
                *o += w * x;
            }
            cumulative += w;
            if 1.0 - cumulative < 1e-15 || m > 100_000 {
                break;
            }
            // v ← v (I + Q/λ)
            let mut next: Vec<f64> = v.iter().zip(&self.diagonal).map(|(x, d)| x * (1.0 + d / lambda)).collect();
            for (i, row) in self.rows.iter().enumerate() {
                for &(j, r) in row {
                    next[j] += v[i] * r / lambda;
                }
            }
            v = next;
            m += 1;
            log_weight += (lambda * t).ln() - (m as f64).ln();
        }
        let lost = 1.0 - out.iter().sum::<f64>();
        Ok((out, lost))
    }
}

/// One probe of an intertwining relation.
#[derive(Clone, Debug, Serialize)]
pub struct IntertwiningProbe {
    pub source: Vec<i64>,
    pub target: Levels,
    pub lhs: String,
    pub rhs: String,
    pub equal: bool,
}

/// Exact evaluation of `Q K = K A` (or `Q L = L Q̂`) at a list of probes.
#[derive(Clone, Debug, Serialize)]
pub struct IntertwiningReport {
    pub relation: String,
    pub probes: Vec<IntertwiningProbe>,
    pub all_equal: bool,
}

impl IntertwiningReport {
    fn new(relation: String, probes: Vec<IntertwiningProbe>) -> Self {
        let all_equal = probes.iter().all(|p| p.equal);
        Self { relation, probes, all_equal }
    }
}

/// Which helper relation to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Helper {
    /// Three bottom levels `(x, y, z)` of the q-Berele dynamics with `n` parts at the bottom.
    Berele { n: usize },
    /// Two bottom levels `(x, y)` of the randomized dynamics with `N` levels.
    Randomized { n_levels: usize },
}

impl Helper {
    fn bottom(self) -> usize {
        match self {
            Helper::Berele { n } => 2 * n,
            Helper::Randomized { n_levels } => n_levels,
        }
    }

    /// Number of levels carried by the helper state.
    fn window(self) -> usize {
        match self {
            Helper::Berele { .. } => 3,
            Helper::Randomized { .. } => 2,
        }
    }
}

/// Embeds a helper state (bottom levels only) into level-indexed form.
fn helper_levels(helper: Helper, state: &[Vec<i64>]) -> Levels {
    let bottom = helper.bottom();
    let mut levels: Levels = (0..=bottom).map(|k| vec![0; level_len(k)]).collect();
    let first = bottom + 1 - helper.window();
    for (off, lv) in state.iter().enumerate() {
        levels[first + off] = lv.clone();
    }
    levels
}

fn helper_state(helper: Helper, levels: &Levels) -> Vec<Vec<i64>> {
    let bottom = helper.bottom();
    levels[bottom + 1 - helper.window()..].to_vec()
}

/// Off-diagonal row of the helper matrix `𝒜` from `state`.
fn helper_row(helper: Helper, state: &[Vec<i64>], weights: &mut SliceWeights<Rational>) -> HashMap<Vec<Vec<i64>>, Rational> {
    let bottom = helper.bottom();
    let top = bottom + 1 - helper.window();
    let levels = helper_levels(helper, state);
    let params = weights.params().clone();
    let ctx = params.ctx.clone();
    let mut out: Vec<Transition<Rational>> = Vec::new();
    // moves of the top level of the window, driven by the shape chain on `top` levels
    if top > 0 {
        let x = levels[top].clone();
        for w in shape_neighbours(&x) {
            let rate = weights.shape_rate(top, &x, &w);
            if rate.is_zero() {
                continue;
            }
            let i = (0..x.len()).find(|&i| x[i] != w[i]).expect("neighbour") + 1;
            let right = w[i - 1] > x[i - 1];
            match helper {
                Helper::Berele { .. } => {
                    // the top level moves first; the cascade continues from it
                    let mut l = levels.clone();
                    if right {
                        let r = push_probability(&ctx, &l[top + 1], &l[top], i);
                        l[top][i - 1] += 1;
                        let base = vec![Move { level: top, index: i, delta: 1 }];
                        if !r.is_zero() {
                            cascade_right(&ctx, l.clone(), top + 1, i, rate.clone() * r.clone(), base.clone(), &mut out);
                        }
                        if r != Rational::one() {
                            cascade_right(&ctx, l, top + 1, i + 1, rate * (Rational::one() - r), base, &mut out);
                        }
                    } else {
                        let p = pull_probability(&ctx, &l[top + 1], &l[top], i);
                        l[top][i - 1] -= 1;
                        let base = vec![Move { level: top, index: i, delta: -1 }];
                        if !p.is_zero() {
                            cascade_left(&ctx, l.clone(), top + 1, i + 1, rate.clone() * p.clone(), base.clone(), &mut out);
                        }
                        if p != Rational::one() {
                            cascade_left(&ctx, l, top + 1, i, rate * (Rational::one() - p), base, &mut out);
                        }
                    }
                }
                Helper::Randomized { .. } => {
                    let mut l = levels.clone();
                    let d: i8 = if right { 1 } else { -1 };
                    l[top][i - 1] += d as i64;
                    let mut moves = vec![Move { level: top, index: i, delta: d }];
                    push_down(&mut l, top, i, d, &mut moves);
                    out.push(Transition { levels: l, rate, moves });
                }
            }
        }
    }
    // own moves of the remaining levels
    match helper {
        Helper::Berele { .. } => {
            for k in [bottom - 1, bottom] {
                cascade_right(&ctx, levels.clone(), k, 1, params.abar(k), Vec::new(), &mut out);
            }
        }
        Helper::Randomized { .. } => {
            let k = bottom;
            let ab = params.abar(k);
            for j in 1..=levels[k].len() {
                let right = ab.clone() * right_factor(&ctx, &levels[k], &levels[k - 1], j);
                if !right.is_zero() {
                    let mut l = levels.clone();
                    l[k][j - 1] += 1;
                    out.push(Transition { levels: l, rate: right, moves: Vec::new() });
                }
                let left = ab.inv() * left_factor(&ctx, &levels[k], &levels[k - 1], j);
                if !left.is_zero() {
                    let mut l = levels.clone();
                    l[k][j - 1] -= 1;
                    out.push(Transition { levels: l, rate: left, moves: Vec::new() });
                }
            }
        }
    }
    let mut row: HashMap<Vec<Vec<i64>>, Rational> = HashMap::new();
    for t in out {
        let e = row.entry(helper_state(helper, &t.levels)).or_insert_with(Rational::zero);
        *e += t.rate;
    }
    row
}

/// `m(state) = Λ(window) 𝒫̂^{(top)}_x / 𝒫̂^{(bottom)}_z`.
fn helper_mass(helper: Helper, state: &[Vec<i64>], weights: &mut SliceWeights<Rational>) -> Rational {
    let bottom = helper.bottom();
    let top = bottom + 1 - helper.window();
    let mut lam = Rational::one();
    for (off, pair) in state.windows(2).enumerate() {
        lam *= weights.slice(top + off + 1, &pair[0], &pair[1]);
    }
    lam * weights.value(top, &state[0]) / weights.value(bottom, &state[state.len() - 1])
}

/// All helper states with bottom level `z`.
fn helper_states_over(helper: Helper, z: &[i64]) -> Vec<Vec<Vec<i64>>> {
    let bottom = helper.bottom();
    let mut states = vec![vec![z.to_vec()]];
    for k in (bottom + 2 - helper.window()..=bottom).rev() {
        states = states
            .into_iter()
            .flat_map(|s| {
                interlacing_below(&s[0], level_len(k - 1)).into_iter().map(move |x| {
                    let mut v = vec![x];
                    v.extend(s.iter().cloned());
                    v
                })
            })
            .collect();
    }
    states
}

fn helper_diagonal(helper: Helper, state: &[Vec<i64>], weights: &mut SliceWeights<Rational>) -> Rational {
    let row = helper_row(helper, state, weights);
    let bottom = helper.bottom();
    let top = bottom + 1 - helper.window();
    let top_exit = if top > 0 { -weights.shape_diagonal(top, &state[0]) } else { Rational::zero() };
    // own exits of the window plus the projected top-level exits
    let own: Rational = match helper {
        Helper::Berele { .. } => {
            let p = weights.params();
            p.abar(bottom - 1) + p.abar(bottom)
        }
        Helper::Randomized { .. } => {
            let from_top: Rational = if top > 0 {
                shape_neighbours(&state[0])
                    .iter()
                    .map(|w| weights.shape_rate(top, &state[0], w))
                    .fold(Rational::zero(), |a, b| a + b)
            } else {
                Rational::zero()
            };
            row.values().fold(Rational::zero(), |a, b| a + b) - from_top
        }
    };
    -(top_exit + own)
}

/// Evaluates `Q(z, z') m(target)` against `Σ_source m(source) 𝒜(source, target)` for each probe
/// `(z, target)`; `target` lists the helper levels from top to bottom.
pub fn verify_helper(
    helper: Helper,
    weights: &mut SliceWeights<Rational>,
    probes: &[(Vec<i64>, Vec<Vec<i64>>)],
) -> IntertwiningReport {
    let bottom = helper.bottom();
    let mut out = Vec::new();
    for (z, target) in probes {
        let zt = target.last().expect("nonempty target");
        let lhs = weights.shape_rate(bottom, z, zt) * helper_mass(helper, target, weights);
        let mut rhs = Rational::zero();
        for source in helper_states_over(helper, z) {
            let entry = if &source == target {
                helper_diagonal(helper, &source, weights)
            } else {
                helper_row(helper, &source, weights).get(target).cloned().unwrap_or_else(Rational::zero)
            };
            if !entry.is_zero() {
                rhs += helper_mass(helper, &source, weights) * entry;
            }
        }
        out.push(IntertwiningProbe {
            source: z.clone(),
            target: helper_levels(helper, target),
            equal: lhs == rhs,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
        });
    }
    let name = match helper {
        Helper::Berele { n } => format!("q-Berele helper, n = {n}"),
        Helper::Randomized { n_levels } => format!("randomized helper, N = {n_levels}"),
    };
    IntertwiningReport::new(name, out)
}

/// Random probes `(z, target)` with `z` equal to or adjacent to the target's bottom level.
pub fn random_helper_probes<R: Rng + ?Sized>(
    helper: Helper,
    count: usize,
    max_part: i64,
    rng: &mut R,
) -> Vec<(Vec<i64>, Vec<Vec<i64>>)> {
    let bottom = helper.bottom();
    let n = level_len(bottom);
    (0..count)
        .map(|_| {
            let mut z: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=max_part)).collect();
            z.sort_unstable_by(|a, b| b.cmp(a));
            let states = helper_states_over(helper, &z);
            let target = states[rng.gen_range(0..states.len())].clone();
            let mut sources = shape_neighbours(&z);
            sources.push(z.clone());
            let source = sources[rng.gen_range(0..sources.len())].clone();
            (source, target)
        })
        .collect()
}

/// Exact check of `Q_N L_N = L_N Q̂_N` at every pattern whose bottom level is `z` or a neighbour of it.
pub fn verify_full_intertwining(
    model: Model,
    n_levels: usize,
    z: &Partition,
    weights: &mut SliceWeights<Rational>,
) -> Result<IntertwiningReport> {
    if model == Model::Berele && n_levels % 2 == 1 {
        return Err(Error::Domain("the q-Berele dynamics needs an even number of levels".into()));
    }
    let n = level_len(n_levels);
    let zv = z.padded(n);
    let params = weights.params().clone();
    let sources: Vec<Levels> = enumerate_patterns(z, n_levels).map(|p| to_levels(&p)).collect();
    let rows: Vec<HashMap<Levels, Rational>> =
        sources.iter().map(|s| pattern_generator_row(model, s, &params)).collect();
    let mut bottoms = shape_neighbours(&zv);
    bottoms.push(zv.clone());
    let mut probes = Vec::new();
    for b in bottoms {
        let part = Partition::new(b.clone())?;
        for target in enumerate_patterns(&part, n_levels).map(|p| to_levels(&p)) {
            let lhs = weights.shape_rate(n_levels, &zv, &b) * weights.pattern_probability(&target);
            let mut rhs = Rational::zero();
            for (s, row) in sources.iter().zip(&rows) {
                let entry = if *s == target {
                    -row.values().fold(Rational::zero(), |a, b| a + b)
                } else {
                    row.get(&target).cloned().unwrap_or_else(Rational::zero)
                };
                if !entry.is_zero() {
                    rhs += weights.pattern_probability(s) * entry;
                }
            }
            probes.push(IntertwiningProbe {
                source: zv.clone(),
                equal: lhs == rhs,
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
                target,
            });
        }
    }
    Ok(IntertwiningReport::new(format!("{model:?} full relation, N = {n_levels}, z = {z}"), probes))
}

/// Why a particle moved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cause {
    OwnClock,
    Push,
    Pull,
}

/// One particle displacement in a simulated path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventRecord {
    pub time: f64,
    pub level: usize,
    pub index: usize,
    pub direction: i8,
    pub cause: Cause,
}

/// Where replicas start.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Start {
    /// The zero pattern.
    Origin,
    /// A draw from `M(·; z)`.
    Shape(Partition),
}

/// Simulation settings.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationConfig {
    pub model: Model,
    pub n_levels: usize,
    pub a: Vec<f64>,
    pub q: f64,
    pub horizon: f64,
    pub replicas: usize,
    pub seed: u64,
    pub start: Start,
    /// Keep the event log of the first replica.
    pub log_first: bool,
}

/// Empirical output of [`simulate`].
#[derive(Clone, Debug, Serialize)]
pub struct SimulationResult {
    pub config: SimulationConfig,
    /// Bottom-level positions at the horizon with their counts, sorted.
    pub bottom_counts: Vec<(Vec<i64>, usize)>,
    /// Final patterns of every replica.
    #[serde(skip)]
    pub finals: Vec<Levels>,
    pub events: Vec<EventRecord>,
}

impl SimulationResult {
    /// Empirical law of the bottom level.
    pub fn bottom_law(&self) -> HashMap<Vec<i64>, f64> {
        let total = self.config.replicas as f64;
        self.bottom_counts.iter().map(|(z, c)| (z.clone(), *c as f64 / total)).collect()
    }
}

/// Runs one replica until `horizon`, optionally logging events.
pub fn run_replica<R: Rng + ?Sized>(
    model: Model,
    start: Levels,
    params: &Params<f64>,
    horizon: f64,
    rng: &mut R,
    mut log: Option<&mut Vec<EventRecord>>,
) -> Levels {
    let mut levels = start;
    let mut time = 0.0;
    loop {
        let ts = transitions(model, &levels, params);
        let total: f64 = ts.iter().map(|t| t.rate).sum();
        if total <= 0.0 {
            return levels;
        }
        time += Exp::new(total).expect("positive rate").sample(rng);
        if time > horizon {
            return levels;
        }
        let dist = WeightedIndex::new(ts.iter().map(|t| t.rate)).expect("positive weights");
        let t = ts.into_iter().nth(dist.sample(rng)).expect("index in range");
        if let Some(log) = log.as_deref_mut() {
            let first = t.moves.first().map(|m| m.delta).unwrap_or(0);
            for (i, m) in t.moves.iter().enumerate() {
                let cause = if i == 0 {
                    Cause::OwnClock
                } else if m.delta == first {
                    Cause::Push
                } else {
                    Cause::Pull
                };
                log.push(EventRecord { time, level: m.level, index: m.index, direction: m.delta, cause });
            }
        }
        levels = t.levels;
        debug_assert!(from_levels(&levels).is_ok(), "transition left the cone");
    }
}

/// Simulates independent replicas in parallel; replica `r` uses stream `r` of the seed.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationResult> {
    if config.horizon <= 0.0 {
        return Err(Error::Config("time horizon must be positive".into()));
    }
    if config.model == Model::Berele && config.n_levels % 2 == 1 {
        return Err(Error::Config("the q-Berele dynamics needs an even number of levels".into()));
    }
    let n = level_len(config.n_levels);
    if config.a.len() != n {
        return Err(Error::Config(format!("expected {n} entries in a, got {}", config.a.len())));
    }
    if config.a.iter().any(|&x| x <= 0.0) {
        return Err(Error::Config("a must be positive".into()));
    }
    let ctx = QSeriesCtx::numeric(config.q, crate::algebra::DEFAULT_TRUNCATION)?;
    if config.q <= 0.0 {
        return Err(Error::Config("q must lie in (0, 1)".into()));
    }
    let params = Params::new(config.a.clone(), ctx)?;
    let origin: Levels = (0..=config.n_levels).map(|k| vec![0; level_len(k)]).collect();
    let run = |r: usize, log: Option<&mut Vec<EventRecord>>| -> Result<Levels> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(r as u64);
        let start = match &config.start {
            Start::Origin => origin.clone(),
            Start::Shape(z) => {
                let mut w = SliceWeights::new(params.clone());
                to_levels(&sample_initial(z, config.n_levels, &mut w, &mut rng)?)
            }
        };
        Ok(run_replica(config.model, start, &params, config.horizon, &mut rng, log))
    };
    let mut events = Vec::new();
    let first = run(0, if config.log_first { Some(&mut events) } else { None })?;
    let rest: Vec<Levels> = (1..config.replicas).into_par_iter().map(|r| run(r, None)).collect::<Result<_>>()?;
    let mut finals = vec![first];
    finals.extend(rest);
    let mut counts: HashMap<Vec<i64>, usize> = HashMap::new();
    for f in &finals {
        *counts.entry(f[config.n_levels].clone()).or_insert(0) += 1;
    }
    let mut bottom_counts: Vec<(Vec<i64>, usize)> = counts.into_iter().collect();
    bottom_counts.sort();
    Ok(SimulationResult { config: config.clone(), bottom_counts, finals, events })
}

/// Total-variation distance between two laws given on possibly different supports.
pub fn total_variation(p: &HashMap<Vec<i64>, f64>, q: &HashMap<Vec<i64>, f64>) -> f64 {
    let mut keys: Vec<&Vec<i64>> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys.iter().map(|k| (p.get(*k).unwrap_or(&0.0) - q.get(*k).unwrap_or(&0.0)).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::berele::insert;
    use crate::combinatorics::{parse_word, tableau_to_pattern, SymplecticTableau};

    fn exact(a: &[(i64, i64)], q: (i64, i64)) -> SliceWeights<Rational> {
        let ctx = QSeriesCtx::exact(rat(q.0, q.1)).unwrap();
        SliceWeights::new(Params::new(a.iter().map(|&(p, d)| rat(p, d)).collect(), ctx).unwrap())
    }

    #[test]
    fn berele_base_case_rates() {
        let ctx = QSeriesCtx::exact(rat(1, 2)).unwrap();
        let params = Params::new(vec![rat(3, 1)], ctx).unwrap();
        let levels: Levels = vec![vec![], vec![1], vec![3]];
        let row = pattern_generator_row(Model::Berele, &levels, &params);
        let q_pow = rat(1, 4);
        assert_eq!(row[&vec![vec![], vec![2], vec![4]]], rat(3, 1) * &q_pow);
        assert_eq!(row[&vec![vec![], vec![1], vec![2]]], rat(3, 1) * (Rational::one() - &q_pow));
        assert_eq!(row[&vec![vec![], vec![1], vec![4]]], rat(1, 3));
        assert_eq!(row.len(), 3);
    }

    #[test]
    fn probabilities_degenerate_to_indicators() {
        let ctx = QSeriesCtx::exact(Rational::zero()).unwrap();
        assert_eq!(push_probability(&ctx, &[3, 1], &[3], 1), Rational::one());
        assert_eq!(push_probability(&ctx, &[4, 1], &[3], 1), Rational::zero());
        assert_eq!(pull_probability(&ctx, &[4, 3], &[3], 1), Rational::one());
        assert_eq!(pull_probability(&ctx, &[4, 2], &[3], 1), Rational::zero());
    }

    #[test]
    fn single_particle_randomized_rates() {
        let ctx = QSeriesCtx::exact(rat(1, 3)).unwrap();
        let params = Params::new(vec![rat(2, 1)], ctx).unwrap();
        let row = pattern_generator_row(Model::Randomized, &vec![vec![], vec![2]], &params);
        assert_eq!(row[&vec![vec![], vec![3]]], rat(2, 1));
        assert_eq!(row[&vec![vec![], vec![1]]], rat(1, 2) * (Rational::one() - rat(1, 9)));
    }

    #[test]
    fn frozen_particle_has_zero_right_rate() {
        let ctx = QSeriesCtx::exact(rat(1, 3)).unwrap();
        assert!(right_factor(&ctx, &[2, 2], &[2], 2).is_zero());
        assert!(!left_factor(&ctx, &[2, 2], &[2], 2).is_zero());
        assert!(left_factor(&ctx, &[2, 1], &[2], 1).is_zero());
    }

    #[test]
    fn deterministic_dynamics_follow_insertion() {
        let word = parse_word("3~ 2 1~ 3~ 1 2 1 2~ 3 1~").unwrap();
        let mut t = SymplecticTableau::empty();
        let mut p = tableau_to_pattern(&t, 3).unwrap();
        for &l in &word {
            t = insert(&t, l);
            p = deterministic_insert(&p, l).unwrap();
            assert_eq!(p, tableau_to_pattern(&t, 3).unwrap(), "after {l}");
        }
    }

    #[test]
    fn pattern_sum_matches_recursion_values() {
        let mut w = exact(&[(2, 1), (3, 5)], (1, 3));
        let z = Partition::parse("2,1").unwrap();
        let poly = crate::characters::qwhittaker_recursion(2, &z, w.ctx());
        assert_eq!(w.value(4, &[2, 1]), poly.eval(&[rat(2, 1), rat(3, 5)]));
    }

    #[test]
    fn interior_rows_conserve_mass() {
        for n_levels in 1..=4 {
            let mut w = exact(&[(2, 1), (3, 5)], (1, 3));
            let g = build_generator(n_levels, &mut w, 4);
            assert!(g.interior_rows_conservative(), "N = {n_levels}");
            assert!(g.truncated.iter().any(|&t| t));
        }
    }

    #[test]
    fn helper_relations_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for helper in [Helper::Berele { n: 2 }, Helper::Randomized { n_levels: 4 }, Helper::Randomized { n_levels: 3 }] {
            let mut w = exact(&[(2, 1), (5, 1)], (1, 3));
            let probes = random_helper_probes(helper, 8, 3, &mut rng);
            let rep = verify_helper(helper, &mut w, &probes);
            assert!(rep.all_equal, "{rep:?}");
        }
    }

    #[test]
    fn full_relations_hold() {
        for (model, n_levels, z) in
            [(Model::Berele, 2, "2"), (Model::Berele, 4, "1,1"), (Model::Randomized, 3, "2,1"), (Model::Randomized, 2, "3")]
        {
            let mut w = exact(&[(3, 2), (2, 5)], (1, 3));
            let rep = verify_full_intertwining(model, n_levels, &Partition::parse(z).unwrap(), &mut w).unwrap();
            assert!(rep.all_equal, "{}", rep.relation);
        }
    }

    #[test]
    fn initial_law_for_single_row() {
        let ctx = QSeriesCtx::numeric(0.5, 60).unwrap();
        let mut w = SliceWeights::new(Params::new(vec![1.0], ctx).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = Partition::parse("2").unwrap();
        let mut counts = [0usize; 3];
        let draws = 20_000;
        for _ in 0..draws {
            let p = sample_initial(&z, 2, &mut w, &mut rng).unwrap();
            counts[p.level(1)[0] as usize] += 1;
        }
        // P(z¹ = k) ∝ binom(2, 2-k)_q with q = 1/2: 1, 3/2, 1
        let expected = [1.0 / 3.5, 1.5 / 3.5, 1.0 / 3.5];
        for k in 0..3 {
            assert!((counts[k] as f64 / draws as f64 - expected[k]).abs() < 0.015);
        }
        let zero = sample_initial(&Partition::empty(), 2, &mut w, &mut rng).unwrap();
        assert!(zero.levels().iter().flatten().all(|&v| v == 0));
    }

    #[test]
    fn simulation_is_reproducible() {
        let cfg = SimulationConfig {
            model: Model::Randomized,
            n_levels: 3,
            a: vec![1.2, 0.8],
            q: 0.4,
            horizon: 1.0,
            replicas: 50,
            seed: 9,
            start: Start::Origin,
            log_first: true,
        };
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a.bottom_counts, b.bottom_counts);
        assert_eq!(a.events, b.events);
        assert!(a.finals.iter().all(|l| from_levels(l).is_ok()));
        assert!(a.events.windows(2).all(|w| w[0].time <= w[1].time));
    }
}
