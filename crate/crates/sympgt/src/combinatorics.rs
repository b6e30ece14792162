//! Partitions, interlacing, symplectic tableaux and Gelfand-Tsetlin patterns.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stand-in for `+∞` in boundary conventions such as `z^k_0 = ∞`.
pub const INF: i64 = i64::MAX / 4;

/// A weakly decreasing sequence of nonnegative integers, stored without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    parts: Vec<i64>,
}

impl Partition {
    /// Validates and canonicalises; trailing zeros are accepted and dropped.
    pub fn new(mut parts: Vec<i64>) -> Result<Self> {
        if parts.iter().any(|&p| p < 0) {
            return Err(Error::Domain(format!("negative part in {parts:?}")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain(format!("parts not weakly decreasing: {parts:?}")));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Self { parts })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Parses `4,3,1` (an empty string is the empty partition).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        if s.is_empty() {
            return Ok(Self::empty());
        }
        let parts = s
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad part {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }

    pub fn parts(&self) -> &[i64] {
        &self.parts
    }

    /// Number of nonzero parts `l(λ)`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `|λ|`.
    pub fn weight(&self) -> i64 {
        self.parts.iter().sum()
    }

    /// Zero-based part, zero past the end.
    pub fn get(&self, i: usize) -> i64 {
        self.parts.get(i).copied().unwrap_or(0)
    }

    /// The `n`-part padded view; panics if `l(λ) > n`.
    pub fn padded(&self, n: usize) -> Vec<i64> {
        assert!(self.len() <= n, "partition {self} has more than {n} parts");
        let mut v = self.parts.clone();
        v.resize(n, 0);
        v
    }

    /// Conjugate partition, `λᵀ_i = #{j : λ_j ≥ i}`.
    pub fn transpose(&self) -> Partition {
        let m = self.get(0);
        let parts = (1..=m).map(|i| self.parts.iter().filter(|&&p| p >= i).count() as i64).collect();
        Partition { parts }
    }

    /// `μ ⊂ λ` as diagrams.
    pub fn contains(&self, mu: &Partition) -> bool {
        mu.len() <= self.len() && mu.parts.iter().zip(&self.parts).all(|(a, b)| a <= b)
    }

    /// Dominance order `self ≥ other` (equal weights required).
    pub fn dominates(&self, other: &Partition) -> bool {
        if self.weight() != other.weight() {
            return false;
        }
        let n = self.len().max(other.len());
        let (mut s1, mut s2) = (0, 0);
        for i in 0..n {
            s1 += self.get(i);
            s2 += other.get(i);
            if s1 < s2 {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// Interlacing `ν ⪯ λ` on zero-padded sequences: `λ1 ≥ ν1 ≥ λ2 ≥ ν2 ≥ …`.
pub fn interlaces_slices(nu: &[i64], lam: &[i64]) -> bool {
    let n = nu.len().max(lam.len());
    let at = |v: &[i64], i: usize| v.get(i).copied().unwrap_or(0);
    (0..n).all(|i| at(lam, i) >= at(nu, i) && at(nu, i) >= at(lam, i + 1))
}

/// `ν ⪯ λ`.
pub fn interlaces(nu: &Partition, lam: &Partition) -> bool {
    interlaces_slices(nu.parts(), lam.parts())
}

/// `λ/μ` is a horizontal strip, i.e. `λᵀ_i - μᵀ_i ∈ {0, 1}`; false when `μ ⊄ λ`.
pub fn is_horizontal_strip(lam: &Partition, mu: &Partition) -> bool {
    if !lam.contains(mu) {
        return false;
    }
    let (lt, mt) = (lam.transpose(), mu.transpose());
    (0..lt.len()).all(|i| {
        let d = lt.get(i) - mt.get(i);
        d == 0 || d == 1
    })
}

/// All partitions of `w` with at most `max_parts` parts, in reverse lexicographic order.
pub fn partitions_of(w: i64, max_parts: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<i64>, i64)> = vec![(Vec::new(), w)];
    while let Some((prefix, rest)) = stack.pop() {
        if rest == 0 {
            out.push(Partition { parts: prefix });
            continue;
        }
        if prefix.len() == max_parts {
            continue;
        }
        let cap = prefix.last().copied().unwrap_or(rest).min(rest);
        for p in 1..=cap {
            let mut v = prefix.clone();
            v.push(p);
            stack.push((v, rest - p));
        }
    }
    out.sort_by(|a, b| b.cmp(a));
    out
}

/// All partitions with `|λ| ≤ w` and at most `max_parts` parts, by weight.
pub fn partitions_up_to(w: i64, max_parts: usize) -> Vec<Partition> {
    (0..=w).flat_map(|k| partitions_of(k, max_parts)).collect()
}

/// A letter of the alphabet `1 < 1̄ < 2 < 2̄ < …`, encoded `k ↦ 2k-1`, `k̄ ↦ 2k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(pub u32);

impl Letter {
    pub fn unbarred(k: u32) -> Letter {
        Letter(2 * k - 1)
    }

    pub fn barred(k: u32) -> Letter {
        Letter(2 * k)
    }

    /// The index `k` of `k` or `k̄`.
    pub fn index(self) -> u32 {
        self.0.div_ceil(2)
    }

    pub fn is_barred(self) -> bool {
        self.0 % 2 == 0
    }

    /// Parses `3` or `3~`.
    pub fn parse(s: &str) -> Result<Letter> {
        let s = s.trim();
        let (digits, barred) = match s.strip_suffix('~') {
            Some(d) => (d, true),
            None => (s, false),
        };
        let k: u32 = digits.parse().map_err(|_| Error::Parse(format!("bad letter {s:?}")))?;
        if k == 0 {
            return Err(Error::Parse(format!("bad letter {s:?}")));
        }
        Ok(if barred { Letter::barred(k) } else { Letter::unbarred(k) })
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_barred() {
            write!(f, "{}~", self.index())
        } else {
            write!(f, "{}", self.index())
        }
    }
}

/// Parses a whitespace-separated word such as `3~ 2 1~`.
pub fn parse_word(s: &str) -> Result<Vec<Letter>> {
    s.split_whitespace().map(Letter::parse).collect()
}

/// King's symplectic tableau: rows weakly increase, columns strictly increase,
/// and no entry smaller than `k` sits in row `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SymplecticTableau {
    rows: Vec<Vec<Letter>>,
}

impl SymplecticTableau {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds from rows without validation; empty rows are dropped.
    pub fn from_rows(mut rows: Vec<Vec<Letter>>) -> Self {
        while rows.last().is_some_and(|r| r.is_empty()) {
            rows.pop();
        }
        Self { rows }
    }

    /// Builds from encoded rows and validates against rank `n`.
    pub fn from_codes(rows: &[&[u32]], n: u32) -> Result<Self> {
        let t = Self::from_rows(rows.iter().map(|r| r.iter().map(|&c| Letter(c)).collect()).collect());
        t.validate(n)?;
        Ok(t)
    }

    pub fn rows(&self) -> &[Vec<Letter>] {
        &self.rows
    }

    pub fn shape(&self) -> Partition {
        Partition::new(self.rows.iter().map(|r| r.len() as i64).collect()).expect("rows are a diagram")
    }

    pub fn get(&self, r: usize, c: usize) -> Option<Letter> {
        self.rows.get(r).and_then(|row| row.get(c)).copied()
    }

    /// Checks the diagram shape, the alphabet and conditions S1, S2, S3.
    pub fn validate(&self, n: u32) -> Result<()> {
        for (r, w) in self.rows.windows(2).enumerate() {
            if w[0].len() < w[1].len() {
                return Err(Error::InvalidTableau(format!("row {} longer than row {}", r + 2, r + 1)));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                if x.0 == 0 || x.0 > 2 * n {
                    return Err(Error::InvalidTableau(format!("letter {x} at ({},{}) outside rank {n}", r + 1, c + 1)));
                }
                if c > 0 && row[c - 1] > x {
                    return Err(Error::InvalidTableau(format!("S1: row {} decreases at column {}", r + 1, c + 1)));
                }
                if r > 0 && self.rows[r - 1][c] >= x {
                    return Err(Error::InvalidTableau(format!("S2: column {} not strict at row {}", c + 1, r + 1)));
                }
                if x.0 < 2 * (r as u32 + 1) - 1 {
                    return Err(Error::InvalidTableau(format!("S3: entry {x} below {} in row {}", r + 1, r + 1)));
                }
            }
        }
        Ok(())
    }

    /// Exponent vector `(#k - #k̄)_k` of the weight monomial.
    pub fn weight(&self, n: usize) -> Vec<i64> {
        let mut e = vec![0; n];
        for &x in self.rows.iter().flatten() {
            let k = x.index() as usize - 1;
            e[k] += if x.is_barred() { -1 } else { 1 };
        }
        e
    }

    /// Number of boxes.
    pub fn size(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }
}

impl fmt::Display for SymplecticTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let s: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            write!(f, "{}", s.join(" "))?;
        }
        Ok(())
    }
}

/// All symplectic tableaux of a shape over rank `n`, by cell-by-cell search.
pub fn enumerate_tableaux(shape: &Partition, n: u32) -> Vec<SymplecticTableau> {
    let cells: Vec<(usize, usize)> = shape
        .parts()
        .iter()
        .enumerate()
        .flat_map(|(r, &len)| (0..len as usize).map(move |c| (r, c)))
        .collect();
    let mut out = Vec::new();
    let mut grid: Vec<Vec<u32>> = shape.parts().iter().map(|&l| vec![0; l as usize]).collect();
    let mut pos = 0usize;
    if cells.is_empty() {
        return vec![SymplecticTableau::empty()];
    }
    // Explicit depth-first search: grid[cell] == 0 means "not yet tried".
    loop {
        let (r, c) = cells[pos];
        let lo = {
            let mut lo = 2 * r as u32 + 1;
            if c > 0 {
                lo = lo.max(grid[r][c - 1]);
            }
            if r > 0 {
                lo = lo.max(grid[r - 1][c] + 1);
            }
            lo
        };
        let next = if grid[r][c] == 0 { lo } else { grid[r][c] + 1 };
        if next <= 2 * n {
            grid[r][c] = next;
            if pos + 1 == cells.len() {
                out.push(SymplecticTableau::from_rows(
                    grid.iter().map(|row| row.iter().map(|&x| Letter(x)).collect()).collect(),
                ));
            } else {
                pos += 1;
            }
        } else {
            grid[r][c] = 0;
            if pos == 0 {
                break;
            }
            pos -= 1;
        }
    }
    out
}

/// A symplectic Gelfand-Tsetlin pattern `z^1 ⪯ z^2 ⪯ … ⪯ z^N` with `z^k ∈ ℤ^{⌈k/2⌉}_{≥0}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GTPattern {
    levels: Vec<Vec<i64>>,
}

/// Length of level `k` (one-based) of a symplectic pattern.
pub fn level_len(k: usize) -> usize {
    k.div_ceil(2)
}

impl GTPattern {
    pub fn new(levels: Vec<Vec<i64>>) -> Result<Self> {
        let p = Self { levels };
        p.validate()?;
        Ok(p)
    }

    /// The all-zero pattern with `n_levels` levels.
    pub fn zero(n_levels: usize) -> Self {
        Self { levels: (1..=n_levels).map(|k| vec![0; level_len(k)]).collect() }
    }

    pub fn validate(&self) -> Result<()> {
        for (k0, z) in self.levels.iter().enumerate() {
            let k = k0 + 1;
            if z.len() != level_len(k) {
                return Err(Error::Domain(format!("level {k} has length {} not {}", z.len(), level_len(k))));
            }
            if z.iter().any(|&v| v < 0) {
                return Err(Error::Domain(format!("negative entry at level {k}")));
            }
            if k >= 2 && !interlaces_slices(&self.levels[k0 - 1], z) {
                return Err(Error::Domain(format!("levels {} and {k} do not interlace", k - 1)));
            }
        }
        Ok(())
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<i64>] {
        &self.levels
    }

    /// Level `k`, one-based; level 0 is empty.
    pub fn level(&self, k: usize) -> &[i64] {
        if k == 0 {
            &[]
        } else {
            &self.levels[k - 1]
        }
    }

    /// `z^k_i` with the conventions `z^k_0 = ∞` and `z^k_i = 0` past the end.
    pub fn at(&self, k: usize, i: usize) -> i64 {
        if i == 0 {
            return INF;
        }
        self.level(k).get(i - 1).copied().unwrap_or(0)
    }

    pub fn top(&self) -> &[i64] {
        self.levels.last().map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// `|z^k|`.
    pub fn level_weight(&self, k: usize) -> i64 {
        self.level(k).iter().sum()
    }
}

impl fmt::Display for GTPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(self).expect("serialisable"))
    }
}

/// Reads off `z^k` as the shape of the entries `≤` the `k`-th letter.
pub fn tableau_to_pattern(t: &SymplecticTableau, n: u32) -> Result<GTPattern> {
    t.validate(n)?;
    let levels = (1..=2 * n as usize)
        .map(|k| {
            (0..level_len(k))
                .map(|r| t.rows().get(r).map_or(0, |row| row.iter().filter(|x| x.0 as usize <= k).count() as i64))
                .collect()
        })
        .collect();
    GTPattern::new(levels)
}

/// Inverse of [`tableau_to_pattern`]; needs an even number of levels.
pub fn pattern_to_tableau(p: &GTPattern) -> Result<SymplecticTableau> {
    p.validate()?;
    let n_levels = p.n_levels();
    if n_levels % 2 != 0 {
        return Err(Error::Domain("tableaux correspond to patterns with an even number of levels".into()));
    }
    let n_rows = level_len(n_levels);
    let mut rows = vec![Vec::new(); n_rows];
    for k in 1..=n_levels {
        for (r, row) in rows.iter_mut().enumerate().take(level_len(k)) {
            let prev = if r < p.level(k - 1).len() { p.level(k - 1)[r] } else { 0 };
            for _ in 0..(p.level(k)[r] - prev) {
                row.push(Letter(k as u32));
            }
        }
    }
    let t = SymplecticTableau::from_rows(rows);
    t.validate(n_levels as u32 / 2)?;
    Ok(t)
}

/// Depth-first odometer over interlacing arrays below a fixed top row.
///
/// `lengths[k-1]` is the length of level `k`; level `N = lengths.len()` is fixed to `top`.
#[derive(Clone, Debug)]
pub struct InterlacingIter {
    lengths: Vec<usize>,
    levels: Vec<Vec<i64>>,
    coords: Vec<(usize, usize)>,
    done: bool,
}

impl InterlacingIter {
    pub fn new(top: &[i64], lengths: Vec<usize>) -> Self {
        let n = lengths.len();
        assert!(n >= 1 && top.len() <= lengths[n - 1], "top row too long");
        let mut levels: Vec<Vec<i64>> = lengths.iter().map(|&l| vec![0; l]).collect();
        for (i, &v) in top.iter().enumerate() {
            levels[n - 1][i] = v;
        }
        let coords: Vec<(usize, usize)> =
            (0..n - 1).rev().flat_map(|k| (0..lengths[k]).map(move |i| (k, i))).collect();
        let mut it = Self { lengths, levels, coords, done: false };
        it.reset_from(0);
        it
    }

    fn bounds(&self, (k, i): (usize, usize)) -> (i64, i64) {
        let up = &self.levels[k + 1];
        let hi = up.get(i).copied().unwrap_or(0);
        let lo = up.get(i + 1).copied().unwrap_or(0);
        (lo, hi)
    }

    fn reset_from(&mut self, start: usize) {
        for p in start..self.coords.len() {
            let (k, i) = self.coords[p];
            let (lo, _) = self.bounds((k, i));
            self.levels[k][i] = lo;
        }
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }
}

impl Iterator for InterlacingIter {
    type Item = Vec<Vec<i64>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let current = self.levels.clone();
        self.done = true;
        for p in (0..self.coords.len()).rev() {
            let (k, i) = self.coords[p];
            let (_, hi) = self.bounds((k, i));
            if self.levels[k][i] < hi {
                self.levels[k][i] += 1;
                self.reset_from(p + 1);
                self.done = false;
                break;
            }
        }
        Some(current)
    }
}

/// Every symplectic pattern with `N` levels and top row `shape`.
pub fn enumerate_patterns(shape: &Partition, n_levels: usize) -> impl Iterator<Item = GTPattern> {
    assert!(n_levels >= 1, "need at least one level");
    assert!(shape.len() <= level_len(n_levels), "shape {shape} too long for {n_levels} levels");
    let lengths = (1..=n_levels).map(level_len).collect();
    InterlacingIter::new(shape.parts(), lengths).map(|levels| GTPattern { levels })
}

/// A type-A Gelfand-Tsetlin pattern with `z^k ∈ ℤ^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GTPatternA {
    levels: Vec<Vec<i64>>,
}

impl GTPatternA {
    pub fn levels(&self) -> &[Vec<i64>] {
        &self.levels
    }

    pub fn validate(&self) -> bool {
        self.levels.iter().enumerate().all(|(k, z)| z.len() == k + 1)
            && self.levels.windows(2).all(|w| {
                let (lo, hi) = (&w[0], &w[1]);
                (0..lo.len()).all(|i| hi[i + 1] <= lo[i] && lo[i] <= hi[i])
            })
    }
}

/// Every type-A pattern with top row `shape` (padded to `N` entries).
pub fn enumerate_patterns_a(shape: &Partition, n_levels: usize) -> impl Iterator<Item = GTPatternA> {
    let top = shape.padded(n_levels);
    InterlacingIter::new(&top, (1..=n_levels).collect()).map(|levels| GTPatternA { levels })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[i64]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn interlacing_examples() {
        assert!(interlaces(&p(&[4, 0]), &p(&[4, 3])));
        assert!(interlaces(&p(&[]), &p(&[5])));
        assert!(!interlaces(&p(&[3]), &p(&[2, 1])));
    }

    #[test]
    fn transpose_example_and_involution() {
        assert_eq!(p(&[3, 2, 2, 1]).transpose(), p(&[4, 3, 1]));
        for lam in partitions_up_to(10, 10) {
            assert_eq!(lam.transpose().transpose(), lam);
        }
    }

    #[test]
    fn strips_match_interlacing() {
        let all = partitions_up_to(6, 6);
        for lam in &all {
            assert!(is_horizontal_strip(lam, lam));
            for mu in &all {
                assert_eq!(interlaces(mu, lam), is_horizontal_strip(lam, mu), "{mu} {lam}");
            }
        }
    }

    #[test]
    fn dominance() {
        assert!(p(&[3, 1]).dominates(&p(&[2, 2])));
        assert!(!p(&[2, 2]).dominates(&p(&[3, 1])));
        assert!(!p(&[3]).dominates(&p(&[2])));
    }

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (0..8).map(|w| partitions_of(w, 8).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15]);
        assert_eq!(partitions_of(5, 2).len(), 3);
    }

    #[test]
    fn tableau_validation_example() {
        // Shape (4,3) with a 1~ in row 2 breaks S3.
        let bad = SymplecticTableau::from_codes(&[&[1, 1, 2, 3], &[2, 3, 3]], 2);
        assert!(matches!(bad, Err(Error::InvalidTableau(m)) if m.starts_with("S3")));
        assert!(SymplecticTableau::from_codes(&[&[1, 1, 2, 3], &[3, 3, 4]], 2).is_ok());
    }

    #[test]
    fn worked_pattern_example() {
        let t = SymplecticTableau::from_codes(&[&[1, 2, 3, 3, 4], &[4, 4]], 2).unwrap();
        let z = tableau_to_pattern(&t, 2).unwrap();
        assert_eq!(z.levels(), &[vec![1], vec![2], vec![4, 0], vec![5, 2]]);
        assert_eq!(pattern_to_tableau(&z).unwrap(), t);
    }

    #[test]
    fn empty_tableau_gives_zero_pattern() {
        let z = tableau_to_pattern(&SymplecticTableau::empty(), 3).unwrap();
        assert_eq!(z, GTPattern::zero(6));
    }

    #[test]
    fn round_trip_shape_21() {
        let ts = enumerate_tableaux(&p(&[2, 1]), 2);
        assert!(!ts.is_empty());
        for t in ts {
            let z = tableau_to_pattern(&t, 2).unwrap();
            assert_eq!(pattern_to_tableau(&z).unwrap(), t);
        }
    }

    #[test]
    fn pattern_enumeration_examples() {
        assert_eq!(enumerate_patterns(&p(&[2]), 2).count(), 3);
        assert_eq!(enumerate_patterns(&p(&[1]), 4).count(), 4);
        assert_eq!(enumerate_patterns(&p(&[]), 5).count(), 1);
    }

    #[test]
    fn pattern_count_equals_tableau_count() {
        for n in 1..=3u32 {
            for lam in partitions_up_to(5, n as usize) {
                let a = enumerate_patterns(&lam, 2 * n as usize).count();
                let b = enumerate_tableaux(&lam, n).len();
                assert_eq!(a, b, "n={n} {lam}");
            }
        }
    }

    #[test]
    fn enumerated_patterns_are_valid_and_distinct() {
        let lam = p(&[3, 1, 1]);
        let all: Vec<GTPattern> = enumerate_patterns(&lam, 6).collect();
        let set: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), all.len());
        for z in &all {
            z.validate().unwrap();
            assert_eq!(z.top(), lam.padded(3).as_slice());
        }
    }

    #[test]
    fn type_a_counts() {
        // Number of SSYT of shape (2,1) in 3 letters is 8.
        assert_eq!(enumerate_patterns_a(&p(&[2, 1]), 3).count(), 8);
        assert!(enumerate_patterns_a(&p(&[2, 1]), 3).all(|z| z.validate()));
    }

    #[test]
    fn letters() {
        assert_eq!(Letter::parse("3~").unwrap(), Letter(6));
        assert_eq!(Letter::parse("2").unwrap(), Letter(3));
        assert_eq!(Letter(6).to_string(), "3~");
        assert!(Letter::parse("0").is_err());
    }
}
