//! The acceptance checks, with their tolerances fixed here.
//!
//! `sympgt verify all` and the `acceptance` test target both run [`run_all`].

use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{q_pochhammer, rat, Count, QSeriesCtx, Rational};
use crate::berele::{injectivity_check, process_word};
use crate::branching::{
    default_t0_ladder, ladder_distances, leading_coefficients_match, random_two_strip_pair, t0_independence_check,
    BranchingPair,
};
use crate::characters::{
    pieri_apply, qwhittaker_pattern_sum, qwhittaker_recursion, symplectic_schur_tableaux, symplectic_schur_weyl,
    WhittakerCache,
};
use crate::combinatorics::{parse_word, partitions_up_to, Partition};
use crate::continuous::{
    phi2_report, phi_eigen_residual, polymer_identity_check, verify_kernels, PhiSettings, PolymerConfig,
};
use crate::dynamics::{
    build_generator, random_helper_probes, simulate, total_variation, verify_helper, Helper, Model, Params,
    SimulationConfig, SliceWeights, Start,
};
use crate::limits::convergence_table;
use crate::spectral::{
    gram_schmidt_koornwinder, koornwinder_apply, law, moments, orthogonality_matrix, CoefficientMethod,
    MomentSettings, PolynomialFamily, TorusQuadrature,
};
use crate::Result;

/// How much of each sweep to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Full,
    /// Smaller exact sweeps; statistical checks keep their sample sizes.
    Quick,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Result of one criterion.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: &'static str,
    pub title: &'static str,
    pub status: Status,
    /// Hard criteria decide the exit status; soft ones are reported only.
    pub hard: bool,
    pub tolerance: String,
    pub observed: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match (self.status, self.hard) {
            (Status::Pass, _) => "PASS",
            (Status::Fail, true) => "FAIL",
            (Status::Fail, false) => "SOFT-FAIL",
        };
        write!(
            f,
            "[{tag}] {:<4} {} | tol {} | {} | {:.1}s",
            self.id, self.title, self.tolerance, self.observed, self.seconds
        )
    }
}

struct Check {
    id: &'static str,
    title: &'static str,
    hard: bool,
    tolerance: String,
}

impl Check {
    fn new(id: &'static str, title: &'static str, hard: bool, tolerance: impl Into<String>) -> Self {
        Self { id, title, hard, tolerance: tolerance.into() }
    }

    fn run(self, body: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
        let start = Instant::now();
        let (ok, observed) = match body() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        Outcome {
            id: self.id,
            title: self.title,
            status: if ok { Status::Pass } else { Status::Fail },
            hard: self.hard,
            tolerance: self.tolerance,
            observed,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// Five rational points with all coordinates above 1 and pairwise distinct.
fn rational_points(n: usize, count: usize) -> Vec<Vec<Rational>> {
    (0..count as i64)
        .map(|j| (0..n as i64).map(|i| rat(7 + 5 * i + 3 * j, 4 + 2 * j)).collect())
        .collect()
}

fn exact_ctx(p: i64, q: i64) -> Result<QSeriesCtx<Rational>> {
    QSeriesCtx::exact(rat(p, q))
}

pub fn character_equality(scale: Scale) -> Outcome {
    let max_w = if scale == Scale::Quick { 4 } else { 6 };
    Check::new("1", "Weyl formula = tableau sum", true, "exact").run(|| {
        let mut checked = 0;
        let mut bad = Vec::new();
        for n in 1..=3 {
            let points = rational_points(n, 5);
            for lam in partitions_up_to(max_w, n) {
                let poly = symplectic_schur_tableaux(n, &lam);
                for pt in &points {
                    if symplectic_schur_weyl(n, &lam, pt)? != poly.eval(pt) {
                        bad.push(format!("n={n} {lam}"));
                    }
                    checked += 1;
                }
            }
        }
        Ok((bad.is_empty(), format!("{checked} evaluations, |λ| ≤ {max_w}, mismatches {bad:?}")))
    })
}

pub fn whittaker_two_routes(scale: Scale) -> Outcome {
    let max_w = if scale == Scale::Quick { 3 } else { 5 };
    Check::new("2", "pattern sum = recursion", true, "exact").run(|| {
        let mut checked = 0;
        let mut bad = Vec::new();
        for (p, d) in [(1, 3), (2, 5)] {
            let ctx = exact_ctx(p, d)?;
            for n in 2..=3 {
                for lam in partitions_up_to(max_w, n) {
                    if qwhittaker_pattern_sum(2 * n, &lam, &ctx) != qwhittaker_recursion(n, &lam, &ctx) {
                        bad.push(format!("q={p}/{d} n={n} {lam}"));
                    }
                    checked += 1;
                }
            }
        }
        Ok((bad.is_empty(), format!("{checked} polynomials, |λ| ≤ {max_w}, mismatches {bad:?}")))
    })
}

pub fn q_zero_degeneration(scale: Scale) -> Outcome {
    let max_w = if scale == Scale::Quick { 3 } else { 5 };
    Check::new("3", "q = 0 gives symplectic Schur", true, "exact").run(|| {
        let ctx = QSeriesCtx::exact(Rational::zero())?;
        let mut checked = 0;
        let mut bad = Vec::new();
        for n in 2..=3 {
            for lam in partitions_up_to(max_w, n) {
                if qwhittaker_recursion(n, &lam, &ctx) != symplectic_schur_tableaux(n, &lam) {
                    bad.push(format!("n={n} {lam}"));
                }
                checked += 1;
            }
        }
        Ok((bad.is_empty(), format!("{checked} shapes, mismatches {bad:?}")))
    })
}

pub fn pieri_identity(scale: Scale) -> Outcome {
    let max_w = if scale == Scale::Quick { 3 } else { 5 };
    Check::new("4", "Pieri identity", true, "exact").run(|| {
        let ctx = exact_ctx(1, 3)?;
        let cache = WhittakerCache::new(ctx.clone());
        let mut checked = 0;
        let mut bad = Vec::new();
        for n in 1..=3 {
            for a in rational_points(n, 3) {
                let e1 = a.iter().fold(Rational::zero(), |s, x| s + x + x.recip());
                let value = |v: &[i64]| match Partition::new(v.to_vec()) {
                    Ok(p) => cache.get(n, &p).eval(&a),
                    Err(_) => Rational::zero(),
                };
                for z in partitions_up_to(max_w, n) {
                    let zv = z.padded(n);
                    if pieri_apply(n, &zv, &ctx, &value) != e1.clone() * value(&zv) {
                        bad.push(format!("n={n} {z}"));
                    }
                    checked += 1;
                }
            }
        }
        let mut conservative = true;
        for n_levels in [2, 4] {
            let params = Params::new(vec![rat(2, 1), rat(3, 5)][..n_levels / 2].to_vec(), ctx.clone())?;
            let mut w = SliceWeights::new(params);
            conservative &= build_generator(n_levels, &mut w, max_w).interior_rows_conservative();
        }
        Ok((
            bad.is_empty() && conservative,
            format!("{checked} identities, generator rows conservative: {conservative}, mismatches {bad:?}"),
        ))
    })
}

pub fn koornwinder_eigenrelation() -> Outcome {
    Check::new("5", "Koornwinder eigenrelation", true, "rel ≤ 1e-10").run(|| {
        let q = rat(2, 5);
        let qf: f64 = 0.4;
        let mut worst: f64 = 0.0;
        for n in 1..=2 {
            let family = PolynomialFamily::new(n, &q)?;
            let points: Vec<Vec<Complex64>> = (0..5)
                .map(|j| {
                    (0..n)
                        .map(|i| Complex64::from_polar(0.6 + 0.17 * j as f64 + 0.31 * i as f64, 0.4 + 0.9 * j as f64 + 1.7 * i as f64))
                        .collect()
                })
                .collect();
            for lam in partitions_up_to(4, n) {
                let p = family.float(&lam);
                let f = |b: &[Complex64]| p.eval(b);
                let eig = qf.powi(-(lam.get(0) as i32)) - 1.0;
                for a in &points {
                    let lhs = koornwinder_apply(&f, a, qf, 1)?;
                    let rhs = p.eval(a) * eig;
                    let scale = p.eval(a).norm();
                    worst = worst.max((lhs - rhs).norm() / scale);
                }
            }
        }
        Ok((worst <= 1e-10, format!("max relative residual {worst:.2e}")))
    })
}

fn pair(lambda: &str, nu: &str, n: usize) -> Result<BranchingPair> {
    BranchingPair::new(Partition::parse(lambda)?, Partition::parse(nu)?, n)
}

pub fn branching_linear_decay() -> Outcome {
    Check::new("6a", "branching: single-gap pair decays linearly in t0", true, "ratios in [0.05, 0.2]").run(|| {
        let ctx = exact_ctx(2, 5)?;
        let rep = ladder_distances(&pair("4,3,1", "4", 3)?, &ctx, &default_t0_ladder())?;
        let ok = !rep.ratios.is_empty() && rep.ratios.iter().all(|r| (0.05..=0.2).contains(r));
        Ok((ok, format!("distances {:?}, ratios {:?}", rep.distances, rep.ratios)))
    })
}

pub fn branching_separated_gaps() -> Outcome {
    Check::new("6b", "branching: separated-gap pair is t0-independent", true, "exact").run(|| {
        let ctx = exact_ctx(2, 5)?;
        let values = [rat(3, 10), rat(7, 10), rat(13, 10)];
        let (independent, equal) = t0_independence_check(&pair("4,4,3,1,1", "3,3,2,1", 5)?, &ctx, &values)?;
        Ok((independent && equal, format!("t0-independent {independent}, equals kernel {equal}")))
    })
}

pub fn branching_leading_terms() -> Outcome {
    Check::new("6c", "branching: leading coefficients equal c(λ,ν;q)", true, "exact, 100 pairs").run(|| {
        let ctx = exact_ctx(2, 5)?;
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mut bad = 0;
        for _ in 0..100 {
            let n = rng.gen_range(1..=5);
            let p = random_two_strip_pair(&mut rng, n, 8);
            if !leading_coefficients_match(&p, &ctx) {
                bad += 1;
            }
        }
        Ok((bad == 0, format!("{bad} of 100 random pairs disagree (seed 61)")))
    })
}

const WORD_EXAMPLE: &str = "3~ 2 1~ 3~ 1 2 1";
const WORD_TABLEAU: &str = "1 2\n2 3~\n3~";
const WORD_SHAPES: &str = "() (1) (1,1) (1,1,1) (2,1,1) (2,1) (2,2) (2,2,1)";

pub fn berele_insertion() -> Outcome {
    Check::new("7", "Berele insertion", true, "exact").run(|| {
        let rec = process_word(&parse_word(WORD_EXAMPLE)?, 3)?;
        let shapes: Vec<String> = rec.shapes.iter().map(|s| s.to_string()).collect();
        let example = rec.tableau.to_string() == WORD_TABLEAU && shapes.join(" ") == WORD_SHAPES;
        let r2 = injectivity_check(2, 5);
        let r3 = injectivity_check(3, 4);
        let ok = example && [&r2, &r3].iter().all(|r| r.all_valid && r.injective());
        Ok((
            ok,
            format!(
                "example {example}; rank 2: {} words, {} outputs; rank 3: {} words, {} outputs; valid {}",
                r2.words,
                r2.distinct_outputs,
                r3.words,
                r3.distinct_outputs,
                r2.all_valid && r3.all_valid
            ),
        ))
    })
}

pub fn intertwining(scale: Scale) -> Outcome {
    let count = if scale == Scale::Quick { 8 } else { 20 };
    Check::new("8", "helper intertwinings", true, format!("exact, {count} probes each")).run(|| {
        let ctx = exact_ctx(1, 3)?;
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let mut lines = Vec::new();
        let mut ok = true;
        for (helper, a) in [
            (Helper::Berele { n: 2 }, vec![rat(2, 1), rat(5, 1)]),
            (Helper::Randomized { n_levels: 4 }, vec![rat(2, 1), rat(5, 1)]),
            (Helper::Randomized { n_levels: 5 }, vec![rat(2, 1), rat(5, 1), rat(3, 2)]),
        ] {
            let mut w = SliceWeights::new(Params::new(a, ctx.clone())?);
            let probes = random_helper_probes(helper, count, 3, &mut rng);
            let rep = verify_helper(helper, &mut w, &probes);
            let equal = rep.probes.iter().filter(|p| p.equal).count();
            ok &= rep.all_equal;
            lines.push(format!("{}: {equal}/{}", rep.relation, rep.probes.len()));
        }
        Ok((ok, lines.join("; ")))
    })
}

fn law_map(entries: impl IntoIterator<Item = (Vec<i64>, f64)>) -> std::collections::HashMap<Vec<i64>, f64> {
    entries.into_iter().collect()
}

/// Seed of the criterion-9 simulation.
pub const SIMULATION_SEED: u64 = 2024;

pub fn simulation_vs_law() -> Vec<Outcome> {
    let t = 2.0;
    let cfg = SimulationConfig {
        model: Model::Berele,
        n_levels: 2,
        a: vec![1.0],
        q: 0.5,
        horizon: t,
        replicas: 100_000,
        seed: SIMULATION_SEED,
        start: Start::Origin,
        log_first: false,
    };
    let start = Instant::now();
    let empirical = simulate(&cfg).map(|r| r.bottom_law());
    let sim_seconds = start.elapsed().as_secs_f64();
    let mut out = Vec::new();
    let first = Check::new("9i", "simulation vs exp(tQ) on C = 40", true, "TV ≤ 0.01").run(|| {
        let emp = empirical.clone()?;
        let ctx = QSeriesCtx::numeric(0.5, crate::algebra::DEFAULT_TRUNCATION)?;
        let mut w = SliceWeights::new(Params::new(vec![1.0], ctx)?);
        let g = build_generator(2, &mut w, 40);
        let (p, lost) = g.transient_law(&[0], t)?;
        let exact = law_map(g.states.iter().cloned().zip(p));
        let tv = total_variation(&emp, &exact);
        Ok((tv <= 0.01, format!("TV {tv:.4}, leaked mass {lost:.1e}, 1e5 replicas, seed {SIMULATION_SEED}")))
    });
    out.push(first);
    let second = Check::new("9ii", "simulation vs torus-quadrature law", true, "TV ≤ 0.02").run(|| {
        let emp = empirical.clone()?;
        let family = PolynomialFamily::new(1, &rat(1, 2))?;
        let quad = TorusQuadrature::plain(1, 4096, 0.5)?;
        let table = law(&family, t, &[1.0], 40, CoefficientMethod::Quadrature(&quad), 1e-6)?;
        let tv = total_variation(&emp, &law_map(table.entries.clone()));
        Ok((tv <= 0.02, format!("TV {tv:.4}, mass defect {:.1e}", table.mass_defect)))
    });
    out.push(second);
    for o in &mut out {
        o.seconds += sim_seconds / 2.0;
    }
    out
}

pub fn moments_three_way() -> Outcome {
    Check::new("10", "moments: direct / operator / contour", true, "pairwise rel ≤ 1e-6").run(|| {
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        for k in 1..=2 {
            let m = moments(1, k, 1.0, &[1.3], &rat(1, 2), &MomentSettings::default())?;
            worst = worst.max(m.max_relative_spread());
            parts.push(format!("k={k}: {:.10} / {:.10} / {:.10}", m.direct, m.operator, m.contour));
        }
        Ok((worst <= 1e-6, format!("{}; max spread {worst:.1e}", parts.join("; "))))
    })
}

pub fn orthogonality() -> Vec<Outcome> {
    let one = Check::new("11a", "orthogonality n = 1 (4096 nodes)", true, "abs ≤ 1e-8").run(|| {
        let q = rat(2, 5);
        let family = PolynomialFamily::new(1, &q)?;
        let quad = TorusQuadrature::plain(1, 4096, 0.4)?;
        let ctx = QSeriesCtx::numeric(0.4, crate::algebra::DEFAULT_TRUNCATION)?;
        let inf = q_pochhammer(&ctx, &0.4, Count::Infinite)?;
        let polys: Vec<_> = (0..=4).map(|k| family.float(&Partition::new(vec![k]).expect("one part"))).collect();
        let mut worst: f64 = 0.0;
        for j in 0..=4 {
            for k in 0..=4 {
                let v = quad.inner_product(|a| polys[j].eval(a), |a| polys[k].eval(a)).re;
                let expect = if j == k { q_pochhammer(&ctx, &0.4, Count::Finite(j))? / inf } else { 0.0 };
                worst = worst.max((v - expect).abs());
            }
        }
        Ok((worst <= 1e-8, format!("max deviation {worst:.1e}")))
    });
    let two = Check::new("11b", "orthogonality n = 2, |λ| ≤ 2", true, "abs ≤ 1e-6").run(|| {
        let family = PolynomialFamily::new(2, &rat(2, 5))?;
        let quad = TorusQuadrature::plain(2, 64, 0.4)?;
        let parts = partitions_up_to(2, 2);
        let g = orthogonality_matrix(&family, &parts, &quad);
        let mut worst: f64 = 0.0;
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        Ok((worst <= 1e-6, format!("{} shapes, max deviation {worst:.1e}", parts.len())))
    });
    vec![one, two]
}

pub fn scaling_limit() -> Outcome {
    Check::new("12", "scaling limit to the so(3) Whittaker function", true, "strictly decreasing, final ≤ 5e-2")
        .run(|| {
            let table = convergence_table(0.7, &[-1.0, 0.0, 1.0, 2.0], &[0.1, 0.05, 0.02])?;
            let errs = table.max_errors();
            let last = errs.last().map(|e| e.1).unwrap_or(f64::NAN);
            let ok = table.strictly_decreasing() && last <= 5e-2;
            let shown: Vec<String> = errs.iter().map(|(e, v)| format!("ε={e}: {v:.4}")).collect();
            Ok((ok, shown.join(", ")))
        })
}

fn phi_grid() -> Vec<f64> {
    (0..=10).map(|i| -2.0 + 0.5 * i as f64).collect()
}

pub fn continuous_identities() -> Vec<Outcome> {
    let lambda = 0.5;
    let literal = Check::new("13a", "Φ(2) vs 2K_{2λ}(√2 e^{-x/2}) on [-2,3]", true, "rel ≤ 1e-6").run(|| {
        let rep = phi2_report(lambda, &phi_grid())?;
        Ok((
            rep.shifted_whittaker_gap <= 1e-6,
            format!(
                "max rel gap {:.3e}; against 2^λ·2K_{{2λ}}(2√2 e^{{-x/2}}) the gap is {:.1e}",
                rep.shifted_whittaker_gap, rep.closed_form_gap
            ),
        ))
    });
    let kernels = Check::new("13b", "kernel intertwining residuals, n ≤ 2", true, "≤ 1e-6").run(|| {
        let mut worst: f64 = 0.0;
        let mut points = 0;
        for n in 1..=2 {
            for theta in [0.5, 1.3] {
                let r = verify_kernels(n, theta)?;
                worst = worst.max(r.nn_max).max(r.nnm1_max);
                points += r.points;
            }
        }
        Ok((worst <= 1e-6, format!("max residual {worst:.1e} over {points} points")))
    });
    let eigen = Check::new("13c", "ℋ^B Φ(2) eigen-residual", true, "≤ 1e-4").run(|| {
        let mut worst: f64 = 0.0;
        for x in [-1.5, 0.0, 1.0, 2.5] {
            worst = worst.max(phi_eigen_residual(2, &[lambda], &[x], PhiSettings::default())?);
        }
        Ok((worst <= 1e-4, format!("max relative residual {worst:.1e}")))
    });
    vec![literal, kernels, eigen]
}

/// Seed of the polymer comparison.
pub const POLYMER_SEED: u64 = 1414;

pub fn polymer_identity() -> Vec<Outcome> {
    [(1usize, true, "14a"), (2, false, "14b")]
        .into_iter()
        .map(|(n, hard, id)| {
            let title = if n == 1 { "polymer identity N = 1" } else { "polymer identity N = 2" };
            Check::new(id, title, hard, "KS ≤ 0.02").run(|| {
                let rep = polymer_identity_check(&PolymerConfig {
                    n_levels: n,
                    lambda: vec![0.5],
                    t: 1.0,
                    steps: 200,
                    replicas: 20_000,
                    seed: POLYMER_SEED,
                })?;
                Ok((
                    rep.ks <= 0.02,
                    format!(
                        "KS {:.4} (95% critical {:.4}), means {:.4} / {:.4}, seed {POLYMER_SEED}",
                        rep.ks, rep.ks_critical_95, rep.mean_z, rep.mean_rhs
                    ),
                ))
            })
        })
        .collect()
}

pub fn gram_schmidt_probe() -> Outcome {
    Check::new("15", "Gram–Schmidt at t0 = 1e-3 vs recursion, n = 2", false, "expected ≲ 5e-3").run(|| {
        let family = PolynomialFamily::new(2, &rat(2, 5))?;
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        for lam in ["1", "1,1", "2"] {
            let lam = Partition::parse(lam)?;
            let gs = gram_schmidt_koornwinder(2, &lam, 0.4, 1e-3, 64)?;
            let d = gs.distance_to(&family.exact(&lam), 2);
            worst = worst.max(d);
            parts.push(format!("{lam}: {d:.1e}"));
        }
        Ok((worst <= 5e-3, parts.join(", ")))
    })
}

/// Every criterion in order.
pub fn run_all(scale: Scale) -> Vec<Outcome> {
    let mut out = vec![
        character_equality(scale),
        whittaker_two_routes(scale),
        q_zero_degeneration(scale),
        pieri_identity(scale),
        koornwinder_eigenrelation(),
        branching_linear_decay(),
        branching_separated_gaps(),
        branching_leading_terms(),
        berele_insertion(),
        intertwining(scale),
    ];
    out.extend(simulation_vs_law());
    out.push(moments_three_way());
    out.extend(orthogonality());
    out.push(scaling_limit());
    out.extend(continuous_identities());
    out.extend(polymer_identity());
    out.push(gram_schmidt_probe());
    out
}

/// Hard criteria that failed.
pub fn hard_failures(outcomes: &[Outcome]) -> Vec<&Outcome> {
    outcomes.iter().filter(|o| o.hard && !o.passed()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn points_are_generic() {
        for pt in rational_points(3, 5) {
            assert!(pt.iter().all(|x| *x > Rational::one()));
            assert!(pt.windows(2).all(|w| w[0] != w[1]));
        }
    }

    #[test]
    fn outcome_line_mentions_status() {
        let o = Check::new("x", "demo", false, "none").run(|| Ok((false, "v".into())));
        assert!(o.to_string().starts_with("[SOFT-FAIL] x"));
        let e = Check::new("y", "demo", true, "none").run(|| Err(crate::Error::Domain("bad".into())));
        assert!(!e.passed() && e.observed.contains("bad"));
    }
}
