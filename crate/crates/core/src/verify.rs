//! The cross-oracle and invariant suite behind `qwalk verify`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freeprob::{
    asymptotic_law, catalan, delta_pair, enumerate_nc, enumerate_set_partitions, free_poisson_moment, kreweras,
    law_moment, predicted_moment,
};
use crate::gamma::{
    faithfulness_probe_with, generator_matrix_with, rep_pi_k_with, theta, verify_model_rep_with, walk_moment,
    GammaContext, GeneratorLetter, ProbeSpec, ThetaFn, WalkMethod,
};
use crate::groups::{fourier_matrix, AbelianGroup};
use crate::hadamard::{deformed_tensor, generic_q, validate_hadamard, HadamardMatrix, PhaseMatrix, Side};
use crate::linalg::{eigenvalues, max_abs_diff, CMat};
use crate::models::{
    check_projective, deform, dual, fourier_model, from_hadamard, verify_wreath_structure, MagicModel,
};
use crate::moments::{check_positive, haar_moment, reciprocity, transfer_matrix, ExponentWord, HaarMethod, Limits};
use crate::montecarlo::mc_moment;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(Error::InvalidArgument(format!("unknown level {other:?}"))),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Quick => "quick",
            Level::Full => "full",
        })
    }
}

#[derive(Clone, Copy)]
pub struct SuiteOptions {
    pub level: Level,
    pub seed: u64,
    /// θ used by the representation checks; swapped out by mutation tests.
    pub theta: ThetaFn,
}

impl SuiteOptions {
    pub fn new(level: Level) -> Self {
        Self {
            level,
            seed: 2024,
            theta,
        }
    }
}

/// `θ` with the group differences replaced by sums, used as a planted fault.
pub fn theta_sign_flipped(q: &PhaseMatrix, i: usize, c: usize, k: usize, e: usize) -> Complex64 {
    let (x, y) = (q.x(), q.y());
    let (ik, ec) = (x.add_idx(i, k), y.add_idx(e, c));
    q.get(i, ec) * q.get(ik, e) / (q.get(i, e) * q.get(ik, ec))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub module: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub level: Level,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
    pub failures: Vec<String>,
    pub wall_time_ms: f64,
}

type Outcome = Result<(bool, String)>;

struct Runner {
    checks: Vec<CheckResult>,
}

impl Runner {
    fn run(&mut self, module: &str, name: &str, f: impl FnOnce() -> Outcome) {
        let started = Instant::now();
        let (pass, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        self.checks.push(CheckResult {
            module: module.to_string(),
            name: name.to_string(),
            pass,
            detail,
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }
}

fn g(s: &str) -> AbelianGroup {
    s.parse().expect("static descriptor")
}

pub fn verify_suite(level: Level) -> SuiteReport {
    verify_suite_with(&SuiteOptions::new(level))
}

pub fn verify_suite_with(opts: &SuiteOptions) -> SuiteReport {
    let started = Instant::now();
    let full = opts.level == Level::Full;
    let lim = Limits::default();
    let mut r = Runner { checks: Vec::new() };

    // groups
    r.run("groups", "character identities", || {
        let mut groups = vec![g("Z4"), g("Z2xZ3"), g("Z2xZ2xZ2")];
        if full {
            groups.extend([g("Z3xZ5"), g("Z6"), g("Z2xZ4")]);
        }
        let mut worst = 0.0f64;
        for x in &groups {
            let f = fourier_matrix(x);
            let n = x.size();
            for a in 0..n {
                for b in 0..n {
                    worst = worst.max((f[(x.neg_idx(a), b)] - f[(a, b)].conj()).norm());
                    for c in 0..n {
                        worst = worst.max((f[(x.add_idx(a, b), c)] - f[(a, c)] * f[(b, c)]).norm());
                        worst = worst.max((f[(a, x.add_idx(b, c))] - f[(a, b)] * f[(a, c)]).norm());
                    }
                }
            }
        }
        Ok((worst <= 1e-12, format!("max defect {worst:.2e}")))
    });
    r.run("groups", "F F* = |X| I", || {
        let mut worst = 0.0f64;
        for x in [g("Z2"), g("Z5"), g("Z2xZ3"), g("Z3xZ3")] {
            let f = fourier_matrix(&x);
            let n = x.size();
            worst = worst.max(max_abs_diff(
                &(&f * f.adjoint()),
                &(CMat::identity(n, n) * Complex64::new(n as f64, 0.0)),
            ));
        }
        Ok((worst <= 1e-9, format!("max defect {worst:.2e}")))
    });

    // hadamard
    r.run("hadamard", "deformed tensor products are Hadamard", || {
        let pool = [g("Z2"), g("Z3"), g("Z4"), g("Z2xZ2")];
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut worst = 0.0f64;
        let count = 50;
        for _ in 0..count {
            let x = &pool[rng.random_range(0..pool.len())];
            let y = &pool[rng.random_range(0..pool.len())];
            let q = generic_q(x, y, rng.random());
            let side = if rng.random() { Side::Right } else { Side::Left };
            let h = deformed_tensor(&HadamardMatrix::fourier(x), &HadamardMatrix::fourier(y), &q, side)?;
            let rep = validate_hadamard(h.entries(), 1e-9)?;
            worst = worst.max(rep.max_modulus_defect).max(rep.max_orthogonality_defect);
        }
        Ok((worst <= 1e-9, format!("{count} products, max defect {worst:.2e}")))
    });
    r.run("hadamard", "dephasing preserves the Hadamard property", || {
        let (x, y) = (g("Z3"), g("Z2xZ2"));
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 1);
        let angles: Vec<Vec<f64>> = (0..x.size())
            .map(|_| (0..y.size()).map(|_| rng.random()).collect())
            .collect();
        let raw = PhaseMatrix::from_turns(x.clone(), y.clone(), &angles, false)?;
        // Q_{ic} / (Q_{i0} Q_{0c} / Q_{00}) has first row and column exactly 1
        let dephased_angles: Vec<Vec<f64>> = (0..x.size())
            .map(|i| {
                (0..y.size())
                    .map(|c| {
                        if i == 0 || c == 0 {
                            0.0
                        } else {
                            angles[i][c] - angles[i][0] - angles[0][c] + angles[0][0]
                        }
                    })
                    .collect()
            })
            .collect();
        let dephased = PhaseMatrix::from_turns(x.clone(), y.clone(), &dephased_angles, true)?;
        let (h, k) = (HadamardMatrix::fourier(&x), HadamardMatrix::fourier(&y));
        for q in [&raw, &dephased] {
            for side in [Side::Right, Side::Left] {
                deformed_tensor(&h, &k, q, side)?;
            }
        }
        Ok((true, "raw and dephased Q both give Hadamard products".into()))
    });

    // models
    r.run("models", "from_hadamard(F_X) = fourier_model(X), rank-1 blocks", || {
        let mut worst = 0.0f64;
        let mut max_rank = 0;
        for x in [g("Z2"), g("Z3"), g("Z4"), g("Z5"), g("Z2xZ2")] {
            let a = from_hadamard(&HadamardMatrix::fourier(&x))?;
            worst = worst.max(a.max_entry_diff(&fourier_model(&x))?);
            max_rank = max_rank.max(a.max_block_rank(1e-8));
        }
        Ok((
            worst <= 1e-12 && max_rank == 1,
            format!("max diff {worst:.2e}, max block rank {max_rank}"),
        ))
    });
    let seeds = if full { 20 } else { 5 };
    r.run("models", "deformed models are projective", || {
        let mut worst = 0.0f64;
        for (a, b) in [("Z2", "Z2"), ("Z2", "Z3")] {
            let (x, y) = (g(a), g(b));
            for s in 0..seeds {
                let q = generic_q(&x, &y, opts.seed + s);
                let w = deform(&fourier_model(&x), &fourier_model(&y), &q, Side::Right)?;
                let (m, d) = check_projective(&w, 1e-9)?;
                worst = worst.max(m.worst()).max(d.worst());
            }
        }
        Ok((worst <= 1e-9, format!("max defect {worst:.2e}")))
    });
    r.run("models", "dual is an involution and swaps deformation sides", || {
        let mut worst = 0.0f64;
        for (a, b) in [("Z2", "Z2"), ("Z2", "Z3"), ("Z3", "Z2")] {
            let (x, y) = (g(a), g(b));
            let (u, v) = (fourier_model(&x), fourier_model(&y));
            let (ud, vd) = (dual(&u)?, dual(&v)?);
            for s in 0..seeds {
                let q = generic_q(&x, &y, opts.seed + 100 + s);
                let w = deform(&u, &v, &q, Side::Right)?;
                let wl = deform(&u, &v, &q, Side::Left)?;
                worst = worst.max(dual(&dual(&w)?)?.max_entry_diff(&w)?);
                worst = worst.max(dual(&w)?.max_entry_diff(&deform(&ud, &vd, &q, Side::Left)?)?);
                worst = worst.max(dual(&wl)?.max_entry_diff(&deform(&ud, &vd, &q, Side::Right)?)?);
            }
        }
        Ok((worst <= 1e-12, format!("max diff {worst:.2e}")))
    });
    r.run("models", "wreath structure sums", || {
        let (x, y) = (g("Z2"), g("Z3"));
        let w = deform(
            &fourier_model(&x),
            &fourier_model(&y),
            &generic_q(&x, &y, opts.seed),
            Side::Right,
        )?;
        let rep = verify_wreath_structure(&w, &x, &y, 1e-9)?;
        let n = x.size() * y.size();
        let perm: Vec<usize> = (0..n).map(|k| (k + 1) % n).collect();
        let broken = verify_wreath_structure(&w.permute_rows(&perm)?, &x, &y, 1e-9)?;
        Ok((
            rep.pass && !broken.pass,
            format!(
                "deformed: b-dependence {:.2e}, shift dependence {:.2e}; permuted rows detected: {}",
                rep.column_sum_b_dependence, rep.row_sum_shift_dependence, !broken.pass
            ),
        ))
    });

    // moments
    let builtin = builtin_models(opts.seed);
    r.run("moments", "transfer spectra lie in the unit disc", || {
        let mut worst = 0.0f64;
        for (_, model) in &builtin {
            for p in 1..=3 {
                let t = transfer_matrix(model, &ExponentWord::plain(p)?, &lim)?;
                for l in eigenvalues(t.matrix())? {
                    worst = worst.max(l.norm());
                }
            }
        }
        Ok((worst <= 1.0 + 1e-8, format!("max |λ| = {worst:.12}")))
    });
    r.run("moments", "spectral and Cesàro Haar moments agree", || {
        let terms = 2000;
        let mut details = Vec::new();
        let mut pass = true;
        let cases: Vec<(&str, &MagicModel, usize)> = builtin
            .iter()
            .flat_map(|(name, m)| (1..=if full { 3 } else { 2 }).map(move |p| (name.as_str(), m, p)))
            .collect();
        for (name, model, p) in cases {
            let s = haar_moment(model, p, HaarMethod::spectral(), &lim)?.value;
            let c = haar_moment(model, p, HaarMethod::Cesaro { terms }, &lim)?;
            let tol = f64::max(1e-3, 2.0 * c.tail_bound.unwrap_or(0.0));
            let ok = (s - c.value).abs() <= tol;
            pass &= ok;
            if !ok {
                details.push(format!("{name} p={p}: {s} vs {:.6} (tol {tol:.2e})", c.value));
            }
        }
        Ok((
            pass,
            if details.is_empty() {
                "all agree".into()
            } else {
                details.join("; ")
            },
        ))
    });
    r.run("moments", "reciprocity γ_p^r(U) = γ_r^p(U')", || {
        let mut worst = 0.0f64;
        for (_, model) in &builtin {
            for p in 1..=3 {
                for rr in 1..=3 {
                    worst = worst.max(reciprocity(model, p, rr, &lim)?.defect);
                }
            }
        }
        Ok((worst <= 1e-9, format!("max defect {worst:.2e}")))
    });
    r.run("moments", "Fourier models are positive", || {
        let mut worst = f64::INFINITY;
        let mut pass = true;
        for x in [g("Z2"), g("Z3"), g("Z4"), g("Z2xZ2")] {
            let rep = check_positive(&fourier_model(&x), 3, &lim)?;
            pass &= rep.positive;
            worst = worst.min(rep.worst_entry);
        }
        Ok((pass, format!("smallest entry {worst:.2e}")))
    });
    r.run("moments", "spectral Haar moment equals walk count at generic Q", || {
        let mut cases = vec![("Z2", "Z2", 3)];
        if full {
            cases.extend([("Z2", "Z3", 3), ("Z3", "Z3", 2)]);
        }
        let mut worst = 0.0f64;
        for (a, b, pmax) in cases {
            let (x, y) = (g(a), g(b));
            let w = deform(
                &fourier_model(&x),
                &fourier_model(&y),
                &generic_q(&x, &y, opts.seed),
                Side::Right,
            )?;
            for p in 1..=pmax {
                let s = haar_moment(&w, p, HaarMethod::spectral(), &lim)?.value;
                let exact = walk_moment(&x, &y, p, WalkMethod::Multiset, &lim)?.value;
                worst = worst.max((s - exact).abs());
            }
        }
        Ok((worst <= 1e-6, format!("max deviation {worst:.2e}")))
    });

    // gamma
    r.run("gamma", "semidirect associativity and inverses", || {
        let ctx = GammaContext::new(g("Z3"), g("Z4"));
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 2);
        let random_elt = |rng: &mut ChaCha8Rng| {
            let len = rng.random_range(0..6);
            let word: Vec<GeneratorLetter> = (0..len)
                .map(|_| GeneratorLetter::new(rng.random_range(0..3), rng.random_range(0..4)))
                .collect();
            ctx.embed_word(&word)
        };
        let triples = 1000;
        for _ in 0..triples {
            let (a, b, c) = (random_elt(&mut rng)?, random_elt(&mut rng)?, random_elt(&mut rng)?);
            if a.mul(&b)?.mul(&c)? != a.mul(&b.mul(&c)?)? {
                return Ok((false, "associativity failed".into()));
            }
            if !a.mul(&a.inverse()?)?.is_identity() || !a.inverse()?.mul(&a)?.is_identity() {
                return Ok((false, "inverse law failed".into()));
            }
        }
        Ok((true, format!("{triples} triples")))
    });
    r.run("gamma", "multiset and group counts agree exactly", || {
        let mut cases = vec![("Z2", "Z2", 4), ("Z3", "Z2", 3), ("Z2", "Z3", 3)];
        if full {
            cases.extend([("Z3", "Z3", 3), ("Z2xZ2", "Z2", 3), ("Z4", "Z3", 3)]);
        }
        for (a, b, p) in cases {
            let (x, y) = (g(a), g(b));
            let ms = walk_moment(&x, &y, p, WalkMethod::Multiset, &lim)?;
            let gr = walk_moment(&x, &y, p, WalkMethod::Group, &lim)?;
            if ms.count != gr.count * y.size() as u128 {
                return Ok((false, format!("{a},{b},p={p}: {} vs {}", ms.count, gr.count)));
            }
        }
        Ok((true, "counts related by |Y|".into()))
    });
    r.run("gamma", "copies of Y embed as groups; zero-sum words commute", || {
        let (x, y) = (g("Z3"), g("Z4"));
        let ctx = GammaContext::new(x.clone(), y.clone());
        for i in 0..x.size() {
            for c in 0..y.size() {
                for d in 0..y.size() {
                    let prod = ctx
                        .embed(GeneratorLetter::new(i, c))
                        .mul(&ctx.embed(GeneratorLetter::new(i, d)))?;
                    if prod != ctx.embed(GeneratorLetter::new(i, y.add_idx(c, d))) {
                        return Ok((false, format!("copy {i} fails at ({c}, {d})")));
                    }
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 3);
        for _ in 0..200 {
            let (a, b) = (zero_sum_word(&ctx, &mut rng)?, zero_sum_word(&ctx, &mut rng)?);
            if a.mul(&b)? != b.mul(&a)? {
                return Ok((false, "zero-sum words do not commute".into()));
            }
        }
        Ok((true, "exhaustive copies, 200 commuting pairs".into()))
    });
    r.run("gamma", "π^k generators unitary, zero-sum words diagonal", || {
        let (x, y) = (g("Z3"), g("Z3"));
        let q = generic_q(&x, &y, opts.seed);
        let n = y.size();
        let mut worst = 0.0f64;
        for k in 0..x.size() {
            for i in 0..x.size() {
                for c in 0..n {
                    let m = generator_matrix_with(&q, k, GeneratorLetter::new(i, c), opts.theta);
                    worst = worst.max(max_abs_diff(&(m.adjoint() * &m), &CMat::identity(n, n)));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 4);
        for _ in 0..50 {
            let len = rng.random_range(1..5);
            let mut word: Vec<GeneratorLetter> = (0..len)
                .map(|_| GeneratorLetter::new(rng.random_range(0..3), rng.random_range(0..3)))
                .collect();
            let total = word.iter().fold(0, |acc, l| y.add_idx(acc, l.c));
            word.push(GeneratorLetter::new(rng.random_range(0..3), y.neg_idx(total)));
            let k = rng.random_range(0..3);
            let m = rep_pi_k_with(&q, k, &word, opts.theta);
            for a in 0..n {
                for b in 0..n {
                    if a != b {
                        worst = worst.max(m[(a, b)].norm());
                    }
                }
            }
        }
        Ok((worst <= 1e-12, format!("max defect {worst:.2e}")))
    });
    r.run("gamma", "model representation matches θ-shifts", || {
        let mut worst = 0.0f64;
        for (a, b) in [("Z2", "Z2"), ("Z3", "Z3")] {
            let (x, y) = (g(a), g(b));
            let q = generic_q(&x, &y, opts.seed);
            let w = deform(&fourier_model(&x), &fourier_model(&y), &q, Side::Right)?;
            worst = worst.max(verify_model_rep_with(&w, &q, opts.theta)?.max_defect);
        }
        Ok((worst <= 1e-9, format!("max defect {worst:.2e}")))
    });
    r.run("gamma", "faithfulness probe on random T-words", || {
        let mut detail = Vec::new();
        let mut pass = true;
        for (a, b) in [("Z2", "Z2"), ("Z3", "Z3")] {
            let q = generic_q(&g(a), &g(b), opts.seed);
            let spec = ProbeSpec {
                seed: opts.seed,
                ..ProbeSpec::default()
            };
            let rep = faithfulness_probe_with(&q, &spec, opts.theta)?;
            pass &= rep.pass;
            detail.push(format!(
                "{a},{b}: {}/{} detected, relation defect {:.2e}",
                rep.detected, rep.words, rep.relation_defect
            ));
        }
        Ok((pass, detail.join("; ")))
    });

    // freeprob
    r.run("freeprob", "|NC(p)| = Catalan(p)", || {
        for p in 1..=10u64 {
            let closed = (0..p).fold(1u64, |acc, j| acc * (2 * p - j) / (j + 1)) / (p + 1);
            if catalan(p as usize)? != closed {
                return Ok((false, format!("p={p}")));
            }
        }
        Ok((true, "p ≤ 10".into()))
    });
    r.run("freeprob", "|π| + |Kr(π)| = p + 1", || {
        let pmax = 8;
        for p in 1..=pmax {
            for pi in enumerate_nc(p)?.iter() {
                if pi.num_blocks() + kreweras(pi)?.num_blocks() != p + 1 {
                    return Ok((false, format!("fails at {pi}")));
                }
            }
        }
        Ok((true, format!("exhaustive for p ≤ {pmax}")))
    });
    r.run("freeprob", "free Poisson dilation identity", || {
        let mut worst = 0.0f64;
        for t in [0.5f64, 2.0, 3.0] {
            for p in 1..=8 {
                let lhs = free_poisson_moment(t, p)?;
                let rhs = t.powi(p as i32 + 1) * free_poisson_moment(1.0 / t, p)?;
                worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
            }
        }
        Ok((worst <= 1e-12, format!("max relative defect {worst:.2e}")))
    });
    r.run("freeprob", "Δ(π,σ) = 1 implies |π| + |σ| ≤ p + 1", || {
        let mut hits = 0;
        for p in 1..=5 {
            let all = enumerate_set_partitions(p);
            for a in &all {
                for b in &all {
                    if delta_pair(a, b)? == 1 {
                        hits += 1;
                        if a.num_blocks() + b.num_blocks() > p + 1 {
                            return Ok((false, format!("p={p}: {a} {b}")));
                        }
                    }
                }
            }
        }
        Ok((true, format!("{hits} pairs with Δ = 1, all within bound")))
    });
    r.run("freeprob", "asymptotic law moments match Narayana predictor", || {
        let mut worst = 0.0f64;
        for (alpha, beta) in [(0.5, 1.0), (1.0, 1.0), (2.0, 1.0)] {
            for k in [2.0, 5.0] {
                let law = asymptotic_law(alpha, beta, k)?;
                for p in 1..=5 {
                    let q = law_moment(&law, p)?;
                    let pred = predicted_moment(alpha, beta, k, p)?;
                    worst = worst.max((q - pred).abs() / pred);
                }
            }
        }
        Ok((worst <= 1e-4, format!("max relative defect {worst:.2e}")))
    });

    // montecarlo
    let samples = if full { 100_000 } else { 20_000 };
    r.run("montecarlo", "bit-identical across thread counts", || {
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(|| mc_moment(2, 3, 3, 5000, opts.seed))?;
        let pooled = mc_moment(2, 3, 3, 5000, opts.seed)?;
        Ok((
            single.value.to_bits() == pooled.value.to_bits(),
            format!("{} vs {}", single.value, pooled.value),
        ))
    });
    r.run(
        "montecarlo",
        "estimates within 4 standard errors of exact counts",
        || {
            let mut detail = Vec::new();
            let mut pass = true;
            for (m, n, p) in [(2, 2, 2), (2, 2, 3), (2, 3, 3)] {
                let exact = walk_moment(
                    &AbelianGroup::cyclic(m)?,
                    &AbelianGroup::cyclic(n)?,
                    p,
                    WalkMethod::Multiset,
                    &lim,
                )?
                .value;
                let rep = mc_moment(m, n, p, samples, opts.seed)?;
                let z = (rep.value - exact).abs() / rep.uncertainty;
                pass &= z <= 4.0;
                detail.push(format!("M={m} N={n} p={p}: z={z:.2}"));
            }
            Ok((pass, detail.join("; ")))
        },
    );
    r.run("montecarlo", "standard error shrinks like 1/√samples", || {
        let small = mc_moment(2, 2, 3, samples / 2, opts.seed)?.uncertainty;
        let large = mc_moment(2, 2, 3, samples, opts.seed)?.uncertainty;
        let ratio = large / small;
        Ok(((0.6..=0.82).contains(&ratio), format!("ratio {ratio:.3} (ideal 0.707)")))
    });

    let failures = r
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}: {}: {}", c.module, c.name, c.detail))
        .collect::<Vec<_>>();
    SuiteReport {
        level: opts.level,
        seed: opts.seed,
        pass: failures.is_empty(),
        checks: r.checks,
        failures,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    }
}

fn builtin_models(seed: u64) -> Vec<(String, MagicModel)> {
    let mut out: Vec<(String, MagicModel)> = [g("Z2"), g("Z3")]
        .iter()
        .map(|x| (format!("fourier({x})"), fourier_model(x)))
        .collect();
    let (x, y) = (g("Z2"), g("Z2"));
    let w = deform(
        &fourier_model(&x),
        &fourier_model(&y),
        &generic_q(&x, &y, seed),
        Side::Right,
    )
    .expect("Fourier models deform");
    out.push(("Z2xZ2 deformed".into(), w));
    out
}

fn zero_sum_word(ctx: &Arc<GammaContext>, rng: &mut ChaCha8Rng) -> Result<crate::gamma::SemidirectElt> {
    let (m, n) = (ctx.x().size(), ctx.y().size());
    let len = rng.random_range(1..5);
    let mut word: Vec<GeneratorLetter> = (0..len)
        .map(|_| GeneratorLetter::new(rng.random_range(0..m), rng.random_range(0..n)))
        .collect();
    let total = word.iter().fold(0, |acc, l| ctx.y().add_idx(acc, l.c));
    word.push(GeneratorLetter::new(rng.random_range(0..m), ctx.y().neg_idx(total)));
    ctx.embed_word(&word)
}
