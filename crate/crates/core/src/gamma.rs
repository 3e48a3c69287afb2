//! The discrete group `Γ_{X,Y} ≅ Z^{(|X|-1)|Y|} ⋊ Y`, exact walk counts,
//! the θ-twisted representations `π^k` and their link to the deformed model.
//!
//! Lattice coordinates are pairs `(i, c)` with `i ∈ X∖{0}`, `c ∈ Y`, stored at
//! offset `(idx(i) - 1)·|Y| + idx(c)`. `Y` acts by `shift_s: (i, c) ↦ (i, c+s)`.

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{fourier_matrix, AbelianGroup, GroupElt};
use crate::hadamard::PhaseMatrix;
use crate::linalg::{max_abs_diff, CMat};
use crate::models::MagicModel;
use crate::moments::{pow_u128, Limits};

/// The pair `(X, Y)` an element of `Γ_{X,Y}` lives over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaContext {
    x: AbelianGroup,
    y: AbelianGroup,
}

impl GammaContext {
    pub fn new(x: AbelianGroup, y: AbelianGroup) -> Arc<Self> {
        Arc::new(Self { x, y })
    }

    pub fn x(&self) -> &AbelianGroup {
        &self.x
    }

    pub fn y(&self) -> &AbelianGroup {
        &self.y
    }

    /// Rank `(|X|-1)|Y|` of the lattice part.
    pub fn lattice_rank(&self) -> usize {
        (self.x.size() - 1) * self.y.size()
    }

    #[inline]
    fn coord(&self, i: usize, c: usize) -> usize {
        (i - 1) * self.y.size() + c
    }

    pub fn identity(self: &Arc<Self>) -> SemidirectElt {
        SemidirectElt {
            ctx: Arc::clone(self),
            vec: vec![0; self.lattice_rank()],
            y: 0,
        }
    }

    /// `c^{(0)} ↦ (0, c)`, `c^{(i)} ↦ (b_{i0} - b_{ic}, c)`.
    pub fn embed(self: &Arc<Self>, letter: GeneratorLetter) -> SemidirectElt {
        let mut g = self.identity();
        g.y = letter.c;
        if letter.i != 0 && letter.c != 0 {
            g.vec[self.coord(letter.i, 0)] = 1;
            g.vec[self.coord(letter.i, letter.c)] = -1;
        }
        g
    }

    /// Product of the embedded letters of a word, left to right.
    pub fn embed_word(self: &Arc<Self>, word: &[GeneratorLetter]) -> Result<SemidirectElt> {
        word.iter().try_fold(self.identity(), |acc, &l| acc.mul(&self.embed(l)))
    }

    /// Generator `(-c)^{(0)} c^{(i)}` of the lattice subgroup `T`.
    pub fn t_generator(&self, i: usize, c: usize) -> [GeneratorLetter; 2] {
        [GeneratorLetter::new(0, self.y.neg_idx(c)), GeneratorLetter::new(i, c)]
    }

    /// Inverse `(-c)^{(i)} c^{(0)}` of [`Self::t_generator`].
    pub fn t_generator_inverse(&self, i: usize, c: usize) -> [GeneratorLetter; 2] {
        [GeneratorLetter::new(i, self.y.neg_idx(c)), GeneratorLetter::new(0, c)]
    }
}

/// Element `(a, s)` of `Z^{(|X|-1)|Y|} ⋊ Y` with exact integer coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemidirectElt {
    ctx: Arc<GammaContext>,
    vec: Vec<i64>,
    y: usize,
}

impl SemidirectElt {
    pub fn context(&self) -> &Arc<GammaContext> {
        &self.ctx
    }

    pub fn vec(&self) -> &[i64] {
        &self.vec
    }

    /// Lattice coordinate at `(i, c)`, `i ≠ 0`.
    pub fn coordinate(&self, i: usize, c: usize) -> i64 {
        self.vec[self.ctx.coord(i, c)]
    }

    pub fn y_index(&self) -> usize {
        self.y
    }

    pub fn y_elt(&self) -> GroupElt {
        self.ctx.y.element(self.y)
    }

    pub fn is_identity(&self) -> bool {
        self.y == 0 && self.vec.iter().all(|&v| v == 0)
    }

    /// `(a, s)(b, t) = (a + shift_s(b), s + t)`.
    pub fn mul(&self, other: &SemidirectElt) -> Result<SemidirectElt> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        let y = &self.ctx.y;
        let n = y.size();
        let mut vec = self.vec.clone();
        for (pos, &b) in other.vec.iter().enumerate() {
            if b == 0 {
                continue;
            }
            let (row, c) = (pos / n, pos % n);
            let slot = &mut vec[row * n + y.add_idx(c, self.y)];
            *slot = slot.checked_add(b).ok_or(Error::Overflow("semidirect product"))?;
        }
        Ok(SemidirectElt {
            ctx: Arc::clone(&self.ctx),
            vec,
            y: y.add_idx(self.y, other.y),
        })
    }

    /// `(a, s)^{-1} = (-shift_{-s}(a), -s)`.
    pub fn inverse(&self) -> Result<SemidirectElt> {
        let y = &self.ctx.y;
        let n = y.size();
        let minus_s = y.neg_idx(self.y);
        let mut vec = vec![0i64; self.vec.len()];
        for (pos, &a) in self.vec.iter().enumerate() {
            let (row, c) = (pos / n, pos % n);
            vec[row * n + y.add_idx(c, minus_s)] = a.checked_neg().ok_or(Error::Overflow("semidirect inverse"))?;
        }
        Ok(SemidirectElt {
            ctx: Arc::clone(&self.ctx),
            vec,
            y: minus_s,
        })
    }
}

/// The letter `c^{(i)}`: element `c` of the `i`-th copy of `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorLetter {
    /// Canonical index of `i ∈ X`.
    pub i: usize,
    /// Canonical index of `c ∈ Y`.
    pub c: usize,
}

impl GeneratorLetter {
    pub fn new(i: usize, c: usize) -> Self {
        Self { i, c }
    }

    pub fn from_elts(x: &AbelianGroup, y: &AbelianGroup, i: &GroupElt, c: &GroupElt) -> Result<Self> {
        Ok(Self {
            i: x.index_of(i)?,
            c: y.index_of(c)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkMethod {
    /// Tuples `(i_r, d_r)` with `[(i_r, d_r)] = [(i_r, d_{r-1})]` as multisets.
    Multiset,
    /// Letter tuples whose embedded product is the identity.
    Group,
}

/// Exact value of `∫χ^p` from a combinatorial count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkMoment {
    pub method: WalkMethod,
    pub x: String,
    pub y: String,
    pub p: usize,
    /// Raw number of qualifying tuples.
    pub count: u128,
    pub numerator: u128,
    pub denominator: u128,
    pub value: f64,
    pub wall_time_ms: f64,
}

/// `∫χ^p` for the generic deformed Fourier model over `(X, Y)`.
///
/// Multiset: `count / (|X||Y|)`; group: `count / |X|`.
pub fn walk_moment(
    x: &AbelianGroup,
    y: &AbelianGroup,
    p: usize,
    method: WalkMethod,
    limits: &Limits,
) -> Result<WalkMoment> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    let started = Instant::now();
    let (m, n) = (x.size(), y.size());
    limits.check_enumeration("walk tuples", pow_u128(m * n, p))?;
    let (count, denom) = match method {
        WalkMethod::Multiset => (count_multiset(m, n, p)?, (m * n) as u128),
        WalkMethod::Group => (
            count_group_words(&GammaContext::new(x.clone(), y.clone()), p)?,
            m as u128,
        ),
    };
    let g = count.gcd(&denom);
    Ok(WalkMoment {
        method,
        x: x.to_string(),
        y: y.to_string(),
        p,
        count,
        numerator: count / g,
        denominator: denom / g,
        value: count as f64 / denom as f64,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

fn checked_total(parts: Vec<u128>) -> Result<u128> {
    parts
        .into_iter()
        .try_fold(0u128, |acc, v| acc.checked_add(v))
        .ok_or(Error::Overflow("walk count"))
}

fn count_multiset(m: usize, n: usize, p: usize) -> Result<u128> {
    let rest_i = pow_u128(m, p - 1) as usize;
    let all_d = pow_u128(n, p) as usize;
    let parts: Vec<u128> = (0..m)
        .into_par_iter()
        .map(|i1| {
            let mut is = vec![0usize; p];
            let mut ds = vec![0usize; p];
            let mut lhs = vec![0usize; p];
            let mut rhs = vec![0usize; p];
            let mut count = 0u128;
            for ci in 0..rest_i {
                is[0] = i1;
                let mut rem = ci;
                for slot in is[1..].iter_mut().rev() {
                    *slot = rem % m;
                    rem /= m;
                }
                for cd in 0..all_d {
                    let mut rem = cd;
                    for slot in ds.iter_mut().rev() {
                        *slot = rem % n;
                        rem /= n;
                    }
                    for r in 0..p {
                        lhs[r] = is[r] * n + ds[r];
                        rhs[r] = is[r] * n + ds[(r + p - 1) % p];
                    }
                    lhs.sort_unstable();
                    rhs.sort_unstable();
                    if lhs == rhs {
                        count += 1;
                    }
                }
            }
            count
        })
        .collect();
    checked_total(parts)
}

/// Running product for the depth-first word search; right multiplication by
/// a letter touches at most two lattice coordinates.
struct WordWalker<'a> {
    ctx: &'a GammaContext,
    vec: Vec<i64>,
    nonzero: usize,
    y: usize,
}

impl WordWalker<'_> {
    fn bump(&mut self, pos: usize, delta: i64) {
        let before = self.vec[pos];
        let after = before + delta;
        self.vec[pos] = after;
        match (before == 0, after == 0) {
            (true, false) => self.nonzero += 1,
            (false, true) => self.nonzero -= 1,
            _ => {}
        }
    }

    /// Multiplies by `c^{(i)}` on the right (`sign = 1`) or undoes it (`sign = -1`).
    fn apply(&mut self, i: usize, c: usize, sign: i64) {
        let y = &self.ctx.y;
        if sign < 0 {
            self.y = y.sub_idx(self.y, c);
        }
        if i != 0 && c != 0 {
            let s = self.y;
            self.bump(self.ctx.coord(i, s), sign);
            self.bump(self.ctx.coord(i, y.add_idx(s, c)), -sign);
        }
        if sign > 0 {
            self.y = y.add_idx(self.y, c);
        }
    }

    fn count(&mut self, depth: usize) -> u128 {
        if depth == 0 {
            return u128::from(self.nonzero == 0 && self.y == 0);
        }
        let (m, n) = (self.ctx.x.size(), self.ctx.y.size());
        let mut total = 0;
        for i in 0..m {
            for c in 0..n {
                self.apply(i, c, 1);
                total += self.count(depth - 1);
                self.apply(i, c, -1);
            }
        }
        total
    }
}

fn count_group_words(ctx: &Arc<GammaContext>, p: usize) -> Result<u128> {
    let (m, n) = (ctx.x.size(), ctx.y.size());
    let parts: Vec<u128> = (0..m * n)
        .into_par_iter()
        .map(|first| {
            let mut walker = WordWalker {
                ctx,
                vec: vec![0; ctx.lattice_rank()],
                nonzero: 0,
                y: 0,
            };
            walker.apply(first / n, first % n, 1);
            walker.count(p - 1)
        })
        .collect();
    checked_total(parts)
}

/// `θ_{ic}^{ke} = Q_{i,e-c} Q_{i-k,e} / (Q_{ie} Q_{i-k,e-c})`.
pub fn theta(q: &PhaseMatrix, i: usize, c: usize, k: usize, e: usize) -> Complex64 {
    let (x, y) = (q.x(), q.y());
    let (ik, ec) = (x.sub_idx(i, k), y.sub_idx(e, c));
    q.get(i, ec) * q.get(ik, e) / (q.get(i, e) * q.get(ik, ec))
}

/// Signature shared by [`theta`] and deliberately altered variants.
pub type ThetaFn = fn(&PhaseMatrix, usize, usize, usize, usize) -> Complex64;

/// `π^k(c^{(i)})`: `ε_e ↦ θ_{ic}^{ke} ε_{e-c}`.
pub fn generator_matrix_with(q: &PhaseMatrix, k: usize, letter: GeneratorLetter, th: ThetaFn) -> CMat {
    let y = q.y();
    let n = y.size();
    let mut g = CMat::zeros(n, n);
    for e in 0..n {
        g[(y.sub_idx(e, letter.c), e)] = th(q, letter.i, letter.c, k, e);
    }
    g
}

/// `π^k` of a word, as the ordered product of generator matrices.
pub fn rep_pi_k(q: &PhaseMatrix, k: usize, word: &[GeneratorLetter]) -> CMat {
    rep_pi_k_with(q, k, word, theta)
}

pub fn rep_pi_k_with(q: &PhaseMatrix, k: usize, word: &[GeneratorLetter], th: ThetaFn) -> CMat {
    let n = q.y().size();
    word.iter()
        .fold(CMat::identity(n, n), |acc, &l| acc * generator_matrix_with(q, k, l, th))
}

/// Largest deviation of a matrix from the scalar `m_{00}·I`.
pub fn scalar_spread(a: &CMat) -> f64 {
    let d0 = a[(0, 0)];
    let mut worst = 0.0f64;
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            let want = if r == c { d0 } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((a[(r, c)] - want).norm());
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub words: usize,
    pub seed: u64,
    /// Exponents `R_{ic}` are drawn from `[-max_exponent, max_exponent]`.
    pub max_exponent: i64,
    pub tol: f64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        Self {
            words: 100,
            seed: 0,
            max_exponent: 3,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaithfulnessReport {
    pub words: usize,
    pub detected: usize,
    /// Smallest, over sampled words, of the largest spread over `k`.
    pub min_spread: f64,
    /// Embedded products equal `Σ R_{ic}(b_{i,-c} - b_{i0})` and are nontrivial.
    pub embedding_consistent: bool,
    /// Worst defect of `π^k(c^{(i)})π^k(d^{(i)}) = π^k((c+d)^{(i)})` and of
    /// the commutation of zero-sum words.
    pub relation_defect: f64,
    pub unitary_defect: f64,
    pub pass: bool,
}

/// Samples nontrivial elements of `T` and checks that some `π^k` is non-scalar on each.
pub fn faithfulness_probe(q: &PhaseMatrix, spec: &ProbeSpec) -> Result<FaithfulnessReport> {
    faithfulness_probe_with(q, spec, theta)
}

pub fn faithfulness_probe_with(q: &PhaseMatrix, spec: &ProbeSpec, th: ThetaFn) -> Result<FaithfulnessReport> {
    let ctx = GammaContext::new(q.x().clone(), q.y().clone());
    let (m, n) = (q.rows(), q.cols());
    if m < 2 || n < 2 {
        return Err(Error::InvalidArgument("T is trivial when |X| or |Y| is 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut detected = 0;
    let mut min_spread = f64::INFINITY;
    let mut embedding_consistent = true;
    for _ in 0..spec.words {
        let exps = loop {
            let e: Vec<i64> = (0..(m - 1) * (n - 1))
                .map(|_| rng.random_range(-spec.max_exponent..=spec.max_exponent))
                .collect();
            if e.iter().any(|&v| v != 0) {
                break e;
            }
        };
        let mut word = Vec::new();
        let mut expected = ctx.identity();
        for i in 1..m {
            for c in 1..n {
                let r = exps[(i - 1) * (n - 1) + (c - 1)];
                let piece = if r > 0 {
                    ctx.t_generator(i, c)
                } else {
                    ctx.t_generator_inverse(i, c)
                };
                for _ in 0..r.unsigned_abs() {
                    word.extend_from_slice(&piece);
                }
                expected.vec[ctx.coord(i, y_neg(&ctx, c))] += r;
                expected.vec[ctx.coord(i, 0)] -= r;
            }
        }
        let embedded = ctx.embed_word(&word)?;
        embedding_consistent &= embedded == expected && !embedded.is_identity();
        let spread = (0..m)
            .map(|k| scalar_spread(&rep_pi_k_with(q, k, &word, th)))
            .fold(0.0, f64::max);
        min_spread = min_spread.min(spread);
        if spread > spec.tol {
            detected += 1;
        }
    }
    let relation_defect = relation_defect(q, &ctx, &mut rng, th);
    let unitary_defect = (0..m)
        .flat_map(|k| (0..m).flat_map(move |i| (0..n).map(move |c| (k, i, c))))
        .map(|(k, i, c)| {
            let g = generator_matrix_with(q, k, GeneratorLetter::new(i, c), th);
            max_abs_diff(&(g.adjoint() * &g), &CMat::identity(n, n))
        })
        .fold(0.0, f64::max);
    let pass = detected == spec.words && embedding_consistent && relation_defect <= 1e-9 && unitary_defect <= 1e-12;
    Ok(FaithfulnessReport {
        words: spec.words,
        detected,
        min_spread,
        embedding_consistent,
        relation_defect,
        unitary_defect,
        pass,
    })
}

fn y_neg(ctx: &GammaContext, c: usize) -> usize {
    ctx.y.neg_idx(c)
}

/// Defining relations of `Γ_{X,Y}` under `π^k`: each copy of `Y` acts as a
/// group, and zero-sum words commute.
fn relation_defect(q: &PhaseMatrix, ctx: &GammaContext, rng: &mut ChaCha8Rng, th: ThetaFn) -> f64 {
    let (m, n) = (q.rows(), q.cols());
    let y = &ctx.y;
    let mut worst = 0.0f64;
    for k in 0..m {
        for i in 0..m {
            for c in 0..n {
                for d in 0..n {
                    let lhs = rep_pi_k_with(q, k, &[GeneratorLetter::new(i, c), GeneratorLetter::new(i, d)], th);
                    let rhs = generator_matrix_with(q, k, GeneratorLetter::new(i, y.add_idx(c, d)), th);
                    worst = worst.max(max_abs_diff(&lhs, &rhs));
                }
            }
        }
    }
    let zero_sum_word = |rng: &mut ChaCha8Rng| {
        let len = rng.random_range(1..=4usize);
        let mut word: Vec<GeneratorLetter> = (0..len)
            .map(|_| GeneratorLetter::new(rng.random_range(0..m), rng.random_range(0..n)))
            .collect();
        let total = word.iter().fold(0, |acc, l| y.add_idx(acc, l.c));
        word.push(GeneratorLetter::new(rng.random_range(0..m), y.neg_idx(total)));
        word
    };
    for _ in 0..20 {
        let (w1, w2) = (zero_sum_word(rng), zero_sum_word(rng));
        for k in 0..m {
            let (a, b) = (rep_pi_k_with(q, k, &w1, th), rep_pi_k_with(q, k, &w2, th));
            worst = worst.max(max_abs_diff(&(&a * &b), &(&b * &a)));
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelRepReport {
    /// Worst `|π(c^{(i)})ε_{ke} - θ_{ic}^{ke} ε_{k,e-c}|` over all indices.
    pub max_defect: f64,
    pub pass: bool,
}

/// Checks the action of `π(c^{(i)}) = Σ_{a,j} L_{ac} W_{ia,j0}` on the basis
/// `ε_{ke} = Σ_i K_{ik} e_{ie}`, with `K = F_X`, `L = F_Y`.
pub fn verify_model_rep(w: &MagicModel, q: &PhaseMatrix) -> Result<ModelRepReport> {
    verify_model_rep_with(w, q, theta)
}

pub fn verify_model_rep_with(w: &MagicModel, q: &PhaseMatrix, th: ThetaFn) -> Result<ModelRepReport> {
    let (x, y) = (q.x(), q.y());
    let (m, n) = (x.size(), y.size());
    let dim = m * n;
    if w.index_size() != dim || w.block_dim() != dim {
        return Err(Error::ShapeMismatch(format!(
            "model is ({}, {}), expected ({dim}, {dim})",
            w.index_size(),
            w.block_dim()
        )));
    }
    let k_mat = fourier_matrix(x);
    let l_mat = fourier_matrix(y);
    let eps = |k: usize, e: usize| {
        let mut v = nalgebra::DVector::<Complex64>::zeros(dim);
        for i in 0..m {
            v[i * n + e] = k_mat[(i, k)];
        }
        v
    };
    let defects: Vec<f64> = (0..m * n)
        .into_par_iter()
        .map(|ic| {
            let (i, c) = (ic / n, ic % n);
            let mut pi = CMat::zeros(dim, dim);
            for a in 0..n {
                for j in 0..m {
                    pi += w.block(i * n + a, j * n) * l_mat[(a, c)];
                }
            }
            let mut worst = 0.0f64;
            for k in 0..m {
                for e in 0..n {
                    let lhs = &pi * eps(k, e);
                    let rhs = eps(k, y.sub_idx(e, c)) * th(q, i, c, k, e);
                    worst = worst.max((lhs - rhs).camax());
                }
            }
            worst
        })
        .collect();
    let max_defect = defects.into_iter().fold(0.0, f64::max);
    Ok(ModelRepReport {
        max_defect,
        pass: max_defect <= 1e-9,
    })
}
