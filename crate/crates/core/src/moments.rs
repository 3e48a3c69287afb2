//! Transfer matrices `T_ε` of a model and the moments built from them.
//!
//! `(T_ε)_{i_1…i_p, j_1…j_p} = tr(U_{i_1 j_1}^{ε_1} … U_{i_p j_p}^{ε_p})`
//! with `tr = Tr / D`. Tuples are encoded as `Σ_r idx(i_r)·n^{p-r}`. The
//! truncated moments are the unnormalized traces `c_p^r = Tr(T_p^r)`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hadamard::{PhaseMatrix, Side};
use crate::linalg::{eigenvalues, hermitian_defect, trace, CMat};
use crate::models::{deform, dual, MagicModel};
use crate::TOL_SPECTRAL;

/// Resource guards for dense and enumerative computations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    /// Maximum number of rows `n^p` of a dense transfer matrix.
    pub dense_rows: usize,
    /// Maximum number of enumerated configurations.
    pub enumeration: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            dense_rows: 20_000,
            enumeration: 100_000_000,
        }
    }
}

impl Limits {
    pub(crate) fn check_rows(&self, what: &'static str, rows: u128) -> Result<()> {
        if rows > self.dense_rows as u128 {
            return Err(Error::ResourceCap {
                what,
                size: rows,
                cap: self.dense_rows as u128,
            });
        }
        Ok(())
    }

    pub(crate) fn check_enumeration(&self, what: &'static str, size: u128) -> Result<()> {
        if size > self.enumeration {
            return Err(Error::ResourceCap {
                what,
                size,
                cap: self.enumeration,
            });
        }
        Ok(())
    }
}

/// `n^p` as u128, saturating.
pub(crate) fn pow_u128(n: usize, p: usize) -> u128 {
    (0..p).fold(1u128, |acc, _| acc.saturating_mul(n as u128))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Exponent {
    Plain,
    Star,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExponentWord {
    letters: Vec<Exponent>,
}

impl ExponentWord {
    pub fn new(letters: Vec<Exponent>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidArgument("exponent word must be nonempty".into()));
        }
        Ok(Self { letters })
    }

    /// The all-plain word of length `p`.
    pub fn plain(p: usize) -> Result<Self> {
        Self::new(vec![Exponent::Plain; p])
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Exponent] {
        &self.letters
    }
}

impl FromStr for ExponentWord {
    type Err = Error;

    /// `"1*1"` → (plain, star, plain).
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|ch| match ch {
                '1' => Ok(Exponent::Plain),
                '*' => Ok(Exponent::Star),
                other => Err(Error::InvalidArgument(format!("bad exponent letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }
}

impl fmt::Display for ExponentWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            f.write_str(match l {
                Exponent::Plain => "1",
                Exponent::Star => "*",
            })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    p: usize,
    base: usize,
    matrix: CMat,
}

impl TransferMatrix {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    /// Encodes a tuple `(i_1, …, i_p)` as a row index.
    pub fn encode(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &i| acc * self.base + i)
    }

    /// `Tr(T^r)`.
    pub fn trace_power(&self, r: usize) -> Complex64 {
        if r == 0 {
            return Complex64::new(self.rows() as f64, 0.0);
        }
        let mut acc = self.matrix.clone();
        for _ in 1..r {
            acc = &acc * &self.matrix;
        }
        trace(&acc)
    }

    pub fn max_imaginary(&self) -> f64 {
        self.matrix.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// Builds `T_ε` for a model.
pub fn transfer_matrix(u: &MagicModel, eps: &ExponentWord, limits: &Limits) -> Result<TransferMatrix> {
    let n = u.index_size();
    let p = eps.len();
    let rows = pow_u128(n, p);
    limits.check_rows("transfer matrix rows", rows)?;
    let rows = rows as usize;
    let d = u.block_dim();

    let starred: Option<Vec<CMat>> = eps
        .letters()
        .contains(&Exponent::Star)
        .then(|| u.blocks().iter().map(|b| b.adjoint()).collect());
    let block = |i: usize, j: usize, e: Exponent| -> &CMat {
        match (e, &starred) {
            (Exponent::Star, Some(s)) => &s[i * n + j],
            _ => u.block(i, j),
        }
    };
    let inv_d = 1.0 / d as f64;

    let data: Vec<Vec<Complex64>> = (0..rows)
        .into_par_iter()
        .map(|row| {
            let mut tuple = vec![0usize; p];
            let mut rem = row;
            for slot in tuple.iter_mut().rev() {
                *slot = rem % n;
                rem /= n;
            }
            let mut out = vec![Complex64::new(0.0, 0.0); rows];
            let mut stack: Vec<CMat> = Vec::with_capacity(p);
            stack.push(CMat::identity(d, d));
            fill_row(&tuple, eps.letters(), &block, n, 0, 0, &mut stack, &mut out, inv_d);
            out
        })
        .collect();

    let matrix = CMat::from_fn(rows, rows, |r, c| data[r][c]);
    Ok(TransferMatrix { p, base: n, matrix })
}

#[allow(clippy::too_many_arguments)]
fn fill_row<'a>(
    tuple: &[usize],
    eps: &[Exponent],
    block: &impl Fn(usize, usize, Exponent) -> &'a CMat,
    n: usize,
    level: usize,
    col: usize,
    stack: &mut Vec<CMat>,
    out: &mut [Complex64],
    inv_d: f64,
) {
    let p = tuple.len();
    if level + 1 == p {
        // last factor: Tr(A·B) without forming the product
        let a = &stack[level];
        for j in 0..n {
            let b = block(tuple[level], j, eps[level]);
            let mut tr = Complex64::new(0.0, 0.0);
            for k in 0..a.nrows() {
                for l in 0..a.ncols() {
                    tr += a[(k, l)] * b[(l, k)];
                }
            }
            out[col * n + j] = tr * inv_d;
        }
        return;
    }
    for j in 0..n {
        let next = &stack[level] * block(tuple[level], j, eps[level]);
        stack.push(next);
        fill_row(tuple, eps, block, n, level + 1, col * n + j, stack, out, inv_d);
        stack.pop();
    }
}

/// `c_ε^r = Tr(T_ε^r)`, real part.
pub fn truncated_moment(u: &MagicModel, r: usize, eps: &ExponentWord, limits: &Limits) -> Result<f64> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    Ok(transfer_matrix(u, eps, limits)?.trace_power(r).re)
}

/// `c_p^r` for the all-plain word.
pub fn truncated_moment_p(u: &MagicModel, p: usize, r: usize, limits: &Limits) -> Result<f64> {
    truncated_moment(u, r, &ExponentWord::plain(p)?, limits)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum HaarMethod {
    /// Count eigenvalues of `T_p` within `tol` of 1.
    Spectral { tol: f64 },
    /// `(1/R) Σ_{r=1..R} Tr(T_p^r)`.
    Cesaro { terms: usize },
}

impl HaarMethod {
    pub fn spectral() -> Self {
        HaarMethod::Spectral { tol: TOL_SPECTRAL }
    }

    pub fn name(&self) -> &'static str {
        match self {
            HaarMethod::Spectral { .. } => "spectral",
            HaarMethod::Cesaro { .. } => "cesaro",
        }
    }
}

/// One moment estimate, from any of the methods in the crate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub p: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub value: f64,
    pub uncertainty: f64,
    /// Cesàro only: `R ×` last increment, an estimate of the `O(1/R)` bias.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    pub wall_time_ms: f64,
}

impl MomentReport {
    pub(crate) fn new(method: &str, p: usize, value: f64, uncertainty: f64, started: Instant) -> Self {
        Self {
            method: method.to_string(),
            model: None,
            p,
            r: None,
            terms: None,
            samples: None,
            seed: None,
            value,
            uncertainty,
            tail_bound: None,
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

/// `∫ χ^p`, the dimension of the fixed space of `U^{⊗p}`.
pub fn haar_moment(u: &MagicModel, p: usize, method: HaarMethod, limits: &Limits) -> Result<MomentReport> {
    let started = Instant::now();
    let t = transfer_matrix(u, &ExponentWord::plain(p)?, limits)?;
    let mut report = match method {
        HaarMethod::Spectral { tol } => {
            let count = eigenvalues(t.matrix())?
                .iter()
                .filter(|l| (*l - Complex64::new(1.0, 0.0)).norm() < tol)
                .count();
            MomentReport::new("spectral", p, count as f64, 0.0, started)
        }
        HaarMethod::Cesaro { terms } => {
            if terms < 2 {
                return Err(Error::InvalidArgument("Cesàro needs at least 2 terms".into()));
            }
            let (value, last_increment) = cesaro_average(t.matrix(), terms);
            let mut rep = MomentReport::new("cesaro", p, value, last_increment, started);
            rep.terms = Some(terms);
            rep.tail_bound = Some(last_increment * terms as f64);
            rep
        }
    };
    report.model = Some(u.describe());
    report.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Returns the average of `Tr(T^r)` for `r = 1..=terms` and the magnitude of
/// the last change of the running average.
fn cesaro_average(t: &CMat, terms: usize) -> (f64, f64) {
    let real = hermitian_defect(t) <= 1e-10 && t.iter().all(|z| z.im.abs() <= 1e-10);
    let mut sum = 0.0;
    let mut prev_avg = 0.0;
    let mut avg = 0.0;
    if real {
        let tr = t.map(|z| z.re);
        let mut power = tr.clone();
        for r in 1..=terms {
            if r > 1 {
                power = &power * &tr;
            }
            sum += power.trace();
            prev_avg = avg;
            avg = sum / r as f64;
        }
    } else {
        let mut power = t.clone();
        for r in 1..=terms {
            if r > 1 {
                power = &power * t;
            }
            sum += trace(&power).re;
            prev_avg = avg;
            avg = sum / r as f64;
        }
    }
    (avg, (avg - prev_avg).abs())
}

/// `γ_p^r = c_p^r / n^p`.
pub fn rescaled_truncated_moment(u: &MagicModel, p: usize, r: usize, limits: &Limits) -> Result<f64> {
    let c = truncated_moment_p(u, p, r, limits)?;
    Ok(c / (u.index_size() as f64).powi(p as i32))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReciprocityReport {
    pub p: usize,
    pub r: usize,
    /// `γ_p^r(U)`.
    pub gamma: f64,
    /// `γ_r^p(U')`.
    pub gamma_dual: f64,
    /// `tr((T'_r)^p)`, normalized trace of the dual transfer matrix.
    pub dual_transfer_moment: f64,
    pub defect: f64,
}

/// Compares `γ_p^r(U)` with `γ_r^p(U')` and with `tr((T_r(U'))^p)`.
pub fn reciprocity(u: &MagicModel, p: usize, r: usize, limits: &Limits) -> Result<ReciprocityReport> {
    let ud = dual(u)?;
    let gamma = rescaled_truncated_moment(u, p, r, limits)?;
    let gamma_dual = rescaled_truncated_moment(&ud, r, p, limits)?;
    let t_dual = transfer_matrix(&ud, &ExponentWord::plain(r)?, limits)?;
    let dual_transfer_moment = t_dual.trace_power(p).re / t_dual.rows() as f64;
    let defect = (gamma - gamma_dual).abs().max((gamma - dual_transfer_moment).abs());
    Ok(ReciprocityReport {
        p,
        r,
        gamma,
        gamma_dual,
        dual_transfer_moment,
        defect,
    })
}

/// `c_p^r(U ⊗_Q V)` evaluated from `T_p(U)`, `T_r(V')` and the phases of `Q`,
/// without building the deformed model.
pub fn tensor_formula_moment(
    u: &MagicModel,
    v_dual: &MagicModel,
    q: &PhaseMatrix,
    p: usize,
    r: usize,
    limits: &Limits,
) -> Result<f64> {
    if p == 0 || r == 0 {
        return Err(Error::InvalidArgument("p and r must be at least 1".into()));
    }
    let (m, n) = (u.index_size(), v_dual.index_size());
    if q.rows() != m || q.cols() != n {
        return Err(Error::ShapeMismatch(format!(
            "Q is {}x{}, models have index sizes {m} and {n}",
            q.rows(),
            q.cols()
        )));
    }
    let cells = r * p;
    let i_count = pow_u128(m, cells);
    let b_count = pow_u128(n, cells);
    limits.check_enumeration("truncated moment index configurations", i_count.saturating_mul(b_count))?;

    let tu = transfer_matrix(u, &ExponentWord::plain(p)?, limits)?;
    let tv = transfer_matrix(v_dual, &ExponentWord::plain(r)?, limits)?;

    // Δ_U(i) = M^r Π_s T_p^U[i^s, i^{s+1}] with i^s the s-th row of i.
    let m_r = (m as f64).powi(r as i32);
    let delta_u: Vec<(Vec<usize>, Complex64)> = (0..i_count as usize)
        .filter_map(|code| {
            let cells_i = decode(code, m, cells);
            let rows: Vec<usize> = (0..r).map(|s| tu.encode(&cells_i[s * p..(s + 1) * p])).collect();
            let prod = (0..r).fold(Complex64::new(m_r, 0.0), |acc, s| {
                acc * tu.matrix[(rows[s], rows[(s + 1) % r])]
            });
            (prod.norm() > 0.0).then_some((cells_i, prod))
        })
        .collect();

    // Δ_{V'}(b^t) = N^p Π_t T_r^{V'}[b_t, b_{t+1}] with b_t the t-th column of b.
    let n_p = (n as f64).powi(p as i32);
    let delta_v: Vec<(Vec<usize>, Complex64)> = (0..b_count as usize)
        .filter_map(|code| {
            let cells_b = decode(code, n, cells);
            let cols: Vec<usize> = (0..p)
                .map(|t| (0..r).fold(0, |acc, s| acc * n + cells_b[s * p + t]))
                .collect();
            let prod = (0..p).fold(Complex64::new(n_p, 0.0), |acc, t| {
                acc * tv.matrix[(cols[t], cols[(t + 1) % p])]
            });
            (prod.norm() > 0.0).then_some((cells_b, prod))
        })
        .collect();

    let total: Complex64 = delta_u
        .par_iter()
        .map(|(i, du)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, dv) in &delta_v {
                let mut phase = Complex64::new(1.0, 0.0);
                for s in 0..r {
                    let s1 = (s + 1) % r;
                    for t in 0..p {
                        let t1 = (t + 1) % p;
                        let (i0, i1) = (i[s * p + t], i[s1 * p + t]);
                        let (b0, b1) = (b[s * p + t], b[s * p + t1]);
                        phase *= q.get(i0, b0) * q.get(i1, b1) / (q.get(i0, b1) * q.get(i1, b0));
                    }
                }
                acc += du * dv * phase;
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total.re / ((m * n) as f64).powi(r as i32))
}

fn decode(mut code: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = code % base;
        code /= base;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PositivityReport {
    pub positive: bool,
    /// Smallest real part seen over all `T_p` entries, `p ≤ p_max`.
    pub worst_entry: f64,
    pub worst_p: usize,
    pub max_imaginary: f64,
}

/// Checks `tr(U_{i1j1}…U_{ipjp}) ≥ 0` for all words of length `p ≤ p_max`.
pub fn check_positive(u: &MagicModel, p_max: usize, limits: &Limits) -> Result<PositivityReport> {
    if p_max == 0 {
        return Err(Error::InvalidArgument("p_max must be at least 1".into()));
    }
    let mut worst_entry = f64::INFINITY;
    let mut worst_p = 1;
    let mut max_imaginary = 0.0f64;
    for p in 1..=p_max {
        let t = transfer_matrix(u, &ExponentWord::plain(p)?, limits)?;
        for z in t.matrix.iter() {
            if z.re < worst_entry {
                worst_entry = z.re;
                worst_p = p;
            }
            max_imaginary = max_imaginary.max(z.im.abs());
        }
    }
    Ok(PositivityReport {
        positive: worst_entry >= -1e-10 && max_imaginary <= 1e-10,
        worst_entry,
        worst_p,
        max_imaginary,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TensorBoundReport {
    pub p: usize,
    pub r: usize,
    pub u_positive: bool,
    pub v_dual_positive: bool,
    /// `|c_p^r(U ⊗_Q V)|`.
    pub lhs: f64,
    /// `c_p^r(U) c_p^r(V)`.
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Checks `|c_p^r(U ⊗_Q V)| ≤ c_p^r(U) c_p^r(V)`; a failed positivity
/// precondition is reported, not raised.
pub fn tensor_bound_check(
    u: &MagicModel,
    v: &MagicModel,
    q: &PhaseMatrix,
    p: usize,
    r: usize,
    limits: &Limits,
) -> Result<TensorBoundReport> {
    let p_max = p.max(r);
    let u_positive = check_positive(u, p_max, limits)?.positive;
    let v_dual_positive = check_positive(&dual(v)?, p_max, limits)?.positive;
    let w = deform(u, v, q, Side::Right)?;
    let lhs = truncated_moment_p(&w, p, r, limits)?.abs();
    let rhs = truncated_moment_p(u, p, r, limits)? * truncated_moment_p(v, p, r, limits)?;
    Ok(TensorBoundReport {
        p,
        r,
        u_positive,
        v_dual_positive,
        lhs,
        rhs,
        slack: rhs - lhs,
        holds: lhs <= rhs + 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::AbelianGroup;
    use crate::hadamard::generic_q;
    use crate::linalg::max_abs;
    use crate::models::fourier_model;

    fn g(s: &str) -> AbelianGroup {
        s.parse().unwrap()
    }

    fn lim() -> Limits {
        Limits::default()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn exponent_word_parsing() {
        let w: ExponentWord = "1*1".parse().unwrap();
        assert_eq!(w.letters(), &[Exponent::Plain, Exponent::Star, Exponent::Plain]);
        assert_eq!(w.to_string(), "1*1");
        assert!("".parse::<ExponentWord>().is_err());
        assert!("12".parse::<ExponentWord>().is_err());
    }

    #[test]
    fn fourier_z2_t1_is_flat() {
        let t = transfer_matrix(&fourier_model(&g("Z2")), &ExponentWord::plain(1).unwrap(), &lim()).unwrap();
        assert!(max_abs(&(t.matrix() - CMat::from_element(2, 2, c(0.5)))) < 1e-15);
    }

    #[test]
    fn fourier_z2_t2_is_half_identity_plus_shift() {
        let t = transfer_matrix(&fourier_model(&g("Z2")), &ExponentWord::plain(2).unwrap(), &lim()).unwrap();
        // entry is 1/2 iff i1 - j1 = i2 - j2 (mod 2)
        let want = CMat::from_fn(4, 4, |row, col| {
            let (i1, i2, j1, j2) = (row / 2, row % 2, col / 2, col % 2);
            if (i1 + j1) % 2 == (i2 + j2) % 2 {
                c(0.5)
            } else {
                c(0.0)
            }
        });
        assert!(max_abs(&(t.matrix() - want)) < 1e-15);
    }

    #[test]
    fn t1_rows_sum_to_one() {
        let x = g("Z2");
        let y = g("Z3");
        let w = deform(
            &fourier_model(&x),
            &fourier_model(&y),
            &generic_q(&x, &y, 4),
            Side::Right,
        )
        .unwrap();
        let t = transfer_matrix(&w, &ExponentWord::plain(1).unwrap(), &lim()).unwrap();
        for row in t.matrix().row_iter() {
            let s: Complex64 = row.iter().sum();
            assert!((s - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn star_letters_act_trivially_on_projective_models() {
        let x = g("Z2");
        let w = deform(
            &fourier_model(&x),
            &fourier_model(&x),
            &generic_q(&x, &x, 3),
            Side::Right,
        )
        .unwrap();
        let a = transfer_matrix(&w, &"1*".parse().unwrap(), &lim()).unwrap();
        let b = transfer_matrix(&w, &"11".parse().unwrap(), &lim()).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-12);
    }

    #[test]
    fn truncated_moments_of_fourier_z2() {
        let u = fourier_model(&g("Z2"));
        assert!((truncated_moment_p(&u, 1, 1, &lim()).unwrap() - 1.0).abs() < 1e-12);
        assert!((truncated_moment_p(&u, 2, 1, &lim()).unwrap() - 2.0).abs() < 1e-12);
        assert!(truncated_moment_p(&u, 1, 0, &lim()).is_err());
    }

    #[test]
    fn spectral_haar_moments_of_fourier_z2() {
        let u = fourier_model(&g("Z2"));
        for p in 1..=4 {
            let rep = haar_moment(&u, p, HaarMethod::spectral(), &lim()).unwrap();
            assert_eq!(rep.value, 2f64.powi(p as i32 - 1), "p={p}");
        }
    }

    #[test]
    fn deformed_model_first_moment_is_one() {
        let (x, y) = (g("Z2"), g("Z3"));
        let w = deform(
            &fourier_model(&x),
            &fourier_model(&y),
            &generic_q(&x, &y, 6),
            Side::Right,
        )
        .unwrap();
        assert_eq!(haar_moment(&w, 1, HaarMethod::spectral(), &lim()).unwrap().value, 1.0);
    }

    #[test]
    fn cesaro_converges_for_fourier_z2() {
        // T_2 = (I+S)/2 is a projection, so every power has trace 2
        let u = fourier_model(&g("Z2"));
        let rep = haar_moment(&u, 2, HaarMethod::Cesaro { terms: 50 }, &lim()).unwrap();
        assert!((rep.value - 2.0).abs() < 1e-12);
        assert!(rep.uncertainty < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let u = fourier_model(&g("Z4"));
        let tight = Limits {
            dense_rows: 10,
            enumeration: 10,
        };
        assert!(matches!(
            transfer_matrix(&u, &ExponentWord::plain(2).unwrap(), &tight),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn reciprocity_on_fourier_and_deformed_models() {
        let x = g("Z2");
        let y = g("Z3");
        let u = fourier_model(&x);
        let w = deform(&u, &fourier_model(&y), &generic_q(&x, &y, 1), Side::Right).unwrap();
        for model in [&u, &w] {
            for p in 1..=2 {
                for r in 1..=2 {
                    let rep = reciprocity(model, p, r, &lim()).unwrap();
                    assert!(rep.defect < 1e-9, "{rep:?}");
                }
            }
        }
        let rep = reciprocity(&u, 3, 3, &lim()).unwrap();
        assert!((rep.gamma - rep.gamma_dual).abs() < 1e-12);
    }

    #[test]
    fn tensor_formula_matches_direct_evaluation() {
        let x = g("Z2");
        let (u, v) = (fourier_model(&x), fourier_model(&x));
        let vd = dual(&v).unwrap();
        for seed in [1, 2] {
            let q = generic_q(&x, &x, seed);
            let w = deform(&u, &v, &q, Side::Right).unwrap();
            for (p, r) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
                let direct = truncated_moment_p(&w, p, r, &lim()).unwrap();
                let formula = tensor_formula_moment(&u, &vd, &q, p, r, &lim()).unwrap();
                assert!((direct - formula).abs() < 1e-9, "p={p} r={r}: {direct} vs {formula}");
            }
        }
    }

    #[test]
    fn tensor_formula_with_trivial_q_is_product() {
        let (x, y) = (g("Z2"), g("Z3"));
        let (u, v) = (fourier_model(&x), fourier_model(&y));
        let q = PhaseMatrix::ones(x.clone(), y.clone());
        let formula = tensor_formula_moment(&u, &dual(&v).unwrap(), &q, 2, 1, &lim()).unwrap();
        let product = truncated_moment_p(&u, 2, 1, &lim()).unwrap() * truncated_moment_p(&v, 2, 1, &lim()).unwrap();
        assert!((formula - product).abs() < 1e-9);
    }

    #[test]
    fn fourier_models_are_positive() {
        for s in ["Z2", "Z3"] {
            let rep = check_positive(&fourier_model(&g(s)), 3, &lim()).unwrap();
            assert!(rep.positive, "{s}: {rep:?}");
        }
    }

    #[test]
    fn tensor_bound_single_index() {
        let x = g("Z2");
        let (u, v) = (fourier_model(&x), fourier_model(&x));
        let rep = tensor_bound_check(&u, &v, &generic_q(&x, &x, 5), 1, 1, &lim()).unwrap();
        assert!(rep.u_positive && rep.v_dual_positive && rep.holds);
        assert!((rep.lhs - 1.0).abs() < 1e-12 && (rep.rhs - 1.0).abs() < 1e-12);
    }
}
