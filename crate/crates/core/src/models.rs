//! Magic-unitary matrix models: an `n × n` array of `D × D` blocks that are
//! orthogonal projections summing to the identity along rows and columns.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::AbelianGroup;
use crate::hadamard::{validate_hadamard, HadamardMatrix, PhaseMatrix, Side};
use crate::linalg::{max_abs, numerical_rank, op_norm, CMat};
use crate::TOL_STRUCTURE;

/// What the model index runs over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexLabels {
    Plain,
    Group(AbelianGroup),
    /// `X × Y` with `X` outer: index `idx_X·|Y| + idx_Y`.
    Pair(AbelianGroup, AbelianGroup),
}

impl IndexLabels {
    fn names(&self) -> Vec<String> {
        match self {
            IndexLabels::Plain => Vec::new(),
            IndexLabels::Group(g) => vec![g.to_string()],
            IndexLabels::Pair(x, y) => vec![x.to_string(), y.to_string()],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MagicModel {
    labels: IndexLabels,
    n: usize,
    d: usize,
    blocks: Vec<CMat>,
}

impl MagicModel {
    /// Wraps raw blocks (row-major, `n²` of them) without checking the magic
    /// invariants; use [`check_magic`] on the result.
    pub fn from_blocks(labels: IndexLabels, n: usize, blocks: Vec<CMat>) -> Result<Self> {
        if blocks.len() != n * n || n == 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} blocks for index size {n}",
                blocks.len()
            )));
        }
        let d = blocks[0].nrows();
        if blocks.iter().any(|b| b.nrows() != d || b.ncols() != d) {
            return Err(Error::ShapeMismatch("blocks must all be square of one size".into()));
        }
        Ok(Self { labels, n, d, blocks })
    }

    pub fn index_size(&self) -> usize {
        self.n
    }

    pub fn block_dim(&self) -> usize {
        self.d
    }

    pub fn labels(&self) -> &IndexLabels {
        &self.labels
    }

    #[inline]
    pub fn block(&self, i: usize, j: usize) -> &CMat {
        &self.blocks[i * self.n + j]
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn is_square_configuration(&self) -> bool {
        self.n == self.d
    }

    /// Short identifier used in reports.
    pub fn describe(&self) -> String {
        match &self.labels {
            IndexLabels::Plain => format!("model(n={}, D={})", self.n, self.d),
            IndexLabels::Group(g) => format!("fourier({g})"),
            IndexLabels::Pair(x, y) => format!("{x}x{y}"),
        }
    }

    /// Replaces one block; used to build deliberately broken models.
    pub fn with_block(mut self, i: usize, j: usize, block: CMat) -> Result<Self> {
        if block.shape() != (self.d, self.d) {
            return Err(Error::ShapeMismatch("replacement block has wrong size".into()));
        }
        self.blocks[i * self.n + j] = block;
        Ok(self)
    }

    /// Permutes the block rows: new row `r` is old row `perm[r]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::ShapeMismatch("permutation length".into()));
        }
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for &src in perm {
            for j in 0..self.n {
                blocks.push(self.block(src, j).clone());
            }
        }
        Ok(Self { blocks, ..self.clone() })
    }

    pub fn max_block_rank(&self, tol: f64) -> usize {
        self.blocks.iter().map(|b| numerical_rank(b, tol)).max().unwrap_or(0)
    }

    pub fn max_entry_diff(&self, other: &MagicModel) -> Result<f64> {
        if self.n != other.n || self.d != other.d {
            return Err(Error::ShapeMismatch(format!(
                "models have shapes ({}, {}) and ({}, {})",
                self.n, self.d, other.n, other.d
            )));
        }
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| max_abs(&(a - b)))
            .fold(0.0, f64::max))
    }
}

/// `U_{ij} = Proj(H_i / H_j)`, i.e. `(U_{ij})_{kl} = (1/n) H_{ik}H_{jl} / (H_{il}H_{jk})`.
pub fn from_hadamard(h: &HadamardMatrix) -> Result<MagicModel> {
    let report = validate_hadamard(h.entries(), TOL_STRUCTURE)?;
    if !report.is_hadamard {
        return Err(Error::NotHadamard {
            modulus: report.max_modulus_defect,
            orthogonality: report.max_orthogonality_defect,
        });
    }
    let e = h.entries();
    let n = h.dim();
    let inv_n = 1.0 / n as f64;
    let blocks = (0..n * n)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            CMat::from_fn(n, n, |k, l| e[(i, k)] * e[(j, l)] / (e[(i, l)] * e[(j, k)]) * inv_n)
        })
        .collect();
    MagicModel::from_blocks(IndexLabels::Plain, n, blocks)
}

/// Fourier model `(U_{ij})_{kl} = (1/|X|) F_{i-j, k-l}`.
pub fn fourier_model(x: &AbelianGroup) -> MagicModel {
    let n = x.size();
    let inv_n = 1.0 / n as f64;
    let blocks = (0..n * n)
        .map(|ij| {
            let s = x.sub_idx(ij / n, ij % n);
            CMat::from_fn(n, n, |k, l| x.character(s, x.sub_idx(k, l)) * inv_n)
        })
        .collect();
    MagicModel::from_blocks(IndexLabels::Group(x.clone()), n, blocks).expect("well-formed")
}

/// Deformed tensor product of two projective models.
///
/// Right: `(W_{ia,jb})_{kc,ld} = Q_{ic}Q_{jd}/(Q_{id}Q_{jc}) (U_{ij})_{kl}(V_{ab})_{cd}`.
/// Left:  `(W°_{ia,jb})_{kc,ld} = Q_{ka}Q_{lb}/(Q_{kb}Q_{la}) (U_{ij})_{kl}(V_{ab})_{cd}`.
pub fn deform(u: &MagicModel, v: &MagicModel, q: &PhaseMatrix, side: Side) -> Result<MagicModel> {
    let (m, n) = (u.n, v.n);
    if q.rows() != m || q.cols() != n {
        return Err(Error::ShapeMismatch(format!(
            "Q is {}x{}, models have index sizes {m} and {n}",
            q.rows(),
            q.cols()
        )));
    }
    for model in [u, v] {
        if !model.is_square_configuration() {
            return Err(Error::NotSquareConfiguration {
                index_size: model.n,
                block_dim: model.d,
            });
        }
    }
    let dim = m * n;
    let blocks: Vec<CMat> = (0..dim * dim)
        .into_par_iter()
        .map(|row_col| {
            let (ia, jb) = (row_col / dim, row_col % dim);
            let (i, a, j, b) = (ia / n, ia % n, jb / n, jb % n);
            let ub = u.block(i, j);
            let vb = v.block(a, b);
            CMat::from_fn(dim, dim, |kc, ld| {
                let (k, c, l, d) = (kc / n, kc % n, ld / n, ld % n);
                let phase = match side {
                    Side::Right => q.get(i, c) * q.get(j, d) / (q.get(i, d) * q.get(j, c)),
                    Side::Left => q.get(k, a) * q.get(l, b) / (q.get(k, b) * q.get(l, a)),
                };
                phase * ub[(k, l)] * vb[(c, d)]
            })
        })
        .collect();
    let labels = match (&u.labels, &v.labels) {
        (IndexLabels::Group(x), IndexLabels::Group(y)) => IndexLabels::Pair(x.clone(), y.clone()),
        _ => IndexLabels::Plain,
    };
    let w = MagicModel::from_blocks(labels, dim, blocks)?;
    let report = check_magic(&w, TOL_STRUCTURE);
    if !report.pass {
        return Err(Error::Invariant(format!("deformed model is not magic: {report:?}")));
    }
    Ok(w)
}

/// Flip dual `(U'_{kl})_{ij} = (U_{ij})_{kl}`.
pub fn dual(u: &MagicModel) -> Result<MagicModel> {
    if !u.is_square_configuration() {
        return Err(Error::NotSquareConfiguration {
            index_size: u.n,
            block_dim: u.d,
        });
    }
    let n = u.n;
    let blocks = (0..n * n)
        .map(|kl| {
            let (k, l) = (kl / n, kl % n);
            CMat::from_fn(n, n, |i, j| u.block(i, j)[(k, l)])
        })
        .collect();
    MagicModel::from_blocks(u.labels.clone(), n, blocks)
}

/// Worst defects of a model, each measured in operator norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MagicReport {
    pub pass: bool,
    pub self_adjoint_defect: f64,
    pub idempotent_defect: f64,
    pub row_sum_defect: f64,
    pub column_sum_defect: f64,
}

impl MagicReport {
    pub fn worst(&self) -> f64 {
        self.self_adjoint_defect
            .max(self.idempotent_defect)
            .max(self.row_sum_defect)
            .max(self.column_sum_defect)
    }
}

pub fn check_magic(u: &MagicModel, tol: f64) -> MagicReport {
    let n = u.n;
    let id = CMat::identity(u.d, u.d);
    let (self_adjoint_defect, idempotent_defect) = u
        .blocks
        .par_iter()
        .map(|b| (op_norm(&(b - b.adjoint())), op_norm(&(b * b - b))))
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
    let mut row_sum_defect = 0.0f64;
    let mut column_sum_defect = 0.0f64;
    for i in 0..n {
        let row: CMat = (0..n).fold(CMat::zeros(u.d, u.d), |acc, j| acc + u.block(i, j));
        let col: CMat = (0..n).fold(CMat::zeros(u.d, u.d), |acc, j| acc + u.block(j, i));
        row_sum_defect = row_sum_defect.max(op_norm(&(row - &id)));
        column_sum_defect = column_sum_defect.max(op_norm(&(col - &id)));
    }
    let mut report = MagicReport {
        pass: false,
        self_adjoint_defect,
        idempotent_defect,
        row_sum_defect,
        column_sum_defect,
    };
    report.pass = report.worst() <= tol;
    report
}

/// Magic check of the model and of its flip dual.
pub fn check_projective(u: &MagicModel, tol: f64) -> Result<(MagicReport, MagicReport)> {
    Ok((check_magic(u, tol), check_magic(&dual(u)?, tol)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WreathReport {
    pub pass: bool,
    /// Worst variation of `Σ_a W_{ia,jb}` over `b`.
    pub column_sum_b_dependence: f64,
    /// Worst deviation of `Σ_j W_{ia,jb}` from its value at `(a-b, 0)`.
    pub row_sum_shift_dependence: f64,
}

/// Checks the two structural sums of a model over `X × Y`: `Σ_a W_{ia,jb}`
/// does not depend on `b`, and `Σ_j W_{ia,jb}` depends on `(i, a-b)` only.
pub fn verify_wreath_structure(w: &MagicModel, x: &AbelianGroup, y: &AbelianGroup, tol: f64) -> Result<WreathReport> {
    let (m, n) = (x.size(), y.size());
    if w.n != m * n {
        return Err(Error::ShapeMismatch(format!(
            "model index size {} is not |X||Y| = {}",
            w.n,
            m * n
        )));
    }
    let zero = || CMat::zeros(w.d, w.d);
    let mut column_dep = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let sums: Vec<CMat> = (0..n)
                .map(|b| (0..n).fold(zero(), |acc, a| acc + w.block(i * n + a, j * n + b)))
                .collect();
            for s in &sums[1..] {
                column_dep = column_dep.max(max_abs(&(s - &sums[0])));
            }
        }
    }
    let mut row_dep = 0.0f64;
    for i in 0..m {
        let u_i = |a: usize, b: usize| (0..m).fold(zero(), |acc, j| acc + w.block(i * n + a, j * n + b));
        for a in 0..n {
            for b in 0..n {
                let reference = u_i(y.sub_idx(a, b), 0);
                row_dep = row_dep.max(max_abs(&(u_i(a, b) - reference)));
            }
        }
    }
    Ok(WreathReport {
        pass: column_dep <= tol && row_dep <= tol,
        column_sum_b_dependence: column_dep,
        row_sum_shift_dependence: row_dep,
    })
}

/// JSON dump of a model: metadata plus `blocks[i][j][k][l] = [re, im]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelDump {
    pub index_labels: Vec<String>,
    pub index_size: usize,
    pub block_dim: usize,
    pub tol: f64,
    pub blocks: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
}

impl MagicModel {
    pub fn to_dump(&self, tol: f64) -> ModelDump {
        let blocks = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| {
                        let b = self.block(i, j);
                        (0..self.d)
                            .map(|k| (0..self.d).map(|l| [b[(k, l)].re, b[(k, l)].im]).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ModelDump {
            index_labels: self.labels.names(),
            index_size: self.n,
            block_dim: self.d,
            tol,
            blocks,
        }
    }

    pub fn from_dump(dump: &ModelDump) -> Result<Self> {
        let labels = match dump.index_labels.as_slice() {
            [] => IndexLabels::Plain,
            [g] => IndexLabels::Group(g.parse()?),
            [x, y] => IndexLabels::Pair(x.parse()?, y.parse()?),
            _ => return Err(Error::InvalidArgument("too many index labels".into())),
        };
        let n = dump.index_size;
        let d = dump.block_dim;
        let mut blocks = Vec::with_capacity(n * n);
        for row in &dump.blocks {
            for b in row {
                if b.len() != d || b.iter().any(|r| r.len() != d) {
                    return Err(Error::ShapeMismatch("dump block has wrong size".into()));
                }
                blocks.push(CMat::from_fn(d, d, |k, l| Complex64::new(b[k][l][0], b[k][l][1])));
            }
        }
        MagicModel::from_blocks(labels, n, blocks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hadamard::{deformed_tensor, generic_q};

    fn g(s: &str) -> AbelianGroup {
        s.parse().unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn f2_blocks_by_hand() {
        let u = from_hadamard(&HadamardMatrix::fourier(&g("Z2"))).unwrap();
        let half = CMat::from_element(2, 2, c(0.5));
        assert!(max_abs(&(u.block(0, 0) - half)) < 1e-15);
        // (1/2) H_0k H_1l / (H_0l H_1k) with H_1 = (1, -1)
        let off = CMat::from_row_slice(2, 2, &[c(0.5), c(-0.5), c(-0.5), c(0.5)]);
        assert!(max_abs(&(u.block(0, 1) - off)) < 1e-15);
    }

    #[test]
    fn fourier_models_match_hadamard_construction() {
        for s in ["Z2", "Z3", "Z4", "Z2xZ2", "Z2xZ3"] {
            let x = g(s);
            let a = fourier_model(&x);
            let b = from_hadamard(&HadamardMatrix::fourier(&x)).unwrap();
            assert!(a.max_entry_diff(&b).unwrap() < 1e-12, "{s}");
            assert_eq!(a.max_block_rank(1e-8), 1);
            let (m, d) = check_projective(&a, 1e-9).unwrap();
            assert!(m.pass && d.pass, "{s}");
        }
    }

    #[test]
    fn fourier_blocks_depend_on_difference_only() {
        let x = g("Z2xZ3");
        let u = fourier_model(&x);
        let n = x.size();
        for i in 0..n {
            for j in 0..n {
                let s = x.sub_idx(i, j);
                assert_eq!(u.block(i, j), u.block(s, 0));
            }
        }
    }

    #[test]
    fn z3_diagonal_block_is_flat_projection() {
        let u = fourier_model(&g("Z3"));
        assert!(max_abs(&(u.block(0, 0) - CMat::from_element(3, 3, c(1.0 / 3.0)))) < 1e-15);
    }

    #[test]
    fn non_hadamard_input_is_rejected() {
        let mut f = HadamardMatrix::fourier(&g("Z2")).entries().clone();
        f[(0, 0)] *= 2.0;
        assert!(HadamardMatrix::new(f).is_err());
    }

    #[test]
    fn trivial_deformation_is_tensor_product() {
        let (x, y) = (g("Z2"), g("Z3"));
        let (u, v) = (fourier_model(&x), fourier_model(&y));
        let w = deform(&u, &v, &PhaseMatrix::ones(x.clone(), y.clone()), Side::Right).unwrap();
        for ia in 0..6 {
            for jb in 0..6 {
                let want = u.block(ia / 3, jb / 3).kronecker(v.block(ia % 3, jb % 3));
                assert!(max_abs(&(w.block(ia, jb) - want)) < 1e-15);
            }
        }
    }

    #[test]
    fn deformed_models_are_projective() {
        for seed in 0..20 {
            for (xs, ys) in [("Z2", "Z2"), ("Z2", "Z3")] {
                let (x, y) = (g(xs), g(ys));
                let q = generic_q(&x, &y, seed);
                for side in [Side::Right, Side::Left] {
                    let w = deform(&fourier_model(&x), &fourier_model(&y), &q, side).unwrap();
                    let (m, d) = check_projective(&w, 1e-9).unwrap();
                    assert!(m.pass && d.pass);
                }
            }
        }
    }

    #[test]
    fn model_and_hadamard_deformations_commute() {
        let (x, y) = (g("Z2"), g("Z3"));
        let (h, k) = (HadamardMatrix::fourier(&x), HadamardMatrix::fourier(&y));
        for seed in [3, 4] {
            let q = generic_q(&x, &y, seed);
            for side in [Side::Right, Side::Left] {
                let via_models = deform(&from_hadamard(&h).unwrap(), &from_hadamard(&k).unwrap(), &q, side).unwrap();
                let via_matrix = from_hadamard(&deformed_tensor(&h, &k, &q, side).unwrap()).unwrap();
                assert!(via_models.max_entry_diff(&via_matrix).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn dual_laws() {
        let (x, y) = (g("Z2"), g("Z3"));
        let u = fourier_model(&x);
        let v = fourier_model(&y);
        assert_eq!(dual(&dual(&u).unwrap()).unwrap(), u);

        // U'(H) = U(H^t) on a non-symmetric Hadamard matrix
        let q = generic_q(&x, &y, 9);
        let h = deformed_tensor(
            &HadamardMatrix::fourier(&x),
            &HadamardMatrix::fourier(&y),
            &q,
            Side::Right,
        )
        .unwrap();
        let lhs = dual(&from_hadamard(&h).unwrap()).unwrap();
        let rhs = from_hadamard(&h.transpose()).unwrap();
        assert!(lhs.max_entry_diff(&rhs).unwrap() < 1e-12);

        // W' = U' _Q⊗ V' and W°' = U' ⊗_Q V'
        let w = deform(&u, &v, &q, Side::Right).unwrap();
        let w_left = deform(&u, &v, &q, Side::Left).unwrap();
        let (ud, vd) = (dual(&u).unwrap(), dual(&v).unwrap());
        let a = dual(&w).unwrap();
        let b = deform(&ud, &vd, &q, Side::Left).unwrap();
        assert!(a.max_entry_diff(&b).unwrap() < 1e-12);
        let a = dual(&w_left).unwrap();
        let b = deform(&ud, &vd, &q, Side::Right).unwrap();
        assert!(a.max_entry_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn dual_rejects_non_square_configuration() {
        let blocks = vec![CMat::identity(2, 2)];
        let u = MagicModel::from_blocks(IndexLabels::Plain, 1, blocks).unwrap();
        assert!(matches!(
            dual(&u),
            Err(Error::NotSquareConfiguration {
                index_size: 1,
                block_dim: 2
            })
        ));
    }

    #[test]
    fn zeroed_block_fails_magic_with_unit_row_defect() {
        let u = fourier_model(&g("Z3"));
        let broken = u.with_block(0, 1, CMat::zeros(3, 3)).unwrap();
        let r = check_magic(&broken, 1e-9);
        assert!(!r.pass);
        assert!((r.row_sum_defect - 1.0).abs() < 1e-12);
        assert!((r.column_sum_defect - 1.0).abs() < 1e-12);
        assert!(r.self_adjoint_defect < 1e-12);
    }

    #[test]
    fn wreath_structure() {
        let (x, y) = (g("Z2"), g("Z2"));
        let (u, v) = (fourier_model(&x), fourier_model(&y));
        let w = deform(&u, &v, &generic_q(&x, &y, 2), Side::Right).unwrap();
        assert!(verify_wreath_structure(&w, &x, &y, 1e-9).unwrap().pass);
        let plain = deform(&u, &v, &PhaseMatrix::ones(x.clone(), y.clone()), Side::Right).unwrap();
        assert!(verify_wreath_structure(&plain, &x, &y, 1e-9).unwrap().pass);

        let (x3, y3) = (g("Z2"), g("Z3"));
        let w3 = deform(
            &fourier_model(&x3),
            &fourier_model(&y3),
            &generic_q(&x3, &y3, 8),
            Side::Right,
        )
        .unwrap();
        assert!(verify_wreath_structure(&w3, &x3, &y3, 1e-9).unwrap().pass);
        let shuffled = w3.permute_rows(&[3, 0, 5, 1, 2, 4]).unwrap();
        assert!(!verify_wreath_structure(&shuffled, &x3, &y3, 1e-9).unwrap().pass);
    }

    #[test]
    fn dump_roundtrip() {
        let x = g("Z2");
        let w = deform(
            &fourier_model(&x),
            &fourier_model(&x),
            &generic_q(&x, &x, 1),
            Side::Right,
        )
        .unwrap();
        let text = serde_json::to_string(&w.to_dump(1e-9)).unwrap();
        let back = MagicModel::from_dump(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, w);
    }
}
