//! Complex Hadamard matrices, phase matrices `Q` and deformed tensor
//! products `H ⊗_Q K`, `H _Q⊗ K`.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{fourier_matrix, AbelianGroup};
use crate::linalg::{turns_of, unit_from_turns, CMat};
use crate::TOL_STRUCTURE;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HadamardReport {
    pub is_hadamard: bool,
    pub max_modulus_defect: f64,
    pub max_orthogonality_defect: f64,
}

/// Checks unimodularity of entries and orthogonality of distinct rows.
pub fn validate_hadamard(h: &CMat, tol: f64) -> Result<HadamardReport> {
    if h.nrows() != h.ncols() {
        return Err(Error::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    let n = h.nrows();
    let max_modulus_defect = h.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    let mut max_orthogonality_defect = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let ip: Complex64 = (0..n).map(|k| h[(i, k)] * h[(j, k)].conj()).sum();
            max_orthogonality_defect = max_orthogonality_defect.max(ip.norm());
        }
    }
    Ok(HadamardReport {
        is_hadamard: max_modulus_defect <= tol && max_orthogonality_defect <= tol,
        max_modulus_defect,
        max_orthogonality_defect,
    })
}

/// A validated complex Hadamard matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HadamardMatrix {
    entries: CMat,
}

impl HadamardMatrix {
    pub fn new(entries: CMat) -> Result<Self> {
        let report = validate_hadamard(&entries, TOL_STRUCTURE)?;
        if !report.is_hadamard {
            return Err(Error::NotHadamard {
                modulus: report.max_modulus_defect,
                orthogonality: report.max_orthogonality_defect,
            });
        }
        Ok(Self { entries })
    }

    pub fn fourier(x: &AbelianGroup) -> Self {
        Self {
            entries: fourier_matrix(x),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        Self {
            entries: self.entries.transpose(),
        }
    }
}

/// Which deformed product: `⊗_Q` (right) or `_Q⊗` (left).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
}

/// Deformed tensor product of Hadamard matrices.
///
/// Row index `(i, a)`, column index `(j, b)`, both `X`-outer. Entry
/// `Q_{ib} H_{ij} K_{ab}` (right) or `Q_{ja} H_{ij} K_{ab}` (left).
pub fn deformed_tensor(h: &HadamardMatrix, k: &HadamardMatrix, q: &PhaseMatrix, side: Side) -> Result<HadamardMatrix> {
    let (m, n) = (h.dim(), k.dim());
    if q.rows() != m || q.cols() != n {
        return Err(Error::ShapeMismatch(format!(
            "Q is {}x{}, factors are {m} and {n}",
            q.rows(),
            q.cols()
        )));
    }
    let out = CMat::from_fn(m * n, m * n, |row, col| {
        let (i, a) = (row / n, row % n);
        let (j, b) = (col / n, col % n);
        let phase = match side {
            Side::Right => q.get(i, b),
            Side::Left => q.get(j, a),
        };
        phase * h.entries[(i, j)] * k.entries[(a, b)]
    });
    HadamardMatrix::new(out)
}

/// Unit-modulus parameter matrix `Q` indexed by `X × Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMatrix {
    x: AbelianGroup,
    y: AbelianGroup,
    entries: CMat,
    dephased: bool,
}

impl PhaseMatrix {
    /// Raw constructor; validates unit modulus and, when `dephased` is set,
    /// that the first row and column are exactly 1.
    pub fn from_entries(x: AbelianGroup, y: AbelianGroup, entries: CMat, dephased: bool) -> Result<Self> {
        if entries.nrows() != x.size() || entries.ncols() != y.size() {
            return Err(Error::ShapeMismatch(format!(
                "Q is {}x{}, expected {}x{}",
                entries.nrows(),
                entries.ncols(),
                x.size(),
                y.size()
            )));
        }
        if entries.iter().any(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidArgument("Q entries must have modulus 1".into()));
        }
        if dephased {
            let one = Complex64::new(1.0, 0.0);
            let first_row = (0..entries.ncols()).all(|c| entries[(0, c)] == one);
            let first_col = (0..entries.nrows()).all(|i| entries[(i, 0)] == one);
            if !(first_row && first_col) {
                return Err(Error::NotDephased);
            }
        }
        Ok(Self {
            x,
            y,
            entries,
            dephased,
        })
    }

    /// Builds `Q_{ic} = exp(2πi·angles[i][c])`.
    pub fn from_turns(x: AbelianGroup, y: AbelianGroup, angles: &[Vec<f64>], dephased: bool) -> Result<Self> {
        if angles.len() != x.size() || angles.iter().any(|row| row.len() != y.size()) {
            return Err(Error::ShapeMismatch(format!(
                "angle table must be {}x{}",
                x.size(),
                y.size()
            )));
        }
        let entries = CMat::from_fn(x.size(), y.size(), |i, c| unit_from_turns(angles[i][c]));
        Self::from_entries(x, y, entries, dephased)
    }

    pub fn ones(x: AbelianGroup, y: AbelianGroup) -> Self {
        let entries = CMat::from_element(x.size(), y.size(), Complex64::new(1.0, 0.0));
        Self {
            x,
            y,
            entries,
            dephased: true,
        }
    }

    pub fn x(&self) -> &AbelianGroup {
        &self.x
    }

    pub fn y(&self) -> &AbelianGroup {
        &self.y
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_dephased(&self) -> bool {
        self.dephased
    }

    #[inline]
    pub fn get(&self, i: usize, c: usize) -> Complex64 {
        self.entries[(i, c)]
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn angles_turns(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|c| turns_of(self.entries[(i, c)])).collect())
            .collect()
    }

    pub fn to_file(&self) -> PhaseFile {
        PhaseFile {
            x: self.x.to_string(),
            y: self.y.to_string(),
            angles_turns: self.angles_turns(),
            dephased: Some(self.dephased),
        }
    }

    pub fn from_file(file: &PhaseFile) -> Result<Self> {
        let x: AbelianGroup = file.x.parse()?;
        let y: AbelianGroup = file.y.parse()?;
        Self::from_turns(x, y, &file.angles_turns, file.dephased.unwrap_or(false))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: PhaseFile = serde_json::from_str(&text)?;
        Self::from_file(&file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_file())?)?;
        Ok(())
    }
}

/// On-disk form of a phase matrix; angles are in turns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseFile {
    pub x: String,
    pub y: String,
    pub angles_turns: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dephased: Option<bool>,
}

/// Seeded random dephased `Q`, standing in for a generic parameter matrix.
///
/// Free entries `(i≠0, c≠0)` are drawn in row-major order as
/// `exp(2πiθ)` with `θ` uniform in `[0, 1)`.
pub fn generic_q(x: &AbelianGroup, y: &AbelianGroup, seed: u64) -> PhaseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, n) = (x.size(), y.size());
    let mut entries = CMat::from_element(m, n, Complex64::new(1.0, 0.0));
    for i in 1..m {
        for c in 1..n {
            entries[(i, c)] = unit_from_turns(rng.random::<f64>());
        }
    }
    PhaseMatrix {
        x: x.clone(),
        y: y.clone(),
        entries,
        dephased: true,
    }
}

/// Normalized Gram quantity `C_{abcd} = (1/N)⟨H_a/H_b, H_c/H_d⟩`.
pub fn gram_quantity(h: &HadamardMatrix, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
    let e = h.entries();
    let n = h.dim();
    let s: Complex64 = (0..n)
        .map(|r| (e[(a, r)] / e[(b, r)]) * (e[(c, r)] / e[(d, r)]).conj())
        .sum();
    s / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, max_abs_diff};

    fn g(s: &str) -> AbelianGroup {
        s.parse().unwrap()
    }

    #[test]
    fn fourier_z3_is_hadamard() {
        let r = validate_hadamard(&fourier_matrix(&g("Z3")), 1e-9).unwrap();
        assert!(r.is_hadamard);
    }

    #[test]
    fn identity_is_not_hadamard() {
        let r = validate_hadamard(&CMat::identity(2, 2), 1e-9).unwrap();
        assert!(!r.is_hadamard);
        assert!((r.max_modulus_defect - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_entry_reports_modulus_defect() {
        let mut f = fourier_matrix(&g("Z2"));
        f[(1, 1)] *= 1.01;
        let r = validate_hadamard(&f, 1e-9).unwrap();
        assert!(!r.is_hadamard);
        assert!((r.max_modulus_defect - 0.01).abs() < 1e-12);
    }

    #[test]
    fn non_square_is_rejected() {
        let m = CMat::from_element(2, 3, Complex64::new(1.0, 0.0));
        assert!(matches!(validate_hadamard(&m, 1e-9), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn trivial_q_gives_kronecker_product() {
        let (x, y) = (g("Z2"), g("Z3"));
        let (h, k) = (HadamardMatrix::fourier(&x), HadamardMatrix::fourier(&y));
        let q = PhaseMatrix::ones(x, y);
        for side in [Side::Right, Side::Left] {
            let d = deformed_tensor(&h, &k, &q, side).unwrap();
            assert!(max_abs_diff(d.entries(), &kron(h.entries(), k.entries())) < 1e-15);
        }
    }

    #[test]
    fn random_deformations_stay_hadamard() {
        let pairs = [("Z2", "Z2"), ("Z2", "Z3"), ("Z3", "Z2"), ("Z2xZ2", "Z3")];
        for seed in 0..50u64 {
            let (xs, ys) = pairs[seed as usize % pairs.len()];
            let (x, y) = (g(xs), g(ys));
            let (h, k) = (HadamardMatrix::fourier(&x), HadamardMatrix::fourier(&y));
            let q = generic_q(&x, &y, seed);
            for side in [Side::Right, Side::Left] {
                let d = deformed_tensor(&h, &k, &q, side).unwrap();
                assert!(validate_hadamard(d.entries(), 1e-9).unwrap().is_hadamard);
            }
        }
    }

    #[test]
    fn right_and_left_products_are_related_by_transposition() {
        // (H ⊗_Q K)^t = H^t _Q⊗ K^t
        let (x, y) = (g("Z2"), g("Z2"));
        let (h, k) = (HadamardMatrix::fourier(&x), HadamardMatrix::fourier(&y));
        let q = generic_q(&x, &y, 11);
        let right = deformed_tensor(&h, &k, &q, Side::Right).unwrap();
        let left = deformed_tensor(&h.transpose(), &k.transpose(), &q, Side::Left).unwrap();
        assert!(max_abs_diff(&right.entries().transpose(), left.entries()) < 1e-15);
        // entrywise against the defining formulas
        for (ia, jb) in (0..4).flat_map(|r| (0..4).map(move |c| (r, c))) {
            let (i, a, j, b) = (ia / 2, ia % 2, jb / 2, jb % 2);
            let want = q.get(i, b) * h.entries()[(i, j)] * k.entries()[(a, b)];
            assert!((right.entries()[(ia, jb)] - want).norm() < 1e-15);
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let (x, y) = (g("Z2"), g("Z3"));
        let h = HadamardMatrix::fourier(&x);
        let q = PhaseMatrix::ones(x.clone(), y.clone());
        assert!(matches!(
            deformed_tensor(&h, &h, &q, Side::Right),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn generic_q_is_deterministic_and_dephased() {
        let (x, y) = (g("Z3"), g("Z2xZ2"));
        let a = generic_q(&x, &y, 42);
        let b = generic_q(&x, &y, 42);
        assert_eq!(a, b);
        assert_ne!(a, generic_q(&x, &y, 43));
        let one = Complex64::new(1.0, 0.0);
        for c in 0..y.size() {
            assert_eq!(a.get(0, c), one);
        }
        for i in 0..x.size() {
            assert_eq!(a.get(i, 0), one);
        }
    }

    #[test]
    fn z2_generic_q_has_one_free_phase() {
        let z2 = g("Z2");
        let q = generic_q(&z2, &z2, 1);
        let one = Complex64::new(1.0, 0.0);
        assert_eq!((q.get(0, 0), q.get(0, 1), q.get(1, 0)), (one, one, one));
        assert!((q.get(1, 1).norm() - 1.0).abs() < 1e-15);
        assert_ne!(q.get(1, 1), one);
    }

    #[test]
    fn phase_file_roundtrip_and_dephasing_check() {
        let (x, y) = (g("Z2"), g("Z3"));
        let q = generic_q(&x, &y, 5);
        let back = PhaseMatrix::from_file(&q.to_file()).unwrap();
        assert!(max_abs_diff(back.entries(), q.entries()) < 1e-12);

        let bad = PhaseFile {
            x: "Z2".into(),
            y: "Z2".into(),
            angles_turns: vec![vec![0.0, 0.1], vec![0.0, 0.3]],
            dephased: Some(true),
        };
        assert!(matches!(PhaseMatrix::from_file(&bad), Err(Error::NotDephased)));
        let raw = PhaseFile { dephased: None, ..bad };
        assert!(PhaseMatrix::from_file(&raw).is_ok());
    }

    #[test]
    fn phase_file_json_layout() {
        let text = r#"{"x": "Z2", "y": "Z2", "angles_turns": [[0,0],[0,0.123]], "dephased": true}"#;
        let file: PhaseFile = serde_json::from_str(text).unwrap();
        let q = PhaseMatrix::from_file(&file).unwrap();
        assert!((q.get(1, 1) - unit_from_turns(0.123)).norm() < 1e-15);
    }

    #[test]
    fn fourier_gram_quantities_are_kronecker_deltas() {
        for s in ["Z2", "Z3", "Z2xZ2", "Z4"] {
            let x = g(s);
            let h = HadamardMatrix::fourier(&x);
            let n = x.size();
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let want = if x.sub_idx(a, b) == x.sub_idx(c, d) { 1.0 } else { 0.0 };
                            let got = gram_quantity(&h, a, b, c, d);
                            assert!((got - Complex64::new(want, 0.0)).norm() < 1e-12, "{s}");
                        }
                    }
                }
            }
        }
    }
}
