//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Unit complex number `exp(2πi·turns)`.
///
/// Quarter turns are produced exactly so that real and imaginary parts of
/// `±1`, `±i` carry no rounding noise.
pub fn unit_from_turns(turns: f64) -> Complex64 {
    let t = turns.rem_euclid(1.0);
    let quarters = 4.0 * t;
    if quarters.fract() == 0.0 {
        return match quarters as u32 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let (s, c) = (std::f64::consts::TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// `exp(2πi·k/n)`, with `k` reduced modulo `n` before conversion.
pub fn root_of_unity(k: u64, n: u64) -> Complex64 {
    assert!(n > 0, "root of unity of order zero");
    let k = k % n;
    if (4 * k).is_multiple_of(n) {
        return unit_from_turns((4 * k / n) as f64 / 4.0);
    }
    unit_from_turns(k as f64 / n as f64)
}

/// Turn angle in `[0, 1)` of a nonzero complex number.
pub fn turns_of(z: Complex64) -> f64 {
    (z.arg() / std::f64::consts::TAU).rem_euclid(1.0)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Largest entry of `|A - A*|`.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(a: &CMat) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Numerical rank from the singular values.
pub fn numerical_rank(a: &CMat, tol: f64) -> usize {
    a.clone().singular_values().iter().filter(|s| **s > tol).count()
}

/// All eigenvalues of a square complex matrix.
///
/// Hermitian input (within `1e-10`) goes through the Hermitian solver; any
/// other input through a complex Schur decomposition.
pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    if hermitian_defect(a) <= 1e-10 {
        let mut h = a.clone();
        // symmetrize so the solver sees an exactly Hermitian matrix
        let n = h.nrows();
        for i in 0..n {
            for j in i..n {
                let v = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        let eig = nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Eigen("Hermitian solver did not converge".into()))?;
        return Ok(eig.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)).collect());
    }
    let schur = nalgebra::Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    let eig = nalgebra::SymmetricEigen::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("Hermitian solver did not converge".into()))?;
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Pairwise (tree) summation in index order; independent of thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(unit_from_turns(0.25), Complex64::new(0.0, 1.0));
        assert_eq!(unit_from_turns(0.5), Complex64::new(-1.0, 0.0));
        assert_eq!(unit_from_turns(-0.25), Complex64::new(0.0, -1.0));
        assert_eq!(root_of_unity(3, 6), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn eigenvalues_of_non_hermitian() {
        // upper triangular: eigenvalues on the diagonal
        let a = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(3.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 2.0),
            ],
        );
        let mut ev = eigenvalues(&a).unwrap();
        ev.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert!((ev[0] - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }
}
