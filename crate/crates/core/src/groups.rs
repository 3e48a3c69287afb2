//! Finite abelian groups `Z_{n1} × … × Z_{nk}` and their Fourier matrices.
//!
//! Elements are enumerated in mixed radix with the first cyclic factor most
//! significant, so the product `X × Y` of two groups enumerates as
//! `index = idx_X·|Y| + idx_Y`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{root_of_unity, CMat};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AbelianGroup {
    orders: Vec<usize>,
    size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElt {
    residues: Vec<usize>,
}

impl GroupElt {
    pub fn residues(&self) -> &[usize] {
        &self.residues
    }
}

impl fmt::Display for GroupElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.residues.len() == 1 {
            return write!(f, "{}", self.residues[0]);
        }
        write!(f, "(")?;
        for (n, r) in self.residues.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

impl AbelianGroup {
    pub fn new(orders: Vec<usize>) -> Result<Self> {
        if orders.is_empty() || orders.contains(&0) {
            return Err(Error::GroupDescriptor(format!("{orders:?}")));
        }
        let size = orders
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::GroupDescriptor(format!("{orders:?} is too large")))?;
        Ok(Self { orders, size })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// Direct product `self × other`, enumerated with `self` outer.
    pub fn product(&self, other: &AbelianGroup) -> AbelianGroup {
        let mut orders = self.orders.clone();
        orders.extend_from_slice(&other.orders);
        AbelianGroup::new(orders).expect("product of valid groups")
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn elt(&self, residues: &[usize]) -> Result<GroupElt> {
        self.check_arity(residues.len())?;
        Ok(GroupElt {
            residues: residues.iter().zip(&self.orders).map(|(r, n)| r % n).collect(),
        })
    }

    fn check_arity(&self, got: usize) -> Result<()> {
        if got != self.orders.len() {
            return Err(Error::ArityMismatch {
                expected: self.orders.len(),
                got,
            });
        }
        Ok(())
    }

    pub fn zero(&self) -> GroupElt {
        GroupElt {
            residues: vec![0; self.orders.len()],
        }
    }

    pub fn add(&self, a: &GroupElt, b: &GroupElt) -> Result<GroupElt> {
        self.check_arity(a.residues.len())?;
        self.check_arity(b.residues.len())?;
        Ok(GroupElt {
            residues: a
                .residues
                .iter()
                .zip(&b.residues)
                .zip(&self.orders)
                .map(|((x, y), n)| (x + y) % n)
                .collect(),
        })
    }

    pub fn negate(&self, a: &GroupElt) -> Result<GroupElt> {
        self.check_arity(a.residues.len())?;
        Ok(GroupElt {
            residues: a
                .residues
                .iter()
                .zip(&self.orders)
                .map(|(x, n)| (n - x % n) % n)
                .collect(),
        })
    }

    pub fn sub(&self, a: &GroupElt, b: &GroupElt) -> Result<GroupElt> {
        self.add(a, &self.negate(b)?)
    }

    /// All elements in canonical order, starting with zero.
    pub fn enumerate(&self) -> Vec<GroupElt> {
        (0..self.size).map(|k| self.element(k)).collect()
    }

    /// Canonical index of an element.
    pub fn index_of(&self, a: &GroupElt) -> Result<usize> {
        self.check_arity(a.residues.len())?;
        Ok(a.residues
            .iter()
            .zip(&self.orders)
            .fold(0, |acc, (r, n)| acc * n + r % n))
    }

    /// Element at canonical index `k` (taken modulo the group size).
    pub fn element(&self, k: usize) -> GroupElt {
        let mut k = k % self.size;
        let mut residues = vec![0; self.orders.len()];
        for (slot, n) in residues.iter_mut().zip(&self.orders).rev() {
            *slot = k % n;
            k /= n;
        }
        GroupElt { residues }
    }

    // Index-level arithmetic used by the hot loops of the model builders.

    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        self.combine_idx(a, b, |x, y, n| (x + y) % n)
    }

    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        self.combine_idx(a, b, |x, y, n| (x + n - y) % n)
    }

    pub fn neg_idx(&self, a: usize) -> usize {
        self.sub_idx(0, a)
    }

    fn combine_idx(&self, mut a: usize, mut b: usize, f: impl Fn(usize, usize, usize) -> usize) -> usize {
        if self.orders.len() == 1 {
            let n = self.orders[0];
            return f(a % n, b % n, n);
        }
        let mut out = 0;
        let mut place = 1;
        for &n in self.orders.iter().rev() {
            out += f(a % n, b % n, n) * place;
            a /= n;
            b /= n;
            place *= n;
        }
        out
    }

    /// Character value `F_{x,y} = Π_j exp(2πi x_j y_j / n_j)` at canonical
    /// indices, evaluated as a single exact root of unity of order
    /// `lcm(n_1, …, n_k)`.
    pub fn character(&self, x: usize, y: usize) -> Complex64 {
        let (num, den) = self.character_turns(x, y);
        root_of_unity(num, den)
    }

    /// The character value as a reduced fraction of a full turn.
    pub fn character_turns(&self, mut x: usize, mut y: usize) -> (u64, u64) {
        let l = self.exponent() as u64;
        let mut num = 0u64;
        for &n in self.orders.iter().rev() {
            let (xr, yr) = (x % n, y % n);
            num = (num + ((xr * yr) % n) as u64 * (l / n as u64)) % l;
            x /= n;
            y /= n;
        }
        (num, l)
    }

    /// Least common multiple of the cyclic orders.
    pub fn exponent(&self) -> usize {
        self.orders.iter().fold(1, |acc, &n| acc.lcm(&n))
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.orders.iter().map(|n| format!("Z{n}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl FromStr for AbelianGroup {
    type Err = Error;

    /// Parses descriptors such as `Z2`, `Z2xZ3`, `z4xz4`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::GroupDescriptor(s.to_string());
        let orders = s
            .trim()
            .split(['x', 'X', '*'])
            .map(|part| {
                let part = part.trim();
                let digits = part
                    .strip_prefix('Z')
                    .or_else(|| part.strip_prefix('z'))
                    .ok_or_else(bad)?;
                digits.parse::<usize>().map_err(|_| bad())
            })
            .collect::<Result<Vec<_>>>()?;
        AbelianGroup::new(orders).map_err(|_| bad())
    }
}

impl TryFrom<String> for AbelianGroup {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AbelianGroup> for String {
    fn from(g: AbelianGroup) -> String {
        g.to_string()
    }
}

/// Fourier matrix `F_X` under the canonical enumeration.
pub fn fourier_matrix(x: &AbelianGroup) -> CMat {
    let n = x.size();
    CMat::from_fn(n, n, |i, j| x.character(i, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, max_abs_diff};
    use proptest::prelude::*;

    fn g(s: &str) -> AbelianGroup {
        s.parse().unwrap()
    }

    #[test]
    fn cyclic_addition_wraps() {
        let z4 = g("Z4");
        let s = z4.add(&z4.elt(&[3]).unwrap(), &z4.elt(&[2]).unwrap()).unwrap();
        assert_eq!(s.residues(), &[1]);
    }

    #[test]
    fn componentwise_negation() {
        let x = g("Z2xZ3");
        let n = x.negate(&x.elt(&[1, 2]).unwrap()).unwrap();
        assert_eq!(n.residues(), &[1, 1]);
    }

    #[test]
    fn enumeration_is_lexicographic_first_factor_major() {
        let x = g("Z2xZ2");
        let all: Vec<Vec<usize>> = x.enumerate().iter().map(|e| e.residues().to_vec()).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(x.enumerate()[0], x.zero());
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let x = g("Z2xZ3");
        assert!(matches!(x.elt(&[1]), Err(Error::ArityMismatch { expected: 2, got: 1 })));
        let z2 = g("Z2");
        assert!(x.add(&x.zero(), &z2.zero()).is_err());
    }

    #[test]
    fn descriptor_parsing() {
        assert_eq!(g("Z2xZ3").orders(), &[2, 3]);
        assert_eq!(g(" z5 ").size(), 5);
        assert_eq!(g("Z2xZ3").to_string(), "Z2xZ3");
        assert!("Y2".parse::<AbelianGroup>().is_err());
        assert!("Z0".parse::<AbelianGroup>().is_err());
        assert!("Z2x".parse::<AbelianGroup>().is_err());
    }

    #[test]
    fn small_fourier_matrices() {
        let f1 = fourier_matrix(&g("Z1"));
        assert_eq!(f1.shape(), (1, 1));
        assert_eq!(f1[(0, 0)], Complex64::new(1.0, 0.0));

        let f2 = fourier_matrix(&g("Z2"));
        let expected = CMat::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0].map(|v| Complex64::new(v, 0.0)));
        assert_eq!(f2, expected);

        // character formula on Z2xZ2 against the Kronecker product
        let f22 = fourier_matrix(&g("Z2xZ2"));
        assert!(max_abs_diff(&f22, &kron(&f2, &f2)) == 0.0);
    }

    #[test]
    fn mixed_factor_fourier_is_kronecker() {
        let f = fourier_matrix(&g("Z2xZ3xZ4"));
        let k = kron(
            &kron(&fourier_matrix(&g("Z2")), &fourier_matrix(&g("Z3"))),
            &fourier_matrix(&g("Z4")),
        );
        assert!(max_abs_diff(&f, &k) < 1e-12);
    }

    #[test]
    fn fourier_is_hadamard() {
        for s in ["Z3", "Z2xZ3", "Z4xZ2", "Z7"] {
            let x = g(s);
            let f = fourier_matrix(&x);
            let ff = &f * f.adjoint();
            let id = CMat::identity(x.size(), x.size()) * Complex64::new(x.size() as f64, 0.0);
            assert!(max_abs_diff(&ff, &id) < 1e-9, "{s}");
        }
    }

    fn group_strategy() -> impl Strategy<Value = AbelianGroup> {
        prop::collection::vec(1usize..6, 1..4).prop_map(|o| AbelianGroup::new(o).unwrap())
    }

    proptest! {
        #[test]
        fn character_identities(x in group_strategy(), a in 0usize..1000, b in 0usize..1000, c in 0usize..1000) {
            let n = x.size();
            let (a, b, c) = (a % n, b % n, c % n);
            let f = |i: usize, j: usize| x.character(i, j);
            prop_assert!((f(x.add_idx(a, b), c) - f(a, c) * f(b, c)).norm() < 1e-12);
            prop_assert!((f(a, x.add_idx(b, c)) - f(a, b) * f(a, c)).norm() < 1e-12);
            prop_assert!((f(x.neg_idx(a), b) - f(a, b).conj()).norm() < 1e-12);
        }

        #[test]
        fn index_arithmetic_matches_elements(x in group_strategy(), a in 0usize..1000, b in 0usize..1000) {
            let (a, b) = (a % x.size(), b % x.size());
            let (ea, eb) = (x.element(a), x.element(b));
            prop_assert_eq!(x.index_of(&x.add(&ea, &eb).unwrap()).unwrap(), x.add_idx(a, b));
            prop_assert_eq!(x.index_of(&x.sub(&ea, &eb).unwrap()).unwrap(), x.sub_idx(a, b));
            prop_assert_eq!(x.index_of(&ea).unwrap(), a);
        }
    }
}
