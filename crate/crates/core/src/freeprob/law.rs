use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use super::partitions::narayana_count;
use super::quad::{integrate_endpoints, integrate_endpoints_upto};
use crate::error::{Error, Result};

/// Absolute quadrature tolerance used for law moments and masses.
const QUAD_TOL: f64 = 1e-10;

/// A density on `[a, b]`, assumed to have at worst square-root endpoint behaviour.
#[derive(Clone)]
pub struct DensityPiece {
    pub a: f64,
    pub b: f64,
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl DensityPiece {
    pub fn new(a: f64, b: f64, density: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            a,
            b,
            density: Arc::new(density),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            0.0
        } else {
            (self.density)(x)
        }
    }

    /// `∫ x^p f(x) dx` over the piece.
    pub fn moment(&self, p: usize) -> Result<f64> {
        let f = Arc::clone(&self.density);
        integrate_endpoints(move |x| x.powi(p as i32) * f(x), self.a, self.b, QUAD_TOL)
    }

    /// `∫_a^{min(u, b)} f`.
    pub fn mass_upto(&self, u: f64) -> Result<f64> {
        let f = Arc::clone(&self.density);
        integrate_endpoints_upto(move |x| f(x), self.a, self.b, u, QUAD_TOL)
    }
}

impl fmt::Debug for DensityPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityPiece")
            .field("a", &self.a)
            .field("b", &self.b)
            .finish_non_exhaustive()
    }
}

/// Atoms plus continuous pieces, with a declared total mass.
#[derive(Clone, Debug)]
pub struct SpectralLaw {
    pub atoms: Vec<(f64, f64)>,
    pub pieces: Vec<DensityPiece>,
    pub total_mass: f64,
}

impl SpectralLaw {
    /// Builds a law and checks masses against the declared total within `1e-6`.
    pub fn new(atoms: Vec<(f64, f64)>, pieces: Vec<DensityPiece>, total_mass: f64) -> Result<Self> {
        if atoms.iter().any(|&(_, m)| m < 0.0) {
            return Err(Error::InvalidArgument("negative atom mass".into()));
        }
        let law = Self {
            atoms,
            pieces,
            total_mass,
        };
        let mass = law.mass()?;
        if (mass - total_mass).abs() > 1e-6 {
            return Err(Error::Invariant(format!(
                "law mass {mass} differs from declared {total_mass}"
            )));
        }
        Ok(law)
    }

    /// Atom masses plus quadrature of the densities.
    pub fn mass(&self) -> Result<f64> {
        let continuous: f64 = self.pieces.iter().map(|p| p.moment(0)).sum::<Result<f64>>()?;
        Ok(self.atoms.iter().map(|&(_, m)| m).sum::<f64>() + continuous)
    }

    pub fn continuous_mass(&self) -> Result<f64> {
        self.pieces.iter().map(|p| p.moment(0)).sum()
    }

    pub fn density(&self, x: f64) -> f64 {
        self.pieces.iter().map(|p| p.eval(x)).sum()
    }

    /// Law of `rX` for `r > 0`.
    pub fn dilate(&self, r: f64) -> Result<Self> {
        if r <= 0.0 {
            return Err(Error::InvalidArgument("dilation factor must be positive".into()));
        }
        let atoms = self.atoms.iter().map(|&(x, m)| (r * x, m)).collect();
        let pieces = self
            .pieces
            .iter()
            .map(|piece| {
                let inner = Arc::clone(&piece.density);
                DensityPiece::new(r * piece.a, r * piece.b, move |x| inner(x / r) / r)
            })
            .collect();
        Ok(Self {
            atoms,
            pieces,
            total_mass: self.total_mass,
        })
    }

    /// `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().filter(|&&(loc, _)| loc <= x).map(|&(_, m)| m).sum();
        let cont: f64 = self.pieces.iter().map(|p| p.mass_upto(x)).sum::<Result<f64>>()?;
        Ok(atoms + cont)
    }

    /// Atoms section followed by `samples` density points per piece.
    pub fn to_csv(&self, samples: usize) -> String {
        let mut out = String::from("# atoms\nlocation,mass\n");
        for &(x, m) in &self.atoms {
            let _ = writeln!(out, "{x},{m}");
        }
        out.push_str("# density\nx,density\n");
        for piece in &self.pieces {
            for k in 0..samples {
                let x = piece.a + (piece.b - piece.a) * (k as f64 + 0.5) / samples as f64;
                let _ = writeln!(out, "{x},{}", piece.eval(x));
            }
        }
        out
    }
}

/// Free Poisson law `π_t`: density `√(4t - (x-1-t)²)/(2πx)` on
/// `[(1-√t)², (1+√t)²]` and an atom `max(1-t, 0)` at 0.
pub fn free_poisson(t: f64) -> Result<SpectralLaw> {
    if t <= 0.0 {
        return Err(Error::InvalidArgument("free Poisson rate must be positive".into()));
    }
    let s = t.sqrt();
    let piece = DensityPiece::new((1.0 - s).powi(2), (1.0 + s).powi(2), move |x| {
        let disc = 4.0 * t - (x - 1.0 - t).powi(2);
        if disc <= 0.0 || x <= 0.0 {
            0.0
        } else {
            disc.sqrt() / (std::f64::consts::TAU * x)
        }
    });
    let atoms = if t < 1.0 { vec![(0.0, 1.0 - t)] } else { Vec::new() };
    SpectralLaw::new(atoms, vec![piece], 1.0)
}

/// Limiting law of `χ` for `|X| = αK`, `|Y| = βK`.
///
/// The continuous part has density
/// `(1/(αβK²))·√(4αβK² - (x-αK-βK)²)/(2πx)` on `[(√α-√β)²K, (√α+√β)²K]`,
/// of mass `1/(max(α,β)K)`; the atom at 0 carries the rest.
pub fn asymptotic_law(alpha: f64, beta: f64, k: f64) -> Result<SpectralLaw> {
    if alpha <= 0.0 || beta <= 0.0 || k <= 0.0 {
        return Err(Error::InvalidArgument("α, β, K must be positive".into()));
    }
    let ab = alpha * beta * k * k;
    let (ak, bk) = (alpha * k, beta * k);
    let lo = (alpha.sqrt() - beta.sqrt()).powi(2) * k;
    let hi = (alpha.sqrt() + beta.sqrt()).powi(2) * k;
    let piece = DensityPiece::new(lo, hi, move |x| {
        let disc = 4.0 * ab - (x - ak - bk).powi(2);
        if disc <= 0.0 || x <= 0.0 {
            0.0
        } else {
            disc.sqrt() / (std::f64::consts::TAU * x) / ab
        }
    });
    let continuous = piece.moment(0)?;
    if continuous > 1.0 + 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "continuous mass {continuous} exceeds 1; needs max(α, β)·K ≥ 1"
        )));
    }
    SpectralLaw::new(vec![(0.0, (1.0 - continuous).max(0.0))], vec![piece], 1.0)
}

/// `K^{p-1} Σ_r N(p, r) α^{r-1} β^{p-r}` with `N` the Narayana counts.
pub fn predicted_moment(alpha: f64, beta: f64, k: f64, p: usize) -> Result<f64> {
    let mut sum = 0.0;
    for r in 1..=p {
        sum += narayana_count(p, r)? as f64 * alpha.powi(r as i32 - 1) * beta.powi((p - r) as i32);
    }
    Ok(k.powi(p as i32 - 1) * sum)
}

/// `Σ m·x^p` over atoms plus `∫ x^p f` over pieces.
pub fn law_moment(law: &SpectralLaw, p: usize) -> Result<f64> {
    let atoms: f64 = law.atoms.iter().map(|&(x, m)| m * x.powi(p as i32)).sum();
    let cont: f64 = law.pieces.iter().map(|piece| piece.moment(p)).sum::<Result<f64>>()?;
    Ok(atoms + cont)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freeprob::partitions::free_poisson_moment;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn dirac_at_zero() {
        let law = SpectralLaw::new(vec![(0.0, 1.0)], Vec::new(), 1.0).unwrap();
        for p in 1..=4 {
            assert_eq!(law_moment(&law, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn free_poisson_quadrature_matches_nc_sums() {
        for t in [0.5, 1.0, 2.0] {
            let law = free_poisson(t).unwrap();
            for p in 1..=6 {
                let q = law_moment(&law, p).unwrap();
                let nc = free_poisson_moment(t, p).unwrap();
                assert!((q - nc).abs() < 1e-6, "t={t} p={p}: {q} vs {nc}");
            }
        }
        assert!((law_moment(&free_poisson(1.0).unwrap(), 2).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn dilation_scales_moments() {
        let law = free_poisson(1.5).unwrap();
        let r = 2.5;
        let d = law.dilate(r).unwrap();
        for p in 1..=4 {
            let want = r.powi(p as i32) * law_moment(&law, p).unwrap();
            assert!(rel(law_moment(&d, p).unwrap(), want) < 1e-9);
        }
        assert!((d.mass().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn asymptotic_support_and_predictor() {
        let k = 3.0;
        let law = asymptotic_law(1.0, 1.0, k).unwrap();
        assert_eq!((law.pieces[0].a, law.pieces[0].b), (0.0, 4.0 * k));
        assert!((predicted_moment(1.0, 1.0, k, 2).unwrap() - 2.0 * k).abs() < 1e-12);
        let q2 = law.pieces[0].moment(2).unwrap();
        assert!(rel(q2, 2.0 * k) < 1e-4);
    }

    #[test]
    fn asymptotic_moments_match_narayana() {
        for (alpha, beta) in [(0.5, 1.0), (1.0, 1.0), (2.0, 1.0)] {
            let k = 4.0;
            let law = asymptotic_law(alpha, beta, k).unwrap();
            let cmass = law.continuous_mass().unwrap();
            assert!(rel(cmass, 1.0 / (f64::max(alpha, beta) * k)) < 1e-8);
            for p in 1..=5 {
                let q = law_moment(&law, p).unwrap();
                let pred = predicted_moment(alpha, beta, k, p).unwrap();
                assert!(rel(q, pred) < 1e-4, "α={alpha} β={beta} p={p}: {q} vs {pred}");
            }
        }
    }

    #[test]
    fn cdf_of_free_poisson_one() {
        let law = free_poisson(1.0).unwrap();
        assert!(law.cdf(-1.0).unwrap().abs() < 1e-12);
        assert!((law.cdf(4.0).unwrap() - 1.0).abs() < 1e-8);
        // π_1 is the law of s² for a standard semicircular s: P(s² ≤ 1) = 1/3 + √3/(2π)
        let want = 1.0 / 3.0 + 3f64.sqrt() / std::f64::consts::TAU;
        assert!((law.cdf(1.0).unwrap() - want).abs() < 1e-8);
    }

    #[test]
    fn csv_export() {
        let csv = free_poisson(0.5).unwrap().to_csv(4);
        assert!(csv.starts_with("# atoms\nlocation,mass\n0,0.5\n# density\nx,density\n"));
        assert_eq!(csv.lines().count(), 5 + 4);
    }

    #[test]
    fn mass_mismatch_is_rejected() {
        assert!(SpectralLaw::new(vec![(0.0, 0.5)], Vec::new(), 1.0).is_err());
    }
}
