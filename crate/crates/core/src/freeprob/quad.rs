//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the odd-indexed Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 60;

/// Kronrod estimate and `|Kronrod - Gauss|` on `[a, b]`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = half * XGK[k];
        let pair = f(mid - dx) + f(mid + dx);
        kron += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

fn adapt(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let (value, err) = gk15(f, a, b);
    if err <= tol || (b - a).abs() < 1e-15 * (a.abs() + b.abs()).max(1e-300) {
        return Ok(value);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature(format!(
            "no convergence on [{a}, {b}], error {err:.3e}"
        )));
    }
    let mid = 0.5 * (a + b);
    Ok(adapt(f, a, mid, 0.5 * tol, depth + 1)? + adapt(f, mid, b, 0.5 * tol, depth + 1)?)
}

/// `∫_a^b f` to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    adapt(&f, a, b, tol, 0)
}

/// `∫_a^b f` for integrands with square-root type behaviour at both ends.
///
/// Uses `x = a + (b - a)(1 - cos θ)/2`, which turns `√(x - a)`, `√(b - x)`
/// and `1/√(x - a)` endpoint factors into smooth functions of `θ`.
pub fn integrate_endpoints(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let half = 0.5 * (b - a);
    let g = |theta: f64| {
        let (s, c) = theta.sin_cos();
        if s == 0.0 {
            return 0.0;
        }
        f(a + half * (1.0 - c)) * half * s
    };
    adapt(&g, 0.0, std::f64::consts::PI, tol, 0)
}

/// `∫_a^u f` for `u ∈ [a, b]` under the same substitution as
/// [`integrate_endpoints`].
pub fn integrate_endpoints_upto(f: impl Fn(f64) -> f64, a: f64, b: f64, u: f64, tol: f64) -> Result<f64> {
    if u <= a || a == b {
        return Ok(0.0);
    }
    let half = 0.5 * (b - a);
    let theta_u = (1.0 - (u.min(b) - a) / half).clamp(-1.0, 1.0).acos();
    let g = |theta: f64| {
        let (s, c) = theta.sin_cos();
        if s == 0.0 {
            return 0.0;
        }
        f(a + half * (1.0 - c)) * half * s
    };
    adapt(&g, 0.0, theta_u, tol, 0)
}
