//! Quadrature rules: fixed composite Gauss-Legendre and adaptive
//! Gauss-Kronrod (7/15) for real and complex integrands.

// Nodes are tabulated to more digits than f64 holds.
#![allow(clippy::excessive_precision)]

use num_complex::Complex64;
use std::sync::OnceLock;

use crate::error::{Error, Result};

// Kronrod 15-point abscissae and weights; the Gauss 7-point rule uses the
// odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Scalar types the adaptive integrator can accumulate.
pub trait Integrand:
    Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> + std::ops::Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn norm(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
}

fn gk15<T: Integrand>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kronrod = kronrod + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let kronrod = kronrod * h;
    let gauss = gauss * h;
    (kronrod, (kronrod - gauss).norm())
}

/// Adaptive Gauss-Kronrod integration on a finite interval.
///
/// Intervals are bisected (largest error first) until the summed error
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn adaptive<T: Integrand>(f: impl Fn(f64) -> T, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<T> {
    const MAX_INTERVALS: usize = 2000;
    if a == b {
        return Ok(T::zero());
    }
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    loop {
        if !err.is_finite() || !total.norm().is_finite() {
            return Err(Error::NonConvergence(format!(
                "adaptive quadrature on [{a}, {b}]: non-finite integrand"
            )));
        }
        if err <= abs_tol.max(rel_tol * total.norm()) {
            break;
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::NonConvergence(format!(
                "adaptive quadrature on [{a}, {b}]: error estimate {err:.3e} after {MAX_INTERVALS} intervals"
            )));
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, v, e) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval cannot be split further in floating point
            return Err(Error::NonConvergence(format!(
                "adaptive quadrature: interval [{lo}, {hi}] exhausted precision"
            )));
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        total = total - v + v1 + v2;
        err = err - e + e1 + e2;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    // re-sum to shed accumulated cancellation from the running updates
    let mut sum = T::zero();
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    for p in &parts {
        sum = sum + p.2;
    }
    Ok(sum)
}

/// Points of the 16-node Gauss-Legendre rule on [-1, 1].
pub const GL_POINTS: usize = 16;

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre_16() -> &'static ([f64; GL_POINTS], [f64; GL_POINTS]) {
    static RULE: OnceLock<([f64; GL_POINTS], [f64; GL_POINTS])> = OnceLock::new();
    RULE.get_or_init(gauss_legendre::<GL_POINTS>)
}

/// Gauss-Legendre rule of order `N` via Newton iteration on P_N.
pub fn gauss_legendre<const N: usize>() -> ([f64; N], [f64; N]) {
    let mut x = [0.0; N];
    let mut w = [0.0; N];
    let n = N as f64;
    for i in 0..N.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=N {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[N - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[N - 1 - i] = wi;
    }
    (x, w)
}

/// Composite 16-point Gauss-Legendre nodes on `[a, b]` split into equal
/// panels. Returns `(nodes, weights)` with `panels * 16` entries each.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre_16();
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * GL_POINTS);
    let mut weights = Vec::with_capacity(panels * GL_POINTS);
    for p in 0..panels {
        let lo = a + width * p as f64;
        let c = lo + 0.5 * width;
        for j in 0..GL_POINTS {
            nodes.push(c + 0.5 * width * gx[j]);
            weights.push(0.5 * width * gw[j]);
        }
    }
    (nodes, weights)
}

/// 16-point Gauss-Legendre nodes on consecutive panels `[edges[i], edges[i+1]]`.
pub fn panel_gauss_legendre(edges: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre_16();
    let n = edges.len().saturating_sub(1) * GL_POINTS;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for w in edges.windows(2) {
        let c = 0.5 * (w[0] + w[1]);
        let h = 0.5 * (w[1] - w[0]);
        for j in 0..GL_POINTS {
            nodes.push(c + h * gx[j]);
            weights.push(h * gw[j]);
        }
    }
    (nodes, weights)
}
