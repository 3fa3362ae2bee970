//! One-dimensional quadrature: Gauss-Legendre rules of arbitrary order and an
//! adaptive Gauss-Kronrod integrator, including a mapped form for [0, inf).

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// 15-point Kronrod abscissae (positive half, QUADPACK values).
const XGK15: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
/// Weights of the embedded 7-point Gauss rule.
const WG7: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
/// 15-point Kronrod weights.
const WGK15: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// One Gauss-Kronrod evaluation on [a, b]: returns (integral, error estimate).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK15[7];
    let mut gauss = fc * WG7[3];
    for j in 0..7 {
        let x = half * XGK15[j];
        let fsum = f(center - x) + f(center + x);
        kron += WGK15[j] * fsum;
        if j % 2 == 1 {
            gauss += WG7[j / 2] * fsum;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Accumulated per-panel error estimate.
    pub abs_err: f64,
    pub panels: usize,
}

/// Adaptive bisection with the 15-point Gauss-Kronrod rule.
///
/// Splits until each panel's error estimate falls under its share of
/// `abs_tol` (distributed proportionally to panel width) or `max_depth`
/// is reached.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, max_depth: u32) -> QuadResult {
    fn recur<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
        depth: u32,
        out: &mut QuadResult,
    ) {
        let (v, e) = gk15(f, a, b);
        if e <= tol || depth == 0 {
            out.value += v;
            out.abs_err += e;
            out.panels += 1;
            return;
        }
        let m = 0.5 * (a + b);
        recur(f, a, m, 0.5 * tol, depth - 1, out);
        recur(f, m, b, 0.5 * tol, depth - 1, out);
    }
    let mut out = QuadResult { value: 0.0, abs_err: 0.0, panels: 0 };
    recur(f, a, b, abs_tol, max_depth, &mut out);
    out
}

/// Integrates f over [0, inf) via the substitution r = t/(1-t).
pub fn adaptive_to_infinity<F: Fn(f64) -> f64>(f: &F, abs_tol: f64) -> QuadResult {
    let g = |t: f64| {
        let s = 1.0 - t;
        if s <= 0.0 {
            return 0.0;
        }
        let r = t / s;
        f(r) / (s * s)
    };
    adaptive(&g, 0.0, 1.0, abs_tol, 48)
}

/// Gauss-Legendre nodes and weights of order m on [-1, 1].
///
/// Computed by Newton iteration on the Legendre recurrence; results are cached.
pub fn gauss_legendre(m: usize) -> std::sync::Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, std::sync::Arc<(Vec<f64>, Vec<f64>)>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&m) {
        return v.clone();
    }
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let nf = m as f64;
    for i in 0..m.div_ceil(2) {
        // Tricomi-style initial guess for the i-th root (descending order).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_m(x) and P'_m(x) by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    let arc = std::sync::Arc::new((nodes, weights));
    cache.lock().unwrap().insert(m, arc.clone());
    arc
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_legendre(m);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let nodes = rule.0.iter().map(|&t| mid + half * t).collect();
    let weights = rule.1.iter().map(|&w| w * half).collect();
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gk15_is_exact_for_low_degree_polynomials() {
        // Degree-13 polynomial: integral of x^13 + 3x^4 over [0, 2].
        let f = |x: f64| x.powi(13) + 3.0 * x.powi(4);
        let (v, _) = gk15(&f, 0.0, 2.0);
        let exact = 2f64.powi(14) / 14.0 + 3.0 * 2f64.powi(5) / 5.0;
        assert_relative_eq!(v, exact, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // integral of 1/(1e-6 + x^2) over [-1, 1] = 2*atan(1e3)/1e-3.
        let f = |x: f64| 1.0 / (1e-6 + x * x);
        let r = adaptive(&f, -1.0, 1.0, 1e-10, 40);
        let exact = 2.0 * (1e3f64).atan() * 1e3;
        assert_relative_eq!(r.value, exact, max_relative = 1e-12);
    }

    #[test]
    fn infinite_range_matches_gamma() {
        // integral of r^3 e^{-r} = Gamma(4) = 6.
        let r = adaptive_to_infinity(&|x: f64| x.powi(3) * (-x).exp(), 1e-12);
        assert_relative_eq!(r.value, 6.0, max_relative = 1e-12);
    }

    #[test]
    fn gauss_legendre_matches_known_5pt_rule() {
        let rule = gauss_legendre(5);
        assert_relative_eq!(rule.0[4], 0.906_179_845_938_664, max_relative = 1e-14);
        assert_relative_eq!(rule.1[2], 128.0 / 225.0, max_relative = 1e-14);
        // Exact for degree 9.
        let (x, w) = gauss_legendre_on(5, 0.0, 1.0);
        let v: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(9)).sum();
        assert_relative_eq!(v, 0.1, max_relative = 1e-13);
    }

    #[test]
    fn gauss_legendre_high_order_integrates_cosine() {
        let (x, w) = gauss_legendre_on(24, 0.0, std::f64::consts::PI);
        let v: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.sin()).sum();
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);
    }
}
