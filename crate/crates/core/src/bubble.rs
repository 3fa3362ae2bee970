//! Standard half-space bubble family, the radial cutoff, and the dimension
//! constants that anchor the energy comparisons.
//!
//! The bubble with concentration eps is
//!   v_eps(x) = eps^{(n-2)/2} ((eps + x_n)^2 + |x'|^2)^{-(n-2)/2},
//! harmonic on the open half-space with nonlinear Neumann data
//!   d_n v + (n-2) v^{n/(n-2)} = 0 on x_n = 0.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::quad;

#[derive(Debug, Error)]
pub enum BubbleError {
    #[error("dimension must be at least 3, got {0}")]
    BadDimension(usize),
    #[error("point lies outside the closed upper half-space (x_n = {0})")]
    DomainError(f64),
    #[error("quadrature failed to reach tolerance (residual {0})")]
    NonConvergence(f64),
}

/// Concentration family parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BubbleParams {
    pub n: usize,
    pub eps: f64,
}

impl BubbleParams {
    pub fn new(n: usize, eps: f64) -> Result<Self, BubbleError> {
        if n < 3 {
            return Err(BubbleError::BadDimension(n));
        }
        assert!(eps > 0.0, "concentration scale must be positive");
        Ok(Self { n, eps })
    }

    /// rho^2 = (eps + x_n)^2 + |x'|^2.
    fn rho_sq(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let mut s = (self.eps + x[n - 1]) * (self.eps + x[n - 1]);
        for &xi in &x[..n - 1] {
            s += xi * xi;
        }
        s
    }

    /// Bubble value; valid on the closed half-space (and a bit below it).
    pub fn value(&self, x: &[f64]) -> f64 {
        let p = 0.5 * (self.n as f64 - 2.0);
        self.eps.powf(p) * self.rho_sq(x).powf(-p)
    }

    /// Value and gradient in one pass; `grad` must have length n.
    pub fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let n = self.n;
        let nm2 = n as f64 - 2.0;
        let rho2 = self.rho_sq(x);
        let v = self.eps.powf(0.5 * nm2) * rho2.powf(-0.5 * nm2);
        let scale = -nm2 * v / rho2;
        for i in 0..n - 1 {
            grad[i] = scale * x[i];
        }
        grad[n - 1] = scale * (self.eps + x[n - 1]);
        v
    }

    /// Checked evaluation for external callers.
    pub fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>), BubbleError> {
        assert_eq!(x.len(), self.n);
        if x[self.n - 1] < -1e-14 {
            return Err(BubbleError::DomainError(x[self.n - 1]));
        }
        let mut g = vec![0.0; self.n];
        let v = self.value_grad(x, &mut g);
        Ok((v, g))
    }

    /// Laplacian assembled term by term from the second-derivative formula.
    ///
    /// Analytically zero; the floating-point residual measures only rounding.
    pub fn laplacian(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let nm2 = n as f64 - 2.0;
        let rho2 = self.rho_sq(x);
        let c = self.eps.powf(0.5 * nm2);
        let mut sum = 0.0;
        for i in 0..n {
            let yi = if i == n - 1 { self.eps + x[i] } else { x[i] };
            // d_ii rho^{2-n} = (2-n) rho^{-n} - (2-n) n yi^2 rho^{-n-2}
            sum += c * (-nm2) * (rho2.powf(-0.5 * n as f64) - (n as f64) * yi * yi * rho2.powf(-0.5 * n as f64 - 1.0));
        }
        sum
    }

    /// Boundary operator d_n v + (n-2) v^{n/(n-2)} at (x', 0).
    pub fn boundary_residual(&self, x_prime: &[f64]) -> f64 {
        let n = self.n;
        assert_eq!(x_prime.len(), n - 1);
        let mut x = x_prime.to_vec();
        x.push(0.0);
        let mut g = vec![0.0; n];
        let v = self.value_grad(&x, &mut g);
        g[n - 1] + (n as f64 - 2.0) * v.powf(n as f64 / (n as f64 - 2.0))
    }

    /// Pointwise comparison profile eps^{(n-2)/2} (eps + |x|)^{2-n}.
    pub fn comparison_profile(&self, x: &[f64]) -> f64 {
        let nm2 = self.n as f64 - 2.0;
        let r = x.iter().map(|t| t * t).sum::<f64>().sqrt();
        self.eps.powf(0.5 * nm2) * (self.eps + r).powf(-nm2)
    }
}

/// Radial cutoff profile: identically 1 on [0, inner], 0 on [outer, inf),
/// with a smooth bump-quotient transition
///   eta(t) = phi(outer - t) / (phi(outer - t) + phi(t - inner)),
///   phi(s) = exp(-q/s) for s > 0, else 0.
#[derive(Debug, Clone, Serialize)]
pub struct CutoffProfile {
    pub inner: f64,
    pub outer: f64,
    /// Sharpness q of the mollifier phi(s) = exp(-q/s).
    pub sharpness: f64,
    /// max |eta'| over the transition band, computed at construction.
    pub c_eta: f64,
}

fn phi(q: f64, s: f64) -> f64 {
    if s > 0.0 {
        (-q / s).exp()
    } else {
        0.0
    }
}

fn phi_prime(q: f64, s: f64) -> f64 {
    if s > 0.0 {
        (q / (s * s)) * (-q / s).exp()
    } else {
        0.0
    }
}

impl CutoffProfile {
    /// Standard profile with plateau [0, 4/3] and support [0, 5/3].
    pub fn standard(sharpness: f64) -> Self {
        assert!(sharpness > 0.0);
        let mut p = CutoffProfile {
            inner: 4.0 / 3.0,
            outer: 5.0 / 3.0,
            sharpness,
            c_eta: 0.0,
        };
        p.c_eta = p.measure_c_eta();
        p
    }

    fn measure_c_eta(&self) -> f64 {
        // Dense scan plus local trisection refinement around the max.
        let m = 4096;
        let mut best_t = self.inner;
        let mut best = 0.0;
        for i in 0..=m {
            let t = self.inner + (self.outer - self.inner) * i as f64 / m as f64;
            let d = self.deriv(t).abs();
            if d > best {
                best = d;
                best_t = t;
            }
        }
        let mut lo = best_t - (self.outer - self.inner) / m as f64;
        let mut hi = best_t + (self.outer - self.inner) / m as f64;
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if self.deriv(m1).abs() < self.deriv(m2).abs() {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        self.deriv(0.5 * (lo + hi)).abs()
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.inner {
            1.0
        } else if t >= self.outer {
            0.0
        } else {
            let q = self.sharpness;
            let up = phi(q, self.outer - t);
            let down = phi(q, t - self.inner);
            up / (up + down)
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        if t <= self.inner || t >= self.outer {
            0.0
        } else {
            let q = self.sharpness;
            let up = phi(q, self.outer - t);
            let down = phi(q, t - self.inner);
            let dup = phi_prime(q, self.outer - t);
            let ddown = phi_prime(q, t - self.inner);
            let den = up + down;
            -(dup * down + up * ddown) / (den * den)
        }
    }

    /// eta_delta(x) = eta(|x|/delta) and its gradient.
    pub fn eval_radial(&self, delta: f64, x: &[f64], grad: &mut [f64]) -> f64 {
        let r = x.iter().map(|t| t * t).sum::<f64>().sqrt();
        let t = r / delta;
        let val = self.eval(t);
        if r == 0.0 || t <= self.inner || t >= self.outer {
            grad.fill(0.0);
        } else {
            let d = self.deriv(t) / (delta * r);
            for (g, &xi) in grad.iter_mut().zip(x) {
                *g = d * xi;
            }
        }
        val
    }
}

/// Surface area of the unit m-sphere.
pub fn sphere_area(m: usize) -> f64 {
    let mf = m as f64;
    2.0 * std::f64::consts::PI.powf(0.5 * (mf + 1.0)) / gamma(0.5 * (mf + 1.0))
}

/// Anchor constants for a given dimension.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionConstants {
    pub n: usize,
    /// omega[m-1] = area of S^m for m = 1..=n.
    pub omega: Vec<f64>,
    pub a: f64,
    pub b: f64,
    /// None marks the divergent case n = 3.
    pub d: Option<f64>,
    pub q_ball: f64,
    /// Worst relative discrepancy between the quadrature and closed-form routes.
    pub oracle_agreement: f64,
}

fn binom(n: usize, k: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Closed form of int_0^1 r^{n-1} (1+r)^{4-2n} dr by binomial expansion in u = 1+r.
fn b_integral_closed(n: usize) -> f64 {
    let mut total = 0.0;
    for k in 0..=(n - 1) {
        let sign = if (n - 1 - k) % 2 == 0 { 1.0 } else { -1.0 };
        let e = k as i64 + 5 - 2 * n as i64; // exponent + 1 after integration
        let term = if e == 0 {
            std::f64::consts::LN_2
        } else {
            (2f64.powi(e as i32) - 1.0) / e as f64
        };
        total += sign * binom(n - 1, k) * term;
    }
    total
}

/// Computes the constants for dimension n with two independent routes and
/// records their agreement. Results are cached.
pub fn dimension_constants(n: usize) -> Result<Arc<DimensionConstants>, BubbleError> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<DimensionConstants>>>> = OnceLock::new();
    if n < 3 {
        return Err(BubbleError::BadDimension(n));
    }
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&n) {
        return Ok(v.clone());
    }

    let nf = n as f64;
    let omega: Vec<f64> = (1..=n).map(sphere_area).collect();
    let om_nm2 = sphere_area(n - 2);
    let om_nm1 = sphere_area(n - 1);

    // Closed forms via Gamma.
    let a_closed = om_nm2 * gamma(0.5 * (nf - 1.0)).powi(2) / (2.0 * gamma(nf - 1.0));
    let b_closed = om_nm1 * b_integral_closed(n);
    let d_closed = if n == 3 {
        None
    } else {
        Some(om_nm2 * gamma(0.5 * (nf + 1.0)) * gamma(0.5 * (nf - 3.0)) / (4.0 * (nf - 1.0) * gamma(nf - 1.0)))
    };

    // Quadrature route.
    let tol = 1e-12;
    let a_quad = om_nm2
        * quad::adaptive_to_infinity(&|r: f64| r.powi(n as i32 - 2) / (1.0 + r * r).powi(n as i32 - 1), tol).value;
    let b_quad = om_nm1
        * quad::adaptive(&|r: f64| r.powi(n as i32 - 1) / (1.0 + r).powi(2 * n as i32 - 4), 0.0, 1.0, tol, 40).value;
    let d_quad = if n == 3 {
        // Tail integrand ~ r^{n(n-1)-2(n-1)} ... decays like r^{2-n}; the
        // integral converges only for n > 3.
        None
    } else {
        Some(
            om_nm2 / (2.0 * (nf - 1.0))
                * quad::adaptive_to_infinity(&|r: f64| r.powi(n as i32) / (1.0 + r * r).powi(n as i32 - 1), tol).value,
        )
    };

    let mut agreement = ((a_quad - a_closed) / a_closed).abs().max(((b_quad - b_closed) / b_closed).abs());
    if let (Some(dq), Some(dc)) = (d_quad, d_closed) {
        agreement = agreement.max(((dq - dc) / dc).abs());
    }

    let q_ball = 4.0 * (nf - 1.0) * a_closed.powf(1.0 / (nf - 1.0));

    let out = Arc::new(DimensionConstants {
        n,
        omega,
        a: a_closed,
        b: b_closed,
        d: d_closed,
        q_ball,
        oracle_agreement: agreement,
    });
    cache.lock().unwrap().insert(n, out.clone());
    Ok(out)
}

/// Boundary trace integral of v_eps^{2(n-1)/(n-2)} over x_n = 0, by radial
/// quadrature. Scale-invariance makes this equal to the constant A(n) for
/// every eps.
pub fn boundary_trace_mass(n: usize, eps: f64) -> f64 {
    let nf = n as f64;
    let om = sphere_area(n - 2);
    // v(x',0)^{2(n-1)/(n-2)} = eps^{n-1} (eps^2 + r^2)^{1-n}
    om * quad::adaptive_to_infinity(
        &|r: f64| eps.powf(nf - 1.0) * r.powf(nf - 2.0) * (eps * eps + r * r).powf(1.0 - nf),
        1e-12,
    )
    .value
}
