//! One-dimensional quadrature rules.

use std::f64::consts::FRAC_PI_2;

/// Tanh-sinh (double exponential) rule on `[a, b]`, refined by step halving
/// until successive estimates agree to `tol` relative.
///
/// Endpoint singularities of integrable type are handled without special care
/// since nodes never touch the endpoints.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    // node at parameter t ≥ 0 contributes f at both mirrored points
    let pair = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cu * cu);
        if w == 0.0 || !w.is_finite() {
            return 0.0;
        }
        // distance from the nearer endpoint, in units of `half`
        let d = 2.0 / (1.0 + (2.0 * u).exp());
        if d == 0.0 {
            return 0.0;
        }
        let off = half * d;
        if t == 0.0 {
            w * f(a + half)
        } else {
            w * (f(a + off) + f(b - off))
        }
    };
    let t_max = 4.5;
    let mut h = 0.5;
    let mut sum = pair(0.0);
    let mut t = h;
    while t <= t_max {
        sum += pair(t);
        t += h;
    }
    let mut estimate = half * h * sum;
    for _ in 0..10 {
        // add midpoints of the current step
        let mut t = 0.5 * h;
        while t <= t_max {
            sum += pair(t);
            t += h;
        }
        h *= 0.5;
        let next = half * h * sum;
        if (next - estimate).abs() <= tol * next.abs().max(f64::MIN_POSITIVE) {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Trapezoid rule on a uniform grid in `τ = ln y` over `[τ_lo, τ_hi]`, for
/// `∫ g(y) dy = ∫ g(e^τ) e^τ dτ`.
pub fn log_trapezoid(g: impl Fn(f64) -> f64, tau_lo: f64, tau_hi: f64, step: f64) -> f64 {
    let n = ((tau_hi - tau_lo) / step).ceil() as usize;
    let h = (tau_hi - tau_lo) / n as f64;
    let mut acc = 0.0;
    for j in 0..=n {
        let y = (tau_lo + j as f64 * h).exp();
        let w = if j == 0 || j == n { 0.5 } else { 1.0 };
        acc += w * g(y) * y;
    }
    acc * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_polynomial_and_singular() {
        let v = tanh_sinh(|x| x * x, 0.0, 3.0, 1e-14);
        assert!((v - 9.0).abs() < 1e-13);
        // ∫_0^1 x^{-1/2} dx = 2
        let v = tanh_sinh(|x| x.powf(-0.5), 0.0, 1.0, 1e-14);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_trapezoid_exponential() {
        // ∫_0^∞ y e^{-y} dy = 1
        let v = log_trapezoid(|y| y * (-y).exp(), -40.0, 4.5, 1.0 / 32.0);
        assert!((v - 1.0).abs() < 1e-13);
    }
}
