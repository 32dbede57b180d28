//! Catalog of nonlinearities `f(x,t)` with closed-form primitive and `t`-derivative.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Configuration form of a nonlinearity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    /// `a·t/(1+t²)`
    RationalOdd { a: f64 },
    /// `a·t/(1+t²) + b·cos(ωx₁)·t³/(1+t⁴)`
    RationalOddModulated { a: f64, b: f64 },
    /// x-independent table `t ↦ f`, interpolated by a natural cubic spline and
    /// held constant outside the table.
    Custom {
        t: Vec<f64>,
        f: Vec<f64>,
        lambda0: f64,
        odd: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    RationalOdd { a: f64 },
    Modulated { a: f64, b: f64, omega: f64 },
    Custom(Spline),
}

/// `f(x,t)` together with `F(x,t) = ∫_0^t f(x,τ)dτ` and `∂f/∂t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    spec: NonlinearitySpec,
    kind: Kind,
    lambda0: f64,
    odd: bool,
}

impl Nonlinearity {
    /// Builds the nonlinearity for a torus of the given period.
    pub fn new(spec: &NonlinearitySpec, period: f64) -> Result<Self> {
        let (kind, lambda0, odd) = match *spec {
            NonlinearitySpec::RationalOdd { a } => {
                finite(a, "a")?;
                (Kind::RationalOdd { a }, a, true)
            }
            NonlinearitySpec::RationalOddModulated { a, b } => {
                finite(a, "a")?;
                finite(b, "b")?;
                let omega = 2.0 * PI / period;
                (Kind::Modulated { a, b, omega }, a, true)
            }
            NonlinearitySpec::Custom {
                ref t,
                ref f,
                lambda0,
                odd,
            } => (Kind::Custom(Spline::new(t, f)?), lambda0, odd),
        };
        Ok(Nonlinearity {
            spec: spec.clone(),
            kind,
            lambda0,
            odd,
        })
    }

    /// `f ≡ 0`.
    pub fn zero() -> Self {
        Nonlinearity::new(&NonlinearitySpec::RationalOdd { a: 0.0 }, 1.0).expect("valid")
    }

    pub fn spec(&self) -> &NonlinearitySpec {
        &self.spec
    }

    /// Declared `λ₀ = lim_{t→0} f(x,t)/t`.
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// Declared oddness in `t`.
    pub fn is_odd(&self) -> bool {
        self.odd
    }

    pub fn depends_on_x(&self) -> bool {
        matches!(self.kind, Kind::Modulated { .. })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::RationalOdd { a } if a == 0.0)
    }

    pub fn f(&self, x: &[f64], t: f64) -> f64 {
        match &self.kind {
            Kind::RationalOdd { a } => a * t / (1.0 + t * t),
            Kind::Modulated { a, b, omega } => {
                let t3 = t * t * t;
                a * t / (1.0 + t * t) + b * (omega * x[0]).cos() * t3 / (1.0 + t3 * t)
            }
            Kind::Custom(s) => s.value(t),
        }
    }

    /// `F(x,t) = ∫_0^t f(x,τ) dτ`.
    pub fn primitive(&self, x: &[f64], t: f64) -> f64 {
        match &self.kind {
            Kind::RationalOdd { a } => 0.5 * a * (t * t).ln_1p(),
            Kind::Modulated { a, b, omega } => {
                let t2 = t * t;
                0.5 * a * t2.ln_1p() + 0.25 * b * (omega * x[0]).cos() * (t2 * t2).ln_1p()
            }
            Kind::Custom(s) => s.integral(t),
        }
    }

    /// `∂f/∂t(x,t)`.
    pub fn dfdt(&self, x: &[f64], t: f64) -> f64 {
        match &self.kind {
            Kind::RationalOdd { a } => {
                let d = 1.0 + t * t;
                a * (1.0 - t * t) / (d * d)
            }
            Kind::Modulated { a, b, omega } => {
                let t2 = t * t;
                let d = 1.0 + t2;
                let e = 1.0 + t2 * t2;
                a * (1.0 - t2) / (d * d)
                    + b * (omega * x[0]).cos() * (3.0 * t2 - t2 * t2 * t2) / (e * e)
            }
            Kind::Custom(s) => s.derivative(t),
        }
    }

    /// Explicit constant `c₁` with `|F(x,t)| ≤ c₁(1+t²)` for the rational kinds.
    pub fn primitive_bound(&self) -> Option<f64> {
        match self.kind {
            Kind::RationalOdd { a } => Some(0.5 * a.abs()),
            Kind::Modulated { a, b, .. } => Some(0.5 * a.abs() + 0.5 * b.abs()),
            Kind::Custom(_) => None,
        }
    }

    /// `sup |f|` for the rational kinds (`|a|/2`, plus the modulation amplitude bound).
    pub fn sup_bound(&self) -> Option<f64> {
        match self.kind {
            Kind::RationalOdd { a } => Some(0.5 * a.abs()),
            // t³/(1+t⁴) peaks at 3^{3/4}/4
            Kind::Modulated { a, b, .. } => Some(0.5 * a.abs() + b.abs() * 3f64.powf(0.75) / 4.0),
            Kind::Custom(_) => None,
        }
    }
}

fn finite(v: f64, name: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "nonlinearity parameter {name} must be finite"
        )))
    }
}

/// Natural cubic spline, constant beyond the table ends.
#[derive(Debug, Clone, PartialEq)]
struct Spline {
    t: Vec<f64>,
    f: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
    // ∫_0^{t_i} at each knot
    cumulative: Vec<f64>,
    zero_offset: f64,
}

impl Spline {
    fn new(t: &[f64], f: &[f64]) -> Result<Self> {
        if t.len() != f.len() || t.len() < 3 {
            return Err(Error::Parameter(
                "custom table needs matching t/f arrays of length ≥ 3".into(),
            ));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) || t.iter().chain(f).any(|v| !v.is_finite()) {
            return Err(Error::Parameter(
                "custom table t must be finite and strictly increasing".into(),
            ));
        }
        if !(t[0] <= 0.0 && *t.last().unwrap() >= 0.0) {
            return Err(Error::Parameter("custom table must bracket t = 0".into()));
        }
        let n = t.len();
        let mut m = vec![0.0; n];
        // tridiagonal solve for interior second derivatives
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = t[i] - t[i - 1];
            let h1 = t[i + 1] - t[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let c = h1 / 6.0;
            let d = (f[i + 1] - f[i]) / h1 - (f[i] - f[i - 1]) / h0;
            let denom = b - a * c_prime[i - 1];
            c_prime[i] = c / denom;
            d_prime[i] = (d - a * d_prime[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d_prime[i] - c_prime[i] * m[i + 1];
        }
        let mut s = Spline {
            t: t.to_vec(),
            f: f.to_vec(),
            m,
            cumulative: vec![0.0; n],
            zero_offset: 0.0,
        };
        #[allow(clippy::needless_range_loop)]
        for i in 1..n {
            s.cumulative[i] = s.cumulative[i - 1] + s.segment_integral(i - 1, t[i]);
        }
        s.zero_offset = s.integral_from_start(0.0);
        Ok(s)
    }

    fn segment(&self, x: f64) -> usize {
        match self.t.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(self.t.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.t.len() - 2),
        }
    }

    fn value(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x <= self.t[0] {
            return self.f[0];
        }
        if x >= self.t[n - 1] {
            return self.f[n - 1];
        }
        let i = self.segment(x);
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - x) / h;
        let b = (x - self.t[i]) / h;
        a * self.f[i]
            + b * self.f[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn derivative(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x <= self.t[0] || x >= self.t[n - 1] {
            return 0.0;
        }
        let i = self.segment(x);
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - x) / h;
        let b = (x - self.t[i]) / h;
        (self.f[i + 1] - self.f[i]) / h
            + (-(3.0 * a * a - 1.0) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }

    // ∫_{t_i}^{x} on segment i
    fn segment_integral(&self, i: usize, x: f64) -> f64 {
        let h = self.t[i + 1] - self.t[i];
        let b = (x - self.t[i]) / h;
        let a0 = 1.0;
        // a = 1 − b; integrate in b from 0 to b, dx = h db
        let int_a = b - 0.5 * b * b;
        let int_b = 0.5 * b * b;
        // ∫ (a³ − a) db = [−(a⁴/4) + a²/2] with a from 1 to 1−b
        let a = a0 - b;
        let int_a3 = -(a.powi(4) - 1.0) / 4.0 + (a * a - 1.0) / 2.0;
        let int_b3 = b.powi(4) / 4.0 - b * b / 2.0;
        h * (int_a * self.f[i]
            + int_b * self.f[i + 1]
            + (int_a3 * self.m[i] + int_b3 * self.m[i + 1]) * h * h / 6.0)
    }

    fn integral_from_start(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x <= self.t[0] {
            return (x - self.t[0]) * self.f[0];
        }
        if x >= self.t[n - 1] {
            return self.cumulative[n - 1] + (x - self.t[n - 1]) * self.f[n - 1];
        }
        let i = self.segment(x);
        self.cumulative[i] + self.segment_integral(i, x)
    }

    fn integral(&self, x: f64) -> f64 {
        self.integral_from_start(x) - self.zero_offset
    }
}

/// Sampled corroboration of the declared structure of `f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    /// `(t, max_x |f(x,t)/t − λ₀|)` at small `t`.
    pub near_zero: Vec<(f64, f64)>,
    /// `(t, max_x |f(x,t)/t|)` along a geometric sequence up to `10⁶`.
    pub near_infinity: Vec<(f64, f64)>,
    pub zero_limit_ok: bool,
    pub infinity_limit_ok: bool,
    /// `None` when oddness is not declared.
    pub odd_ok: Option<bool>,
    /// Max error of `F(x,0) = 0` and of `∂F/∂t = f` by central differences.
    pub primitive_error: f64,
    pub primitive_ok: bool,
}

/// Checks the declared `λ₀`, oddness, primitive and the decay of `f/t` at
/// infinity on the sample points `xs`.
pub fn asymptotic_report(nl: &Nonlinearity, xs: &[Vec<f64>]) -> AsymptoticReport {
    let lambda0 = nl.lambda0();
    let max_over_x = |g: &dyn Fn(&[f64]) -> f64| xs.iter().map(|x| g(x)).fold(0.0, f64::max);

    let near_zero: Vec<(f64, f64)> = [1e-3, 1e-5]
        .iter()
        .map(|&t| {
            (
                t,
                max_over_x(&|x| {
                    (nl.f(x, t) / t - lambda0)
                        .abs()
                        .max((nl.f(x, -t) / -t - lambda0).abs())
                }),
            )
        })
        .collect();
    // f(t)/t − λ₀ = O(t) for the catalog (odd kinds are O(t²)); scale with max(1, |λ₀|)
    let scale = lambda0.abs().max(1.0);
    let zero_limit_ok = near_zero.iter().all(|&(t, err)| err <= 10.0 * t * scale);

    let near_infinity: Vec<(f64, f64)> = (0..=6)
        .map(|p| {
            let t = 10f64.powi(p);
            (
                t,
                max_over_x(&|x| (nl.f(x, t) / t).abs().max((nl.f(x, -t) / -t).abs())),
            )
        })
        .collect();
    let last = near_infinity.last().unwrap().1;
    let tail_decreasing = near_infinity[3..].windows(2).all(|w| w[1].1 <= w[0].1);
    let infinity_limit_ok = tail_decreasing && last <= 1e-4 * scale;

    let samples: Vec<f64> = (-40..=40).map(|i| 0.125 * i as f64).collect();
    let odd_ok = nl.is_odd().then(|| {
        xs.iter().all(|x| {
            samples
                .iter()
                .all(|&t| (nl.f(x, -t) + nl.f(x, t)).abs() <= 1e-14 * nl.f(x, t).abs().max(1e-300))
        })
    });

    let mut primitive_error: f64 = 0.0;
    let h = 1e-5;
    for x in xs {
        primitive_error = primitive_error.max(nl.primitive(x, 0.0).abs());
        for &t in &samples {
            let fd = (nl.primitive(x, t + h) - nl.primitive(x, t - h)) / (2.0 * h);
            primitive_error = primitive_error.max((fd - nl.f(x, t)).abs());
        }
    }
    AsymptoticReport {
        near_zero,
        near_infinity,
        zero_limit_ok,
        infinity_limit_ok,
        odd_ok,
        primitive_ok: primitive_error <= 1e-6 * scale,
        primitive_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn catalog() -> Vec<Nonlinearity> {
        vec![
            Nonlinearity::new(&NonlinearitySpec::RationalOdd { a: -1.5 }, 2.0 * PI).unwrap(),
            Nonlinearity::new(
                &NonlinearitySpec::RationalOddModulated { a: 0.6, b: 0.8 },
                2.0 * PI,
            )
            .unwrap(),
        ]
    }

    #[test]
    fn primitive_and_derivative_consistency() {
        let xs = [[0.0, 0.0], [1.0, 2.0], [3.0, 0.5]];
        for nl in catalog() {
            for x in &xs {
                assert_eq!(nl.primitive(x, 0.0), 0.0);
                for i in -30..=30 {
                    let t = 0.17 * i as f64;
                    let h = 1e-5;
                    let df = (nl.f(x, t + h) - nl.f(x, t - h)) / (2.0 * h);
                    assert!((df - nl.dfdt(x, t)).abs() < 1e-8, "t={t}");
                    let dp = (nl.primitive(x, t + h) - nl.primitive(x, t - h)) / (2.0 * h);
                    assert!((dp - nl.f(x, t)).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn catalog_passes_checks() {
        let xs: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 * 0.7, 0.3]).collect();
        for nl in catalog() {
            let r = asymptotic_report(&nl, &xs);
            assert!(
                r.zero_limit_ok && r.infinity_limit_ok && r.primitive_ok,
                "{r:?}"
            );
            assert_eq!(r.odd_ok, Some(true));
        }
    }

    #[test]
    fn wrong_declared_slope_is_caught() {
        let table_t: Vec<f64> = (-40..=40).map(|i| 0.25 * i as f64).collect();
        let table_f: Vec<f64> = table_t.iter().map(|t| 2.0 * t / (1.0 + t * t)).collect();
        let spec = NonlinearitySpec::Custom {
            t: table_t.clone(),
            f: table_f.clone(),
            lambda0: 1.0,
            odd: true,
        };
        let nl = Nonlinearity::new(&spec, 1.0).unwrap();
        let r = asymptotic_report(&nl, &[vec![0.0]]);
        assert!(!r.zero_limit_ok);
        assert!(r.primitive_ok);
        // bounded extension makes f/t decay
        assert!(r.infinity_limit_ok);
    }

    #[test]
    fn spline_reproduces_cubic_integral() {
        // linear data is reproduced exactly by a natural spline
        let t: Vec<f64> = (-5..=5).map(|i| i as f64).collect();
        let f: Vec<f64> = t.iter().map(|x| 3.0 * x).collect();
        let nl = Nonlinearity::new(
            &NonlinearitySpec::Custom {
                t,
                f,
                lambda0: 3.0,
                odd: true,
            },
            1.0,
        )
        .unwrap();
        for &x in &[-4.5, -1.2, 0.0, 0.7, 3.3] {
            assert!((nl.f(&[0.0], x) - 3.0 * x).abs() < 1e-12);
            assert!((nl.primitive(&[0.0], x) - 1.5 * x * x).abs() < 1e-12);
            assert!((nl.dfdt(&[0.0], x) - 3.0).abs() < 1e-12);
        }
        // constant beyond the table
        assert_eq!(nl.f(&[0.0], 9.0), 15.0);
    }

    #[test]
    fn rejects_bad_tables() {
        let bad = NonlinearitySpec::Custom {
            t: vec![0.0, 1.0],
            f: vec![0.0, 1.0],
            lambda0: 0.0,
            odd: false,
        };
        assert!(Nonlinearity::new(&bad, 1.0).is_err());
        let bad = NonlinearitySpec::Custom {
            t: vec![0.0, 2.0, 1.0],
            f: vec![0.0; 3],
            lambda0: 0.0,
            odd: false,
        };
        assert!(Nonlinearity::new(&bad, 1.0).is_err());
        let bad = NonlinearitySpec::Custom {
            t: vec![1.0, 2.0, 3.0],
            f: vec![0.0; 3],
            lambda0: 0.0,
            odd: false,
        };
        assert!(Nonlinearity::new(&bad, 1.0).is_err());
    }

    #[test]
    fn spec_json_shapes() {
        let s: NonlinearitySpec =
            serde_json::from_str(r#"{"kind":"rational_odd","a":-1.5}"#).unwrap();
        assert_eq!(s, NonlinearitySpec::RationalOdd { a: -1.5 });
        let s: NonlinearitySpec =
            serde_json::from_str(r#"{"kind":"rational_odd_modulated","a":1,"b":2}"#).unwrap();
        assert_eq!(s, NonlinearitySpec::RationalOddModulated { a: 1.0, b: 2.0 });
        assert!(
            serde_json::from_str::<NonlinearitySpec>(r#"{"kind":"rational_odd","a":1,"c":2}"#)
                .is_err()
        );
    }

    proptest! {
        #[test]
        fn growth_bounds_hold(a in -5.0f64..5.0, b in -5.0f64..5.0, t in -1e4f64..1e4, x0 in 0.0f64..7.0) {
            let odd = Nonlinearity::new(&NonlinearitySpec::RationalOdd { a }, 2.0 * PI).unwrap();
            let x = [x0, 0.0];
            prop_assert!(odd.f(&x, t).abs() <= odd.sup_bound().unwrap() * (1.0 + 1e-15));
            prop_assert!(odd.primitive(&x, t).abs() <= odd.primitive_bound().unwrap() * (1.0 + t * t));
            prop_assert_eq!(odd.f(&x, -t), -odd.f(&x, t));
            let m = Nonlinearity::new(&NonlinearitySpec::RationalOddModulated { a, b }, 2.0 * PI).unwrap();
            prop_assert!(m.f(&x, t).abs() <= m.sup_bound().unwrap() * (1.0 + 1e-15));
            prop_assert!(m.primitive(&x, t).abs() <= m.primitive_bound().unwrap() * (1.0 + t * t));
        }
    }
}
