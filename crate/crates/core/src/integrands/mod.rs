//! Test integrands with exact means and smoothness metadata.
//!
//! Keys accepted by [`lookup`]:
//!
//! - `smooth1d`: `x e^x`, mean 1.
//! - `holder1d`: `(x - 1/3)|x - 1/3|`, mean 7/81.
//! - `otl6d`: OTL circuit midpoint voltage on `[0,1]^6`, no exact mean.
//! - `const:c`: the constant `c`; bare `const` is the constant 1.
//! - `poly:a0,a1,..`: `sum a_r x^r`; coefficients may be decimals or `p/q`.

pub mod otl;

use std::f64::consts::E;
use std::fmt;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::walsh::{parse_rational, Polynomial};

#[derive(Debug, Clone, PartialEq)]
pub enum Smoothness {
    /// `|f^(k)(1/2)| <= A alpha^k k!` for all `k >= 1`.
    Analytic {
        a: f64,
        alpha: f64,
    },
    /// `f` in `C^p` with `V_lambda(f^(p)) <= v` and `sup |f^(d)| <= a` for `1 <= d <= max(p-1, 1)`.
    Holder {
        p: u32,
        lambda: f64,
        v: f64,
        a: f64,
    },
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Smooth1d,
    Holder1d,
    Otl6d,
    Const(f64),
    Poly(Polynomial),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integrand {
    name: String,
    kind: Kind,
    dim: usize,
    exact_mean: Option<f64>,
    smoothness: Smoothness,
    lipschitz: Option<f64>,
}

impl Integrand {
    /// `x e^x`. `f^(k)(x) = (x + k) e^x`, so `|f^(k)(1/2)| / k! = (k + 1/2) e^(1/2) / k! <= 3`
    /// for `k >= 1`, and `sup |f'| = f'(1) = 2e`.
    pub fn smooth1d() -> Self {
        Self {
            name: "smooth1d".into(),
            kind: Kind::Smooth1d,
            dim: 1,
            exact_mean: Some(1.0),
            smoothness: Smoothness::Analytic { a: 3.0, alpha: 1.0 },
            lipschitz: Some(2.0 * E),
        }
    }

    /// `(x - 1/3)|x - 1/3|`, with `f' = 2|x - 1/3|`: total variation of `f'` is 2 and
    /// `sup |f'| = 4/3`. Mean `((2/3)^3 - (1/3)^3) / 3 = 7/81`.
    pub fn holder1d() -> Self {
        Self {
            name: "holder1d".into(),
            kind: Kind::Holder1d,
            dim: 1,
            exact_mean: Some(7.0 / 81.0),
            smoothness: Smoothness::Holder {
                p: 1,
                lambda: 1.0,
                v: 2.0,
                a: 4.0 / 3.0,
            },
            lipschitz: Some(4.0 / 3.0),
        }
    }

    pub fn otl6d() -> Self {
        Self {
            name: "otl6d".into(),
            kind: Kind::Otl6d,
            dim: otl::DIM,
            exact_mean: None,
            smoothness: Smoothness::Unknown,
            lipschitz: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            name: format!("const:{c}"),
            kind: Kind::Const(c),
            dim: 1,
            exact_mean: Some(c),
            smoothness: Smoothness::Analytic { a: 0.0, alpha: 1.0 },
            lipschitz: Some(0.0),
        }
    }

    pub fn polynomial(f: Polynomial) -> Result<Self> {
        let params = f.analytic_params(1.0)?;
        let coeffs: Vec<String> = f.coeffs().iter().map(|c| c.to_string()).collect();
        Ok(Self {
            name: format!("poly:{}", coeffs.join(",")),
            dim: 1,
            exact_mean: f.mean().to_f64(),
            smoothness: Smoothness::Analytic {
                a: params.a(),
                alpha: params.alpha(),
            },
            lipschitz: f.lipschitz_bound().to_f64(),
            kind: Kind::Poly(f),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exact_mean(&self) -> Option<f64> {
        self.exact_mean
    }

    pub fn smoothness(&self) -> &Smoothness {
        &self.smoothness
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn polynomial_form(&self) -> Option<&Polynomial> {
        match &self.kind {
            Kind::Poly(p) => Some(p),
            _ => None,
        }
    }

    /// `f(x)` for `x` in `[0,1)^d`.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            Kind::Smooth1d => x[0] * x[0].exp(),
            Kind::Holder1d => {
                let t = x[0] - 1.0 / 3.0;
                t * t.abs()
            }
            Kind::Otl6d => otl::eval_unit(x),
            Kind::Const(c) => *c,
            Kind::Poly(p) => p.eval_f64(x[0]),
        }
    }
}

impl fmt::Display for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// The fixed entries plus one representative of each parametrized family.
pub fn registry() -> Vec<Integrand> {
    vec![
        Integrand::smooth1d(),
        Integrand::holder1d(),
        Integrand::otl6d(),
        Integrand::constant(1.0),
        Integrand::polynomial(Polynomial::from_integers(&[0, 0, 1]))
            .expect("x^2 is a valid polynomial"),
    ]
}

pub fn lookup(key: &str) -> Result<Integrand> {
    match key {
        "smooth1d" => return Ok(Integrand::smooth1d()),
        "holder1d" => return Ok(Integrand::holder1d()),
        "otl6d" => return Ok(Integrand::otl6d()),
        "const" => return Ok(Integrand::constant(1.0)),
        _ => {}
    }
    if let Some(c) = key.strip_prefix("const:") {
        let c: f64 = c
            .trim()
            .parse()
            .map_err(|_| Error::UnknownIntegrand(key.into()))?;
        return Ok(Integrand::constant(c));
    }
    if let Some(list) = key.strip_prefix("poly:") {
        let coeffs = list
            .split(',')
            .map(|s| parse_rational(s.trim()))
            .collect::<Result<Vec<_>>>()
            .map_err(|_| Error::UnknownIntegrand(key.into()))?;
        return Integrand::polynomial(Polynomial::new(coeffs));
    }
    Err(Error::UnknownIntegrand(key.into()))
}

/// `Lip(f) t`, an upper bound on the modulus of continuity `omega_f(t)`.
pub fn modulus_bound(f: &Integrand, t: f64) -> Result<f64> {
    if let Kind::Const(_) = f.kind {
        return Ok(0.0);
    }
    f.lipschitz
        .map(|l| l * t)
        .ok_or_else(|| Error::MissingMetadata(f.name.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn midpoint(f: &Integrand, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let mut s = 0.0;
        let mut comp = 0.0;
        for i in 0..n {
            // Kahan keeps 1e7 terms accurate to well below 1e-10
            let y = f.eval(&[(i as f64 + 0.5) * h]) - comp;
            let t = s + y;
            comp = (t - s) - y;
            s = t;
        }
        s * h
    }

    #[test]
    fn lookup_keys() {
        assert_eq!(lookup("smooth1d").unwrap().exact_mean(), Some(1.0));
        assert_eq!(lookup("const:2.5").unwrap().exact_mean(), Some(2.5));
        assert_eq!(lookup("const:2.5").unwrap().eval(&[0.3]), 2.5);
        let p = lookup("poly:1,1/2,-3").unwrap();
        assert_eq!(p.exact_mean(), Some(1.0 + 0.25 - 1.0));
        assert_eq!(p.dim(), 1);
        assert!(matches!(lookup("nope"), Err(Error::UnknownIntegrand(_))));
        assert!(lookup("const:x").is_err());
        assert_eq!(lookup("const").unwrap().eval(&[0.9]), 1.0);
        assert!(lookup("poly:1,,2").is_err());
        assert_eq!(lookup("otl6d").unwrap().dim(), 6);
        let names: Vec<String> = registry().iter().map(|f| f.name().to_string()).collect();
        assert!(names.contains(&"smooth1d".to_string()) && names.contains(&"otl6d".to_string()));
    }

    #[test]
    fn means_match_quadrature() {
        let n = 10_000_000;
        for key in [
            "smooth1d",
            "holder1d",
            "poly:1,-2,0,4",
            "poly:1/3,0,0,0,0,7",
        ] {
            let f = lookup(key).unwrap();
            let q = midpoint(&f, n);
            assert!((q - f.exact_mean().unwrap()).abs() < 1e-10, "{key}: {q}");
        }
    }

    #[test]
    fn holder_mean_exact() {
        let m = (BigRational::new(8.into(), 27.into()) - BigRational::new(1.into(), 27.into()))
            / BigInt::from(3);
        assert_eq!(m, BigRational::new(7.into(), 81.into()));
        assert_eq!(Integrand::holder1d().exact_mean(), m.to_f64());
    }

    #[test]
    fn smooth1d_analytic_certificate() {
        // (k + 1/2) e^(1/2) <= 3 k! with e^(1/2) < 16488/10000, in exact integers
        let mut fact = BigInt::from(1);
        for k in 1..=20u32 {
            fact *= k;
            let lhs = BigInt::from(2 * k + 1) * 16488;
            let rhs = BigInt::from(3) * &fact * 2 * 10000;
            assert!(lhs <= rhs, "k = {k}");
        }
        assert!(E.sqrt() < 1.6488);
        let Smoothness::Analytic { a, alpha } = Integrand::smooth1d().smoothness().clone() else {
            panic!()
        };
        assert_eq!((a, alpha), (3.0, 1.0));
    }

    #[test]
    fn holder1d_variation_bounded() {
        // discrete total variation of f' = 2|x - 1/3| over uniform partitions
        let fp = |x: f64| 2.0 * (x - 1.0 / 3.0).abs();
        let mut last = 0.0;
        for bits in 1..=14u32 {
            let n = 1usize << bits;
            let v: f64 = (0..n)
                .map(|i| (fp((i + 1) as f64 / n as f64) - fp(i as f64 / n as f64)).abs())
                .sum();
            // nested partitions: nondecreasing, capped by the exact variation 2
            assert!(v >= last - 1e-12 && v <= 2.0 + 1e-12, "{bits}: {v}");
            last = v;
        }
        assert!(last > 2.0 - 1e-3);
    }

    #[test]
    fn modulus_bounds() {
        assert_eq!(modulus_bound(&Integrand::constant(3.0), 0.5).unwrap(), 0.0);
        let s = Integrand::smooth1d();
        assert!((modulus_bound(&s, 1e-3).unwrap() - 2.0 * E * 1e-3).abs() < 1e-18);
        assert_eq!(
            modulus_bound(&s, 0.2).unwrap(),
            2.0 * modulus_bound(&s, 0.1).unwrap()
        );
        assert!(matches!(
            modulus_bound(&Integrand::otl6d(), 0.1),
            Err(Error::MissingMetadata(_))
        ));
        // Lipschitz metadata really bounds difference quotients
        for f in [Integrand::smooth1d(), Integrand::holder1d()] {
            let l = f.lipschitz().unwrap();
            for i in 0..1000 {
                let (a, b) = (i as f64 / 1000.0, (i + 1) as f64 / 1000.0);
                assert!((f.eval(&[b]) - f.eval(&[a])).abs() <= l * (b - a) + 1e-15);
            }
        }
    }
}
