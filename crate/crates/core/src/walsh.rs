//! Walsh functions, exact Walsh coefficients of polynomials, and the error
//! decomposition of a scrambled net into XOR-zero row sets.
//!
//! Bits of a Walsh index `k` are numbered from 1 at the least significant
//! end; bits of a point `x` from 1 at the most significant end. Then
//! `wal_k(x) = (-1)^(sum_l k_l x_l)` and `L_k` is the set of `l` with `k_l = 1`.

use std::f64::consts::E;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, IndexSet};
use crate::netgen::{generate_points, DigitalShift, ScrambleMatrix};
use crate::partitions::LAMBDA;

/// Largest power handled by [`chi`] and the polynomial routines.
pub const MAX_DEGREE: u32 = 12;
/// Largest `q(k)` handled by the piecewise form of [`chi`].
pub const MAX_PIECEWISE_BITS: u32 = 20;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e as usize
}

fn inv_pow2(e: u64) -> BigRational {
    BigRational::new(BigInt::one(), pow2(e))
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, v| acc * v)
}

/// Position of the highest set bit, `q(0) = 0`.
pub fn q_of(k: u64) -> u32 {
    64 - k.leading_zeros()
}

/// `wal_k(x)` for an `E`-bit point value `x`.
pub fn wal(k: u64, x: u64, precision: u32) -> Result<i8> {
    let q = q_of(k);
    if q > precision {
        return Err(Error::Precision {
            needed: q,
            bits: precision,
        });
    }
    if k == 0 {
        return Ok(1);
    }
    // k_l sits at bit l-1, x_l at bit E-l
    let kmask = k.reverse_bits() >> (64 - precision);
    Ok(if (kmask & x).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    })
}

/// `chi_{r,k} = int_0^1 x^r wal_k(x) dx`, summed exactly over the `2^q(k)`
/// dyadic cells on which `wal_k` is constant.
pub fn chi(r: u32, k: u64) -> Result<BigRational> {
    let q = q_of(k);
    if r > MAX_DEGREE || q > MAX_PIECEWISE_BITS {
        return Err(Error::Guard(format!(
            "chi needs r <= {MAX_DEGREE} and q(k) <= {MAX_PIECEWISE_BITS}, got r = {r}, q = {q}"
        )));
    }
    let p = r as usize + 1;
    let mut total = BigInt::zero();
    let mut lo = BigInt::zero();
    for j in 0..1u64 << q {
        let hi = num_traits::pow(BigInt::from(j + 1), p);
        let diff = &hi - &lo;
        if wal(k, j, q)? == 1 {
            total += diff;
        } else {
            total -= diff;
        }
        lo = hi;
    }
    Ok(BigRational::new(
        total,
        BigInt::from(p) * pow2(q as u64 * p as u64),
    ))
}

/// `[chi_{0,k}, .., chi_{r_max,k}]` by dyadic refinement:
/// `chi_{r,k} = 2^-(r+1) (chi_{r,k'} + (-1)^(k_1) sum_s C(r,s) chi_{s,k'})` with `k' = k >> 1`
/// and `chi_{s,0} = 1/(s+1)`. Exact for any `k`.
pub fn chi_dyadic(r_max: u32, k: u64) -> Vec<BigRational> {
    let n = r_max as usize + 1;
    let binom: Vec<Vec<BigInt>> = (0..n)
        .map(|r| {
            (0..=r)
                .map(|s| binomial(BigInt::from(r), BigInt::from(s)))
                .collect()
        })
        .collect();
    let mut cur: Vec<BigRational> = (0..n).map(|s| rat(1, s as i64 + 1)).collect();
    for level in (0..q_of(k)).rev() {
        let bit = (k >> level) & 1;
        cur = (0..n)
            .map(|r| {
                let right: BigRational = (0..=r)
                    .map(|s| &cur[s] * BigRational::from_integer(binom[r][s].clone()))
                    .sum();
                let inner = if bit == 1 {
                    &cur[r] - right
                } else {
                    &cur[r] + right
                };
                inner * inv_pow2(r as u64 + 1)
            })
            .collect();
    }
    cur
}

/// Outcome of checking the three-term recursion for `chi_{r,k}`.
#[derive(Debug, Clone)]
pub struct RecursionCheck {
    pub lhs: BigRational,
    pub rhs: BigRational,
    /// Bound on the omitted `c > c_max` terms of the sum.
    pub tail_bound: BigRational,
    pub holds: bool,
}

/// With `L1` the largest element of `L_k`,
/// `chi_{r,k} = -(r / 2^(L1+1)) (chi_{r-1,k-2^(L1-1)} - sum_{c>=1} 2^-c chi_{r-1,k+2^(L1+c-1)})`.
/// The sum is cut at `c_max`; each omitted term is at most `2^-c / r` in size.
pub fn chi_recursion(r: u32, k: u64, c_max: u32) -> Result<RecursionCheck> {
    if k == 0 {
        return Err(Error::Precondition("recursion needs k >= 1".into()));
    }
    if c_max == 0 {
        return Err(Error::Precondition("c_max must be at least 1".into()));
    }
    if r > MAX_DEGREE {
        return Err(Error::Guard(format!("r = {r} exceeds {MAX_DEGREE}")));
    }
    let l1 = q_of(k) as u64;
    if l1 + c_max as u64 > 64 {
        return Err(Error::Guard("indices beyond 64 bits".into()));
    }
    let lhs = chi_dyadic(r, k).swap_remove(r as usize);
    if r == 0 {
        let zero = BigRational::zero();
        return Ok(RecursionCheck {
            holds: lhs.is_zero(),
            lhs,
            rhs: zero.clone(),
            tail_bound: zero,
        });
    }
    let head = chi_dyadic(r - 1, k - (1 << (l1 - 1))).swap_remove(r as usize - 1);
    let mut sum = BigRational::zero();
    for c in 1..=c_max as u64 {
        let kk = k + (1u64 << (l1 + c - 1));
        sum += chi_dyadic(r - 1, kk).swap_remove(r as usize - 1) * inv_pow2(c);
    }
    let scale = BigRational::from_integer(r.into()) * inv_pow2(l1 + 1);
    let rhs = -(&scale * (head - sum));
    let tail_bound = inv_pow2(c_max as u64 + l1 + 1);
    let holds = (&lhs - &rhs).abs() <= tail_bound;
    Ok(RecursionCheck {
        lhs,
        rhs,
        tail_bound,
        holds,
    })
}

pub fn chi_recursion_check(r: u32, k: u64, c_max: u32) -> Result<bool> {
    chi_recursion(r, k, c_max).map(|c| c.holds)
}

/// `(r!/(r-u+1)!) prod_{w=1..u} (1 + 4^(1-w)) 2^(-||L_k||_{1,u} - u)`, or `None`
/// when `r < u - 1` and the bound is not defined.
pub fn chi_bound(r: u32, k: u64, u: usize) -> Result<Option<BigRational>> {
    let set = IndexSet::from_walsh_index(k)
        .ok_or_else(|| Error::Precondition("chi bound needs k >= 1".into()))?;
    if u == 0 || u > set.card() {
        return Err(Error::Precondition(format!(
            "u = {u} must lie in 1..={}",
            set.card()
        )));
    }
    if (r as usize) + 1 < u {
        return Ok(None);
    }
    let ratio = BigRational::new(factorial(r), factorial(r + 1 - u as u32));
    let prod: BigRational = (1..=u as u64)
        .map(|w| BigRational::one() + inv_pow2(2 * (w - 1)))
        .product();
    Ok(Some(ratio * prod * inv_pow2(set.top_norm(u) + u as u64)))
}

/// `|chi_{r,k}| <= chi_bound(r, k, u)`; vacuously true where the bound is undefined.
pub fn chi_bound_check(r: u32, k: u64, u: usize) -> Result<bool> {
    let Some(bound) = chi_bound(r, k, u)? else {
        return Ok(true);
    };
    let value = chi_dyadic(r, k).swap_remove(r as usize);
    Ok(value.abs() <= bound)
}

/// `A` and `alpha` with `|f^(d)(1/2)| <= A alpha^d d!` for all `d >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticBoundParams {
    a: f64,
    alpha: f64,
}

impl AnalyticBoundParams {
    pub fn new(a: f64, alpha: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::Precondition(format!(
                "A = {a} must be finite and >= 0"
            )));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::Precondition(format!(
                "alpha = {alpha} must lie in (0, 2)"
            )));
        }
        Ok(Self { a, alpha })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `alpha / (e (2 - alpha))`.
    pub fn theta(&self) -> f64 {
        self.alpha / (E * (2.0 - self.alpha))
    }

    /// `(alpha/2) / (1 - alpha/2)`.
    pub fn rho(&self) -> f64 {
        let h = self.alpha / 2.0;
        h / (1.0 - h)
    }
}

/// `f(x) = sum a_r x^r` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
    approx: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        let approx = coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect();
        Self { coeffs, approx }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    /// Exact coefficients from decimal or `p/q` strings.
    pub fn parse(coeffs: &[&str]) -> Result<Self> {
        coeffs
            .iter()
            .map(|s| parse_rational(s.trim()))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.len() as u32 - 1
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.approx.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// `int_0^1 f = sum a_r / (r+1)`.
    pub fn mean(&self) -> BigRational {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(r, a)| a / BigInt::from(r + 1))
            .sum()
    }

    /// `sum r |a_r|`, an upper bound on `sup |f'|` over `[0,1]`.
    pub fn lipschitz_bound(&self) -> BigRational {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(r, a)| a.abs() * BigInt::from(r))
            .sum()
    }

    /// `c_d = f^(d)(1/2) / d!`, the Taylor coefficients about 1/2.
    pub fn taylor_at_half(&self) -> Vec<BigRational> {
        let half = rat(1, 2);
        (0..self.coeffs.len())
            .map(|d| {
                self.coeffs
                    .iter()
                    .enumerate()
                    .skip(d)
                    .map(|(r, a)| {
                        let b = binomial(BigInt::from(r), BigInt::from(d));
                        a * BigRational::from_integer(b) * num_traits::pow(half.clone(), r - d)
                    })
                    .sum()
            })
            .collect()
    }

    /// Smallest `A` certifying the analytic hypothesis for the given `alpha`,
    /// rounded up so the certificate survives the conversion to `f64`.
    pub fn analytic_params(&self, alpha: f64) -> Result<AnalyticBoundParams> {
        let a = self
            .taylor_at_half()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(d, c)| c.abs().to_f64().unwrap() / alpha.powi(d as i32))
            .fold(0.0, f64::max);
        AnalyticBoundParams::new(a * (1.0 + 1e-12), alpha)
    }
}

pub(crate) fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Precondition(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let value = BigRational::new(digits, num_traits::pow(BigInt::from(10), frac.len()));
    Ok(if neg { -value } else { value })
}

/// `hat f(k) = int_0^1 f(x) wal_k(x) dx`, exactly.
pub fn walsh_coeff_poly(f: &Polynomial, k: u64) -> Result<BigRational> {
    if f.degree() > MAX_DEGREE {
        return Err(Error::Guard(format!(
            "degree {} exceeds {MAX_DEGREE}",
            f.degree()
        )));
    }
    if k == 0 {
        return Ok(f.mean());
    }
    if (k.count_ones()) > f.degree() {
        return Ok(BigRational::zero());
    }
    let chis = chi_dyadic(f.degree(), k);
    Ok(f.coeffs().iter().zip(&chis).map(|(a, c)| a * c).sum())
}

/// `6 A |L|! rho^|L|`, the envelope for `B_L = hat f(k_L) 2^||L||`.
#[allow(non_snake_case)]
pub fn B_L_bound(params: &AnalyticBoundParams, set: &IndexSet) -> f64 {
    let d = set.card() as i32;
    let fact: f64 = (1..=d).map(f64::from).product();
    6.0 * params.a() * fact * params.rho().powi(d)
}

#[derive(Debug, Clone)]
pub struct Contribution {
    pub set: IndexSet,
    /// `B_L = hat f(k_L) 2^||L||`.
    pub b_l: BigRational,
    /// `S_L(D)`.
    pub sign: i8,
}

#[derive(Debug, Clone)]
pub struct DecompositionReport {
    /// Sum of `B_L S_L(D) 2^-||L||` over the enumerated XOR-zero sets.
    pub truncated_sum: BigRational,
    /// `mu_hat - mu` computed exactly from the points at precision `E_check`.
    pub direct_error: BigRational,
    /// Upper bound on the size of everything the truncated sum leaves out.
    pub truncation_bound: f64,
    /// Part of the bound from exactly enumerated sets inside `[E_check]`.
    pub omitted_exact: f64,
    /// Part of the bound from the `B_L` envelope.
    pub envelope: f64,
    /// `Lip(f) 2^-E_check`, the gap between `E_check` bits and infinite precision.
    pub lipschitz_residual: f64,
    pub contributing_sets: Vec<Contribution>,
}

impl DecompositionReport {
    pub fn residual(&self) -> f64 {
        (&self.direct_error - &self.truncated_sum)
            .abs()
            .to_f64()
            .unwrap()
    }

    pub fn holds(&self) -> bool {
        self.residual() <= self.truncation_bound
    }
}

/// Most subsets of `[E_check]` the decomposition is willing to visit.
const MAX_SUBSETS: u128 = 1 << 22;

fn subsets_up_to(e: u32, d: u32) -> u128 {
    (0..=d.min(e)).map(|j| binomial(e as u128, j as u128)).sum()
}

// depth-first walk over L within [e], |L| <= deg, visiting each set once
struct Walk<'a> {
    rows: &'a [u64],
    e: u32,
    deg: u32,
    visit: &'a mut dyn FnMut(&[u32], u64, bool),
}

impl Walk<'_> {
    fn run(&mut self, from: u32, stack: &mut Vec<u32>, xor: u64, norm: u64) {
        for l in from..=self.e {
            stack.push(l);
            let x = xor ^ self.rows[l as usize - 1];
            (self.visit)(stack, norm + l as u64, x == 0);
            if (stack.len() as u32) < self.deg {
                self.run(l + 1, stack, x, norm + l as u64);
            }
            stack.pop();
        }
    }
}

/// Checks `mu_hat - mu = sum_L 1{sum_{l in L} M(l,:) = 0} S_L(D) 2^-||L|| B_L`
/// for a polynomial integrand, keeping `L` within `[E_check]` with
/// `||L|| <= N_max` and bounding the remainder.
pub fn error_decomposition(
    f: &Polynomial,
    c: &BitMatrix,
    scramble: &ScrambleMatrix,
    shift: &DigitalShift,
    e_check: u32,
    n_max: u64,
) -> Result<DecompositionReport> {
    let deg = f.degree();
    if deg > MAX_DEGREE {
        return Err(Error::Guard(format!("degree {deg} exceeds {MAX_DEGREE}")));
    }
    if scramble.precision() < e_check || shift.precision() < e_check {
        return Err(Error::Precondition(format!(
            "scramble and shift need at least E_check = {e_check} bits"
        )));
    }
    if e_check == 0 || n_max == 0 || n_max > e_check as u64 * (e_check as u64 + 1) / 2 {
        return Err(Error::Precondition(format!(
            "need 1 <= N_max <= E_check (E_check + 1) / 2, got N_max = {n_max}"
        )));
    }
    if scramble.m() > 16 {
        return Err(Error::Guard("direct evaluation limited to m <= 16".into()));
    }
    let total = subsets_up_to(e_check, deg);
    if total > MAX_SUBSETS {
        return Err(Error::Guard(format!(
            "{total} candidate sets exceed the enumeration limit"
        )));
    }

    let m_e = scramble.truncate(e_check)?;
    let d_e = shift.truncate(e_check)?;

    // exact mu_hat at E_check bits
    let pts = generate_points(c, &m_e, &d_e)?;
    let n = pts.len();
    let denom = pow2(e_check as u64);
    let sum: BigRational = (0..n)
        .map(|i| {
            f.eval(&BigRational::new(
                BigInt::from(pts.value(i, 0)),
                denom.clone(),
            ))
        })
        .sum();
    let direct_error = sum / BigInt::from(n) - f.mean();

    let mut contributing = Vec::new();
    let mut truncated_sum = BigRational::zero();
    let mut omitted = BigRational::zero();
    let mut failure: Option<Error> = None;
    if deg >= 1 {
        let rows = m_e.matrix().rows();
        let mut visit = |set: &[u32], norm: u64, zero: bool| {
            if !zero || failure.is_some() {
                return;
            }
            let k = set.iter().fold(0u64, |acc, &l| acc | 1 << (l - 1));
            let coeff = match walsh_coeff_poly(f, k) {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            };
            if norm <= n_max {
                let parity = set.iter().filter(|&&l| d_e.bit(l)).count() % 2;
                let sign: i8 = if parity == 0 { 1 } else { -1 };
                if sign == 1 {
                    truncated_sum += &coeff;
                } else {
                    truncated_sum -= &coeff;
                }
                contributing.push(Contribution {
                    set: IndexSet::new(set.to_vec()).expect("walk yields valid sets"),
                    b_l: coeff * pow2(norm),
                    sign,
                });
            } else {
                omitted += coeff.abs();
            }
        };
        Walk {
            rows,
            e: e_check,
            deg,
            visit: &mut visit,
        }
        .run(1, &mut Vec::new(), 0, 0);
    }
    if let Some(e) = failure {
        return Err(e);
    }

    // sets reaching past E_check: sum_{|L|=d, max L > E} 2^-||L|| <= 2^-E prod_{i<d} 1/(2^i - 1)
    let params = f.analytic_params(1.0)?;
    let mut envelope = 0.0;
    let mut e_prev = BigRational::one();
    for d in 1..=deg {
        let weight = 6.0
            * params.a()
            * (1..=d).map(f64::from).product::<f64>()
            * params.rho().powi(d as i32);
        envelope += weight * (&e_prev * inv_pow2(e_check as u64)).to_f64().unwrap();
        e_prev /= BigInt::from((1u64 << d) - 1);
    }
    envelope *= 1.0 + 1e-12;
    let lipschitz_residual = f.lipschitz_bound().to_f64().unwrap() * 2f64.powi(-(e_check as i32));
    let omitted_exact = omitted.to_f64().unwrap() * (1.0 + 1e-12);
    Ok(DecompositionReport {
        truncated_sum,
        direct_error,
        truncation_bound: omitted_exact + envelope + lipschitz_residual,
        omitted_exact,
        envelope,
        lipschitz_residual,
        contributing_sets: contributing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem4Bound {
    pub value: f64,
    pub log2: f64,
    /// Whether `m >= max(1/(sqrt(2 lambda) theta), 3 ln(theta m) + 3)`, so the
    /// explicit constant `3770 max(1, 1/theta)` is licensed.
    pub certified: bool,
}

/// `(A/sqrt(eta)) 2^(-lambda m^2) sqrt(C_theta (theta sqrt(2 lambda) m)^(2 sqrt(2 lambda) m) + 64)`.
pub fn theorem4_bound(params: &AnalyticBoundParams, m: u32, eta: f64) -> Result<Theorem4Bound> {
    if m < 3 {
        return Err(Error::Precondition(format!("m = {m} must be at least 3")));
    }
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::Precondition(format!("eta = {eta} must be positive")));
    }
    let theta = params.theta();
    let s = (2.0 * LAMBDA).sqrt();
    let mf = m as f64;
    let c_theta = 3770.0 * f64::max(1.0, 1.0 / theta);
    let certified = mf >= 1.0 / (s * theta) && mf >= 3.0 * (theta * mf).ln() + 3.0;
    if params.a() == 0.0 {
        return Ok(Theorem4Bound {
            value: 0.0,
            log2: f64::NEG_INFINITY,
            certified,
        });
    }
    let t = c_theta.log2() + 2.0 * s * mf * (theta * s * mf).log2();
    // log2(2^t + 64)
    let inner = t.max(6.0) + (1.0 + (-(t - 6.0).abs()).exp2()).log2();
    let log2 = params.a().log2() - 0.5 * eta.log2() - LAMBDA * mf * mf + 0.5 * inner;
    Ok(Theorem4Bound {
        value: log2.exp2(),
        log2,
        certified,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// `sum_{n >= start} n^power r^n` for `0 < r < 1`, summed until the remaining
/// tail is below `1e-12` of the total; that tail bound is added.
fn power_geometric_sum(start: u64, power: u32, r: f64) -> f64 {
    let term = |n: u64| (n as f64).powi(power as i32) * r.powf(n as f64);
    let ratio = |n: u64| ((n as f64 + 1.0) / n as f64).powi(power as i32) * r;
    let mut sum = 0.0;
    let mut n = start.max(1);
    if start == 0 && power == 0 {
        sum += 1.0;
    }
    loop {
        sum += term(n);
        n += 1;
        // term ratios decrease in n, so the tail is dominated by a geometric series
        let rho = ratio(n);
        if rho < 1.0 {
            let tail = term(n) / (1.0 - rho);
            if tail < 1e-12 * sum {
                return sum + tail;
            }
        }
    }
}

pub fn holder_bound_constants(p: u32, lam: f64, v: f64, a: f64) -> Result<HolderConstants> {
    if p == 0 {
        return Err(Error::Precondition("p must be at least 1".into()));
    }
    if !(lam > 0.0 && lam <= 1.0) {
        return Err(Error::Precondition(format!(
            "lambda = {lam} must lie in (0, 1]"
        )));
    }
    if !(v >= 0.0 && a >= 0.0) {
        return Err(Error::Precondition("V and A must be nonnegative".into()));
    }
    let pf = p as f64;
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    let series1 = power_geometric_sum(p as u64, p - 1, 0.5f64.powf(1.0 / (pf + lam)));
    let c1 = 2f64.powf(pf + lam + 2.0) / (pf.sqrt() * fact(p - 1)) * v * series1.sqrt();
    let c2 = 4.0 * 6f64.sqrt() * v + 8.0 * 6f64.sqrt() * a;
    let series3 = power_geometric_sum(1, p, 0.5);
    let c3 = (pf + lam).powi(p as i32) / fact(p).powi(2) * series3 + E - 1.0;
    Ok(HolderConstants { c1, c2, c3 })
}

/// `(Pr(S_L = 1), Pr(S_L = 1, S_L' = 1))` over uniform bits `D_l`, by enumeration.
pub fn sign_independence_check(l: &IndexSet, lp: &IndexSet) -> Result<(BigRational, BigRational)> {
    if l == lp {
        return Err(Error::EqualSets);
    }
    let union = l.union(lp);
    let elems = union.elements();
    if elems.len() > 24 {
        return Err(Error::Guard("union too large to enumerate".into()));
    }
    let pos = |x: u32| elems.iter().position(|&e| e == x).unwrap();
    let mask_of = |s: &IndexSet| s.elements().iter().fold(0u32, |m, &x| m | 1 << pos(x));
    let (ml, mlp) = (mask_of(l), mask_of(lp));
    let total = 1u64 << elems.len();
    let (mut one, mut both) = (0u64, 0u64);
    for bits in 0..total as u32 {
        let s1 = (bits & ml).count_ones() % 2 == 0;
        let s2 = (bits & mlp).count_ones() % 2 == 0;
        one += s1 as u64;
        both += (s1 && s2) as u64;
    }
    Ok((
        BigRational::new(one.into(), total.into()),
        BigRational::new(both.into(), total.into()),
    ))
}
