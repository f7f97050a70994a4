//! Exact counts of partitions into distinct parts.
//!
//! `q(N)` counts index sets of norm `N`. The tables are exact big integers:
//! at `m = 512` the cumulative count needed by the concentration bound runs
//! to about `N = 38 284` and well past any machine word.

use std::f64::consts::{LN_2, PI};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `3 ln(2)^2 / pi^2`, the exponent constant of the `2^(-lambda m^2)` rate.
pub const LAMBDA: f64 = 3.0 * LN_2 * LN_2 / (PI * PI);

const LN2_DIGITS: &str = "0.69314718055994530941723212145817656807550013436025525412068000949339362196969471560586332699641868754200148102057068573368552023575813055703267075163507596193072757082837143519030703862389167347112335";
const PI_DIGITS: &str = "3.14159265358979323846264338327950288419716939937510582097494459230781640628620899862803482534211706798214808651328230664709384460955058223172535940812848111745028410270193852110555964462294895493038196";

fn decimal_to_rational(s: &str) -> BigRational {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits = BigInt::from_str(&format!("{int}{frac}")).expect("decimal constant");
    let scale = num_traits::pow(BigInt::from(10u8), frac.len());
    BigRational::new(digits, scale)
}

/// `lambda` as a rational accurate to ~200 digits.
pub fn lambda_rational() -> &'static BigRational {
    static CELL: OnceLock<BigRational> = OnceLock::new();
    CELL.get_or_init(|| {
        let ln2 = decimal_to_rational(LN2_DIGITS);
        let pi = decimal_to_rational(PI_DIGITS);
        BigRational::from_integer(3.into()) * &ln2 * &ln2 / (&pi * &pi)
    })
}

/// The value of `floor(lambda * m^2)` together with whether the product
/// landed close enough to an integer that the rational path was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threshold {
    pub value: u64,
    pub guarded: bool,
}

pub fn lambda_threshold(m: f64) -> Threshold {
    assert!(m >= 0.0 && m.is_finite());
    let x = LAMBDA * m * m;
    if (x - x.round()).abs() > 1e-9 {
        return Threshold {
            value: x.floor() as u64,
            guarded: false,
        };
    }
    let m_rat = BigRational::from_float(m).expect("finite m");
    let prod = lambda_rational() * &m_rat * &m_rat;
    let value = prod
        .floor()
        .to_integer()
        .to_u64()
        .expect("threshold fits in u64");
    Threshold {
        value,
        guarded: true,
    }
}

/// `log2` of a big integer, `-inf` for zero.
pub fn big_log2(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_u64().unwrap() as f64;
    top.log2() + shift as f64
}

/// `q(N)` and its running sums for `0 <= N <= max_n`.
#[derive(Debug, Clone)]
pub struct PartitionTable {
    q: Vec<BigUint>,
    cumulative: Vec<BigUint>,
}

impl PartitionTable {
    /// 0/1 knapsack over parts `1..=max_n`, each used at most once.
    pub fn build(max_n: usize) -> Self {
        assert!(max_n >= 1);
        let mut q = vec![BigUint::zero(); max_n + 1];
        q[0] = BigUint::one();
        for part in 1..=max_n {
            for n in (part..=max_n).rev() {
                let (lo, hi) = q.split_at_mut(n);
                hi[0] += &lo[n - part];
            }
        }
        Self::with_counts(q)
    }

    /// Same table via `prod(1 + x^k) = prod(1 - x^(2k)) / prod(1 - x^k)` and
    /// Euler's pentagonal number theorem, `O(N^1.5)` big-integer additions.
    /// Used for the long sweeps where the knapsack would be quadratic.
    pub fn build_pentagonal(max_n: usize) -> Self {
        assert!(max_n >= 1);
        // generalized pentagonal offsets g = j(3j-1)/2 with sign (-1)^j
        let mut pent: Vec<(usize, bool)> = Vec::new();
        for j in 1i64.. {
            let g1 = (j * (3 * j - 1) / 2) as usize;
            if g1 > max_n {
                break;
            }
            pent.push((g1, j % 2 == 1));
            let g2 = (j * (3 * j + 1) / 2) as usize;
            if g2 <= max_n {
                pent.push((g2, j % 2 == 1));
            }
        }
        let mut q: Vec<BigInt> = Vec::with_capacity(max_n + 1);
        for n in 0..=max_n {
            // coefficient of x^n in prod(1 - x^(2k)): (-1)^j at n = j(3j -+ 1)
            let mut acc = BigInt::zero();
            if n == 0 {
                acc += 1;
            } else {
                let mut j = 1i64;
                loop {
                    let a = (j * (3 * j - 1)) as usize;
                    if a > n {
                        break;
                    }
                    let b = (j * (3 * j + 1)) as usize;
                    if a == n || b == n {
                        if j % 2 == 1 {
                            acc -= 1;
                        } else {
                            acc += 1;
                        }
                        break;
                    }
                    j += 1;
                }
            }
            // p_g = (-1)^j, and q(n) = r(n) - sum p_g q(n - g)
            for &(g, odd) in &pent {
                if g > n {
                    break;
                }
                if odd {
                    acc += &q[n - g];
                } else {
                    acc -= &q[n - g];
                }
            }
            q.push(acc);
        }
        let q = q
            .into_iter()
            .map(|v| {
                v.to_biguint()
                    .expect("distinct partition counts are nonnegative")
            })
            .collect();
        Self::with_counts(q)
    }

    fn with_counts(q: Vec<BigUint>) -> Self {
        let mut cumulative = Vec::with_capacity(q.len());
        let mut run = BigUint::zero();
        cumulative.push(run.clone());
        for v in &q[1..] {
            run += v;
            cumulative.push(run.clone());
        }
        Self { q, cumulative }
    }

    pub fn max_n(&self) -> usize {
        self.q.len() - 1
    }

    /// `q(n)`, with `q(0) = 1` for the empty partition.
    pub fn q(&self, n: usize) -> &BigUint {
        &self.q[n]
    }

    /// Number of nonempty index sets with norm at most `n`.
    pub fn cumulative(&self, n: usize) -> &BigUint {
        &self.cumulative[n]
    }

    pub fn check_lemma_combinatorics(&self, m: u32) -> Result<LemmaVerdict> {
        if m == 0 {
            return Err(Error::Precondition("m must be at least 1".into()));
        }
        let t = lambda_threshold(m as f64);
        let count = self.cumulative_checked(t.value)?.clone();
        let bound = 0.4 * 2f64.powi(m as i32) / (m as f64).sqrt();
        // count < 0.4 2^m / sqrt(m)  <=>  25 m count^2 < 2^(2m+2)
        let lhs = BigUint::from(25u32) * BigUint::from(m) * &count * &count;
        let rhs = BigUint::one() << (2 * m as usize + 2);
        Ok(LemmaVerdict {
            m,
            threshold: t,
            holds: lhs < rhs,
            count,
            bound,
        })
    }

    /// `sqrt(m) 2^-m |{L : ||L|| <= lambda m^2}|`; `m` may be fractional.
    pub fn limit_ratio(&self, m: f64) -> Result<f64> {
        if m < 1.0 {
            return Err(Error::Precondition("m must be at least 1".into()));
        }
        let t = lambda_threshold(m);
        let count = self.cumulative_checked(t.value)?;
        if count.is_zero() {
            return Ok(0.0);
        }
        Ok((big_log2(count) - m + 0.5 * m.log2()).exp2())
    }

    /// The ratio at real `m = sqrt(n / lambda)`, where `lambda m^2 = n` exactly:
    /// `lambda^(-1/4) n^(1/4) exp(-pi sqrt(n/3)) cumulative(n)`.
    ///
    /// Between consecutive such points the count is constant and the ratio
    /// falls, so these are the local maxima of the ratio over real `m`.
    pub fn ratio_at_norm(&self, n: u64) -> Result<f64> {
        let count = self.cumulative_checked(n)?;
        if count.is_zero() {
            return Ok(0.0);
        }
        let n = n as f64;
        let log2 =
            big_log2(count) + (0.25 * n.ln() - PI * (n / 3.0).sqrt() - 0.25 * LAMBDA.ln()) / LN_2;
        Ok(log2.exp2())
    }

    fn cumulative_checked(&self, n: u64) -> Result<&BigUint> {
        self.cumulative.get(n as usize).ok_or_else(|| {
            Error::Precondition(format!("table covers N <= {}, need {n}", self.max_n()))
        })
    }
}

pub fn build_table(max_n: usize) -> PartitionTable {
    PartitionTable::build(max_n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaVerdict {
    pub m: u32,
    pub threshold: Threshold,
    pub count: BigUint,
    pub bound: f64,
    pub holds: bool,
}

/// Verdict of `|{L : ||L|| <= lambda m^2}| < 0.4 2^m / sqrt(m)` for one `m`.
pub fn check_lemma_combinatorics(m: u32) -> Result<LemmaVerdict> {
    let t = lambda_threshold(m as f64).value.max(1) as usize;
    PartitionTable::build_pentagonal(t).check_lemma_combinatorics(m)
}

pub fn check_limit_ratio(m: f64) -> Result<f64> {
    let t = lambda_threshold(m.max(1.0)).value.max(1) as usize;
    PartitionTable::build_pentagonal(t).limit_ratio(m)
}

/// `3^(1/4) / (2 pi lambda^(1/4))`, the large-`m` limit of [`check_limit_ratio`].
pub fn limit_ratio_constant() -> f64 {
    3f64.powf(0.25) / (2.0 * PI * LAMBDA.powf(0.25))
}

/// `q(N, d)`: index sets with `d` elements and norm `N`, counted as
/// partitions of `N - d(d-1)/2` into exactly `d` positive parts.
pub fn count_fixed_cardinality(n: u64, d: u64) -> BigUint {
    assert!(n >= 1 && d >= 1);
    if n < d * (d + 1) / 2 {
        return BigUint::zero();
    }
    let target = (n - d * (d - 1) / 2) as usize;
    let d = d as usize;
    // p[k][s]: partitions of s into exactly k positive parts
    let mut prev = vec![BigUint::zero(); target + 1];
    prev[0] = BigUint::one();
    for k in 1..=d {
        let mut cur = vec![BigUint::zero(); target + 1];
        for s in k..=target {
            // p(s, k) = p(s - 1, k - 1) + p(s - k, k)
            let a = prev[s - 1].clone();
            let b = cur[s - k].clone();
            cur[s] = a + b;
        }
        prev = cur;
    }
    prev[target].clone()
}

/// Upper bound `pi exp(pi sqrt(N/3)) / (2 sqrt(3N))` on `q(N)`.
pub fn bidar_bound(n: u64) -> f64 {
    assert!(n >= 1);
    let n = n as f64;
    PI * (PI * (n / 3.0).sqrt()).exp() / (2.0 * (3.0 * n).sqrt())
}
