//! Invariant suites behind `rqmc verify` and `rqmc mindep`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::{min_dependent_norm, IndexSet};
use crate::netgen::{
    asm_scramble, derive_replicate_rng, generator_identity, random_digital_shift,
    random_linear_scramble, DigitalShift, ScrambleMatrix,
};
use crate::partitions::{bidar_bound, build_table, lambda_threshold};
use crate::walsh::{
    chi, chi_bound_check, chi_dyadic, chi_recursion, error_decomposition, sign_independence_check,
    Polynomial,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

pub const DECOMPOSITION_BITS: u32 = 24;

/// Coefficients `p/q` with `p` in `-5..=5`, `q` in `1..=4`, nonzero leading term.
pub fn random_polynomial<R: Rng + ?Sized>(degree: u32, rng: &mut R) -> Polynomial {
    let mut coeffs: Vec<BigRational> = (0..=degree)
        .map(|_| {
            BigRational::new(
                BigInt::from(rng.gen_range(-5i64..=5)),
                BigInt::from(rng.gen_range(1i64..=4)),
            )
        })
        .collect();
    if coeffs[degree as usize].is_zero() {
        coeffs[degree as usize] = BigRational::from_integer(BigInt::from(1));
    }
    Polynomial::new(coeffs)
}

/// `f(x) = x`, `m = 1`, scramble rows below the diagonal all zero, zero shift.
pub fn decomposition_hand_case() -> Result<Check> {
    let e = DECOMPOSITION_BITS;
    let f = Polynomial::from_integers(&[0, 1]);
    let rep = error_decomposition(
        &f,
        &generator_identity(1)?,
        &ScrambleMatrix::identity(1, e)?,
        &DigitalShift::zero(e),
        e,
        e as u64,
    )?;
    let truncated = rep.truncated_sum.to_f64().unwrap_or(f64::NAN);
    let direct = rep.direct_error.to_f64().unwrap_or(f64::NAN);
    let ok = (truncated + 0.25).abs() <= 1e-6 && rep.holds();
    Ok(Check::new(
        "decomposition hand case",
        ok,
        format!(
            "truncated {truncated:.12}, direct {direct:.12}, residual {:.3e} <= bound {:.3e}",
            rep.residual(),
            rep.truncation_bound
        ),
    ))
}

/// `configs` random (polynomial, scramble, shift) triples with degree in
/// `1..=max_degree` and `m` cycling through `ms`, plus the hand case.
pub fn decomposition_checks(
    max_degree: u32,
    ms: &[u32],
    configs: usize,
    seed: u64,
) -> Result<Vec<Check>> {
    if max_degree == 0 || ms.is_empty() {
        return Err(Error::Precondition(
            "need a positive degree and at least one m".into(),
        ));
    }
    let e = DECOMPOSITION_BITS;
    let mut out = vec![decomposition_hand_case()?];
    for i in 0..configs {
        let m = ms[i % ms.len()];
        let mut rng = derive_replicate_rng(seed, i as u64);
        let degree = rng.gen_range(1..=max_degree);
        let f = random_polynomial(degree, &mut rng);
        let scramble = random_linear_scramble(m, e, &mut rng)?;
        let shift = random_digital_shift(e, &mut rng)?;
        let rep = error_decomposition(&f, &generator_identity(m)?, &scramble, &shift, e, e as u64)?;
        out.push(Check::new(
            format!("decomposition #{i} (m = {m}, degree {degree})"),
            rep.holds(),
            format!(
                "|direct - truncated| = {:.3e} <= bound {:.3e} ({} sets)",
                rep.residual(),
                rep.truncation_bound,
                rep.contributing_sets.len()
            ),
        ));
    }
    Ok(out)
}

/// Vanishing of `chi_{r,k}` for `r < |L_k|`, the size bound, and the recursion.
pub fn chi_checks(
    r_vanish: u32,
    k_vanish: u64,
    r_bound: u32,
    k_bound: u64,
    c_max: u32,
) -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let (mut tested, mut bad) = (0usize, Vec::new());
    for k in 1..=k_vanish {
        let card = k.count_ones();
        for r in 0..=r_vanish.min(card.saturating_sub(1)) {
            tested += 1;
            if !chi(r, k)?.is_zero() || !chi_dyadic(r, k)[r as usize].is_zero() {
                bad.push((r, k));
            }
        }
    }
    out.push(Check::new(
        "chi vanishes below |L_k|",
        bad.is_empty(),
        format!("{tested} cases with r <= {r_vanish}, k <= {k_vanish}; failures {bad:?}"),
    ));

    let (mut tested, mut bad) = (0usize, Vec::new());
    for k in 1..=k_bound {
        let card = k.count_ones() as usize;
        for r in 0..=r_bound {
            for u in 1..=card {
                tested += 1;
                if !chi_bound_check(r, k, u)? {
                    bad.push((r, k, u));
                }
            }
        }
    }
    out.push(Check::new(
        "chi size bound",
        bad.is_empty(),
        format!("{tested} cases with r <= {r_bound}, k <= {k_bound}; failures {bad:?}"),
    ));

    let (mut tested, mut bad) = (0usize, Vec::new());
    let mut worst: f64 = 0.0;
    for k in 1..=k_vanish {
        for r in 0..=r_vanish {
            tested += 1;
            let c = chi_recursion(r, k, c_max)?;
            let gap = (&c.lhs - &c.rhs).abs().to_f64().unwrap_or(f64::INFINITY);
            worst = worst.max(gap);
            if !c.holds {
                bad.push((r, k));
            }
        }
    }
    out.push(Check::new(
        "chi recursion",
        bad.is_empty(),
        format!("{tested} cases, c_max = {c_max}, largest gap {worst:.3e}; failures {bad:?}"),
    ));
    Ok(out)
}

/// Partition counts at `floor(lambda m^2)` against `0.4 2^m / sqrt(m)`, and
/// `q(N)` against the closed-form upper bound.
pub fn partition_checks(m_max: u32, n_max: usize) -> Result<Vec<Check>> {
    if m_max == 0 {
        return Err(Error::Precondition("m_max must be at least 1".into()));
    }
    let need = lambda_threshold(m_max as f64).value as usize;
    let table = build_table(need.max(n_max));
    let mut out = Vec::new();
    let mut bad = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for m in 1..=m_max {
        let v = table.check_lemma_combinatorics(m)?;
        if !v.holds {
            bad.push(m);
        }
        let ratio = crate::partitions::big_log2(&v.count)
            - (0.4f64.log2() + m as f64 - 0.5 * (m as f64).log2());
        worst = worst.max(ratio);
    }
    out.push(Check::new(
        "partition count bound",
        bad.is_empty(),
        format!("1 <= m <= {m_max}; largest log2(count / bound) {worst:.4}; failures {bad:?}"),
    ));
    let bad: Vec<usize> = (1..=n_max)
        .filter(|&n| crate::partitions::big_log2(table.q(n)) >= bidar_bound(n as u64).log2())
        .collect();
    out.push(Check::new(
        "q(N) below closed-form bound",
        bad.is_empty(),
        format!("1 <= N <= {n_max}; failures {bad:?}"),
    ));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MindepReport {
    pub m: u32,
    pub trials: u64,
    pub threshold: u64,
    /// Rows used per matrix: enough to hold every set of norm up to the search limit.
    pub rows: u32,
    pub hits: u64,
    pub fraction: f64,
    /// `0.4 / sqrt(m)`.
    pub bound: f64,
    /// `bound + 3 sqrt(bound (1 - bound) / trials)`.
    pub slack_bound: f64,
    /// Smallest dependent norm found for the ASM matrix, when requested.
    pub asm_min_norm: Option<u64>,
}

impl MindepReport {
    pub fn within_slack(&self) -> bool {
        self.fraction < self.slack_bound
    }
}

/// Fraction of `trials` random scrambles whose rows have an XOR-zero set of
/// norm at most `threshold` (default `floor(lambda m^2)`). With `asm`, the
/// single ASM matrix is searched instead, up to norm `max(threshold, 2m + 1)`.
pub fn mindep(
    m: u32,
    trials: u64,
    threshold: Option<u64>,
    seed: u64,
    asm: bool,
) -> Result<MindepReport> {
    if m == 0 {
        return Err(Error::Precondition("m must be at least 1".into()));
    }
    let threshold = threshold.unwrap_or_else(|| lambda_threshold(m as f64).value);
    let bound = 0.4 / (m as f64).sqrt();
    let p = bound.min(1.0);
    let mut rep = MindepReport {
        m,
        trials: if asm { 1 } else { trials },
        threshold,
        rows: m,
        hits: 0,
        fraction: 0.0,
        bound,
        slack_bound: bound + 3.0 * (p * (1.0 - p) / trials.max(1) as f64).sqrt(),
        asm_min_norm: None,
    };
    if asm {
        let limit = threshold.max(2 * m as u64 + 1);
        rep.rows = limit as u32;
        if rep.rows > 64 {
            return Err(Error::Guard(format!("{limit} rows exceed 64")));
        }
        let mat = asm_scramble(m, rep.rows)?;
        let found = min_dependent_norm(mat.matrix(), limit)?.map(|(n, _)| n);
        rep.asm_min_norm = found;
        rep.hits = found.is_some_and(|n| n <= threshold) as u64;
        rep.fraction = rep.hits as f64;
        return Ok(rep);
    }
    if threshold == 0 || trials == 0 {
        return Ok(rep);
    }
    rep.rows = (threshold as u32).max(m);
    if rep.rows > 64 {
        return Err(Error::Guard(format!(
            "threshold {threshold} needs more than 64 rows"
        )));
    }
    for t in 0..trials {
        let mut rng = derive_replicate_rng(seed, t);
        let mat = random_linear_scramble(m, rep.rows, &mut rng)?;
        if min_dependent_norm(mat.matrix(), threshold)?.is_some() {
            rep.hits += 1;
        }
    }
    rep.fraction = rep.hits as f64 / trials as f64;
    Ok(rep)
}

pub fn concentration_checks(ms: &[u32], trials: u64, seed: u64) -> Result<Vec<Check>> {
    ms.iter()
        .map(|&m| {
            let r = mindep(m, trials, None, seed, false)?;
            Ok(Check::new(
                format!("concentration m = {m}"),
                r.within_slack(),
                format!(
                    "fraction {:.4} ({} of {}) with norm <= {}; bound {:.4}, with 3 sigma {:.4}",
                    r.fraction, r.hits, r.trials, r.threshold, r.bound, r.slack_bound
                ),
            ))
        })
        .collect()
}

/// Random distinct nonempty `L, L'` within `[max_element]`, checked for
/// `Pr(S_L = 1) = 1/2` and `Pr(S_L = S_L' = 1) = 1/4`.
pub fn independence_checks(pairs: usize, max_element: u32, seed: u64) -> Result<Vec<Check>> {
    if !(2..=24).contains(&max_element) {
        return Err(Error::Precondition("max element must lie in 2..=24".into()));
    }
    let half = BigRational::new(1.into(), 2.into());
    let quarter = BigRational::new(1.into(), 4.into());
    let full = 1u64 << max_element;
    let mut rng = derive_replicate_rng(seed, 0);
    let mut bad = Vec::new();
    for _ in 0..pairs {
        let a = rng.gen_range(1..full);
        let mut b = rng.gen_range(1..full);
        while b == a {
            b = rng.gen_range(1..full);
        }
        let (l, lp) = (
            IndexSet::from_walsh_index(a).expect("nonzero"),
            IndexSet::from_walsh_index(b).expect("nonzero"),
        );
        let (one, both) = sign_independence_check(&l, &lp)?;
        if one != half || both != quarter {
            bad.push(format!(
                "{:?} {:?} -> ({one}, {both})",
                l.elements(),
                lp.elements()
            ));
        }
    }
    Ok(vec![Check::new(
        "pairwise sign independence",
        bad.is_empty(),
        format!("{pairs} pairs within [{max_element}] give (1/2, 1/4); failures {bad:?}"),
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_case_passes() {
        let c = decomposition_hand_case().unwrap();
        assert!(c.passed, "{c}");
        assert!(c.to_string().starts_with("PASS"));
    }

    #[test]
    fn small_suites_pass() {
        for c in decomposition_checks(3, &[3], 3, 5).unwrap() {
            assert!(c.passed, "{c}");
        }
        for c in chi_checks(2, 16, 3, 32, 20).unwrap() {
            assert!(c.passed, "{c}");
        }
        for c in partition_checks(20, 200).unwrap() {
            assert!(c.passed, "{c}");
        }
        for c in independence_checks(10, 8, 1).unwrap() {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn mindep_examples() {
        let r = mindep(10, 50, Some(0), 1, false).unwrap();
        assert_eq!((r.hits, r.fraction), (0, 0.0));
        for m in 1..=8 {
            let r = mindep(m, 0, None, 0, true).unwrap();
            assert_eq!(r.asm_min_norm, Some(2 * m as u64 + 1), "m = {m}");
        }
        let r = mindep(10, 200, None, 3, false).unwrap();
        assert_eq!(r.threshold, 14);
        assert!(r.fraction <= 1.0);
        assert_eq!(r, mindep(10, 200, None, 3, false).unwrap());
    }
}
