//! Scrambled base-2 digital nets at fixed precision.
//!
//! Point `i` of a net with generator `C`, scrambling matrix `M` (E x m) and
//! digital shift `D` has bits `x_k = sum_j (MC)_{kj} i_j + D_k (mod 2)` for
//! `k = 1..E`, where `i_1` is the least significant bit of `i` and `x_1` the
//! most significant bit of the point. Points are stored as `E`-bit integers
//! with `x_k` at bit `E - k`, so the real value is the integer over `2^E`.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// Largest supported precision: one machine word per coordinate.
pub const MAX_PRECISION: u32 = 64;

const EMBEDDED_DIRECTIONS: &str = include_str!("../data/new-joe-kuo-6.8.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScrambleKind {
    RandomLinear,
    Asm,
    Identity,
}

impl fmt::Display for ScrambleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScrambleKind::RandomLinear => "random_linear",
            ScrambleKind::Asm => "asm",
            ScrambleKind::Identity => "identity",
        })
    }
}

/// An `E x m` scrambling matrix whose top `m x m` block is unit lower triangular.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScrambleMatrix {
    inner: BitMatrix,
    kind: ScrambleKind,
}

impl ScrambleMatrix {
    pub fn new(inner: BitMatrix, kind: ScrambleKind) -> Result<Self> {
        let (e, m) = (inner.n_rows(), inner.n_cols());
        if e < m {
            return Err(Error::Precondition(format!(
                "precision {e} is below m = {m}"
            )));
        }
        if e > MAX_PRECISION as usize {
            return Err(Error::Precondition(format!(
                "precision {e} exceeds {MAX_PRECISION}"
            )));
        }
        for k in 0..m {
            let row = inner.row(k);
            if row >> k != 1 {
                return Err(Error::Precondition(format!(
                    "row {} of the top block is not unit lower triangular",
                    k + 1
                )));
            }
        }
        if kind == ScrambleKind::Asm && inner != asm_matrix(m, e) {
            return Err(Error::Precondition("not an ASM matrix".into()));
        }
        Ok(Self { inner, kind })
    }

    /// Identity on the top block, zero rows below.
    pub fn identity(m: u32, precision: u32) -> Result<Self> {
        check_shape(m, precision)?;
        let mut rows: Vec<u64> = (0..m).map(|k| 1u64 << k).collect();
        rows.resize(precision as usize, 0);
        Self::new(
            BitMatrix::from_rows(rows, m as usize)?,
            ScrambleKind::Identity,
        )
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.inner
    }

    pub fn kind(&self) -> ScrambleKind {
        self.kind
    }

    pub fn m(&self) -> u32 {
        self.inner.n_cols() as u32
    }

    pub fn precision(&self) -> u32 {
        self.inner.n_rows() as u32
    }

    /// The first `precision` rows, as used by a lower-precision scramble.
    pub fn truncate(&self, precision: u32) -> Result<Self> {
        if precision > self.precision() {
            return Err(Error::Precondition(format!(
                "cannot truncate precision {} to {precision}",
                self.precision()
            )));
        }
        let rows = self.inner.rows()[..precision as usize].to_vec();
        Self::new(BitMatrix::from_rows(rows, self.inner.n_cols())?, self.kind)
    }
}

fn check_shape(m: u32, precision: u32) -> Result<()> {
    if precision < m {
        return Err(Error::Precondition(format!(
            "precision {precision} is below m = {m}"
        )));
    }
    if precision > MAX_PRECISION {
        return Err(Error::Precondition(format!(
            "precision {precision} exceeds {MAX_PRECISION}"
        )));
    }
    Ok(())
}

fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn asm_matrix(m: usize, e: usize) -> BitMatrix {
    let rows = (0..e).map(|k| low_mask((k + 1).min(m) as u32)).collect();
    BitMatrix::from_rows(rows, m).expect("asm rows fit in m columns")
}

pub fn generator_identity(m: u32) -> Result<BitMatrix> {
    if m == 0 {
        return Err(Error::Precondition("m must be at least 1".into()));
    }
    BitMatrix::identity(m as usize)
}

/// Unit diagonal, zeros above, fair bits below; rows past `m` are all fair bits.
pub fn random_linear_scramble<R: Rng + ?Sized>(
    m: u32,
    precision: u32,
    rng: &mut R,
) -> Result<ScrambleMatrix> {
    check_shape(m, precision)?;
    let rows = (0..precision)
        .map(|k| {
            if k < m {
                (1u64 << k) | (rng.gen::<u64>() & low_mask(k))
            } else {
                rng.gen::<u64>() & low_mask(m)
            }
        })
        .collect();
    ScrambleMatrix::new(
        BitMatrix::from_rows(rows, m as usize)?,
        ScrambleKind::RandomLinear,
    )
}

/// `M_kj = 1` iff `k >= j`.
pub fn asm_scramble(m: u32, precision: u32) -> Result<ScrambleMatrix> {
    check_shape(m, precision)?;
    ScrambleMatrix::new(
        asm_matrix(m as usize, precision as usize),
        ScrambleKind::Asm,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailPolicy {
    Zero,
    Unspecified,
}

/// The first `E` bits of a digital shift, aligned like a point value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DigitalShift {
    word: u64,
    precision: u32,
    tail: TailPolicy,
}

impl DigitalShift {
    pub fn zero(precision: u32) -> Self {
        assert!((1..=MAX_PRECISION).contains(&precision));
        Self {
            word: 0,
            precision,
            tail: TailPolicy::Zero,
        }
    }

    /// From bits `D_1..D_E`.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let e = bits.len() as u32;
        if e == 0 || e > MAX_PRECISION {
            return Err(Error::Precondition(format!(
                "shift length {e} out of range"
            )));
        }
        let word = bits
            .iter()
            .enumerate()
            .fold(0u64, |w, (k, &b)| w | ((b as u64) << (e as usize - 1 - k)));
        Ok(Self {
            word,
            precision: e,
            tail: TailPolicy::Zero,
        })
    }

    /// `D_k`, 1-based.
    pub fn bit(&self, k: u32) -> bool {
        assert!((1..=self.precision).contains(&k));
        (self.word >> (self.precision - k)) & 1 == 1
    }

    pub fn word(&self) -> u64 {
        self.word
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn tail_policy(&self) -> TailPolicy {
        self.tail
    }

    pub fn value(&self) -> f64 {
        to_unit(self.word, self.precision)
    }

    pub fn truncate(&self, precision: u32) -> Result<Self> {
        if precision == 0 || precision > self.precision {
            return Err(Error::Precondition(format!(
                "cannot truncate precision {} to {precision}",
                self.precision
            )));
        }
        Ok(Self {
            word: self.word >> (self.precision - precision),
            precision,
            tail: self.tail,
        })
    }
}

pub fn random_digital_shift<R: Rng + ?Sized>(precision: u32, rng: &mut R) -> Result<DigitalShift> {
    if precision == 0 || precision > MAX_PRECISION {
        return Err(Error::Precondition(format!(
            "precision {precision} out of range"
        )));
    }
    Ok(DigitalShift {
        word: rng.gen::<u64>() & low_mask(precision),
        precision,
        tail: TailPolicy::Zero,
    })
}

/// `value / 2^E`, truncated to the 53 leading bits so the result stays below 1.
#[inline]
pub fn to_unit(value: u64, precision: u32) -> f64 {
    if precision > 53 {
        (value >> (precision - 53)) as f64 * 2f64.powi(-53)
    } else {
        value as f64 * 2f64.powi(-(precision as i32))
    }
}

/// `n = 2^m` points in `dim` coordinates, stored point-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    m: u32,
    precision: u32,
    dim: usize,
    data: Vec<u64>,
}

impl PointSet {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        1 << self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fixed-point value of coordinate `coord` of point `i`.
    pub fn value(&self, i: usize, coord: usize) -> u64 {
        self.data[i * self.dim + coord]
    }

    /// Fixed-point coordinates of point `i`.
    pub fn point(&self, i: usize) -> &[u64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn real(&self, i: usize, coord: usize) -> f64 {
        to_unit(self.value(i, coord), self.precision)
    }

    pub fn write_real(&self, i: usize, out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(self.point(i)) {
            *o = to_unit(v, self.precision);
        }
    }

    /// Values of one coordinate, in index order.
    pub fn coordinate(&self, coord: usize) -> Vec<u64> {
        (0..self.len()).map(|i| self.value(i, coord)).collect()
    }
}

/// Words `g_j = sum_k (MC)_{kj} 2^(E-k)`; point `i` is the XOR of `g_j` over set bits `i_j`.
fn column_words(c: &BitMatrix, scramble: &ScrambleMatrix) -> Result<Vec<u64>> {
    let m = scramble.m() as usize;
    if c.n_rows() != m || c.n_cols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: c.n_rows().max(c.n_cols()),
        });
    }
    if !c.is_nonsingular() {
        return Err(Error::Singular { rank: c.rank(), m });
    }
    let mc = scramble.matrix().mul(c)?;
    let e = scramble.precision() as usize;
    Ok((0..m)
        .map(|j| (0..e).fold(0u64, |w, k| w | (((mc.row(k) >> j) & 1) << (e - 1 - k))))
        .collect())
}

fn fill_coordinate(words: &[u64], shift: u64, out: &mut [u64], stride: usize, offset: usize) {
    let n = 1usize << words.len();
    let mut prev = vec![0u64; n];
    for i in 1..n {
        let tz = i.trailing_zeros() as usize;
        prev[i] = prev[i & (i - 1)] ^ words[tz];
    }
    for (i, v) in prev.into_iter().enumerate() {
        out[i * stride + offset] = v ^ shift;
    }
}

/// One-dimensional scrambled net.
pub fn generate_points(
    c: &BitMatrix,
    scramble: &ScrambleMatrix,
    shift: &DigitalShift,
) -> Result<PointSet> {
    generate_points_multi(&[(c, scramble, shift)])
}

/// One generator, scramble and shift per coordinate, all with a common `m` and `E`.
pub fn generate_points_multi(
    coords: &[(&BitMatrix, &ScrambleMatrix, &DigitalShift)],
) -> Result<PointSet> {
    let Some(&(_, first, _)) = coords.first() else {
        return Err(Error::Precondition(
            "at least one coordinate is required".into(),
        ));
    };
    let (m, e) = (first.m(), first.precision());
    if m > 30 {
        return Err(Error::Guard(format!("2^{m} points will not fit in memory")));
    }
    let dim = coords.len();
    let mut data = vec![0u64; dim << m];
    for (coord, &(c, scramble, shift)) in coords.iter().enumerate() {
        if scramble.m() != m || scramble.precision() != e {
            return Err(Error::DimensionMismatch {
                expected: e as usize,
                got: scramble.precision() as usize,
            });
        }
        if shift.precision() != e {
            return Err(Error::DimensionMismatch {
                expected: e as usize,
                got: shift.precision() as usize,
            });
        }
        let words = column_words(c, scramble)?;
        fill_coordinate(&words, shift.word(), &mut data, dim, coord);
    }
    Ok(PointSet {
        m,
        precision: e,
        dim,
        data,
    })
}

/// Independent, order-free stream for replicate `index` under `master_seed`.
pub fn derive_replicate_rng(master_seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionEntry {
    pub d: u32,
    pub s: u32,
    pub a: u32,
    pub m: Vec<u32>,
}

/// Joe–Kuo direction numbers for coordinates `2..`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionNumbers {
    entries: Vec<DirectionEntry>,
}

impl DirectionNumbers {
    /// Parses whitespace-separated `d s a m_1 .. m_s` lines. A leading header
    /// line and blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<DirectionEntry> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if idx == 0 && toks[0].parse::<u32>().is_err() {
                continue;
            }
            let bad = |reason: String| Error::DirectionFile {
                line: lineno,
                reason,
            };
            let nums: Vec<u32> = toks
                .iter()
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|_| bad(format!("not an integer: {t:?}")))
                })
                .collect::<Result<_>>()?;
            if nums.len() < 4 {
                return Err(bad("expected `d s a m_1 .. m_s`".into()));
            }
            let (d, s, a) = (nums[0], nums[1], nums[2]);
            if s == 0 || s > 31 {
                return Err(bad(format!("degree {s} out of range")));
            }
            if nums.len() != 3 + s as usize {
                return Err(bad(format!(
                    "degree {s} needs {s} direction numbers, got {}",
                    nums.len() - 3
                )));
            }
            let expected_d = entries.last().map_or(2, |e| e.d + 1);
            if d != expected_d {
                return Err(bad(format!(
                    "dimension {d} out of sequence, expected {expected_d}"
                )));
            }
            if a >= 1 << (s - 1) {
                return Err(bad(format!(
                    "coefficient code {a} needs more than {} bits",
                    s - 1
                )));
            }
            let m = nums[3..].to_vec();
            for (j, &mj) in m.iter().enumerate() {
                let j = j as u32 + 1;
                if mj % 2 == 0 || mj >= 1 << j {
                    return Err(bad(format!("m_{j} = {mj} must be odd and below 2^{j}")));
                }
            }
            entries.push(DirectionEntry { d, s, a, m });
        }
        if entries.is_empty() {
            return Err(Error::DirectionFile {
                line: 0,
                reason: "no direction numbers".into(),
            });
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// The table compiled into the crate (coordinates up to 8).
    pub fn embedded() -> Self {
        Self::parse(EMBEDDED_DIRECTIONS).expect("embedded direction numbers are valid")
    }

    pub fn max_dim(&self) -> usize {
        self.entries.len() + 1
    }

    pub fn entries(&self) -> &[DirectionEntry] {
        &self.entries
    }

    /// Generator matrices for the first `d` coordinates; coordinate 1 is the identity.
    pub fn generator_matrices(&self, d: usize, m: u32) -> Result<Vec<BitMatrix>> {
        if d == 0 || d > self.max_dim() {
            return Err(Error::Precondition(format!(
                "need 1 <= d <= {}, got {d}",
                self.max_dim()
            )));
        }
        if m == 0 || m > 32 {
            return Err(Error::Precondition(format!("need 1 <= m <= 32, got {m}")));
        }
        let mut out = vec![generator_identity(m)?];
        for entry in &self.entries[..d - 1] {
            let v = direction_words(entry, m as usize);
            // C_kj is bit 32-k of v_j
            let rows = (0..m as usize)
                .map(|k| {
                    v.iter().enumerate().fold(0u64, |r, (j, &vj)| {
                        r | ((((vj >> (31 - k)) & 1) as u64) << j)
                    })
                })
                .collect();
            out.push(BitMatrix::from_rows(rows, m as usize)?);
        }
        Ok(out)
    }
}

/// `v_1..v_m` as 32-bit words.
fn direction_words(entry: &DirectionEntry, m: usize) -> Vec<u32> {
    let s = entry.s as usize;
    let mut v = vec![0u32; m];
    for j in 0..m {
        if j < s {
            v[j] = entry.m[j] << (31 - j);
        } else {
            let mut w = v[j - s] ^ (v[j - s] >> s);
            for k in 1..s {
                if (entry.a >> (s - 1 - k)) & 1 == 1 {
                    w ^= v[j - k];
                }
            }
            v[j] = w;
        }
    }
    v
}

pub fn generator_sobol(d: usize, m: u32) -> Result<Vec<BitMatrix>> {
    DirectionNumbers::embedded().generator_matrices(d, m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Identity,
    Sobol,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::Identity => "identity",
            Generator::Sobol => "sobol",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    pub m: u32,
    pub precision: u32,
    pub dim: usize,
    pub generator: Generator,
    pub scramble: ScrambleKind,
    pub seed: u64,
}

impl NetConfig {
    pub fn validate(&self) -> Result<()> {
        check_shape(self.m, self.precision)?;
        if self.precision == 0 {
            return Err(Error::Precondition("precision must be at least 1".into()));
        }
        if self.dim == 0 {
            return Err(Error::Precondition("dimension must be at least 1".into()));
        }
        if self.generator == Generator::Identity && self.dim > 1 {
            return Err(Error::Precondition(
                "the identity generator is one-dimensional".into(),
            ));
        }
        Ok(())
    }

    pub fn generators(&self, directions: Option<&DirectionNumbers>) -> Result<Vec<BitMatrix>> {
        self.validate()?;
        if self.m == 0 {
            return Ok(vec![BitMatrix::zeros(0, 0)?; self.dim]);
        }
        match self.generator {
            Generator::Identity => Ok(vec![generator_identity(self.m)?]),
            Generator::Sobol => match directions {
                Some(dirs) => dirs.generator_matrices(self.dim, self.m),
                None => generator_sobol(self.dim, self.m),
            },
        }
    }

    /// Points of replicate `index`: per coordinate, a scramble and then a
    /// shift drawn from the replicate's own stream.
    pub fn replicate(&self, generators: &[BitMatrix], index: u64) -> Result<PointSet> {
        if generators.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: generators.len(),
            });
        }
        let mut rng = derive_replicate_rng(self.seed, index);
        let mut parts = Vec::with_capacity(self.dim);
        for _ in 0..self.dim {
            let scramble = match self.scramble {
                ScrambleKind::RandomLinear => {
                    random_linear_scramble(self.m, self.precision, &mut rng)?
                }
                ScrambleKind::Asm => asm_scramble(self.m, self.precision)?,
                ScrambleKind::Identity => ScrambleMatrix::identity(self.m, self.precision)?,
            };
            let shift = random_digital_shift(self.precision, &mut rng)?;
            parts.push((scramble, shift));
        }
        let coords: Vec<_> = generators
            .iter()
            .zip(&parts)
            .map(|(c, (s, d))| (c, s, d))
            .collect();
        generate_points_multi(&coords)
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::gf2::{min_dependent_norm, IndexSet};
    use proptest::prelude::*;

    fn reals(p: &PointSet) -> Vec<f64> {
        (0..p.len()).map(|i| p.real(i, 0)).collect()
    }

    #[test]
    fn identity_generator() {
        assert_eq!(
            generator_identity(1).unwrap(),
            BitMatrix::parse(&["1"]).unwrap()
        );
        for m in 1..=10 {
            assert_eq!(generator_identity(m).unwrap().rank(), m as usize);
        }
    }

    #[test]
    fn van_der_corput_order() {
        let c = generator_identity(2).unwrap();
        let m = ScrambleMatrix::identity(2, 2).unwrap();
        let p = generate_points(&c, &m, &DigitalShift::zero(2)).unwrap();
        assert_eq!(reals(&p), vec![0.0, 0.5, 0.25, 0.75]);
    }

    #[test]
    fn leading_shift_bit_flips_leading_point_bit() {
        let c = generator_identity(3).unwrap();
        let m = random_linear_scramble(3, 10, &mut derive_replicate_rng(7, 0)).unwrap();
        let a = generate_points(&c, &m, &DigitalShift::zero(10)).unwrap();
        let mut bits = vec![false; 10];
        bits[0] = true;
        let b = generate_points(&c, &m, &DigitalShift::from_bits(&bits).unwrap()).unwrap();
        for i in 0..8 {
            assert_eq!(a.value(i, 0) ^ b.value(i, 0), 1 << 9);
        }
    }

    #[test]
    fn singular_generator_rejected() {
        let c = BitMatrix::parse(&["11", "11"]).unwrap();
        let m = ScrambleMatrix::identity(2, 4).unwrap();
        assert!(matches!(
            generate_points(&c, &m, &DigitalShift::zero(4)),
            Err(Error::Singular { rank: 1, m: 2 })
        ));
    }

    #[test]
    fn random_linear_shape() {
        let mut rng = derive_replicate_rng(1, 0);
        let m = random_linear_scramble(1, 1, &mut rng).unwrap();
        assert_eq!(m.matrix(), &BitMatrix::parse(&["1"]).unwrap());
        let a = random_linear_scramble(6, 20, &mut derive_replicate_rng(3, 9)).unwrap();
        let b = random_linear_scramble(6, 20, &mut derive_replicate_rng(3, 9)).unwrap();
        assert_eq!(a, b);
        assert!(random_linear_scramble(5, 4, &mut rng).is_err());
    }

    #[test]
    fn random_linear_free_bits_are_fair() {
        let (m, e, draws) = (4u32, 8u32, 10_000u32);
        let mut ones = vec![vec![0u32; m as usize]; e as usize];
        let mut rng = derive_replicate_rng(11, 0);
        for _ in 0..draws {
            let s = random_linear_scramble(m, e, &mut rng).unwrap();
            for k in 0..e as usize {
                for j in 0..m as usize {
                    ones[k][j] += s.matrix().get(k, j) as u32;
                }
            }
        }
        let sigma = (draws as f64 * 0.25).sqrt();
        for k in 0..e as usize {
            for j in 0..m as usize {
                let c = ones[k][j] as f64;
                if k < m as usize && j >= k {
                    assert_eq!(c, if j == k { draws as f64 } else { 0.0 });
                } else {
                    assert!(
                        (c - draws as f64 / 2.0).abs() < 5.0 * sigma,
                        "({k},{j}): {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn asm_examples() {
        let a = asm_scramble(2, 3).unwrap();
        assert_eq!(a.matrix(), &BitMatrix::parse(&["10", "11", "11"]).unwrap());
        for m in 1..=7u32 {
            let a = asm_scramble(m, 2 * m + 1).unwrap();
            assert_eq!(a.matrix().row(m as usize - 1), a.matrix().row(m as usize));
            let (n, w) = min_dependent_norm(a.matrix(), 2 * m as u64 + 1)
                .unwrap()
                .unwrap();
            assert_eq!(n, 2 * m as u64 + 1);
            assert_eq!(w, IndexSet::new(vec![m, m + 1]).unwrap());
        }
        let bad = BitMatrix::parse(&["10", "11", "10"]).unwrap();
        assert!(ScrambleMatrix::new(bad, ScrambleKind::Asm).is_err());
    }

    #[test]
    fn scramble_validation() {
        let upper = BitMatrix::parse(&["11", "01"]).unwrap();
        assert!(ScrambleMatrix::new(upper, ScrambleKind::RandomLinear).is_err());
        let zero_diag = BitMatrix::parse(&["00", "11"]).unwrap();
        assert!(ScrambleMatrix::new(zero_diag, ScrambleKind::RandomLinear).is_err());
    }

    #[test]
    fn shift_examples() {
        let a = random_digital_shift(40, &mut derive_replicate_rng(5, 2)).unwrap();
        let b = random_digital_shift(40, &mut derive_replicate_rng(5, 2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tail_policy(), TailPolicy::Zero);
        assert_eq!(DigitalShift::zero(8).word(), 0);
        let d = DigitalShift::from_bits(&[true, false, true]).unwrap();
        assert_eq!(d.value(), 0.625);
        assert!(d.bit(1) && !d.bit(2) && d.bit(3));
        assert_eq!(d.truncate(2).unwrap().value(), 0.5);
    }

    #[test]
    fn shift_mean() {
        let (e, draws) = (6u32, 10_000);
        let mut rng = derive_replicate_rng(99, 0);
        let mean = (0..draws)
            .map(|_| random_digital_shift(e, &mut rng).unwrap().value())
            .sum::<f64>()
            / draws as f64;
        let cells = (1u64 << e) as f64;
        let expect = 0.5 - 0.5 / cells;
        let sd = ((cells * cells - 1.0) / 12.0).sqrt() / cells;
        assert!(
            (mean - expect).abs() < 5.0 * sd / (draws as f64).sqrt(),
            "{mean}"
        );
    }

    #[test]
    fn replicate_streams_differ() {
        let mut same = 0;
        for r in 0..1000u64 {
            let a: u64 = rand::RngCore::next_u64(&mut derive_replicate_rng(42, r));
            let b: u64 = rand::RngCore::next_u64(&mut derive_replicate_rng(42, r + 1000));
            let a2: u64 = rand::RngCore::next_u64(&mut derive_replicate_rng(42, r));
            assert_eq!(a, a2);
            same += (a == b) as u32;
        }
        assert_eq!(same, 0);
    }

    // Wilson–Hilferty upper quantile of chi-square with k degrees of freedom.
    fn chi2_quantile(k: f64, z: f64) -> f64 {
        let h = 2.0 / (9.0 * k);
        k * (1.0 - h + z * h.sqrt()).powi(3)
    }

    #[test]
    fn points_are_marginally_uniform() {
        let (m, e, draws) = (3u32, 6u32, 100_000u64);
        let c = generator_identity(m).unwrap();
        let mut counts = vec![[0u32; 64]; 1 << m];
        for r in 0..draws {
            let mut rng = derive_replicate_rng(2024, r);
            let s = random_linear_scramble(m, e, &mut rng).unwrap();
            let d = random_digital_shift(e, &mut rng).unwrap();
            let p = generate_points(&c, &s, &d).unwrap();
            for (i, row) in counts.iter_mut().enumerate() {
                row[p.value(i, 0) as usize] += 1;
            }
        }
        // z = 4.7534 is the upper 1e-6 normal quantile
        let crit = chi2_quantile(63.0, 4.7534);
        let expect = draws as f64 / 64.0;
        for row in &counts {
            let stat: f64 = row
                .iter()
                .map(|&o| (o as f64 - expect).powi(2) / expect)
                .sum();
            assert!(stat < crit, "chi-square {stat} >= {crit}");
        }
    }

    #[test]
    fn mean_over_scrambles_matches_grid_average() {
        let (m, e, draws) = (3u32, 6u32, 10_000u64);
        let f = |x: f64| x * x.exp();
        let grid = (0..1u64 << e).map(|j| f(j as f64 / 64.0)).sum::<f64>() / 64.0;
        let c = generator_identity(m).unwrap();
        let est: Vec<f64> = (0..draws)
            .map(|r| {
                let mut rng = derive_replicate_rng(77, r);
                let s = random_linear_scramble(m, e, &mut rng).unwrap();
                let d = random_digital_shift(e, &mut rng).unwrap();
                let p = generate_points(&c, &s, &d).unwrap();
                (0..8).map(|i| f(p.real(i, 0))).sum::<f64>() / 8.0
            })
            .collect();
        let mean = est.iter().sum::<f64>() / draws as f64;
        let var = est.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        assert!((mean - grid).abs() < 4.0 * se, "{mean} vs {grid} (se {se})");
    }

    // Sobol' points from the Bratley–Fox recurrence
    // m_j = 2 a_1 m_{j-1} ^ 4 a_2 m_{j-2} ^ ... ^ 2^s m_{j-s} ^ m_{j-s}.
    fn bratley_fox(entry: &DirectionEntry, m: usize, i: u64) -> f64 {
        let s = entry.s as usize;
        let mut mm: Vec<u64> = entry.m.iter().map(|&v| v as u64).collect();
        for j in s..m {
            let mut v = mm[j - s] ^ (mm[j - s] << s);
            for k in 1..s {
                let ak = (entry.a >> (s - 1 - k)) & 1;
                if ak == 1 {
                    v ^= mm[j - k] << k;
                }
            }
            mm.push(v);
        }
        let mut x = 0u64;
        for j in 0..m {
            if (i >> j) & 1 == 1 {
                x ^= mm[j] << (m - 1 - j);
            }
        }
        x as f64 / (1u64 << m) as f64
    }

    #[test]
    fn sobol_matches_bratley_fox() {
        let dirs = DirectionNumbers::embedded();
        let m = 10u32;
        let gens = dirs.generator_matrices(dirs.max_dim(), m).unwrap();
        for (c, gen) in gens.iter().enumerate() {
            assert_eq!(gen.rank(), m as usize);
            let s = ScrambleMatrix::identity(m, m).unwrap();
            let p = generate_points(gen, &s, &DigitalShift::zero(m)).unwrap();
            for i in 0..1u64 << m {
                let expect = if c == 0 {
                    // van der Corput radical inverse
                    (0..m).fold(0.0, |acc, j| {
                        acc + ((i >> j) & 1) as f64 / (2u64 << j) as f64
                    })
                } else {
                    bratley_fox(&dirs.entries()[c - 1], m as usize, i)
                };
                assert_eq!(
                    p.real(i as usize, 0),
                    expect,
                    "coordinate {} index {i}",
                    c + 1
                );
            }
        }
    }

    #[test]
    fn sobol_first_points() {
        let gens = generator_sobol(2, 2).unwrap();
        let s = ScrambleMatrix::identity(2, 2).unwrap();
        let z = DigitalShift::zero(2);
        let p = generate_points_multi(&[(&gens[0], &s, &z), (&gens[1], &s, &z)]).unwrap();
        let pts: Vec<(f64, f64)> = (0..4).map(|i| (p.real(i, 0), p.real(i, 1))).collect();
        assert_eq!(
            pts,
            vec![(0.0, 0.0), (0.5, 0.5), (0.25, 0.75), (0.75, 0.25)]
        );
        assert_eq!(
            generator_sobol(1, 5).unwrap()[0],
            generator_identity(5).unwrap()
        );
    }

    #[test]
    fn sobol_full_rank_to_32() {
        for gen in generator_sobol(8, 32).unwrap() {
            assert_eq!(gen.rank(), 32);
            for k in 0..32 {
                assert!(gen.get(k, k));
                assert_eq!(gen.row(k) & ((1u64 << k) - 1), 0, "upper triangular");
            }
        }
    }

    #[test]
    fn direction_file_validation() {
        let good = "d s a m_i\n2 1 0 1\n3 2 1 1 3\n";
        assert_eq!(DirectionNumbers::parse(good).unwrap().max_dim(), 3);
        for bad in [
            "2 1 0 2\n",
            "2 1 0 1\n4 2 1 1 3\n",
            "2 2 1 1\n",
            "2 2 1 1 5\n",
            "2 2 2 1 3\n",
            "2 1 0 x\n",
            "",
        ] {
            assert!(
                matches!(
                    DirectionNumbers::parse(bad),
                    Err(Error::DirectionFile { .. })
                ),
                "{bad:?}"
            );
        }
        assert!(DirectionNumbers::load(Path::new("/nonexistent/dirs.txt")).is_err());
    }

    #[test]
    fn net_config_replicates() {
        let cfg = NetConfig {
            m: 4,
            precision: 32,
            dim: 3,
            generator: Generator::Sobol,
            scramble: ScrambleKind::RandomLinear,
            seed: 5,
        };
        let g = cfg.generators(None).unwrap();
        let a = cfg.replicate(&g, 3).unwrap();
        assert_eq!(a, cfg.replicate(&g, 3).unwrap());
        assert_ne!(a, cfg.replicate(&g, 4).unwrap());
        assert_eq!((a.len(), a.dim()), (16, 3));
        let bad = NetConfig {
            generator: Generator::Identity,
            ..cfg
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn to_unit_stays_below_one() {
        assert!(to_unit(u64::MAX, 64) < 1.0);
        assert_eq!(to_unit(1 << 63, 64), 0.5);
        assert_eq!(to_unit(3, 2), 0.75);
    }

    proptest! {
        #[test]
        fn prefixes_form_a_net(m in 1u32..9, extra in 0u32..20, seed: u64, sobol_dim in 0usize..8) {
            let e = m + extra;
            let c = if sobol_dim == 0 {
                generator_identity(m).unwrap()
            } else {
                generator_sobol(sobol_dim + 1, m).unwrap().pop().unwrap()
            };
            let mut rng = derive_replicate_rng(seed, 0);
            let s = random_linear_scramble(m, e, &mut rng).unwrap();
            let d = random_digital_shift(e, &mut rng).unwrap();
            let p = generate_points(&c, &s, &d).unwrap();
            let mut seen = vec![false; 1 << m];
            for i in 0..p.len() {
                let prefix = (p.value(i, 0) >> (e - m)) as usize;
                prop_assert!(!seen[prefix]);
                seen[prefix] = true;
            }
        }

        #[test]
        fn precision_bound(m in 1u32..8, lo in 8u32..30, hi in 30u32..=64, seed: u64) {
            // f(x) = x e^x has Lipschitz constant 2e on [0,1]
            let f = |x: f64| x * x.exp();
            let lip = 2.0 * std::f64::consts::E;
            let c = generator_identity(m).unwrap();
            let mut rng = derive_replicate_rng(seed, 1);
            let s = random_linear_scramble(m, hi, &mut rng).unwrap();
            let d = random_digital_shift(hi, &mut rng).unwrap();
            let est = |s: &ScrambleMatrix, d: &DigitalShift| {
                let p = generate_points(&c, s, d).unwrap();
                (0..p.len()).map(|i| f(p.real(i, 0))).sum::<f64>() / p.len() as f64
            };
            let fine = est(&s, &d);
            let coarse = est(&s.truncate(lo).unwrap(), &d.truncate(lo).unwrap());
            prop_assert!((fine - coarse).abs() <= lip * 2f64.powi(-(lo as i32)) + 1e-15);
        }
    }
}
