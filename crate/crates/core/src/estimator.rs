//! RQMC means, median-of-`(2k-1)` combining, RMSE aggregation and rate fits.
//!
//! A "count" is the odd number `2k - 1` of replicates combined by one median;
//! the library stores `k`, the command line takes the count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::integrands::Integrand;
use crate::netgen::{DirectionNumbers, NetConfig, PointSet};

/// `(1/n) sum f(x_i)` with Neumaier-compensated summation.
pub fn estimate_mean(f: &Integrand, pts: &PointSet) -> Result<f64> {
    if f.dim() != pts.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: pts.dim(),
        });
    }
    let mut buf = vec![0.0; pts.dim()];
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in 0..pts.len() {
        pts.write_real(i, &mut buf);
        let v = f.eval(&buf);
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    Ok((sum + comp) / pts.len() as f64)
}

/// Middle order statistic of an odd-length list.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.len().is_multiple_of(2) {
        return Err(Error::EvenLength(values.len()));
    }
    let mut v = values.to_vec();
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    Ok(*m)
}

/// Replicates per median as a function of `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum KSchedule {
    Fixed {
        k: u32,
    },
    /// `k = max(1, ceil(c m))`.
    Linear {
        c: f64,
    },
}

impl KSchedule {
    pub fn k(&self, m: u32) -> u32 {
        match *self {
            KSchedule::Fixed { k } => k,
            KSchedule::Linear { c } => ((c * m as f64).ceil() as u32).max(1),
        }
    }

    pub fn count(&self, m: u32) -> u32 {
        2 * self.k(m) - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Net settings; the `m` field is overridden by each entry of `m_values`.
    pub net: NetConfig,
    pub integrand: String,
    pub schedule: KSchedule,
    /// Number of independent medians `R`.
    pub medians: u32,
    pub m_values: Vec<u32>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.medians == 0 {
            return Err(Error::Precondition("need at least one median".into()));
        }
        if let KSchedule::Fixed { k: 0 } = self.schedule {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        if let KSchedule::Linear { c } = self.schedule {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Precondition(format!(
                    "schedule slope {c} must be positive"
                )));
            }
        }
        if self.m_values.is_empty() {
            return Err(Error::Precondition("no m values".into()));
        }
        for &m in &self.m_values {
            self.net_at(m).validate()?;
        }
        Ok(())
    }

    pub fn net_at(&self, m: u32) -> NetConfig {
        NetConfig {
            m,
            ..self.net.clone()
        }
    }
}

/// Stream index of replicate `j` at size `m`; disjoint across `m`.
pub fn replicate_index(m: u32, j: u64) -> u64 {
    ((m as u64) << 40) | j
}

/// `R (2k-1)` independent estimates at size `m`, in replicate order.
pub fn run_replicates(
    cfg: &ExperimentConfig,
    f: &Integrand,
    m: u32,
    directions: Option<&DirectionNumbers>,
) -> Result<Vec<f64>> {
    let net = cfg.net_at(m);
    net.validate()?;
    if f.dim() != net.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: net.dim,
        });
    }
    let generators: Vec<BitMatrix> = net.generators(directions)?;
    let total = cfg.medians as u64 * cfg.schedule.count(m) as u64;
    (0..total)
        .into_par_iter()
        .map(|j| {
            let pts = net.replicate(&generators, replicate_index(m, j))?;
            estimate_mean(f, &pts)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MRecord {
    pub m: u32,
    pub n: u64,
    pub count: u32,
    pub medians: Vec<f64>,
    /// RMSE of the medians against the exact mean, or their standard deviation.
    pub rmse_median: f64,
    /// Same statistic over all raw estimates.
    pub rmse_plain: f64,
    /// `rmse_plain / sqrt(count)`, the error of a mean of `count` estimates.
    pub rmse_mean_proxy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Track {
    Median,
    Plain,
    MeanProxy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub integrand: String,
    pub exact_mean: Option<f64>,
    pub records: Vec<MRecord>,
}

fn rmse(values: &[f64], target: f64) -> f64 {
    (values.iter().map(|v| (v - target).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

fn stddev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Splits `raw` into blocks of `count`, takes block medians and summarizes.
pub fn aggregate(
    m: u32,
    count: u32,
    raw: &[f64],
    exact_mean: Option<f64>,
    keep_raw: bool,
) -> Result<MRecord> {
    if count.is_multiple_of(2) {
        return Err(Error::EvenLength(count as usize));
    }
    if raw.is_empty() || !raw.len().is_multiple_of(count as usize) {
        return Err(Error::Precondition(format!(
            "{} estimates do not split into blocks of {count}",
            raw.len()
        )));
    }
    let medians = raw
        .chunks(count as usize)
        .map(median)
        .collect::<Result<Vec<_>>>()?;
    let spread = |v: &[f64]| match exact_mean {
        Some(mu) => rmse(v, mu),
        None => stddev(v),
    };
    let rmse_median = spread(&medians);
    let rmse_plain = spread(raw);
    Ok(MRecord {
        m,
        n: 1u64 << m,
        count,
        rmse_median,
        rmse_plain,
        rmse_mean_proxy: rmse_plain / (count as f64).sqrt(),
        medians,
        raw: keep_raw.then(|| raw.to_vec()),
    })
}

/// Every `m` of the configuration, run and aggregated in order.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    f: &Integrand,
    directions: Option<&DirectionNumbers>,
    keep_raw: bool,
) -> Result<EstimateReport> {
    cfg.validate()?;
    let records = cfg
        .m_values
        .iter()
        .map(|&m| {
            let raw = run_replicates(cfg, f, m, directions)?;
            aggregate(m, cfg.schedule.count(m), &raw, f.exact_mean(), keep_raw)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimateReport {
        integrand: f.name().to_string(),
        exact_mean: f.exact_mean(),
        records,
    })
}

impl EstimateReport {
    pub fn track(&self, track: Track) -> Vec<(u32, f64)> {
        self.records
            .iter()
            .map(|r| {
                let v = match track {
                    Track::Median => r.rmse_median,
                    Track::Plain => r.rmse_plain,
                    Track::MeanProxy => r.rmse_mean_proxy,
                };
                (r.m, v)
            })
            .collect()
    }

    pub fn record(&self, m: u32) -> Option<&MRecord> {
        self.records.iter().find(|r| r.m == m)
    }

    /// Quadratic fit of `log2(rmse)` over records with `m >= m_min`.
    pub fn fit_rate(&self, track: Track, m_min: u32) -> Result<RateFit> {
        let (ms, vs) = self.window(track, m_min);
        fit_rate(&ms, &vs)
    }

    /// Linear fit of `log2(rmse)` over records with `m >= m_min`.
    pub fn fit_slope(&self, track: Track, m_min: u32) -> Result<LineFit> {
        let (ms, vs) = self.window(track, m_min);
        fit_slope(&ms, &vs)
    }

    fn window(&self, track: Track, m_min: u32) -> (Vec<f64>, Vec<f64>) {
        self.track(track)
            .into_iter()
            .filter(|&(m, _)| m >= m_min)
            .map(|(m, v)| (m as f64, v))
            .unzip()
    }
}

/// Default lower end of the fitting window.
pub const DEFAULT_WARMUP: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub intercept: f64,
    pub slope: f64,
    pub quad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
}

fn usable(ms: &[f64], rmse: &[f64], needed: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, y): (Vec<f64>, Vec<f64>) = ms
        .iter()
        .zip(rmse)
        .filter(|(_, &v)| v > 0.0 && v.is_finite())
        .map(|(&m, &v)| (m, v.log2()))
        .unzip();
    let mut distinct = x.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < needed {
        return Err(Error::DegenerateFit {
            needed,
            got: distinct.len(),
        });
    }
    Ok((x, y))
}

// least squares on centered m for conditioning
fn least_squares(x: &[f64], y: &[f64], degree: usize) -> Vec<f64> {
    let c = x.iter().sum::<f64>() / x.len() as f64;
    let n = degree + 1;
    let mut ata = vec![vec![0.0; n]; n];
    let mut atb = vec![0.0; n];
    for (&xi, &yi) in x.iter().zip(y) {
        let t = xi - c;
        let powers: Vec<f64> = (0..n).map(|p| t.powi(p as i32)).collect();
        for i in 0..n {
            atb[i] += powers[i] * yi;
            for j in 0..n {
                ata[i][j] += powers[i] * powers[j];
            }
        }
    }
    for i in 0..n {
        let p = (i..n)
            .max_by(|&a, &b| ata[a][i].abs().total_cmp(&ata[b][i].abs()))
            .unwrap();
        ata.swap(i, p);
        atb.swap(i, p);
        for r in i + 1..n {
            let f = ata[r][i] / ata[i][i];
            let (top, bottom) = ata.split_at_mut(r);
            for (x, &y) in bottom[0][i..].iter_mut().zip(&top[i][i..]) {
                *x -= f * y;
            }
            atb[r] -= f * atb[i];
        }
    }
    let mut b = vec![0.0; n];
    for i in (0..n).rev() {
        b[i] = (atb[i] - (i + 1..n).map(|col| ata[i][col] * b[col]).sum::<f64>()) / ata[i][i];
    }
    // expand sum b_p (m - c)^p back into powers of m
    let mut out = vec![0.0; n];
    for (p, &bp) in b.iter().enumerate() {
        let mut binom = 1.0;
        for (j, o) in out.iter_mut().enumerate().take(p + 1) {
            *o += bp * binom * (-c).powi((p - j) as i32);
            binom = binom * (p - j) as f64 / (j + 1) as f64;
        }
    }
    out
}

/// `log2(rmse) = a + slope m + quad m^2` by least squares; needs 4 distinct `m`.
pub fn fit_rate(ms: &[f64], rmse: &[f64]) -> Result<RateFit> {
    let (x, y) = usable(ms, rmse, 4)?;
    let b = least_squares(&x, &y, 2);
    Ok(RateFit {
        intercept: b[0],
        slope: b[1],
        quad: b[2],
    })
}

/// `log2(rmse) = a + slope m` by least squares; needs 2 distinct `m`.
pub fn fit_slope(ms: &[f64], rmse: &[f64]) -> Result<LineFit> {
    let (x, y) = usable(ms, rmse, 2)?;
    let b = least_squares(&x, &y, 1);
    Ok(LineFit {
        intercept: b[0],
        slope: b[1],
    })
}
