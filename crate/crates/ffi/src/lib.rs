//! C ABI for `rqmc`.
//!
//! Every fallible call returns an [`RqmcStatus`] and writes results through
//! out-pointers. On failure, [`rqmc_last_error`] describes the most recent
//! error on the calling thread. Point sets and partition tables are opaque
//! handles released with their `_free` functions.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rqmc::cli::checks::mindep;
use rqmc::estimator::{estimate_mean, run_experiment, ExperimentConfig, KSchedule};
use rqmc::integrands::lookup;
use rqmc::netgen::{Generator, NetConfig, PointSet, ScrambleKind};
use rqmc::partitions::{check_lemma_combinatorics, PartitionTable};
use rqmc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RqmcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Guard = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RqmcGenerator {
    Identity = 0,
    Sobol = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RqmcScramble {
    RandomLinear = 0,
    Asm = 1,
    Identity = 2,
}

/// Net settings shared by point generation and experiments.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RqmcNetConfig {
    pub m: u32,
    pub precision: u32,
    pub dim: u32,
    pub generator: RqmcGenerator,
    pub scramble: RqmcScramble,
    pub seed: u64,
}

/// RMSE summary for one `m`, as written by [`rqmc_experiment`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RqmcRecord {
    pub m: u32,
    pub rmse_median: f64,
    pub rmse_plain: f64,
    pub rmse_mean_proxy: f64,
}

pub struct RqmcPointSet(PointSet);

pub struct RqmcPartitionTable(PartitionTable);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RqmcStatus {
    match e {
        Error::IndexOutOfRange { .. } => RqmcStatus::OutOfRange,
        Error::Guard(_) => RqmcStatus::Guard,
        Error::Io(_) | Error::DirectionFile { .. } => RqmcStatus::Io,
        _ => RqmcStatus::InvalidArgument,
    }
}

fn fail(status: RqmcStatus, msg: &str) -> RqmcStatus {
    set_error(msg);
    status
}

// runs `f`, turning errors and panics into status codes
fn guard<F: FnOnce() -> Result<(), RqmcStatus>>(f: F) -> RqmcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RqmcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(RqmcStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: rqmc::Result<T>) -> Result<T, RqmcStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

fn nonnull<T>(p: *const T, what: &str) -> Result<(), RqmcStatus> {
    if p.is_null() {
        Err(fail(RqmcStatus::NullPointer, &format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, RqmcStatus> {
    nonnull(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(RqmcStatus::InvalidArgument, &format!("{what} is not UTF-8")))
}

impl From<RqmcNetConfig> for NetConfig {
    fn from(c: RqmcNetConfig) -> Self {
        NetConfig {
            m: c.m,
            precision: c.precision,
            dim: c.dim as usize,
            generator: match c.generator {
                RqmcGenerator::Identity => Generator::Identity,
                RqmcGenerator::Sobol => Generator::Sobol,
            },
            scramble: match c.scramble {
                RqmcScramble::RandomLinear => ScrambleKind::RandomLinear,
                RqmcScramble::Asm => ScrambleKind::Asm,
                RqmcScramble::Identity => ScrambleKind::Identity,
            },
            seed: c.seed,
        }
    }
}

/// Message for the last failed call on this thread; empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rqmc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rqmc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Points of replicate `replicate` for `config`, using the embedded Sobol' directions.
#[no_mangle]
pub unsafe extern "C" fn rqmc_pointset_new(
    config: *const RqmcNetConfig,
    replicate: u64,
    out: *mut *mut RqmcPointSet,
) -> RqmcStatus {
    guard(|| {
        nonnull(config, "config")?;
        nonnull(out, "out")?;
        let net: NetConfig = (*config).into();
        let gens = lift(net.generators(None))?;
        let pts = lift(net.replicate(&gens, replicate))?;
        *out = Box::into_raw(Box::new(RqmcPointSet(pts)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rqmc_pointset_free(handle: *mut RqmcPointSet) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of points, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rqmc_pointset_len(handle: *const RqmcPointSet) -> u64 {
    handle.as_ref().map_or(0, |h| h.0.len() as u64)
}

/// Dimension, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rqmc_pointset_dim(handle: *const RqmcPointSet) -> u32 {
    handle.as_ref().map_or(0, |h| h.0.dim() as u32)
}

/// Coordinate `coord` of point `index` as a real in `[0, 1)`.
#[no_mangle]
pub unsafe extern "C" fn rqmc_pointset_get(
    handle: *const RqmcPointSet,
    index: u64,
    coord: u32,
    out: *mut f64,
) -> RqmcStatus {
    guard(|| {
        nonnull(handle, "handle")?;
        nonnull(out, "out")?;
        let p = &(*handle).0;
        if index >= p.len() as u64 || coord as usize >= p.dim() {
            return Err(fail(
                RqmcStatus::OutOfRange,
                &format!("point ({index}, {coord}) outside {} x {}", p.len(), p.dim()),
            ));
        }
        *out = p.real(index as usize, coord as usize);
        Ok(())
    })
}

/// Copies all points row-major into `buf`, which must hold `len * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn rqmc_pointset_copy(
    handle: *const RqmcPointSet,
    buf: *mut f64,
    capacity: u64,
) -> RqmcStatus {
    guard(|| {
        nonnull(handle, "handle")?;
        nonnull(buf, "buf")?;
        let p = &(*handle).0;
        let need = (p.len() * p.dim()) as u64;
        if capacity < need {
            return Err(fail(
                RqmcStatus::BufferTooSmall,
                &format!("need {need} doubles"),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need as usize);
        for (i, row) in dst.chunks_mut(p.dim()).enumerate() {
            p.write_real(i, row);
        }
        Ok(())
    })
}

/// Equal-weight mean of integrand `key` (e.g. "smooth1d", "poly:1,2") over the points.
#[no_mangle]
pub unsafe extern "C" fn rqmc_estimate_mean(
    key: *const c_char,
    handle: *const RqmcPointSet,
    out: *mut f64,
) -> RqmcStatus {
    guard(|| {
        let key = read_str(key, "key")?;
        nonnull(handle, "handle")?;
        nonnull(out, "out")?;
        let f = lift(lookup(key))?;
        *out = lift(estimate_mean(&f, &(*handle).0))?;
        Ok(())
    })
}

/// Median-of-`count` experiment for `m` in `m_min..=m_max`; `config.m` is
/// ignored. Writes `m_max - m_min + 1` records to `records`.
#[no_mangle]
pub unsafe extern "C" fn rqmc_experiment(
    key: *const c_char,
    config: *const RqmcNetConfig,
    m_min: u32,
    m_max: u32,
    count: u32,
    medians: u32,
    records: *mut RqmcRecord,
    capacity: u64,
) -> RqmcStatus {
    guard(|| {
        let key = read_str(key, "key")?;
        nonnull(config, "config")?;
        nonnull(records, "records")?;
        if m_min > m_max {
            return Err(fail(RqmcStatus::InvalidArgument, "m_min exceeds m_max"));
        }
        if count.is_multiple_of(2) {
            return Err(fail(RqmcStatus::InvalidArgument, "count must be odd"));
        }
        let need = (m_max - m_min + 1) as u64;
        if capacity < need {
            return Err(fail(
                RqmcStatus::BufferTooSmall,
                &format!("need {need} records"),
            ));
        }
        let f = lift(lookup(key))?;
        let cfg = ExperimentConfig {
            net: (*config).into(),
            integrand: key.into(),
            schedule: KSchedule::Fixed {
                k: count.div_ceil(2),
            },
            medians,
            m_values: (m_min..=m_max).collect(),
        };
        let rep = lift(run_experiment(&cfg, &f, None, false))?;
        let dst = std::slice::from_raw_parts_mut(records, need as usize);
        for (d, r) in dst.iter_mut().zip(&rep.records) {
            *d = RqmcRecord {
                m: r.m,
                rmse_median: r.rmse_median,
                rmse_plain: r.rmse_plain,
                rmse_mean_proxy: r.rmse_mean_proxy,
            };
        }
        Ok(())
    })
}

/// Fraction of `trials` random scrambles with an XOR-zero row set of norm at
/// most `threshold`; a negative threshold means `floor(lambda m^2)`.
#[no_mangle]
pub unsafe extern "C" fn rqmc_mindep_fraction(
    m: u32,
    trials: u64,
    threshold: i64,
    seed: u64,
    out: *mut f64,
) -> RqmcStatus {
    guard(|| {
        nonnull(out, "out")?;
        let t = (threshold >= 0).then_some(threshold as u64);
        *out = lift(mindep(m, trials, t, seed, false))?.fraction;
        Ok(())
    })
}

/// Whether `|{L : ||L|| <= floor(lambda m^2)}| < 0.4 2^m / sqrt(m)`, decided exactly.
#[no_mangle]
pub unsafe extern "C" fn rqmc_partition_bound_holds(m: u32, out: *mut bool) -> RqmcStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = lift(check_lemma_combinatorics(m))?.holds;
        Ok(())
    })
}

/// Table of distinct-partition counts `q(N)` for `N <= max_n`.
#[no_mangle]
pub unsafe extern "C" fn rqmc_partition_table_new(
    max_n: u64,
    out: *mut *mut RqmcPartitionTable,
) -> RqmcStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = Box::into_raw(Box::new(RqmcPartitionTable(
            PartitionTable::build_pentagonal(max_n as usize),
        )));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rqmc_partition_table_free(handle: *mut RqmcPartitionTable) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// `q(n)` as an integer; `OutOfRange` if `n` exceeds the table or the value 64 bits.
#[no_mangle]
pub unsafe extern "C" fn rqmc_partition_table_q(
    handle: *const RqmcPartitionTable,
    n: u64,
    out: *mut u64,
) -> RqmcStatus {
    guard(|| {
        nonnull(handle, "handle")?;
        nonnull(out, "out")?;
        let t = &(*handle).0;
        if n as usize > t.max_n() {
            return Err(fail(
                RqmcStatus::OutOfRange,
                &format!("table covers N <= {}", t.max_n()),
            ));
        }
        *out = u64::try_from(t.q(n as usize))
            .map_err(|_| fail(RqmcStatus::OutOfRange, &format!("q({n}) exceeds 64 bits")))?;
        Ok(())
    })
}

/// `q(n)` in decimal, NUL-terminated, into `buf` of `capacity` bytes. `written`
/// receives the length without the NUL, also when the buffer is too small.
#[no_mangle]
pub unsafe extern "C" fn rqmc_partition_table_q_decimal(
    handle: *const RqmcPartitionTable,
    n: u64,
    buf: *mut c_char,
    capacity: u64,
    written: *mut u64,
) -> RqmcStatus {
    guard(|| {
        nonnull(handle, "handle")?;
        nonnull(buf, "buf")?;
        nonnull(written, "written")?;
        let t = &(*handle).0;
        if n as usize > t.max_n() {
            return Err(fail(
                RqmcStatus::OutOfRange,
                &format!("table covers N <= {}", t.max_n()),
            ));
        }
        let s = t.q(n as usize).to_string();
        *written = s.len() as u64;
        if capacity < s.len() as u64 + 1 {
            return Err(fail(
                RqmcStatus::BufferTooSmall,
                &format!("need {} bytes", s.len() + 1),
            ));
        }
        ptr::copy_nonoverlapping(s.as_ptr().cast::<c_char>(), buf, s.len());
        *buf.add(s.len()) = 0;
        Ok(())
    })
}
