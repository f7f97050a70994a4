//! The `rqmc` command line: convergence experiments, invariant checks and dumps.
//!
//! Exit codes: 0 success, 1 failed check or runtime error, 2 usage error.

pub mod checks;
pub mod manifest;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{run_experiment, EstimateReport, ExperimentConfig, KSchedule, Track};
use crate::integrands::lookup;
use crate::netgen::{DirectionNumbers, Generator, NetConfig, ScrambleKind, MAX_PRECISION};
use crate::partitions::build_table;

pub use checks::Check;
pub use manifest::RunManifest;
pub use svg::{emit_svg, render_svg, Series};

/// Environment variable naming a Joe–Kuo direction-number file.
pub const DIRECTIONS_ENV: &str = "RQMC_DIRECTIONS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "rqmc",
    version,
    about = "Median-of-RQMC convergence experiments and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// RMSE of medians and of single estimates over a range of m; writes CSV, SVG and a manifest.
    Converge(ConvergeArgs),
    /// Run an invariant suite and print one PASS/FAIL line per check.
    Verify {
        #[command(subcommand)]
        target: VerifyTarget,
    },
    /// Fraction of random scrambles with a small XOR-zero index set.
    Mindep(MindepArgs),
    /// Distinct-partition counts q(N) and their running totals as CSV.
    PartitionsDump {
        #[arg(long, default_value_t = 100)]
        n_max: usize,
    },
    /// Points of one randomized net as CSV.
    PointsDump(PointsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorArg {
    Identity,
    Sobol,
}

impl From<GeneratorArg> for Generator {
    fn from(g: GeneratorArg) -> Self {
        match g {
            GeneratorArg::Identity => Generator::Identity,
            GeneratorArg::Sobol => Generator::Sobol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScrambleArg {
    RandomLinear,
    Asm,
    Identity,
}

impl From<ScrambleArg> for ScrambleKind {
    fn from(s: ScrambleArg) -> Self {
        match s {
            ScrambleArg::RandomLinear => ScrambleKind::RandomLinear,
            ScrambleArg::Asm => ScrambleKind::Asm,
            ScrambleArg::Identity => ScrambleKind::Identity,
        }
    }
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    /// Replay the configuration stored in a manifest; other experiment flags are ignored.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value = "smooth1d")]
    integrand: String,
    #[arg(long, default_value_t = 0)]
    m_min: u32,
    #[arg(long, default_value_t = 15)]
    m_max: u32,
    /// Precision E of scramble and shift, 1..=64.
    #[arg(long, default_value_t = 64)]
    bits: u32,
    /// Number of medians R per m.
    #[arg(long, default_value_t = 250)]
    replicates: u32,
    /// Estimates per median; must be odd.
    #[arg(long, default_value_t = 11)]
    median_count: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Defaults to identity in one dimension and Sobol' otherwise.
    #[arg(long, value_enum)]
    generator: Option<GeneratorArg>,
    #[arg(long, value_enum, default_value = "random-linear")]
    scramble: ScrambleArg,
    #[arg(long, env = DIRECTIONS_ENV)]
    directions: Option<PathBuf>,
    /// CSV path; the SVG and manifest are written beside it.
    #[arg(long, default_value = "converge.csv")]
    out: PathBuf,
    #[arg(long)]
    no_svg: bool,
}

/// Fully resolved `converge` settings, as stored in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergeConfig {
    pub integrand: String,
    pub m_min: u32,
    pub m_max: u32,
    pub bits: u32,
    pub replicates: u32,
    pub median_count: u32,
    pub seed: u64,
    pub generator: GeneratorArg,
    pub scramble: ScrambleArg,
    pub directions: Option<PathBuf>,
}

impl ConvergeConfig {
    pub fn validate(&self) -> Result<()> {
        let f = lookup(&self.integrand)?;
        if self.median_count == 0 || self.median_count.is_multiple_of(2) {
            return Err(Error::Precondition(format!(
                "--median-count {} must be odd",
                self.median_count
            )));
        }
        if self.m_min > self.m_max {
            return Err(Error::Precondition("--m-min exceeds --m-max".into()));
        }
        if self.bits == 0 || self.bits > MAX_PRECISION || self.bits < self.m_max {
            return Err(Error::Precondition(format!(
                "--bits {} must lie in {}..={MAX_PRECISION}",
                self.bits,
                self.m_max.max(1)
            )));
        }
        if self.replicates == 0 {
            return Err(Error::Precondition("--replicates must be positive".into()));
        }
        if self.generator == GeneratorArg::Identity && f.dim() > 1 {
            return Err(Error::Precondition(format!(
                "{} is {}-dimensional; use --generator sobol",
                f.name(),
                f.dim()
            )));
        }
        self.experiment()?.validate()
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let f = lookup(&self.integrand)?;
        Ok(ExperimentConfig {
            net: NetConfig {
                m: self.m_min,
                precision: self.bits,
                dim: f.dim(),
                generator: self.generator.into(),
                scramble: self.scramble.into(),
                seed: self.seed,
            },
            integrand: self.integrand.clone(),
            schedule: KSchedule::Fixed {
                k: self.median_count.div_ceil(2),
            },
            medians: self.replicates,
            m_values: (self.m_min..=self.m_max).collect(),
        })
    }
}

#[derive(Debug, Subcommand)]
enum VerifyTarget {
    /// Error decomposition against the direct error for random polynomials.
    Decomposition {
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        m: Vec<u32>,
        #[arg(long, default_value_t = 20)]
        configs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Vanishing, size bound and recursion of the monomial Walsh coefficients.
    Chi {
        #[arg(long, default_value_t = 4)]
        r_vanish: u32,
        #[arg(long, default_value_t = 64)]
        k_vanish: u64,
        #[arg(long, default_value_t = 6)]
        r_bound: u32,
        #[arg(long, default_value_t = 256)]
        k_bound: u64,
        #[arg(long, default_value_t = 20)]
        c_max: u32,
    },
    /// Partition counts against the concentration bound and q(N) against its closed-form bound.
    Partitions {
        #[arg(long, default_value_t = 50)]
        m_max: u32,
        #[arg(long, default_value_t = 2000)]
        n_max: usize,
    },
    /// Fraction of scrambles with a small dependent set, against 0.4/sqrt(m).
    Concentration {
        #[arg(long, value_delimiter = ',', default_value = "8,10,12")]
        m: Vec<u32>,
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Pairwise independence of the shift signs S_L.
    Independence {
        #[arg(long, default_value_t = 50)]
        pairs: usize,
        #[arg(long, default_value_t = 12)]
        max_element: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct MindepArgs {
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Defaults to floor(lambda m^2).
    #[arg(long)]
    threshold: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Search the ASM matrix instead of random scrambles.
    #[arg(long)]
    asm: bool,
}

#[derive(Debug, Args)]
struct PointsArgs {
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 64)]
    bits: u32,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, value_enum)]
    generator: Option<GeneratorArg>,
    #[arg(long, value_enum, default_value = "random-linear")]
    scramble: ScrambleArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Replicate index within the seed's streams.
    #[arg(long, default_value_t = 0)]
    replicate: u64,
    #[arg(long, env = DIRECTIONS_ENV)]
    directions: Option<PathBuf>,
    /// Print the E-bit integers instead of reals.
    #[arg(long)]
    raw: bool,
}

fn default_generator(dim: usize) -> GeneratorArg {
    if dim > 1 {
        GeneratorArg::Sobol
    } else {
        GeneratorArg::Identity
    }
}

fn load_directions(path: Option<&Path>) -> Result<Option<DirectionNumbers>> {
    path.map(DirectionNumbers::load).transpose()
}

/// Floats with 17 significant digits.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_string(report: &EstimateReport) -> String {
    let mut s = String::from("m,n,rmse_median,rmse_plain,rmse_mean_proxy\n");
    for r in &report.records {
        s += &format!(
            "{},{},{},{},{}\n",
            r.m,
            r.n,
            fmt_float(r.rmse_median),
            fmt_float(r.rmse_plain),
            fmt_float(r.rmse_mean_proxy)
        );
    }
    s
}

/// Median and plain curves, with `n^(-3/2)` references through the plain
/// value at the smallest `m` and `sqrt(count)` below it.
pub fn convergence_series(
    report: &EstimateReport,
    count: u32,
) -> Result<(Vec<Series>, Vec<Series>)> {
    let first = report.records.first().ok_or(Error::EmptySeries)?;
    let xy = |t: Track| -> Vec<(f64, f64)> {
        report
            .track(t)
            .into_iter()
            .map(|(m, v)| (m as f64, v))
            .collect()
    };
    let series = vec![
        Series::new(format!("median of {count}"), xy(Track::Median)).open(),
        Series::new("single estimate", xy(Track::Plain)).dashed(),
    ];
    let anchor = (first.m as f64, first.rmse_plain);
    let line = |scale: f64| -> Vec<(f64, f64)> {
        report
            .records
            .iter()
            .map(|r| {
                (
                    r.m as f64,
                    scale * anchor.1 * (-1.5 * (r.m as f64 - anchor.0)).exp2(),
                )
            })
            .collect()
    };
    let refs = vec![
        Series::new("n^-3/2", line(1.0)),
        Series::new(
            format!("n^-3/2 / sqrt({count})"),
            line(1.0 / (count as f64).sqrt()),
        ),
    ];
    Ok((series, refs))
}

/// Runs `cfg`, writing the CSV to `out`, the SVG beside it unless `svg` is
/// false, and the manifest last.
pub fn run_converge(
    cfg: &ConvergeConfig,
    out: &Path,
    svg: bool,
) -> Result<(EstimateReport, RunManifest)> {
    cfg.validate()?;
    let start = Instant::now();
    let f = lookup(&cfg.integrand)?;
    let dirs = load_directions(cfg.directions.as_deref())?;
    let report = run_experiment(&cfg.experiment()?, &f, dirs.as_ref(), false)?;

    let mut manifest = RunManifest::new(
        "converge",
        serde_json::to_value(cfg).map_err(|e| Error::Precondition(e.to_string()))?,
        cfg.seed,
    );
    std::fs::write(out, csv_string(&report))?;
    manifest.outputs.push(out.to_path_buf());
    if svg {
        let (series, refs) = convergence_series(&report, cfg.median_count)?;
        let path = out.with_extension("svg");
        let title = format!("{}, E = {}, R = {}", f.name(), cfg.bits, cfg.replicates);
        emit_svg(&series, &refs, &title, &path)?;
        manifest.outputs.push(path);
    }
    manifest.wall_clock_secs = start.elapsed().as_secs_f64();
    manifest.write(&manifest::manifest_path(out))?;
    Ok((report, manifest))
}

fn converge(args: ConvergeArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = match &args.manifest {
        Some(path) => {
            let m = RunManifest::read(path)?;
            if m.subcommand != "converge" {
                return Err(Error::Precondition(format!(
                    "{} records a `{}` run",
                    path.display(),
                    m.subcommand
                )));
            }
            serde_json::from_value(m.config).map_err(|e| Error::Precondition(e.to_string()))?
        }
        None => {
            let dim = lookup(&args.integrand)?.dim();
            ConvergeConfig {
                generator: args.generator.unwrap_or_else(|| default_generator(dim)),
                integrand: args.integrand,
                m_min: args.m_min,
                m_max: args.m_max,
                bits: args.bits,
                replicates: args.replicates,
                median_count: args.median_count,
                seed: args.seed,
                scramble: args.scramble,
                directions: args.directions,
            }
        }
    };
    let (report, manifest) = run_converge(&cfg, &args.out, !args.no_svg)?;
    write!(out, "{}", csv_string(&report))?;
    for p in &manifest.outputs {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(EXIT_OK)
}

fn report_checks(list: &[Check], out: &mut dyn Write) -> Result<i32> {
    for c in list {
        writeln!(out, "{c}")?;
    }
    Ok(if list.iter().all(|c| c.passed) {
        EXIT_OK
    } else {
        EXIT_FAIL
    })
}

fn verify(target: VerifyTarget, out: &mut dyn Write) -> Result<i32> {
    let list = match target {
        VerifyTarget::Decomposition {
            degree,
            m,
            configs,
            seed,
        } => checks::decomposition_checks(degree, &m, configs, seed)?,
        VerifyTarget::Chi {
            r_vanish,
            k_vanish,
            r_bound,
            k_bound,
            c_max,
        } => checks::chi_checks(r_vanish, k_vanish, r_bound, k_bound, c_max)?,
        VerifyTarget::Partitions { m_max, n_max } => checks::partition_checks(m_max, n_max)?,
        VerifyTarget::Concentration { m, trials, seed } => {
            checks::concentration_checks(&m, trials, seed)?
        }
        VerifyTarget::Independence {
            pairs,
            max_element,
            seed,
        } => checks::independence_checks(pairs, max_element, seed)?,
    };
    report_checks(&list, out)
}

fn mindep(a: MindepArgs, out: &mut dyn Write) -> Result<i32> {
    let r = checks::mindep(a.m, a.trials, a.threshold, a.seed, a.asm)?;
    if let Some(n) = r.asm_min_norm {
        writeln!(
            out,
            "asm m = {}: smallest dependent norm {n}, threshold {}, {}",
            r.m,
            r.threshold,
            if n <= r.threshold {
                "at or below"
            } else {
                "above"
            }
        )?;
        return Ok(EXIT_OK);
    }
    if a.asm {
        writeln!(
            out,
            "asm m = {}: no dependent set with norm <= {}",
            r.m, r.rows
        )?;
        return Ok(EXIT_OK);
    }
    writeln!(
        out,
        "m = {}, trials = {}, threshold = {}: fraction {} ({} hits); bound 0.4/sqrt(m) = {:.6}, with 3 sigma {:.6}",
        r.m, r.trials, r.threshold, r.fraction, r.hits, r.bound, r.slack_bound
    )?;
    Ok(if r.within_slack() { EXIT_OK } else { EXIT_FAIL })
}

fn partitions_dump(n_max: usize, out: &mut dyn Write) -> Result<i32> {
    let t = build_table(n_max);
    writeln!(out, "N,q,cumulative")?;
    for n in 0..=n_max {
        writeln!(out, "{n},{},{}", t.q(n), t.cumulative(n))?;
    }
    Ok(EXIT_OK)
}

fn points_dump(a: PointsArgs, out: &mut dyn Write) -> Result<i32> {
    let net = NetConfig {
        m: a.m,
        precision: a.bits,
        dim: a.dim,
        generator: a
            .generator
            .unwrap_or_else(|| default_generator(a.dim))
            .into(),
        scramble: a.scramble.into(),
        seed: a.seed,
    };
    let dirs = load_directions(a.directions.as_deref())?;
    let pts = net.replicate(&net.generators(dirs.as_ref())?, a.replicate)?;
    let header: Vec<String> = (1..=a.dim).map(|c| format!("x{c}")).collect();
    writeln!(out, "i,{}", header.join(","))?;
    for i in 0..pts.len() {
        let row: Vec<String> = (0..a.dim)
            .map(|c| {
                if a.raw {
                    pts.value(i, c).to_string()
                } else {
                    fmt_float(pts.real(i, c))
                }
            })
            .collect();
        writeln!(out, "{i},{}", row.join(","))?;
    }
    Ok(EXIT_OK)
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Converge(a) => converge(a, out),
        Command::Verify { target } => verify(target, out),
        Command::Mindep(a) => mindep(a, out),
        Command::PartitionsDump { n_max } => partitions_dump(n_max, out),
        Command::PointsDump(a) => points_dump(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Io(_) | Error::DirectionFile { .. } => EXIT_FAIL,
                _ => EXIT_USAGE,
            }
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let mut full = vec!["rqmc"];
        full.extend_from_slice(args);
        let code = run_with(full, &mut o, &mut e);
        (
            code,
            String::from_utf8(o).unwrap(),
            String::from_utf8(e).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(call(&[]).0, EXIT_USAGE);
        assert_eq!(call(&["verify", "nonsense"]).0, EXIT_USAGE);
        assert_eq!(
            call(&["converge", "--median-count", "4", "--no-svg"]).0,
            EXIT_USAGE
        );
        assert_eq!(
            call(&["converge", "--bits", "8", "--m-max", "9"]).0,
            EXIT_USAGE
        );
        let (code, _, err) = call(&[
            "converge",
            "--integrand",
            "otl6d",
            "--generator",
            "identity",
        ]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("sobol"), "{err}");
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn converge_const_is_zero() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("c.csv");
        let (code, stdout, err) = call(&[
            "converge",
            "--integrand",
            "const",
            "--m-max",
            "4",
            "--replicates",
            "3",
            "--median-count",
            "3",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        let csv = std::fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "m,n,rmse_median,rmse_plain,rmse_mean_proxy");
        assert_eq!(lines.len(), 6);
        for l in &lines[1..] {
            let cells: Vec<&str> = l.split(',').collect();
            assert_eq!(&cells[2..], &["0.0000000000000000e0"; 3]);
        }
        assert!(stdout.contains("wrote"));
        assert!(out.with_extension("svg").exists());
        let man = RunManifest::read(&manifest::manifest_path(&out)).unwrap();
        assert_eq!(man.subcommand, "converge");
        assert_eq!(man.outputs.len(), 2);
    }

    #[test]
    fn manifest_replay_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let (code, _, err) = call(&[
            "converge",
            "--m-max",
            "6",
            "--replicates",
            "5",
            "--median-count",
            "3",
            "--seed",
            "11",
            "--out",
            a.to_str().unwrap(),
            "--no-svg",
        ]);
        assert_eq!(code, 0, "{err}");
        let man = manifest::manifest_path(&a);
        let (code, _, err) = call(&[
            "converge",
            "--manifest",
            man.to_str().unwrap(),
            "--out",
            b.to_str().unwrap(),
            "--no-svg",
        ]);
        assert_eq!(code, 0, "{err}");
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn csv_floats_have_17_digits() {
        let rep = EstimateReport {
            integrand: "x".into(),
            exact_mean: None,
            records: vec![
                crate::estimator::aggregate(2, 1, &[0.1, 0.3, 0.2], Some(0.0), false).unwrap(),
            ],
        };
        let csv = csv_string(&rep);
        let cell = csv.lines().nth(1).unwrap().split(',').nth(3).unwrap();
        let mantissa = cell.split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), 17, "{cell}");
        assert_eq!(cell.parse::<f64>().unwrap(), rep.records[0].rmse_plain);
    }

    #[test]
    fn verify_and_mindep_outputs() {
        let (code, out, _) = call(&["verify", "independence", "--pairs", "5"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("PASS"));
        let (code, out, _) = call(&["verify", "partitions", "--m-max", "50"]);
        assert_eq!(code, 0, "{out}");
        assert_eq!(out.lines().count(), 2);
        let (code, out, _) = call(&["mindep", "--m", "10", "--trials", "100", "--threshold", "0"]);
        assert_eq!(code, 0);
        assert!(out.contains("fraction 0 "), "{out}");
        let (code, out, _) = call(&["mindep", "--m", "5", "--asm"]);
        assert_eq!(code, 0);
        assert!(out.contains("smallest dependent norm 11"), "{out}");
    }

    #[test]
    fn dumps() {
        let (code, out, _) = call(&["partitions-dump", "--n-max", "6"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().nth(7).unwrap(), "6,4,13");
        let (code, out, _) = call(&[
            "points-dump",
            "--m",
            "2",
            "--bits",
            "2",
            "--scramble",
            "identity",
            "--raw",
        ]);
        assert_eq!(code, 0);
        // zero scramble bits below the diagonal but a random shift: still one point per quarter
        let mut vals: Vec<u64> = out
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        vals.sort();
        assert_eq!(vals, vec![0, 1, 2, 3]);
        let (code, out, _) = call(&["points-dump", "--m", "3", "--dim", "3"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().next().unwrap(), "i,x1,x2,x3");
        assert_eq!(out.lines().count(), 9);
    }
}
