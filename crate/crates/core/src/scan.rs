//! Grid sweeps over the `(tau, T)` plane and their CSV / JSON / PGM encodings.
//!
//! Grid nodes are laid out row-major: row `j` is the `j`-th value of `T`,
//! column `i` the `i`-th value of `tau`. Output never depends on how many
//! worker threads evaluated the grid.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::pathspace::{enumerate_virtual_paths, MeasurementSchedule};
use crate::tolerance::Tolerances;
use crate::witness::{witness_report_with, Regime, WitnessReport};

pub const CSV_HEADER: &str = "tau,T,delta_P,delta_p,delta_L,p1,p2,p3,p4,regime,lgi_violated";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WitnessKind {
    #[serde(rename = "delta_P")]
    DeltaProb,
    #[serde(rename = "delta_p")]
    DeltaQuasi,
    #[serde(rename = "delta_L")]
    DeltaLgi,
    #[serde(rename = "regime")]
    Regime,
}

impl WitnessKind {
    pub const ALL: [WitnessKind; 4] = [
        WitnessKind::DeltaProb,
        WitnessKind::DeltaQuasi,
        WitnessKind::DeltaLgi,
        WitnessKind::Regime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WitnessKind::DeltaProb => "delta_P",
            WitnessKind::DeltaQuasi => "delta_p",
            WitnessKind::DeltaLgi => "delta_L",
            WitnessKind::Regime => "regime",
        }
    }

    pub fn value(self, r: &WitnessReport) -> f64 {
        match self {
            WitnessKind::DeltaProb => r.delta_prob,
            WitnessKind::DeltaQuasi => r.quasi.delta_p,
            WitnessKind::DeltaLgi => r.delta_lgi,
            WitnessKind::Regime => r.regime.level(),
        }
    }
}

impl FromStr for WitnessKind {
    type Err = Error;

    // Case matters: delta_P and delta_p are different witnesses.
    fn from_str(s: &str) -> Result<Self> {
        WitnessKind::ALL
            .into_iter()
            .find(|w| w.name() == s.trim())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown witness '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Pgm,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "pgm" => Ok(OutputFormat::Pgm),
            other => Err(Error::InvalidConfig(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridScanConfig {
    pub tau_range: (f64, f64),
    #[serde(rename = "T_range")]
    pub t_range: (f64, f64),
    /// `(n_tau, n_T)`
    pub resolution: (usize, usize),
    /// Only evaluate nodes with `tau <= T`.
    pub constrain: bool,
    pub witnesses: Vec<WitnessKind>,
    pub format: OutputFormat,
    pub tolerances: Tolerances,
}

impl Default for GridScanConfig {
    fn default() -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        Self {
            tau_range: (0.0, two_pi),
            t_range: (0.0, two_pi),
            resolution: (512, 512),
            constrain: true,
            witnesses: WitnessKind::ALL.to_vec(),
            format: OutputFormat::Csv,
            tolerances: Tolerances::default(),
        }
    }
}

impl GridScanConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("tau", self.tau_range), ("T", self.t_range)] {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidRange(format!("{name} range is not finite")));
            }
            if lo >= hi {
                return Err(Error::InvalidRange(format!(
                    "{name} range needs lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        let (n_tau, n_t) = self.resolution;
        if n_tau < 2 || n_t < 2 {
            return Err(Error::InvalidRange(format!(
                "resolution must be at least 2 per axis, got {n_tau}x{n_t}"
            )));
        }
        if self.witnesses.is_empty() {
            return Err(Error::InvalidConfig("no witnesses selected".into()));
        }
        let t = self.tolerances;
        if [t.construction, t.equality, t.zero]
            .iter()
            .any(|x| !x.is_finite() || *x <= 0.0)
        {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn tau_at(&self, i: usize) -> f64 {
        axis_value(self.tau_range, self.resolution.0, i)
    }

    pub fn t_at(&self, j: usize) -> f64 {
        axis_value(self.t_range, self.resolution.1, j)
    }

    pub fn point_count(&self) -> usize {
        self.resolution.0 * self.resolution.1
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "tau" => self.tau_range = parse_range(value)?,
            "T" => self.t_range = parse_range(value)?,
            "grid" => self.resolution = parse_grid(value)?,
            "constraint" => self.constrain = parse_bool(value)?,
            "witnesses" | "witness" => {
                self.witnesses = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "format" => self.format = value.parse()?,
            "tol" | "tol.zero" => self.tolerances.zero = parse_float(value)?,
            "tol.construction" => self.tolerances.construction = parse_float(value)?,
            "tol.equality" => self.tolerances.equality = parse_float(value)?,
            other => return Err(Error::InvalidConfig(format!("unknown key '{other}'"))),
        }
        Ok(())
    }
}

fn axis_value((lo, hi): (f64, f64), n: usize, i: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

/// Contents of a `key = value` configuration file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigFile {
    pub config: GridScanConfig,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl ConfigFile {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut file = ConfigFile::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let located = |e: Error| Error::InvalidConfig(format!("line {}: {e}", lineno + 1));
            match key {
                "out" => file.out = Some(PathBuf::from(value)),
                "jobs" => {
                    file.jobs = Some(value.parse().map_err(|_| {
                        located(Error::InvalidConfig(format!("bad jobs value '{value}'")))
                    })?)
                }
                _ => file.config.set(key, value).map_err(located)?,
            }
        }
        Ok(file)
    }
}

/// Parses a real number or a multiple of pi: `1.5`, `pi`, `-pi/4`, `3pi/2`, `2*pi`, `1/3`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let bad = || Error::InvalidConfig(format!("cannot parse '{text}' as a number"));
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let s = s.replace('π', "pi").to_ascii_lowercase();
    let (numerator, denominator) = match s.split_once('/') {
        Some((n, d)) => (n.to_string(), Some(d.to_string())),
        None => (s.clone(), None),
    };
    let num = match numerator.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let k = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            k * std::f64::consts::PI
        }
        None => numerator.parse::<f64>().map_err(|_| bad())?,
    };
    let value = match denominator {
        Some(d) => num / d.parse::<f64>().map_err(|_| bad())?,
        None => num,
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

fn parse_float(text: &str) -> Result<f64> {
    parse_angle(text)
}

pub fn parse_range(text: &str) -> Result<(f64, f64)> {
    let (lo, hi) = text
        .split_once(',')
        .ok_or_else(|| Error::InvalidConfig(format!("expected 'lo,hi', got '{text}'")))?;
    Ok((parse_angle(lo)?, parse_angle(hi)?))
}

pub fn parse_grid(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidConfig(format!("expected 'N' or 'NxM', got '{text}'"));
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    match text.split_once(['x', 'X', ',']) {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => {
            let n = parse(text)?;
            Ok((n, n))
        }
    }
}

fn parse_bool(text: &str) -> Result<bool> {
    match text.trim().to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(Error::InvalidConfig(format!(
            "expected a boolean, got '{other}'"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub row: usize,
    pub col: usize,
    pub tau: f64,
    pub t_final: f64,
    /// `None` for nodes excluded by the `tau <= T` constraint.
    pub report: Option<WitnessReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub evaluated: usize,
    pub skipped: usize,
    /// Fraction of evaluated points with `|delta_P| > tol`.
    pub signalling_fraction: f64,
    /// Fraction with `delta_p > tol`.
    pub negativity_fraction: f64,
    /// Fraction with `delta_L < -tol`.
    pub lgi_violation_fraction: f64,
    pub quantum_stochastic_fraction: f64,
    pub classical_stochastic_fraction: f64,
    pub classical_deterministic_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridScanResult {
    pub config: GridScanConfig,
    pub points: Vec<GridPoint>,
    pub summary: ScanSummary,
}

/// Evaluates every grid node on the current rayon pool.
pub fn scan_grid(config: &GridScanConfig) -> Result<GridScanResult> {
    config.validate()?;
    let (n_tau, _) = config.resolution;
    let points = (0..config.point_count())
        .into_par_iter()
        .map(|idx| {
            let (row, col) = (idx / n_tau, idx % n_tau);
            let (tau, t_final) = (config.tau_at(col), config.t_at(row));
            let report = if config.constrain && tau > t_final {
                None
            } else {
                Some(witness_report_with(tau, t_final, &config.tolerances)?)
            };
            Ok(GridPoint {
                row,
                col,
                tau,
                t_final,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&points, config.tolerances.zero);
    Ok(GridScanResult {
        config: config.clone(),
        points,
        summary,
    })
}

/// [`scan_grid`] on a dedicated pool of `jobs` threads (0 = rayon's default).
pub fn scan_grid_with_jobs(config: &GridScanConfig, jobs: usize) -> Result<GridScanResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    pool.install(|| scan_grid(config))
}

fn summarize(points: &[GridPoint], tol: f64) -> ScanSummary {
    let reports: Vec<&WitnessReport> = points.iter().filter_map(|p| p.report.as_ref()).collect();
    let evaluated = reports.len();
    let fraction = |pred: &dyn Fn(&WitnessReport) -> bool| {
        if evaluated == 0 {
            0.0
        } else {
            reports.iter().filter(|r| pred(r)).count() as f64 / evaluated as f64
        }
    };
    ScanSummary {
        evaluated,
        skipped: points.len() - evaluated,
        signalling_fraction: fraction(&|r| r.delta_prob.abs() > tol),
        negativity_fraction: fraction(&|r| r.quasi.delta_p > tol),
        lgi_violation_fraction: fraction(&|r| r.delta_lgi < -tol),
        quantum_stochastic_fraction: fraction(&|r| r.regime == Regime::QuantumStochastic),
        classical_stochastic_fraction: fraction(&|r| r.regime == Regime::ClassicalStochastic),
        classical_deterministic_fraction: fraction(&|r| r.regime == Regime::ClassicalDeterministic),
    }
}

/// 17 significant digits, enough to round-trip any f64.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(result: &GridScanResult, mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    let mut line = String::with_capacity(256);
    for p in &result.points {
        line.clear();
        let _ = write!(line, "{},{}", fmt17(p.tau), fmt17(p.t_final));
        match &p.report {
            Some(r) => {
                for x in [r.delta_prob, r.quasi.delta_p, r.delta_lgi]
                    .iter()
                    .chain(&r.quasi.p)
                {
                    let _ = write!(line, ",{}", fmt17(*x));
                }
                let _ = write!(line, ",{},{}", r.regime.as_str(), r.lgi_violated);
            }
            None => line.push_str(",,,,,,,,,"),
        }
        writeln!(w, "{line}")?;
    }
    w.flush()
}

fn point_json(p: &GridPoint) -> Value {
    match &p.report {
        Some(r) => json!({
            "tau": p.tau,
            "T": p.t_final,
            "delta_P": r.delta_prob,
            "delta_p": r.quasi.delta_p,
            "delta_L": r.delta_lgi,
            "p1": r.quasi.p[0],
            "p2": r.quasi.p[1],
            "p3": r.quasi.p[2],
            "p4": r.quasi.p[3],
            "regime": r.regime.as_str(),
            "lgi_violated": r.lgi_violated,
        }),
        None => json!({
            "tau": p.tau,
            "T": p.t_final,
            "delta_P": null,
            "delta_p": null,
            "delta_L": null,
            "p1": null,
            "p2": null,
            "p3": null,
            "p4": null,
            "regime": null,
            "lgi_violated": null,
        }),
    }
}

/// A single JSON document: config echo, summary, then one object per point per line.
pub fn write_json<W: Write>(result: &GridScanResult, mut w: W) -> io::Result<()> {
    let config = serde_json::to_string(&result.config)?;
    let summary = serde_json::to_string(&result.summary)?;
    writeln!(
        w,
        "{{\"config\":{config},\n\"summary\":{summary},\n\"points\":["
    )?;
    let last = result.points.len().saturating_sub(1);
    for (i, p) in result.points.iter().enumerate() {
        let sep = if i == last { "" } else { "," };
        writeln!(w, "{}{sep}", point_json(p))?;
    }
    writeln!(w, "]}}")?;
    w.flush()
}

/// An 8-bit greyscale map of one witness plus its scaling metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct PgmMap {
    pub width: usize,
    pub height: usize,
    /// Row-major, top row = largest `T`.
    pub pixels: Vec<u8>,
    pub sidecar: Value,
}

impl PgmMap {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Linear scaling between the witness minimum and maximum over evaluated
/// points; skipped points are black.
pub fn render_pgm(result: &GridScanResult, witness: WitnessKind) -> PgmMap {
    let (width, height) = result.config.resolution;
    let values: Vec<Option<f64>> = result
        .points
        .iter()
        .map(|p| p.report.as_ref().map(|r| witness.value(r)))
        .collect();
    let (min, max) = values
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = max - min;
    let mut pixels = vec![0u8; width * height];
    for (idx, v) in values.iter().enumerate() {
        let (row, col) = (idx / width, idx % width);
        let level = match v {
            Some(v) if span > 0.0 => (255.0 * (v - min) / span).round() as u8,
            _ => 0,
        };
        pixels[(height - 1 - row) * width + col] = level;
    }
    let bound = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
    let sidecar = json!({
        "witness": witness.name(),
        "width": width,
        "height": height,
        "min": bound(min),
        "max": bound(max),
        "scaling": "linear: pixel = round(255 * (value - min) / (max - min)); 0 when max == min",
        "null_pixel": 0,
        "columns": "tau ascending",
        "rows": "T descending (top row is the largest T)",
        "tau_range": [result.config.tau_range.0, result.config.tau_range.1],
        "T_range": [result.config.t_range.0, result.config.t_range.1],
        "constraint_tau_le_T": result.config.constrain,
        "regime_levels": if witness == WitnessKind::Regime {
            json!({"classical_deterministic": 0.0, "classical_stochastic": 1.0, "quantum_stochastic": 2.0})
        } else {
            Value::Null
        },
    });
    PgmMap {
        width,
        height,
        pixels,
        sidecar,
    }
}

/// Output files for PGM mode: the given path when one witness is selected,
/// otherwise `<stem>.<witness>.pgm` next to it. Sidecars use the `.json` extension.
pub fn pgm_paths(out: &Path, witnesses: &[WitnessKind]) -> Vec<(WitnessKind, PathBuf, PathBuf)> {
    witnesses
        .iter()
        .map(|&w| {
            let image = if witnesses.len() == 1 {
                out.to_path_buf()
            } else {
                let stem = out
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "map".into());
                out.with_file_name(format!("{stem}.{}.pgm", w.name()))
            };
            let sidecar = image.with_extension("json");
            (w, image, sidecar)
        })
        .collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::OutputWriteFailure {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `result` in the configured format. `None` means stdout (CSV / JSON only).
pub fn write_result(result: &GridScanResult, out: Option<&Path>) -> Result<Vec<PathBuf>> {
    let mut buf = Vec::new();
    let encode_err = |source| Error::OutputWriteFailure {
        path: out.map(Path::to_path_buf).unwrap_or_else(|| "-".into()),
        source,
    };
    match result.config.format {
        OutputFormat::Csv => write_csv(result, &mut buf).map_err(encode_err)?,
        OutputFormat::Json => write_json(result, &mut buf).map_err(encode_err)?,
        OutputFormat::Pgm => {
            let out = out.ok_or_else(|| {
                Error::InvalidConfig("PGM output needs an output path (--out)".into())
            })?;
            let mut written = Vec::new();
            for (w, image, sidecar) in pgm_paths(out, &result.config.witnesses) {
                let map = render_pgm(result, w);
                write_file(&image, &map.encode())?;
                let text = serde_json::to_string_pretty(&map.sidecar)
                    .expect("sidecar is plain JSON")
                    + "\n";
                write_file(&sidecar, text.as_bytes())?;
                written.push(image);
                written.push(sidecar);
            }
            return Ok(written);
        }
    }
    match out {
        Some(path) => {
            write_file(path, &buf)?;
            Ok(vec![path.to_path_buf()])
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(&buf)
                .and_then(|_| stdout.flush())
                .map_err(encode_err)?;
            Ok(Vec::new())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealPathDump {
    pub slots: Vec<usize>,
    /// Eigenvalue labels, one per measured slot.
    pub outcomes: Vec<f64>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VirtualPathDump {
    /// Eigenvalue labels, one per slot.
    pub outcomes: Vec<f64>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleDump {
    pub tau: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub slot_times: Vec<f64>,
    pub measured_mask: Vec<bool>,
    pub total_probability: f64,
    pub real_paths: Vec<RealPathDump>,
    pub virtual_paths: Vec<VirtualPathDump>,
}

/// Parses a mask such as `101` (slots at 0, tau, T).
pub fn parse_mask(text: &str) -> Result<Vec<bool>> {
    let mask: Vec<bool> = text
        .trim()
        .chars()
        .map(|c| match c {
            '1' => Ok(true),
            '0' => Ok(false),
            _ => Err(Error::InvalidConfig(format!(
                "mask must be made of 0/1, got '{text}'"
            ))),
        })
        .collect::<Result<_>>()?;
    if mask.len() != 3 {
        return Err(Error::InvalidConfig(format!(
            "mask needs one digit per slot (3), got '{text}'"
        )));
    }
    Ok(mask)
}

/// Real and virtual paths of the three-time qubit protocol at one point.
///
/// Paths with probability (or amplitude modulus) at most `tol` are dropped
/// unless `include_zero` is set; with `|+>` prepared, every path starting
/// at -1 is such a path.
pub fn dump_ensemble(
    tau: f64,
    t_final: f64,
    measured_mask: &[bool],
    include_zero: bool,
    tol: f64,
) -> Result<EnsembleDump> {
    let schedule = MeasurementSchedule::three_time_qubit(tau, t_final)?;
    let virtual_paths = enumerate_virtual_paths(&schedule)?;
    let ensemble = Ensemble::from_virtual_paths(&schedule, &virtual_paths, measured_mask)?;
    let eigen: Vec<Vec<f64>> = schedule
        .slots()
        .iter()
        .map(|s| s.observable.eigenvalues())
        .collect();
    let slots = ensemble.measured_slots();
    let real_paths = ensemble
        .paths()
        .iter()
        .filter(|p| include_zero || p.probability > tol)
        .map(|p| RealPathDump {
            slots: slots.clone(),
            outcomes: ensemble.labels(p),
            probability: p.probability,
        })
        .collect();
    let virtual_paths = virtual_paths
        .iter()
        .filter(|v| include_zero || v.branch.norm_sqr().sqrt() > tol)
        .map(|v| {
            let a = v.amplitude.expect("qubit outcomes are nondegenerate");
            VirtualPathDump {
                outcomes: v
                    .outcomes
                    .iter()
                    .enumerate()
                    .map(|(k, &q)| eigen[k][q])
                    .collect(),
                re: a.re,
                im: a.im,
            }
        })
        .collect();
    Ok(EnsembleDump {
        tau,
        t_final,
        slot_times: schedule.slots().iter().map(|s| s.time).collect(),
        measured_mask: measured_mask.to_vec(),
        total_probability: ensemble.total_probability(),
        real_paths,
        virtual_paths,
    })
}

/// Human-readable regime report for one point.
pub fn classify_point(tau: f64, t_final: f64, tol: &Tolerances) -> Result<String> {
    let r = witness_report_with(tau, t_final, tol)?;
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    let mut s = String::new();
    let _ = writeln!(s, "tau = {tau}, T = {t_final}");
    let _ = writeln!(s, "regime: {}", r.regime);
    let _ = writeln!(s, "delta_P (Q3 = +1) = {:.12}", r.delta_prob);
    let _ = writeln!(
        s,
        "correlators: alpha = {:.12}, beta = {:.12}, gamma = {:.12}",
        r.correlators.alpha, r.correlators.beta, r.correlators.gamma
    );
    let _ = writeln!(
        s,
        "quasi-probabilities: p1 = {:.12}, p2 = {:.12}, p3 = {:.12}, p4 = {:.12}",
        r.quasi.p[0], r.quasi.p[1], r.quasi.p[2], r.quasi.p[3]
    );
    let _ = writeln!(s, "delta_p = {:.12}", r.quasi.delta_p);
    let _ = writeln!(s, "delta_L = {:.12}", r.delta_lgi);
    let _ = writeln!(s, "signalling detected: {}", yes_no(r.signalling_detected));
    let _ = writeln!(
        s,
        "negative quasi-probability: {}",
        yes_no(r.negativity_detected)
    );
    let _ = writeln!(
        s,
        "Leggett-Garg inequality violated: {}",
        yes_no(r.lgi_violated)
    );
    let _ = writeln!(
        s,
        "pre-existing path probabilities: {}",
        if r.preexistence.feasible {
            "consistent"
        } else {
            "inconsistent"
        }
    );
    Ok(s)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    use super::*;

    fn small(n: usize, lo: f64, hi: f64) -> GridScanConfig {
        GridScanConfig {
            tau_range: (lo, hi),
            t_range: (lo, hi),
            resolution: (n, n),
            ..GridScanConfig::default()
        }
    }

    #[test]
    fn triangle_counting() {
        let r = scan_grid(&small(3, 0.0, PI)).unwrap();
        assert_eq!(r.points.len(), 9);
        assert_eq!(r.summary.evaluated, 6);
        assert_eq!(r.summary.skipped, 3);
        assert!(r
            .points
            .iter()
            .all(|p| p.report.is_some() == (p.tau <= p.t_final)));
    }

    #[test]
    fn grid_node_carries_report_values() {
        let r = scan_grid(&small(4, 0.0, PI)).unwrap();
        let p = r
            .points
            .iter()
            .find(|p| {
                (p.tau - FRAC_PI_3).abs() < 1e-15 && (p.t_final - 2.0 * FRAC_PI_3).abs() < 1e-15
            })
            .expect("node present");
        assert!((p.report.unwrap().delta_lgi + 0.5).abs() < 1e-12);
    }

    #[test]
    fn axis_endpoints_are_exact() {
        let c = small(7, -1.0, 2.5);
        assert_eq!(c.tau_at(0), -1.0);
        assert_eq!(c.tau_at(6), 2.5);
    }

    #[test]
    fn invalid_ranges() {
        assert!(matches!(
            scan_grid(&small(3, 1.0, 1.0)),
            Err(Error::InvalidRange(_))
        ));
        assert!(matches!(
            scan_grid(&small(1, 0.0, 1.0)),
            Err(Error::InvalidRange(_))
        ));
        let mut c = small(3, 0.0, 1.0);
        c.t_range = (0.0, f64::INFINITY);
        assert!(matches!(scan_grid(&c), Err(Error::InvalidRange(_))));
    }

    #[test]
    fn csv_shape() {
        let r = scan_grid(&small(3, 0.0, PI)).unwrap();
        let mut buf = Vec::new();
        write_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 10);
        assert_eq!(text.matches("tau,T").count(), 1);
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 11);
        }
        // row 0 is T = 0: only tau = 0 is evaluated
        assert!(lines[2].ends_with(",,,,,,,,,"));
        assert!(lines[1].ends_with("classical_deterministic,false"));
    }

    #[test]
    fn csv_reals_round_trip() {
        let r = scan_grid(&small(5, 0.1, 3.0)).unwrap();
        let mut buf = Vec::new();
        write_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for (line, p) in text.lines().skip(1).zip(&r.points) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields[0].parse::<f64>().unwrap(), p.tau);
            if let Some(rep) = &p.report {
                assert_eq!(fields[2].parse::<f64>().unwrap(), rep.delta_prob);
                assert_eq!(fields[5].parse::<f64>().unwrap(), rep.quasi.p[0]);
            }
        }
    }

    #[test]
    fn json_is_parseable() {
        let r = scan_grid(&small(3, 0.0, PI)).unwrap();
        let mut buf = Vec::new();
        write_json(&r, &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        let points = v["points"].as_array().unwrap();
        assert_eq!(points.len(), 9);
        assert!(points[1]["delta_P"].is_null());
        assert_eq!(v["summary"]["evaluated"], 6);
        assert_eq!(v["config"]["resolution"], json!([3, 3]));
    }

    #[test]
    fn pgm_scaling_is_recorded() {
        let mut c = small(4, 0.0, PI);
        c.witnesses = vec![WitnessKind::DeltaLgi];
        let r = scan_grid(&c).unwrap();
        let map = render_pgm(&r, WitnessKind::DeltaLgi);
        let bytes = map.encode();
        assert!(bytes.starts_with(b"P5\n4 4\n255\n"));
        assert_eq!(bytes.len(), "P5\n4 4\n255\n".len() + 16);
        let min = map.sidecar["min"].as_f64().unwrap();
        let max = map.sidecar["max"].as_f64().unwrap();
        assert!(min < max);
        assert!(map.pixels.contains(&255));
        // bottom-left is (tau, T) = (0, 0), where delta_L = 4 is the maximum
        assert_eq!(map.pixels[3 * 4], 255);
        // top-right is (pi, pi): delta_L = 4 as well
        assert_eq!(map.pixels[3], 255);
        // bottom-right is tau > T: skipped
        assert_eq!(map.pixels[15], 0);
    }

    #[test]
    fn pgm_paths_for_several_witnesses() {
        let paths = pgm_paths(Path::new("/tmp/out/map.pgm"), &WitnessKind::ALL);
        assert_eq!(paths[0].1, Path::new("/tmp/out/map.delta_P.pgm"));
        assert_eq!(paths[0].2, Path::new("/tmp/out/map.delta_P.json"));
        let single = pgm_paths(Path::new("x.pgm"), &[WitnessKind::Regime]);
        assert_eq!(single[0].1, Path::new("x.pgm"));
        assert_eq!(single[0].2, Path::new("x.json"));
    }

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("pi/4").unwrap(), FRAC_PI_4);
        assert_eq!(parse_angle("-pi/2").unwrap(), -FRAC_PI_2);
        assert!((parse_angle("2pi/3").unwrap() - 2.0 * FRAC_PI_3).abs() < 1e-15);
        assert_eq!(parse_angle("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle(" 0.25 ").unwrap(), 0.25);
        assert_eq!(parse_angle("1e-9").unwrap(), 1e-9);
        assert!((parse_angle("π/3").unwrap() - FRAC_PI_3).abs() < 1e-15);
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("1/0").is_err());
    }

    #[test]
    fn config_file_parsing() {
        let text = "# sweep\ntau = 0, pi\nT = 0,2pi\ngrid = 64x32\nconstraint = off\n\
                    witnesses = delta_p,delta_L\nformat = pgm\ntol = 1e-8\nout = maps/x.pgm\njobs = 2\n";
        let f = ConfigFile::parse(text).unwrap();
        assert_eq!(f.config.tau_range, (0.0, PI));
        assert_eq!(f.config.t_range, (0.0, 2.0 * PI));
        assert_eq!(f.config.resolution, (64, 32));
        assert!(!f.config.constrain);
        assert_eq!(
            f.config.witnesses,
            vec![WitnessKind::DeltaQuasi, WitnessKind::DeltaLgi]
        );
        assert_eq!(f.config.format, OutputFormat::Pgm);
        assert_eq!(f.config.tolerances.zero, 1e-8);
        assert_eq!(f.out, Some(PathBuf::from("maps/x.pgm")));
        assert_eq!(f.jobs, Some(2));

        assert!(ConfigFile::parse("bogus = 1").is_err());
        assert!(ConfigFile::parse("grid").is_err());
        assert!(ConfigFile::parse("witnesses = delta_X").is_err());
    }

    #[test]
    fn dump_examples() {
        let d = dump_ensemble(FRAC_PI_4, FRAC_PI_2, &[true; 3], false, 1e-9).unwrap();
        assert_eq!(d.real_paths.len(), 4);
        assert!(d
            .real_paths
            .iter()
            .all(|p| (p.probability - 0.25).abs() < 1e-15));
        assert_eq!(d.virtual_paths.len(), 4);

        let d = dump_ensemble(1.0, 0.0, &[true, false, true], false, 1e-9).unwrap();
        assert_eq!(d.real_paths.len(), 1);
        assert!((d.real_paths[0].probability - 1.0).abs() < 1e-15);
        assert_eq!(d.real_paths[0].outcomes, vec![1.0, 1.0]);
        assert_eq!(d.real_paths[0].slots, vec![0, 2]);

        let all = dump_ensemble(FRAC_PI_4, FRAC_PI_2, &[true; 3], true, 1e-9).unwrap();
        assert_eq!(all.real_paths.len(), 8);
        assert_eq!(all.virtual_paths.len(), 8);
    }

    #[test]
    fn mask_parsing() {
        assert_eq!(parse_mask("101").unwrap(), vec![true, false, true]);
        assert!(parse_mask("10").is_err());
        assert!(parse_mask("1a1").is_err());
        assert!(matches!(
            dump_ensemble(0.1, 0.2, &[false; 3], false, 1e-9),
            Err(Error::NoMeasuredSlots)
        ));
    }

    #[test]
    fn classify_point_text() {
        let t = Tolerances::default();
        assert!(classify_point(FRAC_PI_2, PI, &t)
            .unwrap()
            .contains("regime: classical deterministic"));
        assert!(classify_point(FRAC_PI_2, 3.0 * FRAC_PI_4, &t)
            .unwrap()
            .contains("regime: classical stochastic"));
        assert!(classify_point(FRAC_PI_4, FRAC_PI_2, &t)
            .unwrap()
            .contains("regime: quantum stochastic"));
    }
}
