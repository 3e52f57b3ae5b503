//! CSV and JSON file formats.
//!
//! Grid coordinates `m, n` are 1-based row and column indices; cluster ids `q` are 1-based
//! with 0 marking an uncovered cell. Angles are in degrees.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Clustering, GridSpec, TileFamily};
use crate::pattern::element::ElementTable;
use crate::pattern::field::PatternGrid;
use crate::pattern::mask::{linear_to_db, Mask};
use crate::pattern::scan::ScanMap;
use crate::pattern::weights::WeightSet;
use crate::rtam::SynthesisTrace;

fn csv_error(source: &str, e: csv::Error) -> Error {
    Error::format(source, e.to_string())
}

fn write_csv<W: Write>(out: W, source: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(|e| csv_error(source, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(source, e))?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv<R: Read, T: for<'de> Deserialize<'de>>(input: R, source: &str) -> Result<Vec<T>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input)
        .deserialize()
        .enumerate()
        .map(|(k, r)| r.map_err(|e| Error::format(source, format!("record {}: {e}", k + 1))))
        .collect()
}

/// Create `path` (and its parent directories) for buffered writing.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn source_name(path: &Path) -> String {
    path.display().to_string()
}

/// Locate a cell from 1-based coordinates.
fn cell_index(grid: &GridSpec, m: usize, n: usize, source: &str) -> Result<usize> {
    if m == 0 || n == 0 || m > grid.rows || n > grid.cols {
        return Err(Error::format(
            source,
            format!("cell ({m}, {n}) lies outside the {}x{} grid", grid.rows, grid.cols),
        ));
    }
    Ok(grid.index((m - 1, n - 1)))
}

#[derive(Debug, Deserialize)]
struct LabelRecord {
    m: usize,
    n: usize,
    q: u32,
}

/// Clustering vector as `m,n,q`, row-major.
pub fn write_labels<W: Write>(out: W, grid: &GridSpec, labels: &[u32]) -> Result<()> {
    let rows = labels.iter().enumerate().map(|(i, q)| {
        let (m, n) = grid.cell(i);
        vec![(m + 1).to_string(), (n + 1).to_string(), q.to_string()]
    });
    write_csv(out, "clustering", &["m", "n", "q"], rows)
}

pub fn write_clustering<W: Write>(out: W, clustering: &Clustering) -> Result<()> {
    write_labels(out, clustering.grid(), clustering.labels())
}

/// Read a clustering vector; every cell must appear exactly once. Missing rows are an error,
/// gaps must be written explicitly as `q = 0`.
pub fn read_labels<R: Read>(input: R, grid: &GridSpec, source: &str) -> Result<Vec<u32>> {
    let records: Vec<LabelRecord> = read_csv(input, source)?;
    let mut labels = vec![None; grid.len()];
    for r in records {
        let i = cell_index(grid, r.m, r.n, source)?;
        if labels[i].replace(r.q).is_some() {
            return Err(Error::format(source, format!("cell ({}, {}) listed twice", r.m, r.n)));
        }
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(i, q)| {
            q.ok_or_else(|| {
                let (m, n) = grid.cell(i);
                Error::format(source, format!("cell ({}, {}) missing", m + 1, n + 1))
            })
        })
        .collect()
}

pub fn read_clustering<R: Read>(input: R, grid: &GridSpec, family: TileFamily, source: &str) -> Result<Clustering> {
    let labels = read_labels(input, grid, source)?;
    Clustering::from_labels(*grid, family, &labels)
}

pub fn load_clustering(path: &Path, grid: &GridSpec, family: TileFamily) -> Result<Clustering> {
    read_clustering(File::open(path)?, grid, family, &source_name(path))
}

pub fn save_clustering(path: &Path, clustering: &Clustering) -> Result<()> {
    write_clustering(create(path)?, clustering)
}

#[derive(Debug, Deserialize)]
struct ExcitationRecord {
    m: usize,
    n: usize,
    amplitude: f64,
    phase_deg: String,
}

/// Exact decimal degree strings for radian phases.
///
/// Reading converts the decimal text to radians with correct rounding; writing emits the
/// shortest text that reads back to the same radians, so excitation files round-trip exactly.
mod angle {
    use num_bigint::{BigInt, Sign};
    use num_traits::{Signed, ToPrimitive, Zero};

    const PI_DIGITS: &str = "314159265358979323846264338327950288419716939937510582097494459";

    /// `pi = PI_NUM / 10^(len - 1)`.
    fn pi() -> (BigInt, u32) {
        (PI_DIGITS.parse().expect("digits"), PI_DIGITS.len() as u32 - 1)
    }

    /// Exact value of a decimal literal as `mantissa * 10^exp`.
    fn parse_decimal(text: &str) -> Option<(BigInt, i64)> {
        let text = text.trim();
        let (body, exp) = match text.find(['e', 'E']) {
            Some(k) => (&text[..k], text[k + 1..].parse::<i64>().ok()?),
            None => (text, 0),
        };
        let (neg, body) = match body.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, body.strip_prefix('+').unwrap_or(body)),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let mut m: BigInt = format!("0{int}{frac}").parse().ok()?;
        if neg {
            m = -m;
        }
        Some((m, exp - frac.len() as i64))
    }

    fn pow10(k: u64) -> BigInt {
        num_traits::pow(BigInt::from(10), k as usize)
    }

    /// Nearest f64 to `num / den` (`den > 0`).
    fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
        if num.is_zero() {
            return 0.0;
        }
        let neg = num.sign() == Sign::Minus;
        let n = num.abs();
        // choose k with 2^63 <= n * 2^k / den < 2^64
        let mut k = 64 - (n.bits() as i64 - den.bits() as i64);
        let quotient = |k: i64| -> (BigInt, BigInt) {
            let (a, b) = if k >= 0 { (&n << k as usize, den.clone()) } else { (n.clone(), den << (-k) as usize) };
            (&a / &b, &a % &b)
        };
        let (mut q, mut r) = quotient(k);
        while q.bits() > 64 {
            k -= 1;
            (q, r) = quotient(k);
        }
        while q.bits() < 64 {
            k += 1;
            (q, r) = quotient(k);
        }
        let mut q = q.to_u64().expect("64-bit quotient");
        if !r.is_zero() {
            q |= 1;
        }
        let v = q as f64 * 2f64.powi(-(k as i32));
        if neg {
            -v
        } else {
            v
        }
    }

    /// Radians of a decimal degree literal, correctly rounded.
    pub fn parse_degrees(text: &str) -> Option<f64> {
        let (m, e) = parse_decimal(text)?;
        let (pn, pd) = pi();
        let mut num = m * pn;
        let mut den = BigInt::from(180) * pow10(u64::from(pd));
        if e >= 0 {
            num *= pow10(e as u64);
        } else {
            den *= pow10((-e) as u64);
        }
        Some(ratio_to_f64(&num, &den))
    }

    /// Shortest decimal degree literal that parses back to exactly `rad`.
    pub fn format_degrees(rad: f64) -> String {
        let direct = rad.to_degrees();
        let (mut lo, mut hi) = (direct, direct);
        for _ in 0..8 {
            for d in [lo, hi] {
                let text = d.to_string();
                if parse_degrees(&text) == Some(rad) {
                    return text;
                }
            }
            lo = lo.next_down();
            hi = hi.next_up();
        }
        // rad = mant * 2^exp exactly; degrees = rad * 180 / pi to 25 significant digits
        let bits = rad.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let (pn, pd) = pi();
        let mut num = BigInt::from(mant) * 180 * pow10(u64::from(pd));
        let mut den = pn;
        if exp >= 0 {
            num <<= exp as usize;
        } else {
            den <<= (-exp) as usize;
        }
        let scale = 25u64.saturating_sub((direct.abs().log10().floor() as i64 + 1).max(0) as u64);
        let half: BigInt = &den / BigInt::from(2);
        let scaled: BigInt = (num * pow10(scale) + half) / den;
        let digits = scaled.to_string();
        let digits = format!("{digits:0>width$}", width = scale as usize + 1);
        let (int, frac) = digits.split_at(digits.len() - scale as usize);
        let frac = frac.trim_end_matches('0');
        let sign = if rad < 0.0 { "-" } else { "" };
        let text = if frac.is_empty() { format!("{sign}{int}") } else { format!("{sign}{int}.{frac}") };
        text
    }

}

/// Per-element excitations as `m,n,amplitude,phase_deg`.
pub fn write_excitations<W: Write>(out: W, weights: &WeightSet) -> Result<()> {
    let grid = weights.grid();
    let rows = (0..grid.len()).map(|i| {
        let (m, n) = grid.cell(i);
        vec![
            (m + 1).to_string(),
            (n + 1).to_string(),
            weights.amplitudes()[i].to_string(),
            angle::format_degrees(weights.phases()[i]),
        ]
    });
    write_csv(out, "excitations", &["m", "n", "amplitude", "phase_deg"], rows)
}

/// Effective element excitations `a exp(j phase)` written in the same layout.
pub fn write_complex_excitations<W: Write>(out: W, grid: &GridSpec, weights: &[Complex64]) -> Result<()> {
    let rows = weights.iter().enumerate().map(|(i, w)| {
        let (m, n) = grid.cell(i);
        vec![(m + 1).to_string(), (n + 1).to_string(), w.norm().to_string(), w.arg().to_degrees().to_string()]
    });
    write_csv(out, "excitations", &["m", "n", "amplitude", "phase_deg"], rows)
}

pub fn read_excitations<R: Read>(input: R, grid: &GridSpec, source: &str) -> Result<WeightSet> {
    let records: Vec<ExcitationRecord> = read_csv(input, source)?;
    let mut values = vec![None; grid.len()];
    for r in records {
        let i = cell_index(grid, r.m, r.n, source)?;
        let phase = angle::parse_degrees(&r.phase_deg)
            .ok_or_else(|| Error::format(source, format!("element ({}, {}): bad phase `{}`", r.m, r.n, r.phase_deg)))?;
        if values[i].replace((r.amplitude, phase)).is_some() {
            return Err(Error::format(source, format!("element ({}, {}) listed twice", r.m, r.n)));
        }
    }
    let mut amplitudes = Vec::with_capacity(grid.len());
    let mut phases = Vec::with_capacity(grid.len());
    for (i, v) in values.into_iter().enumerate() {
        let (a, p) = v.ok_or_else(|| {
            let (m, n) = grid.cell(i);
            Error::format(source, format!("element ({}, {}) missing", m + 1, n + 1))
        })?;
        amplitudes.push(a);
        phases.push(p);
    }
    WeightSet::new(*grid, amplitudes, phases).map_err(|e| Error::format(source, e.to_string()))
}

pub fn load_excitations(path: &Path, grid: &GridSpec) -> Result<WeightSet> {
    read_excitations(File::open(path)?, grid, &source_name(path))
}

#[derive(Debug, Deserialize)]
struct ElementRecord {
    theta_deg: f64,
    phi_deg: f64,
    magnitude: f64,
    #[serde(default)]
    phase_deg: Option<f64>,
}

/// Element pattern samples `theta_deg,phi_deg,magnitude[,phase_deg]` on a full regular grid.
pub fn read_element_table<R: Read>(input: R, source: &str) -> Result<ElementTable> {
    let records: Vec<ElementRecord> = read_csv(input, source)?;
    let key = |x: f64| x.to_bits();
    let thetas: BTreeSet<u64> = records.iter().map(|r| key(r.theta_deg)).collect();
    let phis: BTreeSet<u64> = records.iter().map(|r| key(r.phi_deg)).collect();
    let mut theta: Vec<f64> = thetas.into_iter().map(f64::from_bits).collect();
    let mut phi: Vec<f64> = phis.into_iter().map(f64::from_bits).collect();
    theta.sort_by(f64::total_cmp);
    phi.sort_by(f64::total_cmp);
    let mut values = vec![None; theta.len() * phi.len()];
    for r in &records {
        let it = theta.iter().position(|&t| t == r.theta_deg).expect("collected above");
        let ip = phi.iter().position(|&p| p == r.phi_deg).expect("collected above");
        let v = Complex64::from_polar(r.magnitude, r.phase_deg.unwrap_or(0.0).to_radians());
        if values[it * phi.len() + ip].replace(v).is_some() {
            return Err(Error::format(source, format!("sample ({}, {}) listed twice", r.theta_deg, r.phi_deg)));
        }
    }
    let values = values
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::format(source, "element samples do not fill a regular theta x phi grid"))?;
    ElementTable::new(theta, phi, values).map_err(|e| Error::format(source, e.to_string()))
}

pub fn load_element_table(path: &Path) -> Result<ElementTable> {
    read_element_table(File::open(path)?, &source_name(path))
}

pub fn load_mask(path: &Path) -> Result<Mask> {
    let text = std::fs::read_to_string(path)?;
    Mask::from_json_str(&text).map_err(|e| match e {
        Error::Config { path: key, message } => Error::Config {
            path: format!("{}:{key}", path.display()),
            message,
        },
        other => other,
    })
}

/// Visible samples as `u,v,P_db`.
pub fn write_pattern<W: Write>(out: W, pattern: &PatternGrid) -> Result<()> {
    let rows = pattern
        .visible()
        .map(|(u, v, p)| vec![u.to_string(), v.to_string(), linear_to_db(p).to_string()]);
    write_csv(out, "pattern", &["u", "v", "P_db"], rows)
}

/// Principal cut as `axis,P_db`, where `axis` is `u` or `v`.
pub fn write_cut<W: Write>(out: W, axis: &str, cut: &[(f64, f64)]) -> Result<()> {
    let rows = cut.iter().map(|(x, p)| vec![x.to_string(), linear_to_db(*p).to_string()]);
    write_csv(out, "cut", &[axis, "P_db"], rows)
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::format("json", e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct TraceEntry {
    h: usize,
    #[serde(rename = "Q")]
    q: usize,
    /// Tile count per order, keyed by order.
    q_r: std::collections::BTreeMap<u32, usize>,
    gamma: f64,
    /// 1-based id of the tile split to reach the next iteration.
    split_tile: Option<usize>,
    delta_trm: f64,
}

#[derive(Debug, Serialize)]
struct InitialEntry {
    order: u32,
    tilings: Option<String>,
    candidates_evaluated: usize,
    search: crate::rtam::InitialSearch,
    gamma: f64,
}

#[derive(Debug, Serialize)]
struct TraceFile {
    initial: InitialEntry,
    stop: crate::rtam::StopReason,
    convergence_iteration: usize,
    iterations: Vec<TraceEntry>,
}

pub fn write_trace<W: Write>(out: W, trace: &SynthesisTrace) -> Result<()> {
    let file = TraceFile {
        initial: InitialEntry {
            order: trace.initial.order,
            tilings: trace.initial.tilings.map(|t| t.to_string()),
            candidates_evaluated: trace.initial.candidates_evaluated,
            search: trace.initial.search,
            gamma: trace.initial.gamma,
        },
        stop: trace.stop,
        convergence_iteration: trace.convergence_iteration(),
        iterations: trace
            .iterations
            .iter()
            .map(|it| TraceEntry {
                h: it.h,
                q: it.q(),
                q_r: it.order_histogram(),
                gamma: it.gamma,
                split_tile: it.split_tile.map(|q| q + 1),
                delta_trm: it.delta_trm(),
            })
            .collect(),
    };
    write_json(out, &file)
}

/// `(Q, Gamma)` of every iteration.
pub fn write_pareto<W: Write>(out: W, trace: &SynthesisTrace) -> Result<()> {
    let rows = trace.iterations.iter().map(|it| vec![it.q().to_string(), it.gamma.to_string()]);
    write_csv(out, "pareto", &["Q", "gamma"], rows)
}

/// Scan map as `theta_deg,phi_deg,sll_db`.
pub fn write_scan_map<W: Write>(out: W, map: &ScanMap) -> Result<()> {
    let rows = map.theta_deg.iter().enumerate().flat_map(|(it, t)| {
        map.phi_deg
            .iter()
            .enumerate()
            .map(move |(ip, p)| vec![t.to_string(), p.to_string(), map.get(it, ip).to_string()])
    });
    write_csv(out, "scan", &["theta_deg", "phi_deg", "sll_db"], rows)
}

/// Writes exact-cover solutions one per line as sorted, space-separated placement ids, and
/// stops accepting lines once `limit` bytes have been written.
pub struct SolutionDump<W: Write> {
    out: W,
    written: u64,
    limit: u64,
    full: bool,
}

impl<W: Write> SolutionDump<W> {
    pub fn new(out: W, limit: u64) -> Self {
        SolutionDump {
            out,
            written: 0,
            limit,
            full: false,
        }
    }

    /// Returns `false` once the size limit stops further output.
    pub fn push(&mut self, rows: &[usize]) -> Result<bool> {
        if self.full {
            return Ok(false);
        }
        let mut sorted = rows.to_vec();
        sorted.sort_unstable();
        let mut line = sorted.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        line.push('\n');
        if self.written + line.len() as u64 > self.limit {
            self.full = true;
            return Ok(false);
        }
        self.out.write_all(line.as_bytes())?;
        self.written += line.len() as u64;
        Ok(true)
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::weights::steering_phases;

    #[test]
    fn clustering_round_trip() {
        let grid = GridSpec::half_wave(2, 6).unwrap();
        let labels = [1, 2, 2, 3, 4, 4, 1, 1, 2, 3, 3, 4];
        let c = Clustering::from_labels(grid, TileFamily::LTromino, &labels).unwrap();
        let mut buf = Vec::new();
        write_clustering(&mut buf, &c).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("m,n,q\n1,1,1\n1,2,2\n"));
        let back = read_clustering(buf.as_slice(), &grid, TileFamily::LTromino, "mem").unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn clustering_errors_name_the_cell() {
        let grid = GridSpec::half_wave(1, 2).unwrap();
        let err = read_labels("m,n,q\n1,1,1\n".as_bytes(), &grid, "f.csv").unwrap_err();
        assert!(err.to_string().contains("(1, 2) missing"), "{err}");
        let err = read_labels("m,n,q\n1,1,1\n1,3,1\n".as_bytes(), &grid, "f.csv").unwrap_err();
        assert!(err.to_string().contains("outside"));
        let err = read_labels("m,n,q\n1,1,x\n".as_bytes(), &grid, "f.csv").unwrap_err();
        assert!(err.to_string().contains("record 1"));
    }

    #[test]
    fn excitation_round_trip_is_exact() {
        let grid = GridSpec::half_wave(6, 7).unwrap();
        let amps: Vec<f64> = (0..42).map(|k| 0.1 + (k as f64 * 0.37).sin().abs()).collect();
        let phases = steering_phases(&grid, 0.31, -0.47).unwrap();
        let w = WeightSet::new(grid, amps, phases).unwrap();
        let mut buf = Vec::new();
        write_excitations(&mut buf, &w).unwrap();
        let back = read_excitations(buf.as_slice(), &grid, "mem").unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn element_table_from_csv() {
        let mut text = String::from("theta_deg,phi_deg,magnitude,phase_deg\n");
        for t in [0, 45, 90] {
            for p in [0, 90, 180, 270] {
                text.push_str(&format!("{t},{p},{},0\n", 1.0 - t as f64 / 180.0));
            }
        }
        let table = read_element_table(text.as_bytes(), "el").unwrap();
        assert_eq!(table.theta_deg(), &[0.0, 45.0, 90.0]);
        assert_eq!(table.phi_deg().len(), 4);
        let partial = "theta_deg,phi_deg,magnitude\n0,0,1\n90,0,1\n90,90,1\n";
        assert!(read_element_table(partial.as_bytes(), "el").is_err());
    }

    #[test]
    fn dump_respects_size_limit() {
        let mut dump = SolutionDump::new(Vec::new(), 12);
        assert!(dump.push(&[3, 1, 2]).unwrap());
        assert!(!dump.push(&[10, 20, 30]).unwrap());
        assert!(dump.is_full());
        assert_eq!(dump.finish().unwrap(), b"1 2 3\n");
    }
}
