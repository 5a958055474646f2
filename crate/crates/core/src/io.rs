//! Text formats: pole tables, time series CSV, plain CSV and run manifests.
//!
//! A table file is a `key = value` header, a `data` line, then one row
//! `Re(beta) Im(beta) Re(gamma) Im(gamma)` per pole:
//!
//! ```text
//! format_version = 1
//! kind = teleport
//! ell = 2
//! r1 = 10
//! r2 = inf
//! epsilon_achieved = 0e0
//! d = 2
//! precision_class = double
//! meta source = exact
//! data
//! -1.5000000000000000e-1 8.6602540378443860e-2 ...
//! ```
//!
//! Double tables carry 17 significant digits, extended ones 36, so reading
//! back reproduces the stored values exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::precision::{Dd, Precision};
use crate::table::{KernelKind, PoleTable};
use crate::teleport::TimeSeries;

pub const FORMAT_VERSION: u32 = 1;

fn fmt_radius(r: f64) -> String {
    if r.is_infinite() {
        "inf".into()
    } else {
        format!("{r:e}")
    }
}

fn parse_radius(s: &str) -> Option<f64> {
    match s {
        "inf" | "infinity" => Some(f64::INFINITY),
        _ => s.parse().ok(),
    }
}

fn fmt_dd(x: Dd, precision: Precision) -> String {
    match precision {
        Precision::Double => format!("{:.16e}", x.to_f64()),
        Precision::Extended => x.to_decimal_string(36),
    }
}

pub fn table_to_string(t: &PoleTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "format_version = {FORMAT_VERSION}");
    let _ = writeln!(s, "kind = {}", t.kind.as_str());
    let _ = writeln!(s, "ell = {}", t.ell);
    let _ = writeln!(s, "r1 = {}", fmt_radius(t.r1));
    let _ = writeln!(s, "r2 = {}", fmt_radius(t.r2));
    let _ = writeln!(s, "epsilon_achieved = {:e}", t.epsilon_achieved);
    let _ = writeln!(s, "d = {}", t.d());
    let _ = writeln!(s, "precision_class = {}", t.precision);
    for (k, v) in &t.metadata {
        let _ = writeln!(s, "meta {} = {}", k, v.replace('\n', " "));
    }
    s.push_str("data\n");
    for (b, g) in t.betas.iter().zip(&t.gammas) {
        let p = t.precision;
        let _ = writeln!(
            s,
            "{} {} {} {}",
            fmt_dd(b.re, p),
            fmt_dd(b.im, p),
            fmt_dd(g.re, p),
            fmt_dd(g.im, p)
        );
    }
    s
}

pub fn table_from_str(text: &str) -> Result<PoleTable> {
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut version = None;
    let mut kind = None;
    let mut ell = None;
    let mut r1 = None;
    let mut r2 = None;
    let mut eps = None;
    let mut d = None;
    let mut precision = None;
    let mut metadata = Vec::new();
    let mut header_end = 0;
    for (line, l) in lines.by_ref() {
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if l == "data" {
            header_end = line;
            break;
        }
        let (key, value) = l
            .split_once('=')
            .ok_or_else(|| perr(line, format!("expected `key = value`, got `{l}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| perr(line, format!("bad {what} `{value}`"));
        if let Some(k) = key.strip_prefix("meta ") {
            metadata.push((k.trim().to_string(), value.to_string()));
            continue;
        }
        match key {
            "format_version" => version = Some(value.parse::<u32>().map_err(|_| bad("version"))?),
            "kind" => kind = Some(KernelKind::from_str(value).map_err(|m| perr(line, m))?),
            "ell" => ell = Some(value.parse::<usize>().map_err(|_| bad("ell"))?),
            "r1" => r1 = Some(parse_radius(value).ok_or_else(|| bad("r1"))?),
            "r2" => r2 = Some(parse_radius(value).ok_or_else(|| bad("r2"))?),
            "epsilon_achieved" => eps = Some(value.parse::<f64>().map_err(|_| bad("epsilon"))?),
            "d" => d = Some(value.parse::<usize>().map_err(|_| bad("d"))?),
            "precision_class" => {
                precision = Some(Precision::from_str(value).map_err(|m| perr(line, m))?)
            }
            other => return Err(perr(line, format!("unknown header key `{other}`"))),
        }
    }
    if header_end == 0 {
        return Err(perr(text.lines().count(), "missing `data` line".into()));
    }
    let need = |name: &str| perr(header_end, format!("header lacks `{name}`"));
    let version = version.ok_or_else(|| need("format_version"))?;
    if version != FORMAT_VERSION {
        return Err(perr(
            header_end,
            format!("unsupported format_version {version}"),
        ));
    }
    let kind = kind.ok_or_else(|| need("kind"))?;
    let ell = ell.ok_or_else(|| need("ell"))?;
    let r1 = r1.ok_or_else(|| need("r1"))?;
    let r2 = r2.ok_or_else(|| need("r2"))?;
    let d = d.ok_or_else(|| need("d"))?;
    let precision = precision.ok_or_else(|| need("precision_class"))?;
    let mut t = PoleTable::new(kind, ell, r1, r2);
    t.epsilon_achieved = eps.ok_or_else(|| need("epsilon_achieved"))?;
    t.precision = precision;
    t.metadata = metadata;
    let mut last = header_end;
    for (line, l) in lines {
        last = line;
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 4 {
            return Err(perr(line, format!("expected 4 fields, found {}", f.len())));
        }
        let mut v = [Dd::ZERO; 4];
        for (slot, s) in v.iter_mut().zip(&f) {
            let x = match precision {
                Precision::Double => s
                    .parse::<f64>()
                    .map(Dd::from_f64)
                    .map_err(|_| perr(line, format!("bad number `{s}`")))?,
                Precision::Extended => Dd::from_str(s).map_err(|e| perr(line, e.to_string()))?,
            };
            if !x.is_finite() {
                return Err(perr(line, format!("non-finite field `{s}`")));
            }
            *slot = x;
        }
        t.betas.push(Complex::new(v[0], v[1]));
        t.gammas.push(Complex::new(v[2], v[3]));
    }
    if t.d() != d {
        return Err(perr(
            last,
            format!("header says d = {d}, found {} rows", t.d()),
        ));
    }
    Ok(t)
}

pub fn save_table(t: &PoleTable, path: &Path) -> Result<()> {
    fs::write(path, table_to_string(t))?;
    Ok(())
}

pub fn load_table(path: &Path) -> Result<PoleTable> {
    table_from_str(&fs::read_to_string(path)?)
}

pub fn series_to_string(ts: &TimeSeries) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# ell = {}", ts.ell);
    let _ = writeln!(s, "# m = {}", ts.m);
    let _ = writeln!(s, "# radius = {}", fmt_radius(ts.radius));
    let _ = writeln!(s, "# dt = {:e}", ts.dt);
    let _ = writeln!(s, "# t0 = {:e}", ts.t0);
    s.push_str("t, value\n");
    for (k, v) in ts.samples.iter().enumerate() {
        let _ = writeln!(s, "{:e}, {:e}", ts.time(k), v);
    }
    s
}

pub fn series_from_str(text: &str) -> Result<TimeSeries> {
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let mut ell = 0usize;
    let mut m = 0i32;
    let mut radius = None;
    let mut dt = None;
    let mut t0 = None;
    let mut first_t = None;
    let mut samples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(h) = l.strip_prefix('#') {
            if let Some((k, v)) = h.split_once('=') {
                let (k, v) = (k.trim(), v.trim());
                let bad = || perr(line, format!("bad `{k}` value `{v}`"));
                match k {
                    "ell" => ell = v.parse().map_err(|_| bad())?,
                    "m" => m = v.parse().map_err(|_| bad())?,
                    "radius" => radius = Some(parse_radius(v).ok_or_else(bad)?),
                    "dt" => dt = Some(v.parse::<f64>().map_err(|_| bad())?),
                    "t0" => t0 = Some(v.parse::<f64>().map_err(|_| bad())?),
                    _ => {}
                }
            }
            continue;
        }
        if l.starts_with('t') {
            continue;
        }
        let (a, b) = l
            .split_once(',')
            .ok_or_else(|| perr(line, format!("expected `t, value`, got `{l}`")))?;
        let t: f64 = a
            .trim()
            .parse()
            .map_err(|_| perr(line, format!("bad time `{a}`")))?;
        let v: f64 = b
            .trim()
            .parse()
            .map_err(|_| perr(line, format!("bad value `{b}`")))?;
        if !v.is_finite() {
            return Err(perr(line, "non-finite value".into()));
        }
        first_t.get_or_insert(t);
        samples.push(v);
    }
    let dt = dt.ok_or_else(|| perr(0, "header lacks `dt`".into()))?;
    let radius = radius.ok_or_else(|| perr(0, "header lacks `radius`".into()))?;
    let t0 = t0.or(first_t).unwrap_or(0.0);
    let mut ts = TimeSeries::new(t0, dt, samples, radius, ell)?;
    ts.m = m;
    Ok(ts)
}

pub fn save_series(ts: &TimeSeries, path: &Path) -> Result<()> {
    fs::write(path, series_to_string(ts))?;
    Ok(())
}

pub fn load_series(path: &Path) -> Result<TimeSeries> {
    series_from_str(&fs::read_to_string(path)?)
}

/// Comma-separated rows under a single header line.
pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(", ");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| csv_cell(*v)).collect();
        s.push_str(&cells.join(", "));
        s.push('\n');
    }
    s
}

fn csv_cell(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:e}")
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    fs::write(path, csv_string(header, rows))?;
    Ok(())
}

/// Ordered `key = value` record of a run's resolved parameters and results.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Manifest::default();
        m.set("command", command);
        m.set("crate_version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let v = value.to_string().replace('\n', " ");
        if let Some(e) = self.entries.iter_mut().find(|(k, _)| k == key) {
            e.1 = v;
        } else {
            self.entries.push((key.to_string(), v));
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn extend_prefixed(&mut self, prefix: &str, entries: &[(String, String)]) {
        for (k, v) in entries {
            self.set(&format!("{prefix}{k}"), v);
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}
