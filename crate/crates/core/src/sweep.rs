//! Scans of the `(k, omega)` parameter plane for periodic orbits.
//!
//! Each cell of a `nk x nomega` grid is sampled at its centre. For every
//! target class `(p, q)` the cell records whether an orbit of period `p` with
//! J-winding `q (mod p)` was found, and if so its stability and acceleration.
//!
//! A cell is marked found only if Newton converged from some seed. Failure to
//! converge is recorded as absence, so the scan can under-report close to
//! tongue boundaries. Windings that violate `|2 pi w / p - omega| <= k` are
//! excluded up front since no orbit can carry them. Whether the orbits stay
//! simple throughout a tongue is not checked.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kicked::{best_orbit, feasible_j_windings, MapParams, Stability, DEFAULT_TOL};

/// Largest period a sweep may target.
pub const MAX_SWEEP_PERIOD: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub k_min: f64,
    pub k_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub nk: usize,
    pub nomega: usize,
    pub max_period: usize,
    /// Seeds per axis, per cell and target.
    pub grid_n: usize,
    pub tol: f64,
    /// Explicit `(p, q)` targets; all reduced `q/p` with `p <= max_period` when `None`.
    pub periods: Option<Vec<(usize, i64)>>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            k_min: 0.0,
            k_max: 1.0,
            omega_min: 0.0,
            omega_max: TAU,
            nk: 200,
            nomega: 200,
            max_period: 5,
            grid_n: 4,
            tol: DEFAULT_TOL,
            periods: None,
        }
    }
}

/// Parses a real number, optionally followed by `pi`: `0.3`, `1pi`, `2/15pi`,
/// `-0.5pi`, `pi`.
pub fn parse_real(s: &str) -> Result<f64> {
    let bad = || Error::InvalidConfig(format!("cannot parse number {s:?}"));
    let t = s.trim();
    let (body, scale) = match t.strip_suffix("pi") {
        Some(b) => (b, PI),
        None => (t, 1.0),
    };
    let coeff = match body {
        "" if scale == PI => 1.0,
        "-" if scale == PI => -1.0,
        _ => match body.split_once('/') {
            Some((n, d)) => {
                let n: f64 = n.parse().map_err(|_| bad())?;
                let d: f64 = d.parse().map_err(|_| bad())?;
                n / d
            }
            None => body.parse().map_err(|_| bad())?,
        },
    };
    let v = coeff * scale;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn parse_periods(s: &str) -> Result<Vec<(usize, i64)>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let bad = || Error::InvalidConfig(format!("bad period target {t:?} (expected p:q)"));
            let (p, q) = t.trim().split_once(':').ok_or_else(bad)?;
            Ok((
                p.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

impl SweepConfig {
    /// Sets one `key = value` field.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let int = |v: &str| -> Result<usize> {
            v.trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("{key}: expected an integer, got {v:?}")))
        };
        match key {
            "k_min" => self.k_min = parse_real(value)?,
            "k_max" => self.k_max = parse_real(value)?,
            "omega_min" => self.omega_min = parse_real(value)?,
            "omega_max" => self.omega_max = parse_real(value)?,
            "nk" => self.nk = int(value)?,
            "nomega" => self.nomega = int(value)?,
            "max_period" => self.max_period = int(value)?,
            "grid_n" => self.grid_n = int(value)?,
            "tol" => self.tol = parse_real(value)?,
            "periods" => self.periods = Some(parse_periods(value)?),
            _ => return Err(Error::InvalidConfig(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Reads a flat `key = value` file on top of the defaults. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = SweepConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key = value", n + 1))
            })?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        let finite = [
            self.k_min,
            self.k_max,
            self.omega_min,
            self.omega_max,
            self.tol,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return fail("all real fields must be finite".into());
        }
        if self.k_min < 0.0 || self.k_min >= self.k_max {
            return fail(format!(
                "need 0 <= k_min < k_max, got [{}, {}]",
                self.k_min, self.k_max
            ));
        }
        if self.omega_min >= self.omega_max {
            return fail(format!(
                "need omega_min < omega_max, got [{}, {}]",
                self.omega_min, self.omega_max
            ));
        }
        if self.nk == 0 || self.nomega == 0 || self.grid_n == 0 {
            return fail("nk, nomega and grid_n must be at least 1".into());
        }
        if self.tol <= 0.0 {
            return fail("tol must be positive".into());
        }
        if self.max_period == 0 || self.max_period > MAX_SWEEP_PERIOD {
            return fail(format!("max_period must be in 1..={MAX_SWEEP_PERIOD}"));
        }
        if let Some(periods) = &self.periods {
            for &(p, q) in periods {
                if p == 0 || p > MAX_SWEEP_PERIOD || q < 0 || q >= p as i64 {
                    return fail(format!(
                        "target {p}:{q} needs 1 <= p <= {MAX_SWEEP_PERIOD}, 0 <= q < p"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Target classes `(p, q)` in increasing `p`, then `q`.
    pub fn targets(&self) -> Vec<(usize, i64)> {
        match &self.periods {
            Some(list) => {
                let mut v = list.clone();
                v.sort();
                v.dedup();
                v
            }
            None => (1..=self.max_period)
                .flat_map(|p| {
                    (0..p as i64)
                        .filter(move |&q| gcd(q as u64, p as u64) == 1)
                        .map(move |q| (p, q))
                })
                .collect(),
        }
    }

    pub fn k_centers(&self) -> Vec<f64> {
        centers(self.k_min, self.k_max, self.nk)
    }

    pub fn omega_centers(&self) -> Vec<f64> {
        centers(self.omega_min, self.omega_max, self.nomega)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn centers(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / n as f64;
    (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect()
}

/// Result for one cell and one target class.
#[derive(Clone, Debug, PartialEq)]
pub struct TongueRecord {
    pub k: f64,
    pub omega: f64,
    pub p: usize,
    /// The class `q`; the orbit's actual J-winding is `q (mod p)`.
    pub w_j: i64,
    pub found: bool,
    pub stability: Option<Stability>,
    /// `2 pi w / p - omega` with `w` the orbit's actual J-winding.
    pub alpha: Option<f64>,
    pub residual: Option<f64>,
}

fn scan_cell(params: &MapParams, p: usize, q: i64, config: &SweepConfig) -> TongueRecord {
    let windings = feasible_j_windings(params, p, q);
    let orbit = if windings.is_empty() {
        None
    } else {
        best_orbit(params, p, &windings, config.grid_n, config.tol)
    };
    TongueRecord {
        k: params.k,
        omega: params.omega,
        p,
        w_j: q,
        found: orbit.is_some(),
        stability: orbit.as_ref().map(|o| o.stability),
        alpha: orbit
            .as_ref()
            .map(|o| crate::kicked::acceleration(o, params)),
        residual: orbit.as_ref().map(|o| o.residual),
    }
}

/// One record per `(cell, target)`, ordered by `k`, then `omega`, then target.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<TongueRecord>> {
    config.validate()?;
    let targets = config.targets();
    let omegas = config.omega_centers();
    let cells: Vec<(f64, f64)> = config
        .k_centers()
        .into_iter()
        .flat_map(|k| omegas.iter().map(move |&w| (k, w)))
        .collect();
    let per_cell: Vec<Vec<TongueRecord>> = cells
        .par_iter()
        .map(|&(k, omega)| {
            let params = MapParams { k, omega };
            targets
                .iter()
                .map(|&(p, q)| scan_cell(&params, p, q, config))
                .collect()
        })
        .collect();
    Ok(per_cell.into_iter().flatten().collect())
}

/// Found cell with the least `k` for a target class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tip {
    pub p: usize,
    pub q: i64,
    pub omega: f64,
    pub k: f64,
}

/// For each class with any found cell, the found cell of least `k`; ties go to
/// the smaller `omega`.
pub fn tip_locations(records: &[TongueRecord]) -> Vec<Tip> {
    let mut tips: BTreeMap<(usize, i64), Tip> = BTreeMap::new();
    for r in records.iter().filter(|r| r.found) {
        let candidate = Tip {
            p: r.p,
            q: r.w_j,
            omega: r.omega,
            k: r.k,
        };
        tips.entry((r.p, r.w_j))
            .and_modify(|t| {
                if (r.k, r.omega).partial_cmp(&(t.k, t.omega)) == Some(Ordering::Less) {
                    *t = candidate;
                }
            })
            .or_insert(candidate);
    }
    tips.into_values().collect()
}

fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn sorted(records: &[TongueRecord]) -> Vec<&TongueRecord> {
    let mut rows: Vec<&TongueRecord> = records.iter().collect();
    rows.sort_by(|a, b| {
        a.k.total_cmp(&b.k)
            .then(a.omega.total_cmp(&b.omega))
            .then(a.p.cmp(&b.p))
            .then(a.w_j.cmp(&b.w_j))
    });
    rows
}

pub const CSV_HEADER: &str = "k,omega,p,w_J,found,stability,alpha,residual";

/// CSV text: header plus one row per record sorted by `(k, omega, p, w_J)`.
/// Reals use 17 significant digits; absent fields are empty.
pub fn to_csv(records: &[TongueRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in sorted(records) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_real(r.k),
            fmt_real(r.omega),
            r.p,
            r.w_j,
            r.found,
            r.stability.map(|s| s.as_str()).unwrap_or(""),
            r.alpha.map(fmt_real).unwrap_or_default(),
            r.residual.map(fmt_real).unwrap_or_default(),
        );
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    Ok(())
}

pub fn emit_csv(records: &[TongueRecord], path: &Path) -> Result<()> {
    write_file(path, &to_csv(records))
}

const PALETTE: [&str; MAX_SWEEP_PERIOD] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173", "#3182bd",
];

fn period_color(p: usize) -> &'static str {
    PALETTE[(p - 1) % PALETTE.len()]
}

fn axis_grid(values: impl Iterator<Item = f64>) -> (Vec<f64>, f64) {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let step = v
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let step = if step.is_finite() { step } else { 1.0 };
    (v, step)
}

/// Static SVG heat map: `omega` across, `k` up, each cell coloured by the
/// smallest period found there.
pub fn to_svg(records: &[TongueRecord]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 120.0;
    const TOP: f64 = 20.0;
    const BOTTOM: f64 = 50.0;
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;

    let (ks, dk) = axis_grid(records.iter().map(|r| r.k));
    let (ws, dw) = axis_grid(records.iter().map(|r| r.omega));
    let (k_lo, k_hi) = match (ks.first(), ks.last()) {
        (Some(a), Some(b)) => (a - dk / 2.0, b + dk / 2.0),
        _ => (0.0, 1.0),
    };
    let (w_lo, w_hi) = match (ws.first(), ws.last()) {
        (Some(a), Some(b)) => (a - dw / 2.0, b + dw / 2.0),
        _ => (0.0, 1.0),
    };
    let x_of = |w: f64| LEFT + (w - w_lo) / (w_hi - w_lo) * plot_w;
    let y_of = |k: f64| TOP + (k_hi - k) / (k_hi - k_lo) * plot_h;

    let mut smallest: BTreeMap<(u64, u64), (f64, f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.found) {
        let key = (r.k.to_bits(), r.omega.to_bits());
        smallest
            .entry(key)
            .and_modify(|e| e.2 = e.2.min(r.p))
            .or_insert((r.k, r.omega, r.p));
    }
    let mut periods: Vec<usize> = smallest.values().map(|e| e.2).collect();
    periods.sort();
    periods.dedup();

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#
    );
    let cw = dw / (w_hi - w_lo) * plot_w;
    let ch = dk / (k_hi - k_lo) * plot_h;
    for &(k, w, p) in smallest.values() {
        let _ = writeln!(
            s,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
            x_of(w) - cw / 2.0,
            y_of(k) - ch / 2.0,
            cw,
            ch,
            period_color(p)
        );
    }
    // axes
    let (x0, y0, x1, y1) = (LEFT, TOP + plot_h, LEFT + plot_w, TOP);
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    );
    let label = |s: &mut String, x: f64, y: f64, anchor: &str, text: String| {
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{text}</text>"#
        );
    };
    label(&mut s, x0, y0 + 16.0, "start", format!("{w_lo:.3}"));
    label(&mut s, x1, y0 + 16.0, "end", format!("{w_hi:.3}"));
    label(&mut s, (x0 + x1) / 2.0, y0 + 36.0, "middle", "omega".into());
    label(&mut s, x0 - 6.0, y0, "end", format!("{k_lo:.3}"));
    label(&mut s, x0 - 6.0, y1 + 10.0, "end", format!("{k_hi:.3}"));
    label(&mut s, x0 - 40.0, (y0 + y1) / 2.0, "middle", "k".into());
    // legend
    let lx = W - RIGHT + 20.0;
    label(&mut s, lx, TOP + 12.0, "start", "period".into());
    for (i, p) in periods.iter().enumerate() {
        let y = TOP + 24.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{y}" width="12" height="12" fill="{}"/>"#,
            period_color(*p)
        );
        label(&mut s, lx + 18.0, y + 11.0, "start", format!("p = {p}"));
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg(records: &[TongueRecord], path: &Path) -> Result<()> {
    write_file(path, &to_svg(records))
}
