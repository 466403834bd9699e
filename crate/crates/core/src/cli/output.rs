//! Table rendering. Text mode prints 10 significant digits; CSV prints
//! `{:.16e}`, which round-trips every `f64`.

use std::fmt::Write as _;

use super::config::{Format, OutputKind, RunConfig};
use crate::diagnostics::{abs_error, lemma1_bound, residual as residual_table, BoundOptions};
use crate::error::Result;
use crate::solver::{build_series, find_roots, RootOptions, SolutionReport};

/// `v` with 10 significant digits, fixed-point where that stays readable.
pub fn sig10(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-3..5).contains(&mag) {
        format!("{:.*}", (9 - mag) as usize, v)
    } else {
        format!("{v:.9e}")
    }
}

pub fn csv_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Abscissae of the printed solution, error and residual tables.
pub fn display_grid(include_zero: bool) -> Vec<f64> {
    let start = if include_zero { 0 } else { 1 };
    (start..=10).map(|i| i as f64 / 10.0).collect()
}

/// A rendered table, tagged with what it holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub kind: OutputKind,
    pub content: String,
}

struct Table {
    format: Format,
    out: String,
}

impl Table {
    fn new(format: Format) -> Self {
        Self {
            format,
            out: String::new(),
        }
    }

    fn header(&mut self, cols: &[&str]) {
        let sep = if self.format == Format::Csv { "," } else { "  " };
        let _ = writeln!(self.out, "{}", cols.join(sep));
    }

    fn row(&mut self, cells: &[Cell]) {
        let cells: Vec<String> = cells.iter().map(|c| c.render(self.format)).collect();
        let sep = if self.format == Format::Csv { "," } else { "  " };
        let _ = writeln!(self.out, "{}", cells.join(sep));
    }

    fn line(&mut self, s: &str) {
        let _ = writeln!(self.out, "{s}");
    }
}

enum Cell {
    Int(usize),
    X(f64),
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self, format: Format) -> String {
        match (self, format) {
            (Cell::Int(n), _) => n.to_string(),
            (Cell::X(x), Format::Text) => format!("{x:.1}"),
            (Cell::X(x), Format::Csv) | (Cell::Num(x), Format::Csv) => csv_num(*x),
            (Cell::Num(v), Format::Text) => sig10(*v),
            (Cell::Text(s), _) => s.clone(),
        }
    }
}

pub fn render(cfg: &RunConfig, report: &SolutionReport) -> Result<Vec<Rendered>> {
    cfg.outputs
        .iter()
        .map(|&kind| {
            let content = match kind {
                OutputKind::Coeffs => coeffs(cfg.format, report),
                OutputKind::Solution => solution(cfg.format, report),
                OutputKind::Error => error(cfg, report),
                OutputKind::Residual => residual(cfg.format, report)?,
                OutputKind::Bound => bound(cfg, report),
                OutputKind::Convergence => convergence(cfg, report)?,
            };
            Ok(Rendered { kind, content })
        })
        .collect()
}

fn coeffs(format: Format, report: &SolutionReport) -> String {
    let s = &report.solution;
    let mut t = Table::new(format);
    match format {
        Format::Text => t.line(&format!("beta = {}", sig10(s.beta()))),
        Format::Csv => t.line(&format!("# beta = {}", csv_num(s.beta()))),
    }
    t.header(&["k", "U"]);
    for (k, &c) in s.coeffs().coeffs().iter().enumerate() {
        t.row(&[Cell::Int(k), Cell::Num(c)]);
    }
    t.out
}

fn solution(format: Format, report: &SolutionReport) -> String {
    let s = &report.solution;
    let mut t = Table::new(format);
    t.header(&["x", "u"]);
    for x in display_grid(true) {
        t.row(&[Cell::X(x), Cell::Num(s.eval(x))]);
    }
    t.out
}

fn error(cfg: &RunConfig, report: &SolutionReport) -> String {
    let format = cfg.format;
    let mut t = Table::new(format);
    let Some(table) = &report.diagnostics.error else {
        return t.out;
    };
    t.header(&["x", "abs_error"]);
    match format {
        Format::Csv => {
            for (x, e) in table.grid.iter().zip(&table.errors) {
                t.row(&[Cell::X(*x), Cell::Num(*e)]);
            }
        }
        Format::Text => {
            if let Some(exact) = cfg.exact {
                let shown = abs_error(&report.solution, exact, &display_grid(true));
                for (x, e) in shown.grid.iter().zip(&shown.errors) {
                    t.row(&[Cell::X(*x), Cell::Num(*e)]);
                }
            }
            t.line(&format!("ME = {}", sig10(table.me)));
        }
    }
    t.out
}

fn residual(format: Format, report: &SolutionReport) -> Result<String> {
    let r = &report.diagnostics.residual;
    let mut t = Table::new(format);
    t.header(&["x", "abs_residual"]);
    match format {
        Format::Csv => {
            for (x, v) in r.grid.iter().zip(&r.values) {
                t.row(&[Cell::X(*x), Cell::Num(*v)]);
            }
        }
        Format::Text => {
            let shown = residual_table(&report.solution, &display_grid(false))?;
            for (x, v) in shown.grid.iter().zip(&shown.values) {
                t.row(&[Cell::X(*x), Cell::Num(*v)]);
            }
            t.line(&format!("MER = {}", sig10(r.mer)));
            if !r.flagged.is_empty() {
                t.line(&format!("flagged = {}", r.flagged.len()));
            }
        }
    }
    Ok(t.out)
}

fn bound(cfg: &RunConfig, report: &SolutionReport) -> String {
    let d = &report.diagnostics;
    let mut rows: Vec<(&str, Cell)> = vec![
        ("order", Cell::Int(report.solution.order())),
        ("beta", Cell::Num(report.solution.beta())),
        ("boundary_residual", Cell::Num(d.boundary_residual)),
        ("converged", Cell::Text(report.converged().to_string())),
        ("spread", Cell::Num(report.roots.spread)),
        ("mer", Cell::Num(d.residual.mer)),
    ];
    if let Some(e) = &d.error {
        rows.push(("me", Cell::Num(e.me)));
        match &e.bound {
            Some(b) => {
                rows.push(("te", Cell::Num(b.te)));
                rows.push(("c_max", Cell::Num(b.c_max)));
                rows.push(("m_over_fact", Cell::Num(b.m_over_fact)));
                rows.push(("bound_mode", Cell::Text(b.mode.name().to_string())));
            }
            None => rows.push(("te", Cell::Text("unavailable".to_string()))),
        }
    }
    let mut t = Table::new(cfg.format);
    match cfg.format {
        Format::Csv => {
            t.header(&["key", "value"]);
            for (k, v) in rows {
                t.row(&[Cell::Text(k.to_string()), v]);
            }
        }
        Format::Text => {
            for (k, v) in rows {
                t.line(&format!("{k} = {}", v.render(Format::Text)));
            }
        }
    }
    t.out
}

/// MER (and ME with TE when an exact solution is known) at every order from 2
/// to the target, each at the root nearest the selected `β`.
fn convergence(cfg: &RunConfig, report: &SolutionReport) -> Result<String> {
    let p = &cfg.problem;
    let opts = RootOptions {
        parallel: cfg.parallel,
        ..RootOptions::with_scan(cfg.scan)
    };
    let bound_opts = BoundOptions {
        mode: cfg.bound_mode,
        grid_points: cfg.grid_points,
        ..BoundOptions::default()
    };
    let target = report.solution.beta();
    let mut t = Table::new(cfg.format);
    let mut cols = vec!["N", "beta", "mer"];
    if cfg.exact.is_some() {
        cols.extend(["me", "te"]);
    }
    t.header(&cols);
    for n in 2..=cfg.order {
        let roots = match find_roots(p, n, &opts) {
            Ok(r) => r,
            Err(_) => continue,
        };
        let Some(root) = roots
            .iter()
            .min_by(|x, y| (x.beta - target).abs().total_cmp(&(y.beta - target).abs()))
        else {
            continue;
        };
        let s = build_series(p, root.beta, n)?;
        let diag = crate::diagnostics::diagnose(&s, cfg.grid_points, cfg.exact, &bound_opts)?;
        let mut row = vec![Cell::Int(n), Cell::Num(root.beta), Cell::Num(diag.residual.mer)];
        if let Some(exact) = cfg.exact {
            let me = diag.error.as_ref().map_or(f64::NAN, |e| e.me);
            let te = lemma1_bound(&s, exact, &bound_opts).map_or(f64::NAN, |b| b.te);
            row.extend([Cell::Num(me), Cell::Num(te)]);
        }
        t.row(&row);
    }
    Ok(t.out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(1.00055388900455), "1.000553889");
        assert_eq!(sig10(0.8284832870123), "0.8284832870");
        assert_eq!(sig10(-0.16712875244), "-0.1671287524");
        assert_eq!(sig10(0.041874835828), "0.04187483583");
        assert_eq!(sig10(1.5666e-8), "1.566600000e-8");
        assert_eq!(sig10(0.0), "0");
    }

    #[test]
    fn csv_numbers_round_trip() {
        for v in [1.00055388900455, -1.0 / 3.0, 1e-300, 6.02e23] {
            assert_eq!(csv_num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn display_grids() {
        assert_eq!(display_grid(true).len(), 11);
        assert_eq!(display_grid(false)[0], 0.1);
    }
}
