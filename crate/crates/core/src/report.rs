//! CSV, JSON and SVG output.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotics::{boundary_eval, expected_gamma_asymptotic, MIN_ITERATED_LOG_N};
use crate::error::{Error, Result};
use crate::exact::{binomial_f64, expected_gamma, expected_iota, expected_rho, expected_rho_truncated};
use crate::generators::GeneratorSet;
use crate::geometry::Point;
use crate::montecarlo::{AggregateSummary, SimulationConfig};

pub const SUMMARY_SCHEMA: &str = "pareto-frontier/summary/v1";

/// One row per (checkpoint, statistic).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub d: usize,
    pub n: u64,
    pub stat: String,
    pub mean: f64,
    pub var: f64,
    pub min: f64,
    pub max: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    pub count: u64,
    pub seed: u64,
}

pub fn csv_rows(summary: &AggregateSummary) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    for cp in &summary.checkpoints {
        for (stat, acc) in &cp.stats {
            rows.push(CsvRow {
                d: summary.d,
                n: cp.n,
                stat: stat.clone(),
                mean: acc.mean,
                var: acc.variance(),
                min: acc.min,
                max: acc.max,
                q05: acc.quantile(0.05),
                q50: acc.quantile(0.5),
                q95: acc.quantile(0.95),
                count: acc.count,
                seed: summary.master_seed,
            });
        }
    }
    rows
}

pub fn write_csv<W: Write>(summary: &AggregateSummary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in csv_rows(summary) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Quadrature,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reference {
    pub provenance: Provenance,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_error: Option<f64>,
}

/// Reference values for a statistic at checkpoint `n`.
pub fn references(config: &SimulationConfig, n: u64, stat: &str) -> Vec<Reference> {
    let d = config.d as u32;
    let exact = |v: Result<f64>| {
        v.ok().map(|value| Reference {
            provenance: Provenance::Exact,
            value,
            abs_error: None,
        })
    };
    let quad = |b: f64| {
        expected_rho_truncated(d, n, b).ok().map(|q| Reference {
            provenance: Provenance::Quadrature,
            value: q.value,
            abs_error: Some(q.abs_error_estimate),
        })
    };
    let b_n = || {
        config
            .boundary
            .filter(|_| n as f64 >= MIN_ITERATED_LOG_N)
            .and_then(|spec| boundary_eval(spec, d, n as f64).ok())
            .map(|bd| bd.b)
    };
    let mut out = Vec::new();
    match stat {
        "rho" => out.extend(exact(expected_rho(d, n))),
        "gamma" => {
            out.extend(exact(expected_gamma(d, n)));
            if n >= 3 {
                out.extend(expected_gamma_asymptotic(d, n as f64).ok().map(|value| Reference {
                    provenance: Provenance::Asymptotic,
                    value,
                    abs_error: None,
                }));
            }
        }
        // Markov: P(ĥF⁻ ≤ b_n) ≤ E ρ_n(b_n)
        "rho_b" | "r_a" | "hat_f_minus_le_b" => out.extend(b_n().and_then(quad)),
        s => {
            if let Some(k) = s.strip_prefix("gamma_dim_").and_then(|k| k.parse::<u32>().ok()) {
                out.extend(exact(expected_iota(k, n).map(|v| binomial_f64(d as u64, k as u64) * v)));
            }
        }
    }
    out
}

/// The JSON summary: `{schema, version, master_seed, config, results[], diagnostics[]}`.
pub fn summary_json(config: &SimulationConfig, summary: &AggregateSummary, diagnostics: Vec<Value>) -> Value {
    let results: Vec<Value> = csv_rows(summary)
        .into_iter()
        .map(|row| {
            let refs = references(config, row.n, &row.stat);
            json!({
                "n": row.n,
                "stat": row.stat,
                "mean": row.mean,
                "var": row.var,
                "min": row.min,
                "max": row.max,
                "q05": row.q05,
                "q50": row.q50,
                "q95": row.q95,
                "count": row.count,
                "references": refs,
            })
        })
        .collect();
    let mut diags = vec![json!({ "kind": "path_audit", "audit": summary.audit })];
    diags.extend(diagnostics);
    json!({
        "schema": SUMMARY_SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "master_seed": summary.master_seed,
        "config": config,
        "replications": summary.replications,
        "results": results,
        "diagnostics": diags,
    })
}

fn require<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::ShapeMismatch(format!("missing key {key:?}")))
}

fn require_kind(v: &Value, key: &str, ok: fn(&Value) -> bool, what: &str) -> Result<()> {
    if ok(require(v, key)?) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!("{key:?} must be {what}")))
    }
}

/// Checks a JSON summary against the documented schema.
pub fn validate_summary_json(v: &Value) -> Result<()> {
    if require(v, "schema")?.as_str() != Some(SUMMARY_SCHEMA) {
        return Err(Error::ShapeMismatch("unknown schema".into()));
    }
    require_kind(v, "version", Value::is_string, "a string")?;
    require_kind(v, "master_seed", Value::is_u64, "an unsigned integer")?;
    require_kind(v, "replications", Value::is_u64, "an unsigned integer")?;
    require_kind(v, "config", Value::is_object, "an object")?;
    let config = require(v, "config")?;
    for key in ["d", "master_seed", "replications"] {
        require_kind(config, key, Value::is_u64, "an unsigned integer")?;
    }
    require_kind(config, "checkpoints", Value::is_array, "an array")?;
    if config["master_seed"] != v["master_seed"] {
        return Err(Error::ShapeMismatch("config and summary seeds differ".into()));
    }
    let number_or_null = |x: &Value| x.is_number() || x.is_null();
    for r in require(v, "results")?
        .as_array()
        .ok_or_else(|| Error::ShapeMismatch("results must be an array".into()))?
    {
        require_kind(r, "n", Value::is_u64, "an unsigned integer")?;
        require_kind(r, "count", Value::is_u64, "an unsigned integer")?;
        require_kind(r, "stat", Value::is_string, "a string")?;
        for key in ["mean", "var", "min", "max", "q05", "q50", "q95"] {
            require_kind(r, key, number_or_null, "a number")?;
        }
        for reference in require(r, "references")?
            .as_array()
            .ok_or_else(|| Error::ShapeMismatch("references must be an array".into()))?
        {
            let p = require(reference, "provenance")?.as_str();
            if !matches!(p, Some("exact" | "quadrature" | "asymptotic")) {
                return Err(Error::ShapeMismatch(format!("bad provenance {p:?}")));
            }
            require_kind(reference, "value", number_or_null, "a number")?;
        }
    }
    for diag in require(v, "diagnostics")?
        .as_array()
        .ok_or_else(|| Error::ShapeMismatch("diagnostics must be an array".into()))?
    {
        require_kind(diag, "kind", Value::is_string, "a string")?;
    }
    Ok(())
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 48.0;

struct Frame {
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + x / self.x_max * (WIDTH - 2.0 * MARGIN)
    }
    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - y / self.y_max * (HEIGHT - 2.0 * MARGIN)
    }
}

fn axes(svg: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, y0) = (f.px(0.0), f.py(0.0));
    let _ = writeln!(
        svg,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{x0:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{:.2}"/></g>"#,
        f.px(f.x_max),
        f.py(f.y_max)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="12">{x_label} (max {:.3})</text><text x="4" y="{:.2}" font-size="12">{y_label} (max {:.3})</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        f.x_max,
        MARGIN / 2.0,
        f.y_max
    );
}

/// Staircase plot of a two-dimensional record set: records, generators,
/// the frontier, and the lines `x₁ + x₂ = F⁺, F⁻, ĥF⁻`.
pub fn frontier_svg(records: &[Point], generators: &GeneratorSet, f_plus: f64, f_minus: f64, hat_f_minus: f64) -> Result<String> {
    if generators.dim() != 2 || records.iter().any(|r| r.dim() != 2) {
        return Err(Error::InvalidArgument("frontier plot needs d = 2".into()));
    }
    let mut recs: Vec<&Point> = records.iter().collect();
    recs.sort_by(|a, b| a.coords()[0].total_cmp(&b.coords()[0]));
    let x_max = recs.iter().map(|r| r.coords()[0]).fold(1e-9, f64::max) * 1.1;
    let y_max = recs.iter().map(|r| r.coords()[1]).fold(1e-9, f64::max) * 1.1;
    let f = Frame { x_max, y_max };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    axes(&mut svg, &f, "x1", "x2");

    // frontier: (0, y_1) → (x_1, y_1) → (x_1, y_2) → … → (x_k, 0)
    let mut path = String::new();
    if let Some(first) = recs.first() {
        let _ = write!(path, "M {:.2} {:.2}", f.px(0.0), f.py(first.coords()[1]));
        for (i, r) in recs.iter().enumerate() {
            let (x, y) = (r.coords()[0], r.coords()[1]);
            let _ = write!(path, " L {:.2} {:.2}", f.px(x), f.py(y));
            let next_y = recs.get(i + 1).map_or(0.0, |s| s.coords()[1]);
            let _ = write!(path, " L {:.2} {:.2}", f.px(x), f.py(next_y));
        }
    }
    let _ = writeln!(svg, r#"<path class="frontier" d="{path}" fill="none" stroke="black" stroke-width="1.5"/>"#);

    for (name, level, colour) in [("f-plus", f_plus, "#c0392b"), ("f-minus", f_minus, "#2471a3"), ("hat-f-minus", hat_f_minus, "#1e8449")] {
        // x1 + x2 = level clipped to [0, x_max] × [0, y_max]
        let (xa, ya) = ((level - y_max).max(0.0), level.min(y_max));
        let (xb, yb) = (level.min(x_max), (level - x_max).max(0.0));
        if xa <= xb && level >= 0.0 {
            let _ = writeln!(
                svg,
                r#"<line class="level {name}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{colour}" stroke-dasharray="6 4"/>"#,
                f.px(xa),
                f.py(ya),
                f.px(xb),
                f.py(yb)
            );
        }
    }
    for g in generators.iter() {
        let (x, y) = (g.point.coords()[0], g.point.coords()[1]);
        let _ = writeln!(
            svg,
            r#"<rect class="generator" x="{:.2}" y="{:.2}" width="6" height="6" fill="none" stroke="purple"/>"#,
            f.px(x) - 3.0,
            f.py(y) - 3.0
        );
    }
    for r in &recs {
        let _ = writeln!(
            svg,
            r#"<circle class="record" cx="{:.2}" cy="{:.2}" r="3.5" fill="black"/>"#,
            f.px(r.coords()[0]),
            f.py(r.coords()[1])
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Exact versus asymptotic expected generator counts over `ns`.
pub fn convergence_svg(d: u32, ns: &[u64]) -> Result<String> {
    if ns.iter().any(|&n| n < 3) || ns.is_empty() {
        return Err(Error::InvalidArgument("convergence plot needs n >= 3".into()));
    }
    let mut pts = Vec::with_capacity(ns.len());
    for &n in ns {
        pts.push(((n as f64).log10(), expected_gamma(d, n)?, expected_gamma_asymptotic(d, n as f64)?));
    }
    let x_lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let y_hi = pts.iter().map(|p| p.1.max(p.2)).fold(1e-9, f64::max) * 1.1;
    let f = Frame {
        x_max: (x_hi - x_lo).max(1e-9),
        y_max: y_hi,
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    axes(&mut svg, &f, "log10 n - log10 n_min", "E gamma");
    for (class, pick, colour) in [("exact", 1usize, "black"), ("asymptotic", 2, "#c0392b")] {
        let coords: Vec<String> = pts
            .iter()
            .map(|p| {
                let y = if pick == 1 { p.1 } else { p.2 };
                format!("{:.2},{:.2}", f.px(p.0 - x_lo), f.py(y))
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="{class}" points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::BoundarySpec;
    use crate::generators::all_generators;
    use crate::geometry::RecordSet;
    use crate::montecarlo::run_experiment;

    fn config() -> SimulationConfig {
        SimulationConfig::new(2, vec![20, 300], 30, 17).with_boundary(BoundarySpec::Constant { c: 1.0 })
    }

    #[test]
    fn csv_round_trips_bit_exactly() {
        let s = run_experiment(&config()).unwrap();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("d,n,stat,mean,var,min,max,q05,q50,q95,count,seed\n"));
        let parsed = read_csv(buf.as_slice()).unwrap();
        let original = csv_rows(&s);
        assert_eq!(parsed.len(), original.len());
        for (a, b) in parsed.iter().zip(&original) {
            assert_eq!(a.stat, b.stat);
            for (x, y) in [(a.mean, b.mean), (a.var, b.var), (a.q05, b.q05), (a.q95, b.q95), (a.min, b.min)] {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn json_summary_validates() {
        let c = config();
        let s = run_experiment(&c).unwrap();
        let v = summary_json(&c, &s, vec![json!({"kind": "note"})]);
        validate_summary_json(&v).unwrap();
        assert_eq!(v["master_seed"], 17);
        let rho = v["results"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["stat"] == "rho" && r["n"] == 300)
            .unwrap();
        assert_eq!(rho["references"][0]["provenance"], "exact");
        let mut broken = v.clone();
        broken.as_object_mut().unwrap().remove("config");
        assert!(validate_summary_json(&broken).is_err());
    }

    #[test]
    fn frontier_svg_markers() {
        let mut rs = RecordSet::new(2).unwrap();
        for p in [[1.0, 4.0], [2.0, 3.5], [3.5, 0.5]] {
            rs.insert_coords(&p).unwrap();
        }
        let g = all_generators(&rs).unwrap();
        let stats = rs.frontier_record_stats().unwrap();
        let (fm, _) = g.trailing_summary().unwrap();
        let svg = frontier_svg(rs.records(), &g, stats.f_plus, fm, stats.hat_f_minus).unwrap();
        assert_eq!(svg.matches(r#"class="record""#).count(), 3);
        assert_eq!(svg.matches(r#"class="generator""#).count(), 4);
        assert_eq!(svg.matches(r#"class="level "#).count(), 3);
    }

    #[test]
    fn convergence_svg_has_both_curves() {
        let svg = convergence_svg(3, &[10, 100, 1000, 10_000]).unwrap();
        assert!(svg.contains(r#"class="exact""#) && svg.contains(r#"class="asymptotic""#));
        assert!(convergence_svg(3, &[2]).is_err());
    }
}
