//! Batch driver: grid sweeps of the `(p, q)`-plane, boundary-curve
//! emission, and static figure rendering.
//!
//! All outputs are byte-deterministic for a fixed config and seed,
//! regardless of worker count: cells are computed in parallel but
//! written in index order.

use liouville_core::certify;
use liouville_core::regions::{self, CurveId, ProblemPoint, RegionLabel};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Classify,
    Certify,
}

impl Mode {
    pub fn parse(s: &str) -> anyhow::Result<Mode> {
        match s {
            "classify" => Ok(Mode::Classify),
            "certify" => Ok(Mode::Certify),
            _ => anyhow::bail!("unknown mode {s:?} (expected classify or certify)"),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Classify => "classify",
            Mode::Certify => "certify",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n: u32,
    /// `(lo, hi, steps)` for the q-axis.
    pub q_range: (f64, f64, usize),
    /// `(lo, hi, steps)` for the p-axis.
    pub p_range: (f64, f64, usize),
    pub mode: Mode,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> SweepConfig {
        SweepConfig {
            n: 6,
            q_range: (0.0, 1.99, 80),
            p_range: (0.0, 4.0, 80),
            mode: Mode::Classify,
            seed: 0,
            output_dir: PathBuf::from("."),
            workers: 1,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.n < 3 {
            anyhow::bail!("n = {} must be >= 3", self.n);
        }
        for (name, (lo, hi, steps)) in [("q-range", self.q_range), ("p-range", self.p_range)] {
            if steps < 2 {
                anyhow::bail!("{name}: steps = {steps} must be >= 2");
            }
            if !(lo < hi) {
                anyhow::bail!("{name}: empty interval [{lo}, {hi}]");
            }
        }
        let (qlo, qhi, _) = self.q_range;
        if qlo < 0.0 || qhi >= 2.0 {
            anyhow::bail!("q-range must lie within [0, 2)");
        }
        if self.p_range.0 < 0.0 {
            anyhow::bail!("p-range must lie within [0, inf)");
        }
        if self.workers == 0 {
            anyhow::bail!("workers must be >= 1");
        }
        Ok(())
    }
}

/// 17 significant digits, locale-free; round-trips through f64 parse.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn grid_values(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let h = (hi - lo) / (steps - 1) as f64;
    (0..steps)
        .map(|i| if i == steps - 1 { hi } else { lo + i as f64 * h })
        .collect()
}

#[derive(Debug, Clone)]
pub struct GridRow {
    pub q: f64,
    pub p: f64,
    pub label: RegionLabel,
    pub g_value: f64,
    pub h_value: f64,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub rows: usize,
    pub counts: BTreeMap<&'static str, usize>,
    pub grid_path: PathBuf,
}

fn sweep_cell(n: u32, p: f64, q: f64, mode: Mode) -> GridRow {
    let point = ProblemPoint::new(n, p, q).expect("validated range");
    let label = regions::classify(point);
    let delta = if mode == Mode::Certify {
        let cert = match label {
            RegionLabel::ConstantThm1 => {
                Some(certify::certify_lowq(point, certify::DEFAULT_EPS1, certify::DEFAULT_EPS))
            }
            RegionLabel::ConstantThm2 => Some(certify::certify_highq(point)),
            _ => None,
        };
        cert.filter(|c| c.feasible() && certify::validate_certificate(c).iter().all(|k| k.ok))
            .map(|c| c.delta)
    } else {
        None
    };
    GridRow {
        q,
        p,
        label,
        g_value: regions::eval_g(point),
        h_value: regions::eval_h(point),
        delta,
    }
}

/// Sweep the grid and write `grid.csv` (q-major row order).
pub fn run_sweep(config: &SweepConfig) -> anyhow::Result<SweepSummary> {
    config.validate()?;
    let qs = grid_values(config.q_range.0, config.q_range.1, config.q_range.2);
    let ps = grid_values(config.p_range.0, config.p_range.1, config.p_range.2);
    let cells: Vec<(f64, f64)> = qs
        .iter()
        .flat_map(|&q| ps.iter().map(move |&p| (q, p)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()?;
    let (n, mode) = (config.n, config.mode);
    let rows: Vec<GridRow> = pool.install(|| {
        use rayon::prelude::*;
        cells
            .par_iter()
            .map(|&(q, p)| sweep_cell(n, p, q, mode))
            .collect()
    });
    let mut out = String::from("q,p,label,G_value,H_value,delta_if_certified\n");
    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    for row in &rows {
        *counts.entry(row.label.as_str()).or_insert(0) += 1;
        let delta = row.delta.map(fmt_f).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f(row.q),
            fmt_f(row.p),
            row.label.as_str(),
            fmt_f(row.g_value),
            fmt_f(row.h_value),
            delta
        )?;
    }
    fs::create_dir_all(&config.output_dir)?;
    let grid_path = config.output_dir.join("grid.csv");
    fs::write(&grid_path, out)?;
    Ok(SweepSummary {
        rows: rows.len(),
        counts,
        grid_path,
    })
}

/// Write `curves.csv` with one row per sampled boundary-curve point.
pub fn emit_curves(n: u32, resolution: usize, output: &Path) -> anyhow::Result<()> {
    if resolution < 16 {
        anyhow::bail!("resolution = {resolution} must be >= 16");
    }
    let mut out = String::from("curve_id,q,p\n");
    for curve in [CurveId::F1, CurveId::F2, CurveId::F3, CurveId::F4, CurveId::F5] {
        for (q, p) in regions::curve_samples(n, curve, resolution)? {
            if curve == CurveId::F2 && (q - 1.0).abs() < 1e-6 {
                continue;
            }
            writeln!(out, "{},{},{}", curve.as_str(), fmt_f(q), fmt_f(p))?;
        }
    }
    if let Some(dir) = output.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(output, out)?;
    Ok(())
}

fn label_color(label: &str) -> &'static str {
    match label {
        "subthreshold" => "#d9d9d9",
        "exists_radial" => "#f4a582",
        "constant_thm1" => "#92c5de",
        "constant_thm2" => "#2166ac",
        "constant_G" => "#a6dba0",
        "open" => "#ffffff",
        _ => "#000000",
    }
}

fn curve_color(curve: &str) -> &'static str {
    match curve {
        "f1" => "#000000",
        "f2" => "#e31a1c",
        "f3" => "#33a02c",
        "f4" => "#1f78b4",
        "f5" => "#6a3d9a",
        _ => "#888888",
    }
}

struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_csv(path: &Path) -> anyhow::Result<CsvTable> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| anyhow::anyhow!("empty CSV {path:?}"))?
        .split(',')
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(str::to_owned).collect();
        if fields.len() != header.len() {
            anyhow::bail!("row {} of {path:?} has {} fields, expected {}", i + 2, fields.len(), header.len());
        }
        rows.push(fields);
    }
    Ok(CsvTable { header, rows })
}

fn col(table: &CsvTable, name: &str, path: &Path) -> anyhow::Result<usize> {
    table
        .header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| anyhow::anyhow!("missing column {name:?} in {path:?}"))
}

fn parse_field(s: &str) -> anyhow::Result<f64> {
    s.parse::<f64>()
        .map_err(|_| anyhow::anyhow!("bad float field {s:?}"))
}

const SVG_W: f64 = 720.0;
const SVG_H: f64 = 540.0;
const MARGIN: f64 = 60.0;

/// Render the classified grid plus boundary curves as a static SVG.
/// Purely textual emission: identical inputs give identical bytes.
pub fn render_svg(grid: &Path, curves: &Path, output: &Path) -> anyhow::Result<()> {
    let gt = read_csv(grid)?;
    let ct = read_csv(curves)?;
    let (gq, gp, gl) = (col(&gt, "q", grid)?, col(&gt, "p", grid)?, col(&gt, "label", grid)?);
    let (cc, cq, cp) = (
        col(&ct, "curve_id", curves)?,
        col(&ct, "q", curves)?,
        col(&ct, "p", curves)?,
    );
    // extent: grid if present, else curve points, else a default box
    let mut qmax: f64 = 0.0;
    let mut pmax: f64 = 0.0;
    let mut grid_pts: Vec<(f64, f64, String)> = Vec::new();
    for row in &gt.rows {
        let (q, p) = (parse_field(&row[gq])?, parse_field(&row[gp])?);
        qmax = qmax.max(q);
        pmax = pmax.max(p);
        grid_pts.push((q, p, row[gl].clone()));
    }
    let mut curve_pts: Vec<(String, f64, f64)> = Vec::new();
    for row in &ct.rows {
        let (q, p) = (parse_field(&row[cq])?, parse_field(&row[cp])?);
        curve_pts.push((row[cc].clone(), q, p));
        if grid_pts.is_empty() {
            qmax = qmax.max(q);
            pmax = pmax.max(p.min(6.0));
        }
    }
    if qmax <= 0.0 {
        qmax = 2.0;
    }
    if pmax <= 0.0 {
        pmax = 4.0;
    }
    let to_x = |q: f64| MARGIN + q / qmax * (SVG_W - 2.0 * MARGIN);
    let to_y = |p: f64| SVG_H - MARGIN - p / pmax * (SVG_H - 2.0 * MARGIN);
    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">"
    )?;
    writeln!(svg, "<rect width=\"{SVG_W}\" height=\"{SVG_H}\" fill=\"#ffffff\"/>")?;
    // region cells: small rects centered on grid nodes
    if !grid_pts.is_empty() {
        let qs: std::collections::BTreeSet<u64> = grid_pts.iter().map(|g| g.0.to_bits()).collect();
        let ps: std::collections::BTreeSet<u64> = grid_pts.iter().map(|g| g.1.to_bits()).collect();
        let cw = (SVG_W - 2.0 * MARGIN) / qs.len() as f64;
        let ch = (SVG_H - 2.0 * MARGIN) / ps.len() as f64;
        for (q, p, label) in &grid_pts {
            writeln!(
                svg,
                "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"{}\"/>",
                to_x(*q) - cw / 2.0,
                to_y(*p) - ch / 2.0,
                cw,
                ch,
                label_color(label)
            )?;
        }
    }
    // curves as polylines, grouped by id in first-appearance order
    let mut order: Vec<String> = Vec::new();
    for (id, _, _) in &curve_pts {
        if !order.contains(id) {
            order.push(id.clone());
        }
    }
    for id in &order {
        let pts: String = curve_pts
            .iter()
            .filter(|(c, _, _)| c == id)
            .filter(|(_, _, p)| *p <= pmax * 1.001)
            .map(|(_, q, p)| format!("{:.3},{:.3}", to_x(*q), to_y(*p)))
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            pts,
            curve_color(id)
        )?;
    }
    // axes
    writeln!(
        svg,
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"#000000\"/>",
        m = MARGIN,
        b = SVG_H - MARGIN,
        r = SVG_W - MARGIN
    )?;
    writeln!(
        svg,
        "<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\" stroke=\"#000000\"/>",
        m = MARGIN,
        b = SVG_H - MARGIN
    )?;
    writeln!(
        svg,
        "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"14\">q</text>",
        SVG_W - MARGIN + 10.0,
        SVG_H - MARGIN + 5.0
    )?;
    writeln!(svg, "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"14\">p</text>", MARGIN - 20.0, MARGIN - 10.0)?;
    // legend: region swatches then curve strokes
    let labels = [
        "subthreshold",
        "exists_radial",
        "constant_thm1",
        "constant_thm2",
        "constant_G",
        "open",
    ];
    let mut ly = MARGIN;
    let lx = SVG_W - MARGIN - 150.0;
    for label in labels {
        writeln!(
            svg,
            "<rect x=\"{lx:.3}\" y=\"{:.3}\" width=\"12\" height=\"12\" fill=\"{}\" stroke=\"#666666\"/>",
            ly,
            label_color(label)
        )?;
        writeln!(
            svg,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\">{label}</text>",
            lx + 18.0,
            ly + 10.0
        )?;
        ly += 18.0;
    }
    for id in &order {
        writeln!(
            svg,
            "<line x1=\"{lx:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            ly + 6.0,
            lx + 12.0,
            ly + 6.0,
            curve_color(id)
        )?;
        writeln!(
            svg,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\">{id}</text>",
            lx + 18.0,
            ly + 10.0
        )?;
        ly += 18.0;
    }
    writeln!(svg, "</svg>")?;
    if let Some(dir) = output.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(output, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn tiny_config(dir: &Path) -> SweepConfig {
        SweepConfig {
            n: 6,
            q_range: (0.0, 1.9, 8),
            p_range: (0.0, 3.0, 8),
            mode: Mode::Classify,
            seed: 0,
            output_dir: dir.to_path_buf(),
            workers: 2,
        }
    }

    #[test]
    fn degenerate_grid_has_four_rows() {
        let dir = tempdir().unwrap();
        let mut cfg = tiny_config(dir.path());
        cfg.q_range = (0.1, 0.5, 2);
        cfg.p_range = (0.5, 2.0, 2);
        let summary = run_sweep(&cfg).unwrap();
        assert_eq!(summary.rows, 4);
        let text = fs::read_to_string(summary.grid_path).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("q,p,label,G_value,H_value,delta_if_certified\n"));
        assert!(!text.contains('\r'));
        for line in text.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let pt = ProblemPoint::new(6, f[1].parse().unwrap(), f[0].parse().unwrap()).unwrap();
            assert_eq!(f[2], regions::classify(pt).as_str());
        }
    }

    #[test]
    fn default_grid_region_counts_pinned() {
        let dir = tempdir().unwrap();
        let mut cfg = SweepConfig::default();
        cfg.output_dir = dir.path().to_path_buf();
        cfg.workers = 4;
        let summary = run_sweep(&cfg).unwrap();
        assert_eq!(summary.rows, 6400);
        // pinned snapshot of the default n = 6 classification; the
        // comparison lemma leaves no cell where only the G-test applies
        let expect: Vec<(&str, usize)> = vec![
            ("constant_thm1", 160),
            ("constant_thm2", 1266),
            ("exists_radial", 1581),
            ("open", 2973),
            ("subthreshold", 420),
        ];
        let got: Vec<(&str, usize)> = summary.counts.into_iter().collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn sweep_deterministic_across_worker_counts() {
        let d1 = tempdir().unwrap();
        let d2 = tempdir().unwrap();
        let mut c1 = tiny_config(d1.path());
        let mut c2 = tiny_config(d2.path());
        c1.workers = 1;
        c2.workers = 4;
        run_sweep(&c1).unwrap();
        run_sweep(&c2).unwrap();
        let a = fs::read(d1.path().join("grid.csv")).unwrap();
        let b = fs::read(d2.path().join("grid.csv")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn certify_mode_deltas_positive() {
        let dir = tempdir().unwrap();
        let mut cfg = tiny_config(dir.path());
        cfg.mode = Mode::Certify;
        cfg.q_range = (0.05, 0.19, 4);
        cfg.p_range = (0.9, 1.5, 4);
        run_sweep(&cfg).unwrap();
        let text = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
        let mut certified = 0;
        for line in text.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            if !f[5].is_empty() {
                assert!(f[5].parse::<f64>().unwrap() > 0.0);
                certified += 1;
            }
        }
        assert!(certified > 0, "no cell certified:\n{text}");
    }

    #[test]
    fn curves_residuals_and_bands() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("curves.csv");
        emit_curves(6, 64, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        for line in text.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let q: f64 = f[1].parse().unwrap();
            let p: f64 = f[2].parse().unwrap();
            match f[0] {
                "f1" => assert!((p + q - 1.0).abs() < 1e-12),
                "f2" => assert!((q - 1.0).abs() >= 1e-6),
                "f3" => {
                    let pt = ProblemPoint::new(6, p, q).unwrap();
                    assert!(regions::eval_g(pt).abs() < 1e-9, "G residual at q={q}");
                }
                "f4" => {
                    let pt = ProblemPoint::new(6, p, q).unwrap();
                    assert!(regions::eval_h(pt).abs() < 1e-9);
                    assert!(q > 0.2);
                }
                "f5" => assert_eq!(q, 1.0),
                other => panic!("unknown curve {other}"),
            }
        }
    }

    #[test]
    fn render_deterministic_and_curves_only() {
        let dir = tempdir().unwrap();
        let cfg = tiny_config(dir.path());
        run_sweep(&cfg).unwrap();
        let curves = dir.path().join("curves.csv");
        emit_curves(6, 32, &curves).unwrap();
        let grid = dir.path().join("grid.csv");
        let s1 = dir.path().join("a.svg");
        let s2 = dir.path().join("b.svg");
        render_svg(&grid, &curves, &s1).unwrap();
        render_svg(&grid, &curves, &s2).unwrap();
        assert_eq!(fs::read(&s1).unwrap(), fs::read(&s2).unwrap());
        // empty grid: header only
        let empty = dir.path().join("empty.csv");
        fs::write(&empty, "q,p,label,G_value,H_value,delta_if_certified\n").unwrap();
        let s3 = dir.path().join("c.svg");
        render_svg(&empty, &curves, &s3).unwrap();
        let text = fs::read_to_string(&s3).unwrap();
        assert!(text.contains("<polyline"));
        assert!(text.ends_with("</svg>\n"));
    }

    #[test]
    fn invalid_configs_rejected() {
        let dir = tempdir().unwrap();
        let mut cfg = tiny_config(dir.path());
        cfg.q_range = (0.0, 2.5, 8);
        assert!(cfg.validate().is_err());
        cfg = tiny_config(dir.path());
        cfg.p_range.2 = 1;
        assert!(cfg.validate().is_err());
        cfg = tiny_config(dir.path());
        cfg.workers = 0;
        assert!(cfg.validate().is_err());
    }
}
