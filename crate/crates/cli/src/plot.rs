//! Static SVG plots: learning curves and final-position histograms.
//!
//! Every plot is written together with a CSV holding the exact plotted data,
//! next to the SVG with the extension replaced by `.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use qees::records::read_behaviors;
use qees::runner::{BEHAVIORS_FILE, CONFIG_FILE, RECORDS_FILE};
use qees::{Error, Result, RunConfig};

use crate::aggregate::{self, AggregateRow, METRICS};

pub const AGGREGATE_FILE: &str = "aggregate.csv";

/// Line segment `(start, end)` in world coordinates.
pub type Segment = ((f64, f64), (f64, f64));

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 7] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"];

/// Path of the data file that accompanies a plot.
pub fn data_path(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "csv") {
        out.with_extension("data.csv")
    } else {
        out.with_extension("csv")
    }
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn padded(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let widen = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        let (x0, x1) = widen(x0, x1);
        let (y0, y1) = widen(y0, y1);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" font-size="13">{}</text>"#, MARGIN_L, escape(title));
    s
}

fn axes(s: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (l, r, t, b) = (f.px(f.x0), f.px(f.x1), f.py(f.y1), f.py(f.y0));
    let _ = writeln!(s, r#"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#, r - l, b - t);
    for k in 0..=4 {
        let u = k as f64 / 4.0;
        let xv = f.x0 + u * (f.x1 - f.x0);
        let yv = f.y0 + u * (f.y1 - f.y0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, f.px(xv), b + 15.0, tick(xv));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, l - 5.0, f.py(yv) + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (l + r) / 2.0, HEIGHT - 10.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text transform="translate(16,{:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (t + b) / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn missing(path: &Path) -> Error {
    Error::Config(format!("missing input {}", path.display()))
}

/// Loads per-generation statistics: `aggregate.csv` from a sweep, or a single
/// run's `records.csv` (zero spread).
pub fn load_curve_rows(input: &Path) -> Result<Vec<AggregateRow>> {
    let agg = input.join(AGGREGATE_FILE);
    if agg.is_file() {
        return aggregate::read_aggregate(&agg);
    }
    let rec = input.join(RECORDS_FILE);
    if rec.is_file() {
        return aggregate::aggregate(&[qees::records::read_records(&rec)?]);
    }
    Err(missing(&agg))
}

/// Polylines of the mean with a shaded ±std band, one per metric.
pub fn render_curve(rows: &[AggregateRow], metrics: &[String]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Io("no generations to plot".into()));
    }
    for m in metrics {
        if !METRICS.contains(&m.as_str()) {
            return Err(Error::Config(format!("unknown metric `{m}`; expected one of {}", METRICS.join(", "))));
        }
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in rows {
        for m in metrics {
            let (mean, std) = r.stat(m).unwrap_or_default();
            lo = lo.min(mean - std);
            hi = hi.max(mean + std);
        }
    }
    let frame = Frame::padded(rows[0].generation as f64, rows[rows.len() - 1].generation as f64, lo, hi);
    let mut s = svg_open(&format!("mean ± std over {} seed(s)", rows[0].seeds));
    axes(&mut s, &frame, "generation", &metrics.join(", "));
    for (k, m) in metrics.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts = |sign: f64| {
            rows.iter()
                .map(|r| {
                    let (mean, std) = r.stat(m).unwrap_or_default();
                    format!("{:.2},{:.2}", frame.px(r.generation as f64), frame.py(mean + sign * std))
                })
                .collect::<Vec<_>>()
        };
        let mut band = pts(1.0);
        band.extend(pts(-1.0).into_iter().rev());
        let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, band.join(" "));
        let _ = writeln!(
            s,
            r#"<polyline class="metric" data-metric="{m}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts(0.0).join(" ")
        );
        let ly = MARGIN_T + 15.0 + 16.0 * k as f64;
        let lx = WIDTH - MARGIN_R + 10.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{m}</text>"#, lx + 25.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn write_curve_data(path: &Path, rows: &[AggregateRow], metrics: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    let mut header = vec!["generation".to_string()];
    for m in metrics {
        header.push(format!("{m}_mean"));
        header.push(format!("{m}_std"));
    }
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        let mut rec = vec![r.generation.to_string()];
        for m in metrics {
            let (mean, std) = r.stat(m).unwrap_or_default();
            rec.push(mean.to_string());
            rec.push(std.to_string());
        }
        w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Square-binned counts over a rectangular extent.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2d {
    pub bins: usize,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    /// Row-major by y bin, then x bin.
    pub counts: Vec<u64>,
}

impl Histogram2d {
    /// Bins `points` over their bounding box, widened to include `extra`.
    pub fn build(points: &[(f64, f64)], bins: usize, extra: &[(f64, f64)]) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Config("bins must be at least 1".into()));
        }
        let all = points.iter().chain(extra);
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in all {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Io("non-finite behavior coordinate".into()));
            }
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x0 > x1 {
            (x0, x1, y0, y1) = (0.0, 0.0, 0.0, 0.0);
        }
        let f = Frame::padded(x0, x1, y0, y1);
        let mut h = Self { bins, x0: f.x0, x1: f.x1, y0: f.y0, y1: f.y1, counts: vec![0; bins * bins] };
        for &(x, y) in points {
            let (i, j) = h.bin_of(x, y);
            h.counts[j * bins + i] += 1;
        }
        Ok(h)
    }

    pub fn bin_of(&self, x: f64, y: f64) -> (usize, usize) {
        let idx = |v: f64, lo: f64, hi: f64| {
            let k = ((v - lo) / (hi - lo) * self.bins as f64).floor();
            (k.max(0.0) as usize).min(self.bins - 1)
        };
        (idx(x, self.x0, self.x1), idx(y, self.y0, self.y1))
    }

    pub fn edges(&self, i: usize, j: usize) -> (f64, f64, f64, f64) {
        let bw = (self.x1 - self.x0) / self.bins as f64;
        let bh = (self.y1 - self.y0) / self.bins as f64;
        (self.x0 + i as f64 * bw, self.x0 + (i + 1) as f64 * bw, self.y0 + j as f64 * bh, self.y0 + (j + 1) as f64 * bh)
    }

    pub fn occupied(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k % self.bins, k / self.bins, c))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Wall centerlines to overlay, when the run used the deceptive environment.
pub fn trap_segments(input: &Path) -> Result<Vec<Segment>> {
    let path = input.join(CONFIG_FILE);
    if !path.is_file() {
        return Ok(Vec::new());
    }
    let cfg = RunConfig::load(&path)?;
    Ok(cfg
        .environment
        .and_then(|e| e.trap)
        .map(|t| t.wall_segments().to_vec())
        .unwrap_or_default())
}

pub fn render_histogram(h: &Histogram2d, walls: &[Segment]) -> String {
    let frame = Frame { x0: h.x0, x1: h.x1, y0: h.y0, y1: h.y1 };
    let mut s = svg_open(&format!("final positions: {} samples, {}x{} bins", h.total(), h.bins, h.bins));
    axes(&mut s, &frame, "final x", "final y");
    let peak = h.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    for (i, j, c) in h.occupied() {
        let (xa, xb, ya, yb) = h.edges(i, j);
        let shade = 0.15 + 0.85 * (c as f64 / peak);
        let _ = writeln!(
            s,
            r##"<rect class="bin" data-count="{c}" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#08306b" fill-opacity="{shade:.3}"/>"##,
            frame.px(xa),
            frame.py(yb),
            frame.px(xb) - frame.px(xa),
            frame.py(ya) - frame.py(yb)
        );
    }
    for ((ax, ay), (bx, by)) in walls {
        let _ = writeln!(
            s,
            r#"<line class="wall" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="red" stroke-width="2"/>"#,
            frame.px(*ax),
            frame.py(*ay),
            frame.px(*bx),
            frame.py(*by)
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}">max count {}</text>"#, WIDTH - MARGIN_R + 10.0, MARGIN_T + 15.0, peak);
    s.push_str("</svg>\n");
    s
}

pub fn write_histogram_data(path: &Path, h: &Histogram2d) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    w.write_record(["x_bin", "y_bin", "x_lo", "x_hi", "y_lo", "y_hi", "count"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for (i, j, c) in h.occupied() {
        let (xa, xb, ya, yb) = h.edges(i, j);
        w.write_record([
            i.to_string(),
            j.to_string(),
            xa.to_string(),
            xb.to_string(),
            ya.to_string(),
            yb.to_string(),
            c.to_string(),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Loads final positions from `behaviors.csv`.
pub fn load_positions(input: &Path) -> Result<Vec<(f64, f64)>> {
    let path = input.join(BEHAVIORS_FILE);
    if !path.is_file() {
        return Err(missing(&path));
    }
    Ok(read_behaviors(&path)?.into_iter().map(|b| (b.final_x, b.final_y)).collect())
}

/// Refuses to write over any file inside the input directory.
pub fn check_output(input: &Path, out: &Path) -> Result<()> {
    let canon = |p: &Path| fs::canonicalize(p).ok();
    for target in [out.to_path_buf(), data_path(out)] {
        if let (Some(parent), Some(name)) = (target.parent(), target.file_name()) {
            let parent = if parent.as_os_str().is_empty() { Path::new(".") } else { parent };
            if let (Some(p), Some(i)) = (canon(parent), canon(input)) {
                let existing = i.join(name);
                if p == i && existing.exists() && [AGGREGATE_FILE, RECORDS_FILE, BEHAVIORS_FILE, CONFIG_FILE].iter().any(|f| name == *f) {
                    return Err(Error::Config(format!("refusing to overwrite input {}", existing.display())));
                }
            }
        }
    }
    Ok(())
}
