//! Hand-written SVG charts. Output depends only on the data: fixed canvas,
//! fixed palette, fixed number formatting.

use std::fmt::Write;

use sensyn::report::{ConvergenceTable, SensitivityReport, StudyMethod};
use sensyn::subspace::MatrixKind;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 500.0;

pub const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

const FONT: &str = "DejaVu Sans, Helvetica, Arial, sans-serif";

/// Named value vectors drawn as grouped bars.
type Series = Vec<(String, Vec<f64>)>;

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Svg {
    buf: String,
}

impl Svg {
    fn new(title: &str) -> Self {
        let mut buf = String::new();
        writeln!(
            buf,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="{FONT}">"#
        )
        .unwrap();
        writeln!(buf, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##).unwrap();
        let mut s = Self { buf };
        s.text(WIDTH / 2.0, 22.0, title, 15.0, "middle");
        s
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, dash: bool) {
        let dash = if dash { r#" stroke-dasharray="5,4""# } else { "" };
        writeln!(
            self.buf,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="1"{dash}/>"#
        )
        .unwrap();
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        writeln!(
            self.buf,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}"/>"#
        )
        .unwrap();
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, dash: bool) {
        let mut p = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            if i > 0 {
                p.push(' ');
            }
            write!(p, "{x:.2},{y:.2}").unwrap();
        }
        let dash = if dash { r#" stroke-dasharray="6,4""# } else { "" };
        writeln!(
            self.buf,
            r#"<polyline points="{p}" fill="none" stroke="{stroke}" stroke-width="2"{dash}/>"#
        )
        .unwrap();
        for (x, y) in pts {
            writeln!(self.buf, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{stroke}"/>"#).unwrap();
        }
    }

    fn text(&mut self, x: f64, y: f64, s: &str, size: f64, anchor: &str) {
        writeln!(
            self.buf,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="{size}" text-anchor="{anchor}">{}</text>"#,
            escape(s)
        )
        .unwrap();
    }

    fn legend(&mut self, x: f64, y: f64, entries: &[(String, &str)]) {
        for (k, (label, c)) in entries.iter().enumerate() {
            let yy = y + 16.0 * k as f64;
            self.rect(x, yy - 9.0, 10.0, 10.0, c);
            self.text(x + 15.0, yy, label, 11.0, "start");
        }
    }

    fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

/// Plot area with a linear y axis.
struct Panel {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    ymin: f64,
    ymax: f64,
}

impl Panel {
    fn new(x: f64, y: f64, w: f64, h: f64, lo: f64, hi: f64) -> Self {
        let (ymin, ymax) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Self { x, y, w, h, ymin, ymax }
    }

    fn py(&self, v: f64) -> f64 {
        self.y + self.h * (1.0 - (v - self.ymin) / (self.ymax - self.ymin))
    }

    fn axes(&self, svg: &mut Svg, label: &str) {
        svg.line(self.x, self.y + self.h, self.x + self.w, self.y + self.h, "#333333", false);
        svg.line(self.x, self.y, self.x, self.y + self.h, "#333333", false);
        for k in 0..=4 {
            let v = self.ymin + (self.ymax - self.ymin) * k as f64 / 4.0;
            let yy = self.py(v);
            svg.line(self.x - 4.0, yy, self.x, yy, "#333333", false);
            svg.text(self.x - 6.0, yy + 4.0, &format!("{v:.3}"), 10.0, "end");
        }
        svg.text(self.x, self.y - 8.0, label, 12.0, "start");
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((0.0_f64, 0.0_f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (lo, if hi > lo { hi * 1.05 } else { hi })
}

fn bar_panel(svg: &mut Svg, panel: &Panel, dim: usize, series: &[(String, Vec<f64>)], label: &str, color_offset: usize) {
    panel.axes(svg, label);
    let zero = panel.py(0.0);
    let group = panel.w / dim as f64;
    let bar = group * 0.8 / series.len().max(1) as f64;
    for i in 0..dim {
        let gx = panel.x + group * i as f64 + group * 0.1;
        for (k, (_, values)) in series.iter().enumerate() {
            let v = values[i];
            let top = panel.py(v.max(0.0));
            let bottom = panel.py(v.min(0.0));
            svg.rect(gx + bar * k as f64, top, bar, bottom - top, color(color_offset + k));
        }
        svg.text(gx + group * 0.4, panel.y + panel.h + 14.0, &(i + 1).to_string(), 10.0, "middle");
    }
    svg.line(panel.x, zero, panel.x + panel.w, zero, "#333333", false);
    let entries: Vec<(String, &str)> = series
        .iter()
        .enumerate()
        .map(|(k, (n, _))| (n.clone(), color(color_offset + k)))
        .collect();
    svg.legend(panel.x + panel.w + 12.0, panel.y + 10.0, &entries);
}

/// Grouped bars per input: Sobol' indices as estimated, other measures normalized.
pub fn bars(report: &SensitivityReport) -> String {
    let dim = report.meta.dim;
    let mut raw = Vec::new();
    let mut normalized = Vec::new();
    for s in &report.scores {
        match (s.name.as_str(), &s.normalized) {
            ("lower_sobol" | "upper_sobol", _) => raw.push((s.name.clone(), s.raw.clone())),
            ("alpha_d" | "gamma_d", _) => {}
            (_, Some(n)) => normalized.push((s.name.clone(), n.clone())),
            (_, None) => {}
        }
    }
    let mut svg = Svg::new(&format!("Sensitivity measures: {}", report.meta.model));
    let (x, w) = (70.0, 590.0);
    let panels: Vec<(&str, &Series, usize)> = [
        ("Sobol' indices", &raw, 0),
        ("Normalized scores", &normalized, 2),
    ]
    .into_iter()
    .filter(|(_, s, _)| !s.is_empty())
    .collect();
    let slot = (HEIGHT - 60.0) / panels.len().max(1) as f64;
    for (k, (label, series, offset)) in panels.into_iter().enumerate() {
        let (lo, hi) = range(series.iter().flat_map(|(_, v)| v.iter().copied()));
        let panel = Panel::new(x, 55.0 + slot * k as f64, w, slot - 45.0, lo, hi);
        bar_panel(&mut svg, &panel, dim, series, label, offset);
    }
    svg.text(x + w / 2.0, HEIGHT - 6.0, "input", 11.0, "middle");
    svg.finish()
}

fn kind_label(kind: MatrixKind) -> &'static str {
    match kind {
        MatrixKind::As => "AS",
        MatrixKind::Gas => "GAS",
    }
}

fn x_positions(x: f64, w: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![x + w / 2.0];
    }
    (0..n).map(|k| x + w * k as f64 / (n - 1) as f64).collect()
}

/// Normalized cumulative eigenvalue sums against `m`, with the threshold line.
pub fn spectrum(report: &SensitivityReport) -> String {
    let mut svg = Svg::new(&format!("Normalized cumulative eigenvalue sum: {}", report.meta.model));
    let panel = Panel::new(70.0, 55.0, 590.0, 390.0, 0.0, 1.0);
    panel.axes(&mut svg, "cumulative share");
    let xs = x_positions(panel.x, panel.w, report.meta.dim);
    for (m, &xx) in xs.iter().enumerate() {
        svg.text(xx, panel.y + panel.h + 14.0, &(m + 1).to_string(), 10.0, "middle");
    }
    let ty = panel.py(report.meta.threshold);
    svg.line(panel.x, ty, panel.x + panel.w, ty, "#888888", true);
    let mut entries = Vec::new();
    for (k, s) in report.spectra.iter().enumerate() {
        let pts: Vec<(f64, f64)> = xs.iter().zip(&s.normalized_cumsum).map(|(&x, &c)| (x, panel.py(c))).collect();
        svg.polyline(&pts, color(k), false);
        entries.push((format!("{} (m = {})", kind_label(s.kind), s.m_selected), color(k)));
    }
    entries.push((format!("threshold {:.2}", report.meta.threshold), "#888888"));
    svg.legend(panel.x + panel.w + 12.0, panel.y + 10.0, &entries);
    svg.text(panel.x + panel.w / 2.0, HEIGHT - 20.0, "m", 11.0, "middle");
    svg.finish()
}

/// Components of the first eigenvector per input, with the ridge direction when known.
pub fn eigvec(report: &SensitivityReport) -> String {
    let mut svg = Svg::new(&format!("First eigenvector: {}", report.meta.model));
    let mut series: Vec<(String, Vec<f64>, bool)> = report
        .spectra
        .iter()
        .map(|s| (kind_label(s.kind).to_string(), s.eigenvectors[0].clone(), false))
        .collect();
    if let Some(theta) = &report.meta.theta {
        // theta is defined up to sign; draw it on the side of the GAS vector
        let reference = report.spectrum(MatrixKind::Gas).or(report.spectra.first());
        let sign = match reference {
            Some(s) if s.eigenvectors[0].iter().zip(theta).map(|(u, t)| u * t).sum::<f64>() < 0.0 => -1.0,
            _ => 1.0,
        };
        series.push(("theta".into(), theta.iter().map(|t| sign * t).collect(), true));
    }
    let (lo, hi) = series
        .iter()
        .flat_map(|(_, v, _)| v.iter().copied())
        .fold((0.0_f64, 0.0_f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let panel = Panel::new(70.0, 55.0, 590.0, 390.0, lo * 1.05, hi * 1.05);
    panel.axes(&mut svg, "component");
    let xs = x_positions(panel.x, panel.w, report.meta.dim);
    for (i, &xx) in xs.iter().enumerate() {
        svg.text(xx, panel.y + panel.h + 14.0, &(i + 1).to_string(), 10.0, "middle");
    }
    let zero = panel.py(0.0);
    svg.line(panel.x, zero, panel.x + panel.w, zero, "#bbbbbb", false);
    let mut entries = Vec::new();
    for (k, (label, v, dash)) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = xs.iter().zip(v).map(|(&x, &c)| (x, panel.py(c))).collect();
        svg.polyline(&pts, color(k), *dash);
        entries.push((label.clone(), color(k)));
    }
    svg.legend(panel.x + panel.w + 12.0, panel.y + 10.0, &entries);
    svg.text(panel.x + panel.w / 2.0, HEIGHT - 20.0, "input", 11.0, "middle");
    svg.finish()
}

/// Seed-averaged scores against sample size (log scale), one line per input,
/// one panel per method. Score studies are normalized before averaging.
pub fn convergence(tables: &[ConvergenceTable]) -> String {
    let title = tables.first().map_or("Convergence".to_string(), |t| format!("Convergence: {}", t.model));
    let mut svg = Svg::new(&title);
    let n = tables.len().max(1) as f64;
    let slot = (WIDTH - 140.0) / n;
    for (p, t) in tables.iter().enumerate() {
        let dim = t.reference.len();
        let means: Vec<Vec<f64>> = t
            .cells
            .iter()
            .map(|row| {
                let mut acc = vec![0.0; dim];
                for cell in row {
                    let total: f64 = cell.scores.iter().sum();
                    let scale = match t.method {
                        StudyMethod::GasScores if total > 0.0 => 1.0 / total,
                        _ => 1.0,
                    };
                    for (a, s) in acc.iter_mut().zip(&cell.scores) {
                        *a += s * scale / row.len() as f64;
                    }
                }
                acc
            })
            .collect();
        let (lo, hi) = range(means.iter().flat_map(|v| v.iter().copied()));
        let panel = Panel::new(60.0 + slot * p as f64, 55.0, slot - 70.0, 380.0, lo, hi);
        let label = match t.method {
            StudyMethod::UpperSobol => "upper Sobol' index",
            StudyMethod::GasScores => "normalized global activity score",
        };
        panel.axes(&mut svg, label);
        let logs: Vec<f64> = t.sizes.iter().map(|&s| (s as f64).log10()).collect();
        let (l0, l1) = (logs[0], *logs.last().unwrap());
        let px = |l: f64| {
            if l1 > l0 {
                panel.x + panel.w * (l - l0) / (l1 - l0)
            } else {
                panel.x + panel.w / 2.0
            }
        };
        for (&s, &l) in t.sizes.iter().zip(&logs) {
            svg.text(px(l), panel.y + panel.h + 14.0, &s.to_string(), 10.0, "middle");
        }
        for i in 0..dim {
            let pts: Vec<(f64, f64)> = logs.iter().zip(&means).map(|(&l, m)| (px(l), panel.py(m[i]))).collect();
            svg.polyline(&pts, color(i), false);
        }
        svg.text(panel.x + panel.w / 2.0, panel.y + panel.h + 32.0, "sample size (log scale)", 11.0, "middle");
    }
    let dim = tables.first().map_or(0, |t| t.reference.len());
    let entries: Vec<(String, &str)> = (0..dim).map(|i| (format!("input {}", i + 1), color(i))).collect();
    svg.legend(WIDTH - 80.0, 70.0, &entries);
    svg.finish()
}
