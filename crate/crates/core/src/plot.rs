//! Minimal deterministic SVG rendering for sweep tables, pair maps and
//! in-plane textures. Output depends only on the input values.

use std::fmt::Write as _;

use crate::entanglement::TextureRow;
use crate::experiment::SweepRow;

const FONT: &str = "font-family=\"sans-serif\" font-size=\"12\"";

fn header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Linear map from `[lo, hi]` to `[a, b]`; a flat range maps to the midpoint.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        (a + b) / 2.0
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.08 * (hi - lo) } else { 0.5 * lo.abs().max(1e-3) };
    (lo - pad, hi + pad)
}

struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xlim: (f64, f64),
    ylim: (f64, f64),
}

impl Panel {
    fn x(&self, v: f64) -> f64 {
        scale(v, self.xlim.0, self.xlim.1, self.x0, self.x0 + self.w)
    }

    fn y(&self, v: f64) -> f64 {
        scale(v, self.ylim.0, self.ylim.1, self.y0 + self.h, self.y0)
    }

    fn frame(&self, out: &mut String, title: &str, xlabel: &str, xticks: &[f64]) {
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
            self.x0, self.y0, self.w, self.h
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" {FONT}>{}</text>",
            self.x0 + self.w / 2.0,
            self.y0 - 10.0,
            escape(title)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" {FONT}>{}</text>",
            self.x0 + self.w / 2.0,
            self.y0 + self.h + 34.0,
            escape(xlabel)
        );
        for &t in xticks {
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" {FONT}>{t}</text>",
                self.x(t),
                self.y0 + self.h + 16.0
            );
        }
        for k in 0..=4 {
            let v = self.ylim.0 + (self.ylim.1 - self.ylim.0) * k as f64 / 4.0;
            let y = self.y(v);
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>\n\
                 <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" {FONT}>{v:.4}</text>",
                self.x0,
                self.x0 + self.w,
                self.x0 - 6.0,
                y + 4.0
            );
        }
    }

    fn series(&self, out: &mut String, points: &[(f64, f64, f64)], color: &str, label: &str, slot: usize) {
        let path: Vec<String> = points.iter().map(|&(x, y, _)| format!("{:.2},{:.2}", self.x(x), self.y(y))).collect();
        if path.len() > 1 {
            let _ = writeln!(out, "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\"/>", path.join(" "));
        }
        for &(x, y, err) in points {
            let (px, py) = (self.x(x), self.y(y));
            if err > 0.0 {
                let (top, bottom) = (self.y(y + err), self.y(y - err));
                let _ = writeln!(
                    out,
                    "<path d=\"M{px:.2},{top:.2}V{bottom:.2}M{:.2},{top:.2}H{:.2}M{:.2},{bottom:.2}H{:.2}\" stroke=\"{color}\"/>",
                    px - 4.0,
                    px + 4.0,
                    px - 4.0,
                    px + 4.0
                );
            }
            let _ = writeln!(out, "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3.5\" fill=\"{color}\"/>");
        }
        let ly = self.y0 + 16.0 + 16.0 * slot as f64;
        let lx = self.x0 + self.w - 120.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" {FONT}>{}</text>",
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            escape(label)
        );
    }
}

/// Two panels: energy (mean ± std and best, with the exact ground energy
/// dashed) and the ground-space metrics (fidelity, δ) versus layer count.
pub fn sweep_plot(rows: &[SweepRow], exact_e0: Option<f64>) -> String {
    let mut out = header(980.0, 400.0);
    let xs: Vec<f64> = rows.iter().map(|r| r.layers as f64).collect();
    let xlim = padded_range(xs.iter().copied());
    let xticks = xs.clone();

    let energies = rows.iter().flat_map(|r| [r.mean - r.std, r.mean + r.std, r.best]).chain(exact_e0);
    let left = Panel { x0: 80.0, y0: 40.0, w: 380.0, h: 300.0, xlim, ylim: padded_range(energies) };
    left.frame(&mut out, "energy", "layers", &xticks);
    if let Some(e0) = exact_e0 {
        let y = left.y(e0);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"green\" stroke-dasharray=\"6,4\"/>",
            left.x0,
            left.x0 + left.w
        );
    }
    let mean: Vec<_> = rows.iter().map(|r| (r.layers as f64, r.mean, r.std)).collect();
    let best: Vec<_> = rows.iter().map(|r| (r.layers as f64, r.best, 0.0)).collect();
    left.series(&mut out, &mean, "#1f77b4", "mean ± std", 0);
    left.series(&mut out, &best, "#d62728", "best", 1);

    let metrics = rows.iter().flat_map(|r| [r.fidelity, r.delta]).flatten().chain([0.0, 1.0]);
    let right = Panel { x0: 580.0, y0: 40.0, w: 380.0, h: 300.0, xlim, ylim: padded_range(metrics) };
    right.frame(&mut out, "ground-space metrics", "layers", &xticks);
    let fid: Vec<_> = rows.iter().filter_map(|r| r.fidelity.map(|f| (r.layers as f64, f, 0.0))).collect();
    let delta: Vec<_> = rows.iter().filter_map(|r| r.delta.map(|d| (r.layers as f64, d, 0.0))).collect();
    right.series(&mut out, &fid, "#2ca02c", "fidelity", 0);
    right.series(&mut out, &delta, "#9467bd", "delta", 1);
    out.push_str("</svg>\n");
    out
}

/// Piecewise-linear approximation of a perceptually ordered colormap.
pub fn colormap(t: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.00, [68.0, 1.0, 84.0]),
        (0.25, [59.0, 82.0, 139.0]),
        (0.50, [33.0, 145.0, 140.0]),
        (0.75, [94.0, 201.0, 98.0]),
        (1.00, [253.0, 231.0, 37.0]),
    ];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let k = STOPS.iter().rposition(|s| s.0 <= t).unwrap_or(0).min(STOPS.len() - 2);
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    let f = (t - a.0) / (b.0 - a.0);
    let c = |i: usize| (a.1[i] + f * (b.1[i] - a.1[i])).round() as u8;
    (c(0), c(1), c(2))
}

/// Square map with per-cell value labels and a labelled color bar. Empty
/// cells are hatched grey.
pub fn heatmap(values: &[Vec<Option<f64>>], title: &str) -> String {
    let n = values.len().max(1);
    let cell = (420.0 / n as f64).min(48.0);
    let (x0, y0) = (50.0, 50.0);
    let side = cell * n as f64;
    let width = x0 + side + 140.0;
    let height = y0 + side + 50.0;
    let finite = values.iter().flatten().flatten().copied().filter(|v| v.is_finite());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in finite {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    let lo = lo.min(0.0);
    let hi = if hi > lo { hi } else { lo + 1.0 };

    let mut out = header(width, height);
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" {FONT}>{}</text>",
        x0 + side / 2.0,
        escape(title)
    );
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let (x, y) = (x0 + j as f64 * cell, y0 + i as f64 * cell);
            match v {
                Some(v) if v.is_finite() => {
                    let t = scale(*v, lo, hi, 0.0, 1.0);
                    let (r, g, b) = colormap(t);
                    let ink = if t > 0.6 { "black" } else { "white" };
                    let _ = writeln!(
                        out,
                        "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cell:.2}\" height=\"{cell:.2}\" fill=\"rgb({r},{g},{b})\"/>"
                    );
                    if cell >= 28.0 {
                        let _ = writeln!(
                            out,
                            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
                             font-size=\"9\" fill=\"{ink}\">{v:.2}</text>",
                            x + cell / 2.0,
                            y + cell / 2.0 + 3.0
                        );
                    }
                }
                _ => {
                    let _ = writeln!(
                        out,
                        "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cell:.2}\" height=\"{cell:.2}\" fill=\"#eee\" stroke=\"#bbb\"/>"
                    );
                }
            }
        }
    }
    for k in 0..n {
        let c = x0 + (k as f64 + 0.5) * cell;
        let _ = writeln!(out, "<text x=\"{c:.2}\" y=\"{:.2}\" text-anchor=\"middle\" {FONT}>{k}</text>", y0 + side + 16.0);
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" {FONT}>{k}</text>", x0 - 6.0, c + 4.0);
    }
    let bar_x = x0 + side + 30.0;
    let steps = 32;
    let step_h = side / steps as f64;
    for s in 0..steps {
        let t = 1.0 - (s as f64 + 0.5) / steps as f64;
        let (r, g, b) = colormap(t);
        let _ = writeln!(
            out,
            "<rect x=\"{bar_x:.2}\" y=\"{:.2}\" width=\"18\" height=\"{:.2}\" fill=\"rgb({r},{g},{b})\"/>",
            y0 + s as f64 * step_h,
            step_h + 0.5
        );
    }
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = scale(v, lo, hi, y0 + side, y0);
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" {FONT}>{v:.3}</text>", bar_x + 24.0, y + 4.0);
    }
    out.push_str("</svg>\n");
    out
}

/// In-plane arrows `(mx, my)` drawn at each site along a horizontal chain,
/// colored by `mz`.
pub fn arrow_plot(rows: &[TextureRow], title: &str) -> String {
    let spacing = 56.0;
    let (x0, yc) = (50.0, 110.0);
    let width = x0 * 2.0 + spacing * rows.len().saturating_sub(1) as f64;
    let mut out = header(width.max(200.0), 220.0);
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" {FONT}>{}</text>", width / 2.0, escape(title));
    let _ = writeln!(
        out,
        "<line x1=\"{x0:.2}\" y1=\"{yc:.2}\" x2=\"{:.2}\" y2=\"{yc:.2}\" stroke=\"#ccc\"/>",
        width - x0
    );
    for (k, r) in rows.iter().enumerate() {
        let cx = x0 + spacing * k as f64;
        let len = 24.0;
        let (dx, dy) = (r.mx * len, -r.my * len);
        let (tx, ty) = (cx + dx, yc + dy);
        let (r8, g8, b8) = colormap((r.mz + 1.0) / 2.0);
        let color = format!("rgb({r8},{g8},{b8})");
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{tx:.2}\" y2=\"{ty:.2}\" stroke=\"{color}\" stroke-width=\"2.5\"/>",
            cx - dx,
            yc - dy
        );
        let norm = (dx * dx + dy * dy).sqrt();
        if norm > 1e-9 {
            let (ux, uy) = (dx / norm, dy / norm);
            let head = 7.0;
            let _ = writeln!(
                out,
                "<polygon points=\"{tx:.2},{ty:.2} {:.2},{:.2} {:.2},{:.2}\" fill=\"{color}\"/>",
                tx - head * ux + 0.5 * head * uy,
                ty - head * uy - 0.5 * head * ux,
                tx - head * ux - 0.5 * head * uy,
                ty - head * uy + 0.5 * head * ux
            );
        }
        let _ = writeln!(out, "<text x=\"{cx:.2}\" y=\"{:.2}\" text-anchor=\"middle\" {FONT}>{}</text>", yc + 60.0, r.site);
        let _ = writeln!(
            out,
            "<text x=\"{cx:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">{:.2}</text>",
            yc + 76.0,
            r.norm()
        );
    }
    out.push_str("</svg>\n");
    out
}
