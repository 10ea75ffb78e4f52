//! Minimal self-contained SVG plots: axes, ticks, polylines, point markers
//! and heatmap rectangles, with no external assets.

pub struct Series<'a> {
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    pub label: &'a str,
    pub color: &'a str,
    pub line: bool,
    pub markers: bool,
}

pub struct Axes<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub x_log: bool,
    pub y_log: bool,
}

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f",
];

const W: f64 = 720.0;
const H: f64 = 480.0;
const ML: f64 = 78.0;
const MT: f64 = 36.0;
const MB: f64 = 54.0;

/// Affine map from data to screen coordinates, optionally through ln.
struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
    a: f64,
    b: f64,
}

impl Scale {
    fn new(lo0: f64, hi0: f64, log: bool, s0: f64, s1: f64) -> Scale {
        let (mut lo, mut hi) = (lo0, hi0);
        if log {
            let (mut l0, mut l1) = (lo.ln(), hi.ln());
            if !(l1 > l0) {
                l0 -= 0.5;
                l1 += 0.5;
            }
            let pad = 0.04 * (l1 - l0);
            lo = (l0 - pad).exp();
            hi = (l1 + pad).exp();
        } else {
            if !(hi > lo) {
                let d = lo.abs().max(1.0) * 0.05;
                lo -= d;
                hi += d;
            }
            let pad = 0.04 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        let (t0, t1) = if log { (lo.ln(), hi.ln()) } else { (lo, hi) };
        let a = (s1 - s0) / (t1 - t0);
        Scale {
            lo,
            hi,
            log,
            a,
            b: s0 - a * t0,
        }
    }

    fn ok(&self, v: f64) -> bool {
        v.is_finite() && (!self.log || v > 0.0)
    }

    fn map(&self, v: f64) -> f64 {
        let t = if self.log { v.ln() } else { v };
        self.a * t + self.b
    }
}

fn nice_step(raw: f64) -> f64 {
    let e = raw.abs().log10().floor();
    let base = 10f64.powf(e);
    let m = raw / base;
    let f = if m <= 1.0 {
        1.0
    } else if m <= 2.0 {
        2.0
    } else if m <= 5.0 {
        5.0
    } else {
        10.0
    };
    f * base
}

fn ticks(sc: &Scale) -> Vec<(f64, String)> {
    if sc.log {
        let k0 = sc.lo.log10().ceil() as i32;
        let k1 = sc.hi.log10().floor() as i32;
        if k1 >= k0 {
            let stride = ((k1 - k0) as usize / 6) + 1;
            return (k0..=k1)
                .step_by(stride)
                .map(|k| (10f64.powi(k), format!("1e{k}")))
                .collect();
        }
    }
    let step = nice_step((sc.hi - sc.lo) / 5.0);
    let dec = (-step.log10().floor()).max(0.0) as usize;
    let mut v = (sc.lo / step).ceil() * step;
    let mut out = Vec::new();
    while v <= sc.hi + 1e-9 * step {
        let val = if v.abs() < 1e-12 * step { 0.0 } else { v };
        out.push((val, format!("{val:.dec$}")));
        v += step;
    }
    out
}

fn open_svg(out: &mut String) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"monospace\" font-size=\"12\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
}

fn frame(out: &mut String, ax: &Axes, sx: &Scale, sy: &Scale, right: f64) {
    let (top, bottom) = (MT, H - MB);
    out.push_str(&format!(
        "<rect x=\"{ML:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#444\"/>\n",
        right - ML,
        bottom - top
    ));
    for (v, label) in ticks(sx) {
        if v < sx.lo || v > sx.hi {
            continue;
        }
        let px = sx.map(v);
        out.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{bottom:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#444\"/>\n\
             <text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#222\">{label}</text>\n",
            bottom + 5.0,
            bottom + 19.0
        ));
    }
    for (v, label) in ticks(sy) {
        if v < sy.lo || v > sy.hi {
            continue;
        }
        let py = sy.map(v);
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{ML:.2}\" y2=\"{py:.2}\" stroke=\"#444\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" fill=\"#222\">{label}</text>\n",
            ML - 5.0,
            ML - 8.0,
            py + 4.0
        ));
    }
    let xc = (ML + right) / 2.0;
    out.push_str(&format!(
        "<text x=\"{xc:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#000\">{}</text>\n\
         <text x=\"{xc:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#000\">{}</text>\n\
         <text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\" fill=\"#000\">{}</text>\n",
        MT - 14.0,
        ax.title,
        H - 14.0,
        ax.x_label,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        ax.y_label
    ));
}

fn draw_series(out: &mut String, sx: &Scale, sy: &Scale, s: &Series) {
    if s.line {
        let mut seg: Vec<String> = Vec::new();
        for (&x, &y) in s.xs.iter().zip(s.ys) {
            if sx.ok(x) && sy.ok(y) {
                seg.push(format!("{:.2},{:.2}", sx.map(x), sy.map(y)));
            } else if seg.len() >= 2 {
                out.push_str(&format!(
                    "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\" points=\"{}\"/>\n",
                    s.color,
                    seg.join(" ")
                ));
                seg.clear();
            } else {
                seg.clear();
            }
        }
        if seg.len() >= 2 {
            out.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\" points=\"{}\"/>\n",
                s.color,
                seg.join(" ")
            ));
        }
    }
    if s.markers {
        for (&x, &y) in s.xs.iter().zip(s.ys) {
            if sx.ok(x) && sy.ok(y) {
                out.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.4\" fill=\"{}\"/>\n",
                    sx.map(x),
                    sy.map(y),
                    s.color
                ));
            }
        }
    }
}

pub fn line_plot(ax: &Axes, series: &[Series]) -> String {
    let right = W - 18.0;
    let collect = |log: bool, pick_x: bool| -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in series {
            let vals = if pick_x { s.xs } else { s.ys };
            for &v in vals {
                if v.is_finite() && (!log || v > 0.0) {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        if !lo.is_finite() || !hi.is_finite() {
            if log {
                (0.1, 1.0)
            } else {
                (0.0, 1.0)
            }
        } else {
            (lo, hi)
        }
    };
    let (xlo, xhi) = collect(ax.x_log, true);
    let (ylo, yhi) = collect(ax.y_log, false);
    let sx = Scale::new(xlo, xhi, ax.x_log, ML, right);
    let sy = Scale::new(ylo, yhi, ax.y_log, H - MB, MT);

    let mut out = String::new();
    open_svg(&mut out);
    frame(&mut out, ax, &sx, &sy, right);
    for s in series {
        draw_series(&mut out, &sx, &sy, s);
    }
    let labeled: Vec<&Series> = series.iter().filter(|s| !s.label.is_empty()).collect();
    if !labeled.is_empty() && labeled.len() <= 10 {
        for (i, s) in labeled.iter().enumerate() {
            let y = MT + 16.0 + 16.0 * i as f64;
            out.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{}\" stroke-width=\"2\"/>\n\
                 <text x=\"{:.2}\" y=\"{:.2}\" fill=\"#222\">{}</text>\n",
                right - 168.0,
                right - 146.0,
                s.color,
                right - 140.0,
                y + 4.0,
                s.label
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

fn cell_edges(centers: &[f64]) -> Vec<f64> {
    let n = centers.len();
    if n == 1 {
        let c = centers[0];
        let half = if c == 0.0 { 0.5 } else { c.abs() * 0.5 };
        return vec![c - half, c + half];
    }
    let mut e = Vec::with_capacity(n + 1);
    e.push(centers[0] - (centers[1] - centers[0]) / 2.0);
    for w in centers.windows(2) {
        e.push((w[0] + w[1]) / 2.0);
    }
    e.push(centers[n - 1] + (centers[n - 1] - centers[n - 2]) / 2.0);
    e
}

fn ramp(t: f64) -> String {
    let stops: [(f64, [f64; 3]); 3] = [
        (0.0, [20.0, 44.0, 108.0]),
        (0.5, [0.0, 146.0, 146.0]),
        (1.0, [250.0, 224.0, 66.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    let (lo, hi) = if t <= 0.5 {
        (stops[0], stops[1])
    } else {
        (stops[1], stops[2])
    };
    let u = (t - lo.0) / (hi.0 - lo.0);
    let c: Vec<String> = (0..3)
        .map(|k| format!("{}", (lo.1[k] + u * (hi.1[k] - lo.1[k])).round() as i64))
        .collect();
    format!("rgb({},{},{})", c[0], c[1], c[2])
}

/// Heatmap over a rectangular grid of cell centers; `cells[iy * xs.len() + ix]`.
/// Screen axes are linear; the color scale switches to log when the data
/// span more than two decades of positive values.
pub fn heatmap(ax: &Axes, xs: &[f64], ys: &[f64], cells: &[f64]) -> String {
    let right = W - 96.0;
    let ex = cell_edges(xs);
    let ey = cell_edges(ys);
    let sx = Scale::new(ex[0], ex[ex.len() - 1], false, ML, right);
    let sy = Scale::new(ey[0], ey[ey.len() - 1], false, H - MB, MT);

    let finite: Vec<f64> = cells.iter().copied().filter(|v| v.is_finite()).collect();
    let vmin = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_color = vmin > 0.0 && vmax / vmin > 100.0;
    let norm = |v: f64| -> f64 {
        if !v.is_finite() || vmin >= vmax {
            return 0.0;
        }
        if log_color {
            (v.max(vmin).ln() - vmin.ln()) / (vmax.ln() - vmin.ln())
        } else {
            (v - vmin) / (vmax - vmin)
        }
    };

    let mut out = String::new();
    open_svg(&mut out);
    for iy in 0..ys.len() {
        for ix in 0..xs.len() {
            let v = cells[iy * xs.len() + ix];
            let fill = if v.is_finite() {
                ramp(norm(v))
            } else {
                "#bbbbbb".to_string()
            };
            let (x0, x1) = (sx.map(ex[ix]), sx.map(ex[ix + 1]));
            let (y0, y1) = (sy.map(ey[iy + 1]), sy.map(ey[iy]));
            out.push_str(&format!(
                "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>\n",
                x1 - x0,
                y1 - y0
            ));
        }
    }
    frame(&mut out, ax, &sx, &sy, right);
    // colorbar
    let (bx, bw) = (W - 74.0, 16.0);
    let (top, bottom) = (MT, H - MB);
    let nstrip = 32;
    for k in 0..nstrip {
        let t = (k as f64 + 0.5) / nstrip as f64;
        let y1 = bottom - (bottom - top) * k as f64 / nstrip as f64;
        let y0 = bottom - (bottom - top) * (k + 1) as f64 / nstrip as f64;
        out.push_str(&format!(
            "<rect x=\"{bx:.2}\" y=\"{y0:.2}\" width=\"{bw:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
            y1 - y0,
            ramp(t)
        ));
    }
    out.push_str(&format!(
        "<rect x=\"{bx:.2}\" y=\"{top:.2}\" width=\"{bw:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#444\"/>\n\
         <text x=\"{bx:.2}\" y=\"{:.2}\" fill=\"#222\">{:.3e}</text>\n\
         <text x=\"{bx:.2}\" y=\"{:.2}\" fill=\"#222\">{:.3e}</text>\n",
        bottom - top,
        bottom + 16.0,
        vmin,
        top - 6.0,
        vmax
    ));
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_self_contained() {
        let xs = [1.0, 2.0, 3.0];
        let ys = [0.1, 0.4, 0.9];
        let s = Series {
            xs: &xs,
            ys: &ys,
            label: "demo",
            color: PALETTE[0],
            line: true,
            markers: true,
        };
        let ax = Axes {
            title: "t",
            x_label: "x",
            y_label: "y",
            x_log: false,
            y_log: false,
        };
        let svg = line_plot(&ax, &[s]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<polyline"));
        assert!(!svg.contains("href"));
    }

    #[test]
    fn log_axes_skip_nonpositive_points() {
        let xs = [0.0, 1.0, 10.0, 100.0];
        let ys = [1.0, 2.0, 4.0, 8.0];
        let s = Series {
            xs: &xs,
            ys: &ys,
            label: "",
            color: PALETTE[1],
            line: true,
            markers: false,
        };
        let ax = Axes {
            title: "",
            x_label: "x",
            y_label: "y",
            x_log: true,
            y_log: true,
        };
        let svg = line_plot(&ax, &[s]);
        assert!(svg.contains("1e1"));
    }

    #[test]
    fn heatmap_draws_every_cell() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 1.0];
        let cells = [0.0, 0.5, 1.0, 1.5, 2.0, f64::NAN];
        let ax = Axes {
            title: "grid",
            x_label: "a",
            y_label: "b",
            x_log: false,
            y_log: false,
        };
        let svg = heatmap(&ax, &xs, &ys, &cells);
        assert_eq!(svg.matches("<rect").count(), 6 + 32 + 3);
        assert!(svg.contains("#bbbbbb"));
    }
}
