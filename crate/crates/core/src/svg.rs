// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Minimal self-contained SVG chart emitter.
//!
//! Every chart is a single `<svg>` document with inline styles and no
//! external references. Elements carry a `class` so tests and downstream
//! tooling can count cells, points and panels.

use std::fmt::Write as _;

use crate::stats::DensityGrid;

const PALETTE: [&str; 6] = ["#c0392b", "#2471a3", "#7d3c98", "#239b56", "#b9770e", "#566573"];

pub fn palette(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Raw SVG document builder.
pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Svg {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, class: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect class="{class}" x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            w.max(0.0),
            h.max(0.0)
        );
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="1"/>"#
        );
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, class: &str) {
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline class="{class}" points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str, class: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{fill}"/>"#
        );
    }

    pub fn text(&mut self, x: f64, y: f64, anchor: &str, size: f64, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="{size}" font-family="sans-serif">{}</text>"#,
            escape(content)
        );
    }

    pub fn open_group(&mut self, class: &str) {
        let _ = writeln!(self.body, r#"<g class="{class}">"#);
    }

    pub fn close_group(&mut self) {
        self.body.push_str("</g>\n");
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Scale {
    pub min: f64,
    pub max: f64,
    pub log10: bool,
}

impl Scale {
    pub fn linear(min: f64, max: f64) -> Self {
        let (min, max) = widen(min, max);
        Scale { min, max, log10: false }
    }

    /// Log scale over positive data; the bounds are given in data units.
    pub fn log(min: f64, max: f64) -> Self {
        let (min, max) = widen(min.max(f64::MIN_POSITIVE).log10(), max.max(f64::MIN_POSITIVE).log10());
        Scale { min, max, log10: true }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log10 { v.max(f64::MIN_POSITIVE).log10() } else { v };
        (v - self.min) / (self.max - self.min)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        (0..=4)
            .map(|i| {
                let t = self.min + (self.max - self.min) * i as f64 / 4.0;
                if self.log10 {
                    (10f64.powf(t), format!("1e{t:.1}"))
                } else {
                    (t, format!("{t:.2}"))
                }
            })
            .collect()
    }
}

fn widen(min: f64, max: f64) -> (f64, f64) {
    if !(min.is_finite() && max.is_finite()) {
        (0.0, 1.0)
    } else if max > min {
        (min, max)
    } else {
        (min - 0.5, max + 0.5)
    }
}

/// A plotting area inside an [`Svg`].
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub x: Scale,
    pub y: Scale,
}

impl Panel {
    pub fn px(&self, x: f64) -> f64 {
        self.left + self.x.unit(x) * self.width
    }

    pub fn py(&self, y: f64) -> f64 {
        self.top + (1.0 - self.y.unit(y)) * self.height
    }

    pub fn axes(&self, svg: &mut Svg, x_label: &str, y_label: &str) {
        let bottom = self.top + self.height;
        svg.line(self.left, bottom, self.left + self.width, bottom, "#333");
        svg.line(self.left, self.top, self.left, bottom, "#333");
        for (v, label) in self.x.ticks() {
            let x = self.px(v);
            svg.line(x, bottom, x, bottom + 4.0, "#333");
            svg.text(x, bottom + 16.0, "middle", 10.0, &label);
        }
        for (v, label) in self.y.ticks() {
            let y = self.py(v);
            svg.line(self.left - 4.0, y, self.left, y, "#333");
            svg.text(self.left - 6.0, y + 3.0, "end", 10.0, &label);
        }
        svg.text(self.left + self.width / 2.0, bottom + 34.0, "middle", 12.0, x_label);
        svg.text(self.left - 48.0, self.top + self.height / 2.0, "middle", 12.0, y_label);
    }
}

fn title(svg: &mut Svg, width: f64, text: &str) {
    svg.text(width / 2.0, 20.0, "middle", 14.0, text);
}

fn legend(svg: &mut Svg, x: f64, y: f64, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let yy = y + i as f64 * 16.0;
        svg.rect(x, yy - 9.0, 10.0, 10.0, palette(i), "legend");
        svg.text(x + 14.0, yy, "start", 11.0, name);
    }
}

/// Named `(x, y)` series.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let pts = series.iter().flat_map(|s| s.points.iter());
    pts.fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    )
}

fn sequential(t: f64) -> String {
    // white to dark blue
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * (1.0 - t) + 8.0 * t) as u8;
    let g = (255.0 * (1.0 - t) + 48.0 * t) as u8;
    let b = (255.0 * (1.0 - t) + 107.0 * t) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Joint density heatmap with bar marginals above (x) and to the right (y).
pub fn heatmap_with_marginals(grid: &DensityGrid, heading: &str, x_label: &str, y_label: &str) -> String {
    let (w, h) = (640.0, 640.0);
    let mut svg = Svg::new(w, h);
    title(&mut svg, w, heading);
    let nx = grid.x_edges.len() - 1;
    let ny = grid.y_edges.len() - 1;
    let main = Panel {
        left: 80.0,
        top: 150.0,
        width: 420.0,
        height: 420.0,
        x: Scale::linear(grid.x_edges[0], grid.x_edges[nx]),
        y: Scale::linear(grid.y_edges[0], grid.y_edges[ny]),
    };
    let max = grid.counts.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
    svg.open_group("heatmap");
    for i in 0..nx {
        for j in 0..ny {
            let c = grid.counts[i][j] as f64;
            let x0 = main.px(grid.x_edges[i]);
            let x1 = main.px(grid.x_edges[i + 1]);
            let y0 = main.py(grid.y_edges[j + 1]);
            let y1 = main.py(grid.y_edges[j]);
            let fill = sequential((c + 1.0).ln() / (max + 1.0).ln());
            svg.rect(x0, y0, x1 - x0, y1 - y0, &fill, "cell");
        }
    }
    svg.close_group();
    main.axes(&mut svg, x_label, y_label);

    let xmax = grid.x_marginal.iter().copied().max().unwrap_or(0).max(1) as f64;
    svg.open_group("marginal");
    for i in 0..nx {
        let x0 = main.px(grid.x_edges[i]);
        let x1 = main.px(grid.x_edges[i + 1]);
        let bar = 100.0 * grid.x_marginal[i] as f64 / xmax;
        svg.rect(x0, main.top - 10.0 - bar, x1 - x0, bar, palette(1), "bar");
    }
    svg.close_group();
    let ymax = grid.y_marginal.iter().copied().max().unwrap_or(0).max(1) as f64;
    svg.open_group("marginal");
    for j in 0..ny {
        let y0 = main.py(grid.y_edges[j + 1]);
        let y1 = main.py(grid.y_edges[j]);
        let bar = 100.0 * grid.y_marginal[j] as f64 / ymax;
        svg.rect(main.left + main.width + 10.0, y0, bar, y1 - y0, palette(1), "bar");
    }
    svg.close_group();
    svg.finish()
}

/// Scatter plot, optionally with a log10 y axis.
pub fn scatter(points: &[(f64, f64)], heading: &str, x_label: &str, y_label: &str, log_y: bool) -> String {
    let (w, h) = (640.0, 420.0);
    let mut svg = Svg::new(w, h);
    title(&mut svg, w, heading);
    let s = [Series { name: String::new(), points: points.to_vec() }];
    let (x0, x1, y0, y1) = bounds(&s);
    let panel = Panel {
        left: 80.0,
        top: 40.0,
        width: 520.0,
        height: 310.0,
        x: Scale::linear(x0, x1),
        y: if log_y { Scale::log(y0, y1) } else { Scale::linear(y0, y1) },
    };
    panel.axes(&mut svg, x_label, y_label);
    for &(x, y) in points {
        svg.circle(panel.px(x), panel.py(y), 3.0, palette(1), "point");
    }
    svg.finish()
}

fn series_chart(series: &[Series], heading: &str, x_label: &str, y_label: &str, log_y: bool, step: bool) -> String {
    let (w, h) = (720.0, 420.0);
    let mut svg = Svg::new(w, h);
    title(&mut svg, w, heading);
    let (x0, x1, y0, y1) = bounds(series);
    let (y0, y1) = if step { (0.0, 1.0) } else { (y0, y1) };
    let panel = Panel {
        left: 80.0,
        top: 40.0,
        width: 480.0,
        height: 310.0,
        x: Scale::linear(x0, x1),
        y: if log_y { Scale::log(y0, y1) } else { Scale::linear(y0, y1) },
    };
    panel.axes(&mut svg, x_label, y_label);
    for (i, s) in series.iter().enumerate() {
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for (k, &(x, y)) in s.points.iter().enumerate() {
            if step {
                let prev = if k == 0 { 0.0 } else { s.points[k - 1].1 };
                pts.push((panel.px(x), panel.py(prev)));
            }
            pts.push((panel.px(x), panel.py(y)));
        }
        svg.polyline(&pts, palette(i), "series");
        if !step {
            for &(x, y) in &s.points {
                svg.circle(panel.px(x), panel.py(y), 2.5, palette(i), "point");
            }
        }
    }
    let names: Vec<&str> = series.iter().map(|s| s.name.as_str()).collect();
    legend(&mut svg, 580.0, 60.0, &names);
    svg.finish()
}

/// Line chart with a marker per point.
pub fn line_chart(series: &[Series], heading: &str, x_label: &str, y_label: &str, log_y: bool) -> String {
    series_chart(series, heading, x_label, y_label, log_y, false)
}

/// Step-function CDF chart; each series holds `(x, F(x))` ECDF points.
pub fn cdf_chart(series: &[Series], heading: &str, x_label: &str) -> String {
    series_chart(series, heading, x_label, "CDF", false, true)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Box-and-whisker chart (min, quartiles, max). Each group is
/// `(label, series index for colour, values)`.
pub fn box_chart(groups: &[(String, usize, Vec<f64>)], heading: &str, x_label: &str, y_label: &str) -> String {
    let (w, h) = (720.0, 420.0);
    let mut svg = Svg::new(w, h);
    title(&mut svg, w, heading);
    let all = groups.iter().flat_map(|g| g.2.iter().copied());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let panel = Panel {
        left: 80.0,
        top: 40.0,
        width: 600.0,
        height: 310.0,
        x: Scale::linear(0.0, groups.len().max(1) as f64),
        y: Scale::linear(lo, hi),
    };
    panel.axes(&mut svg, x_label, y_label);
    let slot = panel.width / groups.len().max(1) as f64;
    for (k, (label, colour, values)) in groups.iter().enumerate() {
        let cx = panel.left + slot * (k as f64 + 0.5);
        if k % 2 == 0 {
            svg.text(cx, panel.top + panel.height + 48.0, "middle", 9.0, label);
        }
        if values.is_empty() {
            continue;
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let q = |p| panel.py(quantile(&sorted, p));
        let half = (slot * 0.3).max(1.0);
        svg.open_group("box");
        svg.line(cx, q(0.0), cx, q(1.0), palette(*colour));
        svg.rect(cx - half, q(0.75), 2.0 * half, q(0.25) - q(0.75), palette(*colour), "iqr");
        svg.line(cx - half, q(0.5), cx + half, q(0.5), "#000");
        svg.close_group();
    }
    svg.finish()
}
