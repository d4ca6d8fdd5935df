//! Minimal deterministic SVG plotting: fixed canvas, fixed color cycle,
//! no timestamps or generator metadata, coordinates rounded to 0.01 px —
//! identical inputs give byte-identical files, suitable for golden-file
//! diffing.

use std::fmt::Write as _;

use crate::CliError;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 50.0;

/// Fixed color cycle, by curve index.
pub const COLORS: [&str; 7] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf",
];

pub struct Plot {
    svg: String,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Plot {
    /// Start a plot over the given data ranges.
    pub fn new(
        x_range: (f64, f64),
        y_range: (f64, f64),
        x_label: &str,
        y_label: &str,
    ) -> Result<Plot, CliError> {
        let (x_min, x_max) = x_range;
        let (y_min, y_max) = y_range;
        if !(x_max > x_min && y_max > y_min) {
            return Err(CliError::Domain("empty plot range".into()));
        }
        let mut svg = String::new();
        let _ = write!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
             <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        );
        let mut plot = Plot {
            svg,
            x_min,
            x_max,
            y_min,
            y_max,
        };
        plot.axes(x_label, y_label);
        Ok(plot)
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let x0 = MARGIN_L;
        let x1 = WIDTH - MARGIN_R;
        let y0 = HEIGHT - MARGIN_B;
        let y1 = MARGIN_T;
        let _ = write!(
            self.svg,
            "<rect x=\"{x0}\" y=\"{y1}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"none\" stroke=\"black\"/>\n",
            x1 - x0,
            y0 - y1
        );
        // Five ticks per axis with numeric labels.
        for i in 0..=4 {
            let fx = self.x_min + (self.x_max - self.x_min) * i as f64 / 4.0;
            let fy = self.y_min + (self.y_max - self.y_min) * i as f64 / 4.0;
            let px = self.px(fx);
            let py = self.py(fy);
            let _ = write!(
                self.svg,
                "<line x1=\"{px:.2}\" y1=\"{y0}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n\
                 <text x=\"{px:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
                y0 + 5.0,
                y0 + 20.0,
                trim_label(fx)
            );
            let _ = write!(
                self.svg,
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{x0}\" y2=\"{py:.2}\" stroke=\"black\"/>\n\
                 <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
                x0 - 5.0,
                x0 - 8.0,
                py + 4.0,
                trim_label(fy)
            );
        }
        let _ = write!(
            self.svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
            (x0 + x1) / 2.0,
            HEIGHT - 10.0,
            xml_escape(x_label)
        );
        let _ = write!(
            self.svg,
            "<text x=\"16\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" \
             transform=\"rotate(-90 16 {:.2})\">{}</text>\n",
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            xml_escape(y_label)
        );
    }

    /// Add a polyline; out-of-range y values are clamped to the frame.
    pub fn line(&mut self, points: &[(f64, f64)], color: &str, dashed: bool) {
        if points.is_empty() {
            return;
        }
        let mut d = String::new();
        for &(x, y) in points {
            let y = y.clamp(self.y_min, self.y_max);
            let _ = write!(d, "{:.2},{:.2} ", self.px(x), self.py(y));
        }
        let dash = if dashed {
            " stroke-dasharray=\"6 4\""
        } else {
            ""
        };
        let _ = write!(
            self.svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>\n",
            d.trim_end()
        );
    }

    /// Filled cell of a map plot, in data coordinates.
    pub fn cell(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, color: &str, opacity: f64) {
        let (px0, px1) = (self.px(x0), self.px(x1));
        let (py0, py1) = (self.py(y1), self.py(y0));
        let _ = write!(
            self.svg,
            "<rect x=\"{px0:.2}\" y=\"{py0:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"{color}\" fill-opacity=\"{opacity}\" stroke=\"none\"/>\n",
            px1 - px0,
            py1 - py0
        );
    }

    /// Legend entry rendered in the top-right corner, by slot index.
    pub fn legend(&mut self, slot: usize, color: &str, dashed: bool, label: &str) {
        let x = WIDTH - MARGIN_R - 170.0;
        let y = MARGIN_T + 18.0 + 18.0 * slot as f64;
        let dash = if dashed {
            " stroke-dasharray=\"6 4\""
        } else {
            ""
        };
        let _ = write!(
            self.svg,
            "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
             stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>\n",
            x + 28.0,
            x + 34.0,
            y + 4.0,
            xml_escape(label)
        );
    }

    pub fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick label: short fixed-point form without trailing zeros.
fn trim_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}
