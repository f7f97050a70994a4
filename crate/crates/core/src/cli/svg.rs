//! Static log2-log2 convergence plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#555555",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// `(x, y)` pairs; `y` is plotted on a log2 scale, `x` as given (usually `m = log2 n`).
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    /// Filled or open circle markers.
    pub filled: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            dashed: false,
            filled: true,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }

    pub fn open(mut self) -> Self {
        self.filled = false;
        self
    }
}

fn plottable(s: &Series) -> impl Iterator<Item = (f64, f64)> + '_ {
    s.points
        .iter()
        .filter(|(x, y)| x.is_finite() && *y > 0.0 && y.is_finite())
        .map(|&(x, y)| (x, y.log2()))
}

fn bounds(all: &[&Series]) -> (f64, f64, f64, f64) {
    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    for s in all {
        for &(x, _) in &s.points {
            if x.is_finite() {
                xs = (xs.0.min(x), xs.1.max(x));
            }
        }
        for (_, y) in plottable(s) {
            ys = (ys.0.min(y), ys.1.max(y));
        }
    }
    if !xs.0.is_finite() {
        xs = (0.0, 1.0);
    }
    if !ys.0.is_finite() {
        ys = (-1.0, 1.0);
    }
    if xs.1 - xs.0 < 1.0 {
        xs = (xs.0 - 0.5, xs.1 + 0.5);
    }
    if ys.1 - ys.0 < 1.0 {
        ys = (ys.0 - 0.5, ys.1 + 0.5);
    }
    (xs.0, xs.1, ys.0.floor(), ys.1.ceil())
}

/// The SVG document for `series` (solid unless marked dashed) and `refs`
/// (always dashed, no markers).
pub fn render_svg(series: &[Series], refs: &[Series], title: &str) -> Result<String> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let all: Vec<&Series> = series.iter().chain(refs).collect();
    let (x0, x1, y0, y1) = bounds(&all);
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| MARGIN_T + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let w = &mut s;
    // writes into a String cannot fail
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        w,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    let ystep = ((y1 - y0) / 8.0).ceil().max(1.0);
    let mut y = y0;
    while y <= y1 + 1e-9 {
        let yy = py(y);
        let _ = writeln!(
            w,
            r##"<line x1="{MARGIN_L}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">2^{y}</text>"##,
            MARGIN_L + pw,
            MARGIN_L - 6.0,
            yy + 4.0
        );
        y += ystep;
    }
    let xstep = ((x1 - x0) / 10.0).ceil().max(1.0);
    let mut x = x0.ceil();
    while x <= x1 + 1e-9 {
        let xx = px(x);
        let _ = writeln!(
            w,
            r##"<line x1="{xx:.2}" y1="{MARGIN_T}" x2="{xx:.2}" y2="{:.2}" stroke="#eeeeee"/><text x="{xx:.2}" y="{:.2}" text-anchor="middle">{x}</text>"##,
            MARGIN_T + ph,
            MARGIN_T + ph + 16.0
        );
        x += xstep;
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">log2 n</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        w,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">RMSE (log2 scale)</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0
    );

    let mut legend_y = MARGIN_T + 10.0;
    let entries = series
        .iter()
        .map(|s| (s, false))
        .chain(refs.iter().map(|s| (s, true)));
    for (i, (ser, is_ref)) in entries.enumerate() {
        let color = if is_ref {
            "#000000"
        } else {
            PALETTE[i % PALETTE.len()]
        };
        let dash = if ser.dashed || is_ref {
            r#" stroke-dasharray="6,4""#
        } else {
            ""
        };
        let pts: Vec<(f64, f64)> = plottable(ser).map(|(x, y)| (px(x), py(y))).collect();
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
            let _ = writeln!(
                w,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                path.join(" ")
            );
        }
        if !is_ref {
            let fill = if ser.filled { color } else { "white" };
            for (a, b) in &pts {
                let _ = writeln!(
                    w,
                    r#"<circle cx="{a:.2}" cy="{b:.2}" r="3" fill="{fill}" stroke="{color}"/>"#
                );
            }
        }
        let lx = MARGIN_L + pw + 10.0;
        let _ = writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{legend_y:.2}" x2="{:.2}" y2="{legend_y:.2}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 24.0,
            lx + 30.0,
            legend_y + 4.0,
            escape(&ser.label)
        );
        legend_y += 18.0;
    }
    let _ = writeln!(w, "</svg>");
    Ok(s)
}

pub fn emit_svg(series: &[Series], refs: &[Series], title: &str, path: &Path) -> Result<()> {
    let doc = render_svg(series, refs, title)?;
    std::fs::write(path, doc)?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty() {
        assert!(matches!(render_svg(&[], &[], "t"), Err(Error::EmptySeries)));
    }

    #[test]
    fn constant_series_is_horizontal() {
        let s = Series::new("c", (0..5).map(|m| (m as f64, 0.25)).collect());
        let doc = render_svg(&[s], &[], "t").unwrap();
        let line = doc.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let ys: Vec<&str> = line
            .split('"')
            .nth(1)
            .unwrap()
            .split(' ')
            .map(|p| p.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(ys.len(), 5);
        assert!(ys.iter().all(|y| *y == ys[0]));
    }

    #[test]
    fn three_curves_two_refs() {
        let curve = |c: f64| {
            (0..8)
                .map(|m| (m as f64, c * 2f64.powi(-m)))
                .collect::<Vec<_>>()
        };
        let series = vec![
            Series::new("median E=32", curve(1.0)).dashed().open(),
            Series::new("median E=64", curve(0.5)),
            Series::new("plain", curve(2.0)).dashed(),
        ];
        let refs = vec![
            Series::new("n^-3/2", curve(3.0)),
            Series::new("n^-3/2 / sqrt 11", curve(0.9)),
        ];
        let doc = render_svg(&series, &refs, "a < b").unwrap();
        assert_eq!(doc.matches("<polyline").count(), 5);
        assert!(doc.matches(r#"stroke-dasharray="6,4"/>"#).count() >= 4);
        assert!(doc.contains("a &lt; b"));
        assert!(!doc.contains("href"));
        assert!(doc.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn zeros_are_skipped() {
        let s = Series::new("z", vec![(0.0, 0.0), (1.0, 0.0)]);
        let doc = render_svg(&[s], &[], "t").unwrap();
        assert!(!doc.contains("<polyline") && !doc.contains("NaN") && !doc.contains("inf"));
    }

    #[test]
    fn writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.svg");
        emit_svg(
            &[Series::new("a", vec![(0.0, 1.0), (1.0, 0.5)])],
            &[],
            "t",
            &p,
        )
        .unwrap();
        assert!(std::fs::read_to_string(&p).unwrap().starts_with("<svg"));
        let bad = dir.path().join("missing").join("a.svg");
        assert!(matches!(
            emit_svg(&[Series::new("a", vec![(0.0, 1.0)])], &[], "t", &bad),
            Err(Error::Io(_))
        ));
    }
}
