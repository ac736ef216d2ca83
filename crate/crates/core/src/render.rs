//! Deterministic SVG scatter plots of 2D projections.

use std::fmt::Write as _;

use crate::dataset::encode_labels;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Colour-blind friendly default palette, cycled when classes outnumber it.
pub const DEFAULT_PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    pub width: u32,
    pub height: u32,
    pub point_radius: f64,
    pub palette: Vec<String>,
    /// Caption drawn along the top edge.
    pub annotation: Option<String>,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            width: 480,
            height: 480,
            point_radius: 3.0,
            palette: DEFAULT_PALETTE.iter().map(|c| c.to_string()).collect(),
            annotation: None,
        }
    }
}

impl RenderSpec {
    pub fn with_annotation(mut self, text: impl Into<String>) -> Self {
        self.annotation = Some(text.into());
        self
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders one circle per row, coloured by class in order of first appearance.
///
/// The data extent is fitted into the viewport (minus a margin) with a single
/// scale factor so aspect ratio is preserved.
pub fn render_scatter(coords: &Matrix, labels: &[String], spec: &RenderSpec) -> Result<String> {
    let n = coords.nrows();
    if coords.ncols() != 2 || labels.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} coordinates with {} labels",
            n,
            coords.ncols(),
            labels.len()
        )));
    }
    if spec.width < 64 || spec.height < 64 {
        return Err(Error::InvalidArgument(
            "viewport must be at least 64x64".into(),
        ));
    }
    if spec.palette.is_empty() {
        return Err(Error::InvalidArgument("palette is empty".into()));
    }
    let (w, h) = (spec.width as f64, spec.height as f64);
    let margin = 10.0 + spec.point_radius;
    let top = if spec.annotation.is_some() {
        margin + 14.0
    } else {
        margin
    };

    let xs = coords.column(0);
    let ys = coords.column(1);
    let (xmin, xmax) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let (ymin, ymax) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let avail_w = w - 2.0 * margin;
    let avail_h = h - top - margin;
    let span = (xmax - xmin).max(0.0);
    let vspan = (ymax - ymin).max(0.0);
    let factor = match (span > 0.0, vspan > 0.0) {
        (true, true) => (avail_w / span).min(avail_h / vspan),
        (true, false) => avail_w / span,
        (false, true) => avail_h / vspan,
        (false, false) => 0.0,
    };
    let cx = margin + avail_w / 2.0;
    let cy = top + avail_h / 2.0;
    let (mx, my) = ((xmin + xmax) / 2.0, (ymin + ymax) / 2.0);

    let classes = encode_labels(labels);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        spec.width, spec.height, spec.width, spec.height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some(text) = &spec.annotation {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
            margin,
            margin + 4.0,
            escape(text)
        );
    }
    for (i, &class) in classes.iter().enumerate() {
        // y grows downward in SVG
        let px = cx + (xs[i] - mx) * factor;
        let py = cy - (ys[i] - my) * factor;
        let fill = &spec.palette[class % spec.palette.len()];
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{}" fill="{}"><title>{}</title></circle>"#,
            px,
            py,
            spec.point_radius,
            escape(fill),
            escape(&labels[i])
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
