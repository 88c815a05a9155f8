//! Minimal SVG 1.1 line chart: one polyline, axes, and min/max tick labels.

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 60.0;

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_y: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Points with non-finite coordinates, or non-positive `y` on a log axis,
/// are skipped.
pub fn line_chart(chart: &Chart<'_>, points: &[(f64, f64)]) -> String {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!chart.log_y || *y > 0.0))
        .map(|&(x, y)| (x, if chart.log_y { y.log10() } else { y }))
        .collect();

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str(&format!("<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
        W / 2.0,
        escape(chart.title)
    ));
    let (x0, x1, y0, y1) = (PAD, W - PAD / 2.0, H - PAD, PAD);
    s.push_str(&format!(
        "<polyline points=\"{x0},{y1} {x0},{y0} {x1},{y0}\" fill=\"none\" stroke=\"black\"/>\n"
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
        (x0 + x1) / 2.0,
        H - 15.0,
        escape(chart.x_label)
    ));
    let y_label = if chart.log_y {
        format!("log10 {}", chart.y_label)
    } else {
        chart.y_label.to_string()
    };
    s.push_str(&format!(
        "<text x=\"15\" y=\"{}\" transform=\"rotate(-90 15 {})\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&y_label)
    ));

    if !pts.is_empty() {
        let bounds = |f: fn(&(f64, f64)) -> f64| {
            pts.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (xmin, xmax) = bounds(|p| p.0);
        let (ymin, ymax) = bounds(|p| p.1);
        let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
        let (sx, sy) = (span(xmin, xmax), span(ymin, ymax));
        let coords: Vec<String> = pts
            .iter()
            .map(|(x, y)| {
                let px = x0 + (x - xmin) / sx * (x1 - x0);
                let py = y0 - (y - ymin) / sy * (y0 - y1);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        s.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
            coords.join(" ")
        ));
        let tick = |v: f64| format!("{v:.3e}");
        for (text, x, y, anchor) in [
            (tick(xmin), x0, y0 + 16.0, "start"),
            (tick(xmax), x1, y0 + 16.0, "end"),
            (tick(ymin), x0 - 4.0, y0, "end"),
            (tick(ymax), x0 - 4.0, y1 + 4.0, "end"),
        ] {
            s.push_str(&format!(
                "<text x=\"{x}\" y=\"{y}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"10\">{text}</text>\n"
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}
