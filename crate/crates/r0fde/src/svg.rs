//! Minimal static SVG line charts (polylines and axes, no dependencies).

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

const W: f64 = 800.0;
const H: f64 = 480.0;
const MARGIN: f64 = 50.0;

/// One polyline per series; all series share the x samples.
pub fn line_chart(title: &str, x: &[f64], series: &[(String, Vec<f64>)]) -> String {
    assert!(!x.is_empty());
    let x_min = x.first().copied().unwrap();
    let x_max = x.last().copied().unwrap().max(x_min + 1e-12);
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, ys) in series {
        for &y in ys {
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if !y_min.is_finite() {
        y_min = 0.0;
        y_max = 1.0;
    }
    if y_max - y_min < 1e-12 {
        y_max = y_min + 1.0;
    }
    let sx = |v: f64| MARGIN + (v - x_min) / (x_max - x_min) * (W - 2.0 * MARGIN);
    let sy = |v: f64| H - MARGIN - (v - y_min) / (y_max - y_min) * (H - 2.0 * MARGIN);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
        W / 2.0,
        xml_escape(title)
    ));
    // Axes.
    out.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    ));
    out.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        t = MARGIN,
        b = H - MARGIN
    ));
    // Corner tick labels.
    for (v, xpix) in [(x_min, MARGIN), (x_max, W - MARGIN)] {
        out.push_str(&format!(
            "<text x=\"{xpix}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{v:.4}</text>\n",
            H - MARGIN + 16.0
        ));
    }
    for (v, ypix) in [(y_min, H - MARGIN), (y_max, MARGIN)] {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{ypix}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{v:.4}</text>\n",
            MARGIN - 6.0
        ));
    }
    for (idx, (name, ys)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let pts: Vec<String> = x
            .iter()
            .zip(ys)
            .map(|(&xv, &yv)| format!("{:.2},{:.2}", sx(xv), sy(yv)))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
            W - MARGIN + 4.0,
            MARGIN + 16.0 * idx as f64,
            xml_escape(name)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emits_wellformed_polylines() {
        let x = vec![0.0, 0.5, 1.0];
        let series = vec![("u1".to_string(), vec![0.0, 1.0, 0.5])];
        let svg = line_chart("demo", &x, &series);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<polyline"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
