//! Hand-written SVG charts: a bar histogram and an axis-less labelled
//! scatter. Coordinates are printed with fixed precision so output is
//! byte-stable.

use std::collections::BTreeMap;
use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

/// Bar chart of quotation counts per length. An empty histogram yields a
/// titled chart with a "no quotations" note.
pub fn histogram_svg(h: &BTreeMap<usize, usize>, title: &str) -> String {
    let mut s = open(title);
    let (Some((&lo, _)), Some((&hi, _))) = (h.first_key_value(), h.last_key_value()) else {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">no quotations</text>"#,
            WIDTH / 2.0,
            HEIGHT / 2.0
        );
        s.push_str("</svg>\n");
        return s;
    };
    let max = h.values().copied().max().unwrap_or(1).max(1) as f64;
    let bins = (hi - lo + 1) as f64;
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let bar_w = plot_w / bins;
    let base = HEIGHT - MARGIN;
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{base}" x2="{:.2}" y2="{base}" stroke="black"/>"#,
        WIDTH - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{:.2}" font-size="11">max {}</text>"#,
        MARGIN - 6.0,
        max as usize
    );
    let label_every = ((bins / 20.0).ceil() as usize).max(1);
    for (&len, &count) in h {
        let i = (len - lo) as f64;
        let bh = plot_h * count as f64 / max;
        let x = MARGIN + i * bar_w;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{bh:.2}" fill="{}"><title>length {len}: {count}</title></rect>"#,
            base - bh,
            (bar_w - 1.0).max(0.5),
            PALETTE[0]
        );
        if (len - lo) % label_every == 0 {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{len}</text>"#,
                x + bar_w / 2.0,
                base + 14.0
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{:.2}" text-anchor="middle" font-size="12">quotation length (words)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 8.0
    );
    s.push_str("</svg>\n");
    s
}

/// One scatter point: label, position, 1-based cluster for the colour.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatterPoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub cluster: usize,
}

/// Labelled scatter without axes: only relative positions matter. The
/// legend maps colours to `cluster_names[c - 1]`.
pub fn scatter_svg(points: &[ScatterPoint], cluster_names: &[String], title: &str) -> String {
    let mut s = open(title);
    let finite = |v: f64| if v.is_finite() { v } else { 0.0 };
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in points {
        x0 = x0.min(finite(p.x));
        x1 = x1.max(finite(p.x));
        y0 = y0.min(finite(p.y));
        y1 = y1.max(finite(p.y));
    }
    let span = |a: f64, b: f64| if b > a { b - a } else { 1.0 };
    let (sx, sy) = (span(x0, x1), span(y0, y1));
    let plot_w = WIDTH - 2.0 * MARGIN - 80.0;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    for p in points {
        let cx = MARGIN + (finite(p.x) - x0) / sx * plot_w;
        // SVG y grows downward
        let cy = HEIGHT - MARGIN - (finite(p.y) - y0) / sy * plot_h;
        let colour = PALETTE[(p.cluster.max(1) - 1) % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{colour}"/><text x="{:.2}" y="{:.2}" font-size="10" fill="{colour}">{}</text>"#,
            cx + 6.0,
            cy + 3.5,
            escape(&p.label)
        );
    }
    for (i, name) in cluster_names.iter().enumerate() {
        let y = MARGIN + 18.0 * i as f64;
        let colour = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="{colour}"/><text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
            WIDTH - MARGIN - 50.0,
            y - 9.0,
            WIDTH - MARGIN - 35.0,
            y,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_bars() {
        let h = BTreeMap::from([(5, 10), (6, 4), (9, 1)]);
        let svg = histogram_svg(&h, "Lengths");
        assert_eq!(svg.matches("<rect x=").count(), 3);
        assert!(svg.contains("length 5: 10"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(histogram_svg(&BTreeMap::new(), "t").contains("no quotations"));
    }

    #[test]
    fn scatter_labels_and_escaping() {
        let pts = vec![
            ScatterPoint { label: "Song of Songs".into(), x: 0.0, y: 0.0, cluster: 1 },
            ScatterPoint { label: "A&B".into(), x: 1.0, y: -1.0, cluster: 2 },
            ScatterPoint { label: "Same".into(), x: 1.0, y: -1.0, cluster: 2 },
        ];
        let svg = scatter_svg(&pts, &["OT1".into(), "OT2".into()], "PCA");
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("A&amp;B"));
        assert!(svg.contains(">OT2</text>"));
        assert!(!svg.contains("NaN"));
        assert_eq!(svg, scatter_svg(&pts, &["OT1".into(), "OT2".into()], "PCA"));
    }

    #[test]
    fn degenerate_scatter() {
        let pts = vec![ScatterPoint { label: "x".into(), x: f64::NAN, y: 2.0, cluster: 1 }];
        let svg = scatter_svg(&pts, &[], "t");
        assert!(!svg.contains("NaN"));
    }
}
