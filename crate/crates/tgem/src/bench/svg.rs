//! Standalone SVG box plots for the distance-per-horizon report. Plots are
//! rendered from precomputed five-number summaries so the crate carries no
//! plotting dependency; the CSV next to them stays the canonical output.

use std::fmt::Write as _;

use crate::bench::report::HorizonBucket;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 48.0;

/// One box per bucket, x ordered by horizon, y fixed to [0, 1] (the refined
/// elementary distance range).
pub fn boxplot(title: &str, buckets: &[&HorizonBucket]) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let n = buckets.len().max(1) as f64;
    let slot = plot_w / n;
    let box_w = (slot * 0.5).min(48.0);
    let y = |v: f64| MARGIN_TOP + (1.0 - v.clamp(0.0, 1.0)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // Axes and y grid lines at 0, 0.25, ..., 1.
    for i in 0..=4 {
        let v = i as f64 * 0.25;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT}" y1="{yy}" x2="{}" y2="{yy}" stroke="#dddddd"/>"##,
            WIDTH - MARGIN_RIGHT
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{v}</text>"#,
            MARGIN_LEFT - 6.0,
            yy + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{}" stroke="black"/>"#,
        HEIGHT - MARGIN_BOTTOM
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        HEIGHT - MARGIN_BOTTOM,
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM
    );

    for (i, b) in buckets.iter().enumerate() {
        let cx = MARGIN_LEFT + slot * (i as f64 + 0.5);
        let x0 = cx - box_w / 2.0;
        let x1 = cx + box_w / 2.0;
        // Whiskers.
        let _ = writeln!(
            s,
            r#"<line x1="{cx}" y1="{}" x2="{cx}" y2="{}" stroke="black"/>"#,
            y(b.max),
            y(b.q3)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{cx}" y1="{}" x2="{cx}" y2="{}" stroke="black"/>"#,
            y(b.q1),
            y(b.min)
        );
        for v in [b.min, b.max] {
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
                cx - box_w / 4.0,
                y(v),
                cx + box_w / 4.0,
                y(v)
            );
        }
        // Box and median.
        let _ = writeln!(
            s,
            r##"<rect x="{x0}" y="{}" width="{box_w}" height="{}" fill="#9ecae1" stroke="black"/>"##,
            y(b.q3),
            (y(b.q1) - y(b.q3)).max(0.5)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{x0}" y1="{}" x2="{x1}" y2="{}" stroke="black" stroke-width="2"/>"#,
            y(b.median),
            y(b.median)
        );
        // X label: horizon and sample count.
        let _ = writeln!(
            s,
            r#"<text x="{cx}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN_BOTTOM + 16.0,
            b.horizon
        );
        let _ = writeln!(
            s,
            r##"<text x="{cx}" y="{}" font-family="sans-serif" font-size="9" text-anchor="middle" fill="#555555">n={}</text>"##,
            HEIGHT - MARGIN_BOTTOM + 30.0,
            b.count
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">true horizon</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 6.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
