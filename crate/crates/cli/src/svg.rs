use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;

/// A bare line plot of y against x with the axis ranges printed in the corners.
pub fn line_plot(xs: &[f64], ys: &[f64], title: &str) -> String {
    let (x0, x1) = bounds(xs);
    let (_, y1) = bounds(ys);
    let y1 = if y1 > 0.0 { y1 } else { 1.0 };
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0).max(f64::MIN_POSITIVE) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - y / y1 * (HEIGHT - 2.0 * MARGIN);
    let mut points = String::new();
    for (&x, &y) in xs.iter().zip(ys) {
        let _ = write!(points, "{:.2},{:.2} ", sx(x), sy(y));
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<path d="M{m} {b} H{r} M{m} {b} V{m}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<polyline points="{}" stroke="steelblue" stroke-width="1.5" fill="none"/>"#,
        points.trim_end()
    );
    let label = |out: &mut String, x: f64, y: f64, anchor: &str, text: &str| {
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{y}" font-size="12" font-family="sans-serif" text-anchor="{anchor}">{text}</text>"#
        );
    };
    label(&mut out, MARGIN, HEIGHT - MARGIN + 16.0, "start", &format!("{x0:.4}"));
    label(&mut out, WIDTH - MARGIN, HEIGHT - MARGIN + 16.0, "end", &format!("{x1:.4}"));
    label(&mut out, MARGIN - 4.0, MARGIN, "end", &format!("{y1:.3}"));
    label(&mut out, WIDTH / 2.0, MARGIN / 2.0, "middle", &escape(title));
    out.push_str("</svg>\n");
    out
}

fn bounds(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_has_one_vertex_per_point() {
        let xs = [0.0, 0.5, 1.0];
        let svg = line_plot(&xs, &[0.0, 2.0, 0.0], "a < b");
        let poly = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(poly.matches(',').count(), 3);
        assert!(svg.contains("a &lt; b"));
    }
}
