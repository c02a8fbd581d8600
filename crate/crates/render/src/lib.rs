//! Minimal SVG rendering helpers shared by the analysis crates: labeled
//! heatmaps, line charts, stacked-area charts, and 8x8 board heatmaps with
//! piece glyphs. Everything emits a self-contained `<svg>` string.

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Perceptually uniform colormap (viridis control points, linearly
/// interpolated).
pub fn viridis(t: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, f64, f64); 7] = [
        (68.0, 1.0, 84.0),
        (70.0, 50.0, 127.0),
        (54.0, 92.0, 141.0),
        (39.0, 127.0, 142.0),
        (31.0, 161.0, 135.0),
        (109.0, 205.0, 89.0),
        (253.0, 231.0, 37.0),
    ];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let (r0, g0, b0) = STOPS[i];
    let (r1, g1, b1) = STOPS[i + 1];
    (
        lerp(r0, r1, f).round() as u8,
        lerp(g0, g1, f).round() as u8,
        lerp(b0, b1, f).round() as u8,
    )
}

fn rgb((r, g, b): (u8, u8, u8)) -> String {
    format!("rgb({r},{g},{b})")
}

pub struct Heatmap<'a> {
    pub title: &'a str,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// `values[row][col]`; `None` renders as a hatched absent cell.
    pub values: Vec<Vec<Option<f64>>>,
    /// Color-scale range; `None` derives it from the data.
    pub range: Option<(f64, f64)>,
}

/// Labeled heatmap (rows x cols) on the viridis scale.
pub fn heatmap_svg(h: &Heatmap) -> String {
    let cell = 34.0;
    let left = 120.0;
    let top = 40.0;
    let rows = h.values.len();
    let cols = h.values.first().map_or(0, Vec::len);
    let (mut lo, mut hi) = h.range.unwrap_or((f64::INFINITY, f64::NEG_INFINITY));
    if h.range.is_none() {
        for row in &h.values {
            for v in row.iter().flatten() {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
        }
        if !lo.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        if hi <= lo {
            hi = lo + 1.0;
        }
    }
    let w = left + cols as f64 * cell + 60.0;
    let ht = top + rows as f64 * cell + 40.0;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{ht:.0}\" \
         viewBox=\"0 0 {w:.0} {ht:.0}\" font-family=\"monospace\" font-size=\"11\">\n"
    );
    s += &format!(
        "<text x=\"{left}\" y=\"20\" font-size=\"14\">{}</text>\n",
        esc(h.title)
    );
    for (r, row) in h.values.iter().enumerate() {
        let y = top + r as f64 * cell;
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            left - 6.0,
            y + cell * 0.65,
            esc(&h.row_labels[r])
        );
        for (c, v) in row.iter().enumerate() {
            let x = left + c as f64 * cell;
            match v {
                Some(v) => {
                    let t = (v - lo) / (hi - lo);
                    s += &format!(
                        "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell}\" height=\"{cell}\" \
                         fill=\"{}\"><title>{v:.4}</title></rect>\n",
                        rgb(viridis(t))
                    );
                }
                None => {
                    s += &format!(
                        "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell}\" height=\"{cell}\" \
                         fill=\"#ddd\"/><line x1=\"{x:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" \
                         y2=\"{:.1}\" stroke=\"#999\"/>\n",
                        x + cell,
                        y + cell
                    );
                }
            }
        }
    }
    for (c, label) in h.col_labels.iter().enumerate() {
        let x = left + c as f64 * cell + cell / 2.0;
        s += &format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            top + rows as f64 * cell + 16.0,
            esc(label)
        );
    }
    s += "</svg>\n";
    s
}

pub struct LineChart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub x: Vec<f64>,
    /// (series name, y values aligned with x).
    pub series: Vec<(String, Vec<f64>)>,
}

const PALETTE: [&str; 8] = [
    "#4269d0", "#efb118", "#ff725c", "#6cc5b0", "#3ca951", "#ff8ab7", "#a463f2", "#97bbf5",
];

/// Multi-series line chart with a legend.
pub fn line_chart_svg(c: &LineChart) -> String {
    let (w, h) = (640.0, 400.0);
    let (l, r, t, b) = (60.0, 150.0, 40.0, 50.0);
    let (pw, ph) = (w - l - r, h - t - b);
    let xmin = c.x.iter().cloned().fold(f64::INFINITY, f64::min);
    let xmax = c.x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for (_, ys) in &c.series {
        for y in ys {
            if y.is_finite() {
                ymin = ymin.min(*y);
                ymax = ymax.max(*y);
            }
        }
    }
    if !ymin.is_finite() {
        ymin = 0.0;
        ymax = 1.0;
    }
    if ymax <= ymin {
        ymax = ymin + 1.0;
    }
    let px = |x: f64| l + (x - xmin) / (xmax - xmin).max(1e-300) * pw;
    let py = |y: f64| t + ph - (y - ymin) / (ymax - ymin) * ph;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" font-family=\"monospace\" font-size=\"11\">\n"
    );
    s += &format!("<text x=\"{l}\" y=\"20\" font-size=\"14\">{}</text>\n", esc(c.title));
    s += &format!(
        "<rect x=\"{l}\" y=\"{t}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"#333\"/>\n"
    );
    s += &format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        l + pw / 2.0,
        h - 12.0,
        esc(c.x_label)
    );
    s += &format!(
        "<text x=\"14\" y=\"{:.1}\" transform=\"rotate(-90 14 {:.1})\" text-anchor=\"middle\">{}</text>\n",
        t + ph / 2.0,
        t + ph / 2.0,
        esc(c.y_label)
    );
    // Axis extremes.
    for (v, label) in [(ymin, format!("{ymin:.3}")), (ymax, format!("{ymax:.3}"))] {
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            l - 4.0,
            py(v) + 4.0,
            label
        );
    }
    for (i, (name, ys)) in c.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = c
            .x
            .iter()
            .zip(ys)
            .filter(|(_, y)| y.is_finite())
            .map(|(x, y)| format!("{:.1},{:.1}", px(*x), py(*y)))
            .collect();
        s += &format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
            pts.join(" ")
        );
        let ly = t + 14.0 * i as f64;
        s += &format!(
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"3\"/>\n",
            w - r + 8.0,
            w - r + 26.0
        );
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            w - r + 30.0,
            ly + 4.0,
            esc(name)
        );
    }
    s += "</svg>\n";
    s
}

pub struct StackedArea<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub x: Vec<f64>,
    /// Bottom-to-top layers; each aligned with x. Values are fractions.
    pub series: Vec<(String, Vec<f64>)>,
}

/// Stacked-area chart (series stacked bottom to top).
pub fn stacked_area_svg(c: &StackedArea) -> String {
    let (w, h) = (640.0, 400.0);
    let (l, r, t, b) = (60.0, 170.0, 40.0, 50.0);
    let (pw, ph) = (w - l - r, h - t - b);
    let xmin = c.x.iter().cloned().fold(f64::INFINITY, f64::min);
    let xmax = c.x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n = c.x.len();
    let mut top_total = vec![0.0f64; n];
    for (_, ys) in &c.series {
        for (acc, y) in top_total.iter_mut().zip(ys) {
            *acc += y;
        }
    }
    let ymax = top_total.iter().cloned().fold(1e-12f64, f64::max);
    let px = |x: f64| l + (x - xmin) / (xmax - xmin).max(1e-300) * pw;
    let py = |y: f64| t + ph - (y / ymax) * ph;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" font-family=\"monospace\" font-size=\"11\">\n"
    );
    s += &format!("<text x=\"{l}\" y=\"20\" font-size=\"14\">{}</text>\n", esc(c.title));
    s += &format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        l + pw / 2.0,
        h - 12.0,
        esc(c.x_label)
    );
    let mut base = vec![0.0f64; n];
    for (i, (name, ys)) in c.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let upper: Vec<f64> = base.iter().zip(ys).map(|(b, y)| b + y).collect();
        let mut pts = Vec::with_capacity(2 * n);
        for (x, y) in c.x.iter().zip(&upper) {
            pts.push(format!("{:.1},{:.1}", px(*x), py(*y)));
        }
        for (x, y) in c.x.iter().zip(&base).rev() {
            pts.push(format!("{:.1},{:.1}", px(*x), py(*y)));
        }
        s += &format!(
            "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.85\" stroke=\"none\"/>\n",
            pts.join(" ")
        );
        let ly = t + 14.0 * i as f64;
        s += &format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
            w - r + 8.0,
            ly - 8.0
        );
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            w - r + 22.0,
            ly + 1.0,
            esc(name)
        );
        base = upper;
    }
    s += &format!(
        "<rect x=\"{l}\" y=\"{t}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"#333\"/>\n"
    );
    s += "</svg>\n";
    s
}

/// One cell of a board heatmap: background intensity plus an optional piece
/// glyph with its own opacity.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoardCell {
    /// Background intensity in [0,1] on the viridis scale.
    pub intensity: f64,
    /// Unicode chess glyph (e.g. '\u{265E}') and opacity in [0,1].
    pub glyph: Option<(char, f64)>,
}

/// 8x8 board heatmap; `cells[rank][file]` with rank 7 drawn on top (White's
/// perspective, a1 bottom-left).
pub fn board_svg(title: &str, cells: &[[BoardCell; 8]; 8]) -> String {
    let cell = 40.0;
    let left = 30.0;
    let top = 40.0;
    let w = left + 8.0 * cell + 20.0;
    let h = top + 8.0 * cell + 30.0;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" \
         viewBox=\"0 0 {w:.0} {h:.0}\" font-family=\"monospace\" font-size=\"11\">\n"
    );
    s += &format!("<text x=\"{left}\" y=\"20\" font-size=\"14\">{}</text>\n", esc(title));
    for rank in 0..8usize {
        let y = top + (7 - rank) as f64 * cell;
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            left - 5.0,
            y + cell * 0.6,
            rank + 1
        );
        for file in 0..8usize {
            let x = left + file as f64 * cell;
            let c = &cells[rank][file];
            s += &format!(
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell}\" height=\"{cell}\" \
                 fill=\"{}\" stroke=\"#555\" stroke-width=\"0.5\"/>\n",
                rgb(viridis(c.intensity))
            );
            if let Some((glyph, opacity)) = c.glyph {
                s += &format!(
                    "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"26\" \
                     fill=\"#fff\" fill-opacity=\"{opacity:.3}\">{glyph}</text>\n",
                    x + cell / 2.0,
                    y + cell * 0.75
                );
            }
        }
    }
    for file in 0..8usize {
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            left + file as f64 * cell + cell / 2.0,
            top + 8.0 * cell + 16.0,
            (b'a' + file as u8) as char
        );
    }
    s += "</svg>\n";
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn viridis_endpoints() {
        assert_eq!(viridis(0.0), (68, 1, 84));
        assert_eq!(viridis(1.0), (253, 231, 37));
        assert_eq!(viridis(-3.0), viridis(0.0));
    }

    #[test]
    fn svgs_are_well_formed_enough() {
        let hm = heatmap_svg(&Heatmap {
            title: "grid",
            row_labels: vec!["a".into(), "b".into()],
            col_labels: vec!["1".into(), "2".into()],
            values: vec![vec![Some(0.0), None], vec![Some(0.5), Some(1.0)]],
            range: Some((0.0, 1.0)),
        });
        assert!(hm.starts_with("<svg") && hm.trim_end().ends_with("</svg>"));
        assert_eq!(hm.matches("<rect").count(), 4);

        let lc = line_chart_svg(&LineChart {
            title: "t",
            x_label: "x",
            y_label: "y",
            x: vec![0.0, 1.0, 2.0],
            series: vec![("s".into(), vec![0.0, 1.0, 0.5])],
        });
        assert!(lc.contains("<polyline"));

        let sa = stacked_area_svg(&StackedArea {
            title: "t",
            x_label: "x",
            x: vec![0.0, 1.0],
            series: vec![("a".into(), vec![0.5, 0.2]), ("b".into(), vec![0.5, 0.8])],
        });
        assert_eq!(sa.matches("<polygon").count(), 2);

        let mut cells = [[BoardCell::default(); 8]; 8];
        cells[0][4].glyph = Some(('\u{2654}', 0.8));
        let bs = board_svg("board", &cells);
        assert_eq!(bs.matches("<rect").count(), 64);
        assert!(bs.contains("\u{2654}"));
    }

    #[test]
    fn titles_are_escaped() {
        let hm = heatmap_svg(&Heatmap {
            title: "a < b & c",
            row_labels: vec!["r".into()],
            col_labels: vec!["c".into()],
            values: vec![vec![Some(0.5)]],
            range: None,
        });
        assert!(hm.contains("a &lt; b &amp; c"));
    }
}
