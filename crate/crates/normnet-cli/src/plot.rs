//! Minimal line-plot rendering to SVG and PNG without external font or
//! plotting dependencies. SVG text uses native `<text>` elements; PNG text
//! uses the small pixel font in [`glyphs`].

use std::path::Path;

use anyhow::Context;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotFormat {
    Svg,
    Png,
}

impl std::str::FromStr for PlotFormat {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svg" => Ok(PlotFormat::Svg),
            "png" => Ok(PlotFormat::Png),
            other => anyhow::bail!("unknown plot format `{other}` (expected svg or png)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Curve {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub dashed: bool,
    pub color: (u8, u8, u8),
}

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub curves: Vec<Curve>,
}

const WIDTH: usize = 880;
const HEIGHT: usize = 640;
const MARGIN_L: f64 = 90.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 70.0;

pub const PALETTE: [(u8, u8, u8); 6] = [
    (31, 119, 180),
    (255, 127, 14),
    (44, 160, 44),
    (214, 39, 40),
    (148, 103, 189),
    (23, 84, 88),
];

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn from_curves(curves: &[Curve]) -> anyhow::Result<Frame> {
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for c in curves {
            anyhow::ensure!(
                c.xs.len() == c.ys.len() && !c.xs.is_empty(),
                "curve `{}` needs equal-length nonempty x/y arrays",
                c.label
            );
            for (&x, &y) in c.xs.iter().zip(&c.ys) {
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
        if x_max <= x_min {
            x_max = x_min + 1.0;
        }
        if y_max <= y_min {
            y_max = y_min + 1.0;
        }
        // Pad the value axis a little.
        let pad = 0.05 * (y_max - y_min);
        Ok(Frame {
            x_min,
            x_max,
            y_min: y_min - pad,
            y_max: y_max + pad,
        })
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH as f64 - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT as f64 - MARGIN_B
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT as f64 - MARGIN_T - MARGIN_B)
    }

    fn ticks(lo: f64, hi: f64) -> Vec<f64> {
        let span = hi - lo;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 2.5, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| span / s <= 6.0)
            .unwrap_or(mag * 10.0);
        let mut t = (lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= hi + 1e-12 * span {
            out.push(if t.abs() < 1e-12 * span { 0.0 } else { t });
            t += step;
        }
        out
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (0.001..10000.0).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.1e}")
    }
}

/// Render to the requested format, choosing by `format`.
pub fn render(spec: &PlotSpec, path: &Path, format: PlotFormat) -> anyhow::Result<()> {
    match format {
        PlotFormat::Svg => render_svg(spec, path),
        PlotFormat::Png => render_png(spec, path),
    }
}

pub fn render_svg(spec: &PlotSpec, path: &Path) -> anyhow::Result<()> {
    let frame = Frame::from_curves(&spec.curves)?;
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Axes.
    let x0 = MARGIN_L;
    let x1 = WIDTH as f64 - MARGIN_R;
    let y0 = HEIGHT as f64 - MARGIN_B;
    let y1 = MARGIN_T;
    s.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n"
    ));
    s.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));

    for t in Frame::ticks(frame.x_min, frame.x_max) {
        let px = frame.px(t);
        s.push_str(&format!(
            "<line x1=\"{px}\" y1=\"{y0}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n",
            y0 + 6.0
        ));
        s.push_str(&format!(
            "<text x=\"{px}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>\n",
            y0 + 22.0,
            tick_label(t)
        ));
    }
    for t in Frame::ticks(frame.y_min, frame.y_max) {
        let py = frame.py(t);
        s.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{x0}\" y2=\"{py}\" stroke=\"black\"/>\n",
            x0 - 6.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"end\" font-family=\"sans-serif\">{}</text>\n",
            x0 - 10.0,
            py + 5.0,
            tick_label(t)
        ));
    }

    for c in &spec.curves {
        let pts: Vec<String> = c
            .xs
            .iter()
            .zip(&c.ys)
            .map(|(&x, &y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let dash = if c.dashed { " stroke-dasharray=\"7,4\"" } else { "" };
        let (r, g, b) = c.color;
        s.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"rgb({r},{g},{b})\" stroke-width=\"1.6\"{dash}/>\n",
            pts.join(" ")
        ));
    }

    // Title, axis labels, legend.
    s.push_str(&format!(
        "<text x=\"{}\" y=\"28\" font-size=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>\n",
        WIDTH / 2,
        spec.title
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"15\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>\n",
        WIDTH / 2,
        HEIGHT as f64 - 18.0,
        spec.x_label
    ));
    s.push_str(&format!(
        "<text x=\"24\" y=\"{}\" font-size=\"15\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 24 {})\">{}</text>\n",
        HEIGHT / 2,
        HEIGHT / 2,
        spec.y_label
    ));
    for (i, c) in spec.curves.iter().enumerate() {
        let ly = MARGIN_T + 18.0 * i as f64 + 8.0;
        let (r, g, b) = c.color;
        let dash = if c.dashed { " stroke-dasharray=\"7,4\"" } else { "" };
        s.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"rgb({r},{g},{b})\" stroke-width=\"1.6\"{dash}/>\n",
            x0 + 12.0,
            x0 + 44.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"13\" font-family=\"sans-serif\">{}</text>\n",
            x0 + 50.0,
            ly + 4.0,
            c.label
        ));
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn render_png(spec: &PlotSpec, path: &Path) -> anyhow::Result<()> {
    let frame = Frame::from_curves(&spec.curves)?;
    let mut img = image::RgbImage::from_pixel(WIDTH as u32, HEIGHT as u32, image::Rgb([255, 255, 255]));

    let x0 = MARGIN_L;
    let x1 = WIDTH as f64 - MARGIN_R;
    let y0 = HEIGHT as f64 - MARGIN_B;
    let y1 = MARGIN_T;
    draw_line(&mut img, x0, y0, x1, y0, (0, 0, 0), false);
    draw_line(&mut img, x0, y0, x0, y1, (0, 0, 0), false);

    for t in Frame::ticks(frame.x_min, frame.x_max) {
        let px = frame.px(t);
        draw_line(&mut img, px, y0, px, y0 + 6.0, (0, 0, 0), false);
        let label = tick_label(t);
        glyphs::draw_text(
            &mut img,
            px - 3.0 * label.len() as f64,
            y0 + 12.0,
            &label,
            (0, 0, 0),
        );
    }
    for t in Frame::ticks(frame.y_min, frame.y_max) {
        let py = frame.py(t);
        draw_line(&mut img, x0 - 6.0, py, x0, py, (0, 0, 0), false);
        let label = tick_label(t);
        glyphs::draw_text(
            &mut img,
            x0 - 10.0 - 6.0 * label.len() as f64,
            py - 4.0,
            &label,
            (0, 0, 0),
        );
    }

    for c in &spec.curves {
        for w in c.xs.windows(2).zip(c.ys.windows(2)) {
            let (xs, ys) = w;
            draw_line(
                &mut img,
                frame.px(xs[0]),
                frame.py(ys[0]),
                frame.px(xs[1]),
                frame.py(ys[1]),
                c.color,
                c.dashed,
            );
        }
    }

    glyphs::draw_text(
        &mut img,
        (WIDTH / 2) as f64 - 3.0 * spec.title.len() as f64,
        16.0,
        &spec.title,
        (0, 0, 0),
    );
    glyphs::draw_text(
        &mut img,
        (WIDTH / 2) as f64 - 3.0 * spec.x_label.len() as f64,
        HEIGHT as f64 - 28.0,
        &spec.x_label,
        (0, 0, 0),
    );
    glyphs::draw_text(&mut img, 8.0, 16.0, &spec.y_label, (0, 0, 0));
    for (i, c) in spec.curves.iter().enumerate() {
        let ly = MARGIN_T + 16.0 * i as f64 + 8.0;
        draw_line(&mut img, x0 + 12.0, ly, x0 + 44.0, ly, c.color, c.dashed);
        glyphs::draw_text(&mut img, x0 + 50.0, ly - 4.0, &c.label, (0, 0, 0));
    }

    img.save(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn draw_line(
    img: &mut image::RgbImage,
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    color: (u8, u8, u8),
    dashed: bool,
) {
    let steps = ((x1 - x0).abs().max((y1 - y0).abs()).ceil() as usize).max(1);
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        if dashed && ((i / 6) % 2 == 1) {
            continue;
        }
        let x = x0 + t * (x1 - x0);
        let y = y0 + t * (y1 - y0);
        put_px(img, x, y, color);
        put_px(img, x + 0.5, y, color);
        put_px(img, x, y + 0.5, color);
    }
}

fn put_px(img: &mut image::RgbImage, x: f64, y: f64, color: (u8, u8, u8)) {
    let (w, h) = img.dimensions();
    let xi = x.round() as i64;
    let yi = y.round() as i64;
    if xi >= 0 && yi >= 0 && (xi as u32) < w && (yi as u32) < h {
        img.put_pixel(xi as u32, yi as u32, image::Rgb([color.0, color.1, color.2]));
    }
}

/// A tiny 5x7 pixel font covering the characters used in plot labels.
/// Glyphs are defined as ASCII art so they are verifiable by inspection;
/// unknown characters render as blanks.
pub mod glyphs {
    use once_cell::sync::Lazy;
    use std::collections::HashMap;

    type Glyph = [&'static str; 7];

    #[rustfmt::skip]
    const DEFS: &[(char, Glyph)] = &[
        ('0', [" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "]),
        ('1', ["  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "]),
        ('2', [" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"]),
        ('3', [" ### ", "#   #", "    #", "  ## ", "    #", "#   #", " ### "]),
        ('4', ["   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "]),
        ('5', ["#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "]),
        ('6', [" ### ", "#    ", "#    ", "#### ", "#   #", "#   #", " ### "]),
        ('7', ["#####", "    #", "   # ", "  #  ", "  #  ", "  #  ", "  #  "]),
        ('8', [" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "]),
        ('9', [" ### ", "#   #", "#   #", " ####", "    #", "    #", " ### "]),
        ('.', ["     ", "     ", "     ", "     ", "     ", " ##  ", " ##  "]),
        (',', ["     ", "     ", "     ", "     ", " ##  ", " ##  ", " #   "]),
        ('-', ["     ", "     ", "     ", "#####", "     ", "     ", "     "]),
        ('+', ["     ", "  #  ", "  #  ", "#####", "  #  ", "  #  ", "     "]),
        ('=', ["     ", "     ", "#####", "     ", "#####", "     ", "     "]),
        (':', ["     ", " ##  ", " ##  ", "     ", " ##  ", " ##  ", "     "]),
        ('(', ["  #  ", " #   ", "#    ", "#    ", "#    ", " #   ", "  #  "]),
        (')', ["  #  ", "   # ", "    #", "    #", "    #", "   # ", "  #  "]),
        ('|', ["  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  "]),
        ('^', ["  #  ", " # # ", "#   #", "     ", "     ", "     ", "     "]),
        ('A', [" ### ", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"]),
        ('B', ["#### ", "#   #", "#   #", "#### ", "#   #", "#   #", "#### "]),
        ('C', [" ### ", "#   #", "#    ", "#    ", "#    ", "#   #", " ### "]),
        ('D', ["#### ", "#   #", "#   #", "#   #", "#   #", "#   #", "#### "]),
        ('a', ["     ", "     ", " ### ", "    #", " ####", "#   #", " ####"]),
        ('b', ["#    ", "#    ", "#### ", "#   #", "#   #", "#   #", "#### "]),
        ('c', ["     ", "     ", " ### ", "#    ", "#    ", "#   #", " ### "]),
        ('d', ["    #", "    #", " ####", "#   #", "#   #", "#   #", " ####"]),
        ('e', ["     ", "     ", " ### ", "#   #", "#####", "#    ", " ### "]),
        ('h', ["#    ", "#    ", "#### ", "#   #", "#   #", "#   #", "#   #"]),
        ('i', ["  #  ", "     ", " ##  ", "  #  ", "  #  ", "  #  ", " ### "]),
        ('k', ["#    ", "#    ", "#  # ", "# #  ", "##   ", "# #  ", "#  # "]),
        ('l', [" ##  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "]),
        ('m', ["     ", "     ", "## # ", "# # #", "# # #", "# # #", "# # #"]),
        ('n', ["     ", "     ", "#### ", "#   #", "#   #", "#   #", "#   #"]),
        ('o', ["     ", "     ", " ### ", "#   #", "#   #", "#   #", " ### "]),
        ('p', ["     ", "     ", "#### ", "#   #", "#### ", "#    ", "#    "]),
        ('r', ["     ", "     ", "# ## ", "##   ", "#    ", "#    ", "#    "]),
        ('s', ["     ", "     ", " ####", "#    ", " ### ", "    #", "#### "]),
        ('t', ["  #  ", "  #  ", "#####", "  #  ", "  #  ", "  #  ", "   ##"]),
        ('u', ["     ", "     ", "#   #", "#   #", "#   #", "#   #", " ####"]),
        ('v', ["     ", "     ", "#   #", "#   #", "#   #", " # # ", "  #  "]),
        ('w', ["     ", "     ", "#   #", "#   #", "# # #", "# # #", " # # "]),
        ('x', ["     ", "     ", "#   #", " # # ", "  #  ", " # # ", "#   #"]),
        ('y', ["     ", "     ", "#   #", "#   #", " ####", "    #", " ### "]),
        (' ', ["     ", "     ", "     ", "     ", "     ", "     ", "     "]),
    ];

    static FONT: Lazy<HashMap<char, [u8; 7]>> = Lazy::new(|| {
        DEFS.iter()
            .map(|(ch, rows)| {
                let mut bits = [0u8; 7];
                for (r, row) in rows.iter().enumerate() {
                    for (c, cell) in row.chars().enumerate() {
                        if cell == '#' {
                            bits[r] |= 1 << (4 - c);
                        }
                    }
                }
                (*ch, bits)
            })
            .collect()
    });

    pub fn draw_text(img: &mut image::RgbImage, x: f64, y: f64, text: &str, color: (u8, u8, u8)) {
        let mut cx = x.round() as i64;
        let cy = y.round() as i64;
        let (w, h) = img.dimensions();
        for ch in text.chars() {
            if let Some(bits) = FONT.get(&ch) {
                for (r, row) in bits.iter().enumerate() {
                    for c in 0..5 {
                        if row & (1 << (4 - c)) != 0 {
                            let px = cx + c as i64;
                            let py = cy + r as i64;
                            if px >= 0 && py >= 0 && (px as u32) < w && (py as u32) < h {
                                img.put_pixel(
                                    px as u32,
                                    py as u32,
                                    image::Rgb([color.0, color.1, color.2]),
                                );
                            }
                        }
                    }
                }
            }
            cx += 6;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_curves() {
        let spec = PlotSpec {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            curves: vec![Curve {
                label: "bad".into(),
                xs: vec![0.0, 1.0],
                ys: vec![0.0],
                dashed: false,
                color: PALETTE[0],
            }],
        };
        let dir = std::env::temp_dir();
        assert!(render_svg(&spec, &dir.join("normnet-ragged.svg")).is_err());
    }

    #[test]
    fn writes_nonempty_svg_and_png() {
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let spec = PlotSpec {
            title: "case A approximation".into(),
            x_label: "x".into(),
            y_label: "value".into(),
            curves: vec![Curve {
                label: "k=8".into(),
                xs,
                ys,
                dashed: false,
                color: PALETTE[0],
            }],
        };
        let dir = std::env::temp_dir();
        let svg = dir.join("normnet-test.svg");
        let png = dir.join("normnet-test.png");
        render(&spec, &svg, PlotFormat::Svg).unwrap();
        render(&spec, &png, PlotFormat::Png).unwrap();
        assert!(std::fs::metadata(&svg).unwrap().len() > 500);
        assert!(std::fs::metadata(&png).unwrap().len() > 500);
        let _ = std::fs::remove_file(svg);
        let _ = std::fs::remove_file(png);
    }
}
