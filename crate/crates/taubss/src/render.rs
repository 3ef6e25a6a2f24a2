//! Deterministic SVG rendering of charts: squares for infinite cyclic
//! summands, dots for Z/2, annotated circles for other torsion, arrows for
//! differentials, green reference lines, and dashed structure lines for the
//! hidden-extension metadata.

use crate::chart::{BssPages, TauChart, Window};
use crate::grading::{Degree, Line};
use num_bigint::BigInt;
use std::fmt::Write as _;

const CELL: i64 = 36;
const MARGIN: i64 = 54;
const GLYPH: i64 = 5;

struct Canvas {
    body: String,
    window: Window,
}

impl Canvas {
    fn new(window: Window) -> Canvas {
        Canvas { body: String::new(), window }
    }

    /// Center of a bidegree cell in SVG user units.
    fn pos(&self, x: i64, y: i64) -> (i64, i64) {
        let px = MARGIN + (x - self.window.x0) * CELL + CELL / 2;
        let py = MARGIN + (self.window.y1 - y) * CELL + CELL / 2;
        (px, py)
    }

    fn width(&self) -> i64 {
        2 * MARGIN + (self.window.x1 - self.window.x0 + 1) * CELL
    }

    fn height(&self) -> i64 {
        2 * MARGIN + (self.window.y1 - self.window.y0 + 1) * CELL
    }

    fn finish(self, title: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            self.width(),
            self.height(),
            self.width(),
            self.height()
        );
        let _ = writeln!(out, "<title>{}</title>", xml_escape(title));
        let _ = writeln!(
            out,
            r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
            self.width(),
            self.height()
        );
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }

    fn grid(&mut self) {
        let w = self.window;
        for x in w.x0..=w.x1 + 1 {
            let (px, _) = self.pos(x, 0);
            let px = px - CELL / 2;
            let _ = writeln!(
                self.body,
                r##"<line x1="{px}" y1="{top}" x2="{px}" y2="{bot}" stroke="#dddddd" stroke-width="1"/>"##,
                top = MARGIN,
                bot = MARGIN + (w.y1 - w.y0 + 1) * CELL,
            );
        }
        for y in w.y0..=w.y1 + 1 {
            let (_, py) = self.pos(0, y);
            let py = py + CELL / 2;
            let _ = writeln!(
                self.body,
                r##"<line x1="{left}" y1="{py}" x2="{right}" y2="{py}" stroke="#dddddd" stroke-width="1"/>"##,
                left = MARGIN,
                right = MARGIN + (w.x1 - w.x0 + 1) * CELL,
            );
        }
        // axis labels every other column/row
        for x in w.x0..=w.x1 {
            if (x - w.x0) % 2 == 0 {
                let (px, _) = self.pos(x, 0);
                let _ = writeln!(
                    self.body,
                    r##"<text x="{px}" y="{py}" font-size="11" text-anchor="middle" fill="#555555">{x}</text>"##,
                    py = MARGIN + (w.y1 - w.y0 + 1) * CELL + 16,
                );
            }
        }
        for y in w.y0..=w.y1 {
            if (y - w.y0) % 2 == 0 {
                let (_, py) = self.pos(0, y);
                let _ = writeln!(
                    self.body,
                    r##"<text x="{px}" y="{py}" font-size="11" text-anchor="end" fill="#555555">{y}</text>"##,
                    px = MARGIN - 8,
                    py = py + 4,
                );
            }
        }
    }

    fn reference_line(&mut self, line: &Line, shift_r: i64, color: &str) {
        // draw y = alpha x (shift_r = 0) or y + r = alpha (x - 1)
        // as a segment across the window, computed at the window edges
        let w = self.window;
        let eval = |x: f64| -> f64 {
            let alpha = line.p() as f64 / line.q() as f64;
            if shift_r == 0 {
                alpha * x
            } else {
                alpha * (x - 1.0) - shift_r as f64
            }
        };
        let x_left = w.x0 as f64 - 0.5;
        let x_right = w.x1 as f64 + 0.5;
        let (px0, py0) = self.pos_f(x_left, eval(x_left));
        let (px1, py1) = self.pos_f(x_right, eval(x_right));
        let _ = writeln!(
            self.body,
            r#"<line x1="{px0:.1}" y1="{py0:.1}" x2="{px1:.1}" y2="{py1:.1}" stroke="{color}" stroke-width="1.5" stroke-opacity="0.8"/>"#,
        );
    }

    fn pos_f(&self, x: f64, y: f64) -> (f64, f64) {
        let px = MARGIN as f64 + (x - self.window.x0 as f64) * CELL as f64 + CELL as f64 / 2.0;
        let py = MARGIN as f64 + (self.window.y1 as f64 - y) * CELL as f64 + CELL as f64 / 2.0;
        (px, py)
    }

    fn glyphs_at(&mut self, d: Degree, invariants: &[BigInt], colors: &[Option<String>]) {
        let (cx, cy) = self.pos(d.x, d.y);
        let n = invariants.len() as i64;
        for (k, inv) in invariants.iter().enumerate() {
            let off = (2 * k as i64 - (n - 1)) * (GLYPH + 3) / 1;
            let x = cx + off;
            let color = colors
                .get(k)
                .and_then(|c| c.clone())
                .unwrap_or_else(|| "black".to_string());
            if inv.bits() == 0 {
                // zero invariant: an infinite cyclic summand, drawn square
                let _ = writeln!(
                    self.body,
                    r#"<rect x="{x0}" y="{y0}" width="{s}" height="{s}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
                    x0 = x - GLYPH,
                    y0 = cy - GLYPH,
                    s = 2 * GLYPH,
                );
            } else if *inv == BigInt::from(2) {
                let _ = writeln!(
                    self.body,
                    r#"<circle cx="{x}" cy="{cy}" r="{r}" fill="{color}"/>"#,
                    r = GLYPH - 1,
                );
            } else {
                let _ = writeln!(
                    self.body,
                    r#"<circle cx="{x}" cy="{cy}" r="{r}" fill="none" stroke="{color}" stroke-width="1.4"/>"#,
                    r = GLYPH,
                );
                let _ = writeln!(
                    self.body,
                    r#"<text x="{x}" y="{ty}" font-size="8" text-anchor="middle" fill="{color}">{inv}</text>"#,
                    ty = cy + 3,
                );
            }
        }
    }

    fn arrow(&mut self, from: Degree, to: Degree, color: &str) {
        let (x0, y0) = self.pos(from.x, from.y);
        let (x1, y1) = self.pos(to.x, to.y);
        // shorten both ends
        let dx = (x1 - x0) as f64;
        let dy = (y1 - y0) as f64;
        let len = (dx * dx + dy * dy).sqrt().max(1.0);
        let (ux, uy) = (dx / len, dy / len);
        let sx = x0 as f64 + ux * (GLYPH as f64 + 3.0);
        let sy = y0 as f64 + uy * (GLYPH as f64 + 3.0);
        let ex = x1 as f64 - ux * (GLYPH as f64 + 3.0);
        let ey = y1 as f64 - uy * (GLYPH as f64 + 3.0);
        let _ = writeln!(
            self.body,
            r#"<line x1="{sx:.1}" y1="{sy:.1}" x2="{ex:.1}" y2="{ey:.1}" stroke="{color}" stroke-width="1.4"/>"#,
        );
        // arrowhead
        let (hx, hy) = (ex - ux * 6.0, ey - uy * 6.0);
        let (px, py) = (-uy, ux);
        let _ = writeln!(
            self.body,
            r#"<polygon points="{ex:.1},{ey:.1} {a:.1},{b:.1} {c:.1},{d:.1}" fill="{color}"/>"#,
            a = hx + px * 3.0,
            b = hy + py * 3.0,
            c = hx - px * 3.0,
            d = hy - py * 3.0,
        );
    }

    fn structure_line(&mut self, from: Degree, to: Degree, color: &str) {
        let (x0, y0) = self.pos(from.x, from.y);
        let (x1, y1) = self.pos(to.x, to.y);
        let _ = writeln!(
            self.body,
            r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y1}" stroke="{color}" stroke-width="1" stroke-dasharray="3,2" stroke-opacity="0.9"/>"#,
        );
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Invariant-aligned colors: when the number of generators matches the
/// number of Smith invariants, glyphs take the generator colors in order.
fn entry_colors(e: &crate::chart::Entry, count: usize) -> Vec<Option<String>> {
    if e.gens.len() == count {
        e.gens.iter().map(|g| g.color.clone()).collect()
    } else {
        vec![e.gens.first().and_then(|g| g.color.clone()); count]
    }
}

fn chart_glyph_data(e: &crate::chart::Entry) -> (Vec<BigInt>, Vec<Option<String>>) {
    let inv = e.group.invariants();
    let mut list: Vec<BigInt> = inv.torsion.clone();
    for _ in 0..inv.rank {
        list.push(BigInt::from(0u32));
    }
    let colors = entry_colors(e, list.len());
    (list, colors)
}

/// Render a tau chart: glyphs per degree plus structure lines.
pub fn render_tau_chart(chart: &TauChart, line: Option<&Line>, title: &str) -> String {
    let mut canvas = Canvas::new(chart.window());
    canvas.grid();
    if let Some(l) = line {
        canvas.reference_line(l, 0, "green");
        canvas.reference_line(l, 2, "green");
    }
    for (d, e) in &chart.entries {
        let (inv, colors) = chart_glyph_data(e);
        canvas.glyphs_at(*d, &inv, &colors);
    }
    for sl in &chart.structure_lines {
        canvas.structure_line(sl.from, sl.to, sl.color.as_deref().unwrap_or("#888888"));
    }
    canvas.finish(title)
}

/// Render pages: the E2 chart with differentials of every page overlaid.
pub fn render_pages(pages: &BssPages, chart: Option<&TauChart>, line: Option<&Line>, title: &str) -> String {
    let mut canvas = Canvas::new(pages.window);
    canvas.grid();
    if let Some(l) = line {
        canvas.reference_line(l, 0, "green");
        canvas.reference_line(l, 2, "green");
    }
    for (d, e) in &pages.e2 {
        let (inv, colors) = chart_glyph_data(e);
        canvas.glyphs_at(*d, &inv, &colors);
    }
    for ((r, src), _m) in &pages.diffs {
        let tgt = src.d_target(*r);
        let color = match pages.origins.get(&(*r, *src)).map(|s| s.as_str()) {
            Some("clause-7") => "orange",
            _ => "black",
        };
        canvas.arrow(*src, tgt, color);
    }
    if let Some(c) = chart {
        for sl in &c.structure_lines {
            canvas.structure_line(sl.from, sl.to, sl.color.as_deref().unwrap_or("#888888"));
        }
    }
    canvas.finish(title)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Entry, Window};

    #[test]
    fn empty_chart_renders() {
        let chart = TauChart {
            window: Some(Window { x0: 0, x1: 4, y0: 0, y1: 4 }),
            ..Default::default()
        };
        let svg = render_tau_chart(&chart, None, "empty");
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn deterministic_output() {
        let mut chart = TauChart {
            window: Some(Window { x0: 0, x1: 4, y0: 0, y1: 4 }),
            ..Default::default()
        };
        chart.entries.insert(Degree::new(0, 0), Entry::free(&["u"]));
        chart.entries.insert(Degree::new(1, 1), Entry::cyclic("a", 2));
        chart.entries.insert(Degree::new(2, 2), Entry::cyclic("b", 4));
        let line = Line::new(1, 2).unwrap();
        let a = render_tau_chart(&chart, Some(&line), "t");
        let b = render_tau_chart(&chart, Some(&line), "t");
        assert_eq!(a, b);
        assert!(a.contains("<rect"));
        assert!(a.contains("<circle"));
        assert!(a.contains("green"));
    }
}
