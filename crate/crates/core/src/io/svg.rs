use std::fmt::Write;

use crate::drift::PaperConstants;
use crate::geom::Point2;
use crate::observables::{ladders_from_positions, replay_with, LadderRecord};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvgOptions {
    /// Output width in pixels; the height follows the aspect ratio.
    pub width: f64,
    /// Lens outlines for at most this many of the latest ladder epochs.
    pub max_lenses: usize,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            width: 800.0,
            max_lenses: usize::MAX,
        }
    }
}

/// Corners of the lens `B(a, d) ∩ B(b, d)` for `|a − b| = d`.
fn lens_tips(a: Point2, b: Point2, d: f64) -> (Point2, Point2) {
    let m = a.midpoint(b);
    let u = (b - a) * (1.0 / d);
    let perp = Point2::new(-u.y, u.x) * (d * 3f64.sqrt() / 2.0);
    (m + perp, m - perp)
}

struct Frame {
    min: Point2,
    max: Point2,
}

impl Frame {
    fn include(&mut self, p: Point2) {
        self.min = Point2::new(self.min.x.min(p.x), self.min.y.min(p.y));
        self.max = Point2::new(self.max.x.max(p.x), self.max.y.max(p.y));
    }
}

/// Walk, final hull, ladder lenses and the latest γ-ball. The `y` axis points up.
pub fn render_svg(positions: &[Point2], opts: &SvgOptions) -> String {
    let ladders = ladders_from_positions(positions, None);
    let mut hull_pts = Vec::new();
    let last = positions.len().saturating_sub(1);
    replay_with(positions, |t, hull, _| {
        if t == last {
            hull_pts = hull.vertices().iter().map(|v| v.p).collect();
        }
    });

    let lenses: Vec<&LadderRecord> = {
        let with_partner: Vec<&LadderRecord> = ladders.iter().filter(|r| r.k.is_some()).collect();
        let skip = with_partner.len().saturating_sub(opts.max_lenses);
        with_partner.into_iter().skip(skip).collect()
    };
    let gamma = PaperConstants::shared().gamma;
    let latest = ladders.last().filter(|r| r.k.is_some());

    let mut frame = Frame {
        min: Point2::new(-1.0, -1.0),
        max: Point2::new(1.0, 1.0),
    };
    positions.iter().for_each(|&p| frame.include(p));
    for r in &lenses {
        let (a, b) = (positions[r.tau], positions[r.k.unwrap()]);
        let (p, q) = lens_tips(a, b, r.d_tau);
        [p, q].into_iter().for_each(|x| frame.include(x));
    }
    let span = (frame.max.x - frame.min.x).max(frame.max.y - frame.min.y);
    let pad = 0.04 * span;
    let (x0, y0) = (frame.min.x - pad, -frame.max.y - pad);
    let (w, h) = (frame.max.x - frame.min.x + 2.0 * pad, frame.max.y - frame.min.y + 2.0 * pad);
    let stroke = span / opts.width * 1.2;
    let pt = |p: Point2| format!("{:.6},{:.6}", p.x, -p.y);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="{x0:.6} {y0:.6} {w:.6} {h:.6}">"#,
        opts.width,
        opts.width * h / w
    );
    let _ = writeln!(s, r#"<rect x="{x0:.6}" y="{y0:.6}" width="{w:.6}" height="{h:.6}" fill="white"/>"#);

    let _ = writeln!(
        s,
        r##"<g id="lenses" fill="none" stroke="#4a7bd0" stroke-opacity="0.25" stroke-width="{stroke:.6}">"##
    );
    for r in &lenses {
        let (a, b, d) = (positions[r.tau], positions[r.k.unwrap()], r.d_tau);
        let (p, q) = lens_tips(a, b, d);
        // with y flipped both 120° arcs are counterclockwise on screen
        let _ = writeln!(
            s,
            r#"<path d="M{} A{d:.6},{d:.6} 0 0 0 {} A{d:.6},{d:.6} 0 0 0 {} Z"/>"#,
            pt(p),
            pt(q),
            pt(p)
        );
    }
    let _ = writeln!(s, "</g>");

    if let Some(r) = latest {
        let c = positions[r.tau];
        let _ = writeln!(
            s,
            r##"<circle id="gamma-ball" cx="{:.6}" cy="{:.6}" r="{:.6}" fill="#f0a030" fill-opacity="0.3" stroke="#c07000" stroke-width="{stroke:.6}"/>"##,
            c.x,
            -c.y,
            gamma * r.d_tau
        );
    }

    if hull_pts.len() >= 2 {
        let pts: Vec<String> = hull_pts.iter().map(|&p| pt(p)).collect();
        let _ = writeln!(
            s,
            r##"<polygon id="hull" points="{}" fill="#e8e8e8" fill-opacity="0.5" stroke="#333333" stroke-width="{:.6}"/>"##,
            pts.join(" "),
            stroke * 1.5
        );
    }

    let pts: Vec<String> = positions.iter().map(|&p| pt(p)).collect();
    let _ = writeln!(
        s,
        r##"<polyline id="walk" points="{}" fill="none" stroke="#b02020" stroke-width="{stroke:.6}" stroke-linejoin="round"/>"##,
        pts.join(" ")
    );
    if let (Some(&first), Some(&end)) = (positions.first(), positions.last()) {
        for (id, p, colour) in [("start", first, "#208020"), ("end", end, "#202080")] {
            let _ = writeln!(
                s,
                r#"<circle id="{id}" cx="{:.6}" cy="{:.6}" r="{:.6}" fill="{colour}"/>"#,
                p.x,
                -p.y,
                stroke * 3.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
