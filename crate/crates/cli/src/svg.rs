//! Static SVG rendering of a phase portrait on the `(ω, δ)` cylinder.

use crate::commands::{CurveKind, Portrait};
use lunar3b::numerics::{wrap_angle, TWO_PI};
use lunar3b::SingularityKind;
use std::f64::consts::PI;
use std::fmt::Write;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 580.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 80.0;

struct Frame {
    dmin: f64,
    dmax: f64,
}

impl Frame {
    fn x(&self, omega: f64) -> f64 {
        LEFT + (WIDTH - LEFT - RIGHT) * omega / TWO_PI
    }

    fn y(&self, delta: f64) -> f64 {
        TOP + (HEIGHT - TOP - BOTTOM) * (1.0 - (delta - self.dmin) / (self.dmax - self.dmin))
    }
}

/// Splits a curve wherever it crosses the `ω = 0 ≡ 2π` seam.
fn segments(points: &[[f64; 2]], closed: bool) -> Vec<Vec<(f64, f64)>> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    if closed && !points.is_empty() {
        pts.push(points[0]);
    }
    let mut out = Vec::new();
    let mut cur: Vec<(f64, f64)> = Vec::new();
    let mut prev: Option<f64> = None;
    for [d, o] in pts {
        let w = wrap_angle(o);
        if let Some(pw) = prev {
            if (w - pw).abs() > PI {
                // close the gap at the seam so the picture has no holes
                let edge = if pw > w { (TWO_PI, 0.0) } else { (0.0, TWO_PI) };
                cur.push((edge.0, d));
                out.push(std::mem::take(&mut cur));
                cur.push((edge.1, d));
            }
        }
        cur.push((w, d));
        prev = Some(w);
    }
    if cur.len() > 1 {
        out.push(cur);
    }
    out
}

fn marker(s: &mut String, kind: SingularityKind, x: f64, y: f64) {
    let r = 5.0;
    let _ = match kind {
        SingularityKind::B => writeln!(
            s,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="#1f5fbf"/>"##
        ),
        SingularityKind::A => writeln!(
            s,
            r##"<rect x="{:.2}" y="{:.2}" width="{w}" height="{w}" fill="#c0392b"/>"##,
            x - r,
            y - r,
            w = 2.0 * r
        ),
        SingularityKind::Aprime => writeln!(
            s,
            r##"<polygon points="{:.2},{y:.2} {x:.2},{:.2} {:.2},{y:.2} {x:.2},{:.2}" fill="#e67e22"/>"##,
            x - r,
            y - r,
            x + r,
            y + r
        ),
        SingularityKind::E => writeln!(
            s,
            r##"<polygon points="{:.2},{:.2} {:.2},{:.2} {x:.2},{:.2}" fill="#27ae60"/>"##,
            x - r,
            y + r,
            x + r,
            y + r,
            y - r
        ),
    };
}

pub fn render(pt: &Portrait) -> String {
    let f = Frame {
        dmin: pt.delta_min,
        dmax: pt.delta_max,
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="16">α̂ = {}, β̂ = {} ({:?})</text>"#,
        WIDTH / 2.0,
        pt.alpha_hat,
        pt.beta_hat,
        pt.region
    );
    let (x0, x1, y0, y1) = (f.x(0.0), f.x(TWO_PI), f.y(pt.delta_max), f.y(pt.delta_min));
    let _ = writeln!(
        s,
        r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );
    for (k, label) in ["0", "π/2", "π", "3π/2", "2π"].iter().enumerate() {
        let x = f.x(k as f64 * PI / 2.0);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y1:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            y1 + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            y1 + 20.0
        );
    }
    for k in 0..=4 {
        let d = pt.delta_min + (pt.delta_max - pt.delta_min) * k as f64 / 4.0;
        let y = f.y(d);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{d:.3}</text>"#,
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">ω</text>"#,
        (x0 + x1) / 2.0,
        y1 + 40.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">δ</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    for c in &pt.curves {
        let (stroke, width) = match c.kind {
            CurveKind::Level => ("#555555", 1.0),
            CurveKind::Separatrix => ("#c0392b", 2.0),
        };
        for seg in segments(&c.points, c.closed) {
            let coords: Vec<String> = seg
                .iter()
                .map(|&(w, d)| format!("{:.2},{:.2}", f.x(w), f.y(d)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
                coords.join(" ")
            );
        }
    }
    for r in &pt.singularities {
        for q in r.symmetric_copies() {
            marker(&mut s, r.kind, f.x(q.omega), f.y(q.delta));
        }
    }
    let ly = HEIGHT - 18.0;
    let mut lx = LEFT;
    for (kind, name) in [
        (SingularityKind::A, "A"),
        (SingularityKind::Aprime, "A′"),
        (SingularityKind::B, "B"),
        (SingularityKind::E, "E"),
    ] {
        marker(&mut s, kind, lx, ly - 4.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}">{name}</text>"#, lx + 10.0);
        lx += 60.0;
    }
    let _ = writeln!(
        s,
        r##"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c0392b" stroke-width="2"/>"##,
        ly - 4.0,
        lx + 25.0,
        ly - 4.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{ly:.2}">separatrix</text>"#,
        lx + 30.0
    );
    s.push_str("</svg>\n");
    s
}
