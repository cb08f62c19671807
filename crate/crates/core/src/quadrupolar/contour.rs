//! Level sets of `W` on the phase cylinder by marching squares.

use super::{find_singularities, w_derivatives, w_raw, LZParams, LZPoint, Stability, EPS_DELTA};
use crate::error::{domain, Result};
use crate::numerics::{wrap_pi, TWO_PI};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub const DEFAULT_GRID: usize = 512;

/// A traced piece of a level set. `omega` is unwrapped along the curve, so a
/// closed circulating curve gains `±2π` over one turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub level: f64,
    pub points: Vec<LZPoint>,
    pub closed: bool,
}

impl Polyline {
    /// Net number of turns around the cylinder (0 for contractible loops).
    pub fn winding(&self) -> i64 {
        if !self.closed || self.points.len() < 2 {
            return 0;
        }
        let first = self.points[0].omega;
        let last = self.points[self.points.len() - 1].omega;
        let closing = wrap_pi(first - last);
        ((last + closing - first) / TWO_PI).round() as i64
    }

    /// Shoelace area in the `(ω, δ)` plane (signed; closed contractible loops).
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        let mut s = 0.0;
        for k in 0..n {
            let p = self.points[k];
            let q = self.points[(k + 1) % n];
            s += p.omega * q.delta - q.omega * p.delta;
        }
        0.5 * s
    }

    /// Largest `|W − level|` over the vertices.
    pub fn max_level_error(&self, p: &LZParams) -> f64 {
        self.points
            .iter()
            .map(|pt| (w_raw(pt.delta, pt.omega, p.alpha_hat, p.beta_hat) - self.level).abs())
            .fold(0.0, f64::max)
    }

    /// Segments `(a, b)` with angles reduced into a window around `omega0`.
    fn segments(&self) -> impl Iterator<Item = (LZPoint, LZPoint)> + '_ {
        let n = self.points.len();
        let m = if self.closed { n } else { n.saturating_sub(1) };
        (0..m).map(move |k| (self.points[k], self.points[(k + 1) % n]))
    }

    /// Number of crossings of the ray `{ω = ω0, δ > δ0}`.
    pub fn ray_crossings(&self, from: &LZPoint) -> usize {
        let mut count = 0;
        for (a, b) in self.segments() {
            let ua = wrap_pi(a.omega - from.omega);
            let ub = wrap_pi(b.omega - from.omega);
            if (ua < 0.0) != (ub < 0.0) && (ua - ub).abs() < std::f64::consts::PI {
                let t = ua / (ua - ub);
                let d = a.delta + t * (b.delta - a.delta);
                if d > from.delta {
                    count += 1;
                }
            }
        }
        count
    }
}

/// Whether `pt` is enclosed by the union of polylines (crossing parity).
pub fn encloses(curves: &[Polyline], pt: &LZPoint) -> bool {
    curves.iter().map(|c| c.ray_crossings(pt)).sum::<usize>() % 2 == 1
}

struct Grid {
    nd: usize,
    nw: usize,
    d0: f64,
    dd: f64,
    dw: f64,
    vals: Vec<f64>,
}

impl Grid {
    fn new(p: &LZParams, n: usize) -> Self {
        let nd = n.max(8);
        let nw = n.max(8);
        let d0 = p.delta_min() + EPS_DELTA;
        let d1 = p.delta_max() - EPS_DELTA;
        let dd = (d1 - d0) / (nd - 1) as f64;
        let dw = TWO_PI / nw as f64;
        let mut vals = Vec::with_capacity(nd * nw);
        for i in 0..nd {
            for j in 0..nw {
                vals.push(w_raw(
                    d0 + i as f64 * dd,
                    j as f64 * dw,
                    p.alpha_hat,
                    p.beta_hat,
                ));
            }
        }
        Self {
            nd,
            nw,
            d0,
            dd,
            dw,
            vals,
        }
    }

    fn v(&self, i: usize, j: usize) -> f64 {
        self.vals[i * self.nw + j % self.nw]
    }
}

/// Edge of the sampling grid: `D` varies δ between `(i, j)` and `(i+1, j)`,
/// `W` varies ω between `(i, j)` and `(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    D(usize, usize),
    W(usize, usize),
}

fn crossing_point(g: &Grid, e: Edge, level: f64) -> LZPoint {
    let (i, j, di, dj) = match e {
        Edge::D(i, j) => (i, j, 1, 0),
        Edge::W(i, j) => (i, j, 0, 1),
    };
    let fa = g.v(i, j) - level;
    let fb = g.v(i + di, j + dj) - level;
    let t = if fa == fb { 0.5 } else { fa / (fa - fb) };
    LZPoint::new(
        g.d0 + (i as f64 + t * di as f64) * g.dd,
        (j as f64 + t * dj as f64) * g.dw,
    )
}

fn segments_for_level(g: &Grid, level: f64) -> HashMap<Edge, Vec<Edge>> {
    let mut adj: HashMap<Edge, Vec<Edge>> = HashMap::new();
    let pos = |i: usize, j: usize| g.v(i, j) >= level;
    let mut link = |a: Edge, b: Edge| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for i in 0..g.nd - 1 {
        for j in 0..g.nw {
            let c00 = pos(i, j);
            let c10 = pos(i + 1, j);
            let c11 = pos(i + 1, j + 1);
            let c01 = pos(i, j + 1);
            let jn = (j + 1) % g.nw;
            // edges in cyclic order: c00-e0-c10-e1-c11-e2-c01-e3-c00
            let e = [
                Edge::D(i, j),
                Edge::W(i + 1, j),
                Edge::D(i, jn),
                Edge::W(i, j),
            ];
            let cut = [c00 != c10, c10 != c11, c11 != c01, c01 != c00];
            let hits: Vec<usize> = (0..4).filter(|&k| cut[k]).collect();
            match hits.len() {
                2 => link(e[hits[0]], e[hits[1]]),
                4 => {
                    let centre = 0.25
                        * (g.v(i, j) + g.v(i + 1, j) + g.v(i + 1, j + 1) + g.v(i, j + 1))
                        >= level;
                    if centre == c00 {
                        link(e[0], e[1]);
                        link(e[2], e[3]);
                    } else {
                        link(e[3], e[0]);
                        link(e[1], e[2]);
                    }
                }
                _ => {}
            }
        }
    }
    adj
}

fn refine(pt: &mut LZPoint, level: f64, p: &LZParams, max_move: f64) {
    let start = *pt;
    for _ in 0..4 {
        let d = w_derivatives(pt.delta, pt.omega, p.alpha_hat, p.beta_hat);
        let f = d.w - level;
        let g2 = d.d_delta * d.d_delta + d.d_omega * d.d_omega;
        if f == 0.0 || g2 == 0.0 {
            break;
        }
        let step = f / g2;
        let cand = LZPoint::new(pt.delta - step * d.d_delta, pt.omega - step * d.d_omega);
        if ((cand.delta - start.delta).powi(2) + (cand.omega - start.omega).powi(2)).sqrt()
            > max_move
        {
            *pt = start;
            return;
        }
        *pt = cand;
    }
}

fn trace(g: &Grid, level: f64, p: &LZParams) -> Vec<Polyline> {
    let adj = segments_for_level(g, level);
    let mut seen: HashMap<Edge, bool> = HashMap::with_capacity(adj.len());
    let mut out = Vec::new();
    let mut starts: Vec<Edge> = adj
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(k, _)| *k)
        .collect();
    // deterministic ordering
    let key = |e: &Edge| match *e {
        Edge::D(i, j) => (0, i, j),
        Edge::W(i, j) => (1, i, j),
    };
    starts.sort_by_key(key);
    let mut rest: Vec<Edge> = adj.keys().copied().collect();
    rest.sort_by_key(key);
    let max_move = 2.0 * g.dd.max(g.dw);
    for (open, seeds) in [(true, starts), (false, rest)] {
        for s in seeds {
            if seen.contains_key(&s) {
                continue;
            }
            let mut chain = vec![s];
            seen.insert(s, true);
            let mut prev: Option<Edge> = None;
            let mut cur = s;
            loop {
                let next = adj[&cur]
                    .iter()
                    .copied()
                    .find(|n| Some(*n) != prev && !seen.contains_key(n));
                match next {
                    Some(n) => {
                        seen.insert(n, true);
                        chain.push(n);
                        prev = Some(cur);
                        cur = n;
                    }
                    None => break,
                }
            }
            let closed = !open && chain.len() > 2 && adj[&cur].contains(&s);
            let mut pts: Vec<LZPoint> =
                chain.iter().map(|e| crossing_point(g, *e, level)).collect();
            for q in pts.iter_mut() {
                refine(q, level, p, max_move);
            }
            for k in 1..pts.len() {
                pts[k].omega = pts[k - 1].omega + wrap_pi(pts[k].omega - pts[k - 1].omega);
            }
            out.push(Polyline {
                level,
                points: pts,
                closed,
            });
        }
    }
    out
}

/// Level sets of `W` at the given levels on an `n × n` grid.
pub fn level_curves_with_grid(p: &LZParams, levels: &[f64], n: usize) -> Result<Vec<Polyline>> {
    p.validate()?;
    let g = Grid::new(p, n);
    Ok(levels.iter().flat_map(|&l| trace(&g, l, p)).collect())
}

/// Level sets of `W` on the default grid.
pub fn level_curves(p: &LZParams, levels: &[f64]) -> Result<Vec<Polyline>> {
    level_curves_with_grid(p, levels, DEFAULT_GRID)
}

/// `k` levels evenly spread strictly inside the sampled range of `W`.
pub fn auto_levels(p: &LZParams, k: usize, n: usize) -> Result<Vec<f64>> {
    p.validate()?;
    let g = Grid::new(p, n);
    let lo = g.vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = g.vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((1..=k)
        .map(|m| lo + (hi - lo) * m as f64 / (k + 1) as f64)
        .collect())
}

/// Level set through the first hyperbolic critical point (A, A′ or E).
pub fn separatrix_with_grid(p: &LZParams, n: usize) -> Result<Vec<Polyline>> {
    let hyp = find_singularities(p)?
        .into_iter()
        .find(|r| r.stability == Stability::Hyperbolic);
    match hyp {
        Some(r) => {
            let level = w_raw(r.location.delta, r.location.omega, p.alpha_hat, p.beta_hat);
            level_curves_with_grid(p, &[level], n)
        }
        None => domain(format!("{p} has no hyperbolic singularity")),
    }
}

pub fn separatrix(p: &LZParams) -> Result<Vec<Polyline>> {
    separatrix_with_grid(p, DEFAULT_GRID)
}
