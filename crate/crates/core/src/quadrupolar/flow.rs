//! The reduced one-degree-of-freedom flow of `W̄`.
//!
//! The state is augmented with two quadratures integrated alongside:
//! the `g2` phase `∫ −∂W̄/∂β̂ dt` and `∫ δ ω' dt`.

use super::{wbar_derivatives, LZParams, LZPoint, EPS_DELTA};
use crate::error::{domain, Error, Result};
use crate::numerics::TWO_PI;
use serde::{Deserialize, Serialize};

type State = [f64; 4];

/// Three-stage Gauss–Legendre collocation (order 6) for the `W̄` flow.
#[derive(Debug, Clone, Copy)]
pub struct GaussLegendre6 {
    a: f64,
    b: f64,
}

const MAX_FIXED_POINT: usize = 60;

impl GaussLegendre6 {
    pub fn new(p: &LZParams) -> Self {
        Self {
            a: p.alpha_hat,
            b: p.beta_hat,
        }
    }

    #[inline]
    pub fn rhs(&self, y: &State) -> State {
        let d = wbar_derivatives(y[0], y[1], self.a, self.b);
        [-d.d_omega, d.d_delta, -d.d_beta, y[0] * d.d_delta]
    }

    pub fn wbar(&self, y: &State) -> f64 {
        super::wbar_raw(y[0], y[1], self.a, self.b)
    }

    /// One step of size `h`.
    pub fn step(&self, y: &State, h: f64) -> State {
        let s15 = 15f64.sqrt();
        let a = [
            [5.0 / 36.0, 2.0 / 9.0 - s15 / 15.0, 5.0 / 36.0 - s15 / 30.0],
            [5.0 / 36.0 + s15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - s15 / 24.0],
            [5.0 / 36.0 + s15 / 30.0, 2.0 / 9.0 + s15 / 15.0, 5.0 / 36.0],
        ];
        let bw = [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0];
        let f0 = self.rhs(y);
        let mut k = [f0; 3];
        for _ in 0..MAX_FIXED_POINT {
            let mut change: f64 = 0.0;
            let mut knew = [[0.0; 4]; 3];
            for i in 0..3 {
                let mut yi = *y;
                for (c, yc) in yi.iter_mut().enumerate().take(2) {
                    *yc += h * (a[i][0] * k[0][c] + a[i][1] * k[1][c] + a[i][2] * k[2][c]);
                }
                knew[i] = self.rhs(&yi);
                for c in 0..2 {
                    let scale = knew[i][c].abs().max(1e-300);
                    change = change.max((knew[i][c] - k[i][c]).abs() / scale);
                }
            }
            k = knew;
            if change < 1e-15 {
                break;
            }
        }
        let mut out = *y;
        for (c, oc) in out.iter_mut().enumerate() {
            *oc += h * (bw[0] * k[0][c] + bw[1] * k[1][c] + bw[2] * k[2][c]);
        }
        out
    }
}

/// The trajectory touched the chart boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEvent {
    pub t: f64,
    pub point: LZPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrajectory {
    pub t: Vec<f64>,
    pub points: Vec<LZPoint>,
    /// Accumulated `∫ −∂W̄/∂β̂ dt` (the `g2` phase in normalized time).
    pub g2_phase: Vec<f64>,
    pub wbar0: f64,
    /// Largest `|W̄(t) − W̄(0)| / |W̄(0)|`.
    pub max_wbar_deviation: f64,
    pub boundary_event: Option<BoundaryEvent>,
}

fn check_start(pt: &LZPoint, p: &LZParams) -> Result<()> {
    p.validate()?;
    if !(pt.delta > p.delta_min() + EPS_DELTA && pt.delta < p.delta_max() - EPS_DELTA) {
        return domain(format!(
            "start delta = {} outside the open cylinder ({}, {})",
            pt.delta,
            p.delta_min(),
            p.delta_max()
        ));
    }
    Ok(())
}

/// Integrates the canonical equations of `W̄` from `pt0` over `t_span`.
pub fn quad_flow(pt0: &LZPoint, p: &LZParams, t_span: f64, dt: f64) -> Result<FlowTrajectory> {
    check_start(pt0, p)?;
    if !(dt > 0.0 && t_span >= 0.0) {
        return domain(format!(
            "need dt > 0 and t_span >= 0, got dt={dt}, t_span={t_span}"
        ));
    }
    let gl = GaussLegendre6::new(p);
    let steps = (t_span / dt).ceil() as usize;
    let h = if steps > 0 {
        t_span / steps as f64
    } else {
        0.0
    };
    let mut y: State = [pt0.delta, pt0.omega, 0.0, 0.0];
    let w0 = gl.wbar(&y);
    let (lo, hi) = (
        p.delta_min() + 0.5 * EPS_DELTA,
        p.delta_max() - 0.5 * EPS_DELTA,
    );
    let mut tr = FlowTrajectory {
        t: vec![0.0],
        points: vec![*pt0],
        g2_phase: vec![0.0],
        wbar0: w0,
        max_wbar_deviation: 0.0,
        boundary_event: None,
    };
    for k in 1..=steps {
        y = gl.step(&y, h);
        let t = k as f64 * h;
        let pt = LZPoint::new(y[0], y[1]);
        tr.t.push(t);
        tr.points.push(pt);
        tr.g2_phase.push(y[2]);
        let dev = ((gl.wbar(&y) - w0) / w0).abs();
        tr.max_wbar_deviation = tr.max_wbar_deviation.max(dev);
        if !(y[0] > lo && y[0] < hi) {
            tr.boundary_event = Some(BoundaryEvent { t, point: pt });
            break;
        }
    }
    Ok(tr)
}

/// Return section used to close one orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Section {
    /// Return to `ω = ω0` crossing in the starting direction (libration).
    Libration,
    /// Unwrapped `ω` advances by `±2π` (circulation).
    Circulation,
}

/// One closed orbit of the reduced flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ClosedOrbit {
    pub period: f64,
    /// `(1/2π) ∮ δ dω` along the motion.
    pub j0: f64,
    /// `⟨∂W̄/∂β̂⟩` over one period.
    pub mean_wbar_beta: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    /// Net turns of `ω` per period (`±1` circulating, `0` librating).
    pub winding: f64,
}

fn section_value(y: &State, omega0: f64, sec: Section, dir: f64) -> f64 {
    match sec {
        Section::Libration => dir * (y[1] - omega0),
        Section::Circulation => dir * (y[1] - omega0) - TWO_PI,
    }
}

/// Finds `τ ∈ (0, h]` with `g(step(y, τ)) = 0` by the secant method.
fn solve_crossing(
    gl: &GaussLegendre6,
    y: &State,
    h: f64,
    g0: f64,
    g1: f64,
    g: &dyn Fn(&State) -> f64,
) -> (f64, State) {
    let (mut t0, mut t1) = (0.0, h);
    let (mut f0, mut f1) = (g0, g1);
    let mut best = (h, gl.step(y, h));
    for _ in 0..40 {
        let t = if f1 != f0 {
            t1 - f1 * (t1 - t0) / (f1 - f0)
        } else {
            0.5 * (t0 + t1)
        };
        let t = t.clamp(0.0, h);
        let yt = gl.step(y, t);
        let ft = g(&yt);
        best = (t, yt);
        if ft.abs() < 1e-15 || (t - t1).abs() < 1e-17 * h {
            break;
        }
        t0 = t1;
        f0 = f1;
        t1 = t;
        f1 = ft;
    }
    best
}

/// Integrates from `pt0` until the orbit closes; two passes, the second
/// with exactly `n_fine` steps per period.
pub(crate) fn close_orbit(
    pt0: &LZPoint,
    p: &LZParams,
    sec: Section,
    h_guess: f64,
    n_fine: usize,
) -> Result<ClosedOrbit> {
    check_start(pt0, p)?;
    let gl = GaussLegendre6::new(p);
    let y0: State = [pt0.delta, pt0.omega, 0.0, 0.0];
    let dir = if gl.rhs(&y0)[1] >= 0.0 { 1.0 } else { -1.0 };
    let run = |h: f64, max_steps: usize| -> Result<(f64, State, f64, f64)> {
        let mut y = y0;
        let mut t = 0.0;
        let mut half = false;
        let (mut dlo, mut dhi) = (y0[0], y0[0]);
        let g = |s: &State| section_value(s, pt0.omega, sec, dir);
        for _ in 0..max_steps {
            let yn = gl.step(&y, h);
            dlo = dlo.min(yn[0]);
            dhi = dhi.max(yn[0]);
            if !(yn[0] > p.delta_min() && yn[0] < p.delta_max()) {
                return Err(Error::Tracing("orbit left the cylinder".into()));
            }
            let (ga, gb) = (g(&y), g(&yn));
            match sec {
                Section::Libration => {
                    if !half && ga > 0.0 && gb <= 0.0 {
                        half = true;
                    } else if half && ga < 0.0 && gb >= 0.0 {
                        let (tau, yc) = solve_crossing(&gl, &y, h, ga, gb, &g);
                        return Ok((t + tau, yc, dlo, dhi));
                    }
                }
                Section::Circulation => {
                    if ga < 0.0 && gb >= 0.0 {
                        let (tau, yc) = solve_crossing(&gl, &y, h, ga, gb, &g);
                        return Ok((t + tau, yc, dlo, dhi));
                    }
                }
            }
            y = yn;
            t += h;
        }
        Err(Error::Tracing(format!(
            "orbit did not close within {max_steps} steps"
        )))
    };
    let (t_coarse, _, _, _) = run(h_guess, 400_000)?;
    let h = t_coarse / n_fine as f64;
    let (period, yc, dlo, dhi) = run(h, 4 * n_fine)?;
    Ok(ClosedOrbit {
        period,
        j0: yc[3] / TWO_PI,
        mean_wbar_beta: -yc[2] / period,
        delta_min: dlo,
        delta_max: dhi,
        winding: if sec == Section::Circulation {
            dir
        } else {
            0.0
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrupolar::find_singularities;
    use crate::quadrupolar::SingularityKind;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn b_is_a_fixed_point() {
        let p = LZParams::new(0.5, 0.2).unwrap();
        let b = find_singularities(&p)
            .unwrap()
            .into_iter()
            .find(|r| r.kind == SingularityKind::B)
            .unwrap();
        let tr = quad_flow(&b.location, &p, 0.01, 1e-5).unwrap();
        for q in &tr.points {
            assert!((q.delta - b.location.delta).abs() < 1e-12);
            assert!((q.omega - b.location.omega).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_conserved() {
        let p = LZParams::new(0.5, 0.2).unwrap();
        let tr = quad_flow(&LZPoint::new(0.5, FRAC_PI_2), &p, 0.01, 2e-6).unwrap();
        assert!(tr.boundary_event.is_none());
        assert!(tr.max_wbar_deviation < 1e-10, "{}", tr.max_wbar_deviation);
    }

    #[test]
    fn start_outside_rejected() {
        let p = LZParams::new(0.5, 0.2).unwrap();
        assert!(quad_flow(&LZPoint::new(0.2, 0.0), &p, 1.0, 0.1).is_err());
    }

    #[test]
    fn libration_orbit_closes() {
        let p = LZParams::new(0.5, 0.2).unwrap();
        let o = close_orbit(
            &LZPoint::new(0.46, FRAC_PI_2),
            &p,
            Section::Libration,
            1e-5,
            800,
        )
        .unwrap();
        assert!(o.period > 0.0);
        let o2 = close_orbit(
            &LZPoint::new(0.46, FRAC_PI_2),
            &p,
            Section::Libration,
            1e-5,
            1600,
        )
        .unwrap();
        assert!(((o.period - o2.period) / o2.period).abs() < 1e-11);
        assert!(((o.j0 - o2.j0) / o2.j0).abs() < 1e-10);
    }
}
