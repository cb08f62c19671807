//! One function per subcommand. Each returns the files (or stdout text) to emit.

use crate::args::{
    AverageArgs, Command, Format, FreqmapArgs, IntegrateArgs, KozaiArgs, LzArgs, PortraitArgs,
};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::svg;
use lunar3b::actionangle::{elliptic_torus_frequencies, frequency_map, Branch};
use lunar3b::kepler::orbital_period;
use lunar3b::kozai::{demo_kozai, KozaiConfig};
use lunar3b::quadrupolar::{
    auto_levels, classify_region, find_singularities, level_curves_with_grid, separatrix_with_grid,
    Polyline, Stability, DEFAULT_GRID,
};
use lunar3b::secular::{
    average_fpert, quadrupolar_term, residual_order, SecularConfig, DEFAULT_NODES, DEFAULT_RTOL,
};
use lunar3b::threebody::{
    integrate, laplace_orbit_summary, write_trajectory_csv, IntegratorConfig, SplitOrder,
};
use lunar3b::{DelaunayElements, JacobiState, LZParams, MassSystem, SingularityReport};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::PathBuf;

/// A piece of output and where it goes (`None` is stdout).
pub struct Emit {
    pub path: Option<PathBuf>,
    pub body: Vec<u8>,
}

pub fn run(cmd: &Command, cfg: &RunConfig) -> Result<Vec<Emit>, CliError> {
    match cmd {
        Command::Classify(a) => classify(a, cfg),
        Command::Singularities(a) => singularities(a, cfg),
        Command::Portrait(a) => portrait(a, cfg),
        Command::Freqmap(a) => freqmap(a, cfg),
        Command::EllipticTorus(a) => elliptic_torus(a, cfg),
        Command::Average(a) => average(a, cfg),
        Command::Integrate(a) => integrate_cmd(a, cfg),
        Command::DemoKozai(a) => kozai(a, cfg),
    }
}

fn format_for(cfg: &RunConfig, name: &str, allowed: &[Format]) -> Result<Format, CliError> {
    match cfg.globals.format {
        None => Ok(allowed[0]),
        Some(f) if allowed.contains(&f) => Ok(f),
        Some(f) => Err(CliError::Usage(
            format!("{name} does not support --format {f:?}").to_lowercase(),
        )),
    }
}

fn main_output(cfg: &RunConfig, body: impl Into<Vec<u8>>) -> Vec<Emit> {
    vec![Emit {
        path: cfg.globals.out.clone(),
        body: body.into(),
    }]
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("outputs serialize");
    s.push('\n');
    s
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LzIn {
    alpha_hat: f64,
    beta_hat: f64,
}

fn lz_params(a: &LzArgs, cfg: &RunConfig) -> Result<LZParams, CliError> {
    let p: LzIn = cfg.params(a)?;
    Ok(LZParams::new(p.alpha_hat, p.beta_hat)?)
}

fn classify(a: &LzArgs, cfg: &RunConfig) -> Result<Vec<Emit>, CliError> {
    let fmt = format_for(cfg, "classify", &[Format::Json, Format::Csv])?;
    let p = lz_params(a, cfg)?;
    let region = classify_region(&p)?;
    let body = match fmt {
        Format::Csv => csv("region", [vec![region.to_string()]]),
        _ => to_json(&json!({ "region": region })),
    };
    Ok(main_output(cfg, body))
}

fn singularity_rows(list: &[SingularityReport]) -> Vec<Vec<String>> {
    list.iter()
        .map(|r| {
            vec![
                format!("{:?}", r.kind),
                r.location.delta.to_string(),
                r.location.omega.to_string(),
                r.hessian_det.to_string(),
                match r.stability {
                    Stability::Elliptic => "elliptic".into(),
                    Stability::Hyperbolic => "hyperbolic".into(),
                },
                r.morse.to_string(),
            ]
        })
        .collect()
}

fn singularities(a: &LzArgs, cfg: &RunConfig) -> Result<Vec<Emit>, CliError> {
    let fmt = format_for(cfg, "singularities", &[Format::Json, Format::Csv])?;
    let p = lz_params(a, cfg)?;
    let list = find_singularities(&p)?;
    let body = match fmt {
        Format::Csv => csv(
            "kind,delta,omega,hessian_det,stability,morse",
            singularity_rows(&list),
        ),
        _ => to_json(&list),
    };
    Ok(main_output(cfg, body))
}

const AUTO_LEVELS: usize = 15;
const MIN_GRID: usize = 16;

/// `--levels`: a count or the word `auto`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LevelCount(usize);

impl Default for LevelCount {
    fn default() -> Self {
        LevelCount(AUTO_LEVELS)
    }
}

impl<'de> Deserialize<'de> for LevelCount {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(usize),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(LevelCount(n)),
            Raw::S(s) if s == "auto" => Ok(LevelCount::default()),
            Raw::S(s) => s.parse().map(LevelCount).map_err(|_| {
                serde::de::Error::custom(format!("levels must be a count or 'auto', got '{s}'"))
            }),
        }
    }
}

fn default_grid() -> usize {
    DEFAULT_GRID
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PortraitIn {
    alpha_hat: f64,
    beta_hat: f64,
    #[serde(default = "default_grid")]
    grid: usize,
    #[serde(default)]
    levels: LevelCount,
}

/// Everything drawn in a phase portrait.
#[derive(Serialize)]
pub struct Portrait {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub region: lunar3b::RegionClass,
    pub delta_min: f64,
    pub delta_max: f64,
    pub singularities: Vec<SingularityReport>,
    pub curves: Vec<Curve>,
}

#[derive(Serialize)]
pub struct Curve {
    pub kind: CurveKind,
    pub level: f64,
    pub closed: bool,
    /// `[delta, omega]` pairs, `omega` unwrapped along the curve.
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Level,
    Separatrix,
}

fn curves(kind: CurveKind, lines: Vec<Polyline>) -> impl Iterator<Item = Curve> {
    lines.into_iter().map(move |pl| Curve {
        kind,
        level: pl.level,
        closed: pl.closed,
        points: pl.points.iter().map(|q| [q.delta, q.omega]).collect(),
    })
}

fn portrait(a: &PortraitArgs, cfg: &RunConfig) -> Result<Vec<Emit>, CliError> {
    let fmt = format_for(cfg, "portrait", &[Format::Svg, Format::Json, Format::Csv])?;
    let pin: PortraitIn = cfg.params(a)?;
    let p = LZParams::new(pin.alpha_hat, pin.beta_hat)?;
    if pin.grid < MIN_GRID {
        return Err(lunar3b::Error::Domain(format!(
            "grid must have at least {MIN_GRID} cells, got {}",
            pin.grid
        ))
        .into());
    }
    let region = classify_region(&p)?;
    let sing = find_singularities(&p)?;
    let levels = auto_levels(&p, pin.levels.0, pin.grid)?;
    let mut all: Vec<Curve> = curves(
        CurveKind::Level,
        level_curves_with_grid(&p, &levels, pin.grid)?,
    )
    .collect();
    if sing.iter().any(|r| r.stability == Stability::Hyperbolic) {
        all.extend(curves(
            CurveKind::Separatrix,
            separatrix_with_grid(&p, pin.grid)?,
        ));
    }
    let pt = Portrait {
        alpha_hat: p.alpha_hat,
        beta_hat: p.beta_hat,
        region,
        delta_min: p.delta_min(),
        delta_max: p.delta_max(),
        singularities: sing,
        curves: all,
    };
    let body = match fmt {
        Format::Json => to_json(&pt),
        Format::Csv => {
            let rows = pt.curves.iter().enumerate().flat_map(|(i, c)| {
                c.points.iter().map(move |q| {
                    vec![
                        i.to_string(),
                        format!("{:?}", c.kind).to_lowercase(),
                        c.level.to_string(),
                        q[0].to_string(),
                        q[1].to_string(),
                    ]
                })
            });
            csv("curve,kind,level,delta,omega", rows)
        }
        Format::Svg => svg::render(&pt),
    };
    Ok(main_output(cfg, body))
}

fn default_map_levels() -> usize {
    20
}

fn default_branch() -> Branch {
    Branch::Libration
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FreqmapIn {
    alpha_hat: f64,
    beta_hat: f64,
    #[serde(default = "default_branch")]
    branch: Branch,
    #[serde(default = "default_map_levels")]
    levels: usize,
}

fn freqmap(a: &FreqmapArgs, cfg: &RunConfig) -> Result<Vec<Emit>, CliError> {
    let fmt = format_for(cfg, "freqmap", &[Format::Csv, Format::Json])?;
    let fin: FreqmapIn = cfg.params(a)?;
    let p = LZParams::new(fin.alpha_hat, fin.beta_hat)?;
    let rows = frequency_map(&p, fin.branch, fin.levels)?;
    let body = match fmt {
        Format::Json => to_json(&json!({
            "alpha_hat": p.alpha_hat,
            "beta_hat": p.beta_hat,
            "branch": fin.branch,
            "rows": rows,
        })),
        _ => csv(
            "level,I1,nu1,nu2,torsion",
            rows.iter().map(|r| {
                [r.level, r.i1, r.nu1, r.nu2, r.torsion]
                    .iter()
                    .map(f64::to_string)
                    .collect()
            }),
        ),
    };
    Ok(main_output(cfg, body))
}

fn elliptic_torus(a: &LzArgs, cfg: &RunConfig) -> Result<Vec<Emit>, CliError> {
    let fmt = format_for(cfg, "elliptic-torus", &[Format::Json, Format::Csv])?;
    let p = lz_params(a, cfg)?;
    let rec = elliptic_torus_frequencies(&p)?;
    let body = match fmt {
        Format::Csv => csv(
            "nu2_at_b,nu_normal",
            [vec![rec.nu2_at_b.to_string(), rec.nu_normal.to_string()]],
        ),
        _ => to_json(&rec),
    };
    Ok(main_output(cfg, body))
}

/// Classical elements `(a, e, i, l, g, h)`, given as an object or a six-element list.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(try_from = "ElementsRaw")]
struct Classical {
    a: f64,
    e: f64,
    i: f64,
    l: f64,
    g: f64,
    h: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ElementsRaw {
    List(Vec<f64>),
    Named {
        a: f64,
        e: f64,
        i: f64,
        l: f64,
        g: f64,
        h: f64,
    },
}

impl TryFrom<ElementsRaw> for Classical {
    type Error = String;
    fn try_from(r: ElementsRaw) -> Result<Self, String> {
        match r {
            ElementsRaw::Named { a, e, i, l, g, h } => Ok(Classical { a, e, i, l, g, h }),
            ElementsRaw::List(v) => match v[..] {
                [a, e, i, l, g, h] => Ok(Classical { a, e, i, l, g, h }),
                _ => Err(format!(
                    "elements need six values a,e,i,l,g,h, got {}",
                    v.len()
                )),
            },
        }
    }
}

/// Masses and element pair as a state in the Laplace frame.
fn pair(
    masses: [f64; 3],
    e1: Classical,
    e2: Classical,
) -> Result<(MassSystem, DelaunayElements, DelaunayElements), CliError> {
    let ms = MassSystem::new(masses[0], masses[1], masses[2])?;
    let el1 = DelaunayElements::from_classical(&ms.inner(), e1.a, e1.e, e1.i, e1.l, e1.g, e1.h)?;
    let el2 = DelaunayElements::from_classical(&ms.outer(), e2.a, e2.e, e2.i, e2.l, e2.g, e2.h)?;
    let s = JacobiState::from_elements(&el1, &el2, &ms)?.to_laplace_frame()?;
    let (l1, l2) = s.to_elements(&ms)?;
    Ok((ms, l1, l2))
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AverageIn {
    masses: [f64; 3],
    elements1: Classical,
    elements2: Classical,
    #[serde(default = "default_nodes")]
    nodes: usize,
    #[serde(default)]
    alpha_list: Vec<f64>,
}

fn average(a: &AverageArgs, cfg: &RunConfig) -> Result<Vec<Emit>, CliError> {
    let fmt = format_for(cfg, "average", &[Format::Json, Format::Csv])?;
    let ain: AverageIn = cfg.params(a)?;
    let (ms, el1, el2) = pair(ain.masses, ain.elements1, ain.elements2)?;
    let sc = SecularConfig {
        nodes: ain.nodes,
        alpha_list: ain.alpha_list,
        rtol: cfg.globals.tol.unwrap_or(DEFAULT_RTOL),
    };
    let avg = average_fpert(&el1, &el2, &ms, &sc)?;
    let quad = quadrupolar_term(&el1, &el2, &ms)?;
    let exponent = if sc.alpha_list.is_empty() {
        None
    } else {
        Some(residual_order(&el1, &el2, &ms, &sc)?.exponent)
    };
    let body = match fmt {
        Format::Csv => csv(
            "average,quadrupolar,residual,fitted_exponent",
            [vec![
                avg.to_string(),
                quad.to_string(),
                (avg - quad).to_string(),
                exponent.map_or(String::new(), |x| x.to_string()),
            ]],
        ),
        _ => to_json(&json!({
            "average": avg,
            "quadrupolar": quad,
            "residual": avg - quad,
            "fitted_exponent": exponent,
        })),
    };
    Ok(main_output(cfg, body))
}

fn default_run_periods() -> f64 {
    100.0
}

fn default_steps_per_period() -> usize {
    200
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegrateIn {
    masses: [f64; 3],
    elements1: Classical,
    elements2: Classical,
    #[serde(default = "default_run_periods")]
    periods: f64,
    #[serde(default = "default_steps_per_period")]
    steps_per_period: usize,
    sample_every: Option<usize>,
    #[serde(default)]
    order: SplitOrder,
}

fn integrate_cmd(a: &IntegrateArgs, cfg: &RunConfig) -> Result<Vec<Emit>, CliError> {
    let fmt = format_for(cfg, "integrate", &[Format::Csv, Format::Json])?;
    let iin: IntegrateIn = cfg.params(a)?;
    let (ms, el1, el2) = pair(iin.masses, iin.elements1, iin.elements2)?;
    if !(iin.periods > 0.0 && iin.periods.is_finite()) || iin.steps_per_period == 0 {
        return Err(
            lunar3b::Error::Domain("periods and steps_per_period must be positive".into()).into(),
        );
    }
    let t_inner = orbital_period(&ms.inner(), el1.semi_major_axis(&ms.inner()));
    let steps = (iin.periods * iin.steps_per_period as f64).ceil() as usize;
    let ic = IntegratorConfig::new(t_inner / iin.steps_per_period as f64, steps)
        .with_order(iin.order)
        .with_sampling(iin.sample_every.unwrap_or(iin.steps_per_period));
    let s0 = JacobiState::from_elements(&el1, &el2, &ms)?;
    let traj = integrate(&s0, &ms, &ic)?;
    let body = match fmt {
        Format::Json => {
            let last = traj.last();
            to_json(&json!({
                "steps_taken": traj.steps_taken,
                "samples": traj.samples.len(),
                "t_end": last.t,
                "max_relative_energy_error": traj.max_relative_energy_error(),
                "max_angular_momentum_error": traj.max_angular_momentum_error(),
                "final_laplace_elements": laplace_orbit_summary(&last.state, &ms)?,
                "truncated": traj.truncated,
            }))
        }
        _ => {
            let mut buf = Vec::new();
            write_trajectory_csv(&mut buf, &traj, &ms).expect("writing to memory");
            return Ok(main_output(cfg, buf));
        }
    };
    Ok(main_output(cfg, body))
}

const DEFAULT_CSV_EVERY: usize = 10;

fn kozai(a: &KozaiArgs, cfg: &RunConfig) -> Result<Vec<Emit>, CliError> {
    format_for(cfg, "demo-kozai", &[Format::Csv, Format::Json])?;
    let (mut kc, extra): (KozaiConfig, _) = cfg.params_without(a, &["summary", "csv_every"])?;
    kc.seed = cfg.globals.seed.unwrap_or(0);
    let summary: Option<PathBuf> = match extra.get("summary") {
        Some(Value::String(s)) => Some(s.into()),
        Some(v) => return Err(CliError::Usage(format!("summary must be a path, got {v}"))),
        None => None,
    };
    let every = match extra.get("csv_every") {
        Some(v) => v.as_u64().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Usage(format!("csv_every must be a positive integer, got {v}"))
        })? as usize,
        None => DEFAULT_CSV_EVERY,
    };
    let (mut traj, report) = demo_kozai(&kc)?;
    let mut out = Vec::new();
    if let Some(path) = &cfg.globals.out {
        let ms = MassSystem::new(kc.masses[0], kc.masses[1], kc.masses[2])?;
        let n = traj.samples.len();
        traj.samples = traj
            .samples
            .into_iter()
            .enumerate()
            .filter(|(k, _)| k % every == 0 || k + 1 == n)
            .map(|(_, smp)| smp)
            .collect();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj, &ms).expect("writing to memory");
        out.push(Emit {
            path: Some(path.clone()),
            body: buf,
        });
    }
    out.push(Emit {
        path: summary,
        body: to_json(&report).into_bytes(),
    });
    Ok(out)
}
