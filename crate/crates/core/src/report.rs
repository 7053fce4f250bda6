//! Pipeline orchestration and report emission.
//!
//! A report aggregates the hypothesis verdict, the per-grid-point tables and
//! the germ-probe summary for one scenario. Reports are deterministic for a
//! fixed scenario: grids, direction samples and iteration orders are all
//! fixed, and the JSON form excludes the wall clock (the text form prints
//! it).

use crate::error::{ManifoldError, ScenarioError};
use crate::gallery;
use crate::geometry::{LeviValue, TypeReport};
use crate::manifold::{theorem_verdict, PointRecord, TypeScan, Verdict};
use crate::probe::{complexify, germ_probe, ContactClass, ContactPoint, ProbeSpec, ProbeVerdict};
use crate::scenario::{Scenario, Settings};
use num_complex::Complex64;

/// Cap on contact witnesses embedded in a report.
const MAX_WITNESSES: usize = 64;

#[derive(Clone, Debug, serde::Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> ToolInfo {
        ToolInfo {
            name: "levilab",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// Scenario echo carried inside every report.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ScenarioEcho {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub rho: String,
    pub params: Vec<String>,
    pub components: Vec<String>,
    pub domain: Vec<(f64, f64)>,
    pub constants: Vec<(String, f64)>,
    pub settings: Settings,
}

impl ScenarioEcho {
    fn of(sc: &Scenario) -> ScenarioEcho {
        ScenarioEcho {
            name: sc.name.clone(),
            n: sc.n,
            m: sc.m,
            rho: sc.rho_text.clone(),
            params: sc.param_names.clone(),
            components: sc.component_texts.clone(),
            domain: sc.domain.clone(),
            constants: sc.constants.clone(),
            settings: sc.settings.clone(),
        }
    }
}

/// Condensed probe result: verdict, extremes, and a bounded witness list.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ProbeSummary {
    pub verdict: ProbeVerdict,
    pub min_u: f64,
    pub samples: usize,
    pub contact_count: usize,
    pub penetration_count: usize,
    /// first witnesses in grid-major order (bounded)
    pub witnesses: Vec<ContactPoint>,
    pub witnesses_truncated: bool,
    pub skipped: Vec<String>,
    pub resolution: ProbeSpec,
}

/// Full result of a pipeline run.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub scenario: ScenarioEcho,
    pub verdict: Verdict,
    pub points: Vec<PointRecord>,
    pub probe: Option<ProbeSummary>,
    pub notes: Vec<String>,
    /// wall clock of the run; not part of the JSON schema so that repeated
    /// runs emit identical bytes
    #[serde(skip)]
    pub wall_ms: f64,
}

/// Run the hypothesis scan and the germ probe on a scenario.
pub fn run_check(sc: &Scenario) -> Result<Report, ManifoldError> {
    let start = std::time::Instant::now();
    let hs = sc.hypersurface();
    let manifold = sc.manifold();
    let grid = sc.settings.grid_spec();
    let outcome = theorem_verdict(&hs, &manifold, &grid, sc.settings.max_order)?;

    let mut notes = Vec::new();
    let probe = match complexify(&manifold) {
        Ok(gamma) => {
            let spec = sc.settings.probe_spec();
            let result = germ_probe(&hs, &gamma, &spec)?;
            let contact_count = result
                .contacts
                .iter()
                .filter(|c| c.class == ContactClass::Contact)
                .count();
            let penetration_count = result.contacts.len() - contact_count;
            let witnesses_truncated = result.contacts.len() > MAX_WITNESSES;
            let mut witnesses = result.contacts;
            witnesses.truncate(MAX_WITNESSES);
            Some(ProbeSummary {
                verdict: result.verdict,
                min_u: result.min_u,
                samples: result.samples,
                contact_count,
                penetration_count,
                witnesses,
                witnesses_truncated,
                skipped: result.skipped,
                resolution: result.resolution,
            })
        }
        Err(e) => {
            notes.push(format!("germ probe skipped: {e}"));
            None
        }
    };
    if !sc.constants.is_empty() {
        let rendered: Vec<String> = sc
            .constants
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect();
        notes.push(format!(
            "declared constants ({}); reported values scale with them",
            rendered.join(", ")
        ));
    }

    Ok(Report {
        tool: ToolInfo::current(),
        scenario: ScenarioEcho::of(sc),
        verdict: outcome.verdict,
        points: outcome.points,
        probe,
        notes,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Run the full pipeline on a built-in gallery scenario.
pub fn run_gallery(id: &str) -> Result<Report, String> {
    let sc = gallery::load(id).map_err(|e| e.to_string())?;
    run_check(&sc).map_err(|e| e.to_string())
}

/// Type computation at one parameter point.
pub fn type_at_params(sc: &Scenario, at: &[f64]) -> Result<TypeReport, ManifoldError> {
    let hs = sc.hypersurface();
    let manifold = sc.manifold();
    let p = manifold.point_at(at)?;
    Ok(hs.bloom_graham_type(&p, sc.settings.max_order)?)
}

/// Direction selector for Levi-form queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeviDirection {
    /// `i * d(gamma)(x) * v` summed over the parameter direction `v = (1,..,1)/sqrt(m)`
    IGamma,
    /// the `j`-th basis field (one-based)
    Basis(usize),
}

/// Levi form of the given order at one parameter point, along `i gamma'`
/// or a basis field. Returns the value and the basis coordinates used.
pub fn levi_at_params(
    sc: &Scenario,
    at: &[f64],
    k: u32,
    dir: LeviDirection,
) -> Result<(LeviValue, Vec<Complex64>), ManifoldError> {
    let hs = sc.hypersurface();
    let manifold = sc.manifold();
    let p = manifold.point_at(at)?;
    let zeta = match dir {
        LeviDirection::IGamma => {
            let frame = manifold.tangent_frame(at)?;
            let m = manifold.param_count();
            let w = 1.0 / (m as f64).sqrt();
            let mut xi = vec![Complex64::new(0.0, 0.0); sc.n];
            for j in 0..sc.n {
                for k in 0..m {
                    xi[j] += frame[(j, k)] * w;
                }
                xi[j] *= Complex64::new(0.0, 1.0);
            }
            hs.identify_tangent(&p, &xi)?
        }
        LeviDirection::Basis(j) => {
            let dim = sc.n - 1;
            if j == 0 || j > dim {
                return Err(ManifoldError::Geometry(
                    crate::error::GeometryError::ZeroMultiIndex,
                ));
            }
            let mut zeta = vec![Complex64::new(0.0, 0.0); dim];
            zeta[j - 1] = Complex64::new(1.0, 0.0);
            zeta
        }
    };
    let v = hs.levi_form(&p, k, &zeta)?;
    Ok((v, zeta))
}

/// Probe-only run with optional overrides of the shell layout.
pub fn probe_only(
    sc: &Scenario,
    delta: Option<f64>,
    shells: Option<usize>,
) -> Result<ProbeSummary, ManifoldError> {
    let mut settings = sc.settings.clone();
    if let Some(d) = delta {
        settings.probe_delta = d;
    }
    if let Some(s) = shells {
        settings.probe_shells = s;
    }
    let hs = sc.hypersurface();
    let manifold = sc.manifold();
    let gamma = complexify(&manifold)?;
    let spec = settings.probe_spec();
    spec.validate()
        .map_err(|msg| ScenarioError::new(&sc.name, 0, msg))
        .expect("probe overrides must be positive");
    let result = germ_probe(&hs, &gamma, &spec)?;
    let contact_count = result
        .contacts
        .iter()
        .filter(|c| c.class == ContactClass::Contact)
        .count();
    let penetration_count = result.contacts.len() - contact_count;
    let witnesses_truncated = result.contacts.len() > MAX_WITNESSES;
    let mut witnesses = result.contacts;
    witnesses.truncate(MAX_WITNESSES);
    Ok(ProbeSummary {
        verdict: result.verdict,
        min_u: result.min_u,
        samples: result.samples,
        contact_count,
        penetration_count,
        witnesses,
        witnesses_truncated,
        skipped: result.skipped,
        resolution: spec,
    })
}

/// JSON emission: stable schema, stable key order, no timing data.
pub fn emit_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Human-readable emission.
pub fn emit_text(report: &Report) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let sc = &report.scenario;
    let _ = writeln!(
        out,
        "{} {} — scenario {}",
        report.tool.name, report.tool.version, sc.name
    );
    let _ = writeln!(out, "hypersurface: n = {}, rho = {}", sc.n, sc.rho);
    let domain: Vec<String> = sc
        .params
        .iter()
        .zip(&sc.domain)
        .map(|(p, (lo, hi))| format!("{p} in [{lo}, {hi}]"))
        .collect();
    let _ = writeln!(
        out,
        "manifold:     m = {}, components ({}), {}",
        sc.m,
        sc.components.join(", "),
        domain.join(", ")
    );
    if !sc.constants.is_empty() {
        let cs: Vec<String> = sc
            .constants
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect();
        let _ = writeln!(out, "constants:    {}", cs.join(", "));
    }
    out.push('\n');

    let v = &report.verdict;
    let _ = writeln!(out, "checks");
    let _ = writeln!(
        out,
        "  totally real:       {} (min frame ratio {:.3e})",
        yesno(v.totally_real),
        v.totally_real_metric
    );
    let _ = writeln!(
        out,
        "  complex tangential: {} (max residual {:.3e})",
        yesno(v.complex_tangential),
        v.tangency_residual
    );
    match &v.type_scan {
        TypeScan::Constant { type_ } => {
            let _ = writeln!(out, "  type:               constant {type_}");
        }
        TypeScan::Varying {
            witness_high,
            witness_low,
        } => {
            let _ = writeln!(
                out,
                "  type varies: {} (type {}) vs {} (type {})",
                fmt_params(&sc.params, &witness_high.0),
                witness_high.1,
                fmt_params(&sc.params, &witness_low.0),
                witness_low.1
            );
        }
        TypeScan::Undetermined { witness } => {
            let _ = writeln!(
                out,
                "  type:               undetermined at {} ({})",
                fmt_params(&sc.params, &witness.0),
                witness.1
            );
        }
    }
    match v.positivity_min {
        Some(x) => {
            let _ = writeln!(out, "  positivity min:     {x}");
        }
        None => {
            let _ = writeln!(out, "  positivity min:     skipped");
        }
    }
    let _ = writeln!(out, "  theorem holds:      {}", yesno(v.theorem_holds));
    for note in v.notes.iter().chain(&report.notes) {
        let _ = writeln!(out, "  note: {note}");
    }
    out.push('\n');

    let _ = writeln!(out, "grid table");
    let _ = writeln!(out, "  {:<24} {:<10} levi_min", "params", "type");
    for rec in &report.points {
        let levi = rec
            .levi_min
            .map(|x| format!("{x}"))
            .unwrap_or_else(|| "-".to_string());
        let _ = writeln!(
            out,
            "  {:<24} {:<10} {}",
            fmt_params(&sc.params, &rec.params),
            rec.type_result.to_string(),
            levi
        );
    }
    out.push('\n');

    match &report.probe {
        Some(probe) => {
            let radii: Vec<String> = probe
                .resolution
                .radii
                .iter()
                .map(|r| format!("{r}"))
                .collect();
            let _ = writeln!(
                out,
                "germ probe (shells [{}], {} directions, tau {:.1e})",
                radii.join(", "),
                probe.resolution.directions,
                probe.resolution.tau
            );
            let verdict = match probe.verdict {
                ProbeVerdict::Obstruction => "obstruction",
                ProbeVerdict::Clear => "clear",
            };
            let _ = writeln!(
                out,
                "  verdict: {} — {} contact(s), {} penetration(s) in {} samples, min u = {:e}",
                verdict, probe.contact_count, probe.penetration_count, probe.samples, probe.min_u
            );
            for w in &probe.witnesses {
                let zeta: Vec<String> = w
                    .zeta
                    .iter()
                    .map(|(re, im)| format!("{re:.6}{im:+.6}i"))
                    .collect();
                let class = match w.class {
                    ContactClass::Contact => "contact",
                    ContactClass::Penetration => "penetration",
                };
                let _ = writeln!(out, "  {class} at zeta = ({}), u = {:e}", zeta.join(", "), w.u);
            }
            if probe.witnesses_truncated {
                let _ = writeln!(out, "  ... witness list truncated");
            }
            for s in &probe.skipped {
                let _ = writeln!(out, "  skipped: {s}");
            }
        }
        None => {
            let _ = writeln!(out, "germ probe: not run");
        }
    }
    out.push('\n');
    let _ = writeln!(out, "wall clock: {:.1} ms", report.wall_ms);
    out
}

fn yesno(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn fmt_params(names: &[String], values: &[f64]) -> String {
    names
        .iter()
        .zip(values)
        .map(|(n, v)| format!("{n} = {v}"))
        .collect::<Vec<_>>()
        .join(", ")
}
