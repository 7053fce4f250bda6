//! Scenario files: a line-oriented sectioned text format describing a
//! hypersurface, a parametrized submanifold, named constants and numeric
//! settings.
//!
//! ```text
//! [hypersurface]
//! n = 2
//! rho = abs2(z2)^2 - re(z1)
//!
//! [manifold]
//! m = 1
//! params = t
//! component = t^4
//! component = t
//! domain = -0.5 .. 0.5
//!
//! [constants]
//! C = 1
//!
//! [settings]
//! grid = 3
//! probe_grid = 9
//! ```
//!
//! `#` starts a comment. Sections may appear in any order; `component` and
//! `domain` lines repeat (one per ambient coordinate / parameter). Domain
//! bounds are constant expressions, so `-pi .. pi` works.

use crate::error::ScenarioError;
use crate::expr::{Expr, ExprContext};
use crate::geometry::{Hypersurface, Tolerances};
use crate::manifold::{GridSpec, ParamManifold};
use crate::probe::ProbeSpec;

/// Numeric settings with their defaults.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Settings {
    /// per-axis grid counts for the hypothesis scans
    pub grid: Vec<usize>,
    /// direction sample count for positivity when `m > 1`
    pub directions: usize,
    /// bracket length bound for type computations
    pub max_order: u32,
    pub eps_zero: f64,
    pub eps_on_surface: f64,
    pub eps_tangency: f64,
    /// per-axis real-grid counts for the germ probe
    pub probe_grid: Vec<usize>,
    /// largest probe shell radius
    pub probe_delta: f64,
    /// number of geometric shells
    pub probe_shells: usize,
    /// offset directions per shell
    pub probe_directions: usize,
    /// probe contact tolerance
    pub probe_tau: f64,
}

impl Settings {
    pub fn default_for(m: usize) -> Settings {
        Settings {
            grid: vec![33; m],
            directions: 64,
            max_order: 8,
            eps_zero: 1e-9,
            eps_on_surface: 1e-9,
            eps_tangency: 1e-8,
            probe_grid: vec![9; m],
            probe_delta: 0.5,
            probe_shells: 4,
            probe_directions: 16,
            probe_tau: 1e-9,
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            eps_zero: self.eps_zero,
            eps_on_surface: self.eps_on_surface,
            eps_tangency: self.eps_tangency,
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            per_axis: self.grid.clone(),
            directions: self.directions,
        }
    }

    pub fn probe_spec(&self) -> ProbeSpec {
        ProbeSpec {
            real_grid: self.probe_grid.clone(),
            radii: ProbeSpec::shells(self.probe_delta, self.probe_shells),
            directions: self.probe_directions,
            tau: self.probe_tau,
        }
    }
}

/// A fully validated scenario: all expressions parsed, all settings checked.
#[derive(Debug)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub rho_text: String,
    pub rho: Expr,
    pub m: usize,
    pub param_names: Vec<String>,
    pub component_texts: Vec<String>,
    pub components: Vec<Expr>,
    pub domain: Vec<(f64, f64)>,
    pub constants: Vec<(String, f64)>,
    pub settings: Settings,
}

impl Scenario {
    /// Load and validate a scenario file.
    pub fn load(path: &std::path::Path) -> Result<Scenario, ScenarioError> {
        let label = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::new(&label, 0, format!("cannot read file: {e}")))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| label.clone());
        Scenario::parse(&name, &label, &text)
    }

    /// Parse scenario text. `label` names the source in error messages.
    pub fn parse(name: &str, label: &str, text: &str) -> Result<Scenario, ScenarioError> {
        let mut section = String::new();
        // collected (line, key, value) triples per section
        let mut hyper: Vec<(usize, String, String)> = Vec::new();
        let mut mani: Vec<(usize, String, String)> = Vec::new();
        let mut consts: Vec<(usize, String, String)> = Vec::new();
        let mut setts: Vec<(usize, String, String)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(k) => &raw[..k],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(ScenarioError::new(label, line_no, "malformed section header"));
                }
                section = line[1..line.len() - 1].trim().to_string();
                match section.as_str() {
                    "hypersurface" | "manifold" | "constants" | "settings" => {}
                    other => {
                        return Err(ScenarioError::new(
                            label,
                            line_no,
                            format!("unknown section [{other}]"),
                        ));
                    }
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ScenarioError::new(label, line_no, "expected `key = value`")
            })?;
            let triple = (line_no, key.trim().to_string(), value.trim().to_string());
            match section.as_str() {
                "hypersurface" => hyper.push(triple),
                "manifold" => mani.push(triple),
                "constants" => consts.push(triple),
                "settings" => setts.push(triple),
                "" => {
                    return Err(ScenarioError::new(
                        label,
                        line_no,
                        "entry appears before any section header",
                    ));
                }
                _ => unreachable!(),
            }
        }

        // constants first: they scope every other expression
        let mut constants: Vec<(String, f64)> = Vec::new();
        for (line, key, value) in &consts {
            if !is_identifier(key) {
                return Err(ScenarioError::new(label, *line, format!("invalid constant name '{key}'")));
            }
            if is_reserved(key) {
                return Err(ScenarioError::new(label, *line, format!("constant name '{key}' is reserved")));
            }
            if constants.iter().any(|(k, _)| k == key) {
                return Err(ScenarioError::new(label, *line, format!("duplicate constant '{key}'")));
            }
            let x = parse_number(value, &constants)
                .map_err(|msg| ScenarioError::new(label, *line, format!("constant '{key}': {msg}")))?;
            constants.push((key.clone(), x));
        }

        // hypersurface section
        let mut n: Option<(usize, usize)> = None;
        let mut rho_entry: Option<(usize, String)> = None;
        for (line, key, value) in &hyper {
            match key.as_str() {
                "n" => {
                    let v: usize = value.parse().map_err(|_| {
                        ScenarioError::new(label, *line, format!("n must be a positive integer, found '{value}'"))
                    })?;
                    n = Some((*line, v));
                }
                "rho" => rho_entry = Some((*line, value.clone())),
                other => {
                    return Err(ScenarioError::new(label, *line, format!("unknown hypersurface key '{other}'")));
                }
            }
        }
        let (n_line, n) = n.ok_or_else(|| ScenarioError::new(label, 0, "missing [hypersurface] n"))?;
        if n < 2 {
            return Err(ScenarioError::new(label, n_line, "n must be at least 2"));
        }
        let (rho_line, rho_text) =
            rho_entry.ok_or_else(|| ScenarioError::new(label, 0, "missing [hypersurface] rho"))?;

        // manifold section
        let mut m: Option<(usize, usize)> = None;
        let mut params: Option<(usize, Vec<String>)> = None;
        let mut component_entries: Vec<(usize, String)> = Vec::new();
        let mut domain_entries: Vec<(usize, String)> = Vec::new();
        for (line, key, value) in &mani {
            match key.as_str() {
                "m" => {
                    let v: usize = value.parse().map_err(|_| {
                        ScenarioError::new(label, *line, format!("m must be a positive integer, found '{value}'"))
                    })?;
                    m = Some((*line, v));
                }
                "params" => {
                    let names: Vec<String> =
                        value.split(',').map(|s| s.trim().to_string()).collect();
                    params = Some((*line, names));
                }
                "component" => component_entries.push((*line, value.clone())),
                "domain" => domain_entries.push((*line, value.clone())),
                other => {
                    return Err(ScenarioError::new(label, *line, format!("unknown manifold key '{other}'")));
                }
            }
        }
        let (m_line, m) = m.ok_or_else(|| ScenarioError::new(label, 0, "missing [manifold] m"))?;
        if m < 1 {
            return Err(ScenarioError::new(label, m_line, "m must be at least 1"));
        }
        let (p_line, param_names) =
            params.ok_or_else(|| ScenarioError::new(label, 0, "missing [manifold] params"))?;
        if param_names.len() != m {
            return Err(ScenarioError::new(
                label,
                p_line,
                format!("expected {m} parameter name(s), found {}", param_names.len()),
            ));
        }
        for name in &param_names {
            if !is_identifier(name) {
                return Err(ScenarioError::new(label, p_line, format!("invalid parameter name '{name}'")));
            }
            if is_reserved(name) || constants.iter().any(|(k, _)| k == name) {
                return Err(ScenarioError::new(
                    label,
                    p_line,
                    format!("parameter name '{name}' collides with a reserved or constant name"),
                ));
            }
        }
        if param_names.len() != param_names.iter().collect::<std::collections::HashSet<_>>().len() {
            return Err(ScenarioError::new(label, p_line, "duplicate parameter names"));
        }
        if component_entries.len() != n {
            return Err(ScenarioError::new(
                label,
                component_entries.first().map(|e| e.0).unwrap_or(0),
                format!("expected {n} component line(s), found {}", component_entries.len()),
            ));
        }
        if domain_entries.len() != m {
            return Err(ScenarioError::new(
                label,
                domain_entries.first().map(|e| e.0).unwrap_or(0),
                format!("expected {m} domain line(s), found {}", domain_entries.len()),
            ));
        }

        // expressions
        let ambient_ctx = ExprContext::ambient(n).with_constants(&constants);
        let rho = ambient_ctx
            .parse(&rho_text)
            .map_err(|e| ScenarioError::new(label, rho_line, format!("rho: {e}")))?;
        let param_ctx = ExprContext::parameters(&param_names).with_constants(&constants);
        let mut component_texts = Vec::new();
        let mut components = Vec::new();
        for (line, text) in &component_entries {
            let e = param_ctx
                .parse(text)
                .map_err(|e| ScenarioError::new(label, *line, format!("component: {e}")))?;
            component_texts.push(text.clone());
            components.push(e);
        }
        let mut domain = Vec::new();
        for (line, text) in &domain_entries {
            let (lo, hi) = text.split_once("..").ok_or_else(|| {
                ScenarioError::new(label, *line, "domain must be `lo .. hi`")
            })?;
            let lo = parse_number(lo.trim(), &constants)
                .map_err(|msg| ScenarioError::new(label, *line, format!("domain lower bound: {msg}")))?;
            let hi = parse_number(hi.trim(), &constants)
                .map_err(|msg| ScenarioError::new(label, *line, format!("domain upper bound: {msg}")))?;
            if !(lo < hi) {
                return Err(ScenarioError::new(label, *line, "domain lower bound must be below the upper bound"));
            }
            domain.push((lo, hi));
        }

        // settings
        let mut settings = Settings::default_for(m);
        for (line, key, value) in &setts {
            apply_setting(&mut settings, key, value, m)
                .map_err(|msg| ScenarioError::new(label, *line, msg))?;
        }
        settings
            .probe_spec()
            .validate()
            .map_err(|msg| ScenarioError::new(label, 0, format!("probe settings: {msg}")))?;

        // structural validation of the geometry inputs
        Hypersurface::new(n, rho.clone())
            .map_err(|e| ScenarioError::new(label, rho_line, format!("rho: {e}")))?;
        ParamManifold::new(param_names.clone(), components.clone(), domain.clone())
            .map_err(|e| ScenarioError::new(label, 0, format!("manifold: {e}")))?;

        Ok(Scenario {
            name: name.to_string(),
            n,
            rho_text,
            rho,
            m,
            param_names,
            component_texts,
            components,
            domain,
            constants,
            settings,
        })
    }

    /// Build the validated hypersurface with the scenario tolerances.
    pub fn hypersurface(&self) -> Hypersurface {
        Hypersurface::with_tolerances(self.n, self.rho.clone(), self.settings.tolerances())
            .expect("validated at load time")
    }

    /// Build the validated manifold.
    pub fn manifold(&self) -> ParamManifold {
        ParamManifold::new(
            self.param_names.clone(),
            self.components.clone(),
            self.domain.clone(),
        )
        .expect("validated at load time")
    }

    /// Parse a `name=value,...` parameter point against this scenario.
    pub fn parse_at(&self, at: &str) -> Result<Vec<f64>, String> {
        let mut values: Vec<Option<f64>> = vec![None; self.m];
        for piece in at.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            let (key, value) = piece
                .split_once('=')
                .ok_or_else(|| format!("expected `param=value`, found '{piece}'"))?;
            let key = key.trim();
            let idx = self
                .param_names
                .iter()
                .position(|p| p == key)
                .ok_or_else(|| format!("unknown parameter '{key}'"))?;
            let x = parse_number(value.trim(), &self.constants)?;
            values[idx] = Some(x);
        }
        values
            .into_iter()
            .enumerate()
            .map(|(k, v)| v.ok_or_else(|| format!("parameter '{}' not given", self.param_names[k])))
            .collect()
    }
}

fn apply_setting(s: &mut Settings, key: &str, value: &str, m: usize) -> Result<(), String> {
    fn counts(value: &str, m: usize, what: &str) -> Result<Vec<usize>, String> {
        let parts: Vec<&str> = value.split(',').map(str::trim).collect();
        let mut out = Vec::new();
        for p in &parts {
            let v: usize = p
                .parse()
                .map_err(|_| format!("{what} must be a positive integer, found '{p}'"))?;
            if v == 0 {
                return Err(format!("{what} must be positive"));
            }
            out.push(v);
        }
        if out.len() == 1 {
            return Ok(vec![out[0]; m]);
        }
        if out.len() != m {
            return Err(format!("{what} needs one count or one per parameter ({m})"));
        }
        Ok(out)
    }
    fn positive(value: &str, what: &str) -> Result<f64, String> {
        let v: f64 = value
            .parse()
            .map_err(|_| format!("{what} must be a number, found '{value}'"))?;
        if !(v > 0.0) {
            return Err(format!("{what} must be positive"));
        }
        Ok(v)
    }
    match key {
        "grid" => s.grid = counts(value, m, "grid")?,
        "directions" => {
            s.directions = counts(value, 1, "directions")?[0];
        }
        "max_order" => {
            let v: u32 = value
                .parse()
                .map_err(|_| format!("max_order must be an integer, found '{value}'"))?;
            if v < 2 {
                return Err("max_order must be at least 2".into());
            }
            s.max_order = v;
        }
        "eps_zero" => s.eps_zero = positive(value, "eps_zero")?,
        "eps_on_surface" => s.eps_on_surface = positive(value, "eps_on_surface")?,
        "eps_tangency" => s.eps_tangency = positive(value, "eps_tangency")?,
        "probe_grid" => s.probe_grid = counts(value, m, "probe_grid")?,
        "probe_delta" => s.probe_delta = positive(value, "probe_delta")?,
        "probe_shells" => {
            s.probe_shells = counts(value, 1, "probe_shells")?[0];
        }
        "probe_directions" => {
            s.probe_directions = counts(value, 1, "probe_directions")?[0];
        }
        "probe_tau" => s.probe_tau = positive(value, "probe_tau")?,
        other => return Err(format!("unknown setting '{other}'")),
    }
    Ok(())
}

/// Numbers in settings-free positions (constants, domain bounds, `--at`
/// values) are constant expressions: `pi`, `-pi/2`, `0.25`, declared
/// constant names.
pub fn parse_number(text: &str, constants: &[(String, f64)]) -> Result<f64, String> {
    let ctx = ExprContext::ambient(0).with_constants(constants);
    let e = ctx.parse(text).map_err(|e| e.to_string())?;
    match e.as_const() {
        Some(c) if c.im == 0.0 => Ok(c.re),
        Some(_) => Err(format!("'{text}' is not a real number")),
        None => Err(format!("'{text}' is not constant")),
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().unwrap().is_ascii_alphabetic()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_reserved(s: &str) -> bool {
    if matches!(s, "i" | "pi" | "sin" | "cos" | "exp" | "log" | "conj" | "re" | "im" | "abs2") {
        return true;
    }
    // z<digits> / zb<digits> patterns
    let rest = s.strip_prefix("zb").or_else(|| s.strip_prefix('z'));
    matches!(rest, Some(d) if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}
