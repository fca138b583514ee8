//! Scenario configuration files.
//!
//! A config is TOML: top-level `scenario`, `seed` and `output_dir`, plus the
//! tables `[geometry]`, `[discretization]` (with grid sub-tables such as
//! `[discretization.s_grid]`), `[profile]` and `[solver]`. Only `scenario`
//! is required. Every other key overrides the scenario's default and must
//! already appear in it with the same type; integers may stand in for
//! floats.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use super::catalog;

/// Spacing of a one-dimensional grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: i64,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn linear(min: f64, max: f64, points: i64) -> Self {
        Self { min, max, points, spacing: Spacing::Linear }
    }

    pub fn log(min: f64, max: f64, points: i64) -> Self {
        Self { min, max, points, spacing: Spacing::Log }
    }

    /// Grid values; call after validation.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points as usize;
        match self.spacing {
            Spacing::Linear => crate::monotonicity::linear_grid(self.min, self.max, n),
            Spacing::Log => crate::monotonicity::log_grid(self.min, self.max, n),
        }
    }

    fn check(&self, key: &str, lo: f64, hi: f64, min_points: i64, out: &mut Vec<Diagnostic>) {
        if !(self.min >= lo && self.min < self.max && self.max <= hi) {
            out.push(Diagnostic::new(
                key,
                format!("need {lo} <= min < max <= {hi}, got min {} and max {}", self.min, self.max),
            ));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            out.push(Diagnostic::new(&format!("{key}.min"), "log spacing needs min > 0"));
        }
        if !(min_points..=10_000).contains(&self.points) {
            out.push(Diagnostic::new(
                &format!("{key}.points"),
                format!("must lie in [{min_points}, 10000], got {}", self.points),
            ));
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    /// Circle radii of Γ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicities: Option<Vec<i64>>,
    /// Height of a plane above the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    /// Shape of Γ; only `circle` is implemented.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
    /// Out-of-plane amplitude of the cone's link.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilt: Option<f64>,
    /// Vertices of the cone's link.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<i64>,
    /// Dihedral angle between two half-planes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opening: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<i64>,
    /// `disk` or `square`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    /// [offset, slope, curvature] of the interface x₂ = ψ(x₁).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interface: Option<Vec<f64>>,
    /// Amplitude of the √z part of branch data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_amplitude: Option<f64>,
    /// Degrees k of the homogeneous maps Re(z^k).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    /// Barycentric refinement depth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<i64>,
    /// Coarse mesh size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Grid cells per unit length, one entry per refinement level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<i64>>,
    /// Radius of the ball the varifold is truncated to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
    /// Inner and outer radius for Allard's identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allard_radii: Option<Vec<f64>>,
    /// Half-width of the band around the interface excluded from the gap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence_grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii_grid: Option<GridSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solver {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<i64>,
    /// Energy decrease per sweep at which the coarsest level stops; finer
    /// levels divide it by 16 per level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Over-relaxation factor; 0 picks the optimal one for the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxation: Option<f64>,
    /// Amplitude of the initial separation of interior sheets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<f64>,
    /// Random samples for fitted constants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<i64>,
    /// Random test vector fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub seed: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub geometry: Geometry,
    #[serde(default)]
    pub discretization: Discretization,
    #[serde(default)]
    pub profile: Profile,
    #[serde(default)]
    pub solver: Solver,
}

/// One problem with a config, anchored to a line when it can be located.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(key: &str, message: impl Into<String>) -> Self {
        Self { line: None, key: key.to_string(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "{l}: ")?;
        }
        if !self.key.is_empty() {
            write!(f, "{}: ", self.key)?;
        }
        f.write_str(&self.message)
    }
}

/// Every diagnostic of one config source.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub source_name: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, d) in self.diagnostics.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            match d.line {
                Some(l) => write!(f, "{}:{l}: ", self.source_name)?,
                None => write!(f, "{}: ", self.source_name)?,
            }
            if !d.key.is_empty() {
                write!(f, "{}: ", d.key)?;
            }
            f.write_str(&d.message)?;
        }
        Ok(())
    }
}

impl ConfigError {
    fn single(source_name: &str, d: Diagnostic) -> Self {
        Self { source_name: source_name.to_string(), diagnostics: vec![d] }
    }
}

impl ScenarioConfig {
    /// TOML text, as written by `emit-default`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    /// Range checks; the config is usable when this returns nothing.
    pub fn check(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut push = |key: &str, msg: String| out.push(Diagnostic::new(key, msg));
        if catalog::find(&self.scenario).is_none() {
            push("scenario", format!("unknown scenario `{}`", self.scenario));
        }
        if self.seed < 0 {
            push("seed", format!("must be nonnegative, got {}", self.seed));
        }
        let g = &self.geometry;
        if let Some(r) = &g.radii {
            if r.is_empty() || r.iter().any(|&x| !(x > 0.0 && x <= 100.0)) {
                push("geometry.radii", format!("need at least one radius in (0, 100], got {r:?}"));
            } else if r.windows(2).any(|w| w[1] <= w[0]) {
                push("geometry.radii", format!("must be strictly increasing, got {r:?}"));
            }
        }
        if let Some(m) = &g.multiplicities {
            if m.iter().any(|&x| !(1..=1000).contains(&x)) {
                push("geometry.multiplicities", format!("each must lie in [1, 1000], got {m:?}"));
            }
            if let Some(r) = &g.radii {
                if r.len() != m.len() {
                    push(
                        "geometry.multiplicities",
                        format!("{} multiplicities for {} radii", m.len(), r.len()),
                    );
                }
            }
        }
        range_f(&mut out, "geometry.offset", g.offset, -10.0, 10.0);
        if let Some(c) = &g.curve {
            if c != "circle" {
                out.push(Diagnostic::new("geometry.curve", format!("expected `circle`, got `{c}`")));
            }
        }
        range_f(&mut out, "geometry.tilt", g.tilt, 0.0, 2.0);
        range_i(&mut out, "geometry.vertices", g.vertices, 3, 1000);
        if let Some(a) = g.opening {
            if !(a > 0.0 && a < 2.0 * std::f64::consts::PI) {
                out.push(Diagnostic::new("geometry.opening", format!("must lie in (0, 2π), got {a}")));
            }
        }
        range_i(&mut out, "geometry.q", g.q, 1, crate::qvalued::MAX_Q as i64);
        if let Some(d) = &g.domain {
            if d != "disk" && d != "square" {
                out.push(Diagnostic::new("geometry.domain", format!("expected `disk` or `square`, got `{d}`")));
            }
        }
        if let Some(i) = &g.interface {
            if i.len() != 3 || i.iter().any(|x| !x.is_finite() || x.abs() > 10.0) {
                out.push(Diagnostic::new(
                    "geometry.interface",
                    format!("expected [offset, slope, curvature] with entries in [-10, 10], got {i:?}"),
                ));
            }
        }
        range_f(&mut out, "geometry.branch_amplitude", g.branch_amplitude, -10.0, 10.0);
        if let Some(k) = &g.degrees {
            if k.is_empty() || k.iter().any(|&x| !(1..=12).contains(&x)) {
                out.push(Diagnostic::new("geometry.degrees", format!("each must lie in [1, 12], got {k:?}")));
            }
        }

        let d = &self.discretization;
        range_i(&mut out, "discretization.depth", d.depth, 0, 9);
        if let Some(h) = d.h {
            if !(1e-3..=0.5).contains(&h) {
                out.push(Diagnostic::new("discretization.h", format!("must lie in [0.001, 0.5], got {h}")));
            }
        }
        if let Some(c) = &d.cells {
            if c.is_empty() || c.iter().any(|&x| !(4..=1024).contains(&x) || x % 2 != 0) {
                out.push(Diagnostic::new(
                    "discretization.cells",
                    format!("need even entries in [4, 1024], got {c:?}"),
                ));
            } else if c.windows(2).any(|w| w[1] <= w[0]) {
                out.push(Diagnostic::new("discretization.cells", format!("must be increasing, got {c:?}")));
            }
        }
        if let Some(t) = d.truncation {
            if !(t > 0.0 && t <= 10.0) {
                out.push(Diagnostic::new("discretization.truncation", format!("must lie in (0, 10], got {t}")));
            }
        }
        if let Some(a) = &d.allard_radii {
            if a.len() != 2 || !(a[0] > 0.0 && a[0] < a[1]) {
                out.push(Diagnostic::new(
                    "discretization.allard_radii",
                    format!("expected [r, s] with 0 < r < s, got {a:?}"),
                ));
            }
        }
        if let Some(b) = d.band {
            if !(0.0..1.0).contains(&b) {
                out.push(Diagnostic::new("discretization.band", format!("must lie in [0, 1), got {b}")));
            }
        }
        for (key, grid, hi, min_points) in [
            ("discretization.s_grid", &d.s_grid, 10.0, 5),
            ("discretization.density_grid", &d.density_grid, 10.0, 3),
            ("discretization.divergence_grid", &d.divergence_grid, 10.0, 2),
            ("discretization.radii_grid", &d.radii_grid, 1.0, 2),
        ] {
            if let Some(g) = grid {
                g.check(key, 0.0, hi, min_points, &mut out);
            }
        }
        if let Some(g) = &d.density_grid {
            if g.spacing != Spacing::Log {
                out.push(Diagnostic::new("discretization.density_grid.spacing", "density grids are log-spaced"));
            }
        }
        if let Some(a) = self.profile.plateau {
            if !(a > 0.0 && a < 1.0) {
                out.push(Diagnostic::new("profile.plateau", format!("must lie in (0, 1), got {a}")));
            }
        }
        let s = &self.solver;
        range_i(&mut out, "solver.max_iters", s.max_iters, 1, 10_000_000);
        if let Some(t) = s.tol {
            if !(0.0..1.0).contains(&t) {
                out.push(Diagnostic::new("solver.tol", format!("must lie in [0, 1), got {t}")));
            }
        }
        if let Some(w) = s.relaxation {
            if !(w == 0.0 || (w > 0.0 && w < 2.0)) {
                out.push(Diagnostic::new("solver.relaxation", format!("must be 0 or lie in (0, 2), got {w}")));
            }
        }
        range_f(&mut out, "solver.split", s.split, -10.0, 10.0);
        range_i(&mut out, "solver.samples", s.samples, 100, 10_000_000);
        range_i(&mut out, "solver.fields", s.fields, 1, 1000);
        if let Some(r) = s.field_radius {
            if !(r > 0.0 && r <= 10.0) {
                out.push(Diagnostic::new("solver.field_radius", format!("must lie in (0, 10], got {r}")));
            }
        }
        out
    }
}

fn range_f(out: &mut Vec<Diagnostic>, key: &str, v: Option<f64>, lo: f64, hi: f64) {
    if let Some(x) = v {
        if !(x >= lo && x <= hi) {
            out.push(Diagnostic::new(key, format!("must lie in [{lo}, {hi}], got {x}")));
        }
    }
}

fn range_i(out: &mut Vec<Diagnostic>, key: &str, v: Option<i64>, lo: i64, hi: i64) {
    if let Some(x) = v {
        if !(lo..=hi).contains(&x) {
            out.push(Diagnostic::new(key, format!("must lie in [{lo}, {hi}], got {x}")));
        }
    }
}

/// Parses and validates config text. `source_name` prefixes diagnostics.
pub fn parse_config(text: &str, source_name: &str) -> Result<ScenarioConfig, ConfigError> {
    let lines = LineLocator::new(text);
    let user: Table = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| lines.line_of_offset(s.start));
        ConfigError::single(
            source_name,
            Diagnostic { line, key: String::new(), message: e.message().trim().to_string() },
        )
    })?;
    let anchored = |mut ds: Vec<Diagnostic>| {
        for d in &mut ds {
            d.line = lines.line_of_key(&d.key);
        }
        ConfigError { source_name: source_name.to_string(), diagnostics: ds }
    };
    let name = match user.get("scenario") {
        Some(Value::String(s)) => s.clone(),
        Some(v) => {
            return Err(anchored(vec![Diagnostic::new(
                "scenario",
                format!("expected a string, found {}", kind(v)),
            )]))
        }
        None => return Err(anchored(vec![Diagnostic::new("scenario", "missing required key")])),
    };
    let default = catalog::default_config(&name).ok_or_else(|| {
        anchored(vec![Diagnostic::new(
            "scenario",
            format!("unknown scenario `{name}`; known: {}", catalog::names().join(", ")),
        )])
    })?;
    let mut merged = Table::try_from(&default).expect("configs always serialize");
    // keys every scenario accepts even when its default leaves them out
    let mut optional = Table::new();
    optional.insert("output_dir".into(), Value::String(String::new()));
    let mut diags = Vec::new();
    merge(&mut merged, &optional, &user, "", &name, &mut diags);
    if !diags.is_empty() {
        return Err(anchored(diags));
    }
    let cfg: ScenarioConfig = Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| anchored(vec![Diagnostic::new("", e.message().trim().to_string())]))?;
    let problems = cfg.check();
    if !problems.is_empty() {
        return Err(anchored(problems));
    }
    Ok(cfg)
}

/// Reads and validates a config file. An unreadable file yields a single
/// diagnostic without a line.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::single(&name, Diagnostic::new("", format!("cannot read file: {e}"))))?;
    parse_config(&text, &name)
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "a string",
        Value::Integer(_) => "an integer",
        Value::Float(_) => "a float",
        Value::Boolean(_) => "a boolean",
        Value::Datetime(_) => "a datetime",
        Value::Array(_) => "an array",
        Value::Table(_) => "a table",
    }
}

/// `user` coerced to the type of `base`, if compatible.
fn coerce(base: &Value, user: &Value) -> Option<Value> {
    match (base, user) {
        (Value::Float(_), Value::Integer(i)) => Some(Value::Float(*i as f64)),
        (Value::Array(b), Value::Array(u)) => match b.first() {
            None => Some(user.clone()),
            Some(proto) => u.iter().map(|x| coerce(proto, x)).collect::<Option<Vec<_>>>().map(Value::Array),
        },
        (Value::Table(_), _) | (_, Value::Table(_)) => None,
        _ if std::mem::discriminant(base) == std::mem::discriminant(user) => Some(user.clone()),
        _ => None,
    }
}

fn merge(base: &mut Table, optional: &Table, user: &Table, prefix: &str, scenario: &str, diags: &mut Vec<Diagnostic>) {
    let empty = Table::new();
    for (key, value) in user {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        let slot = match base.get_mut(key) {
            Some(slot) => slot,
            None => match optional.get(key) {
                Some(proto) => {
                    match coerce(proto, value) {
                        Some(v) => {
                            base.insert(key.clone(), v);
                        }
                        None => diags.push(Diagnostic::new(
                            &path,
                            format!("expected {}, found {}", kind(proto), kind(value)),
                        )),
                    }
                    continue;
                }
                None => {
                    diags.push(Diagnostic::new(&path, format!("unknown key for scenario `{scenario}`")));
                    continue;
                }
            },
        };
        match (slot, value) {
            (Value::Table(b), Value::Table(u)) => merge(b, &empty, u, &path, scenario, diags),
            (slot, value) => match coerce(slot, value) {
                Some(v) => *slot = v,
                None => diags.push(Diagnostic::new(&path, format!("expected {}, found {}", kind(slot), kind(value)))),
            },
        }
    }
}

/// Maps dotted key paths to the 1-based line defining them.
struct LineLocator {
    offsets: Vec<usize>,
    keys: BTreeMap<String, usize>,
}

impl LineLocator {
    fn new(text: &str) -> Self {
        let mut offsets = vec![0];
        let mut keys = BTreeMap::new();
        let mut table = String::new();
        for (k, line) in text.split('\n').enumerate() {
            offsets.push(offsets[k] + line.len() + 1);
            let t = line.trim();
            if t.starts_with('[') {
                let inner = t.trim_start_matches('[').split(']').next().unwrap_or("");
                table = normalize_key(inner);
                keys.entry(table.clone()).or_insert(k + 1);
            } else if let Some((lhs, _)) = t.split_once('=') {
                if t.starts_with('#') {
                    continue;
                }
                let key = normalize_key(lhs);
                let full = if table.is_empty() { key } else { format!("{table}.{key}") };
                keys.entry(full).or_insert(k + 1);
            }
        }
        Self { offsets, keys }
    }

    fn line_of_offset(&self, offset: usize) -> usize {
        self.offsets.partition_point(|&o| o <= offset).max(1)
    }

    /// The key's line, or that of its closest defined ancestor.
    fn line_of_key(&self, key: &str) -> Option<usize> {
        let mut k = key;
        loop {
            if let Some(&l) = self.keys.get(k) {
                return Some(l);
            }
            k = &k[..k.rfind('.')?];
        }
    }
}

fn normalize_key(raw: &str) -> String {
    raw.split('.').map(|p| p.trim().trim_matches('"').trim_matches('\'')).collect::<Vec<_>>().join(".")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_alone_gives_the_default() {
        let cfg = parse_config("scenario = \"flat-halfplane\"\n", "t").unwrap();
        assert_eq!(cfg, catalog::default_config("flat-halfplane").unwrap());
    }

    #[test]
    fn negative_depth_is_anchored() {
        let text = "scenario = \"flat-halfplane\"\n\n[discretization]\ndepth = -2\n";
        let err = parse_config(text, "cfg.toml").unwrap_err();
        assert_eq!(err.diagnostics.len(), 1);
        assert_eq!(err.diagnostics[0].key, "discretization.depth");
        assert_eq!(err.diagnostics[0].line, Some(4));
        assert!(err.to_string().starts_with("cfg.toml:4: discretization.depth:"));
    }

    #[test]
    fn unknown_and_mistyped_keys() {
        let text = "scenario = \"two-circles\"\nseed = 1.5\n[geometry]\nradii = [1, 3]\nwobble = 2\n";
        let err = parse_config(text, "x").unwrap_err();
        let keys: Vec<_> = err.diagnostics.iter().map(|d| (d.key.as_str(), d.line)).collect();
        assert!(keys.contains(&("seed", Some(2))));
        assert!(keys.contains(&("geometry.wobble", Some(5))));
        // integer radii are accepted as floats
        assert!(!keys.iter().any(|k| k.0 == "geometry.radii"));
    }

    #[test]
    fn keys_foreign_to_the_scenario_are_rejected() {
        let err = parse_config("scenario = \"axiom-check\"\n[solver]\nsplit = 0.1\n", "x").unwrap_err();
        assert_eq!(err.diagnostics[0].key, "solver.split");
        assert!(err.diagnostics[0].message.contains("unknown key"));
    }

    #[test]
    fn dotted_keys_and_subtables_are_located() {
        let text = "scenario = \"flat-halfplane\"\ndiscretization.s_grid.points = 2\n";
        let err = parse_config(text, "x").unwrap_err();
        assert_eq!(err.diagnostics[0].key, "discretization.s_grid.points");
        assert_eq!(err.diagnostics[0].line, Some(2));
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let err = parse_config("scenario = \"flat-halfplane\"\nseed = = 3\n", "x").unwrap_err();
        assert_eq!(err.diagnostics[0].line, Some(2));
    }

    #[test]
    fn every_default_round_trips() {
        for name in catalog::names() {
            let cfg = catalog::default_config(name).unwrap();
            assert!(cfg.check().is_empty(), "{name}: {:?}", cfg.check());
            assert_eq!(parse_config(&cfg.to_toml(), name).unwrap(), cfg);
        }
    }

    #[test]
    fn output_dir_is_optional_everywhere() {
        let cfg = parse_config("scenario = \"axiom-check\"\noutput_dir = \"out\"\n", "x").unwrap();
        assert_eq!(cfg.output_dir.as_deref(), Some("out"));
    }
}
