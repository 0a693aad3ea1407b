//! Experiment files: TOML by default, JSON when the file starts with `{`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anisoreach::{NormKind, Settings, ShapeSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line of the offending declaration, when known.
    pub line: Option<usize>,
    /// Dotted path such as `checks[2].shape`.
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "ConfigError at line {l}, field `{}`: {}", self.field, self.message),
            None => write!(f, "ConfigError in field `{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    NormCheck,
    ShapeInfo,
    Reach,
    Tube,
    Measures,
    Verify,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::NormCheck => "norm-check",
            CheckKind::ShapeInfo => "shape-info",
            CheckKind::Reach => "reach",
            CheckKind::Tube => "tube",
            CheckKind::Measures => "measures",
            CheckKind::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    Minkowski,
    MinkowskiVolume,
    HeintzeKarcher,
    MeanConvexity,
    Alexandrov,
    LowerBound,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    #[default]
    Pass,
    Fail,
    /// Recorded but never affects the exit status.
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDecl {
    pub name: String,
    pub kind: CheckKind,
    pub shape: Option<String>,
    pub norm: Option<String>,
    #[serde(default)]
    pub expect: Expect,
    /// Bundle quadrature points on the boundary.
    pub samples: Option<usize>,
    /// Radii for `tube`.
    pub rho: Option<Vec<f64>>,
    /// Voxel size for `tube`; defaults to the library voxel size.
    pub voxel: Option<f64>,
    /// Degrees for `measures`; defaults to all.
    pub m: Option<Vec<usize>>,
    pub theorem: Option<Theorem>,
    /// Curvature order for `verify`.
    pub r: Option<usize>,
    /// Check-specific acceptance tolerance.
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct NormDecl {
    pub name: String,
    pub kind: NormKind,
}

#[derive(Debug, Clone)]
pub struct ShapeDecl {
    pub name: String,
    pub spec: ShapeSpec,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub settings: Settings,
    pub norms: Vec<NormDecl>,
    pub shapes: Vec<ShapeDecl>,
    pub checks: Vec<CheckDecl>,
}

impl ExperimentConfig {
    pub fn norm(&self, name: &str) -> Option<&NormDecl> {
        self.norms.iter().find(|n| n.name == name)
    }

    pub fn shape(&self, name: &str) -> Option<&ShapeDecl> {
        self.shapes.iter().find(|s| s.name == name)
    }
}

pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        field: String::new(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let json = text.trim_start().starts_with('{');
    let root: Value = if json {
        serde_json::from_str(text).map_err(|e| ConfigError {
            line: Some(e.line()),
            field: String::new(),
            message: e.to_string(),
        })?
    } else {
        toml::from_str(text).map_err(|e| ConfigError {
            line: e.span().map(|s| line_of(text, s.start)),
            field: String::new(),
            message: e.message().to_string(),
        })?
    };
    let loc = Locator { text, json };
    let Value::Object(mut top) = root else {
        return Err(loc.error("", None, "top level must be a table".into()));
    };
    for key in top.keys() {
        if !["dimension", "seed", "output_dir", "settings", "norms", "shapes", "checks"].contains(&key.as_str()) {
            return Err(loc.error(key, None, "unknown field".into()));
        }
    }
    let dimension = match top.remove("dimension") {
        None => 2,
        Some(v) => v.as_u64().filter(|d| *d == 2 || *d == 3).ok_or_else(|| loc.error("dimension", None, "must be 2 or 3".into()))? as usize,
    };
    let seed = match top.remove("seed") {
        None => 0,
        Some(v) => v.as_u64().ok_or_else(|| loc.error("seed", None, "must be a non-negative integer".into()))?,
    };
    let output_dir = match top.remove("output_dir") {
        None => PathBuf::from("out"),
        Some(Value::String(s)) => PathBuf::from(s),
        Some(_) => return Err(loc.error("output_dir", None, "must be a string".into())),
    };
    let settings: Settings = match top.remove("settings") {
        None => Settings::default(),
        Some(v) => {
            serde_path_to_error::deserialize(v).map_err(|e| loc.error(&field_path("settings", &e), None, e.inner().to_string()))?
        }
    };

    let mut norm_values: BTreeMap<String, Value> = BTreeMap::new();
    let mut norms = Vec::new();
    for (i, v) in entries(&mut top, "norms", &loc)?.into_iter().enumerate() {
        let (name, rest) = split_name(v, "norms", i, &loc)?;
        if norm_values.contains_key(&name) {
            return Err(loc.error(&format!("norms[{i}].name"), Some(("norms", i)), format!("duplicate norm `{name}`")));
        }
        let kind: NormKind = serde_path_to_error::deserialize(rest.clone())
            .map_err(|e| loc.error(&field_path(&format!("norms[{i}]"), &e), Some(("norms", i)), e.inner().to_string()))?;
        norm_values.insert(name.clone(), rest);
        norms.push(NormDecl { name, kind });
    }

    let mut shapes: Vec<ShapeDecl> = Vec::new();
    for (i, v) in entries(&mut top, "shapes", &loc)?.into_iter().enumerate() {
        let (name, mut rest) = split_name(v, "shapes", i, &loc)?;
        if shapes.iter().any(|s| s.name == name) {
            return Err(loc.error(&format!("shapes[{i}].name"), Some(("shapes", i)), format!("duplicate shape `{name}`")));
        }
        resolve_norms(&mut rest, &norm_values).map_err(|n| loc.error(&format!("shapes[{i}].norm"), Some(("shapes", i)), format!("undeclared norm `{n}`")))?;
        let spec: ShapeSpec = serde_path_to_error::deserialize(rest)
            .map_err(|e| loc.error(&field_path(&format!("shapes[{i}]"), &e), Some(("shapes", i)), e.inner().to_string()))?;
        shapes.push(ShapeDecl { name, spec });
    }

    let mut checks: Vec<CheckDecl> = Vec::new();
    for (i, v) in entries(&mut top, "checks", &loc)?.into_iter().enumerate() {
        let c: CheckDecl = serde_path_to_error::deserialize(v)
            .map_err(|e| loc.error(&field_path(&format!("checks[{i}]"), &e), Some(("checks", i)), e.inner().to_string()))?;
        if checks.iter().any(|o| o.name == c.name) {
            return Err(loc.error(&format!("checks[{i}].name"), Some(("checks", i)), format!("duplicate check `{}`", c.name)));
        }
        validate_check(&c, &norm_values, &shapes).map_err(|(f, m)| loc.error(&format!("checks[{i}].{f}"), Some(("checks", i)), m))?;
        checks.push(c);
    }

    Ok(ExperimentConfig {
        dimension,
        seed,
        output_dir,
        settings,
        norms,
        shapes,
        checks,
    })
}

fn validate_check(c: &CheckDecl, norms: &BTreeMap<String, Value>, shapes: &[ShapeDecl]) -> Result<(), (&'static str, String)> {
    let needs_shape = c.kind != CheckKind::NormCheck;
    match &c.norm {
        None => return Err(("norm", "missing norm".into())),
        Some(n) if !norms.contains_key(n) => return Err(("norm", format!("undeclared norm `{n}`"))),
        _ => {}
    }
    if needs_shape {
        match &c.shape {
            None => return Err(("shape", "missing shape".into())),
            Some(s) if !shapes.iter().any(|d| &d.name == s) => return Err(("shape", format!("undeclared shape `{s}`"))),
            _ => {}
        }
    }
    if c.kind == CheckKind::Tube {
        match &c.rho {
            None => return Err(("rho", "tube checks need a rho grid".into())),
            Some(r) if r.is_empty() || r.iter().any(|x| !(*x > 0.0)) => return Err(("rho", "radii must be positive".into())),
            _ => {}
        }
    }
    if c.kind == CheckKind::Verify && c.theorem.is_none() {
        return Err(("theorem", "verify checks need a theorem".into()));
    }
    if let Some(t) = c.tolerance {
        if !(t >= 0.0) {
            return Err(("tolerance", "must be non-negative".into()));
        }
    }
    Ok(())
}

/// Replaces `norm = "<declared name>"` inside Wulff body declarations by the
/// declared norm.
fn resolve_norms(v: &mut Value, norms: &BTreeMap<String, Value>) -> Result<(), String> {
    match v {
        Value::Object(map) => {
            if let Some(Value::String(n)) = map.get("norm") {
                let decl = norms.get(n).ok_or_else(|| n.clone())?;
                map.insert("norm".into(), decl.clone());
            }
            for (_, child) in map.iter_mut() {
                resolve_norms(child, norms)?;
            }
        }
        Value::Array(items) => {
            for child in items {
                resolve_norms(child, norms)?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn entries(top: &mut serde_json::Map<String, Value>, key: &str, loc: &Locator) -> Result<Vec<Value>, ConfigError> {
    match top.remove(key) {
        None => Ok(Vec::new()),
        Some(Value::Array(v)) => Ok(v),
        Some(_) => Err(loc.error(key, None, "must be an array of tables".into())),
    }
}

fn split_name(v: Value, section: &'static str, i: usize, loc: &Locator) -> Result<(String, Value), ConfigError> {
    let Value::Object(mut map) = v else {
        return Err(loc.error(&format!("{section}[{i}]"), Some((section, i)), "must be a table".into()));
    };
    match map.remove("name") {
        Some(Value::String(name)) => Ok((name, Value::Object(map))),
        _ => Err(loc.error(&format!("{section}[{i}].name"), Some((section, i)), "missing string `name`".into())),
    }
}

/// Tagged enums buffer their content, which hides the path; the field name is
/// then recovered from the message when serde quotes it.
fn field_path(prefix: &str, e: &serde_path_to_error::Error<serde_json::Error>) -> String {
    let path = e.path().to_string();
    if path != "." && !path.is_empty() {
        return format!("{prefix}.{path}");
    }
    let msg = e.inner().to_string();
    let quoted = msg.split('`').nth(1).filter(|_| msg.contains("field `"));
    match quoted {
        Some(f) => format!("{prefix}.{f}"),
        None => prefix.to_string(),
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Locator<'a> {
    text: &'a str,
    json: bool,
}

impl Locator<'_> {
    fn error(&self, field: &str, entry: Option<(&str, usize)>, message: String) -> ConfigError {
        ConfigError {
            line: self.find(field, entry),
            field: field.to_string(),
            message,
        }
    }

    /// Line of the offending key: searched after the `i`-th `[[section]]`
    /// header for TOML, or anywhere for top-level keys.
    fn find(&self, field: &str, entry: Option<(&str, usize)>) -> Option<usize> {
        if self.json {
            return None;
        }
        let key = field.rsplit('.').next().unwrap_or(field);
        let key = key.split('[').next().unwrap_or(key);
        let lines: Vec<&str> = self.text.lines().collect();
        let start = match entry {
            None => 0,
            Some((section, i)) => {
                let header = format!("[[{section}]]");
                lines.iter().enumerate().filter(|(_, l)| l.trim() == header).nth(i)?.0
            }
        };
        let end = match entry {
            None => lines.len(),
            Some(_) => lines.iter().enumerate().skip(start + 1).find(|(_, l)| l.trim_start().starts_with("[[")).map_or(lines.len(), |(k, _)| k),
        };
        let hit = (start..end).find(|&k| {
            let l = lines[k].trim_start();
            l.strip_prefix(key).is_some_and(|r| r.trim_start().starts_with('='))
        });
        Some(hit.unwrap_or(start) + 1)
    }
}
