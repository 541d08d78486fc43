//! Run configuration: TOML with a command, input paths and parameters.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cohom_one::{CEProfile, CompactifiedEguchiHanson, FlatBall, FubiniStudy, RoundS4};
use crate::cyl_spectral::ModelOperator;
use crate::error::{Error, Result};
use crate::neck_glue::{Body, GlueGrid, GlueSpec};

/// Prefix marking a built-in object instead of a file path.
pub const BUILTIN: &str = "builtin:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Curvature,
    Spectrum,
    Index,
    Cylindrify,
    Glue,
    Probe,
    Solve,
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Curvature => "curvature",
            Command::Spectrum => "spectrum",
            Command::Index => "index",
            Command::Cylindrify => "cylindrify",
            Command::Glue => "glue",
            Command::Probe => "probe",
            Command::Solve => "solve",
            Command::Sweep => "sweep",
        }
    }

    fn required_inputs(&self) -> &'static [&'static str] {
        match self {
            Command::Curvature => &["metric"],
            Command::Cylindrify | Command::Probe => &["profile"],
            Command::Glue | Command::Solve | Command::Sweep => &["body1", "body2"],
            Command::Spectrum | Command::Index => &[],
        }
    }
}

/// A number or a list of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Parameters; every field has a default that is echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Sobolev exponent (dimensionless).
    pub p: f64,
    /// Weight rate; absent means 2 − 4/p.
    pub delta: Option<OneOrMany>,
    /// Half neck length l (units of t).
    pub l: OneOrMany,
    /// Glued grid spacing in τ.
    pub h: f64,
    /// Extra τ beyond ±l.
    pub pad: f64,
    /// Newton stop on the weighted W residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed for randomized test fields.
    pub seed: u64,
    /// Model operator: s3-scalar, s3-scalar-discrete, reduced-asd+, reduced-asd-, point.
    pub model: String,
    /// Strip Re λ ∈ (lo, hi) for the indicial spectrum.
    pub strip: (f64, f64),
    /// Truncation length (t units) and step for discrete indices.
    pub length: f64,
    pub step: f64,
    /// Cylindrical sample range and node count.
    pub t_range: (f64, f64),
    pub samples: usize,
    /// Orientation of a cylindrified profile.
    pub orientation: i8,
    /// Shrinking-support levels for the norm probe.
    pub levels: usize,
    /// Number of random conformal factors for the curvature invariance check.
    pub conformal_factors: usize,
    /// Riemann stage order (2 or 4).
    pub order: u8,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            p: 3.0,
            delta: None,
            l: OneOrMany::One(6.0),
            h: GlueGrid::default().h,
            pad: GlueGrid::default().pad,
            tol: 1e-9,
            max_iter: 12,
            seed: 0,
            model: "s3-scalar".into(),
            strip: (-3.0, 3.0),
            length: 12.0,
            step: 0.05,
            t_range: (0.0, 12.0),
            samples: 241,
            orientation: 1,
            levels: 6,
            conformal_factors: 0,
            order: 2,
        }
    }
}

/// Units of each parameter, written next to the echoed values.
pub fn param_units() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("p", "dimensionless"),
        ("delta", "1/t"),
        ("l", "t"),
        ("h", "t"),
        ("pad", "t"),
        ("tol", "weighted L2 of W"),
        ("max_iter", "count"),
        ("seed", "integer"),
        ("model", "name"),
        ("strip", "Re lambda"),
        ("length", "t"),
        ("step", "t"),
        ("t_range", "t"),
        ("samples", "count"),
        ("orientation", "sign"),
        ("levels", "count"),
        ("conformal_factors", "count"),
        ("order", "stencil order"),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
    #[serde(default)]
    pub params: Params,
}

/// A resolved input: a file on disk or a built-in name.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    File(PathBuf),
    Builtin(String),
}

const STENCIL_SUPPORT: usize = 9;

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn deltas(&self) -> Vec<f64> {
        match &self.params.delta {
            Some(d) => d.values(),
            None => vec![2.0 - 4.0 / self.params.p],
        }
    }

    pub fn ls(&self) -> Vec<f64> {
        self.params.l.values()
    }

    /// Input path resolved against `base` (the config file's directory).
    pub fn input(&self, key: &str, base: &Path) -> Result<Input> {
        let v = self
            .inputs
            .get(key)
            .ok_or_else(|| Error::Invalid(format!("missing input `{key}`")))?;
        Ok(match v.strip_prefix(BUILTIN) {
            Some(name) => Input::Builtin(name.to_string()),
            None => Input::File(base.join(v)),
        })
    }

    /// Parameter and input checks; nothing is computed or written before this passes.
    pub fn validate(&self, base: &Path) -> Result<()> {
        let p = &self.params;
        for key in self.command.required_inputs() {
            match self.input(key, base)? {
                Input::File(_) if *key == "profile" => {
                    return Err(Error::Invalid("`profile` must be a built-in radial profile".into()))
                }
                Input::File(path) if !path.is_file() => {
                    return Err(Error::Invalid(format!("input `{key}` not found: {}", path.display())))
                }
                Input::Builtin(name) if builtin_known(key, &name).is_none() => {
                    return Err(Error::Invalid(format!("unknown built-in `{name}` for `{key}`")))
                }
                _ => {}
            }
        }
        let weight_rule = p.delta.is_none() || self.command == Command::Probe;
        if weight_rule && !(p.p > 2.0 && p.p < 4.0) {
            return Err(Error::Invalid(format!("p = {} outside (2, 4)", p.p)));
        }
        if self.deltas().is_empty() || self.deltas().iter().any(|d| !d.is_finite()) {
            return Err(Error::Invalid("delta list empty or non-finite".into()));
        }
        let ls = self.ls();
        if matches!(self.command, Command::Glue | Command::Solve | Command::Sweep) {
            if ls.is_empty() {
                return Err(Error::Invalid("l list is empty".into()));
            }
            if let Some(l) = ls.iter().find(|l| !(**l >= 2.0)) {
                return Err(Error::Invalid(format!("l = {l} below 2")));
            }
            if !(p.h > 0.0 && p.pad >= 0.0) || ((2.0 * ls[0] + 2.0 * p.pad) / p.h) < STENCIL_SUPPORT as f64 {
                return Err(Error::Invalid("glued grid below the stencil support".into()));
            }
            if self.deltas().iter().any(|d| !(*d > 0.0)) {
                return Err(Error::Invalid("gluing weight must be positive".into()));
            }
        }
        if !(p.tol > 0.0) || p.max_iter == 0 {
            return Err(Error::Invalid("tolerance and iteration cap must be positive".into()));
        }
        match self.command {
            Command::Spectrum | Command::Index => {
                model_from_name(&p.model)?;
                if !(p.strip.0 < p.strip.1) {
                    return Err(Error::Invalid("spectrum strip must have lo < hi".into()));
                }
                if !(p.step > 0.0 && p.length / p.step >= STENCIL_SUPPORT as f64) {
                    return Err(Error::Invalid("index truncation below the stencil support".into()));
                }
            }
            Command::Cylindrify => {
                if p.samples < STENCIL_SUPPORT || !(p.t_range.0 < p.t_range.1) {
                    return Err(Error::Invalid("cylindrify range or samples invalid".into()));
                }
                if p.orientation.abs() != 1 {
                    return Err(Error::Invalid("orientation must be ±1".into()));
                }
            }
            Command::Probe if p.levels < 2 => return Err(Error::Invalid("probe needs ≥ 2 levels".into())),
            Command::Curvature if p.order != 2 && p.order != 4 => {
                return Err(Error::Invalid("order must be 2 or 4".into()))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn grid(&self) -> GlueGrid {
        GlueGrid { h: self.params.h, pad: self.params.pad }
    }

    pub fn body(&self, key: &str, base: &Path) -> Result<Body> {
        match self.input(key, base)? {
            Input::Builtin(name) => builtin_body(&name),
            Input::File(path) => Body::from_ce(CEProfile::from_json(&std::fs::read_to_string(path)?)?),
        }
    }

    pub fn glue_spec(&self, base: &Path, delta: f64) -> Result<GlueSpec> {
        Ok(GlueSpec { body1: self.body("body1", base)?, body2: self.body("body2", base)?, delta, grid: self.grid() })
    }
}

fn builtin_known(key: &str, name: &str) -> Option<()> {
    match key {
        "body1" | "body2" => BODIES.contains(&name).then_some(()),
        "profile" => PROFILES.contains(&name).then_some(()),
        _ => None,
    }
}

pub const BODIES: &[&str] =
    &["round-s4", "round-s4-z2", "fubini-study", "eguchi-hanson", "half-cylinder", "half-cylinder-z2"];
pub const PROFILES: &[&str] = &["round-s4", "fubini-study", "eguchi-hanson", "flat-ball"];

pub fn builtin_body(name: &str) -> Result<Body> {
    match name {
        "round-s4" => Body::round_s4(),
        "round-s4-z2" => Body::round_s4_quotient(2),
        "fubini-study" => Body::fubini_study(),
        "eguchi-hanson" => Body::compactified_eguchi_hanson(1.0),
        "half-cylinder" => Ok(Body::half_cylinder(1)),
        "half-cylinder-z2" => Ok(Body::half_cylinder(2)),
        other => Err(Error::Invalid(format!("unknown body `{other}`"))),
    }
}

/// Built-in radial profiles, passed to a generic consumer.
pub fn with_profile<T>(name: &str, f: impl ProfileVisitor<Output = T>) -> Result<T> {
    match name {
        "round-s4" => f.visit(RoundS4),
        "fubini-study" => f.visit(FubiniStudy { quotient_k: 1 }),
        "eguchi-hanson" => f.visit(CompactifiedEguchiHanson { a: 1.0 }),
        "flat-ball" => f.visit(FlatBall),
        other => Err(Error::Invalid(format!("unknown profile `{other}`"))),
    }
}

pub trait ProfileVisitor {
    type Output;
    fn visit<P: crate::cohom_one::RadialProfile + Clone + 'static>(self, p: P) -> Result<Self::Output>;
}

pub fn model_from_name(name: &str) -> Result<ModelOperator> {
    match name {
        "s3-scalar" => Ok(ModelOperator::s3_scalar_exact(3)),
        "s3-scalar-discrete" => crate::cyl_spectral::s3_scalar_discrete(600, 3.0, 1.0),
        "reduced-asd+" => Ok(ModelOperator::reduced_asd(1.0)),
        "reduced-asd-" => Ok(ModelOperator::reduced_asd(-1.0)),
        "point" => Ok(ModelOperator::point(1.0)),
        other => Err(Error::Invalid(format!("unknown model `{other}`"))),
    }
}
