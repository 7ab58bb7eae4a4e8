//! Scene files: sectioned `key = value` text, one scene per file.
//!
//! ```text
//! [scene]
//! kind = chain_collision
//! preset = soft
//!
//! [integrator]
//! method = asearch
//!
//! [time]
//! h = 1/300
//! ```
//!
//! Unknown sections or keys are errors. Numbers may be written as fractions.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use asearch_core::integrators::Decay;
use asearch_core::{IntegratorKind, IntegratorSpec, NewtonSettings};

use crate::error::{CliError, CliResult};

/// Every accepted `section.key`.
pub const KNOWN_KEYS: &[&str] = &[
    "scene.kind",
    "scene.preset",
    "material.youngs_modulus",
    "material.wave_speed",
    "material.density",
    "material.mass",
    "material.elements",
    "material.length",
    "material.stiffness",
    "material.rest_length",
    "material.pivot",
    "barrier.kind",
    "barrier.kappa",
    "barrier.dhat",
    "barrier.wall",
    "barrier.stiffness",
    "damping.rayleigh_mu",
    "damping.mass_mu",
    "damping.friction_mu",
    "integrator.method",
    "integrator.alpha_min",
    "integrator.alpha_max",
    "integrator.sparse_search",
    "integrator.e0_factor",
    "integrator.decay_tau",
    "integrator.decay_ground",
    "integrator.decay_start",
    "integrator.newton_tolerance_scale",
    "integrator.newton_max_iterations",
    "time.h",
    "time.duration",
    "time.snapshot_interval",
    "initial.x",
    "initial.v",
    "initial.gap",
    "initial.speed",
    "initial.beta",
    "initial.stretch",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    /// 1-based source line; `None` for values set programmatically.
    pub line: Option<usize>,
}

/// Parsed but untyped scene file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split(['#', ';']).next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::at_line(line, format!("malformed section header `{body}`")))?
                    .trim()
                    .to_ascii_lowercase();
                if !KNOWN_KEYS.iter().any(|k| k.split('.').next() == Some(name.as_str())) {
                    return Err(CliError::at_line(line, format!("unknown section [{name}]")));
                }
                section = Some(name);
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| CliError::at_line(line, format!("expected `key = value`, found `{body}`")))?;
            let sec = section
                .as_deref()
                .ok_or_else(|| CliError::at_line(line, "key outside of any section"))?;
            let full = format!("{sec}.{}", key.trim().to_ascii_lowercase());
            if !KNOWN_KEYS.contains(&full.as_str()) {
                return Err(CliError::at_line(line, format!("unknown key `{full}`")));
            }
            let entry = Entry { value: value.trim().to_string(), line: Some(line) };
            if let Some(prev) = entries.insert(full.clone(), entry) {
                return Err(CliError::at_line(
                    line,
                    format!("duplicate key `{full}` (first set at line {})", prev.line.unwrap_or(0)),
                ));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> CliResult<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| CliError::io(path.as_ref(), e))?;
        Self::parse(&text)
    }

    /// Overrides or adds `section.key`.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let key = key.trim().to_ascii_lowercase();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::config(format!("unknown key `{key}`")));
        }
        self.entries.insert(key, Entry { value: value.trim().to_string(), line: None });
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn typed<T>(&self, key: &str, parse: impl Fn(&str) -> Option<T>, what: &str) -> CliResult<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => parse(&e.value).map(Some).ok_or_else(|| CliError::Config {
                line: e.line,
                msg: format!("`{key}` must be {what}, found `{}`", e.value),
            }),
        }
    }

    fn num(&self, key: &str) -> CliResult<Option<f64>> {
        self.typed(key, parse_number, "a number")
    }

    fn count(&self, key: &str) -> CliResult<Option<usize>> {
        self.typed(key, |s| s.parse().ok(), "a non-negative integer")
    }

    fn list(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        self.typed(key, parse_list, "a comma-separated list of numbers")
    }

    fn flag(&self, key: &str) -> CliResult<Option<bool>> {
        self.typed(
            key,
            |s| match s.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Some(true),
                "false" | "no" | "0" | "off" => Some(false),
                _ => None,
            },
            "true or false",
        )
    }

    fn word<T: FromStr>(&self, key: &str, what: &str) -> CliResult<Option<T>> {
        self.typed(key, |s| s.parse().ok(), what)
    }

    fn error(&self, key: &str, msg: impl Into<String>) -> CliError {
        CliError::Config { line: self.entries.get(key).and_then(|e| e.line), msg: msg.into() }
    }
}

/// A decimal number or a fraction `a/b`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?,
        None => s.parse().ok()?,
    };
    v.is_finite().then_some(v)
}

pub fn parse_list(s: &str) -> Option<Vec<f64>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(parse_number).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneKind {
    Harmonic,
    PointCollision,
    ChainCollision,
    CentralOrbit,
    FreeChain,
}

impl SceneKind {
    pub fn is_chain(self) -> bool {
        matches!(self, SceneKind::ChainCollision | SceneKind::FreeChain)
    }
}

impl FromStr for SceneKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "harmonic" => SceneKind::Harmonic,
            "point_collision" => SceneKind::PointCollision,
            "chain_collision" => SceneKind::ChainCollision,
            "central_orbit" => SceneKind::CentralOrbit,
            "free_chain" => SceneKind::FreeChain,
            _ => return Err(()),
        })
    }
}

impl fmt::Display for SceneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SceneKind::Harmonic => "harmonic",
            SceneKind::PointCollision => "point_collision",
            SceneKind::ChainCollision => "chain_collision",
            SceneKind::CentralOrbit => "central_orbit",
            SceneKind::FreeChain => "free_chain",
        })
    }
}

/// Chain material presets: 1 m, 30 elements, 10 kg, wave speed 1/10/100 m/s.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Soft,
    Medium,
    Stiff,
    DampedSoft,
}

impl Preset {
    pub fn wave_speed(self) -> f64 {
        match self {
            Preset::Soft | Preset::DampedSoft => 1.0,
            Preset::Medium => 10.0,
            Preset::Stiff => 100.0,
        }
    }
}

impl FromStr for Preset {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "soft" => Preset::Soft,
            "medium" => Preset::Medium,
            "stiff" => Preset::Stiff,
            "damped_soft" => Preset::DampedSoft,
            _ => return Err(()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierChoice {
    None,
    Quadratic,
    Ipc,
}

impl FromStr for BarrierChoice {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "none" => BarrierChoice::None,
            "quadratic" => BarrierChoice::Quadratic,
            "ipc" => BarrierChoice::Ipc,
            _ => return Err(()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    /// Axial modulus (N); derived from the wave speed when absent.
    pub youngs_modulus: Option<f64>,
    pub wave_speed: Option<f64>,
    /// Total mass (kg).
    pub mass: f64,
    pub elements: usize,
    pub length: f64,
    /// Spring constant for the harmonic and orbit scenes (N/m).
    pub stiffness: f64,
    pub rest_length: f64,
    pub pivot: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierConfig {
    pub kind: BarrierChoice,
    /// IPC stiffness (N/m); the energy scale is `kappa · dhat²`.
    pub kappa: f64,
    pub dhat: f64,
    pub wall: f64,
    /// Quadratic barrier stiffness (N/m).
    pub stiffness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DampingConfig {
    pub rayleigh_mu: f64,
    pub mass_mu: f64,
    pub friction_mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    pub x: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
    /// Distance of the leading node from the barrier support edge (m).
    pub gap: f64,
    pub speed: f64,
    /// Collision phase: start `β h · speed` outside the barrier support.
    pub beta: Option<f64>,
    /// Uniform initial strain factor of a chain.
    pub stretch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub kind: SceneKind,
    pub preset: Option<Preset>,
    pub material: Material,
    pub barrier: BarrierConfig,
    pub damping: DampingConfig,
    pub integrator: IntegratorSpec,
    pub newton: NewtonSettings,
    pub h: f64,
    pub duration: f64,
    /// Time between state snapshots (s); 0 records every step.
    pub snapshot_interval: f64,
    pub initial: InitialConfig,
}

impl SceneConfig {
    pub fn load(path: impl AsRef<Path>) -> CliResult<Self> {
        Self::from_raw(&RawConfig::load(path)?)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    pub fn from_raw(raw: &RawConfig) -> CliResult<Self> {
        let kind: SceneKind = raw
            .word("scene.kind", "one of harmonic, point_collision, chain_collision, central_orbit, free_chain")?
            .ok_or_else(|| CliError::config("missing `scene.kind`"))?;
        let preset: Option<Preset> = raw.word("scene.preset", "one of soft, medium, stiff, damped_soft")?;
        if preset.is_some() && !kind.is_chain() {
            return Err(raw.error("scene.preset", format!("presets apply to chain scenes, not {kind}")));
        }

        let chain_defaults = preset.is_some();
        let material = Material {
            youngs_modulus: raw.num("material.youngs_modulus")?,
            wave_speed: raw.num("material.wave_speed")?.or(preset.map(Preset::wave_speed)),
            mass: match (raw.num("material.mass")?, raw.num("material.density")?) {
                (Some(_), Some(_)) => {
                    return Err(raw.error("material.density", "set either `material.mass` or `material.density`"))
                }
                (Some(m), None) => m,
                (None, Some(rho)) => rho * raw.num("material.length")?.unwrap_or(1.0),
                (None, None) => {
                    if kind.is_chain() {
                        10.0
                    } else {
                        1.0
                    }
                }
            },
            elements: raw.count("material.elements")?.unwrap_or(30),
            length: raw.num("material.length")?.unwrap_or(1.0),
            stiffness: raw.num("material.stiffness")?.unwrap_or(1.0),
            rest_length: raw.num("material.rest_length")?.unwrap_or(0.0),
            pivot: match raw.list("material.pivot")? {
                None => [0.0, 0.0],
                Some(p) if p.len() == 2 => [p[0], p[1]],
                Some(_) => return Err(raw.error("material.pivot", "`material.pivot` needs two numbers")),
            },
        };

        let default_barrier = match kind {
            SceneKind::ChainCollision => BarrierChoice::Ipc,
            SceneKind::PointCollision => BarrierChoice::Quadratic,
            _ => BarrierChoice::None,
        };
        let barrier = BarrierConfig {
            kind: raw.word("barrier.kind", "one of none, quadratic, ipc")?.unwrap_or(default_barrier),
            kappa: raw.num("barrier.kappa")?.unwrap_or(asearch_core::potentials::DEFAULT_KAPPA),
            dhat: raw.num("barrier.dhat")?.unwrap_or(asearch_core::potentials::DEFAULT_DHAT),
            wall: raw.num("barrier.wall")?.unwrap_or(0.0),
            stiffness: raw.num("barrier.stiffness")?.unwrap_or(1.0),
        };

        let damping = DampingConfig {
            rayleigh_mu: raw
                .num("damping.rayleigh_mu")?
                .unwrap_or(if preset == Some(Preset::DampedSoft) { 0.05 } else { 0.0 }),
            mass_mu: raw.num("damping.mass_mu")?.unwrap_or(0.0),
            friction_mu: raw.num("damping.friction_mu")?.unwrap_or(0.0),
        };

        let method: IntegratorKind = match raw.get("integrator.method") {
            None => IntegratorKind::ASearch,
            Some(e) => e.value.parse().map_err(|err| CliError::Config { line: e.line, msg: format!("{err}") })?,
        };
        let mut integrator = IntegratorSpec::new(method);
        integrator.alpha_min = raw.num("integrator.alpha_min")?.unwrap_or(integrator.alpha_min);
        integrator.alpha_max = raw.num("integrator.alpha_max")?.unwrap_or(integrator.alpha_max);
        integrator.sparse_search = raw.flag("integrator.sparse_search")?.unwrap_or(false);
        integrator.e0_factor = raw.num("integrator.e0_factor")?.unwrap_or(1.0);
        if let Some(tau) = raw.num("integrator.decay_tau")? {
            integrator.decay = Some(Decay {
                tau,
                ground: raw.num("integrator.decay_ground")?.unwrap_or(0.0),
                start_time: raw.num("integrator.decay_start")?.unwrap_or(0.0),
            });
        } else if raw.get("integrator.decay_ground").is_some() || raw.get("integrator.decay_start").is_some() {
            return Err(CliError::config("decay settings need `integrator.decay_tau`"));
        }
        integrator
            .validate()
            .map_err(|e| CliError::Config { line: raw.get("integrator.method").and_then(|e| e.line), msg: e.to_string() })?;

        let mut newton = if chain_defaults || kind == SceneKind::PointCollision {
            NewtonSettings::tight()
        } else {
            NewtonSettings::default()
        };
        if let Some(s) = raw.num("integrator.newton_tolerance_scale")? {
            newton.step_tolerance_scale = s;
        }
        if let Some(n) = raw.count("integrator.newton_max_iterations")? {
            newton.max_iterations = n;
        }
        newton.validate().map_err(|e| CliError::config(e.to_string()))?;

        let h = raw.num("time.h")?.ok_or_else(|| CliError::config("missing `time.h`"))?;
        if !(h > 0.0) {
            return Err(raw.error("time.h", format!("`time.h` must be positive, got {h}")));
        }
        let duration = match raw.num("time.duration")? {
            Some(d) => d,
            None if chain_defaults => 4.0,
            None => return Err(CliError::config("missing `time.duration`")),
        };
        if !(duration >= 0.0) {
            return Err(raw.error("time.duration", format!("`time.duration` must be non-negative, got {duration}")));
        }
        let snapshot_interval = raw
            .num("time.snapshot_interval")?
            .unwrap_or(if chain_defaults { 1.0 / 30.0 } else { 0.0 });

        let initial = InitialConfig {
            x: raw.list("initial.x")?,
            v: raw.list("initial.v")?,
            gap: raw.num("initial.gap")?.unwrap_or(0.1),
            speed: raw.num("initial.speed")?.unwrap_or(if kind == SceneKind::FreeChain { 0.0 } else { 1.0 }),
            beta: raw.num("initial.beta")?,
            stretch: raw.num("initial.stretch")?.unwrap_or(1.0),
        };
        if let Some(b) = initial.beta {
            if kind != SceneKind::PointCollision {
                return Err(raw.error("initial.beta", "`initial.beta` applies to point_collision scenes"));
            }
            if !(0.0..=1.0).contains(&b) {
                return Err(raw.error("initial.beta", format!("`initial.beta` must lie in [0, 1], got {b}")));
            }
        }

        Ok(Self {
            kind,
            preset,
            material,
            barrier,
            damping,
            integrator,
            newton,
            h,
            duration,
            snapshot_interval,
            initial,
        })
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.h).round() as usize
    }

    pub fn snapshot_stride(&self) -> usize {
        ((self.snapshot_interval / self.h).round() as usize).max(1)
    }
}
