//! Time-stepping methods.
//!
//! Baselines (θ-methods, BDF2, symplectic Euler, blending) and the decoupled
//! family built on implicit Euler: A-1 keeps the implicit position and takes
//! the explicit-Euler velocity, A-search interpolates the velocity with a
//! per-step weight `α` chosen to hit an energy target.

mod basic;
mod blending;
mod decoupled;
mod linear;
mod stepper;

pub use basic::{
    step_bdf2, step_explicit_euler, step_implicit_euler, step_symplectic_euler, step_theta_inner,
    step_theta_outer,
};
pub use blending::step_blending;
pub use decoupled::{
    solve_alpha, step_a1, step_asearch, step_decoupled_alpha, update_energy_target, AlphaChoice,
    SignWindow,
};
pub use linear::step_decoupled_linear;
pub use stepper::Stepper;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegratorKind {
    ExplicitEuler,
    ImplicitEuler,
    /// `z' = z + h f((1−θ) z + θ z')`
    ThetaInner(f64),
    /// `z' = z + h ((1−θ) f(z) + θ f(z'))`
    ThetaOuter(f64),
    Midpoint,
    Trapezoidal,
    Bdf2,
    SymplecticEuler,
    A1,
    ASearch,
    Blending,
}

impl IntegratorKind {
    pub fn name(&self) -> String {
        match self {
            IntegratorKind::ExplicitEuler => "explicit_euler".into(),
            IntegratorKind::ImplicitEuler => "implicit_euler".into(),
            IntegratorKind::ThetaInner(t) => format!("theta_inner:{t}"),
            IntegratorKind::ThetaOuter(t) => format!("theta_outer:{t}"),
            IntegratorKind::Midpoint => "midpoint".into(),
            IntegratorKind::Trapezoidal => "trapezoidal".into(),
            IntegratorKind::Bdf2 => "bdf2".into(),
            IntegratorKind::SymplecticEuler => "symplectic_euler".into(),
            IntegratorKind::A1 => "a1".into(),
            IntegratorKind::ASearch => "asearch".into(),
            IntegratorKind::Blending => "blending".into(),
        }
    }

    /// Whether the method can fold a dissipation pseudo-potential into its solve.
    pub fn supports_dissipation(&self) -> bool {
        matches!(
            self,
            IntegratorKind::ImplicitEuler | IntegratorKind::Bdf2 | IntegratorKind::A1 | IntegratorKind::ASearch
        )
    }
}

impl fmt::Display for IntegratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for IntegratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        let theta = |rest: &str| -> Result<f64> {
            rest.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad θ in integrator name {s:?}")))
        };
        Ok(match s.as_str() {
            "explicit_euler" => IntegratorKind::ExplicitEuler,
            "implicit_euler" => IntegratorKind::ImplicitEuler,
            "midpoint" | "implicit_midpoint" => IntegratorKind::Midpoint,
            "trapezoidal" => IntegratorKind::Trapezoidal,
            "bdf2" => IntegratorKind::Bdf2,
            "symplectic_euler" => IntegratorKind::SymplecticEuler,
            "a1" => IntegratorKind::A1,
            "asearch" => IntegratorKind::ASearch,
            "blending" => IntegratorKind::Blending,
            other => {
                if let Some(rest) = other.strip_prefix("theta_inner:") {
                    IntegratorKind::ThetaInner(theta(rest)?)
                } else if let Some(rest) = other.strip_prefix("theta_outer:") {
                    IntegratorKind::ThetaOuter(theta(rest)?)
                } else {
                    return Err(Error::InvalidParameter(format!("unknown integrator {other:?}")));
                }
            }
        })
    }
}

/// Exponential relaxation of the energy target toward `ground`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decay {
    pub tau: f64,
    pub ground: f64,
    pub start_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSpec {
    pub kind: IntegratorKind,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Only search `α` after three consecutive steps on the same side of the target.
    pub sparse_search: bool,
    pub decay: Option<Decay>,
    /// `E₀ = e0_factor · H₀`.
    pub e0_factor: f64,
}

impl IntegratorSpec {
    pub fn new(kind: IntegratorKind) -> Self {
        Self {
            kind,
            alpha_min: 0.0,
            alpha_max: 1.1,
            sparse_search: false,
            decay: None,
            e0_factor: 1.0,
        }
    }

    pub fn with_alpha_range(mut self, alpha_min: f64, alpha_max: f64) -> Self {
        self.alpha_min = alpha_min;
        self.alpha_max = alpha_max;
        self
    }

    pub fn with_decay(mut self, decay: Decay) -> Self {
        self.decay = Some(decay);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_min <= 1.0 && 1.0 <= self.alpha_max) {
            return Err(Error::InvalidParameter(format!(
                "need alpha_min ≤ 1 ≤ alpha_max, got [{}, {}]",
                self.alpha_min, self.alpha_max
            )));
        }
        if let Some(d) = self.decay {
            if !(d.tau > 0.0) {
                return Err(Error::InvalidParameter(format!("decay tau must be positive, got {}", d.tau)));
            }
        }
        if !(self.e0_factor > 0.0 && self.e0_factor <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "e0_factor must lie in (0, 1], got {}",
                self.e0_factor
            )));
        }
        match self.kind {
            IntegratorKind::ThetaInner(t) | IntegratorKind::ThetaOuter(t) if !(0.0..=1.0).contains(&t) => {
                Err(Error::InvalidParameter(format!("θ must lie in [0, 1], got {t}")))
            }
            _ => Ok(()),
        }
    }
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self::new(IntegratorKind::ASearch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    /// `NaN` for methods without a velocity weight.
    pub alpha_used: f64,
    pub energy_after: f64,
    pub target: f64,
    pub friction_loss: f64,
    pub newton_iters: usize,
    pub clipped: bool,
}

impl StepDiagnostics {
    pub(crate) fn plain(newton_iters: usize) -> Self {
        Self {
            alpha_used: f64::NAN,
            energy_after: f64::NAN,
            target: f64::NAN,
            friction_loss: 0.0,
            newton_iters,
            clipped: false,
        }
    }
}

/// Previous step `(x_{n−1}, v_{n−1})` for two-step methods.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    prev: Option<(DVector<f64>, DVector<f64>)>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_valid(&self) -> bool {
        self.prev.is_some()
    }

    pub fn record(&mut self, x: &DVector<f64>, v: &DVector<f64>) {
        self.prev = Some((x.clone(), v.clone()));
    }

    pub fn previous(&self) -> Option<(&DVector<f64>, &DVector<f64>)> {
        self.prev.as_ref().map(|(x, v)| (x, v))
    }

    pub fn clear(&mut self) {
        self.prev = None;
    }
}
