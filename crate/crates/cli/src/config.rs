use std::path::Path;

use lieocp::lie::GROUP_TOL;
use lieocp::models::{heavy_top_system, unicycle_system, HeavyTopParams, UnicycleParams};
use lieocp::solver::Mode;
use lieocp::{GroupElement, LieAlgebra, ReducedSystem, Retraction};
use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    HeavyTop,
    Unicycle,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub h: f64,
    pub horizon: f64,
    pub retraction: String,
    /// Scheme for `shoot` and `order-study`: continuous or discrete.
    pub mode: String,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub shoot_tol: f64,
    pub max_iters: usize,
    /// Number of shooting segments, 1 to 4.
    pub segments: usize,
    pub order_steps: Vec<f64>,
    /// Random samples per check in `validate`.
    pub samples: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            h: 0.01,
            horizon: 1.0,
            retraction: "cayley".into(),
            mode: "continuous".into(),
            newton_tol: 1e-10,
            newton_max_iters: 50,
            shoot_tol: 1e-8,
            max_iters: 100,
            segments: 1,
            order_steps: vec![0.1, 0.05, 0.025],
            samples: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeavyTopSection {
    /// Three principal moments or nine row-major entries.
    pub inertia: Vec<f64>,
    pub mass: f64,
    pub gravity: f64,
    pub length: f64,
    pub chi: [f64; 3],
    pub mu0: [f64; 3],
    /// Initial attitude: a rotation vector (axis times angle) or nine
    /// row-major rotation matrix entries.
    pub g0: Vec<f64>,
    /// Target attitude, same forms as `g0`.
    pub target: Vec<f64>,
}

impl Default for HeavyTopSection {
    fn default() -> Self {
        Self {
            inertia: vec![1.0, 2.0, 3.0],
            mass: 1.0,
            gravity: 1.0,
            length: 1.0,
            chi: [0.0, 0.0, 1.0],
            mu0: [0.5, -0.3, 0.8],
            g0: vec![0.3, 0.2, -0.1],
            target: vec![0.8, -0.4, 0.6],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnicycleSection {
    pub kappa: f64,
    /// `(x, y, θ)`.
    pub start: [f64; 3],
    pub goal: [f64; 3],
    /// `(2u¹, u², λ₃)`.
    pub mu0: [f64; 3],
    /// Translation applied to both endpoints at the start of continuation;
    /// `[0, 0]` shoots directly.
    pub continuation_offset: [f64; 2],
}

impl Default for UnicycleSection {
    fn default() -> Self {
        Self {
            kappa: 0.1,
            start: [-2.0, -0.2, 0.0],
            goal: [2.0, 0.2, 0.0],
            mu0: [0.2, 0.8, 0.1],
            continuation_offset: [0.0, -2.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub heavytop: HeavyTopSection,
    #[serde(default)]
    pub unicycle: UnicycleSection,
}

/// Validated configuration with the model built.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub file: FileConfig,
    pub sys: ReducedSystem,
    pub retraction: Retraction,
    pub mode: Mode,
    pub steps: usize,
    pub mu0: [f64; 3],
    pub g0: GroupElement,
    pub target: GroupElement,
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn finite(name: &str, values: &[f64]) -> Result<(), String> {
    check(values.iter().all(|v| v.is_finite()), || format!("{name} must be finite"))
}

fn attitude(name: &str, v: &[f64], alg: &LieAlgebra) -> Result<GroupElement, String> {
    let g = match v.len() {
        3 => GroupElement::so3_from_rotation_vector(&[v[0], v[1], v[2]]),
        9 => GroupElement(DMatrix::from_row_slice(3, 3, v)),
        k => return Err(format!("{name} needs 3 (rotation vector) or 9 (matrix) entries, got {k}")),
    };
    let r = alg.group_residual(&g);
    check(r <= GROUP_TOL, || format!("{name} is not a rotation (residual {r:.3e})"))?;
    Ok(g)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let file: FileConfig = toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))?;
        Self::from_file(file)
    }

    pub fn from_file(file: FileConfig) -> Result<Self, String> {
        let n = &file.numerics;
        check(n.h > 0.0 && n.h.is_finite(), || format!("numerics.h must be positive, got {}", n.h))?;
        check(n.horizon > 0.0 && n.horizon.is_finite(), || {
            format!("numerics.horizon must be positive, got {}", n.horizon)
        })?;
        let steps = lieocp::solver::steps_for(n.horizon, n.h).map_err(|e| format!("numerics: {e}"))?;
        check(n.newton_tol > 0.0 && n.newton_max_iters > 0, || {
            "Newton tolerance and iteration limit must be positive".into()
        })?;
        check(n.shoot_tol > 0.0 && n.max_iters > 0, || {
            "shooting tolerance and iteration limit must be positive".into()
        })?;
        check((1..=lieocp::solver::MAX_SEGMENTS).contains(&n.segments), || {
            format!("numerics.segments must be between 1 and {}", lieocp::solver::MAX_SEGMENTS)
        })?;
        check(n.segments <= steps, || "more shooting segments than steps".into())?;
        check(n.order_steps.len() >= 3, || "numerics.order_steps needs at least three entries".into())?;
        check(n.order_steps.windows(2).all(|w| w[1] < w[0]) && n.order_steps.iter().all(|&h| h > 0.0), || {
            "numerics.order_steps must be positive and strictly decreasing".into()
        })?;
        check(n.samples > 0, || "numerics.samples must be positive".into())?;
        let retraction: Retraction = n.retraction.parse().map_err(|e| format!("numerics.retraction: {e}"))?;
        let mode: Mode = n.mode.parse().map_err(|e| format!("numerics.mode: {e}"))?;

        let (sys, mu0, g0, target) = match file.model {
            ModelKind::HeavyTop => {
                let s = &file.heavytop;
                finite("heavytop parameters", &[s.mass, s.gravity, s.length])?;
                finite("heavytop vectors", &[&s.chi[..], &s.mu0, &s.g0, &s.target].concat())?;
                finite("heavytop.inertia", &s.inertia)?;
                let inertia = match s.inertia.len() {
                    3 => Matrix3::from_diagonal(&Vector3::from_column_slice(&s.inertia)),
                    9 => Matrix3::from_row_slice(&s.inertia),
                    k => return Err(format!("heavytop.inertia needs 3 or 9 entries, got {k}")),
                };
                let chi = Vector3::from_column_slice(&s.chi);
                check(chi.norm() > 0.0, || "heavytop.chi must be nonzero".into())?;
                let params = HeavyTopParams {
                    inertia,
                    mass: s.mass,
                    gravity: s.gravity,
                    length: s.length,
                    chi: chi.normalize(),
                };
                let sys = heavy_top_system(&params).map_err(|e| format!("heavytop: {e}"))?;
                let g0 = attitude("heavytop.g0", &s.g0, sys.algebra())?;
                let target = attitude("heavytop.target", &s.target, sys.algebra())?;
                (sys, s.mu0, g0, target)
            }
            ModelKind::Unicycle => {
                let s = &file.unicycle;
                finite(
                    "unicycle parameters",
                    &[&[s.kappa][..], &s.start, &s.goal, &s.mu0, &s.continuation_offset].concat(),
                )?;
                let sys = unicycle_system(&UnicycleParams { kappa: s.kappa }).map_err(|e| format!("unicycle: {e}"))?;
                for (name, p) in [("start", s.start), ("goal", s.goal)] {
                    let gap = p[0] * p[0] + p[1] * p[1] - 1.0;
                    check(s.kappa == 0.0 || gap >= lieocp::dynamics::START_MARGIN, || {
                        format!("unicycle.{name} is inside the obstacle margin (x²+y²−1 = {gap:.3e})")
                    })?;
                }
                (
                    sys,
                    s.mu0,
                    GroupElement::se2(s.start[0], s.start[1], s.start[2]),
                    GroupElement::se2(s.goal[0], s.goal[1], s.goal[2]),
                )
            }
        };
        Ok(Self { file, sys, retraction, mode, steps, mu0, g0, target })
    }
}
