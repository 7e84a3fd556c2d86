//! Physical parameters, initial-condition generators, the oscillating mean
//! state and the deviation transform.
//!
//! Integrating the cRB system over the period gives a closed ODE system for
//! the means `ū`, `w̄` whose solution is
//!
//! ```text
//! ū(t) = d1 + δ d2 cos ωt + d3 t + δ d4 sin ωt
//! w̄(t) = d1 − γ d2 cos ωt + d3 t − γ d4 sin ωt,     ω = √(ε(δ+γ))
//! ```
//!
//! with `d1 = (γF̄1 + δF̄2)/(δ+γ)`, `d2 = (F̄1 − F̄2)/(δ+γ)` and analogous
//! velocity terms `d3`, `d4`. Overbars are true means `(1/2L)∫`.

use std::f64::consts::SQRT_2;

use crate::error::{CrbError, Result};
use crate::special::{complete_elliptic_k, jacobi_cn_sn_dn};
use crate::spectral::GridSpec;

/// Threshold above which `d3`, `d4` are reported as nonzero.
pub const D34_TOL: f64 = 1e-10;

/// Coefficients of the cRB system.
///
/// ```text
/// u_tt − u_xx = ε[½(u²)_xx + u_ttxx − δ(u − w)]
/// w_tt − c²w_xx = ε[½α(w²)_xx + β w_ttxx + γ(u − w)]
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysParams {
    /// Small amplitude parameter ε.
    pub eps: f64,
    /// Layer-2 nonlinearity α.
    pub alpha: f64,
    /// Layer-2 dispersion β.
    pub beta: f64,
    /// Coupling coefficient γ (layer 2).
    pub gamma: f64,
    /// Coupling coefficient δ (layer 1).
    pub delta: f64,
    /// Characteristic speed ratio c.
    pub c: f64,
}

impl PhysParams {
    /// Validated constructor.
    pub fn new(eps: f64, alpha: f64, beta: f64, gamma: f64, delta: f64, c: f64) -> Result<Self> {
        let p = Self {
            eps,
            alpha,
            beta,
            gamma,
            delta,
            c,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks the structural requirements `ε > 0`, `δ, γ ≥ 0`, `δ + γ > 0`,
    /// `c > 0`, `β > 0` and finiteness.
    pub fn validate(&self) -> Result<()> {
        let all = [self.eps, self.alpha, self.beta, self.gamma, self.delta, self.c];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(CrbError::Config("parameters must be finite".into()));
        }
        if self.eps <= 0.0 {
            return Err(CrbError::Config(format!("ε must be positive, got {}", self.eps)));
        }
        if self.gamma < 0.0 || self.delta < 0.0 || self.delta + self.gamma <= 0.0 {
            return Err(CrbError::Config(format!(
                "coupling must satisfy δ, γ ≥ 0 and δ + γ > 0, got δ = {}, γ = {}",
                self.delta, self.gamma
            )));
        }
        if self.c <= 0.0 || self.beta <= 0.0 {
            return Err(CrbError::Config("c and β must be positive".into()));
        }
        Ok(())
    }

    /// Mean oscillation frequency `ω = √(ε(δ+γ))`.
    pub fn omega(&self) -> f64 {
        (self.eps * (self.delta + self.gamma)).sqrt()
    }

    /// Slow-time frequency `ω̃ = √(δ+γ)`, so that `ω̃ τ = ω t` with `τ = √ε t`.
    pub fn omega_tilde(&self) -> f64 {
        (self.delta + self.gamma).sqrt()
    }

    /// Same parameters with a different ε.
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }
}

/// Which asymptotic regime the weakly-nonlinear construction uses. Always
/// chosen explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseKind {
    /// `c − 1 = O(ε)`: one pair of characteristics, coupled Ostrovsky pairs.
    CloseSpeeds,
    /// `c − 1 = O(1)`: separate characteristics per layer.
    DistinctSpeeds,
}

impl CaseKind {
    /// Short identifier used in configs and reports.
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseKind::CloseSpeeds => "close",
            CaseKind::DistinctSpeeds => "distinct",
        }
    }
}

impl std::str::FromStr for CaseKind {
    type Err = CrbError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "close" | "case1" => Ok(CaseKind::CloseSpeeds),
            "distinct" | "case2" => Ok(CaseKind::DistinctSpeeds),
            other => Err(CrbError::Config(format!("unknown case '{other}'"))),
        }
    }
}

/// Displacements `F1`, `F2` and velocities `V1`, `V2` at `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialCondition {
    /// Grid shared by all four fields.
    pub grid: GridSpec,
    /// `u(x, 0)`.
    pub f1: Vec<f64>,
    /// `w(x, 0)`.
    pub f2: Vec<f64>,
    /// `u_t(x, 0)`.
    pub v1: Vec<f64>,
    /// `w_t(x, 0)`.
    pub v2: Vec<f64>,
}

impl InitialCondition {
    /// Validated constructor.
    pub fn new(grid: GridSpec, f1: Vec<f64>, f2: Vec<f64>, v1: Vec<f64>, v2: Vec<f64>) -> Result<Self> {
        let n = grid.n_points();
        for (name, v) in [("F1", &f1), ("F2", &f2), ("V1", &v1), ("V2", &v2)] {
            if v.len() != n {
                return Err(CrbError::GridMismatch(format!(
                    "{name} has {} samples, grid has {n}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(CrbError::Data(format!("{name} contains non-finite values")));
            }
        }
        Ok(Self { grid, f1, f2, v1, v2 })
    }

    /// All-zero initial data.
    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.n_points();
        Self {
            grid,
            f1: vec![0.0; n],
            f2: vec![0.0; n],
            v1: vec![0.0; n],
            v2: vec![0.0; n],
        }
    }

    /// Largest displacement magnitude over both layers.
    pub fn max_abs_displacement(&self) -> f64 {
        self.f1.iter().chain(&self.f2).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Coefficients of the mean trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanState {
    /// Constant part.
    pub d1: f64,
    /// Cosine amplitude.
    pub d2: f64,
    /// Linear drift (zero under the zero-velocity-mean condition).
    pub d3: f64,
    /// Sine amplitude (zero under the zero-velocity-mean condition).
    pub d4: f64,
    /// Frequency ω.
    pub omega: f64,
}

impl MeanState {
    /// Whether the zero-velocity-mean condition `d3 = d4 = 0` holds.
    pub fn satisfies_zero_velocity_mean(&self) -> bool {
        self.d3.abs() <= D34_TOL && self.d4.abs() <= D34_TOL
    }

    /// Means `(ū(t), w̄(t))`.
    pub fn trajectory(&self, p: &PhysParams, t: f64) -> (f64, f64) {
        mean_trajectory(self, p, t)
    }

    /// Time derivatives `(dū/dt, dw̄/dt)`.
    pub fn trajectory_rate(&self, p: &PhysParams, t: f64) -> (f64, f64) {
        let (s, c) = (self.omega * t).sin_cos();
        let w = self.omega;
        (
            -p.delta * self.d2 * w * s + self.d3 + p.delta * self.d4 * w * c,
            p.gamma * self.d2 * w * s + self.d3 - p.gamma * self.d4 * w * c,
        )
    }
}

/// Computes `d1 … d4` from the initial data. A warning is logged when the
/// zero-velocity-mean condition is violated.
pub fn mean_decomposition(ic: &InitialCondition, p: &PhysParams) -> MeanState {
    let g = &ic.grid;
    let (f1, f2) = (g.mean(&ic.f1), g.mean(&ic.f2));
    let (v1, v2) = (g.mean(&ic.v1), g.mean(&ic.v2));
    let sum = p.delta + p.gamma;
    let omega = p.omega();
    let ms = MeanState {
        d1: (p.gamma * f1 + p.delta * f2) / sum,
        d2: (f1 - f2) / sum,
        d3: (p.gamma * v1 + p.delta * v2) / sum,
        d4: (v1 - v2) / (omega * sum),
        omega,
    };
    if !ms.satisfies_zero_velocity_mean() {
        log::warn!(
            "velocity means are nonzero (d3 = {:e}, d4 = {:e}); the weakly-nonlinear construction requires d3 = d4 = 0",
            ms.d3,
            ms.d4
        );
    }
    ms
}

/// Evaluates `(ū(t), w̄(t))`.
pub fn mean_trajectory(ms: &MeanState, p: &PhysParams, t: f64) -> (f64, f64) {
    let (s, c) = (ms.omega * t).sin_cos();
    (
        ms.d1 + p.delta * ms.d2 * c + ms.d3 * t + p.delta * ms.d4 * s,
        ms.d1 - p.gamma * ms.d2 * c + ms.d3 * t - p.gamma * ms.d4 * s,
    )
}

/// Subtracts the initial means from the displacements, leaving zero-mean
/// deviation data. Velocities are unchanged.
pub fn deviation_transform(ic: &InitialCondition, ms: &MeanState, p: &PhysParams) -> InitialCondition {
    let (u0, w0) = mean_trajectory(ms, p, 0.0);
    InitialCondition {
        grid: ic.grid,
        f1: ic.f1.iter().map(|v| v - u0).collect(),
        f2: ic.f2.iter().map(|v| v - w0).collect(),
        v1: ic.v1.clone(),
        v2: ic.v2.clone(),
    }
}

/// Amplitudes and widths of the matched solitary pulses:
/// `A1 = 6k1²`, `Λ1 = √2/k1`, `A2 = 6ck2²/α`, `Λ2 = √(2cβ)/k2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolitaryShape {
    /// Layer-1 amplitude.
    pub a1: f64,
    /// Layer-1 width.
    pub lambda1: f64,
    /// Layer-2 amplitude.
    pub a2: f64,
    /// Layer-2 width.
    pub lambda2: f64,
}

impl SolitaryShape {
    /// Computes the pulse shape for wavenumbers `k1`, `k2`.
    pub fn new(p: &PhysParams, k1: f64, k2: f64) -> Result<Self> {
        if k1 == 0.0 || k2 == 0.0 || !k1.is_finite() || !k2.is_finite() {
            return Err(CrbError::Domain("solitary wavenumbers must be nonzero".into()));
        }
        Ok(Self {
            a1: 6.0 * k1 * k1,
            lambda1: SQRT_2 / k1,
            a2: 6.0 * p.c * k2 * k2 / p.alpha,
            lambda2: (2.0 * p.c * p.beta).sqrt() / k2,
        })
    }
}

fn sech2(z: f64) -> f64 {
    let s = 1.0 / z.cosh();
    s * s
}

/// Periodic images summed on each side of a pulse.
const PULSE_IMAGES: i32 = 3;

/// Adds a pulse centred at `-x0` moving in direction `dir` (+1 right,
/// -1 left) to the four fields. The pulse is periodised by summing its
/// images at shifts `2Lj`, so the data carry no kink at `x = ±L`.
fn add_pulse(ic: &mut InitialCondition, shape: &SolitaryShape, c: f64, x0: f64, dir: f64) {
    let g = ic.grid;
    let period = 2.0 * g.half_length();
    for j in 0..g.n_points() {
        for image in -PULSE_IMAGES..=PULSE_IMAGES {
            let x = g.node(j) + x0 + image as f64 * period;
            let (z1, z2) = (x / shape.lambda1, x / shape.lambda2);
            let (s1, s2) = (sech2(z1), sech2(z2));
            ic.f1[j] += shape.a1 * s1;
            ic.f2[j] += shape.a2 * s2;
            ic.v1[j] += dir * 2.0 * shape.a1 / shape.lambda1 * s1 * z1.tanh();
            ic.v2[j] += dir * 2.0 * c * shape.a2 / shape.lambda2 * s2 * z2.tanh();
        }
    }
}

/// Removes any residual velocity mean so that the mean state has no drift
/// (`d3 = d4 = 0`).
fn remove_velocity_means(ic: &mut InitialCondition) {
    let g = ic.grid;
    for v in [&mut ic.v1, &mut ic.v2] {
        let m = g.mean(v);
        v.iter_mut().for_each(|x| *x -= m);
    }
}

/// Right-propagating solitary pulses centred at `x = -x0`, with a constant
/// pedestal added to `F1`.
pub fn solitary_ic(
    p: &PhysParams,
    grid: GridSpec,
    k1: f64,
    k2: f64,
    x0: f64,
    pedestal: f64,
) -> Result<InitialCondition> {
    let shape = SolitaryShape::new(p, k1, k2)?;
    let mut ic = InitialCondition::zeros(grid);
    add_pulse(&mut ic, &shape, p.c, x0, 1.0);
    remove_velocity_means(&mut ic);
    ic.f1.iter_mut().for_each(|v| *v += pedestal);
    Ok(ic)
}

/// A right-propagating pulse at `-x0` plus a left-propagating pulse at
/// `-x1`. Warns when the pulses overlap above `1e-8`.
pub fn counter_ic(p: &PhysParams, grid: GridSpec, k1: f64, k2: f64, x0: f64, x1: f64) -> Result<InitialCondition> {
    let shape = SolitaryShape::new(p, k1, k2)?;
    let width = shape.lambda1.max(shape.lambda2);
    let sep = (x0 - x1).abs();
    if sep > 0.0 && 4.0 * sech2(0.5 * sep / width) > 1e-8 {
        log::warn!("counter-propagating pulses overlap (separation {sep}, width {width})");
    }
    let mut ic = InitialCondition::zeros(grid);
    add_pulse(&mut ic, &shape, p.c, x0, 1.0);
    add_pulse(&mut ic, &shape, p.c, x1, -1.0);
    remove_velocity_means(&mut ic);
    Ok(ic)
}

/// Cnoidal-wave data derived from the KdV cnoidal solution.
#[derive(Clone, Debug)]
pub struct CnoidalSetup {
    /// Initial condition on the generated grid.
    pub ic: InitialCondition,
    /// Grid with `2L = 3 L_K`.
    pub grid: GridSpec,
    /// Cnoidal wavelength `L_K = 2K(m)√(2/(f1 − f3))`.
    pub wavelength: f64,
    /// Elliptic parameter `m = (f2 − f3)/(f1 − f3)`.
    pub m: f64,
    /// Argument scale `θ = √((f1 − f3)/2)`.
    pub theta: f64,
}

/// Builds cnoidal initial data on a grid of three wavelengths with spacing
/// close to `dx`.
///
/// ```text
/// F1 = −6 f3 cn²((x + x0)θ | m),      F2 = −(6βc²/α) f3 cn²(…)
/// V1 = −12 f3 θ cn sn dn,             V2 = −(12βc²/α) f3 θ cn sn dn
/// ```
pub fn cnoidal_ic(p: &PhysParams, f1: f64, f2: f64, f3: f64, x0: f64, dx: f64) -> Result<CnoidalSetup> {
    if !(f3 < f2 && f2 <= f1 && f3 < f1) {
        return Err(CrbError::Domain(format!(
            "cnoidal constants must satisfy f3 < f2 ≤ f1, got ({f1}, {f2}, {f3})"
        )));
    }
    let m = (f2 - f3) / (f1 - f3);
    if !(m > 0.0 && m < 1.0) {
        return Err(CrbError::Domain(format!("elliptic parameter m = {m} outside (0, 1)")));
    }
    let theta = ((f1 - f3) / 2.0).sqrt();
    let kk = complete_elliptic_k(m)?;
    let wavelength = 2.0 * kk * (2.0 / (f1 - f3)).sqrt();
    let half = 1.5 * wavelength;
    let grid = GridSpec::from_spacing(half, dx)?;
    let amp2 = p.beta * p.c * p.c / p.alpha;
    let mut ic = InitialCondition::zeros(grid);
    for j in 0..grid.n_points() {
        let arg = (grid.node(j) + x0) * theta;
        let (cn, sn, dn) = jacobi_cn_sn_dn(arg, m)?;
        ic.f1[j] = -6.0 * f3 * cn * cn;
        ic.f2[j] = -6.0 * amp2 * f3 * cn * cn;
        ic.v1[j] = -12.0 * f3 * theta * cn * sn * dn;
        ic.v2[j] = -12.0 * amp2 * f3 * theta * cn * sn * dn;
    }
    Ok(CnoidalSetup {
        ic,
        grid,
        wavelength,
        m,
        theta,
    })
}

/// Parametric description of an initial condition.
#[derive(Clone, Debug, PartialEq)]
pub enum IcSpec {
    /// Co-propagating solitary pulses.
    Solitary {
        /// Layer-1 wavenumber.
        k1: f64,
        /// Layer-2 wavenumber.
        k2: f64,
        /// Pulse centre is at `-x0`.
        x0: f64,
        /// Constant added to `F1`.
        pedestal: f64,
    },
    /// Counter-propagating solitary pulses.
    Counter {
        /// Layer-1 wavenumber.
        k1: f64,
        /// Layer-2 wavenumber.
        k2: f64,
        /// Right-mover centre is at `-x0`.
        x0: f64,
        /// Left-mover centre is at `-x1`.
        x1: f64,
    },
    /// Cnoidal wave; the grid half-length is derived from the wavelength.
    Cnoidal {
        /// Largest root.
        f1: f64,
        /// Middle root.
        f2: f64,
        /// Smallest root.
        f3: f64,
        /// Phase offset.
        x0: f64,
    },
    /// Identically zero data.
    Zero,
}

impl IcSpec {
    /// Builds the initial data. For cnoidal data the supplied grid only
    /// provides the spacing; the returned grid may differ.
    pub fn build(&self, p: &PhysParams, grid: GridSpec) -> Result<InitialCondition> {
        match *self {
            IcSpec::Solitary { k1, k2, x0, pedestal } => solitary_ic(p, grid, k1, k2, x0, pedestal),
            IcSpec::Counter { k1, k2, x0, x1 } => counter_ic(p, grid, k1, k2, x0, x1),
            IcSpec::Cnoidal { f1, f2, f3, x0 } => Ok(cnoidal_ic(p, f1, f2, f3, x0, grid.dx())?.ic),
            IcSpec::Zero => Ok(InitialCondition::zeros(grid)),
        }
    }
}

/// Which solvers a preset drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sources {
    /// Direct cRB solver and the weakly-nonlinear construction.
    Both,
    /// Direct cRB solver only.
    DirectOnly,
}

/// A named experiment: parameters, grid, initial data and output times.
#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    /// Preset name, e.g. `fig2`.
    pub name: &'static str,
    /// One-line description.
    pub description: &'static str,
    /// Physical parameters.
    pub params: PhysParams,
    /// Spatial grid.
    pub grid: GridSpec,
    /// Asymptotic regime.
    pub case: CaseKind,
    /// Initial data.
    pub ic: IcSpec,
    /// Direct-solver time step.
    pub dt: f64,
    /// Final time.
    pub t_end: f64,
    /// Output times.
    pub snapshots: Vec<f64>,
    /// Solvers involved.
    pub sources: Sources,
}

impl Preset {
    /// Builds the initial data (and, for cnoidal presets, its grid).
    pub fn initial_condition(&self) -> Result<InitialCondition> {
        self.ic.build(&self.params, self.grid)
    }
}

fn pp(eps: f64, alpha: f64, beta: f64, gamma: f64, delta: f64, c: f64) -> PhysParams {
    PhysParams {
        eps,
        alpha,
        beta,
        gamma,
        delta,
        c,
    }
}

fn grid(l: f64, n: usize) -> GridSpec {
    GridSpec::new(l, n).expect("preset grids are valid")
}

fn cnoidal_grid(p: &PhysParams, f1: f64, f2: f64, f3: f64) -> GridSpec {
    cnoidal_ic(p, f1, f2, f3, 0.0, 0.1)
        .expect("preset cnoidal parameters are valid")
        .grid
}

/// Names of all compiled-in presets.
pub const PRESET_NAMES: &[&str] = &[
    "fig1-conservation",
    "fig1-desk",
    "fig2",
    "fig5",
    "fig6-co",
    "fig7",
    "fig8",
    "fig9",
    "fig11",
    "fig13",
    "fig15",
];

/// Looks up a preset by name.
pub fn preset(name: &str) -> Result<Preset> {
    let inv6 = 1.0 / 6f64.sqrt();
    let inv2 = 1.0 / SQRT_2;
    let p = match name {
        "fig1-conservation" | "fig1-desk" => {
            let params = pp(0.01, 1.0, 1.0, 1.0, 1.0, 1.025);
            let n = if name == "fig1-conservation" { 60000 } else { 6000 };
            let period = 2.0 * std::f64::consts::PI / params.omega();
            let t_end = 3.0 * period;
            Preset {
                name: if n == 60000 { "fig1-conservation" } else { "fig1-desk" },
                description: "energy and momentum balance with a pedestal",
                params,
                grid: grid(300.0, n),
                case: CaseKind::CloseSpeeds,
                ic: IcSpec::Solitary {
                    k1: inv2,
                    k2: inv2,
                    x0: 0.0,
                    pedestal: 1.0,
                },
                dt: 0.001,
                t_end,
                snapshots: vec![0.0, t_end],
                sources: Sources::DirectOnly,
            }
        }
        "fig2" => {
            let params = pp(0.00277, 2.0, 2.0, 0.5, 0.5, 2.0);
            let t_end = 1.0 / params.eps;
            Preset {
                name: "fig2",
                description: "error study with pedestal p = 7, distinct speeds",
                params,
                grid: grid(40.0, 800),
                case: CaseKind::DistinctSpeeds,
                ic: IcSpec::Solitary {
                    k1: inv6,
                    k2: (params.alpha / (6.0 * params.c)).sqrt(),
                    x0: 0.0,
                    pedestal: 7.0,
                },
                dt: 0.01,
                t_end,
                snapshots: vec![0.0, t_end],
                sources: Sources::Both,
            }
        }
        "fig5" | "fig6-co" => {
            let params = pp(0.05, 1.05, 1.05, 1.0, 1.0, 1.025);
            let k2 = (1.05f64 / 2.0).sqrt();
            let (ic, description) = if name == "fig5" {
                (
                    IcSpec::Counter {
                        k1: inv2,
                        k2,
                        x0: 250.0,
                        x1: -250.0,
                    },
                    "counter-propagating radiating solitary waves, close speeds",
                )
            } else {
                (
                    IcSpec::Solitary {
                        k1: inv2,
                        k2,
                        x0: 250.0,
                        pedestal: 0.0,
                    },
                    "co-propagating radiating solitary wave, close speeds",
                )
            };
            Preset {
                name: if name == "fig5" { "fig5" } else { "fig6-co" },
                description,
                params,
                grid: grid(300.0, 6000),
                case: CaseKind::CloseSpeeds,
                ic,
                dt: 0.01,
                t_end: 500.0,
                snapshots: vec![0.0, 150.0, 250.0, 500.0],
                sources: Sources::Both,
            }
        }
        "fig7" | "fig8" | "fig9" => {
            let eps = if name == "fig8" { 0.0001 } else { 0.0005 };
            let params = pp(eps, 2.0, 2.0, 1.0, 1.0, 2.0);
            let (ic, description, name) = match name {
                "fig9" => (
                    IcSpec::Counter {
                        k1: inv2,
                        k2: 1.0,
                        x0: 250.0,
                        x1: -250.0,
                    },
                    "counter-propagating Ostrovsky wave packets",
                    "fig9",
                ),
                "fig8" => (
                    IcSpec::Solitary {
                        k1: inv2,
                        k2: 1.0,
                        x0: 250.0,
                        pedestal: 0.0,
                    },
                    "co-propagating Ostrovsky wave packets at smaller ε",
                    "fig8",
                ),
                _ => (
                    IcSpec::Solitary {
                        k1: inv2,
                        k2: 1.0,
                        x0: 250.0,
                        pedestal: 0.0,
                    },
                    "co-propagating Ostrovsky wave packets",
                    "fig7",
                ),
            };
            let snapshots = if name == "fig9" {
                vec![0.0, 125.0, 250.0, 375.0, 500.0]
            } else {
                vec![0.0, 250.0]
            };
            Preset {
                name,
                description,
                params,
                grid: grid(300.0, 6000),
                case: CaseKind::DistinctSpeeds,
                ic,
                dt: 0.01,
                t_end: *snapshots.last().unwrap(),
                snapshots,
                sources: Sources::Both,
            }
        }
        "fig11" => {
            let params = pp(0.05, 1.0, 1.0, 1.0, 1.0, 1.025);
            let (f1, f2, f3) = (1e-12, 0.0, -1.0 / 6.0);
            Preset {
                name: "fig11",
                description: "cnoidal wave, close speeds",
                params,
                grid: cnoidal_grid(&params, f1, f2, f3),
                case: CaseKind::CloseSpeeds,
                ic: IcSpec::Cnoidal { f1, f2, f3, x0: 0.0 },
                dt: 0.01,
                t_end: 300.0,
                snapshots: vec![0.0, 300.0],
                sources: Sources::Both,
            }
        }
        "fig13" | "fig15" => {
            let fig15 = name == "fig15";
            let coup = if fig15 { 2.0 } else { 1.0 };
            let params = pp(0.0005, 2.0, 2.0, coup, coup, 2.0);
            let (f1, f2, f3) = (1e-12, 0.0, -1.0 / 6.0);
            let snapshots = if fig15 {
                (0..=20).map(|i| 50.0 * i as f64).collect()
            } else {
                vec![0.0, 1000.0]
            };
            Preset {
                name: if fig15 { "fig15" } else { "fig13" },
                description: if fig15 {
                    "cnoidal wave evolving into Ostrovsky packets, direct solver only"
                } else {
                    "cnoidal wave, distinct speeds"
                },
                params,
                grid: cnoidal_grid(&params, f1, f2, f3),
                case: CaseKind::DistinctSpeeds,
                ic: IcSpec::Cnoidal { f1, f2, f3, x0: 0.0 },
                dt: 0.01,
                t_end: 1000.0,
                snapshots,
                sources: if fig15 { Sources::DirectOnly } else { Sources::Both },
            }
        }
        other => {
            return Err(CrbError::Config(format!(
                "unknown preset '{other}'; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(p)
}
