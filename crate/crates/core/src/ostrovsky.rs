//! Integrating-factor RK4 for Ostrovsky-type equations on zero-mean
//! periodic data.
//!
//! Every one-directional channel has the form
//!
//! ```text
//! (σ·2·div·φ_T + adv φ_x + nl (g)_x + disp φ_xxx)_x = coup (φ − p) + H
//! ```
//!
//! with `g = φ²/2` for the leading-order (nonlinear) equations, `g = f φ`
//! for the linearised equations with a frozen leading-order field `f`, `p`
//! the partner channel (or zero) and `H` a forcing. Writing `κ = s k` and
//! `q = σ/div`, each Fourier mode satisfies
//!
//! ```text
//! φ̂_T = (i q/2) Ω(κ) φ̂ + q N̂,     Ω = disp κ³ − adv κ − coup/κ
//! N̂ = −(i κ/2) nl ĝ − (i/(2κ)) (Ĥ − coup p̂)
//! ```
//!
//! The stiff linear part is removed with the factor `E = exp((i/4) q Ω ΔT)`,
//! a half-step rotation. In the original variables the RK4 step reads
//!
//! ```text
//! a = ΔT N(φ)
//! b = ΔT N(E (φ + a/2))
//! c = ΔT N(E φ + b/2)
//! d = ΔT N(E² φ + E c)
//! φ' = E² φ + (E² a + 2E (b + c) + d)/6
//! ```
//!
//! For a coupled pair each stage of both channels is evaluated before the
//! next stage of either, because the partner argument of one channel is the
//! stage argument of the other. The `k = 0` and Nyquist modes are held at
//! zero throughout.

use crate::error::{CrbError, Result};
use crate::spectral::{FftScratch, Spectral, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
/// Largest admissible grid mean of an evolved field.
pub const ZERO_MEAN_TOL: f64 = 1e-10;
/// Forcing means above this level are reported and discarded.
pub const FORCING_MEAN_TOL: f64 = 1e-8;

/// Coefficients of one channel equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OstrovskyEqSpec {
    /// Direction sign `σ` of the `2 φ_T` term: `+1` for right-moving
    /// (`x − t`) channels, `−1` for left-moving ones.
    pub sigma: f64,
    /// Slow-time divisor (`1`, or `c` for the second layer of Case 2).
    pub divisor: f64,
    /// Advection coefficient.
    pub adv: f64,
    /// Nonlinearity coefficient.
    pub nl: f64,
    /// Dispersion coefficient.
    pub disp: f64,
    /// Coupling (zero-mass) coefficient.
    pub coup: f64,
}

impl OstrovskyEqSpec {
    /// Validated constructor.
    pub fn new(sigma: f64, divisor: f64, adv: f64, nl: f64, disp: f64, coup: f64) -> Result<Self> {
        let s = Self {
            sigma,
            divisor,
            adv,
            nl,
            disp,
            coup,
        };
        s.validate()?;
        Ok(s)
    }

    /// Checks `σ = ±1`, `div > 0`, `disp ≥ 0`, `coup ≥ 0` and finiteness.
    pub fn validate(&self) -> Result<()> {
        let all = [self.sigma, self.divisor, self.adv, self.nl, self.disp, self.coup];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(CrbError::Config(format!(
                "non-finite Ostrovsky coefficient in {self:?}"
            )));
        }
        if self.sigma.abs() != 1.0 {
            return Err(CrbError::Config(format!(
                "direction sign must be ±1, got {}",
                self.sigma
            )));
        }
        if self.divisor <= 0.0 {
            return Err(CrbError::Config(format!(
                "time divisor must be positive, got {}",
                self.divisor
            )));
        }
        if self.disp < 0.0 || self.coup < 0.0 {
            return Err(CrbError::Config(format!(
                "dispersion and coupling coefficients must be non-negative, got {} and {}",
                self.disp, self.coup
            )));
        }
        Ok(())
    }

    /// `q = σ/div`.
    pub fn q(&self) -> f64 {
        self.sigma / self.divisor
    }

    /// `Ω(κ) = disp κ³ − adv κ − coup/κ` (zero at `κ = 0`).
    pub fn omega(&self, kappa: f64) -> f64 {
        if kappa == 0.0 {
            return 0.0;
        }
        self.disp * kappa.powi(3) - self.adv * kappa - self.coup / kappa
    }

    /// The same channel travelling in the opposite direction.
    pub fn reversed(&self) -> Self {
        Self {
            sigma: -self.sigma,
            ..*self
        }
    }
}

/// Per-mode integrating factors for one channel and step size.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeFactors {
    /// Half-step factor `E(k)`; one at `k = 0`, zero at Nyquist.
    pub e: Vec<C64>,
    /// Full-step factor `E(k)²`.
    pub e2: Vec<C64>,
    /// Step size the factors were built for.
    pub dt: f64,
}

/// True for modes that take part in the evolution (`k ≠ 0`, not Nyquist).
fn active(sp: &Spectral, i: usize) -> bool {
    i != 0 && i != sp.grid().nyquist_index()
}

/// Builds `E(k) = exp((i/4) q Ω(κ) ΔT)` for every mode.
pub fn build_mode_factors(spec: &OstrovskyEqSpec, sp: &Spectral, dt: f64) -> Result<ModeFactors> {
    spec.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CrbError::Config(format!("slow time step must be positive, got {dt}")));
    }
    let q = spec.q();
    let e: Vec<C64> = sp
        .kappa()
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            if i == 0 {
                C64::new(1.0, 0.0)
            } else if !active(sp, i) {
                ZERO
            } else {
                C64::from_polar(1.0, 0.25 * q * spec.omega(k) * dt)
            }
        })
        .collect();
    let e2 = e.iter().map(|z| z * z).collect();
    Ok(ModeFactors { e, e2, dt })
}

/// How the product term `g` of a channel is formed.
#[derive(Clone, Copy, Debug)]
pub enum Drive<'a> {
    /// Leading-order equation: `g = φ²/2`, no forcing.
    Nonlinear,
    /// Linearised equation about the physical field `f` with spectral
    /// forcing `Ĥ` (both frozen over a step).
    Linear {
        /// Leading-order field on the grid.
        f: &'a [f64],
        /// Forcing coefficients; `None` means zero forcing.
        h: Option<&'a [C64]>,
    },
}

fn check_zero_mean(sp: &Spectral, coeffs: &[C64], what: &str) -> Result<()> {
    let mean = coeffs[0].norm() / (sp.len() as f64).sqrt();
    if mean > ZERO_MEAN_TOL {
        return Err(CrbError::Precondition(format!(
            "{what} has mean {mean:.3e}; Ostrovsky channels require zero-mean data"
        )));
    }
    Ok(())
}

/// Advances two channels together, optionally coupled to each other.
///
/// Uncoupled pairs (e.g. the `∓` channels of one layer) still share FFTs:
/// both physical products come from one complex transform.
#[derive(Clone, Debug)]
pub struct PairStepper {
    sp: Spectral,
    specs: [OstrovskyEqSpec; 2],
    factors: [ModeFactors; 2],
    coupled: bool,
    phys: [Vec<f64>; 2],
    prod: [Vec<C64>; 2],
    stage: [[Vec<C64>; 2]; 4],
    arg: [Vec<C64>; 2],
    sc: FftScratch,
}

impl PairStepper {
    /// Plans a stepper for `specs` with step `dt`. When `coupled` is set,
    /// each channel's partner is the other channel.
    pub fn new(sp: &Spectral, specs: [OstrovskyEqSpec; 2], dt: f64, coupled: bool) -> Result<Self> {
        let factors = [
            build_mode_factors(&specs[0], sp, dt)?,
            build_mode_factors(&specs[1], sp, dt)?,
        ];
        let n = sp.len();
        let zc = || vec![ZERO; n];
        Ok(Self {
            sp: sp.clone(),
            specs,
            factors,
            coupled,
            phys: [vec![0.0; n], vec![0.0; n]],
            prod: [zc(), zc()],
            stage: [[zc(), zc()], [zc(), zc()], [zc(), zc()], [zc(), zc()]],
            arg: [zc(), zc()],
            sc: sp.scratch(),
        })
    }

    /// Channel coefficients.
    pub fn specs(&self) -> &[OstrovskyEqSpec; 2] {
        &self.specs
    }

    /// Mode factors of both channels.
    pub fn factors(&self) -> &[ModeFactors; 2] {
        &self.factors
    }

    /// Step size.
    pub fn dt(&self) -> f64 {
        self.factors[0].dt
    }

    /// Whether the channels are coupled.
    pub fn coupled(&self) -> bool {
        self.coupled
    }

    /// Evaluates `q N̂` for both channels at the arguments `args` into `out`.
    fn eval_into(&mut self, args: [&[C64]; 2], drives: [Drive<'_>; 2], out: &mut [Vec<C64>; 2]) {
        let [p0, p1] = &mut self.phys;
        self.sp.inverse_pair_into(args[0], args[1], p0, p1, &mut self.sc);
        for (j, drive) in drives.iter().enumerate() {
            let ph = &mut self.phys[j];
            match drive {
                Drive::Nonlinear => ph.iter_mut().for_each(|v| *v = 0.5 * *v * *v),
                Drive::Linear { f, .. } => ph.iter_mut().zip(f.iter()).for_each(|(v, fv)| *v *= fv),
            }
        }
        let [g0, g1] = &mut self.prod;
        self.sp
            .forward_pair_into(&self.phys[0], &self.phys[1], g0, g1, &mut self.sc);
        self.sp.dealias_in_place(g0);
        self.sp.dealias_in_place(g1);
        let ny = self.sp.grid().nyquist_index();
        for j in 0..2 {
            let spec = self.specs[j];
            let q = spec.q();
            let partner = if self.coupled { Some(args[1 - j]) } else { None };
            let h = match drives[j] {
                Drive::Linear { h, .. } => h,
                Drive::Nonlinear => None,
            };
            let kappa = self.sp.kappa();
            let g = &self.prod[j];
            crate::par::for_each_indexed(&mut out[j], |i, o| {
                if i == 0 || i == ny {
                    *o = ZERO;
                    return;
                }
                let k = kappa[i];
                // −(iκ/2) nl ĝ
                let mut acc = C64::new(0.0, -0.5 * k * spec.nl) * g[i];
                let mut src = ZERO;
                if let Some(h) = h {
                    src += h[i];
                }
                if let Some(p) = partner {
                    src -= p[i] * spec.coup;
                }
                // −(i/(2κ)) (Ĥ − coup p̂)
                acc += C64::new(0.0, -0.5 / k) * src;
                *o = acc * q;
            });
        }
    }

    /// Forcing part `q N̂` of both right-hand sides at `args`.
    pub fn forcing_terms(&mut self, args: [&[C64]; 2], drives: [Drive<'_>; 2]) -> [Vec<C64>; 2] {
        let n = self.sp.len();
        let mut out = [vec![ZERO; n], vec![ZERO; n]];
        self.eval_into(args, drives, &mut out);
        out
    }

    /// Full time derivatives `(iq/2) Ω φ̂ + q N̂` of both channels.
    pub fn time_derivatives(&mut self, args: [&[C64]; 2], drives: [Drive<'_>; 2]) -> [Vec<C64>; 2] {
        let mut out = self.forcing_terms(args, drives);
        for j in 0..2 {
            let spec = self.specs[j];
            let q = spec.q();
            for (i, (o, a)) in out[j].iter_mut().zip(args[j].iter()).enumerate() {
                if active(&self.sp, i) {
                    *o += C64::new(0.0, 0.5 * q * spec.omega(self.sp.kappa()[i])) * a;
                }
            }
        }
        out
    }

    /// Advances both channels by one step.
    ///
    /// Returns a precondition error if either input (or, for linear drives,
    /// the frozen field) has a non-zero mean.
    pub fn step(&mut self, phi: [&mut Vec<C64>; 2], drives: [Drive<'_>; 2]) -> Result<()> {
        let [phi0, phi1] = phi;
        check_zero_mean(&self.sp, phi0, "first channel")?;
        check_zero_mean(&self.sp, phi1, "second channel")?;
        for d in &drives {
            if let Drive::Linear { h: Some(h), .. } = d {
                let m = h[0].norm() / (self.sp.len() as f64).sqrt();
                if m > FORCING_MEAN_TOL {
                    log::warn!("forcing mean {m:.3e} is discarded by the zero-mass constraint");
                }
            }
        }
        let dt = self.dt();
        let mut stage = std::mem::take(&mut self.stage);
        let mut arg = std::mem::take(&mut self.arg);
        let phis: [&mut Vec<C64>; 2] = [phi0, phi1];

        // a = ΔT N(φ)
        self.eval_into([phis[0].as_slice(), phis[1].as_slice()], drives, &mut stage[0]);
        scale_all(&mut stage[0], dt);
        // b = ΔT N(E (φ + a/2))
        for j in 0..2 {
            let e = &self.factors[j].e;
            for i in 0..arg[j].len() {
                arg[j][i] = e[i] * (phis[j][i] + stage[0][j][i] * 0.5);
            }
        }
        self.eval_into([&arg[0], &arg[1]], drives, &mut stage[1]);
        scale_all(&mut stage[1], dt);
        // c = ΔT N(E φ + b/2)
        for j in 0..2 {
            let e = &self.factors[j].e;
            for i in 0..arg[j].len() {
                arg[j][i] = e[i] * phis[j][i] + stage[1][j][i] * 0.5;
            }
        }
        self.eval_into([&arg[0], &arg[1]], drives, &mut stage[2]);
        scale_all(&mut stage[2], dt);
        // d = ΔT N(E² φ + E c)
        for j in 0..2 {
            let (e, e2) = (&self.factors[j].e, &self.factors[j].e2);
            for i in 0..arg[j].len() {
                arg[j][i] = e2[i] * phis[j][i] + e[i] * stage[2][j][i];
            }
        }
        self.eval_into([&arg[0], &arg[1]], drives, &mut stage[3]);
        scale_all(&mut stage[3], dt);
        // φ' = E² φ + (E² a + 2E (b + c) + d)/6
        let ny = self.sp.grid().nyquist_index();
        for (j, ph) in phis.into_iter().enumerate() {
            let (e, e2) = (&self.factors[j].e, &self.factors[j].e2);
            let [a, b, c, d] = [&stage[0][j], &stage[1][j], &stage[2][j], &stage[3][j]];
            crate::par::for_each_indexed(ph.as_mut_slice(), |i, v| {
                *v = if i == 0 || i == ny {
                    ZERO
                } else {
                    e2[i] * *v + (e2[i] * a[i] + e[i] * (b[i] + c[i]) * 2.0 + d[i]) / 6.0
                };
            });
            if ph.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                self.stage = stage;
                self.arg = arg;
                return Err(CrbError::Divergence {
                    t: f64::NAN,
                    what: "non-finite coefficient in the Ostrovsky step".into(),
                });
            }
        }
        self.stage = stage;
        self.arg = arg;
        Ok(())
    }
}

fn scale_all(v: &mut [Vec<C64>; 2], s: f64) {
    for ch in v.iter_mut() {
        ch.iter_mut().for_each(|z| *z *= s);
    }
}

/// One coupled step of two channels with the given drives.
pub fn coupled_ostrovsky_step(
    sp: &Spectral,
    phi: [&mut Vec<C64>; 2],
    drives: [Drive<'_>; 2],
    specs: [OstrovskyEqSpec; 2],
    dt: f64,
) -> Result<()> {
    PairStepper::new(sp, specs, dt, true)?.step(phi, drives)
}

/// `n_steps` steps of a single nonlinear channel with no partner.
pub fn single_ostrovsky_evolve(
    sp: &Spectral,
    f: &[C64],
    spec: &OstrovskyEqSpec,
    dt: f64,
    n_steps: usize,
) -> Result<Vec<C64>> {
    let mut st = PairStepper::new(sp, [*spec, *spec], dt, false)?;
    let mut a = f.to_vec();
    let mut dummy = vec![ZERO; f.len()];
    for _ in 0..n_steps {
        st.step([&mut a, &mut dummy], [Drive::Nonlinear, Drive::Nonlinear])?;
    }
    Ok(a)
}

/// `n_steps` steps of a single linearised channel. `forcing(n)` returns the
/// frozen field `f` (physical) and forcing `Ĥ` for step `n`.
pub fn linearized_forced_evolve<F>(
    sp: &Spectral,
    phi: &[C64],
    spec: &OstrovskyEqSpec,
    dt: f64,
    n_steps: usize,
    mut forcing: F,
) -> Result<Vec<C64>>
where
    F: FnMut(usize) -> (Vec<f64>, Vec<C64>),
{
    let mut st = PairStepper::new(sp, [*spec, *spec], dt, false)?;
    let mut a = phi.to_vec();
    let mut dummy = vec![ZERO; phi.len()];
    let zf = vec![0.0; phi.len()];
    for n in 0..n_steps {
        let (f, h) = forcing(n);
        st.step(
            [&mut a, &mut dummy],
            [Drive::Linear { f: &f, h: Some(&h) }, Drive::Linear { f: &zf, h: None }],
        )?;
    }
    Ok(a)
}
