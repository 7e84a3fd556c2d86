//! Weakly-nonlinear solution of the cRB Cauchy problem up to `O(ε)`.
//!
//! With `ξ± = x ± t`, `ν± = x ± ct`, `τ = √ε t` and `T = ε t` the solution
//! is built from one-directional functions. For distinct speeds
//!
//! ```text
//! u = f1⁻(ξ₋) + f1⁺(ξ₊) + √ε (g1⁻ + g1⁺) + ε (h1⁻ + h1⁺ + h1c + f̂2⁻(ν₋) + f̂2⁺(ν₊)) + ū(t)
//! w = f2⁻(ν₋) + f2⁺(ν₊) + √ε (g2⁻ + g2⁺) + ε (h2⁻ + h2⁺ + h2c + f̂1⁻(ξ₋) + f̂1⁺(ξ₊)) + w̄(t)
//! ```
//!
//! and for close speeds every function lives on `ξ±` and the `f̂` terms are
//! absent. The leading-order functions obey Ostrovsky equations (coupled
//! across layers for close speeds), the `g` and `h` corrections are explicit
//! in `f`, and `h = h̃ + φ` where `φ` obeys a linearised, forced Ostrovsky
//! equation.
//!
//! ```text
//! g_l^∓ = ∓ s_l θ̃_l sin(ω̃τ) f_l′              s_1 = 1, s_2 = −1
//! h̃_l   = A_l(τ) f_l + B_l(τ) f_l″ + C_l(τ) f_other
//! h_lc  = κ_l (f⁻′ I⁺ + 2 f⁻ f⁺ + f⁺′ I⁻),   I(ξ) = ∫_{−L}^{ξ} f
//! f̂     = λ D⁻² f   (periodic zero-mean double antiderivative)
//! ```
//!
//! The initial data for `φ` is chosen so that the `O(ε)` terms and their
//! time derivative vanish at `t = 0`:
//!
//! ```text
//! φ^± = ½ (−N0 ∓ ∂⁻¹N1 / speed)
//! ```
//!
//! where `N0` collects the non-`φ` `O(ε)` terms at `t = 0` and `N1` the
//! `O(ε)` part of their time derivative together with `f_T` and `g_τ`.

use crate::error::{CrbError, Result};
use crate::ostrovsky::{Drive, OstrovskyEqSpec, PairStepper};
use crate::scenario::{deviation_transform, mean_decomposition, CaseKind, InitialCondition, MeanState, PhysParams};
use crate::spectral::{FftScratch, GridSpec, Spectral, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
/// `(f_T, f_TT, f)` for the two channels of a group.
type ChannelDerivs = ([Vec<C64>; 2], [Vec<C64>; 2], [Vec<f64>; 2]);

/// Channel direction: index 0 is `∓ = −` (right-moving), 1 is `+`.
const DIR_SIGN: [f64; 2] = [-1.0, 1.0];

/// Truncation order of the expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExpansionOrder {
    /// `f⁻ + f⁺` plus the mean.
    Leading,
    /// Adds the `√ε g` terms.
    SqrtEps,
    /// Adds the `ε` terms.
    Eps,
}

impl ExpansionOrder {
    /// All orders in increasing order.
    pub const ALL: [ExpansionOrder; 3] = [ExpansionOrder::Leading, ExpansionOrder::SqrtEps, ExpansionOrder::Eps];

    /// Short identifier.
    pub fn as_str(&self) -> &'static str {
        match self {
            ExpansionOrder::Leading => "leading",
            ExpansionOrder::SqrtEps => "sqrt-eps",
            ExpansionOrder::Eps => "eps",
        }
    }

    /// Index into [`WnlFields::orders`].
    pub fn index(&self) -> usize {
        *self as usize
    }
}

impl std::str::FromStr for ExpansionOrder {
    type Err = CrbError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leading" | "0" => Ok(ExpansionOrder::Leading),
            "sqrt-eps" | "sqrteps" | "1" => Ok(ExpansionOrder::SqrtEps),
            "eps" | "2" => Ok(ExpansionOrder::Eps),
            other => Err(CrbError::Unsupported(format!("unknown expansion order '{other}'"))),
        }
    }
}

/// Which coefficient multiplies the second-layer `ρ` term for close speeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rho2Variant {
    /// `ρ2 ∝ α d2 γ`, consistent with the second-layer mean amplitude.
    Gamma,
    /// `ρ2 ∝ α d2 δ`.
    Delta,
}

/// Switches for the alternatives in the `O(ε)` construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WnlOptions {
    /// `ρ2` coefficient for close speeds.
    pub rho2: Rho2Variant,
    /// Include the `−δ f̂1`, `−γ f̂2` forcing of the distinct-speed `φ`
    /// equations.
    pub hat_forcing: bool,
    /// Use the alternative cross-layer coefficients
    /// `−(θ̃1²/2)(δ+αγ)` and `+(θ̃2²/(2α))(δ+αγ)` for close speeds.
    pub alt_cross_terms: bool,
    /// Advance the `φ` fields (needed only for [`ExpansionOrder::Eps`]).
    pub evolve_phi: bool,
    /// Drop `φ` forcing modes with `|k| > N/3`. The forcing contains
    /// `κ⁶`-weighted terms that otherwise amplify aliasing noise in `f`.
    pub filter_forcing: bool,
    /// Apply the 2/3 rule to the quadratic terms of the one-directional
    /// equations.
    pub dealias: bool,
}

impl Default for WnlOptions {
    fn default() -> Self {
        Self {
            rho2: Rho2Variant::Gamma,
            hat_forcing: true,
            alt_cross_terms: false,
            evolve_phi: true,
            filter_forcing: true,
            dealias: false,
        }
    }
}

/// Assembled physical fields at one time for every order.
#[derive(Clone, Debug, PartialEq)]
pub struct WnlFields {
    /// Time.
    pub t: f64,
    /// `(u, w)` for leading, `√ε` and `ε` orders (cumulative).
    pub orders: [(Vec<f64>, Vec<f64>); 3],
}

impl WnlFields {
    /// Fields at one order.
    pub fn at(&self, order: ExpansionOrder) -> (&[f64], &[f64]) {
        let (u, w) = &self.orders[order.index()];
        (u, w)
    }
}

/// Time-independent coefficients of the construction.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Coefs {
    wt: f64,
    /// `θ̃_l`.
    theta: [f64; 2],
    /// Sign of the `g` term per layer.
    gsign: [f64; 2],
    /// `ρ_l` amplitudes (multiplied by `cos ω̃τ`).
    rho: [f64; 2],
    /// Characteristic speeds.
    speed: [f64; 2],
    /// `h_c` prefactors.
    hc: [f64; 2],
    /// `f̂` prefactors (distinct speeds only).
    hat: [f64; 2],
    /// Cross-layer coefficients in the `φ` forcing (close speeds only).
    cross: [f64; 2],
    /// `β` regularisation factor of the `f_xxxT` forcing.
    beta_reg: [f64; 2],
}

impl Coefs {
    fn new(case: CaseKind, p: &PhysParams, ms: &MeanState, opts: &WnlOptions) -> Self {
        let wt = p.omega_tilde();
        let d1 = ms.d2 * p.delta;
        let d2 = p.alpha * p.gamma * ms.d2;
        let (theta, rho, speed, hc, hat) = match case {
            CaseKind::CloseSpeeds => {
                let r2 = match opts.rho2 {
                    Rho2Variant::Gamma => p.alpha * ms.d2 * p.gamma,
                    Rho2Variant::Delta => p.alpha * ms.d2 * p.delta,
                } / (2.0 * wt * wt);
                (
                    [d1 / (2.0 * wt), d2 / (2.0 * wt)],
                    [d1 / (2.0 * wt * wt), r2],
                    [1.0, 1.0],
                    [-0.25, -0.25 * p.alpha],
                    [0.0, 0.0],
                )
            }
            CaseKind::DistinctSpeeds => {
                let c2m1 = p.c * p.c - 1.0;
                (
                    [d1 / (2.0 * wt), d2 / (2.0 * p.c * wt)],
                    [d1 / (2.0 * wt * wt), d2 / (2.0 * wt * wt)],
                    [1.0, p.c],
                    [-0.25, -0.25 * p.alpha / (p.c * p.c)],
                    [p.delta / c2m1, -p.gamma / c2m1],
                )
            }
        };
        let cross = if case == CaseKind::CloseSpeeds {
            if opts.alt_cross_terms {
                let s = p.delta + p.alpha * p.gamma;
                [
                    0.5 * theta[0] * theta[0] * s,
                    -theta[1] * theta[1] * s / (2.0 * p.alpha),
                ]
            } else {
                let w2 = 16.0 * wt * wt;
                [
                    p.delta * (3.0 * d1 - d2) * (d1 + d2) / w2,
                    p.gamma * (3.0 * d2 - d1) * (d1 + d2) / w2,
                ]
            }
        } else {
            [0.0, 0.0]
        };
        Self {
            wt,
            theta,
            gsign: [1.0, -1.0],
            rho,
            speed,
            hc,
            hat,
            cross,
            beta_reg: [1.0, p.beta],
        }
    }
}

/// Coefficients of one channel's leading-order equation.
pub fn channel_spec(
    case: CaseKind,
    p: &PhysParams,
    ms: &MeanState,
    layer: usize,
    dir: usize,
) -> Result<OstrovskyEqSpec> {
    let sigma = -DIR_SIGN[dir];
    match (case, layer) {
        (_, 0) => OstrovskyEqSpec::new(sigma, 1.0, ms.d1, 1.0, 1.0, p.delta),
        (CaseKind::CloseSpeeds, 1) => OstrovskyEqSpec::new(
            sigma,
            1.0,
            p.alpha * ms.d1 + (p.c * p.c - 1.0) / p.eps,
            p.alpha,
            p.beta,
            p.gamma,
        ),
        (CaseKind::DistinctSpeeds, 1) => {
            OstrovskyEqSpec::new(sigma, p.c, p.alpha * ms.d1, p.alpha, p.beta * p.c * p.c, p.gamma)
        }
        _ => Err(CrbError::Config(format!("layer index {layer} out of range"))),
    }
}

fn ch(layer: usize, dir: usize) -> usize {
    2 * layer + dir
}

fn two_mut<T>(v: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    assert!(a != b);
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

/// Weakly-nonlinear solver: owns the one-directional fields, the Ostrovsky
/// steppers and the mean state.
#[derive(Clone, Debug)]
pub struct WnlSolver {
    sp: Spectral,
    p: PhysParams,
    ms: MeanState,
    case: CaseKind,
    opts: WnlOptions,
    co: Coefs,
    /// Leading-order fields indexed by `2·layer + dir`.
    f: [Vec<C64>; 4],
    /// `φ` fields, same indexing.
    phi: [Vec<C64>; 4],
    t: f64,
    groups: [[usize; 2]; 2],
    coupled: bool,
    steppers: Option<(f64, [PairStepper; 2])>,
    sc: FftScratch,
}

impl WnlSolver {
    /// Splits the initial data into one-directional functions and builds
    /// the `φ` initial data.
    pub fn new(ic: &InitialCondition, case: CaseKind, p: &PhysParams, opts: WnlOptions) -> Result<Self> {
        p.validate()?;
        let ms = mean_decomposition(ic, p);
        if !ms.satisfies_zero_velocity_mean() {
            return Err(CrbError::Precondition(format!(
                "weakly-nonlinear construction needs zero velocity means (d3 = {:e}, d4 = {:e})",
                ms.d3, ms.d4
            )));
        }
        if case == CaseKind::DistinctSpeeds && (p.c - 1.0).abs() < 1e-12 {
            return Err(CrbError::Config("distinct-speed construction needs c ≠ 1".into()));
        }
        let dev = deviation_transform(ic, &ms, p);
        let sp = Spectral::new(ic.grid).with_dealiasing(opts.dealias);
        let (groups, coupled) = match case {
            CaseKind::CloseSpeeds => ([[ch(0, 0), ch(1, 0)], [ch(0, 1), ch(1, 1)]], true),
            CaseKind::DistinctSpeeds => ([[ch(0, 0), ch(0, 1)], [ch(1, 0), ch(1, 1)]], false),
        };
        let n = sp.len();
        let mut s = Self {
            co: Coefs::new(case, p, &ms, &opts),
            sc: sp.scratch(),
            f: std::array::from_fn(|_| vec![ZERO; n]),
            phi: std::array::from_fn(|_| vec![ZERO; n]),
            sp,
            p: *p,
            ms,
            case,
            opts,
            t: 0.0,
            groups,
            coupled,
            steppers: None,
        };
        s.init_leading(&dev)?;
        s.phi_init()?;
        Ok(s)
    }

    /// `f± = ½(F̃ ± ∂⁻¹Ṽ)`, and `(1/2c)(cF̃2 ± ∂⁻¹Ṽ2)` for the second layer
    /// at distinct speeds.
    fn init_leading(&mut self, dev: &InitialCondition) -> Result<()> {
        let sp = &self.sp;
        for layer in 0..2 {
            let (fv, vv) = if layer == 0 {
                (&dev.f1, &dev.v1)
            } else {
                (&dev.f2, &dev.v2)
            };
            let fh = sp.forward(fv);
            let vh = sp.forward(vv);
            let scale = fh.iter().chain(vh.iter()).map(|z| z.norm()).fold(1.0, f64::max);
            if fh[0].norm() > 1e-10 * scale || vh[0].norm() > 1e-10 * scale {
                return Err(CrbError::Precondition("deviation data must have zero mean".into()));
            }
            let a = sp.antiderivative_coeffs_unchecked(&vh);
            let speed = self.co.speed[layer];
            for dir in 0..2 {
                let sgn = DIR_SIGN[dir];
                let out = &mut self.f[ch(layer, dir)];
                for i in 0..out.len() {
                    out[i] = (fh[i] + a[i] * (sgn / speed)) * 0.5;
                }
                out[0] = ZERO;
            }
        }
        Ok(())
    }

    fn steppers_for(&mut self, dt_slow: f64) -> Result<[PairStepper; 2]> {
        if let Some((dt, st)) = self.steppers.take() {
            if dt == dt_slow {
                return Ok(st);
            }
        }
        let mk = |g: [usize; 2]| -> Result<PairStepper> {
            let specs = [
                channel_spec(self.case, &self.p, &self.ms, g[0] / 2, g[0] % 2)?,
                channel_spec(self.case, &self.p, &self.ms, g[1] / 2, g[1] % 2)?,
            ];
            PairStepper::new(&self.sp, specs, dt_slow, self.coupled)
        };
        Ok([mk(self.groups[0])?, mk(self.groups[1])?])
    }

    /// `f_T` and `f_TT` for the two channels of a group, plus `f` on the grid.
    fn time_derivs(&mut self, st: &mut PairStepper, g: [usize; 2]) -> ChannelDerivs {
        let n = self.sp.len();
        let ft = st.time_derivatives([&self.f[g[0]], &self.f[g[1]]], [Drive::Nonlinear, Drive::Nonlinear]);
        let mut fp = [vec![0.0; n], vec![0.0; n]];
        {
            let [a, b] = &mut fp;
            self.sp
                .inverse_pair_into(&self.f[g[0]], &self.f[g[1]], a, b, &mut self.sc);
        }
        let ftt = st.time_derivatives(
            [&ft[0], &ft[1]],
            [
                Drive::Linear { f: &fp[0], h: None },
                Drive::Linear { f: &fp[1], h: None },
            ],
        );
        (ft, ftt, fp)
    }

    /// Forcing of the `φ` equations for a group.
    fn forcing(&mut self, st: &mut PairStepper, g: [usize; 2]) -> ([Vec<f64>; 2], [Vec<C64>; 2]) {
        let n = self.sp.len();
        let (ft, ftt, fp) = self.time_derivs(st, g);
        // (f′)² for both channels.
        let fx = [
            self.sp.derivative(&self.f[g[0]], 1),
            self.sp.derivative(&self.f[g[1]], 1),
        ];
        let mut px = [vec![0.0; n], vec![0.0; n]];
        {
            let [a, b] = &mut px;
            self.sp.inverse_pair_into(&fx[0], &fx[1], a, b, &mut self.sc);
        }
        for v in px.iter_mut() {
            v.iter_mut().for_each(|x| *x *= *x);
        }
        let mut sq = [vec![ZERO; n], vec![ZERO; n]];
        {
            let [a, b] = &mut sq;
            self.sp.forward_pair_into(&px[0], &px[1], a, b, &mut self.sc);
        }
        let ny = self.sp.grid().nyquist_index();
        let kappa = self.sp.kappa();
        let co = self.co;
        let specs = *st.specs();
        let mut h = [vec![ZERO; n], vec![ZERO; n]];
        for j in 0..2 {
            let c = g[j];
            let (layer, dir) = (c / 2, c % 2);
            let sigma = -DIR_SIGN[dir];
            let spec = specs[j];
            let th2 = co.theta[layer] * co.theta[layer];
            let f = &self.f[c];
            let other = &self.f[g[1 - j]];
            for i in 0..n {
                if i == 0 || i == ny || (self.opts.filter_forcing && 3 * i.min(n - i) > n) {
                    continue;
                }
                let k = kappa[i];
                let k2 = k * k;
                // (iκ)³ = −iκ³
                let mut v =
                    ftt[j][i] + C64::new(0.0, -k2 * k) * ft[j][i] * (2.0 * sigma * spec.divisor * co.beta_reg[layer]);
                v += f[i] * (-k2 * 0.5 * co.wt * co.wt * th2);
                v -= sq[j][i] * (-k2 * 0.5 * spec.nl * th2);
                match self.case {
                    CaseKind::CloseSpeeds => v -= other[i] * (-k2 * co.cross[layer]),
                    CaseKind::DistinctSpeeds => {
                        if self.opts.hat_forcing {
                            // −coup·f̂_same, f̂ = λ D⁻² f with D⁻² = −1/κ².
                            let lam = co.hat[1 - layer];
                            v -= f[i] * (spec.coup * lam * (-1.0 / k2));
                        }
                    }
                }
                h[j][i] = v;
            }
        }
        (fp, h)
    }

    fn step_with(&mut self, steppers: &mut [PairStepper; 2]) -> Result<()> {
        for (gi, st) in steppers.iter_mut().enumerate() {
            let g = self.groups[gi];
            if self.opts.evolve_phi {
                let (fp, h) = self.forcing(st, g);
                let (pa, pb) = two_mut(&mut self.phi, g[0], g[1]);
                st.step(
                    [pa, pb],
                    [
                        Drive::Linear {
                            f: &fp[0],
                            h: Some(&h[0]),
                        },
                        Drive::Linear {
                            f: &fp[1],
                            h: Some(&h[1]),
                        },
                    ],
                )?;
            }
            let (fa, fb) = two_mut(&mut self.f, g[0], g[1]);
            st.step([fa, fb], [Drive::Nonlinear, Drive::Nonlinear])?;
        }
        Ok(())
    }

    /// One step of fast-time size `dt` (slow step `ε dt`).
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let dts = self.p.eps * dt;
        let mut st = self.steppers_for(dts)?;
        let r = self.step_with(&mut st);
        self.steppers = Some((dts, st));
        r.map_err(|e| match e {
            CrbError::Divergence { what, .. } => CrbError::Divergence { t: self.t + dt, what },
            other => other,
        })?;
        self.t += dt;
        Ok(())
    }

    /// Steps to `t_target`, shortening the final step.
    pub fn advance_to(&mut self, t_target: f64, dt: f64) -> Result<()> {
        while self.t < t_target - 1e-9 * dt {
            let h = dt.min(t_target - self.t);
            if h < dt {
                // Keep the cached full-step factors for later calls.
                let saved = self.steppers.take();
                self.step(h)?;
                self.steppers = saved;
            } else {
                self.step(h)?;
            }
        }
        Ok(())
    }

    /// `n_steps` steps of size `dt`.
    pub fn evolve(&mut self, dt: f64, n_steps: usize) -> Result<()> {
        for _ in 0..n_steps {
            self.step(dt)?;
        }
        Ok(())
    }

    /// Builds `φ` at `t = 0` by cancelling the other `O(ε)` terms and their
    /// time derivative.
    fn phi_init(&mut self) -> Result<()> {
        let n = self.sp.len();
        let co = self.co;
        let mut st = self.steppers_for(1.0)?;
        let mut ft: [Vec<C64>; 4] = std::array::from_fn(|_| vec![ZERO; n]);
        for (gi, s) in st.iter_mut().enumerate() {
            let g = self.groups[gi];
            let (d, _, _) = self.time_derivs(s, g);
            let [a, b] = d;
            ft[g[0]] = a;
            ft[g[1]] = b;
        }
        let mut phi: [Vec<C64>; 4] = std::array::from_fn(|_| vec![ZERO; n]);
        for layer in 0..2 {
            let other = 1 - layer;
            let speed = co.speed[layer];
            let (a_coef, b_coef, c_coef) = self.h_coefs(layer, 0.0);
            // Spectral single-variable part of N0 and N1.
            let mut n0 = vec![ZERO; n];
            let mut n1 = vec![ZERO; n];
            for dir in 0..2 {
                let s = DIR_SIGN[dir];
                let f = &self.f[ch(layer, dir)];
                let fo = &self.f[ch(other, dir)];
                for i in 0..n {
                    let ik = C64::new(0.0, self.sp.kappa()[i]);
                    let k2 = -self.sp.kappa()[i].powi(2);
                    let mut ht = f[i] * (a_coef + b_coef * k2);
                    if self.case == CaseKind::CloseSpeeds {
                        ht += fo[i] * c_coef;
                    }
                    n0[i] += ht;
                    n1[i] += ft[ch(layer, dir)][i] + ik * ht * (s * speed);
                    // g_τ(0) = s·gsign·θ̃·ω̃ f′
                    n1[i] += ik * f[i] * (s * co.gsign[layer] * co.theta[layer] * co.wt);
                    if self.case == CaseKind::DistinctSpeeds {
                        let k2v = self.sp.kappa()[i].powi(2);
                        if k2v > 0.0 {
                            let hat = fo[i] * (-co.hat[layer] / k2v);
                            n0[i] += hat;
                            n1[i] += ik * hat * (s * co.speed[other]);
                        }
                    }
                }
            }
            let ny = self.sp.grid().nyquist_index();
            for v in [&mut n0, &mut n1] {
                // Odd derivatives already removed the Nyquist mode from N1;
                // N0 keeps it so that the t = 0 cancellation is exact.
                v[0] = ZERO;
            }
            n1[ny] = ZERO;
            // Products from h_c.
            let fm = &self.f[ch(layer, 0)];
            let fpl = &self.f[ch(layer, 1)];
            let phys = |c: &[C64]| self.sp.inverse_real(c);
            let (um, up) = (phys(fm), phys(fpl));
            let (um1, up1) = (phys(&self.sp.derivative(fm, 1)), phys(&self.sp.derivative(fpl, 1)));
            let (um2, up2) = (phys(&self.sp.derivative(fm, 2)), phys(&self.sp.derivative(fpl, 2)));
            let im = self.sp.antiderivative_zero_at_left(fm)?;
            let ip = self.sp.antiderivative_zero_at_left(fpl)?;
            let kc = co.hc[layer];
            let hc: Vec<f64> = (0..n)
                .map(|i| kc * (um1[i] * ip[i] + 2.0 * um[i] * up[i] + up1[i] * im[i]))
                .collect();
            let dm: Vec<f64> = (0..n)
                .map(|i| kc * (um2[i] * ip[i] + 2.0 * um1[i] * up[i] + up1[i] * um[i]))
                .collect();
            let dp: Vec<f64> = (0..n)
                .map(|i| kc * (um1[i] * up[i] + 2.0 * um[i] * up1[i] + up2[i] * im[i]))
                .collect();
            let hct: Vec<f64> = (0..n).map(|i| speed * (dp[i] - dm[i])).collect();
            let mut n0p = self.sp.inverse_real(&n0);
            let mut n1p = self.sp.inverse_real(&n1);
            for i in 0..n {
                n0p[i] += hc[i];
                n1p[i] += hct[i];
            }
            let n0h = self.sp.forward(&n0p);
            let mut a = self.sp.forward(&n1p);
            self.sp.antiderivative_in_place(&mut a);
            for dir in 0..2 {
                let s = DIR_SIGN[dir];
                let out = &mut phi[ch(layer, dir)];
                for i in 0..n {
                    out[i] = (-n0h[i] - a[i] * (s / speed)) * 0.5;
                }
                out[0] = ZERO;
            }
        }
        self.phi = phi;
        Ok(())
    }

    /// `(A, B, C)` of `h̃ = A f + B f″ + C f_other` at time `t`.
    fn h_coefs(&self, layer: usize, t: f64) -> (f64, f64, f64) {
        let co = &self.co;
        let cs = (co.wt * self.p.eps.sqrt() * t).cos();
        let w2 = co.wt * co.wt;
        let r = [co.rho[0] * cs, co.rho[1] * cs];
        match (self.case, layer) {
            (CaseKind::CloseSpeeds, 0) => (
                -0.5 * w2 * r[0],
                -0.5 * w2 * r[0] * r[0],
                0.5 * self.p.delta * (r[0] + r[1]),
            ),
            (CaseKind::CloseSpeeds, _) => (
                0.5 * w2 * r[1],
                -0.5 * w2 * r[1] * r[1],
                -0.5 * self.p.gamma * (r[0] + r[1]),
            ),
            (CaseKind::DistinctSpeeds, 0) => (-0.5 * w2 * r[0], -0.5 * w2 * r[0] * r[0], 0.0),
            (CaseKind::DistinctSpeeds, _) => {
                let c2 = self.p.c * self.p.c;
                (0.5 * w2 * r[1] / c2, -0.5 * w2 * r[1] * r[1] / c2, 0.0)
            }
        }
    }

    /// Evaluates `(u, w)` at the current time for all three orders.
    pub fn assemble(&mut self) -> WnlFields {
        let t = self.t;
        let (ub, wb) = self.ms.trajectory(&self.p, t);
        let u = self.assemble_layer(0, ub);
        let w = self.assemble_layer(1, wb);
        let [u0, u1, u2] = u;
        let [w0, w1, w2] = w;
        WnlFields {
            t,
            orders: [(u0, w0), (u1, w1), (u2, w2)],
        }
    }

    /// Cumulative orders of one layer, `mean` added to each.
    fn assemble_layer(&mut self, layer: usize, mean: f64) -> [Vec<f64>; 3] {
        let n = self.sp.len();
        let co = self.co;
        let t = self.t;
        let other = 1 - layer;
        let speed = co.speed[layer];
        let sq_eps = self.p.eps.sqrt();
        let sn = (co.wt * sq_eps * t).sin();
        let (a_coef, b_coef, c_coef) = self.h_coefs(layer, t);
        let kappa = self.sp.kappa().to_vec();
        let ny = self.sp.grid().nyquist_index();

        // Shifted spectra per direction.
        let mut lead: [Vec<C64>; 2] = std::array::from_fn(|_| vec![ZERO; n]);
        let mut dx: [Vec<C64>; 2] = std::array::from_fn(|_| vec![ZERO; n]);
        let mut anti: [Vec<C64>; 2] = std::array::from_fn(|_| vec![ZERO; n]);
        let mut eps: [Vec<C64>; 2] = std::array::from_fn(|_| vec![ZERO; n]);
        let mut hat: [Vec<C64>; 2] = std::array::from_fn(|_| vec![ZERO; n]);
        let mut left_const = [0.0; 2];
        let norm = 1.0 / (n as f64).sqrt();
        for dir in 0..2 {
            let s = DIR_SIGN[dir];
            let shift = s * speed * t;
            let c = ch(layer, dir);
            let f = self.sp.phase_shift(&self.f[c], shift);
            let phi = self.sp.phase_shift(&self.phi[c], shift);
            let fo = if self.case == CaseKind::CloseSpeeds {
                self.sp.phase_shift(&self.f[ch(other, dir)], shift)
            } else {
                Vec::new()
            };
            // Value at x = −L of the periodic antiderivative of the unshifted f.
            let a0 = self.sp.antiderivative_coeffs_unchecked(&self.f[c]);
            left_const[dir] = a0.iter().map(|z| z.re).sum::<f64>() * norm;
            for i in 0..n {
                let k = kappa[i];
                let ik = C64::new(0.0, k);
                lead[dir][i] = f[i];
                dx[dir][i] = if i == ny { ZERO } else { ik * f[i] };
                anti[dir][i] = if i == 0 || i == ny { ZERO } else { f[i] / ik };
                let mut e = f[i] * (a_coef - b_coef * k * k) + phi[i];
                if self.case == CaseKind::CloseSpeeds {
                    e += fo[i] * c_coef;
                }
                eps[dir][i] = e;
            }
            if self.case == CaseKind::DistinctSpeeds {
                let fo = self.sp.phase_shift(&self.f[ch(other, dir)], s * co.speed[other] * t);
                for i in 0..n {
                    let k2 = kappa[i] * kappa[i];
                    hat[dir][i] = if i == 0 || i == ny {
                        ZERO
                    } else {
                        fo[i] * (-co.hat[layer] / k2)
                    };
                }
            }
        }
        let pair = |a: &[C64], b: &[C64], sc: &mut FftScratch| {
            let (mut x, mut y) = (vec![0.0; n], vec![0.0; n]);
            self.sp.inverse_pair_into(a, b, &mut x, &mut y, sc);
            (x, y)
        };
        let sc = &mut self.sc;
        let (fm, fp) = pair(&lead[0], &lead[1], sc);
        let (fm1, fp1) = pair(&dx[0], &dx[1], sc);
        let (mut im, mut ip) = pair(&anti[0], &anti[1], sc);
        let (em, ep) = pair(&eps[0], &eps[1], sc);
        let (hm, hp) = if self.case == CaseKind::DistinctSpeeds {
            pair(&hat[0], &hat[1], sc)
        } else {
            (vec![0.0; n], vec![0.0; n])
        };
        im.iter_mut().for_each(|v| *v -= left_const[0]);
        ip.iter_mut().for_each(|v| *v -= left_const[1]);

        let gamp = co.gsign[layer] * co.theta[layer] * sn * sq_eps;
        let kc = co.hc[layer];
        let e = self.p.eps;
        let mut l0 = vec![0.0; n];
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        for i in 0..n {
            let lead = fm[i] + fp[i] + mean;
            // g^d = s_d·gsign·θ̃·sin·f′, s = −1 for the minus channel.
            let g = gamp * (fp1[i] - fm1[i]);
            let hc = kc * (fm1[i] * ip[i] + 2.0 * fm[i] * fp[i] + fp1[i] * im[i]);
            l0[i] = lead;
            l1[i] = lead + g;
            l2[i] = lead + g + e * (em[i] + ep[i] + hc + hm[i] + hp[i]);
        }
        [l0, l1, l2]
    }

    /// Current fast time.
    pub fn time(&self) -> f64 {
        self.t
    }

    /// Slow time `T = ε t`.
    pub fn slow_time(&self) -> f64 {
        self.p.eps * self.t
    }

    /// Asymptotic regime.
    pub fn case(&self) -> CaseKind {
        self.case
    }

    /// Mean-state coefficients.
    pub fn mean_state(&self) -> &MeanState {
        &self.ms
    }

    /// Grid.
    pub fn grid(&self) -> &GridSpec {
        self.sp.grid()
    }

    /// FFT plans.
    pub fn spectral(&self) -> &Spectral {
        &self.sp
    }

    /// Options in use.
    pub fn options(&self) -> &WnlOptions {
        &self.opts
    }

    /// Leading-order coefficients of a channel (`dir` 0 is `−`).
    pub fn f_coeffs(&self, layer: usize, dir: usize) -> &[C64] {
        &self.f[ch(layer, dir)]
    }

    /// `φ` coefficients of a channel.
    pub fn phi_coeffs(&self, layer: usize, dir: usize) -> &[C64] {
        &self.phi[ch(layer, dir)]
    }

    /// Leading-order field of a channel on the grid, in its own
    /// characteristic variable.
    pub fn f_field(&self, layer: usize, dir: usize) -> Vec<f64> {
        self.sp.inverse_real(self.f_coeffs(layer, dir))
    }

    /// `φ` field of a channel on the grid.
    pub fn phi_field(&self, layer: usize, dir: usize) -> Vec<f64> {
        self.sp.inverse_real(self.phi_coeffs(layer, dir))
    }

    /// Replaces the leading-order coefficients of a channel (used for
    /// oracle tests with prescribed profiles).
    pub fn set_f_coeffs(&mut self, layer: usize, dir: usize, coeffs: Vec<C64>) -> Result<()> {
        if coeffs.len() != self.sp.len() {
            return Err(CrbError::GridMismatch("coefficient length differs from grid".into()));
        }
        self.f[ch(layer, dir)] = coeffs;
        Ok(())
    }

    /// Largest grid mean over all evolved fields.
    pub fn max_field_mean(&self) -> f64 {
        let norm = 1.0 / (self.sp.len() as f64).sqrt();
        self.f
            .iter()
            .chain(self.phi.iter())
            .map(|v| v[0].norm() * norm)
            .fold(0.0, f64::max)
    }
}

/// Convenience: `θ̃` amplitudes `[θ̃1, θ̃2]` for a configuration.
pub fn theta_tilde(case: CaseKind, p: &PhysParams, ms: &MeanState) -> [f64; 2] {
    Coefs::new(case, p, ms, &WnlOptions::default()).theta
}
