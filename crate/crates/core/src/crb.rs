//! Direct pseudospectral solver for the coupled regularised Boussinesq
//! system.
//!
//! Each Fourier mode `κ = s k` obeys
//!
//! ```text
//! û_tt = [−κ² û − (εκ²/2) F{u²} − εδ (û − ŵ)] / (1 + εκ²)
//! ŵ_tt = [−c²κ² ŵ − (εακ²/2) F{w²} + εγ (û − ŵ)] / (1 + εβκ²)
//! ```
//!
//! and the first-order system for `(û, ŵ, û_t, ŵ_t)` is advanced with the
//! classical fourth-order Runge–Kutta method. The squares are evaluated
//! pseudospectrally; both layers share one complex FFT per transform.

use crate::error::{CrbError, Result};
use crate::scenario::{InitialCondition, PhysParams};
use crate::spectral::{FftScratch, GridSpec, Spectral, C64};

/// Spectral state of the direct solver.
#[derive(Clone, Debug, PartialEq)]
pub struct CrbState {
    /// `û`.
    pub u: Vec<C64>,
    /// `ŵ`.
    pub w: Vec<C64>,
    /// `û_t`.
    pub ut: Vec<C64>,
    /// `ŵ_t`.
    pub wt: Vec<C64>,
    /// Current time.
    pub t: f64,
}

impl CrbState {
    fn zeros(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self {
            u: z.clone(),
            w: z.clone(),
            ut: z.clone(),
            wt: z,
            t: 0.0,
        }
    }

    fn axpy_from(&mut self, base: &CrbState, h: f64, d: &CrbState) {
        let pairs = [
            (&mut self.u, &base.u, &d.u),
            (&mut self.w, &base.w, &d.w),
            (&mut self.ut, &base.ut, &d.ut),
            (&mut self.wt, &base.wt, &d.wt),
        ];
        for (o, b, k) in pairs {
            for ((oi, bi), ki) in o.iter_mut().zip(b.iter()).zip(k.iter()) {
                *oi = bi + ki * h;
            }
        }
    }

    fn all_finite(&self) -> bool {
        [&self.u, &self.w, &self.ut, &self.wt]
            .iter()
            .all(|v| v.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

/// Time stepping controls.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    /// Step size.
    pub dt: f64,
    /// Final time.
    pub t_end: f64,
    /// Sorted output times in `[0, t_end]`.
    pub snapshot_times: Vec<f64>,
}

impl TimeGrid {
    /// Validated constructor; snapshot times are sorted.
    pub fn new(dt: f64, t_end: f64, mut snapshot_times: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(CrbError::Config(format!("time step must be positive, got {dt}")));
        }
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(CrbError::Config(format!(
                "final time must be non-negative, got {t_end}"
            )));
        }
        snapshot_times.sort_by(|a, b| a.total_cmp(b));
        if snapshot_times.iter().any(|&t| t < 0.0 || t > t_end * (1.0 + 1e-12)) {
            return Err(CrbError::Config("snapshot times must lie in [0, t_end]".into()));
        }
        Ok(Self {
            dt,
            t_end,
            snapshot_times,
        })
    }
}

/// Physical-space output at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    /// Time.
    pub t: f64,
    /// `u` at the grid nodes.
    pub u: Vec<f64>,
    /// `w` at the grid nodes.
    pub w: Vec<f64>,
}

/// Direct solver owning its state, coefficient tables and scratch space.
#[derive(Clone, Debug)]
pub struct CrbSolver {
    sp: Spectral,
    p: PhysParams,
    /// `κ²`.
    k2: Vec<f64>,
    /// `1/(1 + εκ²)`.
    inv_u: Vec<f64>,
    /// `1/(1 + εβκ²)`.
    inv_w: Vec<f64>,
    state: CrbState,
    stages: [CrbState; 4],
    tmp: CrbState,
    phys_u: Vec<f64>,
    phys_w: Vec<f64>,
    sq_u: Vec<C64>,
    sq_w: Vec<C64>,
    sc: FftScratch,
}

impl CrbSolver {
    /// Initialises `û`, `ŵ` from `F1`, `F2` and `û_t`, `ŵ_t` from `V1`, `V2`.
    pub fn new(ic: &InitialCondition, p: &PhysParams) -> Result<Self> {
        Self::with_spectral(ic, p, Spectral::new(ic.grid))
    }

    /// As [`CrbSolver::new`] with caller-supplied FFT plans (e.g. with
    /// dealiasing enabled).
    pub fn with_spectral(ic: &InitialCondition, p: &PhysParams, sp: Spectral) -> Result<Self> {
        p.validate()?;
        ic.grid.ensure_same(sp.grid())?;
        let n = ic.grid.n_points();
        let k2: Vec<f64> = sp.kappa().iter().map(|k| k * k).collect();
        let inv_u = k2.iter().map(|k| 1.0 / (1.0 + p.eps * k)).collect();
        let inv_w = k2.iter().map(|k| 1.0 / (1.0 + p.eps * p.beta * k)).collect();
        let mut state = CrbState::zeros(n);
        let mut sc = sp.scratch();
        sp.forward_pair_into(&ic.f1, &ic.f2, &mut state.u, &mut state.w, &mut sc);
        sp.forward_pair_into(&ic.v1, &ic.v2, &mut state.ut, &mut state.wt, &mut sc);
        Ok(Self {
            k2,
            inv_u,
            inv_w,
            stages: [
                CrbState::zeros(n),
                CrbState::zeros(n),
                CrbState::zeros(n),
                CrbState::zeros(n),
            ],
            tmp: CrbState::zeros(n),
            phys_u: vec![0.0; n],
            phys_w: vec![0.0; n],
            sq_u: vec![C64::new(0.0, 0.0); n],
            sq_w: vec![C64::new(0.0, 0.0); n],
            state,
            p: *p,
            sp,
            sc,
        })
    }

    /// Replaces the state (used by reversibility and self-convergence tests).
    pub fn set_state(&mut self, state: CrbState) {
        assert_eq!(state.u.len(), self.sp.len());
        self.state = state;
    }

    /// Current spectral state.
    pub fn state(&self) -> &CrbState {
        &self.state
    }

    /// Current time.
    pub fn time(&self) -> f64 {
        self.state.t
    }

    /// Grid.
    pub fn grid(&self) -> &GridSpec {
        self.sp.grid()
    }

    /// FFT plans.
    pub fn spectral(&self) -> &Spectral {
        &self.sp
    }

    /// Parameters.
    pub fn params(&self) -> &PhysParams {
        &self.p
    }

    /// Evaluates the time derivative of `y` into `out`.
    fn rhs_into(&mut self, y: &CrbState, out: &mut CrbState) {
        let p = self.p;
        self.sp
            .inverse_pair_into(&y.u, &y.w, &mut self.phys_u, &mut self.phys_w, &mut self.sc);
        self.phys_u.iter_mut().for_each(|v| *v *= *v);
        self.phys_w.iter_mut().for_each(|v| *v *= *v);
        self.sp
            .forward_pair_into(&self.phys_u, &self.phys_w, &mut self.sq_u, &mut self.sq_w, &mut self.sc);
        self.sp.dealias_in_place(&mut self.sq_u);
        self.sp.dealias_in_place(&mut self.sq_w);
        out.u.copy_from_slice(&y.ut);
        out.w.copy_from_slice(&y.wt);
        let c2 = p.c * p.c;
        let (k2, inv_u, inv_w) = (&self.k2, &self.inv_u, &self.inv_w);
        let (sq_u, sq_w) = (&self.sq_u, &self.sq_w);
        crate::par::for_each_indexed2(&mut out.ut, &mut out.wt, |i, a, b| {
            let k2 = k2[i];
            let diff = y.u[i] - y.w[i];
            *a = (y.u[i] * (-k2) - sq_u[i] * (0.5 * p.eps * k2) - diff * (p.eps * p.delta)) * inv_u[i];
            *b = (y.w[i] * (-c2 * k2) - sq_w[i] * (0.5 * p.eps * p.alpha * k2) + diff * (p.eps * p.gamma)) * inv_w[i];
        });
    }

    /// Time derivative of an arbitrary state.
    pub fn rhs(&mut self, y: &CrbState) -> CrbState {
        let mut out = CrbState::zeros(y.u.len());
        self.rhs_into(y, &mut out);
        out.t = y.t;
        out
    }

    /// One classical RK4 step of size `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let mut st = std::mem::replace(
            &mut self.stages,
            [
                CrbState::zeros(0),
                CrbState::zeros(0),
                CrbState::zeros(0),
                CrbState::zeros(0),
            ],
        );
        let mut tmp = std::mem::replace(&mut self.tmp, CrbState::zeros(0));
        let y = self.state.clone();
        self.rhs_into(&y, &mut st[0]);
        tmp.axpy_from(&y, 0.5 * dt, &st[0]);
        self.rhs_into(&tmp, &mut st[1]);
        tmp.axpy_from(&y, 0.5 * dt, &st[1]);
        self.rhs_into(&tmp, &mut st[2]);
        tmp.axpy_from(&y, dt, &st[2]);
        self.rhs_into(&tmp, &mut st[3]);
        let h6 = dt / 6.0;
        let [k1, k2, k3, k4] = &st;
        let s = &mut self.state;
        rk4_combine(&mut s.u, [&k1.u, &k2.u, &k3.u, &k4.u], h6);
        rk4_combine(&mut s.w, [&k1.w, &k2.w, &k3.w, &k4.w], h6);
        rk4_combine(&mut s.ut, [&k1.ut, &k2.ut, &k3.ut, &k4.ut], h6);
        rk4_combine(&mut s.wt, [&k1.wt, &k2.wt, &k3.wt, &k4.wt], h6);
        s.t += dt;
        self.stages = st;
        self.tmp = tmp;
        if !self.state.all_finite() {
            return Err(CrbError::Divergence {
                t: self.state.t,
                what: "non-finite spectral coefficient in the direct solver".into(),
            });
        }
        Ok(())
    }

    /// Steps with size `dt` until `t_target`, shortening the last step so
    /// the target is hit exactly.
    pub fn advance_to(&mut self, t_target: f64, dt: f64) -> Result<()> {
        while self.state.t < t_target - 1e-9 * dt {
            let h = dt.min(t_target - self.state.t);
            self.step(h)?;
        }
        Ok(())
    }

    /// Physical-space `(u, w)`.
    pub fn fields(&mut self) -> (Vec<f64>, Vec<f64>) {
        let n = self.sp.len();
        let (mut u, mut w) = (vec![0.0; n], vec![0.0; n]);
        self.sp
            .inverse_pair_into(&self.state.u, &self.state.w, &mut u, &mut w, &mut self.sc);
        (u, w)
    }

    /// Physical-space `(u_t, w_t)`.
    pub fn velocities(&mut self) -> (Vec<f64>, Vec<f64>) {
        let n = self.sp.len();
        let (mut u, mut w) = (vec![0.0; n], vec![0.0; n]);
        self.sp
            .inverse_pair_into(&self.state.ut, &self.state.wt, &mut u, &mut w, &mut self.sc);
        (u, w)
    }

    /// Physical-space `(u_tt, w_tt)` from the equations of motion.
    pub fn accelerations(&mut self) -> (Vec<f64>, Vec<f64>) {
        let y = self.state.clone();
        let d = self.rhs(&y);
        let n = self.sp.len();
        let (mut u, mut w) = (vec![0.0; n], vec![0.0; n]);
        self.sp.inverse_pair_into(&d.ut, &d.wt, &mut u, &mut w, &mut self.sc);
        (u, w)
    }

    /// Grid means `(ū, w̄)` read from the `k = 0` coefficients.
    pub fn means(&self) -> (f64, f64) {
        let norm = 1.0 / (self.sp.len() as f64).sqrt();
        (self.state.u[0].re * norm, self.state.w[0].re * norm)
    }

    /// Mean rates `(dū/dt, dw̄/dt)`.
    pub fn mean_rates(&self) -> (f64, f64) {
        let norm = 1.0 / (self.sp.len() as f64).sqrt();
        (self.state.ut[0].re * norm, self.state.wt[0].re * norm)
    }

    /// Mass functional `ū + (δ/γ) w̄`.
    pub fn mass_functional(&self) -> f64 {
        let (u, w) = self.means();
        u + self.p.delta / self.p.gamma * w
    }

    /// Ratio `max|κ|·c·Δt`; values above 10 are reported by [`crb_solve`].
    pub fn cfl_number(&self, dt: f64) -> f64 {
        let kmax = self.sp.kappa().iter().fold(0.0_f64, |m, k| m.max(k.abs()));
        kmax * self.p.c.max(1.0) * dt
    }
}

fn rk4_combine(dst: &mut [C64], k: [&Vec<C64>; 4], h6: f64) {
    crate::par::for_each_indexed(dst, |i, d| {
        *d += (k[0][i] + (k[1][i] + k[2][i]) * 2.0 + k[3][i]) * h6;
    });
}

/// Integrates from the initial data and returns physical snapshots at the
/// requested times.
pub fn crb_solve(ic: &InitialCondition, time: &TimeGrid, p: &PhysParams) -> Result<Vec<Snapshot>> {
    let mut solver = CrbSolver::new(ic, p)?;
    if solver.cfl_number(time.dt) > 10.0 {
        log::warn!("large step: max|κ|·c·Δt = {:.3}", solver.cfl_number(time.dt));
    }
    let mut out = Vec::with_capacity(time.snapshot_times.len());
    for &ts in &time.snapshot_times {
        solver.advance_to(ts, time.dt)?;
        let (u, w) = solver.fields();
        out.push(Snapshot { t: ts, u, w });
    }
    Ok(out)
}
