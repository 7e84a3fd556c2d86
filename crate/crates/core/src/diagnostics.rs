//! Error metrics, power-law fits and conservation monitors.
//!
//! The weakly-nonlinear error at order `i` is `e_i(t) = max_x |u_num − u_i|`,
//! averaged over the final third of the run to give `ê_i`. Over a sweep of
//! `ε` values the averaged errors are fitted to a power law
//!
//! ```text
//! ê = C ε^α    ⇔    log ê = α log ε + log C
//! ```
//!
//! The conservation monitor works with the potentials `U_x = u`, `W_x = w`
//!
//! ```text
//! U(x)   = (x + L) ū + ∫_{−L}^{x} (u − ū)
//! U_t(x) = (x + L) dū/dt + ∫_{−L}^{x} (u_t − dū/dt)
//! ```
//!
//! and checks the non-local balances
//!
//! ```text
//! d/dt ∫ E = U_t(L)[u + (ε/2)u² + ε u_tt] + W_t(L)[(δc²/γ) w + (εαδ/2γ) w² + (εβδ/γ) w_tt]
//! E = ½{U_t² + (δ/γ)W_t² + u² + (δc²/γ)w² + (ε/3)(u³ + (αδ/γ)w³)
//!       + ε u_t² + (εβδ/γ) w_t² + εδ (U − W)²}
//! d/dt ∫ (U_t u + (δ/γ) W_t w + ε u_t u_x + (εβδ/γ) w_t w_x)
//!     = ½[U_t(L)² + (δ/γ) W_t(L)² − εδ (U(L) − W(L))²]
//! ```
//!
//! with `u(L) = u(−L)` by periodicity. The mass functional `ū + (δ/γ) w̄`
//! is constant when the mean velocities vanish.

use std::f64::consts::PI;

use crate::crb::{CrbSolver, TimeGrid};
use crate::error::{CrbError, Result};
use crate::scenario::{CaseKind, InitialCondition, PhysParams};
use crate::spectral::{GridSpec, C64};
use crate::wnl::{WnlFields, WnlOptions, WnlSolver};

/// `max_x |a − b|`.
pub fn max_abs_error(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(CrbError::GridMismatch(format!(
            "fields have {} and {} points",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

/// Per-step errors of the three expansion orders against the direct
/// solution.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorRecord {
    /// Sample times.
    pub t: Vec<f64>,
    /// `e_i(t)` for `u`, indexed by order.
    pub u: [Vec<f64>; 3],
    /// `e_i(t)` for `w`, indexed by order.
    pub w: [Vec<f64>; 3],
}

impl ErrorRecord {
    /// Appends the errors of `wnl` against the direct fields `(u, w)`.
    pub fn push(&mut self, u: &[f64], w: &[f64], wnl: &WnlFields) -> Result<()> {
        self.t.push(wnl.t);
        for (o, (wu, ww)) in wnl.orders.iter().enumerate() {
            self.u[o].push(max_abs_error(u, wu)?);
            self.w[o].push(max_abs_error(w, ww)?);
        }
        Ok(())
    }

    /// Final-third averages `[[u orders], [w orders]]`.
    pub fn averaged(&self) -> Result<[[f64; 3]; 2]> {
        let mut out = [[0.0; 3]; 2];
        for o in 0..3 {
            out[0][o] = averaged_error_final_third(&self.t, &self.u[o])?;
            out[1][o] = averaged_error_final_third(&self.t, &self.w[o])?;
        }
        Ok(out)
    }
}

/// Mean of the samples with `t ≥ t_first + 2/3 (t_last − t_first)`.
pub fn averaged_error_final_third(t: &[f64], e: &[f64]) -> Result<f64> {
    if t.len() != e.len() {
        return Err(CrbError::Data("time and error series differ in length".into()));
    }
    if t.len() < 3 {
        return Err(CrbError::Data(format!("need at least 3 samples, got {}", t.len())));
    }
    let (t0, t1) = (t[0], t[t.len() - 1]);
    let cut = t0 + 2.0 * (t1 - t0) / 3.0;
    let (sum, n) = t
        .iter()
        .zip(e)
        .filter(|(ti, _)| **ti >= cut - 1e-12 * (t1 - t0).abs())
        .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
    if n == 0 {
        return Err(CrbError::Data("final-third window is empty".into()));
    }
    Ok(sum / n as f64)
}

/// Least-squares line `y = α x + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    /// Slope `α`.
    pub alpha: f64,
    /// Intercept (`log C` for power fits).
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

impl SlopeFit {
    /// `C = exp(intercept)`.
    pub fn prefactor(&self) -> f64 {
        self.intercept.exp()
    }
}

fn line_fit(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    let n = x.len();
    if n < 4 {
        return Err(CrbError::Data(format!("a fit needs at least 4 points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let spread = x.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - x.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let mut uniq: Vec<f64> = x.to_vec();
    uniq.sort_by(|a, b| a.total_cmp(b));
    uniq.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    if uniq.len() < n || spread <= 1e-12 || sxx <= 0.0 {
        return Err(CrbError::Data("degenerate spread: abscissae must be distinct".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let residual = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - alpha * a - intercept).powi(2))
        .sum::<f64>()
        / nf)
        .sqrt();
    Ok(SlopeFit {
        alpha,
        intercept,
        residual,
    })
}

/// Power-law fit `ê = C ε^α` by least squares on `(log ε, log ê)`.
pub fn power_fit(pairs: &[(f64, f64)]) -> Result<SlopeFit> {
    if pairs
        .iter()
        .any(|&(e, v)| !(e > 0.0 && v > 0.0) || !e.is_finite() || !v.is_finite())
    {
        return Err(CrbError::Data("power fit needs positive finite ε and errors".into()));
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    line_fit(&x, &y)
}

/// Fit of the plotting variable itself against `log ε`: `y = α log ε + b`.
pub fn semilog_fit(pairs: &[(f64, f64)]) -> Result<SlopeFit> {
    if pairs.iter().any(|&(e, v)| e.is_nan() || e <= 0.0 || !v.is_finite()) {
        return Err(CrbError::Data("semilog fit needs positive ε and finite values".into()));
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    line_fit(&x, &y)
}

/// `n` logarithmically spaced values from `a` to `b` inclusive.
pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Result of one sweep entry.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepEntry {
    /// Small parameter.
    pub eps: f64,
    /// Final time `1/ε`.
    pub t_end: f64,
    /// Final-third averaged errors `[[u orders], [w orders]]`.
    pub ehat: [[f64; 3]; 2],
    /// Full error record.
    pub record: ErrorRecord,
}

/// Runs the direct and weakly-nonlinear solvers side by side to `t_end`,
/// recording the errors every `every` steps of size `dt`.
pub fn compare_to_direct(
    ic: &InitialCondition,
    case: CaseKind,
    p: &PhysParams,
    opts: WnlOptions,
    dt: f64,
    t_end: f64,
    every: usize,
) -> Result<ErrorRecord> {
    let mut direct = CrbSolver::new(ic, p)?;
    let mut wnl = WnlSolver::new(ic, case, p, opts)?;
    let mut rec = ErrorRecord::default();
    let every = every.max(1);
    let n_steps = (t_end / dt).round().max(1.0) as usize;
    let h = t_end / n_steps as f64;
    let record = |rec: &mut ErrorRecord, d: &mut CrbSolver, w: &mut WnlSolver| -> Result<()> {
        let (u, ww) = d.fields();
        rec.push(&u, &ww, &w.assemble())
    };
    record(&mut rec, &mut direct, &mut wnl)?;
    for s in 1..=n_steps {
        direct.step(h)?;
        wnl.step(h)?;
        if s % every == 0 || s == n_steps {
            record(&mut rec, &mut direct, &mut wnl)?;
        }
    }
    Ok(rec)
}

/// Error sweep over `eps_list`; each entry runs to `t = 1/ε`. Entries are
/// independent and run in parallel when the `parallel` feature is on.
pub fn error_sweep<F>(
    eps_list: &[f64],
    build_ic: F,
    case: CaseKind,
    p: &PhysParams,
    opts: WnlOptions,
    dt: f64,
) -> Result<Vec<SweepEntry>>
where
    F: Fn(&PhysParams) -> Result<InitialCondition> + Sync + Send,
{
    let runs = crate::par::map_indexed(eps_list.len(), |i| -> Result<SweepEntry> {
        let eps = eps_list[i];
        let pe = p.with_eps(eps);
        let ic = build_ic(&pe)?;
        let t_end = 1.0 / eps;
        let record = compare_to_direct(&ic, case, &pe, opts, dt, t_end, 1)?;
        Ok(SweepEntry {
            eps,
            t_end,
            ehat: record.averaged()?,
            record,
        })
    });
    runs.into_iter().collect()
}

/// Power fits per field and order: `[[u orders], [w orders]]`.
pub fn sweep_slopes(entries: &[SweepEntry]) -> Result<[[SlopeFit; 3]; 2]> {
    let fit =
        |field: usize, o: usize| power_fit(&entries.iter().map(|e| (e.eps, e.ehat[field][o])).collect::<Vec<_>>());
    Ok([
        [fit(0, 0)?, fit(0, 1)?, fit(0, 2)?],
        [fit(1, 0)?, fit(1, 1)?, fit(1, 2)?],
    ])
}

/// Integrals and boundary terms at one time.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConservationSample {
    /// Time.
    pub t: f64,
    /// `ū + (δ/γ) w̄`.
    pub mass: f64,
    /// Spatial mean `ū`.
    pub mean_u: f64,
    /// `∫ E dx`.
    pub energy: f64,
    /// Energy flux at the boundary.
    pub energy_rhs: f64,
    /// Momentum integral.
    pub momentum: f64,
    /// Momentum flux at the boundary.
    pub momentum_rhs: f64,
}

/// Trapezoid rule on `[−L, L]` over `N + 1` samples with the end
/// correction `−(h²/12)(f′(L) − f′(−L))`, end slopes from fourth-order
/// one-sided differences.
pub fn integrate_open(grid: &GridSpec, f: &[f64]) -> f64 {
    let h = grid.dx();
    let n = f.len();
    debug_assert_eq!(n, grid.n_points() + 1);
    let trap = h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[n - 1]));
    if n < 5 {
        return trap;
    }
    let d0 = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    let m = n - 1;
    let d1 = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]) / (12.0 * h);
    trap - h * h / 12.0 * (d1 - d0)
}

/// Appends the value at `x = L` to a periodic grid field.
fn close_periodic(v: &[f64]) -> Vec<f64> {
    let mut o = v.to_vec();
    o.push(v[0]);
    o
}

/// Potential with mean `mean`: `(x + L) mean + ∫_{−L}^{x}(f − mean)`, sampled
/// on `N + 1` points including `x = L`.
fn potential(solver: &CrbSolver, coeffs: &[C64], mean: f64) -> Vec<f64> {
    let sp = solver.spectral();
    let g = sp.grid();
    let mut a = sp.antiderivative_coeffs_unchecked(coeffs);
    a[0] = C64::new(0.0, 0.0);
    let mut v = sp.inverse_real(&a);
    let v0 = v[0];
    v.iter_mut().for_each(|x| *x -= v0);
    v.push(0.0);
    let two_l = 2.0 * g.half_length();
    for (j, x) in v.iter_mut().enumerate() {
        *x += j as f64 * g.dx() * mean;
    }
    let n = v.len();
    v[n - 1] = two_l * mean;
    v
}

/// Evaluates the conservation integrals and fluxes of the current state.
pub fn conservation_sample(solver: &mut CrbSolver) -> ConservationSample {
    let p = *solver.params();
    let g = *solver.grid();
    let (ub, wb) = solver.means();
    let (ubt, wbt) = solver.mean_rates();
    let st = solver.state().clone();
    let (u, w) = solver.fields();
    let (ut, wt) = solver.velocities();
    let (utt, wtt) = solver.accelerations();
    let sp = solver.spectral().clone();
    let ux = sp.inverse_real(&sp.derivative(&st.u, 1));
    let wx = sp.inverse_real(&sp.derivative(&st.w, 1));
    let cu = potential(solver, &st.u, ub);
    let cw = potential(solver, &st.w, wb);
    let cut = potential(solver, &st.ut, ubt);
    let cwt = potential(solver, &st.wt, wbt);
    let (u, w, ut, wt, ux, wx) = (
        close_periodic(&u),
        close_periodic(&w),
        close_periodic(&ut),
        close_periodic(&wt),
        close_periodic(&ux),
        close_periodic(&wx),
    );
    let (e, r) = (p.eps, p.delta / p.gamma);
    let n = u.len();
    let mut en = vec![0.0; n];
    let mut mo = vec![0.0; n];
    for j in 0..n {
        en[j] = 0.5
            * (cut[j].powi(2)
                + r * cwt[j].powi(2)
                + u[j].powi(2)
                + r * p.c * p.c * w[j].powi(2)
                + e / 3.0 * (u[j].powi(3) + p.alpha * r * w[j].powi(3))
                + e * ut[j].powi(2)
                + e * p.beta * r * wt[j].powi(2)
                + e * p.delta * (cu[j] - cw[j]).powi(2));
        mo[j] = cut[j] * u[j] + r * cwt[j] * w[j] + e * ut[j] * ux[j] + e * p.beta * r * wt[j] * wx[j];
    }
    let (utl, wtl) = (cut[n - 1], cwt[n - 1]);
    let (ul, wl) = (u[0], w[0]);
    let energy_rhs = utl * (ul + 0.5 * e * ul * ul + e * utt[0])
        + wtl * (r * p.c * p.c * wl + 0.5 * e * p.alpha * r * wl * wl + e * p.beta * r * wtt[0]);
    let momentum_rhs = 0.5 * (utl * utl + r * wtl * wtl - e * p.delta * (cu[n - 1] - cw[n - 1]).powi(2));
    ConservationSample {
        t: solver.time(),
        mass: ub + r * wb,
        mean_u: ub,
        energy: integrate_open(&g, &en),
        energy_rhs,
        momentum: integrate_open(&g, &mo),
        momentum_rhs,
    }
}

/// Time series of the conservation diagnostics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConservationSeries {
    /// Sample times (uniform).
    pub t: Vec<f64>,
    /// Mass functional.
    pub mass: Vec<f64>,
    /// Spatial mean `ū`, oscillating at the mean-flow frequency `ω`.
    pub mean_u: Vec<f64>,
    /// Energy integral.
    pub energy: Vec<f64>,
    /// `d/dt` of the energy integral.
    pub energy_lhs: Vec<f64>,
    /// Energy flux.
    pub energy_rhs: Vec<f64>,
    /// Momentum integral.
    pub momentum: Vec<f64>,
    /// `d/dt` of the momentum integral.
    pub momentum_lhs: Vec<f64>,
    /// Momentum flux.
    pub momentum_rhs: Vec<f64>,
}

impl ConservationSeries {
    /// Builds the series from uniformly spaced samples.
    pub fn from_samples(samples: &[ConservationSample]) -> Result<Self> {
        if samples.len() < 5 {
            return Err(CrbError::Data(format!(
                "need at least 5 samples to differentiate, got {}",
                samples.len()
            )));
        }
        let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let h = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
        let energy: Vec<f64> = samples.iter().map(|s| s.energy).collect();
        let momentum: Vec<f64> = samples.iter().map(|s| s.momentum).collect();
        Ok(Self {
            mass: samples.iter().map(|s| s.mass).collect(),
            mean_u: samples.iter().map(|s| s.mean_u).collect(),
            energy_lhs: fd4(&energy, h),
            energy_rhs: samples.iter().map(|s| s.energy_rhs).collect(),
            momentum_lhs: fd4(&momentum, h),
            momentum_rhs: samples.iter().map(|s| s.momentum_rhs).collect(),
            energy,
            momentum,
            t,
        })
    }

    /// `max |mass − mass(0)| / max(|mass(0)|, 1)`.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass[0];
        self.mass.iter().fold(0.0_f64, |a, m| a.max((m - m0).abs())) / m0.abs().max(1.0)
    }
}

/// Fourth-order finite-difference derivative of uniformly sampled data:
/// centred `(−f₊₂ + 8f₊₁ − 8f₋₁ + f₋₂)/(12h)` inside, one-sided at the ends.
pub fn fd4(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 5, "fd4 needs at least 5 samples");
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
    }
    let fwd =
        |i: usize| (-25.0 * f[i] + 48.0 * f[i + 1] - 36.0 * f[i + 2] + 16.0 * f[i + 3] - 3.0 * f[i + 4]) / (12.0 * h);
    let bwd =
        |i: usize| (25.0 * f[i] - 48.0 * f[i - 1] + 36.0 * f[i - 2] - 16.0 * f[i - 3] + 3.0 * f[i - 4]) / (12.0 * h);
    d[0] = fwd(0);
    d[1] = fwd(1);
    d[n - 2] = bwd(n - 2);
    d[n - 1] = bwd(n - 1);
    d
}

/// Runs the direct solver and samples the conservation diagnostics every
/// `sample_every` steps.
pub fn run_conservation(
    ic: &InitialCondition,
    p: &PhysParams,
    time: &TimeGrid,
    sample_every: usize,
) -> Result<ConservationSeries> {
    let mut solver = CrbSolver::new(ic, p)?;
    let n_steps = (time.t_end / time.dt).round() as usize;
    let every = sample_every.max(1);
    let mut samples = Vec::with_capacity(n_steps / every + 1);
    samples.push(conservation_sample(&mut solver));
    for s in 1..=n_steps {
        solver.step(time.dt)?;
        if s % every == 0 {
            samples.push(conservation_sample(&mut solver));
        }
    }
    ConservationSeries::from_samples(&samples)
}

/// Indices of strict local extrema (interior points).
pub fn local_extrema(v: &[f64]) -> Vec<usize> {
    (1..v.len().saturating_sub(1))
        .filter(|&i| (v[i] > v[i - 1] && v[i] >= v[i + 1]) || (v[i] < v[i - 1] && v[i] <= v[i + 1]))
        .collect()
}

/// Largest percentage mismatch between extrema of `lhs` and the nearest (in
/// time) extrema of `rhs`. The first and last `skip` samples are ignored to
/// avoid the one-sided difference stencils.
pub fn peak_track_error(t: &[f64], lhs: &[f64], rhs: &[f64], skip: usize) -> Result<f64> {
    if t.len() != lhs.len() || t.len() != rhs.len() {
        return Err(CrbError::Data("series differ in length".into()));
    }
    let n = t.len();
    if n <= 2 * skip + 2 {
        return Err(CrbError::Data("series too short for peak tracking".into()));
    }
    let lo = skip;
    let hi = n - skip;
    let el: Vec<usize> = local_extrema(&lhs[lo..hi]).into_iter().map(|i| i + lo).collect();
    let er: Vec<usize> = local_extrema(&rhs[lo..hi]).into_iter().map(|i| i + lo).collect();
    if el.is_empty() || er.is_empty() {
        return Err(CrbError::Data("no extrema found".into()));
    }
    let mut worst: f64 = 0.0;
    for &i in &el {
        let j = *er
            .iter()
            .min_by(|&&a, &&b| (t[a] - t[i]).abs().total_cmp(&(t[b] - t[i]).abs()))
            .expect("non-empty");
        let denom = rhs[j].abs();
        if denom > 0.0 {
            worst = worst.max((lhs[i] - rhs[j]).abs() / denom * 100.0);
        }
    }
    Ok(worst)
}

/// Angular frequency of the largest non-zero DFT bin of `v` (mean removed)
/// sampled at spacing `h`, together with the bin width.
pub fn dominant_frequency(v: &[f64], h: f64) -> (f64, f64) {
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let mut planner = rustfft::FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut buf: Vec<C64> = v.iter().map(|x| C64::new(x - mean, 0.0)).collect();
    fft.process(&mut buf);
    let best = (1..n / 2)
        .max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))
        .unwrap_or(1);
    let bin = 2.0 * PI / (n as f64 * h);
    (best as f64 * bin, bin)
}

/// Angular frequency of the lowest spectral peak of `v` (mean removed)
/// whose magnitude is at least `rel` times the largest one, with the bin
/// width. A series whose peaks alternate in height has its fundamental at
/// half the dominant frequency.
pub fn fundamental_frequency(v: &[f64], h: f64, rel: f64) -> (f64, f64) {
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let mut planner = rustfft::FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut buf: Vec<C64> = v.iter().map(|x| C64::new(x - mean, 0.0)).collect();
    fft.process(&mut buf);
    let mag: Vec<f64> = buf[..n / 2].iter().map(|c| c.norm()).collect();
    let top = mag[1..].iter().cloned().fold(0.0, f64::max);
    let bin = 2.0 * PI / (n as f64 * h);
    let first = (1..mag.len().saturating_sub(1))
        .find(|&k| mag[k] >= rel * top && mag[k] >= mag[k - 1] && mag[k] >= mag[k + 1])
        .unwrap_or(1);
    (first as f64 * bin, bin)
}

/// Centroid on a periodic domain of a non-negative density, via the
/// circular mean `arg Σ ρ_j exp(iπ x_j / L)`.
pub fn circular_centroid(grid: &GridSpec, density: &[f64]) -> f64 {
    let s = PI / grid.half_length();
    let z = density.iter().enumerate().fold(C64::new(0.0, 0.0), |acc, (j, &d)| {
        acc + C64::from_polar(d, s * grid.node(j))
    });
    z.arg() / s
}

/// Unwraps a sequence of periodic positions on `[−L, L)` so consecutive
/// values differ by less than `L`.
pub fn unwrap_positions(x: &[f64], half_length: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let two_l = 2.0 * half_length;
    let mut offset = 0.0;
    for (i, &v) in x.iter().enumerate() {
        if i > 0 {
            let prev = x[i - 1];
            let d = v - prev;
            if d > half_length {
                offset -= two_l;
            } else if d < -half_length {
                offset += two_l;
            }
        }
        out.push(v + offset);
    }
    out
}

/// Half the peak-to-peak range of `field` within `[a, b]` on the periodic
/// grid (the interval may wrap around). Insensitive to a constant offset.
pub fn window_amplitude(grid: &GridSpec, field: &[f64], a: f64, b: f64) -> f64 {
    let two_l = 2.0 * grid.half_length();
    let width = b - a;
    let (lo, hi) = field
        .iter()
        .enumerate()
        .filter(|(j, _)| (grid.node(*j) - a).rem_euclid(two_l) <= width)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, &v)| {
            (lo.min(v), hi.max(v))
        });
    if lo > hi {
        0.0
    } else {
        0.5 * (hi - lo)
    }
}
