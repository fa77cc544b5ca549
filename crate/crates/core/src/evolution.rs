//! Time integration of the gDNLS equation, its Yosida-regularized
//! approximation and the quadratic comparison equation `i u u_x`.
//!
//! All variants are written `i u_t + D² u + N(u) = 0` and advanced with the
//! implicit midpoint (Crank–Nicolson) rule. The midpoint equation is solved
//! by fixed-point iteration, one tridiagonal solve per sweep.
//!
//! For the `full` and `regularized` variants `N` is the exact discrete
//! gradient of the potential, `N = -grad G(u)` and `N = -J grad G(J u)`
//! respectively, so the semi-discrete system is Hamiltonian with energy
//! `E` (resp. `E_m`). The midpoint rule then conserves the discrete charge
//! exactly and the energy error is `O(dt²)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::{
    approx_energy, density_moment, energy, h1_norm, h2_norm, mass, momentum, potential_gradient,
    sobolev_norm, Sigma, SigmaRegime,
};
use crate::grid::{d1, d2, Field, Grid};
use crate::tridiag::{ThomasFactor, TridiagonalSystem};
use crate::yosida::YosidaOp;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Which nonlinear term drives the evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonlinearityKind {
    /// `i |u|^{2 sigma} u_x`.
    Full,
    /// `J_m g(J_m u)`.
    Regularized { m: f64 },
    /// `i u u_x`.
    Christ,
}

impl NonlinearityKind {
    pub fn label(&self) -> &'static str {
        match self {
            NonlinearityKind::Full => "full",
            NonlinearityKind::Regularized { .. } => "regularized",
            NonlinearityKind::Christ => "christ",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub sigma: Sigma,
    pub dt: f64,
    pub t_end: f64,
    pub kind: NonlinearityKind,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub observe_every: usize,
    /// Permit the full equation below `sigma = 1/2`.
    pub allow_subcritical: bool,
}

impl SolverParams {
    pub const DEFAULT_DT: f64 = 1e-3;
    pub const DEFAULT_FP_TOL: f64 = 1e-12;
    pub const DEFAULT_FP_MAX_ITER: usize = 100;
    pub const DEFAULT_OBSERVE_EVERY: usize = 10;

    pub fn new(sigma: Sigma, t_end: f64, kind: NonlinearityKind) -> Self {
        Self {
            sigma,
            dt: Self::DEFAULT_DT,
            t_end,
            kind,
            fp_tol: Self::DEFAULT_FP_TOL,
            fp_max_iter: Self::DEFAULT_FP_MAX_ITER,
            observe_every: Self::DEFAULT_OBSERVE_EVERY,
            allow_subcritical: false,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_observe_every(mut self, every: usize) -> Self {
        self.observe_every = every;
        self
    }

    pub fn with_kind(mut self, kind: NonlinearityKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    /// Number of time steps; `t_end` must be an integer multiple of `dt`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn observation_spacing(&self) -> f64 {
        self.dt * self.observe_every as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt", format!("must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return bad("t_end", format!("must be at least dt = {}, got {}", self.dt, self.t_end));
        }
        let steps = self.t_end / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return bad("t_end", format!("{} is not a multiple of dt = {}", self.t_end, self.dt));
        }
        if !(self.fp_tol > 0.0 && self.fp_tol <= 1e-6) {
            return bad("fp_tol", format!("must lie in (0, 1e-6], got {}", self.fp_tol));
        }
        if self.fp_max_iter < 10 {
            return bad("fp_max_iter", format!("must be at least 10, got {}", self.fp_max_iter));
        }
        if self.observe_every == 0 || !self.steps().is_multiple_of(self.observe_every) {
            return bad(
                "observe_every",
                format!(
                    "must be positive and divide the step count {}, got {}",
                    self.steps(),
                    self.observe_every
                ),
            );
        }
        if let NonlinearityKind::Regularized { m } = self.kind {
            if !(m.is_finite() && m > 0.0) {
                return bad("m", format!("regularization level must be positive, got {m}"));
            }
        }
        if self.kind == NonlinearityKind::Full
            && self.sigma.regime() == SigmaRegime::Weak
            && !self.allow_subcritical
        {
            return Err(Error::OutOfRegime(format!(
                "the full equation with sigma = {} < 1/2 has no strong theory; \
                 use the regularized kind or set allow_subcritical",
                self.sigma.value()
            )));
        }
        Ok(())
    }
}

/// Conserved and diagnostic quantities at one observation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedSample {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub approx_energy: f64,
    pub momentum: f64,
    pub h1: f64,
    pub h2: f64,
    pub dtu_l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Field>,
    pub conserved: Vec<ConservedSample>,
    /// Spacing between observations.
    pub spacing: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn initial(&self) -> &Field {
        &self.states[0]
    }

    pub fn last(&self) -> &Field {
        self.states.last().expect("trajectories are never empty")
    }

    /// `max_t |q(t) - q(0)| / |q(0)|` for the selected quantity.
    pub fn relative_drift(&self, quantity: impl Fn(&ConservedSample) -> f64) -> f64 {
        let q0 = quantity(&self.conserved[0]);
        let worst = self
            .conserved
            .iter()
            .map(|c| (quantity(c) - q0).abs())
            .fold(0.0, f64::max);
        if q0 == 0.0 {
            worst
        } else {
            worst / q0.abs()
        }
    }
}

/// Observations up to the end time or up to the first failed step.
#[derive(Debug, Clone)]
pub struct PartialRun {
    pub trajectory: Trajectory,
    pub failure: Option<Error>,
}

/// Result of one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: Field,
    pub iterations: usize,
    pub last_change: f64,
}

/// Pre-factorized midpoint stepper for one grid and parameter set.
#[derive(Debug, Clone)]
pub struct Solver {
    grid: Grid,
    params: SolverParams,
    dt: f64,
    implicit: ThomasFactor<Complex64>,
    yosida: Option<YosidaOp>,
}

fn crank_nicolson_factor(grid: &Grid, dt: f64) -> Result<ThomasFactor<Complex64>> {
    // I - (i dt / 2) D²
    let s = dt / (2.0 * grid.h() * grid.h());
    TridiagonalSystem::constant(grid.n(), -I * s, Complex64::new(1.0, 2.0 * s), -I * s).factor()
}

/// `u + (i dt / 2) D² u`.
fn explicit_half(u: &Field, dt: f64) -> Vec<Complex64> {
    let lap = d2(u);
    u.values()
        .iter()
        .zip(lap.values())
        .map(|(z, l)| z + I * (0.5 * dt) * l)
        .collect()
}

impl Solver {
    pub fn new(grid: Grid, params: SolverParams) -> Result<Self> {
        params.validate()?;
        Self::with_step(grid, params, params.dt)
    }

    fn with_step(grid: Grid, params: SolverParams, dt: f64) -> Result<Self> {
        let yosida = match params.kind {
            NonlinearityKind::Regularized { m } => Some(YosidaOp::new(grid, m)?),
            _ => None,
        };
        Ok(Self {
            grid,
            params,
            dt,
            implicit: crank_nicolson_factor(&grid, dt)?,
            yosida,
        })
    }

    /// The same scheme run backwards in time (`dt -> -dt`).
    pub fn reversed(&self) -> Result<Self> {
        Self::with_step(self.grid, self.params, -self.dt)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn yosida(&self) -> Option<&YosidaOp> {
        self.yosida.as_ref()
    }

    /// The nonlinear term `N(w)`.
    pub fn nonlinearity(&self, w: &Field) -> Result<Field> {
        let sigma = self.params.sigma;
        Ok(match self.params.kind {
            NonlinearityKind::Full => potential_gradient(w, sigma).scale(-Complex64::new(1.0, 0.0)),
            NonlinearityKind::Regularized { .. } => {
                let j = self.yosida.as_ref().expect("regularized solver owns J_m");
                let inner = potential_gradient(&j.apply(w)?, sigma);
                j.apply(&inner)?.scale(-Complex64::new(1.0, 0.0))
            }
            NonlinearityKind::Christ => {
                let dw = d1(w);
                w.with_values(
                    w.values()
                        .iter()
                        .zip(dw.values())
                        .map(|(z, dz)| I * z * dz)
                        .collect(),
                )
            }
        })
    }

    /// Right-hand side `i (D² u + N(u))` of `u_t = ...`.
    pub fn time_derivative(&self, u: &Field) -> Result<Field> {
        let n = self.nonlinearity(u)?;
        Ok(d2(u).add(&n).scale(I))
    }

    /// One midpoint step from `u` at time `t` (for error reporting).
    pub fn step(&self, u: &Field, t: f64) -> Result<StepOutcome> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let dt = self.dt;
        let base = explicit_half(u, dt);
        let mut next = u.clone();
        let mut last_change = f64::INFINITY;
        for iteration in 1..=self.params.fp_max_iter {
            let mid = u.add(&next).scale(Complex64::new(0.5, 0.0));
            let nl = self.nonlinearity(&mid)?;
            let mut rhs: Vec<Complex64> = base
                .iter()
                .zip(nl.values())
                .map(|(b, n)| b + I * dt * n)
                .collect();
            self.implicit.solve_in_place(&mut rhs)?;
            let candidate = u.with_values(rhs);
            let scale = candidate.l2_norm();
            last_change = if scale == 0.0 {
                0.0
            } else {
                candidate.sub(&next).l2_norm() / scale
            };
            next = candidate;
            if last_change <= self.params.fp_tol {
                return Ok(StepOutcome {
                    state: next,
                    iterations: iteration,
                    last_change,
                });
            }
            if !last_change.is_finite() {
                break;
            }
        }
        Err(Error::FixedPointDiverged {
            time: t,
            iterations: self.params.fp_max_iter,
            residual: last_change,
        })
    }

    fn observe(&self, t: f64, u: &Field, previous: Option<&Field>) -> Result<ConservedSample> {
        let sigma = self.params.sigma;
        let e = energy(u, sigma);
        let em = match &self.yosida {
            Some(j) => approx_energy(u, sigma, j)?,
            None => e,
        };
        let dtu_l2 = match previous {
            Some(prev) => u.sub(prev).l2_norm() / self.params.observation_spacing(),
            None => self.time_derivative(u)?.l2_norm(),
        };
        Ok(ConservedSample {
            t,
            mass: mass(u),
            energy: e,
            approx_energy: em,
            momentum: momentum(u),
            h1: h1_norm(u),
            h2: h2_norm(u),
            dtu_l2,
        })
    }

    /// Run from `phi` to `t_end`, observing every `observe_every` steps.
    pub fn evolve(&self, phi: &Field) -> Result<Trajectory> {
        let run = self.evolve_partial(phi)?;
        match run.failure {
            Some(e) => Err(e),
            None => Ok(run.trajectory),
        }
    }

    /// Like [`Solver::evolve`] but keeps the observations made before a
    /// step failure.
    pub fn evolve_partial(&self, phi: &Field) -> Result<PartialRun> {
        if *phi.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let p = &self.params;
        let steps = p.steps();
        let observations = steps / p.observe_every + 1;
        let mut traj = Trajectory {
            times: Vec::with_capacity(observations),
            states: Vec::with_capacity(observations),
            conserved: Vec::with_capacity(observations),
            spacing: p.observation_spacing(),
        };
        traj.times.push(0.0);
        traj.conserved.push(self.observe(0.0, phi, None)?);
        traj.states.push(phi.clone());
        let mut u = phi.clone();
        for k in 1..=steps {
            let t_prev = (k - 1) as f64 * p.dt;
            u = match self.step(&u, t_prev) {
                Ok(out) => out.state,
                Err(e) => {
                    return Ok(PartialRun {
                        trajectory: traj,
                        failure: Some(e),
                    })
                }
            };
            if k % p.observe_every == 0 {
                let t = k as f64 * p.dt;
                let sample = self.observe(t, &u, traj.states.last())?;
                traj.times.push(t);
                traj.conserved.push(sample);
                traj.states.push(u.clone());
            }
        }
        Ok(PartialRun {
            trajectory: traj,
            failure: None,
        })
    }

    /// Apply `k` steps of the linear midpoint propagator.
    pub fn linear_propagate(&self, u: &Field, k: usize) -> Result<Field> {
        let mut v = u.clone();
        for _ in 0..k {
            let mut rhs = explicit_half(&v, self.dt);
            self.implicit.solve_in_place(&mut rhs)?;
            v = v.with_values(rhs);
        }
        Ok(v)
    }
}

/// One step of the scheme described by `params`.
pub fn step(u: &Field, params: &SolverParams) -> Result<Field> {
    Ok(Solver::new(*u.grid(), *params)?.step(u, 0.0)?.state)
}

pub fn evolve(phi: &Field, params: &SolverParams) -> Result<Trajectory> {
    Solver::new(*phi.grid(), *params)?.evolve(phi)
}

/// Per-observation L² defect between the stored states and the discrete
/// Duhamel formula `U(t) phi + i int_0^t U(t - s) N(u(s)) ds`, with `U`
/// the linear midpoint propagator and the time integral by the trapezoid
/// rule over observations.
pub fn duhamel_residual(traj: &Trajectory, params: &SolverParams) -> Result<Vec<f64>> {
    if traj.len() < 3 {
        return Err(Error::TooFewObservations {
            needed: 3,
            got: traj.len(),
        });
    }
    let solver = Solver::new(*traj.initial().grid(), *params)?;
    let spacing = traj.spacing;
    let k = params.observe_every;
    let half = I * (0.5 * spacing);
    let full = I * spacing;
    let mut defects = Vec::with_capacity(traj.len());
    defects.push(0.0);
    // accumulated = U(t_n) phi + i dt_obs sum_{j<n} w_j U(t_n - t_j) N_j
    let mut accumulated = traj.initial().clone();
    let mut nl_prev = solver.nonlinearity(traj.initial())?;
    for (n, state) in traj.states.iter().enumerate().skip(1) {
        let weight = if n == 1 { half } else { full };
        accumulated = solver.linear_propagate(&accumulated.add(&nl_prev.scale(weight)), k)?;
        let nl = solver.nonlinearity(state)?;
        let reconstructed = accumulated.add(&nl.scale(half));
        defects.push(state.sub(&reconstructed).l2_norm());
        nl_prev = nl;
    }
    Ok(defects)
}

/// `max_t ||u(t)||_{H^s} / ||u(0)||_{H^s}`.
pub fn growth_probe(traj: &Trajectory, s: f64) -> Result<f64> {
    let initial = sobolev_norm(traj.initial(), s)?;
    if initial == 0.0 {
        return Err(Error::ZeroField);
    }
    let mut worst: f64 = 0.0;
    for u in &traj.states {
        worst = worst.max(sobolev_norm(u, s)?);
    }
    Ok(worst / initial)
}

/// Largest observed `|Delta int |u|^{2r}| / (Delta t (1 + h1²)^{r + sigma})`
/// between consecutive observations.
pub fn density_rate_constant(traj: &Trajectory, r: f64, sigma: Sigma) -> f64 {
    let moments: Vec<f64> = traj.states.iter().map(|u| density_moment(u, r)).collect();
    moments
        .windows(2)
        .zip(traj.conserved.windows(2))
        .map(|(mw, cw)| {
            let h1 = cw[0].h1.max(cw[1].h1);
            (mw[1] - mw[0]).abs() / (traj.spacing * (1.0 + h1 * h1).powf(r + sigma.value()))
        })
        .fold(0.0, f64::max)
}
