//! Truncated Galerkin dynamics: assembly, time integration, steady states
//! and basin-of-attraction experiments.
//!
//! In the orthonormal eigenbasis the system reads
//!
//! ```text
//! dy_l/dt = beta_l y_l - sum_{j,k} y_j y_k T(j, k -> l),
//! ```
//!
//! diagonal linear part, quadratic advection. The energy identity
//! `d/dt (|y|^2/2) = sum beta_l y_l^2` holds exactly (the tensor's
//! skew-symmetry kills the cubic term), which the tests lean on.
//!
//! The default integrator treats the stiff diagonal exactly: one step of
//! the first-order exponential scheme is
//! `y <- exp(beta dt) y + dt phi1(beta dt) N(y)`, whose fixed points are
//! exact equilibria of the truncated system for any `dt`. A classical RK4
//! on the full right-hand side serves as the cross-check.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{ModeIndex, SpectralField, Truncation};
use crate::error::{Error, Result};
use crate::par::{map_indexed, ExecMode};
use crate::reduction::InteractionTensor;
use crate::stability::mode_eigenvalue;

/// Norm bound beyond which integration aborts: the flow saturates at O(10)
/// amplitudes here, so anything near 1e6 is a numerical runaway.
const BLOWUP_NORM: f64 = 1e6;

/// States with a smaller norm count as the rest state.
const REST_NORM_TOL: f64 = 1e-9;

/// Time discretisation of the Galerkin system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Exponential factor on the diagonal, explicit quadratic term.
    ImexExp,
    /// Classical fourth-order Runge-Kutta on the full right-hand side.
    Rk4,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imex_exp" => Ok(Scheme::ImexExp),
            "rk4" => Ok(Scheme::Rk4),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme '{other}' (expected imex_exp or rk4)"
            ))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::ImexExp => "imex_exp",
            Scheme::Rk4 => "rk4",
        })
    }
}

/// Run settings for one integration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Step size; `None` picks the scheme default for the system
    /// (`5 / |beta|_max` for the exponential scheme, `0.1 / |beta|_max`
    /// for RK4). The horizon is always an integer number of steps, so the
    /// effective dt is rounded down to divide `t_end`.
    pub dt: Option<f64>,
    /// Integration horizon.
    pub t_end: f64,
    pub scheme: Scheme,
    /// Relative steady-state tolerance: converged when
    /// `|dy/dt| < steady_tol |y|` (or the state has decayed to rest).
    pub steady_tol: f64,
    /// Seed for random initial fields.
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            dt: None,
            t_end: 100.0,
            scheme: Scheme::ImexExp,
            steady_tol: 1e-10,
            seed: 42,
        }
    }
}

/// The assembled truncated system at one control parameter.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    length: f64,
    lambda: f64,
    truncation: Truncation,
    modes: Vec<ModeIndex>,
    positions: BTreeMap<ModeIndex, usize>,
    betas: Vec<f64>,
    tensor: InteractionTensor,
}

/// Assembles the Galerkin system for a box of axial period `length` at
/// control parameter `lambda`.
pub fn assemble(
    length: f64,
    lambda: f64,
    truncation: Truncation,
    mode: ExecMode,
) -> Result<GalerkinSystem> {
    let modes = truncation.modes();
    let betas: Vec<f64> = modes
        .iter()
        .map(|idx| mode_eigenvalue(*idx, length, lambda))
        .collect();
    let positions = modes.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let tensor = InteractionTensor::assemble(truncation, length, mode)?;
    Ok(GalerkinSystem {
        length,
        lambda,
        truncation,
        modes,
        positions,
        betas,
        tensor,
    })
}

impl GalerkinSystem {
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn tensor(&self) -> &InteractionTensor {
        &self.tensor
    }

    pub fn index_of(&self, mode: ModeIndex) -> Option<usize> {
        self.positions.get(&mode).copied()
    }

    /// Position and index of the mode with the largest growth rate.
    pub fn leading_mode(&self) -> (usize, ModeIndex) {
        let (pos, _) = self
            .betas
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite growth rates"))
            .expect("at least one mode");
        (pos, self.modes[pos])
    }

    /// Position and index of the critical mode `(plus, m0, 1)` from the
    /// critical curve of this box. Above the exchange-of-stabilities
    /// margin other modes can grow faster transiently, but the attracting
    /// states stay organised around this one.
    pub fn critical_mode(&self) -> Result<(usize, ModeIndex)> {
        let cp = crate::stability::critical_point(self.length)?;
        let idx = ModeIndex::plus(cp.m0, 1);
        let pos = self.index_of(idx).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "critical mode {idx} lies outside the truncation ({}, {})",
                self.truncation.max_m, self.truncation.max_n
            ))
        })?;
        Ok((pos, idx))
    }

    pub fn max_abs_beta(&self) -> f64 {
        self.betas.iter().fold(0.0f64, |acc, b| acc.max(b.abs()))
    }

    pub fn default_dt(&self, scheme: Scheme) -> f64 {
        match scheme {
            Scheme::ImexExp => 5.0 / self.max_abs_beta(),
            Scheme::Rk4 => 0.1 / self.max_abs_beta(),
        }
    }

    /// A copy with the quadratic interactions removed; pure modal
    /// diffusion/growth.
    pub fn linearized(&self) -> Self {
        let mut out = self.clone();
        out.tensor = InteractionTensor::empty(self.truncation, self.length);
        out
    }

    /// Quadratic part `N_l = -sum y_j y_k T(j, k -> l)`.
    pub fn nonlinear(&self, y: &[f64], out: &mut [f64]) {
        for (l, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for e in self.tensor.entries_for_target(l) {
                acc += y[e.advector as usize] * y[e.advected as usize] * e.value;
            }
            *slot = -acc;
        }
    }

    /// Full right-hand side `beta_l y_l + N_l`.
    pub fn rhs(&self, y: &[f64], out: &mut [f64]) {
        self.nonlinear(y, out);
        for (l, slot) in out.iter_mut().enumerate() {
            *slot += self.betas[l] * y[l];
        }
    }

    /// Exact energy production rate `sum beta_l y_l^2`; the quadratic term
    /// contributes nothing.
    pub fn energy_rate(&self, y: &[f64]) -> f64 {
        y.iter()
            .zip(&self.betas)
            .map(|(v, b)| b * v * v)
            .sum()
    }

    pub fn field_from(&self, y: &[f64]) -> SpectralField {
        let mut f = SpectralField::zero(self.truncation);
        for (i, v) in y.iter().enumerate() {
            if *v != 0.0 {
                f.set(self.modes[i], *v).expect("mode within truncation");
            }
        }
        f
    }

    pub fn coeffs_from(&self, field: &SpectralField) -> Result<Vec<f64>> {
        if field.truncation() != self.truncation {
            return Err(Error::InvalidArgument(
                "initial field truncation does not match the system".into(),
            ));
        }
        let mut y = vec![0.0; self.modes.len()];
        for (idx, v) in field.iter() {
            y[self.positions[&idx]] = v;
        }
        Ok(y)
    }
}

/// Time series of one integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    truncation: Truncation,
    modes: Vec<ModeIndex>,
    pub times: Vec<f64>,
    /// One coefficient row per sample, in canonical mode order.
    pub states: Vec<Vec<f64>>,
    /// `|y|^2 / 2` per sample.
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn final_state(&self) -> SpectralField {
        let mut f = SpectralField::zero(self.truncation);
        if let Some(last) = self.states.last() {
            for (i, v) in last.iter().enumerate() {
                if *v != 0.0 {
                    f.set(self.modes[i], *v).expect("mode within truncation");
                }
            }
        }
        f
    }

    /// CSV export: header `t,energy,y[...]...`, one row per sample,
    /// 17-significant-digit floats, columns in canonical mode order.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let mut header = String::from("t,energy");
        for m in &self.modes {
            header.push_str(&format!(",y[{m}]"));
        }
        writeln!(out, "{header}").map_err(|e| Error::io(path, e))?;
        for (i, t) in self.times.iter().enumerate() {
            let mut row = format!("{:.16e},{:.16e}", t, self.energies[i]);
            for v in &self.states[i] {
                row.push_str(&format!(",{v:.16e}"));
            }
            writeln!(out, "{row}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

struct Stepper<'a> {
    system: &'a GalerkinSystem,
    dt: f64,
    scheme: Scheme,
    exp_factor: Vec<f64>,
    phi_dt: Vec<f64>,
    scratch: [Vec<f64>; 4],
}

impl<'a> Stepper<'a> {
    fn new(system: &'a GalerkinSystem, dt: f64, scheme: Scheme) -> Self {
        let n = system.modes.len();
        let exp_factor = system.betas.iter().map(|b| (b * dt).exp()).collect();
        let phi_dt = system
            .betas
            .iter()
            .map(|b| {
                let x = b * dt;
                if x == 0.0 {
                    dt
                } else {
                    x.exp_m1() / b
                }
            })
            .collect();
        Self {
            system,
            dt,
            scheme,
            exp_factor,
            phi_dt,
            scratch: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }

    fn step(&mut self, y: &mut [f64]) {
        match self.scheme {
            Scheme::ImexExp => {
                let nl = &mut self.scratch[0];
                self.system.nonlinear(y, nl);
                for i in 0..y.len() {
                    y[i] = self.exp_factor[i] * y[i] + self.phi_dt[i] * nl[i];
                }
            }
            Scheme::Rk4 => {
                let n = y.len();
                let mut probe = vec![0.0; n];
                let [k1, k2, k3, k4] = &mut self.scratch;
                self.system.rhs(y, k1);
                for i in 0..n {
                    probe[i] = y[i] + 0.5 * self.dt * k1[i];
                }
                self.system.rhs(&probe, k2);
                for i in 0..n {
                    probe[i] = y[i] + 0.5 * self.dt * k2[i];
                }
                self.system.rhs(&probe, k3);
                for i in 0..n {
                    probe[i] = y[i] + self.dt * k3[i];
                }
                self.system.rhs(&probe, k4);
                for i in 0..n {
                    y[i] += self.dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
    }
}

fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Integrates from `initial` over `[0, t_end]`, recording up to ~2000
/// evenly strided samples (always including both endpoints).
///
/// Deterministic given `(initial, config)`. Errors with the blow-up guard
/// when the norm passes 1e6.
pub fn integrate(
    system: &GalerkinSystem,
    initial: &SpectralField,
    config: &SimulationConfig,
) -> Result<Trajectory> {
    let mut y = system.coeffs_from(initial)?;
    let (dt, n_steps) = resolve_steps(system, config)?;
    let stride = (n_steps / 2000).max(1);
    let mut stepper = Stepper::new(system, dt, config.scheme);

    let mut traj = Trajectory {
        truncation: system.truncation,
        modes: system.modes.clone(),
        times: Vec::new(),
        states: Vec::new(),
        energies: Vec::new(),
    };
    let record = |traj: &mut Trajectory, t: f64, y: &[f64]| {
        traj.times.push(t);
        traj.states.push(y.to_vec());
        traj.energies.push(0.5 * y.iter().map(|v| v * v).sum::<f64>());
    };
    record(&mut traj, 0.0, &y);
    for step in 1..=n_steps {
        stepper.step(&mut y);
        let t = step as f64 * dt;
        let n = norm(&y);
        if !n.is_finite() || n > BLOWUP_NORM {
            return Err(Error::BlowUp { t, norm: n });
        }
        if step % stride == 0 || step == n_steps {
            record(&mut traj, t, &y);
        }
    }
    Ok(traj)
}

fn resolve_steps(system: &GalerkinSystem, config: &SimulationConfig) -> Result<(f64, usize)> {
    if config.t_end.is_nan() || config.t_end <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "t_end must be positive, got {}",
            config.t_end
        )));
    }
    let requested = config.dt.unwrap_or_else(|| system.default_dt(config.scheme));
    if requested.is_nan() || requested <= 0.0 {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {requested}")));
    }
    let n_steps = (config.t_end / requested).ceil().max(1.0) as usize;
    Ok((config.t_end / n_steps as f64, n_steps))
}

/// Endpoint of a steady-state search.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub state: SpectralField,
    pub converged: bool,
    /// Norm of the algebraic steady residual `beta y + N(y)` at the
    /// returned state.
    pub residual: f64,
    pub t_reached: f64,
}

/// Integrates until `|dy/dt| < steady_tol |y|`, the state decays to rest,
/// or the horizon runs out (converged = false then).
pub fn steady_state(
    system: &GalerkinSystem,
    initial: &SpectralField,
    config: &SimulationConfig,
) -> Result<SteadyState> {
    let mut y = system.coeffs_from(initial)?;
    let (dt, n_steps) = resolve_steps(system, config)?;
    let mut stepper = Stepper::new(system, dt, config.scheme);
    let mut rhs = vec![0.0; y.len()];
    let mut t = 0.0;
    let mut converged = false;
    for step in 0..=n_steps {
        system.rhs(&y, &mut rhs);
        let y_norm = norm(&y);
        let r_norm = norm(&rhs);
        if r_norm < config.steady_tol * y_norm || y_norm < REST_NORM_TOL {
            converged = true;
            break;
        }
        if step == n_steps {
            break;
        }
        stepper.step(&mut y);
        t = (step + 1) as f64 * dt;
        let n = norm(&y);
        if !n.is_finite() || n > BLOWUP_NORM {
            return Err(Error::BlowUp { t, norm: n });
        }
    }
    system.rhs(&y, &mut rhs);
    Ok(SteadyState {
        state: system.field_from(&y),
        converged,
        residual: norm(&rhs),
        t_reached: t,
    })
}

/// Outcome class of one basin run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasinClass {
    /// Positive critical-mode coordinate.
    Plus,
    /// Negative critical-mode coordinate.
    Minus,
    /// Did not converge, or landed indistinguishably close to the origin.
    Unresolved,
}

#[derive(Debug, Clone)]
pub struct BasinRun {
    pub seed: u64,
    pub converged: bool,
    pub critical_coordinate: f64,
    pub class: BasinClass,
}

/// Classification report over the random-seed ensemble.
#[derive(Debug, Clone)]
pub struct BasinReport {
    pub critical_mode: ModeIndex,
    pub runs: Vec<BasinRun>,
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_unresolved: usize,
}

/// Runs `n_seeds` steady-state searches from random initial fields of norm
/// `initial_norm` (seeds `config.seed + i`), classifying each endpoint by
/// the sign of its coordinate on the critical mode. Seeds run
/// independently (in parallel under [`ExecMode::Parallel`]) and merge in
/// seed order.
pub fn basin_experiment(
    system: &GalerkinSystem,
    n_seeds: usize,
    initial_norm: f64,
    config: &SimulationConfig,
    mode: ExecMode,
) -> Result<BasinReport> {
    let (crit_pos, crit_index) = system.critical_mode()?;
    let outcomes: Vec<Result<BasinRun>> = map_indexed(mode, n_seeds, |i| {
        let seed = config.seed.wrapping_add(i as u64);
        let initial = random_field(system.truncation, seed, initial_norm);
        let end = steady_state(system, &initial, config)?;
        let y = system.coeffs_from(&end.state)?;
        let yc = y[crit_pos];
        let band = 1e-6 * norm(&y).max(1.0);
        let class = if !end.converged {
            BasinClass::Unresolved
        } else if yc > band {
            BasinClass::Plus
        } else if yc < -band {
            BasinClass::Minus
        } else {
            BasinClass::Unresolved
        };
        Ok(BasinRun {
            seed,
            converged: end.converged,
            critical_coordinate: yc,
            class,
        })
    });
    let mut runs = Vec::with_capacity(n_seeds);
    for o in outcomes {
        runs.push(o?);
    }
    let count = |c: BasinClass| runs.iter().filter(|r| r.class == c).count();
    Ok(BasinReport {
        critical_mode: crit_index,
        n_plus: count(BasinClass::Plus),
        n_minus: count(BasinClass::Minus),
        n_unresolved: count(BasinClass::Unresolved),
        runs,
    })
}

/// Seeded random field with coefficients decaying like `1 / (m^2 + n^2)`,
/// scaled to the requested norm.
pub fn random_field(truncation: Truncation, seed: u64, target_norm: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = SpectralField::zero(truncation);
    for idx in truncation.modes() {
        let decay = 1.0 / (idx.m * idx.m + idx.n * idx.n) as f64;
        field
            .set(idx, decay * rng.gen_range(-1.0..1.0))
            .expect("canonical mode");
    }
    let n = field.norm();
    if n > 0.0 && target_norm > 0.0 {
        field.scaled(target_norm / n)
    } else {
        SpectralField::zero(truncation)
    }
}
