//! Plant and observer marched together under boundary feedback.
//!
//! Per step, from the states `U^i`, `O^i`:
//!
//! 1. `kappa` from the observer (output feedback) or the plant (state feedback);
//! 2. outputs `Y_U = U^i(L)`, `Y_O = O^i(L)`;
//! 3. observer update with output injection `p1 (Y_U - Y_O)`;
//! 4. plant update;
//! 5. left entries set to `kappa`, right-boundary rule on both states.

use std::fmt;
use std::str::FromStr;

use crate::analysis::l2_norm;
use crate::error::{Error, Result};
use crate::fdm::{apply_right_boundary, build_operators, fixed_point_step, SchemeMode, SpaceTimeGrid};
use crate::kernels::GainVectors;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMode {
    /// `kappa = 0`, no observer.
    Uncontrolled,
    /// `kappa` computed from the plant state.
    StateFeedback,
    /// `kappa` computed from the observer state.
    OutputFeedback,
    /// `kappa = 0`, observer running alongside the free plant.
    ObserverOnly,
}

impl ControlMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ControlMode::Uncontrolled => "uncontrolled",
            ControlMode::StateFeedback => "state_feedback",
            ControlMode::OutputFeedback => "output_feedback",
            ControlMode::ObserverOnly => "observer_only",
        }
    }

    pub fn has_observer(self) -> bool {
        !matches!(self, ControlMode::Uncontrolled)
    }
}

impl FromStr for ControlMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uncontrolled" => Ok(ControlMode::Uncontrolled),
            "state_feedback" => Ok(ControlMode::StateFeedback),
            "output_feedback" => Ok(ControlMode::OutputFeedback),
            "observer_only" => Ok(ControlMode::ObserverOnly),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// Initial data: a named profile, optionally scaled, or samples at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `amplitude * sin(x)`.
    Sin(f64),
    Zero,
    Table(Vec<f64>),
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Sin(a) if *a == 1.0 => f.write_str("sin"),
            Profile::Sin(a) => write!(f, "{a:?}*sin"),
            Profile::Zero => f.write_str("zero"),
            Profile::Table(v) => {
                let parts: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                write!(f, "table:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    /// `sin`, `<amp>*sin`, `zero` or `table:v0,v1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("bad initial profile `{s}`"));
        if s == "sin" {
            return Ok(Profile::Sin(1.0));
        }
        if s == "zero" {
            return Ok(Profile::Zero);
        }
        if let Some(amp) = s.strip_suffix("*sin") {
            return amp.trim().parse().map(Profile::Sin).map_err(|_| bad());
        }
        if let Some(list) = s.strip_prefix("table:") {
            return list
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()
                .map(Profile::Table);
        }
        Err(bad())
    }
}

/// Samples of `spec` at the nodes of `grid`.
pub fn initial_profile(spec: &Profile, grid: &SpaceTimeGrid) -> Result<Vec<f64>> {
    match spec {
        Profile::Sin(a) => Ok(grid.nodes().iter().map(|x| a * x.sin()).collect()),
        Profile::Zero => Ok(vec![0.0; grid.nx + 1]),
        Profile::Table(v) if v.len() == grid.nx + 1 => Ok(v.clone()),
        Profile::Table(v) => Err(Error::Config(format!(
            "tabulated profile has {} samples, grid needs {}",
            v.len(),
            grid.nx + 1
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub length: f64,
    pub nx: usize,
    pub nt: usize,
    pub tfinal: f64,
    pub lambda: f64,
    pub mode: ControlMode,
    pub nonlinear: bool,
    pub niter: usize,
    pub scheme: SchemeMode,
    pub u0: Profile,
    pub uhat0: Profile,
    /// Kernel grid subdivisions.
    pub kernel_m: usize,
}

impl Default for SimConfig {
    /// The scenario of the reference experiment.
    fn default() -> Self {
        Self {
            length: 2.0 * std::f64::consts::PI,
            nx: 30,
            nt: 167,
            tfinal: 10.0,
            lambda: 2.0,
            mode: ControlMode::OutputFeedback,
            nonlinear: true,
            niter: 5,
            scheme: SchemeMode::ConsistentEuler,
            u0: Profile::Sin(1.0),
            uhat0: Profile::Zero,
            kernel_m: 30,
        }
    }
}

impl SimConfig {
    pub fn grid(&self) -> Result<SpaceTimeGrid> {
        SpaceTimeGrid::new(self.length, self.nx, self.tfinal, self.nt)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if self.niter == 0 {
            return Err(Error::Config("Niter must be at least 1".into()));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.kernel_m < crate::kernels::grid::MIN_SUBDIVISIONS {
            return Err(Error::Config(format!("kernel.M too small: {}", self.kernel_m)));
        }
        Ok(())
    }
}

/// Time series of one run. Row `i` of every series belongs to `times[i]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub dx: f64,
    pub plant: Vec<Vec<f64>>,
    /// Empty in uncontrolled mode.
    pub observer: Vec<Vec<f64>>,
    /// Feedback value computed from the state at `times[i]`.
    pub control: Vec<f64>,
    /// `u(t, L)`.
    pub output: Vec<f64>,
    /// `uhat(t, L)`.
    pub observer_output: Vec<f64>,
    pub norm_u: Vec<f64>,
    pub norm_uhat: Vec<f64>,
    pub norm_err: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn record(&mut self, t: f64, u: &[f64], o: Option<&[f64]>, kappa: f64) {
        let n = u.len();
        self.times.push(t);
        self.plant.push(u.to_vec());
        self.control.push(kappa);
        self.output.push(u[n - 1]);
        self.norm_u.push(l2_norm(u, self.dx));
        match o {
            Some(o) => {
                self.observer.push(o.to_vec());
                self.observer_output.push(o[n - 1]);
                self.norm_uhat.push(l2_norm(o, self.dx));
                let err: Vec<f64> = u.iter().zip(o).map(|(a, b)| a - b).collect();
                self.norm_err.push(l2_norm(&err, self.dx));
            }
            None => {
                self.observer_output.push(0.0);
                self.norm_uhat.push(0.0);
                self.norm_err.push(self.norm_u[self.norm_u.len() - 1]);
            }
        }
    }
}

/// Trapezoid rule for `int_0^L K(y) s(y) dy`.
pub fn feedback_kappa(gain: &[f64], state: &[f64], dx: f64) -> Result<f64> {
    if gain.len() != state.len() {
        return Err(Error::Usage(format!(
            "gain has {} samples, state has {}",
            gain.len(),
            state.len()
        )));
    }
    Ok(gain
        .windows(2)
        .zip(state.windows(2))
        .map(|(k, s)| 0.5 * dx * (k[1] * s[1] + k[0] * s[0]))
        .sum())
}

fn kappa_for(mode: ControlMode, gains: &GainVectors, u: &[f64], o: &[f64], dx: f64) -> Result<f64> {
    match mode {
        ControlMode::Uncontrolled | ControlMode::ObserverOnly => Ok(0.0),
        ControlMode::StateFeedback => feedback_kappa(&gains.k, u, dx),
        ControlMode::OutputFeedback => feedback_kappa(&gains.k, o, dx),
    }
}

pub fn run(config: &SimConfig, gains: &GainVectors) -> Result<Trajectory> {
    config.validate()?;
    let grid = config.grid()?;
    if gains.k.len() != grid.nx + 1 || gains.p1.len() != grid.nx + 1 {
        return Err(Error::Usage(format!(
            "gains sampled on {} nodes, simulation grid has {}",
            gains.k.len(),
            grid.nx + 1
        )));
    }
    let ops = build_operators(grid, config.scheme)?;
    let dx = grid.dx();
    let times = grid.times();
    let observed = config.mode.has_observer();

    // The literal scheme adds P (Y_U - Y_O) unscaled; the consistent one moves
    // +p1 (y - uhat(L)) of the observer equation to the right-hand side.
    let injection_factor = match config.scheme {
        SchemeMode::PaperLiteral => 1.0,
        SchemeMode::ConsistentEuler => -grid.dt(),
    };

    let mut u = initial_profile(&config.u0, &grid)?;
    let mut o = initial_profile(&config.uhat0, &grid)?;
    let mut traj = Trajectory {
        dx,
        ..Trajectory::default()
    };
    let no_injection = vec![0.0; grid.nx + 1];

    for (i, &t) in times.iter().enumerate() {
        let kappa = kappa_for(config.mode, gains, &u, &o, dx)?;
        traj.record(t, &u, observed.then_some(&o[..]), kappa);
        if i == grid.nt {
            break;
        }

        let blowup = |traj: &Trajectory, iterate| Error::BlowUp {
            step: i + 1,
            time: times[i + 1],
            iterate,
            partial: Box::new(traj.clone()),
        };
        let lift = |r: Result<Vec<f64>>, traj: &Trajectory| match r {
            Ok(v) if v.iter().all(|x| x.is_finite()) => Ok(v),
            Ok(_) => Err(blowup(traj, 0)),
            Err(Error::Diverged { iterate }) => Err(blowup(traj, iterate)),
            Err(e) => Err(e),
        };

        let mut o_next = if observed {
            let mismatch = u[grid.nx] - o[grid.nx];
            let injection: Vec<f64> = gains.p1.iter().map(|p| injection_factor * p * mismatch).collect();
            let step = fixed_point_step(&ops, &o, &injection, kappa, config.niter, config.nonlinear);
            lift(step, &traj)?
        } else {
            o.clone()
        };
        let step = fixed_point_step(&ops, &u, &no_injection, kappa, config.niter, config.nonlinear);
        let mut u_next = lift(step, &traj)?;

        u_next[0] = kappa;
        apply_right_boundary(&mut u_next);
        if observed {
            o_next[0] = kappa;
            apply_right_boundary(&mut o_next);
        }
        u = u_next;
        o = o_next;
    }
    Ok(traj)
}
