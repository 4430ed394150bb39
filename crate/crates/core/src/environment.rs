//! Deterministic point-mass locomotion tasks.
//!
//! The agent is a unicycle: it turns by `action[0] * max_turn_rate * dt` and
//! moves forward `max(0, action[1]) * max_speed * dt` per step. Three task
//! variants share these dynamics:
//!
//! * `Normal`: walk as far as possible along +x.
//! * `Directional`: one of 8 goal directions (multiples of 45 degrees) is
//!   drawn per episode and given to the policy as a unit vector; fitness is
//!   the final displacement projected onto the goal.
//! * `Deceptive`: a U-shaped trap open toward -x sits in front of the start.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{Mlp, PolicySpec};
use crate::seeds;
use crate::types::BehaviorDescriptor;

pub const BASE_OBS_DIM: usize = 4;
pub const ACTION_DIM: usize = 2;
pub const BC_DIM: usize = 2;
pub const GOAL_DIRECTIONS: usize = 8;

/// Observations scale positions down by this factor.
const POSITION_SCALE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Normal,
    Directional,
    Deceptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessDef {
    FinalX,
    NetXDisplacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapGeometry {
    pub front_wall_x: f64,
    pub side_wall_y: f64,
    pub side_wall_length: f64,
    pub wall_thickness: f64,
}

impl Default for TrapGeometry {
    fn default() -> Self {
        Self { front_wall_x: 4.0, side_wall_y: 2.0, side_wall_length: 4.0, wall_thickness: 0.2 }
    }
}

/// Axis-aligned rectangle; its interior `(x0, x1) x (y0, y1)` is solid, the faces are not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x > self.x0 && x < self.x1 && y > self.y0 && y < self.y1
    }

    /// Whether the horizontal segment from `(xa, y)` to `(xb, y)` enters the interior.
    fn hits_horizontal(&self, xa: f64, xb: f64, y: f64) -> bool {
        y > self.y0 && y < self.y1 && xa.max(xb) > self.x0 && xa.min(xb) < self.x1
    }

    fn hits_vertical(&self, x: f64, ya: f64, yb: f64) -> bool {
        x > self.x0 && x < self.x1 && ya.max(yb) > self.y0 && ya.min(yb) < self.y1
    }
}

impl TrapGeometry {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.front_wall_x, self.side_wall_y, self.side_wall_length, self.wall_thickness]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !all_positive {
            return Err(Error::Config("environment.trap: all dimensions must be positive".into()));
        }
        if self.walls().iter().any(|w| w.contains(0.0, 0.0)) {
            return Err(Error::Config("environment.trap: the start position lies inside a wall".into()));
        }
        Ok(())
    }

    /// Wall rectangles inflated by half the wall thickness: front, upper side, lower side.
    pub fn walls(&self) -> [Rect; 3] {
        let h = self.wall_thickness / 2.0;
        let fx = self.front_wall_x;
        let sy = self.side_wall_y;
        let back = fx - self.side_wall_length;
        [
            Rect { x0: fx - h, x1: fx + h, y0: -sy - h, y1: sy + h },
            Rect { x0: back - h, x1: fx + h, y0: sy - h, y1: sy + h },
            Rect { x0: back - h, x1: fx + h, y0: -sy - h, y1: -sy + h },
        ]
    }

    /// Endpoints of the wall center lines, for plotting.
    pub fn wall_segments(&self) -> [((f64, f64), (f64, f64)); 3] {
        let fx = self.front_wall_x;
        let sy = self.side_wall_y;
        let back = fx - self.side_wall_length;
        [((fx, -sy), (fx, sy)), ((back, sy), (fx, sy)), ((back, -sy), (fx, -sy))]
    }
}

fn default_max_steps() -> u64 {
    200
}
fn default_dt() -> f64 {
    0.1
}
fn default_max_speed() -> f64 {
    1.0
}
fn default_max_turn_rate() -> f64 {
    FRAC_PI_2
}
fn default_fitness_def() -> FitnessDef {
    FitnessDef::FinalX
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub variant: Variant,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_max_speed")]
    pub max_speed: f64,
    #[serde(default = "default_max_turn_rate")]
    pub max_turn_rate: f64,
    #[serde(default)]
    pub trap: Option<TrapGeometry>,
    #[serde(default = "default_fitness_def")]
    pub fitness_def: FitnessDef,
}

impl EnvironmentSpec {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            max_steps: default_max_steps(),
            dt: default_dt(),
            max_speed: default_max_speed(),
            max_turn_rate: default_max_turn_rate(),
            trap: (variant == Variant::Deceptive).then(TrapGeometry::default),
            fitness_def: default_fitness_def(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::Config("environment.max_steps must be positive".into()));
        }
        for (name, v) in [("dt", self.dt), ("max_speed", self.max_speed), ("max_turn_rate", self.max_turn_rate)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("environment.{name} must be positive")));
            }
        }
        match (self.variant, &self.trap) {
            (Variant::Deceptive, Some(t)) => t.validate(),
            (Variant::Deceptive, None) => {
                Err(Error::Config("environment.trap is required for the deceptive variant".into()))
            }
            (_, Some(_)) => {
                Err(Error::Config("environment.trap is only allowed for the deceptive variant".into()))
            }
            (_, None) => Ok(()),
        }
    }

    pub fn obs_dim(&self) -> usize {
        match self.variant {
            Variant::Directional => BASE_OBS_DIM + 2,
            _ => BASE_OBS_DIM,
        }
    }

    /// Upper bound on the distance one episode can cover.
    pub fn max_distance(&self) -> f64 {
        self.max_speed * self.dt * self.max_steps as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AgentState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

/// Unit vector of goal direction `k` (`k * 45` degrees).
pub fn goal_vector(k: usize) -> (f64, f64) {
    let angle = (k % GOAL_DIRECTIONS) as f64 * std::f64::consts::FRAC_PI_4;
    (angle.cos(), angle.sin())
}

/// Goal direction drawn from an episode seed; uniform over the 8 directions.
pub fn goal_index(episode_seed: u64) -> usize {
    (seeds::mix(episode_seed ^ seeds::GOAL_TAG) % GOAL_DIRECTIONS as u64) as usize
}

pub fn make_observation(state: &AgentState, spec: &EnvironmentSpec, goal: Option<(f64, f64)>) -> Vec<f64> {
    let mut obs = Vec::with_capacity(spec.obs_dim());
    write_observation(state, spec.variant, goal, &mut obs);
    obs
}

fn write_observation(state: &AgentState, variant: Variant, goal: Option<(f64, f64)>, obs: &mut Vec<f64>) {
    obs.clear();
    obs.extend([
        state.x / POSITION_SCALE,
        state.y / POSITION_SCALE,
        state.heading.cos(),
        state.heading.sin(),
    ]);
    if variant == Variant::Directional {
        let (gx, gy) = goal.unwrap_or((1.0, 0.0));
        obs.extend([gx, gy]);
    }
}

/// Per-axis block-and-slide collision against the trap walls.
///
/// The x component is applied first and dropped if the swept segment touches
/// a wall; then the y component is applied from the resulting point under
/// the same rule.
pub fn resolve_walls(pos: (f64, f64), delta: (f64, f64), trap: &TrapGeometry) -> (f64, f64) {
    let walls = trap.walls();
    let (x, y) = pos;
    let mut dx = delta.0;
    if dx != 0.0 && walls.iter().any(|w| w.hits_horizontal(x, x + dx, y)) {
        dx = 0.0;
    }
    let nx = x + dx;
    let mut dy = delta.1;
    if dy != 0.0 && walls.iter().any(|w| w.hits_vertical(nx, y, y + dy)) {
        dy = 0.0;
    }
    (dx, dy)
}

pub fn step_dynamics(state: &AgentState, action: [f64; 2], spec: &EnvironmentSpec) -> AgentState {
    let turn = action[0].clamp(-1.0, 1.0);
    let throttle = action[1].clamp(-1.0, 1.0);
    let heading = state.heading + turn * spec.max_turn_rate * spec.dt;
    let speed = throttle.max(0.0) * spec.max_speed;
    let mut delta = (speed * spec.dt * heading.cos(), speed * spec.dt * heading.sin());
    if let Some(trap) = spec.trap.as_ref().filter(|_| spec.variant == Variant::Deceptive) {
        delta = resolve_walls((state.x, state.y), delta, trap);
    }
    AgentState { x: state.x + delta.0, y: state.y + delta.1, heading }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub fitness: f64,
    pub behavior: BehaviorDescriptor,
    pub steps_taken: u64,
    pub goal: Option<usize>,
    /// Start state followed by the state after every step, when recorded.
    pub trajectory: Option<Vec<AgentState>>,
}

fn check_dims(spec: &EnvironmentSpec, policy: &PolicySpec) -> Result<()> {
    if policy.obs_dim != spec.obs_dim() {
        return Err(Error::DimensionMismatch { expected: spec.obs_dim(), actual: policy.obs_dim });
    }
    if policy.action_dim != ACTION_DIM {
        return Err(Error::DimensionMismatch { expected: ACTION_DIM, actual: policy.action_dim });
    }
    Ok(())
}

/// Runs one episode. For `Directional`, the goal is drawn from `episode_seed`;
/// the other variants ignore the seed.
pub fn run_episode(
    params: &[f64],
    spec: &EnvironmentSpec,
    policy: &PolicySpec,
    episode_seed: u64,
) -> Result<EpisodeResult> {
    let goal = (spec.variant == Variant::Directional).then(|| goal_index(episode_seed));
    simulate(params, spec, policy, goal, false)
}

/// Runs one episode with an explicit goal direction (ignored outside `Directional`).
pub fn simulate(
    params: &[f64],
    spec: &EnvironmentSpec,
    policy: &PolicySpec,
    goal: Option<usize>,
    record_trajectory: bool,
) -> Result<EpisodeResult> {
    check_dims(spec, policy)?;
    let goal = if spec.variant == Variant::Directional { Some(goal.unwrap_or(0)) } else { None };
    let goal_vec = goal.map(goal_vector);
    let mut mlp = Mlp::new(policy, params)?;
    let mut state = AgentState::default();
    let start = state;
    let mut obs = Vec::with_capacity(spec.obs_dim());
    let mut action = [0.0; ACTION_DIM];
    let mut trajectory = record_trajectory.then(|| {
        let mut t = Vec::with_capacity(spec.max_steps as usize + 1);
        t.push(state);
        t
    });
    for _ in 0..spec.max_steps {
        write_observation(&state, spec.variant, goal_vec, &mut obs);
        mlp.forward_into(&obs, &mut action)?;
        state = step_dynamics(&state, action, spec);
        if let Some(t) = trajectory.as_mut() {
            t.push(state);
        }
    }
    let fitness = match (goal_vec, spec.fitness_def) {
        (Some((gx, gy)), _) => (state.x - start.x) * gx + (state.y - start.y) * gy,
        (None, FitnessDef::FinalX) => state.x,
        (None, FitnessDef::NetXDisplacement) => state.x - start.x,
    };
    Ok(EpisodeResult {
        fitness,
        behavior: BehaviorDescriptor::xy(state.x, state.y)?,
        steps_taken: spec.max_steps,
        goal,
        trajectory,
    })
}

/// Writes `step,x,y,heading` rows.
pub fn write_trajectory_csv<W: std::io::Write>(trajectory: &[AgentState], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "x", "y", "heading"])?;
    for (i, s) in trajectory.iter().enumerate() {
        w.write_record([i.to_string(), s.x.to_string(), s.y.to_string(), s.heading.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Single-layer policy whose output is `tanh(bias)` regardless of input.
    fn constant_policy(spec: &EnvironmentSpec, turn: f64, throttle: f64) -> (PolicySpec, Vec<f64>) {
        let p = PolicySpec::new(spec.obs_dim(), vec![], ACTION_DIM);
        let mut params = vec![0.0; p.param_count()];
        let n = params.len();
        params[n - 2] = turn.atanh();
        params[n - 1] = throttle;
        (p, params)
    }

    /// Saturated forward command.
    fn forward_policy(spec: &EnvironmentSpec) -> (PolicySpec, Vec<f64>) {
        constant_policy(spec, 0.0, 50.0)
    }

    #[test]
    fn observations() {
        let normal = EnvironmentSpec::new(Variant::Normal);
        assert_eq!(make_observation(&AgentState::default(), &normal, None), vec![0.0, 0.0, 1.0, 0.0]);
        let dir = EnvironmentSpec::new(Variant::Directional);
        let obs = make_observation(&AgentState::default(), &dir, Some(goal_vector(2)));
        assert_eq!(obs.len(), normal.obs_dim() + 2);
        assert!(obs[4].abs() < 1e-15 && (obs[5] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dynamics() {
        let spec = EnvironmentSpec::new(Variant::Normal);
        let s0 = AgentState::default();
        assert_eq!(step_dynamics(&s0, [0.0, 0.0], &spec), s0);
        let turned = step_dynamics(&s0, [1.0, 0.0], &spec);
        assert_eq!((turned.x, turned.y), (0.0, 0.0));
        assert!((turned.heading - FRAC_PI_2 * 0.1).abs() < 1e-15);
        // Negative throttle does not move backward; actions are clamped.
        assert_eq!(step_dynamics(&s0, [0.0, -1.0], &spec), s0);
        let fast = step_dynamics(&s0, [0.0, 7.0], &spec);
        assert!((fast.x - 0.1).abs() < 1e-15);

        let mut s = s0;
        for _ in 0..200 {
            s = step_dynamics(&s, [0.0, 1.0], &spec);
        }
        assert!((s.x - 20.0).abs() < 1e-9 && s.y == 0.0);
    }

    #[test]
    fn walls_block_head_on() {
        let trap = TrapGeometry::default();
        let (dx, dy) = resolve_walls((3.9, 0.0), (0.2, 0.0), &trap);
        assert_eq!((dx, dy), (0.0, 0.0));
        let (dx, dy) = resolve_walls((3.9, 0.0), (0.05, 0.1), &trap);
        assert_eq!(dx, 0.0);
        assert_eq!(dy, 0.1);
        assert_eq!(resolve_walls((-5.0, 7.0), (0.1, -0.1), &trap), (0.1, -0.1));
    }

    #[test]
    fn walls_do_not_tunnel() {
        let trap = TrapGeometry { wall_thickness: 0.01, ..Default::default() };
        assert_eq!(resolve_walls((3.0, 0.0), (2.0, 0.0), &trap), (0.0, 0.0));
        assert_eq!(resolve_walls((2.0, 0.0), (0.0, 5.0), &trap), (0.0, 0.0));
    }

    #[test]
    fn zero_policy_stays_home() {
        let spec = EnvironmentSpec::new(Variant::Normal);
        let p = PolicySpec::new(4, vec![8], 2);
        let r = run_episode(&vec![0.0; p.param_count()], &spec, &p, 0).unwrap();
        assert_eq!(r.fitness, 0.0);
        assert_eq!(r.behavior.coords(), &[0.0, 0.0]);
    }

    #[test]
    fn forward_policy_fitness() {
        let spec = EnvironmentSpec::new(Variant::Normal);
        let (p, params) = forward_policy(&spec);
        let r = run_episode(&params, &spec, &p, 0).unwrap();
        assert!((r.fitness - 20.0).abs() < 1e-9);
        assert!(r.fitness <= spec.max_distance() + 1e-9);

        let deceptive = EnvironmentSpec::new(Variant::Deceptive);
        let r = simulate(&params, &deceptive, &p, None, true).unwrap();
        assert!(r.fitness < 4.0 && r.fitness > 3.5);
        let last = r.trajectory.as_ref().unwrap().last().unwrap();
        assert_eq!(r.behavior.coords(), &[last.x, last.y]);
    }

    #[test]
    fn directional_projection() {
        let spec = EnvironmentSpec::new(Variant::Directional);
        let (p, params) = forward_policy(&spec);
        let ahead = simulate(&params, &spec, &p, Some(0), false).unwrap();
        assert!((ahead.fitness - 20.0).abs() < 1e-9);
        let behind = simulate(&params, &spec, &p, Some(4), false).unwrap();
        assert!((behind.fitness + 20.0).abs() < 1e-9);
        let side = simulate(&params, &spec, &p, Some(2), false).unwrap();
        assert!(side.fitness.abs() < 1e-9);
    }

    #[test]
    fn spec_validation() {
        assert!(EnvironmentSpec::new(Variant::Deceptive).validate().is_ok());
        let mut s = EnvironmentSpec::new(Variant::Normal);
        s.trap = Some(TrapGeometry::default());
        assert!(s.validate().is_err());
        let mut s = EnvironmentSpec::new(Variant::Deceptive);
        s.trap = None;
        assert!(s.validate().is_err());
        let mut s = EnvironmentSpec::new(Variant::Deceptive);
        s.trap = Some(TrapGeometry { side_wall_length: 10.0, side_wall_y: 0.05, ..Default::default() });
        assert!(s.validate().is_err());
    }

    #[test]
    fn policy_dims_checked() {
        let spec = EnvironmentSpec::new(Variant::Directional);
        let p = PolicySpec::new(4, vec![], 2);
        assert!(matches!(
            run_episode(&vec![0.0; p.param_count()], &spec, &p, 0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trajectory_csv_rows() {
        let spec = EnvironmentSpec { max_steps: 3, ..EnvironmentSpec::new(Variant::Normal) };
        let (p, params) = constant_policy(&spec, 0.5, 50.0);
        let r = simulate(&params, &spec, &p, None, true).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(r.trajectory.as_ref().unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("step,x,y,heading\n0,0,0,0\n"));
    }
}
