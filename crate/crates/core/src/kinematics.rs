//! Agent state, the six motion primitives, the true transition with swept
//! collision checking, and dead-reckoning with truncated-Gaussian noise.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{normalize_deg, Point};
use crate::world::{is_traversable, Floorplan, WorldMode};

/// Translation per step in meters.
pub const STEP_LENGTH: f64 = 0.25;
/// Rotation per turn in degrees.
pub const TURN_ANGLE: f64 = 9.0;
/// Spacing of collision samples along a translation.
pub const SWEEP_SPACING: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("pose ({x:.3}, {y:.3}) is not in traversable space")]
    InvalidState { x: f64, y: f64 },
}

/// Planar pose. `theta` is in degrees, counterclockwise from +x, in `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_deg(theta),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn heading_rad(&self) -> f64 {
        self.theta.to_radians()
    }

    /// Applies an agent-frame displacement (`forward`, `left` in meters,
    /// `turn` in degrees). The translation uses the heading before the turn.
    pub fn compose(&self, forward: f64, left: f64, turn: f64) -> Pose {
        let (sin, cos) = self.heading_rad().sin_cos();
        Pose::new(
            self.x + forward * cos - left * sin,
            self.y + forward * sin + left * cos,
            self.theta + turn,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Forward,
    Backward,
    StrafeLeft,
    StrafeRight,
    TurnLeft,
    TurnRight,
}

impl Action {
    pub const ALL: [Action; 6] = [
        Action::Forward,
        Action::Backward,
        Action::StrafeLeft,
        Action::StrafeRight,
        Action::TurnLeft,
        Action::TurnRight,
    ];

    /// Nominal agent-frame displacement `(forward m, left m, turn deg)`.
    pub fn displacement(self) -> (f64, f64, f64) {
        match self {
            Action::Forward => (STEP_LENGTH, 0.0, 0.0),
            Action::Backward => (-STEP_LENGTH, 0.0, 0.0),
            Action::StrafeLeft => (0.0, STEP_LENGTH, 0.0),
            Action::StrafeRight => (0.0, -STEP_LENGTH, 0.0),
            Action::TurnLeft => (0.0, 0.0, TURN_ANGLE),
            Action::TurnRight => (0.0, 0.0, -TURN_ANGLE),
        }
    }

    pub fn is_turn(self) -> bool {
        matches!(self, Action::TurnLeft | Action::TurnRight)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Standard deviation as a fraction of the step size.
    pub eta: f64,
    pub rng_seed: u64,
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self {
            eta: 0.0,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub true_pose: Pose,
    pub est_pose: Pose,
    pub bump: bool,
}

/// Executes `action` from `pose` in the world. Turns always succeed; a
/// translation is applied only if every sample point along the swept segment
/// (every 5 cm, plus the endpoint) is traversable. Returns the new pose and
/// the bump flag.
pub fn transition_true(
    plan: &Floorplan,
    mode: WorldMode,
    pose: Pose,
    action: Action,
) -> Result<(Pose, bool), KinematicsError> {
    if !is_traversable(plan, mode, pose.position()) {
        return Err(KinematicsError::InvalidState {
            x: pose.x,
            y: pose.y,
        });
    }
    let (forward, left, turn) = action.displacement();
    if action.is_turn() {
        return Ok((pose.compose(0.0, 0.0, turn), false));
    }
    let samples = (STEP_LENGTH / SWEEP_SPACING).round() as usize;
    for k in 1..=samples {
        let f = k as f64 / samples as f64;
        let p = pose.compose(forward * f, left * f, 0.0);
        if !is_traversable(plan, mode, p.position()) {
            return Ok((pose, true));
        }
    }
    Ok((pose.compose(forward, left, 0.0), false))
}

/// Draws from a zero-mean Gaussian with standard deviation `eta`, truncated
/// to `[-eta, eta]`, by rejection.
pub fn truncated_gaussian<R: Rng + ?Sized>(eta: f64, rng: &mut R) -> f64 {
    if eta <= 0.0 {
        return 0.0;
    }
    let normal = Normal::new(0.0, eta).expect("eta is finite and positive");
    loop {
        let v = normal.sample(rng);
        if v.abs() <= eta {
            return v;
        }
    }
}

/// Dead-reckoning update from the previous estimate and the executed action.
///
/// A bumped translation contributes no nominal motion. Every step, including
/// turns, then receives an agent-frame perturbation of
/// `(δ_long · 0.25 m, δ_lat · 0.25 m, δ_θ · 9°)` with each δ drawn from the
/// truncated Gaussian. With `eta == 0` no randomness is consumed.
pub fn transition_estimated<R: Rng + ?Sized>(
    est: Pose,
    action: Action,
    bump: bool,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Pose {
    let (mut forward, mut left, turn) = action.displacement();
    if bump {
        forward = 0.0;
        left = 0.0;
    }
    if noise.eta > 0.0 {
        forward += truncated_gaussian(noise.eta, rng) * STEP_LENGTH;
        left += truncated_gaussian(noise.eta, rng) * STEP_LENGTH;
        let dtheta = truncated_gaussian(noise.eta, rng) * TURN_ANGLE;
        est.compose(forward, left, turn + dtheta)
    } else {
        est.compose(forward, left, turn)
    }
}

/// Convenience wrapper producing both poses for one step.
pub fn step<R: Rng + ?Sized>(
    plan: &Floorplan,
    mode: WorldMode,
    true_pose: Pose,
    est_pose: Pose,
    action: Action,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<StepOutcome, KinematicsError> {
    let (true_pose, bump) = transition_true(plan, mode, true_pose, action)?;
    let est_pose = transition_estimated(est_pose, action, bump, noise, rng);
    Ok(StepOutcome {
        true_pose,
        est_pose,
        bump,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::CellKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Closed room `w × h` cells with walls on the border.
    fn room(w: usize, h: usize) -> Floorplan {
        let mut cells = vec![CellKind::Wall; w * h];
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                cells[y * w + x] = CellKind::Free;
            }
        }
        Floorplan::new("room", w, h, 0.05, cells).unwrap()
    }

    #[test]
    fn forward_in_open_space() {
        let plan = room(60, 20);
        let pose = Pose::new(0.5, 0.5, 0.0);
        let (next, bump) =
            transition_true(&plan, WorldMode::MATCHED, pose, Action::Forward).unwrap();
        assert!(!bump);
        assert!((next.x - 0.75).abs() < 1e-12);
        assert_eq!(next.y, 0.5);
    }

    #[test]
    fn wall_ahead_blocks_translation() {
        // wall cells start at x = 0.95 (column 19 of a 20-wide room)
        let plan = room(20, 20);
        let pose = Pose::new(0.85, 0.5, 0.0);
        let (next, bump) =
            transition_true(&plan, WorldMode::MATCHED, pose, Action::Forward).unwrap();
        assert!(bump);
        assert_eq!(next, pose);
        // swept-segment oracle: a point just past 0.10 m ahead is already inside the wall
        assert!(!is_traversable(
            &plan,
            WorldMode::MATCHED,
            Point::new(0.951, 0.5)
        ));
    }

    #[test]
    fn turns_wrap_and_never_bump() {
        let plan = room(20, 20);
        let pose = Pose::new(0.5, 0.5, 355.0);
        let (next, bump) =
            transition_true(&plan, WorldMode::MATCHED, pose, Action::TurnLeft).unwrap();
        assert!(!bump);
        assert_eq!(next.theta, 4.0);
        let (next, _) = transition_true(
            &plan,
            WorldMode::MATCHED,
            Pose::new(0.5, 0.5, 3.0),
            Action::TurnRight,
        )
        .unwrap();
        assert_eq!(next.theta, 354.0);
    }

    #[test]
    fn invalid_state_inside_wall() {
        let plan = room(20, 20);
        let err = transition_true(
            &plan,
            WorldMode::MATCHED,
            Pose::new(0.01, 0.01, 0.0),
            Action::TurnLeft,
        );
        assert!(matches!(err, Err(KinematicsError::InvalidState { .. })));
    }

    #[test]
    fn strafes_move_sideways() {
        let plan = room(40, 40);
        let pose = Pose::new(1.0, 1.0, 90.0);
        let (next, _) =
            transition_true(&plan, WorldMode::MATCHED, pose, Action::StrafeLeft).unwrap();
        assert!((next.x - 0.75).abs() < 1e-12 && (next.y - 1.0).abs() < 1e-12);
        let (next, _) = transition_true(&plan, WorldMode::MATCHED, pose, Action::Backward).unwrap();
        assert!((next.y - 0.75).abs() < 1e-12);
    }

    #[test]
    fn noiseless_estimate_is_nominal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let est = Pose::new(1.0, 2.0, 30.0);
        let next = transition_estimated(
            est,
            Action::Forward,
            false,
            &NoiseConfig::noiseless(),
            &mut rng,
        );
        assert!((next.x - (1.0 + 0.25 * 30f64.to_radians().cos())).abs() < 1e-15);
        assert!((next.y - (2.0 + 0.25 * 30f64.to_radians().sin())).abs() < 1e-15);
        let bumped = transition_estimated(
            est,
            Action::Forward,
            true,
            &NoiseConfig::noiseless(),
            &mut rng,
        );
        assert_eq!(bumped, est);
    }

    #[test]
    fn perturbation_bounded_by_eta_times_step() {
        let noise = NoiseConfig {
            eta: 0.04,
            rng_seed: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let est = Pose::new(0.0, 0.0, 0.0);
        for _ in 0..2000 {
            let next = transition_estimated(est, Action::TurnLeft, false, &noise, &mut rng);
            assert!(next.x.abs() <= 0.01 + 1e-15);
            assert!(next.y.abs() <= 0.01 + 1e-15);
            let dtheta = crate::geom::angle_diff_deg(next.theta, 9.0);
            assert!(dtheta.abs() <= 0.36 + 1e-9);
        }
    }

    #[test]
    fn truncated_gaussian_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| truncated_gaussian(1.0, &mut rng)).collect();
        assert!(draws.iter().all(|v| v.abs() <= 1.0));
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|v| v * v).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
        // variance of a standard normal truncated at ±1: 1 - 2φ(1)/(2Φ(1)-1) ≈ 0.29112
        assert!((var - 0.29112).abs() < 0.005, "var {var}");
    }
}
