//! Exploration policies behind one interface: an [`Observation`] in, an
//! [`Action`] out.

mod frontier;

use std::cell::OnceCell;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::kinematics::{Action, Pose};
use crate::mapping::{ego_crops, EgoCrops, OccupancyGrid};
use crate::sensor::DepthScan;
use crate::world::Floorplan;

pub use frontier::{
    frontier_points, is_frontier, BumpMemory, DoorCorrectedView, FrontierExplorer, FrontierPolicy,
    OracleFrontierPolicy,
};

/// Everything a policy may look at. Holds no ground truth.
pub struct Observation<'a> {
    pub scan: &'a DepthScan,
    /// Whether the previous action collided.
    pub bump_prev: bool,
    pub est_pose: Pose,
    pub map_view: &'a OccupancyGrid,
    crops: OnceCell<EgoCrops>,
}

impl<'a> Observation<'a> {
    pub fn new(
        scan: &'a DepthScan,
        bump_prev: bool,
        est_pose: Pose,
        map_view: &'a OccupancyGrid,
    ) -> Self {
        Self {
            scan,
            bump_prev,
            est_pose,
            map_view,
            crops: OnceCell::new(),
        }
    }

    /// Egocentric crops of the map, computed on first use.
    pub fn crops(&self) -> &EgoCrops {
        self.crops
            .get_or_init(|| ego_crops(self.map_view, self.est_pose))
    }
}

pub trait Policy: Send {
    fn name(&self) -> &'static str;
    fn act(&mut self, obs: &Observation<'_>, rng: &mut dyn RngCore) -> Action;
}

/// Uniform over the six actions.
#[derive(Debug, Default, Clone)]
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn name(&self) -> &'static str {
        PolicyKind::Random.name()
    }

    fn act(&mut self, _obs: &Observation<'_>, rng: &mut dyn RngCore) -> Action {
        Action::ALL[rng.random_range(0..Action::ALL.len())]
    }
}

/// Largest number of turns taken after a collision.
pub const MAX_RECOVERY_TURNS: u32 = 20;

/// Drives forward; after a collision turns `k ∈ [1, 20]` times in one
/// randomly chosen direction, then drives forward again.
#[derive(Debug, Clone)]
pub struct StraightPolicy {
    pending: u32,
    turn: Action,
}

impl Default for StraightPolicy {
    fn default() -> Self {
        Self {
            pending: 0,
            turn: Action::TurnLeft,
        }
    }
}

impl Policy for StraightPolicy {
    fn name(&self) -> &'static str {
        PolicyKind::Straight.name()
    }

    fn act(&mut self, obs: &Observation<'_>, rng: &mut dyn RngCore) -> Action {
        if self.pending > 0 {
            self.pending -= 1;
            return self.turn;
        }
        if !obs.bump_prev {
            return Action::Forward;
        }
        let k = rng.random_range(1..=MAX_RECOVERY_TURNS);
        self.turn = if rng.random_bool(0.5) {
            Action::TurnLeft
        } else {
            Action::TurnRight
        };
        self.pending = k - 1;
        self.turn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Random,
    Straight,
    Frontier,
    OracleFrontier,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Random,
        PolicyKind::Straight,
        PolicyKind::Frontier,
        PolicyKind::OracleFrontier,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::Straight => "straight",
            PolicyKind::Frontier => "frontier",
            PolicyKind::OracleFrontier => "oracle-frontier",
        }
    }

    /// Whether the policy draws from its random stream.
    pub fn uses_rng(self) -> bool {
        matches!(self, PolicyKind::Random | PolicyKind::Straight)
    }

    /// A fresh policy instance. Only the oracle keeps a reference to `plan`.
    pub fn build<'a>(self, plan: &'a Floorplan) -> Box<dyn Policy + 'a> {
        match self {
            PolicyKind::Random => Box::new(RandomPolicy),
            PolicyKind::Straight => Box::new(StraightPolicy::default()),
            PolicyKind::Frontier => Box::new(FrontierPolicy::default()),
            PolicyKind::OracleFrontier => Box::new(OracleFrontierPolicy::new(plan)),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownPolicy(pub String);

impl fmt::Display for UnknownPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown policy `{}` (expected random, straight, frontier or oracle-frontier)",
            self.0
        )
    }
}

impl std::error::Error for UnknownPolicy {}

impl FromStr for PolicyKind {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownPolicy(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn obs_parts() -> (DepthScan, OccupancyGrid) {
        let scan = DepthScan {
            depths: vec![3.0; 61],
            clipped: vec![true; 61],
        };
        (scan, OccupancyGrid::default())
    }

    #[test]
    fn names_round_trip() {
        for k in PolicyKind::ALL {
            assert_eq!(k.name().parse::<PolicyKind>().unwrap(), k);
            assert_eq!(
                serde_json::to_string(&k).unwrap(),
                format!("\"{}\"", k.name())
            );
        }
        assert!("curiosity".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn random_policy_frequencies() {
        let (scan, map) = obs_parts();
        let obs = Observation::new(&scan, false, Pose::default(), &map);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut policy = RandomPolicy;
        let mut counts = [0usize; 6];
        for _ in 0..6000 {
            let a = policy.act(&obs, &mut rng);
            counts[Action::ALL.iter().position(|&b| b == a).unwrap()] += 1;
        }
        for c in counts {
            let f = c as f64 / 6000.0;
            assert!((0.13..=0.20).contains(&f), "{counts:?}");
        }
    }

    #[test]
    fn random_policy_ignores_observation() {
        let (scan, map) = obs_parts();
        let a = Observation::new(&scan, false, Pose::default(), &map);
        let b = Observation::new(&scan, true, Pose::new(3.0, 1.0, 90.0), &map);
        let mut r1 = ChaCha8Rng::seed_from_u64(11);
        let mut r2 = r1.clone();
        for _ in 0..50 {
            assert_eq!(RandomPolicy.act(&a, &mut r1), RandomPolicy.act(&b, &mut r2));
        }
    }

    #[test]
    fn straight_policy_turn_bursts() {
        let (scan, map) = obs_parts();
        let clear = Observation::new(&scan, false, Pose::default(), &map);
        let bumped = Observation::new(&scan, true, Pose::default(), &map);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut policy = StraightPolicy::default();
        assert!((0..10).all(|_| policy.act(&clear, &mut rng) == Action::Forward));
        let mut histogram = [0usize; MAX_RECOVERY_TURNS as usize + 1];
        for _ in 0..4000 {
            let first = policy.act(&bumped, &mut rng);
            assert!(first.is_turn());
            let mut k = 1;
            loop {
                let a = policy.act(&clear, &mut rng);
                if a == Action::Forward {
                    break;
                }
                assert_eq!(a, first);
                k += 1;
            }
            histogram[k] += 1;
        }
        assert_eq!(histogram[0], 0);
        // each k in 1..=20 expects 200 hits; 5 sigma band
        for &h in &histogram[1..] {
            assert!((130..=270).contains(&h), "{histogram:?}");
        }
    }

    #[test]
    fn crops_are_lazy_and_stable() {
        let (scan, map) = obs_parts();
        let obs = Observation::new(&scan, false, Pose::default(), &map);
        let first = obs.crops() as *const EgoCrops;
        assert_eq!(first, obs.crops() as *const EgoCrops);
    }
}
