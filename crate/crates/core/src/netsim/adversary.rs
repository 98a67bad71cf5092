use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ConfigError, ImpMessage, ProcessId};

/// What the adversary sees when a correct process invokes `ur_broadcast`.
#[derive(Debug)]
pub struct BroadcastCtx<'a> {
    /// Sequential number of this invocation in the run.
    pub broadcast: u64,
    pub sender: ProcessId,
    pub msg: &'a ImpMessage,
    /// Correct processes, in increasing identity order.
    pub correct: &'a [ProcessId],
    pub t_m: u32,
}

/// Chooses, per `ur_broadcast` of a correct process, the correct recipients
/// whose copies are suppressed. The network rejects any choice that names a
/// Byzantine process or exceeds `t_m`.
pub trait MessageAdversary: Send {
    fn choose_victims(&mut self, ctx: &BroadcastCtx<'_>) -> Vec<ProcessId>;
}

impl<F> MessageAdversary for F
where
    F: FnMut(&BroadcastCtx<'_>) -> Vec<ProcessId> + Send,
{
    fn choose_victims(&mut self, ctx: &BroadcastCtx<'_>) -> Vec<ProcessId> {
        self(ctx)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoSuppression;

impl MessageAdversary for NoSuppression {
    fn choose_victims(&mut self, _: &BroadcastCtx<'_>) -> Vec<ProcessId> {
        Vec::new()
    }
}

/// Always suppresses the copies addressed to the same set of processes.
#[derive(Debug, Clone)]
pub struct FixedVictims(pub Vec<ProcessId>);

impl MessageAdversary for FixedVictims {
    fn choose_victims(&mut self, _: &BroadcastCtx<'_>) -> Vec<ProcessId> {
        self.0.clone()
    }
}

/// Draws a fresh set of `t_m` correct victims for every invocation.
#[derive(Debug, Clone)]
pub struct RandomPerBroadcast {
    rng: ChaCha8Rng,
}

impl RandomPerBroadcast {
    pub fn new(seed: u64) -> Self {
        RandomPerBroadcast {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl MessageAdversary for RandomPerBroadcast {
    fn choose_victims(&mut self, ctx: &BroadcastCtx<'_>) -> Vec<ProcessId> {
        let amount = (ctx.t_m as usize).min(ctx.correct.len());
        let mut picked: Vec<ProcessId> = sample(&mut self.rng, ctx.correct.len(), amount)
            .into_iter()
            .map(|i| ctx.correct[i])
            .collect();
        picked.sort();
        picked
    }
}

/// Slides a window of `t_m` consecutive correct processes by one position
/// per invocation.
#[derive(Debug, Clone, Default)]
pub struct Rotating {
    offset: usize,
}

impl MessageAdversary for Rotating {
    fn choose_victims(&mut self, ctx: &BroadcastCtx<'_>) -> Vec<ProcessId> {
        if ctx.correct.is_empty() {
            return Vec::new();
        }
        let len = ctx.correct.len();
        let amount = (ctx.t_m as usize).min(len);
        let start = self.offset % len;
        self.offset += 1;
        (0..amount).map(|i| ctx.correct[(start + i) % len]).collect()
    }
}

/// Serializable description of the built-in strategies.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum AdversaryStrategy {
    #[default]
    None,
    FixedVictims {
        victims: Vec<ProcessId>,
    },
    RandomPerBroadcast {
        #[serde(default)]
        seed: Option<u64>,
    },
    Rotating,
}

impl AdversaryStrategy {
    /// Instantiates the strategy for one run. Randomized strategies combine
    /// their own seed (if any) with `run_seed`.
    pub fn build(
        &self,
        t_m: u32,
        correct: &[ProcessId],
        run_seed: u64,
    ) -> Result<Box<dyn MessageAdversary>, ConfigError> {
        Ok(match self {
            AdversaryStrategy::None => Box::new(NoSuppression),
            AdversaryStrategy::FixedVictims { victims } => {
                let mut v = victims.clone();
                v.sort();
                v.dedup();
                if v.len() > t_m as usize {
                    return Err(ConfigError::Scenario(format!(
                        "{} fixed victims exceed t_m = {t_m}",
                        v.len()
                    )));
                }
                if let Some(p) = v.iter().find(|p| !correct.contains(p)) {
                    return Err(ConfigError::Scenario(format!(
                        "fixed victim {p} is not a correct process"
                    )));
                }
                Box::new(FixedVictims(v))
            }
            AdversaryStrategy::RandomPerBroadcast { seed } => {
                // Mixed with the run seed so that a battery explores fresh
                // victim sequences, and decorrelated from the scheduler stream.
                let seed = seed.unwrap_or(0) ^ run_seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(17);
                Box::new(RandomPerBroadcast::new(seed))
            }
            AdversaryStrategy::Rotating => Box::new(Rotating::default()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::{MessageId, MessageKind};

    fn ctx<'a>(msg: &'a ImpMessage, correct: &'a [ProcessId], t_m: u32) -> BroadcastCtx<'a> {
        BroadcastCtx {
            broadcast: 0,
            sender: ProcessId(1),
            msg,
            correct,
            t_m,
        }
    }

    fn msg() -> ImpMessage {
        ImpMessage::new(MessageKind::Msg, "m".into(), MessageId::new(0, ProcessId(1)))
    }

    #[test]
    fn random_strategy_is_seeded_and_within_budget() {
        let correct: Vec<_> = ProcessId::all(7).collect();
        let m = msg();
        let mut a = RandomPerBroadcast::new(5);
        let mut b = RandomPerBroadcast::new(5);
        for _ in 0..50 {
            let va = a.choose_victims(&ctx(&m, &correct, 2));
            assert_eq!(va, b.choose_victims(&ctx(&m, &correct, 2)));
            assert_eq!(va.len(), 2);
        }
    }

    #[test]
    fn rotating_covers_everyone() {
        let correct: Vec<_> = ProcessId::all(4).collect();
        let m = msg();
        let mut r = Rotating::default();
        let seen: Vec<_> = (0..4)
            .flat_map(|_| r.choose_victims(&ctx(&m, &correct, 1)))
            .collect();
        assert_eq!(seen, correct);
    }

    #[test]
    fn fixed_victims_validated() {
        let correct = [ProcessId(1), ProcessId(2), ProcessId(3)];
        let s = AdversaryStrategy::FixedVictims {
            victims: vec![ProcessId(4)],
        };
        assert!(s.build(1, &correct, 0).is_err());
        let s = AdversaryStrategy::FixedVictims {
            victims: vec![ProcessId(1), ProcessId(2)],
        };
        assert!(s.build(1, &correct, 0).is_err());
    }

    #[test]
    fn strategy_json_shape() {
        let s: AdversaryStrategy =
            serde_json::from_str(r#"{"variant":"fixed-victims","victims":[3]}"#).unwrap();
        assert_eq!(
            s,
            AdversaryStrategy::FixedVictims {
                victims: vec![ProcessId(3)]
            }
        );
        let s: AdversaryStrategy =
            serde_json::from_str(r#"{"variant":"random-per-broadcast","seed":9}"#).unwrap();
        assert_eq!(s, AdversaryStrategy::RandomPerBroadcast { seed: Some(9) });
    }
}
