//! Parallel trajectory collection with a shared, read-only policy snapshot.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gae::gae;
use super::policy::{GaussianPolicy, ValueFunction};
use super::RlError;
use crate::env::{EnvError, MocapEnv};
use crate::rewards::RewardBreakdown;

/// Stream of a worker's seed used for action sampling; distinct from the
/// spawn and sensor-noise streams derived from the same seed.
pub const POLICY_STREAM: u64 = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub worker: usize,
    pub step: usize,
    pub agent: usize,
    pub state: Vec<f64>,
    pub observation: Vec<f64>,
    /// Unclamped policy sample.
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    pub done: bool,
    pub advantage: f64,
    pub ret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub worker: usize,
    pub seed: u64,
    pub agent: usize,
    pub steps: usize,
    pub total_reward: f64,
    /// Per-component sums, `None` for components the variant does not use.
    pub components: [Option<f64>; 8],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RolloutBatch {
    /// Ordered by (worker, step, agent).
    pub transitions: Vec<Transition>,
    pub episodes: Vec<EpisodeSummary>,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn mean_episode_reward(&self) -> f64 {
        if self.episodes.is_empty() {
            return 0.0;
        }
        self.episodes.iter().map(|e| e.total_reward).sum::<f64>() / self.episodes.len() as f64
    }

    pub fn component_means(&self) -> [Option<f64>; 8] {
        let mut out = [None; 8];
        let n = self.episodes.len() as f64;
        for (i, slot) in out.iter_mut().enumerate() {
            let vals: Vec<f64> = self
                .episodes
                .iter()
                .filter_map(|e| e.components[i])
                .collect();
            if !vals.is_empty() {
                *slot = Some(vals.iter().sum::<f64>() / n);
            }
        }
        out
    }
}

/// Runs one episode per seed, `threads` at a time. Each worker builds its own
/// environment through `factory` and samples actions from its own generator,
/// so the batch depends only on the seeds.
pub fn collect_rollouts<F>(
    policy: &GaussianPolicy,
    critic: &ValueFunction,
    factory: &F,
    seeds: &[u64],
    gamma: f64,
    lambda: f64,
    threads: usize,
) -> Result<RolloutBatch, RlError>
where
    F: Fn(u64) -> Result<MocapEnv, EnvError> + Sync,
{
    let results = parallel_map(seeds, threads, |worker, seed| {
        run_worker(policy, critic, factory, worker, seed, gamma, lambda)
    });
    let mut batch = RolloutBatch::default();
    for r in results {
        let (t, e) = r?;
        batch.transitions.extend(t);
        batch.episodes.extend(e);
    }
    Ok(batch)
}

/// Applies `f` to every item on up to `threads` scoped threads and returns
/// the results in input order.
pub fn parallel_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync + Copy,
    R: Send,
    F: Fn(usize, T) -> R + Sync,
{
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().enumerate().map(|(i, &x)| f(i, x)).collect();
    }
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                scope.spawn(move || {
                    (t..items.len())
                        .step_by(threads)
                        .map(|i| (i, f(i, items[i])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker thread panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

type WorkerOutput = (Vec<Transition>, Vec<EpisodeSummary>);

fn run_worker<F>(
    policy: &GaussianPolicy,
    critic: &ValueFunction,
    factory: &F,
    worker: usize,
    seed: u64,
    gamma: f64,
    lambda: f64,
) -> Result<WorkerOutput, RlError>
where
    F: Fn(u64) -> Result<MocapEnv, EnvError>,
{
    let mut env = factory(seed)?;
    let agents = env.variant().agents();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(POLICY_STREAM);

    let mut chains: Vec<Vec<Transition>> = vec![Vec::new(); agents];
    let mut sums: Vec<RewardBreakdown> = vec![RewardBreakdown::default(); agents];
    let mut step = 0;
    loop {
        let mut raw = Vec::with_capacity(agents);
        for (agent, chain) in chains.iter_mut().enumerate() {
            let observation = env.observation(agent)?;
            let state = env.critic_state(agent);
            let (action, log_prob) = policy.sample(&observation, &mut rng)?;
            let value = critic.value(&state)?;
            raw.push(action.clone());
            chain.push(Transition {
                worker,
                step,
                agent,
                state,
                observation,
                action,
                log_prob,
                reward: 0.0,
                value,
                done: false,
                advantage: 0.0,
                ret: 0.0,
            });
        }
        let out = env.step_policy(&raw)?;
        for (agent, chain) in chains.iter_mut().enumerate() {
            let t = chain.last_mut().unwrap();
            t.reward = out.rewards[agent].total;
            t.done = out.events.done;
            accumulate(&mut sums[agent], &out.rewards[agent]);
        }
        step += 1;
        if out.events.done {
            break;
        }
    }

    for chain in &mut chains {
        let rewards: Vec<f64> = chain.iter().map(|t| t.reward).collect();
        let values: Vec<f64> = chain.iter().map(|t| t.value).collect();
        let dones: Vec<bool> = chain.iter().map(|t| t.done).collect();
        let adv = gae(&rewards, &values, &dones, gamma, lambda)?;
        for (t, (a, r)) in chain
            .iter_mut()
            .zip(adv.advantages.into_iter().zip(adv.returns))
        {
            t.advantage = a;
            t.ret = r;
        }
    }

    let episodes = sums
        .iter()
        .enumerate()
        .map(|(agent, s)| EpisodeSummary {
            worker,
            seed,
            agent,
            steps: step,
            total_reward: s.total,
            components: s.components(),
        })
        .collect();

    let mut iters: Vec<_> = chains.into_iter().map(|c| c.into_iter()).collect();
    let mut transitions = Vec::with_capacity(step * agents);
    for _ in 0..step {
        for it in iters.iter_mut() {
            transitions.push(it.next().unwrap());
        }
    }
    Ok((transitions, episodes))
}

fn accumulate(sum: &mut RewardBreakdown, r: &RewardBreakdown) {
    let add = |s: &mut Option<f64>, v: Option<f64>| {
        if let Some(v) = v {
            *s = Some(s.unwrap_or(0.0) + v);
        }
    };
    add(&mut sum.center, r.center);
    add(&mut sum.spin, r.spin);
    add(&mut sum.wspin, r.wspin);
    add(&mut sum.col, r.col);
    add(&mut sum.triag, r.triag);
    add(&mut sum.mhmr, r.mhmr);
    add(&mut sum.concol, r.concol);
    add(&mut sum.workspace, r.workspace);
    sum.total += r.total;
}
