use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::error::Result;
use crate::graph::RotorConfig;
use crate::rbm::{Proposal, RbmCache, RbmParams};
use crate::vmc::settings::{SampleUnit, SamplerSettings};

/// Full cache rebuilds happen at least this often, in sweeps.
pub const REBUILD_INTERVAL_SWEEPS: usize = 100;

/// Proposes `theta_j + Uniform(-a, a)` and accepts with probability
/// `min(1, |psi'|^2 / |psi|^2)`. Returns whether the move was accepted.
pub fn metropolis_move<R: Rng>(
    params: &RbmParams,
    cache: &mut RbmCache,
    j: usize,
    proposal_width: f64,
    proposal: &mut Proposal,
    rng: &mut R,
) -> bool {
    let step = proposal_width * (2.0 * rng.random::<f64>() - 1.0);
    let delta = params.propose(cache, j, cache.config().get(j) + step, proposal);
    let accept = metropolis_accept(delta, rng);
    if accept {
        cache.commit(proposal);
    }
    accept
}

/// Metropolis test for a symmetric proposal that changes `log psi` by
/// `delta_log_psi`: accepts with probability `min(1, exp(2 delta))`.
pub fn metropolis_accept<R: Rng>(delta_log_psi: f64, rng: &mut R) -> bool {
    delta_log_psi >= 0.0 || rng.random::<f64>() < (2.0 * delta_log_psi).exp()
}

/// One proposal per rotor in index order; returns the acceptance rate.
pub fn metropolis_sweep<R: Rng>(params: &RbmParams, cache: &mut RbmCache, proposal_width: f64, rng: &mut R) -> f64 {
    let n = params.visible();
    if n == 0 {
        return 1.0;
    }
    let mut proposal = Proposal::with_capacity(params.hidden());
    let accepted = (0..n).filter(|&j| metropolis_move(params, cache, j, proposal_width, &mut proposal, rng)).count();
    accepted as f64 / n as f64
}

/// A Markov chain that persists across optimization steps: its angles and
/// random stream carry over, while the cache is rebuilt for new parameters.
#[derive(Clone, Debug)]
pub struct MarkovChain {
    cache: RbmCache,
    rng: ChaCha8Rng,
    proposal: Proposal,
    next_rotor: usize,
}

impl MarkovChain {
    /// Uniformly random start drawn from the chain's own stream.
    pub fn new(params: &RbmParams, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = (0..params.visible()).map(|_| rng.random_range(-PI..PI)).collect();
        Self::with_config(params, RotorConfig::new(theta), rng)
    }

    pub fn with_config(params: &RbmParams, config: RotorConfig, rng: ChaCha8Rng) -> Result<Self> {
        Ok(Self {
            cache: RbmCache::new(params, config)?,
            rng,
            proposal: Proposal::with_capacity(params.hidden()),
            next_rotor: 0,
        })
    }

    pub fn cache(&self) -> &RbmCache {
        &self.cache
    }

    /// Runs the burn-in plus this chain's share of the schedule, calling
    /// `visit` on every retained sample. Returns the acceptance rate over all
    /// proposals made.
    pub fn run<F>(&mut self, params: &RbmParams, settings: &SamplerSettings, mut visit: F) -> Result<f64>
    where
        F: FnMut(&RbmCache) -> Result<()>,
    {
        let n = params.visible();
        self.cache.rebuild(params);
        let moves_per_sample = match settings.unit {
            SampleUnit::Sweep => n,
            SampleUnit::Move => 1,
        };
        let rebuild_every = REBUILD_INTERVAL_SWEEPS * n;
        let total = settings.burn_in + settings.samples_per_chain();
        let (mut accepted, mut proposed, mut since_rebuild) = (0usize, 0usize, 0usize);
        for sample in 0..total {
            for _ in 0..moves_per_sample {
                let j = self.next_rotor;
                self.next_rotor = (self.next_rotor + 1) % n;
                if metropolis_move(
                    params,
                    &mut self.cache,
                    j,
                    settings.proposal_width,
                    &mut self.proposal,
                    &mut self.rng,
                ) {
                    accepted += 1;
                }
                proposed += 1;
                since_rebuild += 1;
                if since_rebuild >= rebuild_every {
                    self.cache.rebuild(params);
                    since_rebuild = 0;
                }
            }
            if sample >= settings.burn_in && (sample - settings.burn_in + 1).is_multiple_of(settings.thin) {
                visit(&self.cache)?;
            }
        }
        Ok(if proposed == 0 { 1.0 } else { accepted as f64 / proposed as f64 })
    }
}

/// The set of chains used by one optimization run; chain `c` is seeded with
/// `seed + c`.
#[derive(Clone, Debug)]
pub struct Sampler {
    settings: SamplerSettings,
    chains: Vec<MarkovChain>,
}

impl Sampler {
    pub fn new(params: &RbmParams, settings: SamplerSettings) -> Result<Self> {
        settings.validate()?;
        let chains = (0..settings.chains)
            .map(|c| MarkovChain::new(params, settings.seed.wrapping_add(c as u64)))
            .collect::<Result<_>>()?;
        Ok(Self { settings, chains })
    }

    pub fn settings(&self) -> &SamplerSettings {
        &self.settings
    }

    pub fn chains_mut(&mut self) -> &mut [MarkovChain] {
        &mut self.chains
    }

    /// Draws retained samples from every chain in chain order.
    pub fn sample<F>(&mut self, params: &RbmParams, mut visit: F) -> Result<f64>
    where
        F: FnMut(&RbmCache) -> Result<()>,
    {
        let mut rate = 0.0;
        for chain in &mut self.chains {
            rate += chain.run(params, &self.settings, &mut visit)?;
        }
        Ok(rate / self.chains.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_target_accepts_everything() {
        let p = RbmParams::zeros(5, 3);
        let mut cache = RbmCache::new(&p, RotorConfig::zeros(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert_eq!(metropolis_sweep(&p, &mut cache, 1.0, &mut rng), 1.0);
        }
        assert!(cache.config().angles().iter().all(|t| (-PI..PI).contains(t)));
    }

    #[test]
    fn vanishing_width_freezes_the_chain() {
        let p = RbmParams::random(4, 3, 0.5, 2);
        let start = RotorConfig::new(vec![0.1, -1.0, 2.0]);
        let mut cache = RbmCache::new(&p, start.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            metropolis_sweep(&p, &mut cache, 1e-300, &mut rng);
        }
        assert_eq!(cache.config(), &start);
    }

    #[test]
    fn retained_sample_count() {
        let p = RbmParams::random(3, 2, 0.1, 4);
        for unit in [SampleUnit::Sweep, SampleUnit::Move] {
            let settings = SamplerSettings {
                total_samples: 500,
                burn_in: 100,
                thin: 7,
                unit,
                chains: 2,
                ..SamplerSettings::default()
            };
            let mut sampler = Sampler::new(&p, settings.clone()).unwrap();
            let mut count = 0;
            sampler
                .sample(&p, |_| {
                    count += 1;
                    Ok(())
                })
                .unwrap();
            assert_eq!(count, settings.retained());
            assert_eq!(count, 2 * (200 / 7));
        }
    }

    #[test]
    fn chains_are_reproducible() {
        let p = RbmParams::random(3, 3, 0.4, 5);
        let settings = SamplerSettings { total_samples: 300, burn_in: 50, thin: 5, ..Default::default() };
        let collect = || {
            let mut sampler = Sampler::new(&p, settings.clone()).unwrap();
            let mut seen = vec![];
            sampler
                .sample(&p, |c| {
                    seen.extend_from_slice(c.config().angles());
                    Ok(())
                })
                .unwrap();
            seen
        };
        let (a, b) = (collect(), collect());
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
