use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What one Metropolis "sample" means.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleUnit {
    /// One sample is a full sweep of `n` single-rotor proposals.
    #[default]
    Sweep,
    /// One sample is a single-rotor proposal; rotors are visited cyclically.
    Move,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerSettings {
    pub total_samples: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Half-width `a` of the uniform angle proposal `Uniform(-a, a)`.
    pub proposal_width: f64,
    pub seed: u64,
    #[serde(default)]
    pub unit: SampleUnit,
    /// Independent Markov chains; the post-burn-in budget is split between them.
    #[serde(default = "one")]
    pub chains: usize,
}

fn one() -> usize {
    1
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            total_samples: 24_000,
            burn_in: 4_000,
            thin: 20,
            proposal_width: 1.0,
            seed: 0,
            unit: SampleUnit::Sweep,
            chains: 1,
        }
    }
}

impl SamplerSettings {
    /// Single-rotor-move schedule used for chains of `n` rotors:
    /// `6000 n` moves, `1000 n` discarded, every `5 n`-th kept.
    pub fn per_rotor_schedule(n: usize, seed: u64) -> Self {
        Self {
            total_samples: 6000 * n,
            burn_in: 1000 * n,
            thin: 5 * n,
            unit: SampleUnit::Move,
            seed,
            ..Self::default()
        }
    }

    /// Post-burn-in samples run by each chain.
    pub fn samples_per_chain(&self) -> usize {
        (self.total_samples - self.burn_in) / self.chains
    }

    /// Retained samples per chain.
    pub fn retained_per_chain(&self) -> usize {
        self.samples_per_chain() / self.thin
    }

    pub fn retained(&self) -> usize {
        self.retained_per_chain() * self.chains
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSettings(msg));
        if self.chains == 0 {
            return bad("need at least one chain".into());
        }
        if self.thin == 0 {
            return bad("thin must be >= 1".into());
        }
        if self.burn_in >= self.total_samples {
            return bad(format!(
                "burn-in ({}) must be smaller than the total sample count ({})",
                self.burn_in, self.total_samples
            ));
        }
        if !(self.proposal_width > 0.0 && self.proposal_width.is_finite()) {
            return bad(format!("proposal width must be positive, got {}", self.proposal_width));
        }
        if self.retained() < 2 {
            return Err(Error::TooFewSamples(self.retained()));
        }
        Ok(())
    }
}

/// Stochastic reconfiguration controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SrSettings {
    pub learning_rate: f64,
    /// Diagonal shift added to the covariance matrix before solving.
    pub sr_shift: f64,
    pub steps: usize,
}

impl Default for SrSettings {
    fn default() -> Self {
        Self { learning_rate: 1e-2, sr_shift: 1e-6, steps: 10_000 }
    }
}

impl SrSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidSettings("learning rate must be positive".into()));
        }
        if !(self.sr_shift >= 0.0 && self.sr_shift.is_finite()) {
            return Err(Error::InvalidSettings("sr shift must be nonnegative".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidSettings("need at least one step".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retained_counts() {
        let s = SamplerSettings::default();
        assert_eq!(s.retained(), 1000);
        let s = SamplerSettings::per_rotor_schedule(4, 0);
        assert_eq!((s.total_samples, s.burn_in, s.thin), (24_000, 4_000, 20));
        assert_eq!(s.retained(), 1000);
        let split = SamplerSettings { chains: 4, ..SamplerSettings::default() };
        assert_eq!(split.retained(), 1000);
    }

    #[test]
    fn validation() {
        assert!(SamplerSettings::default().validate().is_ok());
        let bad = SamplerSettings { burn_in: 24_000, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SamplerSettings { thin: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SamplerSettings { total_samples: 10, burn_in: 0, thin: 6, ..Default::default() };
        assert!(matches!(bad.validate(), Err(Error::TooFewSamples(1))));
        assert!(SrSettings { sr_shift: -1.0, ..Default::default() }.validate().is_err());
        assert!(SrSettings { steps: 0, ..Default::default() }.validate().is_err());
    }
}
