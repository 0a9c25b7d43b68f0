use std::io::Write;
use std::time::Instant;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::RotorGraph;
use crate::rbm::RbmParams;
use crate::vmc::estimator::estimate_energy_and_gradient;
use crate::vmc::sampler::Sampler;
use crate::vmc::settings::{SamplerSettings, SrSettings};
use crate::vmc::sr::sr_step;

/// Width of the trailing window used to smooth the energy trace.
pub const ROLLING_WINDOW: usize = 250;

/// One optimization step as written to the report CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub energy_mean: f64,
    pub energy_std: f64,
    pub grad_norm: f64,
    pub acceptance_rate: f64,
    pub wall_ms: f64,
    /// Mean of `energy_mean` over the last [`ROLLING_WINDOW`] steps.
    pub rolling_mean: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VmcReport {
    pub records: Vec<StepRecord>,
    /// Set when the run stopped early on a numerical failure.
    pub aborted: Option<String>,
}

pub const VMC_CSV_HEADER: &str = "step,energy_mean,energy_std,grad_norm,acceptance_rate,wall_ms";

impl VmcReport {
    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }

    /// Rolling-average energy at the final step.
    pub fn final_energy(&self) -> Option<f64> {
        self.last().map(|r| r.rolling_mean)
    }

    pub fn final_std(&self) -> Option<f64> {
        self.last().map(|r| r.energy_std)
    }

    /// Mean of the per-step standard deviations over the trailing window;
    /// less noisy than the last value alone.
    pub fn rolling_std(&self) -> Option<f64> {
        let k = self.records.len().min(ROLLING_WINDOW);
        (k > 0).then(|| self.records[self.records.len() - k..].iter().map(|r| r.energy_std).sum::<f64>() / k as f64)
    }

    pub fn record_at(&self, step: usize) -> Option<&StepRecord> {
        self.records.iter().find(|r| r.step == step)
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{VMC_CSV_HEADER}")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{:e},{:e},{:e},{},{:.3}",
                r.step, r.energy_mean, r.energy_std, r.grad_norm, r.acceptance_rate, r.wall_ms
            )?;
        }
        Ok(())
    }
}

/// Outcome of [`run_vmc`]: the last finite parameters and the step history.
#[derive(Clone, Debug)]
pub struct VmcRun {
    pub params: RbmParams,
    pub report: VmcReport,
}

/// Alternates sampling and stochastic-reconfiguration updates for
/// `sr.steps` steps.
pub fn run_vmc(
    graph: &RotorGraph,
    init: RbmParams,
    sampler_settings: &SamplerSettings,
    sr: &SrSettings,
) -> Result<VmcRun> {
    run_vmc_with(graph, init, sampler_settings, sr, |_| {})
}

/// [`run_vmc`] with a callback invoked after every step.
pub fn run_vmc_with<F>(
    graph: &RotorGraph,
    init: RbmParams,
    sampler_settings: &SamplerSettings,
    sr: &SrSettings,
    mut observer: F,
) -> Result<VmcRun>
where
    F: FnMut(&StepRecord),
{
    sr.validate()?;
    if init.visible() != graph.n() {
        return Err(Error::DimensionMismatch { expected: graph.n(), actual: init.visible() });
    }
    init.check_finite()?;
    let mut sampler = Sampler::new(&init, sampler_settings.clone())?;
    let mut params = init;
    let mut report = VmcReport::default();
    let mut window_sum = 0.0;

    for step in 0..sr.steps {
        let start = Instant::now();
        let outcome = estimate_energy_and_gradient(graph, &params, &mut sampler).and_then(|est| {
            let next = sr_step(&params, &est.force, &est.metric, sr)?;
            Ok((est, next))
        });
        let (estimate, next) = match outcome {
            Ok(v) => v,
            Err(e @ (Error::NonFinite(_) | Error::SolveFailed(_))) => {
                warn!("vmc aborted at step {step}: {e}");
                report.aborted = Some(format!("step {step}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let energy = estimate.energy;
        window_sum += energy.mean;
        if step >= ROLLING_WINDOW {
            window_sum -= report.records[step - ROLLING_WINDOW].energy_mean;
        }
        let record = StepRecord {
            step,
            energy_mean: energy.mean,
            energy_std: energy.std,
            grad_norm: energy.grad_norm,
            acceptance_rate: energy.acceptance_rate,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            rolling_mean: window_sum / (step + 1).min(ROLLING_WINDOW) as f64,
            samples: energy.samples,
        };
        observer(&record);
        report.records.push(record);
        params = next;
    }
    Ok(VmcRun { params, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_rotor_stays_at_zero_energy() {
        let g = RotorGraph::new(1, vec![], vec![5.0]).unwrap();
        let settings = SamplerSettings { total_samples: 300, burn_in: 50, thin: 5, ..Default::default() };
        let sr = SrSettings { steps: 20, ..Default::default() };
        let run = run_vmc(&g, RbmParams::zeros(3, 1), &settings, &sr).unwrap();
        let last = run.report.last().unwrap();
        assert_eq!(last.energy_mean, 0.0);
        assert_eq!(last.energy_std, 0.0);
        assert_eq!(run.report.records.len(), 20);
    }

    #[test]
    fn rolling_mean_window() {
        let g = RotorGraph::new(2, vec![(0, 1, 1.0)], vec![5.0; 2]).unwrap();
        let settings = SamplerSettings { total_samples: 200, burn_in: 20, thin: 3, ..Default::default() };
        let sr = SrSettings { steps: 5, ..Default::default() };
        let run = run_vmc(&g, RbmParams::random(2, 2, 0.01, 1), &settings, &sr).unwrap();
        let recs = &run.report.records;
        let mean3 = (recs[0].energy_mean + recs[1].energy_mean + recs[2].energy_mean) / 3.0;
        assert!((recs[2].rolling_mean - mean3).abs() < 1e-12);
        let mut csv = Vec::new();
        run.report.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with(VMC_CSV_HEADER));
        assert_eq!(text.lines().count(), 6);
    }

    #[test]
    fn mismatched_model_is_rejected() {
        let g = RotorGraph::new(2, vec![(0, 1, 1.0)], vec![5.0; 2]).unwrap();
        let err = run_vmc(&g, RbmParams::zeros(2, 3), &SamplerSettings::default(), &SrSettings::default());
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }
}
