use crate::cavity::{build_measurement_operators, steady_amplitudes};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::trajectory::TrajectoryRecord;

/// Fraction of the run, counted from the end, used to classify outcomes.
pub const TAIL_FRACTION: f64 = 0.2;

/// Labels of the four outcome classes, in plateau order.
pub const CLASS_LABELS: [&str; 4] = ["111", "double", "single", "000"];

/// Steady `<c_0 + c_0^dag>` plateaus for `|111>`, two excitations, one
/// excitation and `|000>`.
pub fn theoretical_plateaus(params: &SystemParams) -> [f64; 4] {
    let mut p = *params;
    p.phi = 0.0;
    build_measurement_operators(&steady_amplitudes(&p), &p).outcome_plateaus()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub plateaus: [f64; 4],
    /// Half the smallest gap between plateaus.
    pub threshold: f64,
    pub counts: [usize; 4],
    pub unclassified: usize,
    /// Class of every input record, `None` when ambiguous.
    pub assignment: Vec<Option<usize>>,
    pub tail_means: Vec<f64>,
    pub times: Vec<f64>,
    /// Class-mean homodyne current divided by `kappa eta`.
    pub class_current: [Vec<f64>; 4],
    /// Class-mean noiseless `<c_0 + c_0^dag>`.
    pub class_outcome: [Vec<f64>; 4],
}

impl Classification {
    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.unclassified
    }

    /// Mean of a class trace over the final `TAIL_FRACTION` of the run.
    pub fn tail_average(&self, trace: &[f64]) -> f64 {
        let t_end = self.times.last().copied().unwrap_or(0.0);
        let start = t_end * (1.0 - TAIL_FRACTION);
        let v: Vec<f64> = self
            .times
            .iter()
            .zip(trace)
            .filter(|(t, _)| **t >= start - 1e-12)
            .map(|(_, x)| *x)
            .collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    }

    /// Earliest stored time after which a class-mean trace stays within
    /// `tol` (relative) of its plateau.
    pub fn settling_time(&self, class: usize, tol: f64) -> Option<f64> {
        let target = self.plateaus[class];
        let trace = &self.class_outcome[class];
        let last_bad = trace
            .iter()
            .rposition(|v| (v - target).abs() > tol * target.abs());
        match last_bad {
            None => self.times.first().copied(),
            Some(i) if i + 1 < self.times.len() => Some(self.times[i + 1]),
            Some(_) => None,
        }
    }
}

/// Groups measurement-only trajectories by the plateau nearest to the tail
/// average of their noiseless outcome and averages each group.
pub fn classify_and_average(records: &[TrajectoryRecord], plateaus: [f64; 4]) -> Result<Classification> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidArgument("no records to classify".into()))?;
    if records.iter().any(|r| r.params.gamma.iter().any(|g| *g != 0.0)) {
        return Err(Error::InvalidArgument("classification needs gamma = 0 records".into()));
    }
    let ke = first.params.kappa * first.params.eta;
    if ke <= 0.0 {
        return Err(Error::InvalidArgument("classification needs a detector (eta > 0)".into()));
    }
    let mut gap = f64::INFINITY;
    for i in 0..4 {
        for j in (i + 1)..4 {
            gap = gap.min((plateaus[i] - plateaus[j]).abs());
        }
    }
    let threshold = 0.5 * gap;
    let times = first.times.clone();
    let len = times.len();
    let mut counts = [0; 4];
    let mut unclassified = 0;
    let mut assignment = Vec::with_capacity(records.len());
    let mut tail_means = Vec::with_capacity(records.len());
    let mut class_current: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; len]);
    let mut class_outcome: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; len]);
    for r in records {
        if r.times.len() != len {
            return Err(Error::InvalidArgument("records have different lengths".into()));
        }
        let tail = r.outcome_tail_mean(TAIL_FRACTION);
        tail_means.push(tail);
        let (best, dist) = plateaus
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (tail - p).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("four plateaus");
        if dist > threshold {
            unclassified += 1;
            assignment.push(None);
            continue;
        }
        counts[best] += 1;
        assignment.push(Some(best));
        for k in 0..len {
            class_current[best][k] += r.homodyne.current[k] / ke;
            class_outcome[best][k] += r.outcome[k];
        }
    }
    for c in 0..4 {
        if counts[c] > 0 {
            let inv = 1.0 / counts[c] as f64;
            class_current[c].iter_mut().for_each(|v| *v *= inv);
            class_outcome[c].iter_mut().for_each(|v| *v *= inv);
        }
    }
    Ok(Classification {
        plateaus,
        threshold,
        counts,
        unclassified,
        assignment,
        tail_means,
        times,
        class_current,
        class_outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::NamedState;
    use crate::trajectory::{run_trajectory, TrajectoryConfig};

    #[test]
    fn default_plateaus() {
        let p = theoretical_plateaus(&SystemParams::default());
        assert!((p[2] + 1.68).abs() < 5e-3, "{p:?}");
        assert!((p[3] + 3.68).abs() < 5e-3, "{p:?}");
    }

    #[test]
    fn ground_state_is_always_ground_class() {
        let params = SystemParams::default().with_gamma(0.0);
        let records: Vec<_> = (0..3)
            .map(|s| {
                run_trajectory(
                    &TrajectoryConfig::new(params, NamedState::Ground)
                        .with_t_final(5.0)
                        .with_seed(s),
                )
                .unwrap()
            })
            .collect();
        let c = classify_and_average(&records, theoretical_plateaus(&params)).unwrap();
        assert_eq!(c.counts, [0, 0, 0, 3]);
        assert_eq!(c.total(), 3);
    }

    #[test]
    fn rejects_decaying_records() {
        let r = run_trajectory(&TrajectoryConfig::new(SystemParams::default(), NamedState::Ground).with_t_final(0.1))
            .unwrap();
        assert!(classify_and_average(&[r], [0.0, 1.0, 2.0, 3.0]).is_err());
    }
}
