//! Monte Carlo evaluation statistics shared by the 6-DOF environment and the
//! 3-DOF benchmark: miss-distance percentiles, terminal speed, acceleration
//! magnitude, and violation rates over an episode ensemble.

use serde::Serialize;

use crate::engagement::ConstraintKind;

/// Streaming mean/variance/min accumulator (Welford update, exact merge).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RunningStat {
    pub n: u64,
    pub mean: f64,
    m2: f64,
    pub min: f64,
    pub max: f64,
}

impl RunningStat {
    pub fn new() -> Self {
        RunningStat { n: 0, mean: 0.0, m2: 0.0, min: f64::INFINITY, max: f64::NEG_INFINITY }
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn merge(&mut self, other: &RunningStat) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n1 = self.n as f64;
        let n2 = other.n as f64;
        let delta = other.mean - self.mean;
        let n = n1 + n2;
        self.mean += delta * n2 / n;
        self.m2 += other.m2 + delta * delta * n1 * n2 / n;
        self.n += other.n;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / self.n as f64
        }
    }

    pub fn std(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// Closest-approach tracker: running minimum over uniformly spaced distance
/// samples with quadratic refinement of any bracketed minimum.
#[derive(Debug, Clone, Default)]
pub struct MissTracker {
    prev2: Option<f64>,
    prev: Option<f64>,
    best_raw: f64,
    best_interp: f64,
}

impl MissTracker {
    pub fn new() -> Self {
        MissTracker { prev2: None, prev: None, best_raw: f64::INFINITY, best_interp: f64::INFINITY }
    }

    pub fn push(&mut self, d: f64) {
        if let (Some(a), Some(b)) = (self.prev2, self.prev) {
            if b <= a && b <= d {
                // Parabola through three uniform samples; vertex value.
                let denom = a - 2.0 * b + d;
                let interp = if denom > 1e-12 { b - (a - d) * (a - d) / (8.0 * denom) } else { b };
                self.best_interp = self.best_interp.min(interp);
            }
        }
        self.best_raw = self.best_raw.min(d);
        self.prev2 = self.prev;
        self.prev = Some(d);
    }

    pub fn miss(&self) -> f64 {
        self.best_interp.min(self.best_raw)
    }
}

/// Result of one evaluated episode.
#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub miss: f64,
    pub final_speed: f64,
    pub steps: usize,
    pub violation: Option<ConstraintKind>,
    pub total_reward: f64,
    /// Lateral acceleration magnitude samples, one per guidance step.
    pub accel: RunningStat,
    pub flight_time: f64,
}

/// Ensemble statistics in the layout used by the evaluation tables.
#[derive(Debug, Clone, Serialize)]
pub struct EvalStats {
    pub episodes: usize,
    /// Percent of episodes with miss below 1, 2, 3 m.
    pub miss_pct: [f64; 3],
    pub miss: RunningStat,
    pub v_f: RunningStat,
    pub a_m: RunningStat,
    pub violation_pct: f64,
    pub reward: RunningStat,
    pub steps: RunningStat,
}

impl EvalStats {
    pub fn from_outcomes(outcomes: &[EpisodeOutcome]) -> EvalStats {
        let episodes = outcomes.len();
        let mut miss_counts = [0usize; 3];
        let mut miss = RunningStat::new();
        let mut v_f = RunningStat::new();
        let mut a_m = RunningStat::new();
        let mut reward = RunningStat::new();
        let mut steps = RunningStat::new();
        let mut violations = 0usize;
        for o in outcomes {
            for (i, lim) in [1.0, 2.0, 3.0].iter().enumerate() {
                if o.miss < *lim {
                    miss_counts[i] += 1;
                }
            }
            miss.push(o.miss);
            v_f.push(o.final_speed);
            a_m.merge(&o.accel);
            reward.push(o.total_reward);
            steps.push(o.steps as f64);
            if o.violation.is_some() {
                violations += 1;
            }
        }
        let pct = |c: usize| 100.0 * c as f64 / episodes.max(1) as f64;
        EvalStats {
            episodes,
            miss_pct: [pct(miss_counts[0]), pct(miss_counts[1]), pct(miss_counts[2])],
            miss,
            v_f,
            a_m,
            violation_pct: pct(violations),
            reward,
            steps,
        }
    }

    pub fn csv_header() -> &'static str {
        "case,episodes,miss_lt_1m_pct,miss_lt_2m_pct,miss_lt_3m_pct,\
         vf_mean,vf_std,vf_min,am_mean,am_std,violation_pct,mean_reward,mean_steps"
    }

    pub fn csv_row(&self, case: &str) -> String {
        format!(
            "{case},{},{:.2},{:.2},{:.2},{:.1},{:.1},{:.1},{:.2},{:.2},{:.2},{:.3},{:.1}",
            self.episodes,
            self.miss_pct[0],
            self.miss_pct[1],
            self.miss_pct[2],
            self.v_f.mean,
            self.v_f.std(),
            self.v_f.min,
            self.a_m.mean,
            self.a_m.std(),
            self.violation_pct,
            self.reward.mean,
            self.steps.mean
        )
    }

    /// Human-readable table row matching the evaluation report layout.
    pub fn table_row(&self, case: &str) -> String {
        format!(
            "{case:<16} {:>7.1} {:>7.1} {:>7.1} {:>8.0} {:>6.0} {:>6.0} {:>7.1} {:>6.1} {:>6.2}",
            self.miss_pct[0],
            self.miss_pct[1],
            self.miss_pct[2],
            self.v_f.mean,
            self.v_f.std(),
            self.v_f.min,
            self.a_m.mean,
            self.a_m.std(),
            self.violation_pct
        )
    }

    pub fn table_header() -> String {
        format!(
            "{:<16} {:>7} {:>7} {:>7} {:>8} {:>6} {:>6} {:>7} {:>6} {:>6}",
            "case", "<1m %", "<2m %", "<3m %", "Vf mean", "sd", "min", "|aM| mu", "sd", "vio %"
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 2654435761_u64 % 1000) as f64).sin() * 10.0).collect();
        let mut whole = RunningStat::new();
        for &x in &xs {
            whole.push(x);
        }
        let mut a = RunningStat::new();
        let mut b = RunningStat::new();
        for &x in &xs[..337] {
            a.push(x);
        }
        for &x in &xs[337..] {
            b.push(x);
        }
        a.merge(&b);
        assert!((a.mean - whole.mean).abs() < 1e-10);
        assert!((a.variance() - whole.variance()).abs() < 1e-10);
        assert_eq!(a.n, whole.n);
        assert_eq!(a.min, whole.min);
    }

    #[test]
    fn miss_percentiles() {
        let outcomes: Vec<EpisodeOutcome> = [0.5, 1.5, 2.5, 9.0]
            .iter()
            .map(|&miss| EpisodeOutcome {
                miss,
                final_speed: 800.0,
                steps: 100,
                violation: None,
                total_reward: 1.0,
                accel: RunningStat::new(),
                flight_time: 4.0,
            })
            .collect();
        let stats = EvalStats::from_outcomes(&outcomes);
        assert_eq!(stats.miss_pct, [25.0, 50.0, 75.0]);
        assert_eq!(stats.violation_pct, 0.0);
    }
}
