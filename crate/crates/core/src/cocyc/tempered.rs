use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TemperedReport {
    pub samples: usize,
    pub epsilon: f64,
    /// `max |a(t) − a(0)| / t` over the second half of the samples.
    pub tail_slope: f64,
    /// `ln B₀`: the largest `|a(t) − a(0)|` over the first half.
    pub log_b0: f64,
    /// Smallest ε with `|a(t) − a(0)| ≤ ln B₀ + ε t` at every sample.
    pub min_epsilon: f64,
    pub passes: bool,
    /// Fewer than ten samples never pass.
    pub enough_samples: bool,
}

/// Temperedness diagnostic for log-values `a(g_t q)`, `t = 0, 1, …`.
pub fn check_tempered(samples: &[f64], epsilon: f64) -> TemperedReport {
    let n = samples.len();
    let enough = n >= 10;
    if n < 2 {
        return TemperedReport {
            samples: n,
            epsilon,
            tail_slope: 0.0,
            log_b0: 0.0,
            min_epsilon: 0.0,
            passes: false,
            enough_samples: false,
        };
    }
    let a0 = samples[0];
    let dev = |t: usize| (samples[t] - a0).abs();
    let half = (n / 2).max(1);
    let tail_slope = (half..n).map(|t| dev(t) / t as f64).fold(0.0, f64::max);
    let log_b0 = (0..half).map(dev).fold(0.0, f64::max);
    let min_epsilon = (1..n).map(|t| (dev(t) - log_b0) / t as f64).fold(0.0, f64::max);
    TemperedReport {
        samples: n,
        epsilon,
        tail_slope,
        log_b0,
        min_epsilon,
        passes: enough && tail_slope <= epsilon,
        enough_samples: enough,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples() {
        let r = check_tempered(&[3.0; 50], 1e-9);
        assert_eq!(r.tail_slope, 0.0);
        assert!(r.passes);
    }

    #[test]
    fn logarithmic_growth_passes_at_long_horizon() {
        let s: Vec<f64> = (1..=100_000).map(|n| (n as f64).ln()).collect();
        let r = check_tempered(&s, 1e-3);
        assert!(r.passes, "{r:?}");
    }

    #[test]
    fn linear_growth_threshold() {
        let s: Vec<f64> = (0..1000).map(|n| 0.5 * n as f64).collect();
        assert!(!check_tempered(&s, 0.49).passes);
        assert!(check_tempered(&s, 0.5).passes);
    }

    #[test]
    fn too_few_samples() {
        assert!(!check_tempered(&[0.0; 5], 1.0).passes);
    }
}
