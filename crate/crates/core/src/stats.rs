//! Sample statistics used by the Monte Carlo engines.

/// Streaming mean / standard-error accumulator (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Column-wise accumulators for a time series.
#[derive(Debug, Clone)]
pub struct SeriesAccumulator {
    columns: Vec<Accumulator>,
}

impl SeriesAccumulator {
    pub fn new(len: usize) -> Self {
        Self { columns: vec![Accumulator::default(); len] }
    }

    pub fn push(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.columns.len());
        for (acc, &v) in self.columns.iter_mut().zip(values) {
            acc.push(v);
        }
    }

    pub fn means(&self) -> Vec<f64> {
        self.columns.iter().map(Accumulator::mean).collect()
    }

    pub fn stderrs(&self) -> Vec<f64> {
        self.columns.iter().map(Accumulator::stderr).collect()
    }

    pub fn count(&self) -> u64 {
        self.columns.first().map_or(0, Accumulator::count)
    }
}

/// Two-sided Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn accumulator_matches_two_pass() {
        let xs = [1.0, 2.0, 4.0, 7.0, 11.0];
        let mut acc = Accumulator::default();
        xs.iter().for_each(|&x| acc.push(x));
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert_relative_eq!(acc.mean(), mean, epsilon = 1e-14);
        assert_relative_eq!(acc.variance(), var, epsilon = 1e-12);
        assert_relative_eq!(acc.stderr(), (var / 5.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn ks_of_perfect_uniform_grid() {
        let n = 100;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0));
        assert_relative_eq!(d, 0.5 / n as f64, epsilon = 1e-12);
    }
}
