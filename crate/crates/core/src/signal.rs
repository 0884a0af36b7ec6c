use serde::{Deserialize, Serialize};

/// Uniformly sampled real time series. Sample `n` is taken at `t_start + n * dt`,
/// where time is measured from the excitation pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub t_start: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl Trace {
    pub fn new(t_start: f64, dt: f64, values: Vec<f64>) -> Self {
        Trace {
            t_start,
            dt,
            values,
        }
    }

    pub fn zeros(window: TimeWindow) -> Self {
        Trace::new(window.t_start, window.dt, vec![0.0; window.n_samples])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn time(&self, n: usize) -> f64 {
        self.t_start + n as f64 * self.dt
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.dt
    }

    pub fn window(&self) -> TimeWindow {
        TimeWindow {
            t_start: self.t_start,
            dt: self.dt,
            n_samples: self.values.len(),
        }
    }

    /// Linear interpolation; holds the first/last value outside the record.
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.values.len();
        if n == 0 {
            return 0.0;
        }
        let u = (t - self.t_start) / self.dt;
        if u <= 0.0 {
            return self.values[0];
        }
        let i = u.floor() as usize;
        if i >= n - 1 {
            return self.values[n - 1];
        }
        let f = u - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}

/// Acquisition timing: `n_samples` samples spaced `dt` from `t_start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t_start: f64,
    pub dt: f64,
    pub n_samples: usize,
}

impl TimeWindow {
    pub fn end(&self) -> f64 {
        self.t_start + self.n_samples as f64 * self.dt
    }
}
