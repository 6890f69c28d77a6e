use std::time::Instant;

pub const WARMUPS: usize = 3;
pub const REPEATS: usize = 20;

/// Summary of repeated wall-clock measurements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Timing {
    pub median_ns: f64,
    pub min_ns: f64,
    pub max_ns: f64,
    pub repeats: usize,
}

impl Timing {
    /// `(max - min) / median`.
    pub fn spread(&self) -> f64 {
        if self.median_ns > 0.0 {
            (self.max_ns - self.min_ns) / self.median_ns
        } else {
            0.0
        }
    }

    pub fn from_samples(mut samples: Vec<f64>) -> Self {
        assert!(!samples.is_empty(), "no samples");
        samples.sort_by(f64::total_cmp);
        let n = samples.len();
        let median = if n % 2 == 1 {
            samples[n / 2]
        } else {
            0.5 * (samples[n / 2 - 1] + samples[n / 2])
        };
        Self {
            median_ns: median,
            min_ns: samples[0],
            max_ns: samples[n - 1],
            repeats: n,
        }
    }
}

/// Runs `f` `warmups` times untimed, then `repeats` times timed.
pub fn measure<R>(warmups: usize, repeats: usize, mut f: impl FnMut() -> R) -> Timing {
    for _ in 0..warmups {
        std::hint::black_box(f());
    }
    let samples = (0..repeats.max(1))
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f());
            t.elapsed().as_nanos() as f64
        })
        .collect();
    Timing::from_samples(samples)
}

/// Effective GFLOP/s for `flops` useful floating-point operations.
pub fn gflops(flops: f64, runtime_ns: f64) -> f64 {
    if runtime_ns > 0.0 {
        flops / runtime_ns
    } else {
        0.0
    }
}
