//! Log-domain accumulation.

/// `ln(e^a + e^b)` without overflow.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

/// `ln Σ e^{x_i}`; `-∞` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut acc = LogSumExp::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Streaming `ln Σ e^{x_i}` with a running maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += libm::exp(x - self.max);
        } else {
            self.scaled = self.scaled * libm::exp(self.max - x) + 1.0;
            self.max = x;
        }
    }

    pub fn merge(&mut self, other: &LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if self.max == f64::NEG_INFINITY {
            *self = *other;
            return;
        }
        if other.max <= self.max {
            self.scaled += other.scaled * libm::exp(other.max - self.max);
        } else {
            self.scaled = self.scaled * libm::exp(self.max - other.max) + other.scaled;
            self.max = other.max;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + libm::log(self.scaled)
        }
    }
}

/// `ln(c · b^k)` for a count `c ≥ 0`, with `0 · ln 0` taken as `0` at `k = 0`.
pub fn log_term(count: f64, k: usize, log_base: f64) -> f64 {
    if count == 0.0 {
        return f64::NEG_INFINITY;
    }
    let power = if k == 0 { 0.0 } else { k as f64 * log_base };
    libm::log(count) + power
}

/// `ln Σ_k c_k b^k` for non-negative counts indexed by exponent `k`.
pub fn log_polynomial(counts: &[u64], log_base: f64) -> f64 {
    let mut acc = LogSumExp::new();
    for (k, &c) in counts.iter().enumerate() {
        acc.add(log_term(c as f64, k, log_base));
    }
    acc.value()
}

/// `Σ_k c_k b^k` for signed counts, returned as `(sign, ln |value|)`.
///
/// The sign is `0.0` (and the log `-∞`) when the sum vanishes exactly.
pub fn signed_log_polynomial(counts: &[i64], log_base: f64) -> (f64, f64) {
    if log_base == 0.0 {
        // b = 1: the sum is an exact integer
        let sum: i128 = counts.iter().map(|&c| i128::from(c)).sum();
        return match sum.signum() {
            0 => (0.0, f64::NEG_INFINITY),
            s => (s as f64, libm::log(sum.unsigned_abs() as f64)),
        };
    }
    let mut max = f64::NEG_INFINITY;
    for (k, &c) in counts.iter().enumerate() {
        if c != 0 {
            let t = log_term(c.unsigned_abs() as f64, k, log_base);
            if t > max {
                max = t;
            }
        }
    }
    if max == f64::NEG_INFINITY {
        return (0.0, f64::NEG_INFINITY);
    }
    let mut sum = 0.0;
    for (k, &c) in counts.iter().enumerate() {
        if c != 0 {
            let t = log_term(c.unsigned_abs() as f64, k, log_base);
            let v = libm::exp(t - max);
            sum += if c > 0 { v } else { -v };
        }
    }
    if sum == 0.0 {
        (0.0, f64::NEG_INFINITY)
    } else if sum > 0.0 {
        (1.0, max + libm::log(sum))
    } else {
        (-1.0, max + libm::log(-sum))
    }
}
