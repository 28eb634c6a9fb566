//! Special-function helpers: log-space sums, the regularized incomplete
//! gamma function at integer shape, and the exponentially scaled modified
//! Bessel function `I_1`.

use statrs::function::gamma::ln_gamma as statrs_ln_gamma;

pub fn ln_gamma(x: f64) -> f64 {
    statrs_ln_gamma(x)
}

pub fn ln_factorial(n: u32) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub fn ln_binomial(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Running `ln(sum_i exp(t_i))` without overflow.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSum {
    pub fn add(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term > self.max {
            self.scaled = self.scaled * (self.max - ln_term).exp() + 1.0;
            self.max = ln_term;
        } else {
            self.scaled += (ln_term - self.max).exp();
        }
    }

    pub fn ln(&self) -> f64 {
        if self.scaled == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// `ln P(s, x)`, the log of the regularized lower incomplete gamma
/// function, for integer shape `s >= 1`.
///
/// Below `x = s + 1` the positive power series is used; above it,
/// `P = 1 - Q` with `Q(s, x) = e^{-x} sum_{i<s} x^i / i!` (below one half
/// there, so no cancellation).
pub fn ln_p_lower(s: u32, x: f64) -> f64 {
    assert!(s >= 1, "shape must be positive");
    if !(x > 0.0) {
        return f64::NEG_INFINITY;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let sf = s as f64;
    if x < sf + 1.0 {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut i = 1.0;
        loop {
            term *= x / (sf + i);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            i += 1.0;
        }
        sf * x.ln() - x - ln_factorial(s) + sum.ln()
    } else {
        (-q_upper(s, x)).ln_1p()
    }
}

/// `Q(s, x) = e^{-x} sum_{i<s} x^i / i!` for integer `s`.
pub fn q_upper(s: u32, x: f64) -> f64 {
    if !(x > 0.0) {
        return 1.0;
    }
    let lx = x.ln();
    let mut acc = LogSum::default();
    for i in 0..s {
        acc.add(i as f64 * lx - x - ln_factorial(i));
    }
    acc.ln().exp().min(1.0)
}

/// Regularized lower incomplete gamma `P(s, x)` for integer shape.
pub fn p_lower(s: u32, x: f64) -> f64 {
    ln_p_lower(s, x).exp()
}

/// `e^{-z} I_1(z)` for `z >= 0`.
pub fn bessel_i1e(z: f64) -> f64 {
    assert!(z >= 0.0, "bessel_i1e needs a nonnegative argument");
    if z == 0.0 {
        return 0.0;
    }
    if z <= 20.0 {
        // I_1(z) = sum_k (z/2)^{2k+1} / (k! (k+1)!)
        let h = z / 2.0;
        let q = h * h;
        let mut term = h;
        let mut sum = h;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= q / (k * (k + 1.0));
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum * (-z).exp()
    } else {
        // Hankel expansion, truncated at its smallest term; the k-th term is
        // (-1)^k prod_{i<=k} (4 - (2i-1)^2) / (k! (8z)^k).
        let mut term: f64 = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            let next = -term * (4.0 - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * z);
            if next.abs() >= term.abs() || next.abs() < 1e-17 {
                if next.abs() < term.abs() {
                    sum += next;
                }
                break;
            }
            sum += next;
            term = next;
            k += 1.0;
        }
        sum / (2.0 * std::f64::consts::PI * z).sqrt()
    }
}
