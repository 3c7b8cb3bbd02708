//! Small numeric helpers shared across modules.

/// Integer power, accurate up to exponents in the 10^6 range; `0^0 == 1`.
///
/// Repeated squaring is used for small exponents (worst-case relative error
/// grows like `exp * ulp`), and `exp(k ln |x|)` beyond that, where its
/// error `|k ln x| * ulp` is the smaller of the two. Used instead of
/// `f64::powi` so results are identical on every platform.
pub(crate) fn pow_int(base: f64, exp: u64) -> f64 {
    const SQUARING_LIMIT: u64 = 1024;
    if exp <= SQUARING_LIMIT || base == 0.0 {
        return pow_by_squaring(base, exp);
    }
    let magnitude = (exp as f64 * base.abs().ln()).exp();
    if base < 0.0 && exp & 1 == 1 {
        -magnitude
    } else {
        magnitude
    }
}

fn pow_by_squaring(base: f64, mut exp: u64) -> f64 {
    let mut acc = 1.0;
    let mut b = base;
    loop {
        if exp & 1 == 1 {
            acc *= b;
        }
        exp >>= 1;
        if exp == 0 {
            return acc;
        }
        b *= b;
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
