/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
    started: bool,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        // The first term is taken verbatim so a one-term sum is bit-identical
        // to that term (signed zeros included).
        if !self.started {
            self.sum = value;
            self.started = true;
            return;
        }
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        if self.compensation == 0.0 {
            self.sum
        } else {
            self.sum + self.compensation
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// `ceil(sqrt(m))`, the default subset size, never below 1.
pub fn ceil_sqrt(m: usize) -> usize {
    let mut r = (m as f64).sqrt().ceil() as usize;
    while r > 1 && (r - 1) * (r - 1) >= m {
        r -= 1;
    }
    while r * r < m {
        r += 1;
    }
    r.max(1)
}
