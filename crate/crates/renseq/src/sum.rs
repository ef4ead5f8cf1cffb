//! Compensated floating-point accumulation.

/// Neumaier (improved Kahan) running sum.
///
/// Long convolutions and million-entry moment sums accumulate rounding
/// under plain `+=`; the compensation term keeps the error near one ulp
/// of the true sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = Neumaier::new();
    for v in values {
        acc.add(v);
    }
    acc.total()
}
