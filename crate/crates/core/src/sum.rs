//! Compensated (Neumaier) accumulation.

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, Default)]
pub struct Accumulator {
    sum: f64,
    carry: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = Accumulator::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

pub fn complex_sum<I: IntoIterator<Item = Complex64>>(values: I) -> Complex64 {
    let mut re = Accumulator::new();
    let mut im = Accumulator::new();
    for v in values {
        re.add(v.re);
        im.add(v.im);
    }
    Complex64::new(re.value(), im.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let vals = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(sum(vals), 2.0);
        let naive: f64 = vals.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn many_small_terms() {
        let s = sum(std::iter::once(1.0).chain(std::iter::repeat(1e-16).take(1_000_000)));
        assert!((s - (1.0 + 1e-10)).abs() < 1e-22);
    }
}
