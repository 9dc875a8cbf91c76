/// Compensated (Kahan) summation. Keeps a running correction term so that
/// long series of small terms do not lose low-order bits to cancellation.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl From<f64> for KahanSum {
    fn from(x: f64) -> Self {
        let mut s = Self::new();
        s.add(x);
        s
    }
}

impl std::ops::AddAssign<f64> for KahanSum {
    fn add_assign(&mut self, x: f64) {
        self.add(x);
    }
}
