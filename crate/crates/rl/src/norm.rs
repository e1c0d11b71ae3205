/// Running mean and variance (parallel Welford merge).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunningNorm {
    pub mean: f64,
    pub var: f64,
    pub count: f64,
}

impl Default for RunningNorm {
    fn default() -> Self {
        Self { mean: 0.0, var: 1.0, count: 1e-4 }
    }
}

impl RunningNorm {
    pub fn update(&mut self, xs: &[f64]) {
        if xs.is_empty() {
            return;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let total = self.count + n;
        let delta = mean - self.mean;
        let m2 = self.var * self.count + var * n + delta * delta * self.count * n / total;
        self.mean += delta * n / total;
        self.var = m2 / total;
        self.count = total;
    }

    pub fn std(&self) -> f64 {
        (self.var + 1e-8).sqrt()
    }

    pub fn normalize(&self, x: f64) -> f64 {
        (x - self.mean) / self.std()
    }

    pub fn denormalize(&self, x: f64) -> f64 {
        x * self.std() + self.mean
    }
}
