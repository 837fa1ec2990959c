use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

/// N-dimensional FFT over a C-ordered `M^N` torus layer.
pub(crate) struct TorusFft {
    points: usize,
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl TorusFft {
    pub fn new(points: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        TorusFft {
            points,
            dim,
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
        }
    }

    /// Forward transform carrying the `M^{-N}` normalization.
    pub fn forward(&self, layer: &mut [C64]) {
        self.run(layer, &self.forward);
        let scale = (self.points as f64).powi(self.dim as i32).recip();
        layer.iter_mut().for_each(|v| *v *= scale);
    }

    /// Unnormalized inverse, so `inverse(forward(f)) == f`.
    pub fn inverse(&self, layer: &mut [C64]) {
        self.run(layer, &self.inverse);
    }

    fn run(&self, layer: &mut [C64], plan: &Arc<dyn Fft<f64>>) {
        let m = self.points;
        let total = layer.len();
        debug_assert_eq!(total, m.pow(self.dim as u32));
        let mut line = vec![C64::new(0.0, 0.0); m];
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..self.dim {
            let stride = m.pow((self.dim - 1 - axis) as u32);
            let block = stride * m;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = layer[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        layer[base + j * stride] = *v;
                    }
                }
            }
        }
    }
}
