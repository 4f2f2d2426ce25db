use crate::scalar::Real;

/// Adam with bias-corrected first and second moment estimates.
#[derive(Clone, Debug)]
pub struct Adam<T: Real = f64> {
    learning_rate: T,
    beta1: T,
    beta2: T,
    eps: T,
    m: Vec<T>,
    v: Vec<T>,
    beta1_power: T,
    beta2_power: T,
    steps: usize,
}

impl<T: Real> Adam<T> {
    pub fn new(num_params: usize, learning_rate: T, beta1: T, beta2: T, eps: T) -> Self {
        Adam {
            learning_rate,
            beta1,
            beta2,
            eps,
            m: vec![T::zero(); num_params],
            v: vec![T::zero(); num_params],
            beta1_power: T::one(),
            beta2_power: T::one(),
            steps: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Moves `params` one step against `grad`.
    pub fn step(&mut self, params: &mut [T], grad: &[T]) {
        assert_eq!(params.len(), self.m.len(), "parameter count changed");
        assert_eq!(grad.len(), self.m.len(), "gradient length mismatch");
        self.steps += 1;
        self.beta1_power *= self.beta1;
        self.beta2_power *= self.beta2;
        let one = T::one();
        let m_scale = one / (one - self.beta1_power);
        let v_scale = one / (one - self.beta2_power);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = self.beta1 * *m + (one - self.beta1) * g;
            *v = self.beta2 * *v + (one - self.beta2) * g * g;
            let m_hat = *m * m_scale;
            let v_hat = *v * v_scale;
            *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_is_sign_scaled() {
        let mut adam = Adam::new(3, 0.01, 0.9, 0.999, 1e-8);
        let mut p = vec![0.0f64, 1.0, -2.0];
        let g = vec![3.0, -0.5, 1e-3];
        adam.step(&mut p, &g);
        // bias correction makes the first step -lr * g / (|g| + eps)
        let expected = [
            0.0 - 0.01 * 3.0 / (3.0 + 1e-8),
            1.0 + 0.01 * 0.5 / (0.5 + 1e-8),
            -2.0 - 0.01 * 1e-3 / (1e-3 + 1e-8),
        ];
        for (a, b) in p.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
        assert_eq!(adam.steps(), 1);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut adam = Adam::new(2, 0.05, 0.9, 0.999, 1e-8);
        let mut p = vec![1.5f64, -0.7];
        for _ in 0..2000 {
            let g = vec![2.0 * (p[0] - 0.3), 4.0 * (p[1] + 0.2)];
            adam.step(&mut p, &g);
        }
        assert!((p[0] - 0.3).abs() < 1e-3 && (p[1] + 0.2).abs() < 1e-3, "{p:?}");
    }
}
