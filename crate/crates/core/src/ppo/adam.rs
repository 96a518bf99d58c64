use crate::error::{Error, Result};
use crate::nn::{NetworkWeights, Tensor};

/// Adam with bias correction. Moments have the same layout as the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: NetworkWeights,
    v: NetworkWeights,
}

impl Adam {
    pub fn new(weights: &NetworkWeights, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: weights.zeros_like(),
            v: weights.zeros_like(),
        }
    }

    pub fn update(&mut self, weights: &mut NetworkWeights, grads: &NetworkWeights) {
        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.step as i32);
        let c2 = 1.0 - b2.powi(self.step as i32);
        let g = grads.params();
        let iter = weights
            .params_mut()
            .into_iter()
            .zip(self.m.params_mut())
            .zip(self.v.params_mut())
            .zip(g);
        for (((w, m), v), g) in iter {
            for k in 0..w.len() {
                m[k] = b1 * m[k] + (1.0 - b1) * g[k];
                v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
                let mh = m[k] / c1;
                let vh = v[k] / c2;
                w[k] -= self.lr * mh / (vh.sqrt() + self.eps);
            }
        }
    }

    /// Moments as tensors named `adam.m.*` / `adam.v.*`.
    pub fn to_tensors(&self) -> Vec<Tensor> {
        let mut out = Vec::new();
        for (prefix, moments) in [("adam.m.", &self.m), ("adam.v.", &self.v)] {
            out.extend(moments.to_tensors().into_iter().map(|mut t| {
                t.name = format!("{prefix}{}", t.name);
                t
            }));
        }
        out
    }

    pub fn from_tensors(weights: &NetworkWeights, tensors: &[Tensor], step: u64, lr: f64) -> Result<Self> {
        let pick = |prefix: &str| -> Vec<Tensor> {
            tensors
                .iter()
                .filter_map(|t| {
                    t.name.strip_prefix(prefix).map(|n| Tensor {
                        name: n.to_string(),
                        shape: t.shape.clone(),
                        data: t.data.clone(),
                    })
                })
                .collect()
        };
        let m = NetworkWeights::from_tensors(&pick("adam.m."))?;
        let v = NetworkWeights::from_tensors(&pick("adam.v."))?;
        if m.tensor_shapes() != weights.tensor_shapes() || v.tensor_shapes() != weights.tensor_shapes() {
            return Err(Error::Shape("optimizer state does not match the weights".into()));
        }
        Ok(Self {
            step,
            m,
            v,
            ..Self::new(weights, lr)
        })
    }
}

/// Scale the slices in `grads` so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_grad_norm(grads: &mut [&mut [f64]], max_norm: f64) -> f64 {
    let norm = grads
        .iter()
        .flat_map(|g| g.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    if max_norm > 0.0 && norm > max_norm {
        let s = max_norm / (norm + 1e-12);
        for g in grads.iter_mut() {
            for x in g.iter_mut() {
                *x *= s;
            }
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::NetConfig;

    fn tiny() -> NetworkWeights {
        let mut w = NetworkWeights::zeros(&NetConfig {
            input_dim: 2,
            hidden: 2,
            layers: 1,
            action_dim: 1,
        });
        w.fill_with(|k| k as f64 * 0.1 - 1.0);
        w
    }

    #[test]
    fn zero_gradient_changes_nothing() {
        let mut w = tiny();
        let before = w.clone();
        let mut adam = Adam::new(&w, 3e-4);
        let zero = w.zeros_like();
        adam.update(&mut w, &zero);
        assert_eq!(w, before);
    }

    #[test]
    fn first_step_moves_by_lr_against_gradient_sign() {
        let mut w = tiny();
        let before = w.clone();
        let mut g = w.zeros_like();
        g.fill_with(|k| if k % 2 == 0 { 0.3 } else { -7.0 });
        let mut adam = Adam::new(&w, 1e-3);
        adam.update(&mut w, &g);
        let after: Vec<f64> = w.params().concat();
        let orig: Vec<f64> = before.params().concat();
        for (k, (a, b)) in after.iter().zip(&orig).enumerate() {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            // m_hat / sqrt(v_hat) = g / |g| on the first step
            assert!((a - b - sign * 1e-3).abs() < 1e-10);
        }
    }

    #[test]
    fn two_steps_match_hand_recursion() {
        let mut w = tiny();
        let x0 = w.params()[0][0];
        let mut g = w.zeros_like();
        g.fill_with(|_| 0.5);
        let mut adam = Adam::new(&w, 0.01);
        adam.update(&mut w, &g);
        adam.update(&mut w, &g);
        let (b1, b2, eps, lr, gv): (f64, f64, f64, f64, f64) = (0.9, 0.999, 1e-8, 0.01, 0.5);
        let mut x = x0;
        let (mut m, mut v) = (0.0, 0.0);
        for t in 1..=2 {
            m = b1 * m + (1.0 - b1) * gv;
            v = b2 * v + (1.0 - b2) * gv * gv;
            x -= lr * (m / (1.0 - b1.powi(t))) / ((v / (1.0 - b2.powi(t))).sqrt() + eps);
        }
        assert!((w.params()[0][0] - x).abs() < 1e-15);
    }

    #[test]
    fn state_round_trip() {
        let mut w = tiny();
        let mut g = w.zeros_like();
        g.fill_with(|k| (k as f64).sin());
        let mut adam = Adam::new(&w, 0.01);
        adam.update(&mut w, &g);
        let back = Adam::from_tensors(&w, &adam.to_tensors(), adam.step, 0.01).unwrap();
        assert_eq!(back, adam);
    }

    #[test]
    fn clipping() {
        let mut a = vec![3.0, 0.0];
        let mut b = vec![4.0];
        let n = clip_grad_norm(&mut [&mut a[..], &mut b[..]], 1.0);
        assert_eq!(n, 5.0);
        assert!((a[0] - 0.6).abs() < 1e-9 && (b[0] - 0.8).abs() < 1e-9);
        let mut c = vec![0.1];
        clip_grad_norm(&mut [&mut c[..]], 1.0);
        assert_eq!(c, vec![0.1]);
    }
}
