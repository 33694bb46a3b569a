use crate::scalar::Scalar;

/// Adam with bias correction over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam<F> {
    lr: F,
    beta1: F,
    beta2: F,
    eps: F,
    m: Vec<F>,
    v: Vec<F>,
    beta1_pow: F,
    beta2_pow: F,
}

impl<F: Scalar> Adam<F> {
    pub fn new(len: usize, lr: F, beta1: F, beta2: F, eps: F) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps,
            m: vec![F::zero(); len],
            v: vec![F::zero(); len],
            beta1_pow: F::one(),
            beta2_pow: F::one(),
        }
    }

    pub fn step(&mut self, params: &mut [F], grad: &[F]) {
        debug_assert_eq!(params.len(), grad.len());
        self.beta1_pow *= self.beta1;
        self.beta2_pow *= self.beta2;
        let c1 = F::one() - self.beta1_pow;
        let c2 = F::one() - self.beta2_pow;
        let (b1, b2) = (self.beta1, self.beta2);
        for (((x, &g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = b1 * *m + (F::one() - b1) * g;
            *v = b2 * *v + (F::one() - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *x -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}
