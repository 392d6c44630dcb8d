use super::{Kernel, KernelModel};
use crate::{Error, Result, Scalar};

/// Reduced Palm kernel K^!(x, y) = K(x, y) − K(x, x0) K(x0, y) / K(x0, x0).
///
/// It describes the remaining points given that x0 belongs to the process.
#[derive(Clone, Debug)]
pub struct PalmKernel<T: Scalar> {
    base: KernelModel<T>,
    anchor: [T; 2],
    k00: T,
}

impl<T: Scalar> PalmKernel<T> {
    pub fn new(base: KernelModel<T>, anchor: [T; 2]) -> Result<Self> {
        let k00 = base.eval(anchor, anchor);
        if !(k00 > T::zero()) {
            return Err(Error::DegenerateAnchor(k00.f()));
        }
        Ok(Self { base, anchor, k00 })
    }

    pub fn base(&self) -> &KernelModel<T> {
        &self.base
    }

    pub fn anchor(&self) -> [T; 2] {
        self.anchor
    }
}

impl<T: Scalar> Kernel<T> for PalmKernel<T> {
    #[inline]
    fn eval(&self, x: [T; 2], y: [T; 2]) -> T {
        let a = self.base.eval(x, self.anchor);
        let b = self.base.eval(self.anchor, y);
        self.base.eval(x, y) - a * b / self.k00
    }

    fn gram(&self, pts: &[[T; 2]], out: &mut [T]) {
        let n = pts.len();
        let a: Vec<T> = pts
            .iter()
            .map(|&p| self.base.eval(p, self.anchor))
            .collect();
        for i in 0..n {
            out[i * n + i] = self.base.diag(pts[i]) - a[i] * a[i] / self.k00;
            for j in 0..i {
                let v = self.base.eval(pts[i], pts[j]) - a[i] * a[j] / self.k00;
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
    }
}

/// Palm kernel of `model` at `anchor`.
pub fn palm_kernel<T: Scalar>(model: &KernelModel<T>, anchor: [T; 2]) -> Result<PalmKernel<T>> {
    PalmKernel::new(model.clone(), anchor)
}
