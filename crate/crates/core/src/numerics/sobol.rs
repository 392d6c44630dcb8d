//! Sobol low-discrepancy sequence (Joe–Kuo direction numbers, Gray-code order).

use super::joe_kuo::JOE_KUO;
use crate::{Error, Result, Scalar};

pub const MAX_DIMENSION: usize = 64;
const BITS: usize = 32;
const SCALE: f64 = 1.0 / 4_294_967_296.0;

/// Deterministic Sobol stream. The all-zero point (index 0) is never emitted.
#[derive(Clone, Debug)]
pub struct Sobol {
    directions: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u64,
}

impl Sobol {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIMENSION {
            return Err(Error::Config(format!(
                "Sobol dimension must be in 1..={MAX_DIMENSION}, got {dim}"
            )));
        }
        let mut directions = Vec::with_capacity(dim);
        let mut first = [0u32; BITS];
        for (k, v) in first.iter_mut().enumerate() {
            *v = 1u32 << (BITS - 1 - k);
        }
        directions.push(first);
        for &(s, a, m) in JOE_KUO.iter().take(dim - 1) {
            let s = s as usize;
            let mut v = [0u32; BITS];
            for k in 0..s.min(BITS) {
                v[k] = m[k] << (BITS - 1 - k);
            }
            for k in s..BITS {
                let mut x = v[k - s] ^ (v[k - s] >> s);
                for j in 1..s {
                    if (a >> (s - 1 - j)) & 1 == 1 {
                        x ^= v[k - j];
                    }
                }
                v[k] = x;
            }
            directions.push(v);
        }
        Ok(Self {
            state: vec![0; dim],
            directions,
            index: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    /// Index of the next point to be emitted (the origin has index 0).
    pub fn position(&self) -> u64 {
        self.index + 1
    }

    /// Jump so that the next emitted point has index `index` (>= 1).
    pub fn seek(&mut self, index: u64) {
        let index = index.max(1);
        let gray = (index - 1) ^ ((index - 1) >> 1);
        for (d, st) in self.state.iter_mut().enumerate() {
            let mut x = 0u32;
            for (b, v) in self.directions[d].iter().enumerate() {
                if (gray >> b) & 1 == 1 {
                    x ^= v;
                }
            }
            *st = x;
        }
        self.index = index - 1;
    }

    /// Write the next point into `out`, which must have length `dim()`.
    pub fn next_into<T: Scalar>(&mut self, out: &mut [T]) {
        debug_assert_eq!(out.len(), self.dim());
        let c = self.index.trailing_ones() as usize;
        assert!(c < BITS, "Sobol stream exhausted");
        for (st, dir) in self.state.iter_mut().zip(&self.directions) {
            *st ^= dir[c];
        }
        self.index += 1;
        for (o, &st) in out.iter_mut().zip(&self.state) {
            *o = T::c(st as f64 * SCALE);
        }
    }

    pub fn next_point<T: Scalar>(&mut self) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.next_into(&mut out);
        out
    }

    /// `count` consecutive points as a row-major `count x dim` buffer.
    pub fn take_points(&mut self, count: usize) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; count * d];
        for row in out.chunks_exact_mut(d) {
            self.next_into(row);
        }
        out
    }
}

/// First `count` points (origin skipped) of the `dim`-dimensional sequence.
pub fn sobol_points(dim: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    let mut s = Sobol::new(dim)?;
    Ok((0..count).map(|_| s.next_point()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seek_matches_sequential() {
        let mut a = Sobol::new(10).unwrap();
        let pts: Vec<Vec<f64>> = (0..300).map(|_| a.next_point()).collect();
        let mut b = Sobol::new(10).unwrap();
        b.seek(137);
        assert_eq!(b.next_point::<f64>(), pts[136]);
        assert_eq!(b.next_point::<f64>(), pts[137]);
    }

    #[test]
    fn rejects_bad_dimension() {
        assert!(Sobol::new(0).is_err());
        assert!(Sobol::new(65).is_err());
    }
}
