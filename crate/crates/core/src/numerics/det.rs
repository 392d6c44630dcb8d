//! Determinants of (nearly) positive semi-definite Gram matrices.

use crate::{Error, Result, Scalar};

/// Relative size below which a negative determinant is treated as rounding.
const CLAMP_REL: f64 = 1e-12;

/// Determinant of a symmetric PSD matrix given row-major in `gram` (`n x n`).
///
/// Diagonally pivoted LDLᵀ; if the remaining block has a vanishing diagonal but
/// non-zero off-diagonal mass (indefinite input) it falls back to LU with
/// partial pivoting. Tiny negative results within `1e-12 * scale^n` are
/// clamped to zero.
pub fn psd_det<T: Scalar>(gram: &[T], n: usize) -> Result<T> {
    let mut work = gram.to_vec();
    psd_det_in_place(&mut work, n)
}

/// As [`psd_det`] but destroys `gram`.
pub fn psd_det_in_place<T: Scalar>(a: &mut [T], n: usize) -> Result<T> {
    if a.len() != n * n {
        return Err(Error::invalid(format!(
            "Gram buffer has {} entries, expected {}",
            a.len(),
            n * n
        )));
    }
    if n == 0 {
        return Ok(T::one());
    }
    let mut scale = T::zero();
    for &x in a.iter() {
        if !x.is_finite() {
            return Err(Error::NonFinite("Gram matrix"));
        }
        scale = scale.max(x.abs());
    }
    if scale == T::zero() {
        return Ok(T::zero());
    }
    let tiny = scale * T::epsilon() * T::c(n as f64);
    let mut det = T::one();
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for i in k + 1..n {
            let d = a[i * n + i].abs();
            if d > best {
                best = d;
                p = i;
            }
        }
        if p != k {
            symmetric_swap(a, n, k, p);
        }
        let d = a[k * n + k];
        if d.abs() <= tiny {
            let off = (k..n)
                .flat_map(|i| (k..n).map(move |j| (i, j)))
                .fold(T::zero(), |m, (i, j)| m.max(a[i * n + j].abs()));
            if off <= tiny {
                return Ok(T::zero());
            }
            det *= lu_det_block(a, n, k);
            break;
        }
        det *= d;
        let inv = T::one() / d;
        for i in k + 1..n {
            let l = a[i * n + k] * inv;
            if l == T::zero() {
                continue;
            }
            for j in k + 1..=i {
                let v = a[i * n + j] - l * a[j * n + k];
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
    }
    if !det.is_finite() {
        return Err(Error::NonFinite("determinant"));
    }
    if det < T::zero() {
        let bound = T::c(CLAMP_REL) * scale.powi(n as i32);
        if -det <= bound {
            det = T::zero();
        }
    }
    Ok(det)
}

fn symmetric_swap<T: Scalar>(a: &mut [T], n: usize, k: usize, p: usize) {
    for j in 0..n {
        a.swap(k * n + j, p * n + j);
    }
    for i in 0..n {
        a.swap(i * n + k, i * n + p);
    }
}

/// Determinant of the trailing block `a[k.., k..]` by LU with partial pivoting.
fn lu_det_block<T: Scalar>(a: &mut [T], n: usize, k0: usize) -> T {
    let mut det = T::one();
    for k in k0..n {
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == T::zero() {
            return T::zero();
        }
        if p != k {
            for j in k0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let d = a[k * n + k];
        det *= d;
        for i in k + 1..n {
            let l = a[i * n + k] / d;
            for j in k + 1..n {
                let v = a[i * n + j] - l * a[k * n + j];
                a[i * n + j] = v;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_empty() {
        assert_eq!(psd_det::<f64>(&[], 0).unwrap(), 1.0);
        let id = [1.0, 0.0, 0.0, 1.0];
        assert_eq!(psd_det(&id, 2).unwrap(), 1.0);
    }

    #[test]
    fn singular_rank_one() {
        let v = [1.0, 2.0, 3.0];
        let g: Vec<f64> = (0..9).map(|k| v[k / 3] * v[k % 3]).collect();
        assert_eq!(psd_det(&g, 3).unwrap(), 0.0);
    }

    #[test]
    fn indefinite_falls_back_to_lu() {
        let g = [0.0f64, 1.0, 1.0, 0.0];
        assert!((psd_det(&g, 2).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nan() {
        assert!(matches!(psd_det(&[f64::NAN], 1), Err(Error::NonFinite(_))));
    }
}
