//! Bessel and Gamma functions used by the kernels and the closed forms.

use crate::Scalar;

// Chebyshev coefficients of exp(-x) sqrt(x) I0(x) on x > 8, in 32/x - 2 (Cephes).
#[allow(clippy::excessive_precision)]
const I0_SCALED_TAIL: [f64; 25] = [
    -7.233_180_487_874_754E-18,
    -4.830_504_485_944_182E-18,
    4.465_621_420_296_76E-17,
    3.461_222_867_697_461E-17,
    -2.827_623_980_516_583_6E-16,
    -3.425_485_619_677_219E-16,
    1.772_560_133_056_526_3E-15,
    3.811_680_669_352_622_4E-15,
    -9.554_846_698_828_307E-15,
    -4.150_569_347_287_222E-14,
    1.540_086_217_521_41E-14,
    3.852_778_382_742_142_6E-13,
    7.180_124_451_383_666E-13,
    -1.794_178_531_506_806_2E-12,
    -1.321_581_184_044_771_3E-11,
    -3.149_916_527_963_241_6E-11,
    1.188_914_710_784_643_9E-11,
    4.940_602_388_224_97E-10,
    3.396_232_025_708_386_5E-9,
    2.266_668_990_498_178E-8,
    2.048_918_589_469_063_8E-7,
    2.891_370_520_834_756_7E-6,
    6.889_758_346_916_825E-5,
    3.369_116_478_255_694_3E-3,
    8.044_904_110_141_088E-1,
];

const I0_SWITCH: f64 = 8.0;
const J0_SWITCH: f64 = 12.0;

fn chebyshev(x: f64, coeffs: &[f64]) -> f64 {
    let mut b0 = coeffs[0];
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in &coeffs[1..] {
        b2 = b1;
        b1 = b0;
        b0 = x.mul_add(b1, c) - b2;
    }
    0.5 * (b0 - b2)
}

/// Power series sum_k (z^2/4)^k / (k!)^2; all terms positive, no cancellation.
fn i0_series(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0<T: Scalar>(z: T) -> T {
    let z = z.f().abs();
    let v = if z <= I0_SWITCH {
        i0_series(z)
    } else {
        z.exp() * chebyshev(32.0 / z - 2.0, &I0_SCALED_TAIL) / z.sqrt()
    };
    T::c(v)
}

/// Exponentially scaled `exp(-|z|) I0(z)`; finite for every finite `z`.
///
/// Products such as `exp(-a) I0(b)` with `a >= b` should go through this to
/// avoid overflow: `exp(-a) I0(b) = exp(b - a) * bessel_i0_scaled(b)`.
pub fn bessel_i0_scaled<T: Scalar>(z: T) -> T {
    let z = z.f().abs();
    let v = if z <= I0_SWITCH {
        (-z).exp() * i0_series(z)
    } else {
        chebyshev(32.0 / z - 2.0, &I0_SCALED_TAIL) / z.sqrt()
    };
    T::c(v)
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0<T: Scalar>(z: T) -> T {
    T::c(j0_f64(z.f()))
}

pub(crate) fn j0_f64(z: f64) -> f64 {
    let z = z.abs();
    if z <= J0_SWITCH {
        let q = -0.25 * z * z;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= q / (k * k);
            sum += term;
            if term.abs() <= 1e-17 {
                return sum;
            }
            k += 1.0;
        }
    }
    // Hankel expansion, truncated at the smallest term.
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0_f64;
    let mut prev = f64::INFINITY;
    let inv8z = 1.0 / (8.0 * z);
    for k in 0..64 {
        if a.abs() > prev {
            break;
        }
        match k % 4 {
            0 => p += a,
            1 => q -= a,
            2 => p -= a,
            _ => q += a,
        }
        prev = a.abs();
        let m = (2 * k + 1) as f64;
        a *= m * m * inv8z / (k + 1) as f64;
    }
    let chi = z - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the Gamma function for positive arguments.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    T::c(ln_gamma_f64(x.f()))
}

pub(crate) fn ln_gamma_f64(x: f64) -> f64 {
    use std::f64::consts::PI;
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma_f64(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Gamma function for positive arguments.
pub fn gamma<T: Scalar>(x: T) -> T {
    T::c(ln_gamma_f64(x.f()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_integers_and_half() {
        let mut fact = 1.0;
        for n in 1..20 {
            let g: f64 = gamma(n as f64);
            assert!((g / fact - 1.0).abs() < 1e-13, "n={n}");
            fact *= n as f64;
        }
        let half: f64 = gamma(0.5);
        assert!((half - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn i0_is_continuous_across_switch() {
        let lo: f64 = bessel_i0(8.0 - 1e-14);
        let hi: f64 = bessel_i0(8.0 + 1e-14);
        assert!((lo / hi - 1.0).abs() < 1e-13);
    }

    #[test]
    fn j0_known_values() {
        // first zero and a tabulated value
        let z0: f64 = bessel_j0(2.404_825_557_695_773);
        assert!(z0.abs() < 1e-14);
        let v: f64 = bessel_j0(1.0);
        assert!((v - 0.765_197_686_557_966_6).abs() < 1e-15);
    }

    #[test]
    fn f32_paths_agree() {
        let a: f32 = bessel_i0(3.0f32);
        let b: f64 = bessel_i0(3.0f64);
        assert!((a as f64 / b - 1.0).abs() < 1e-6);
    }
}
