//! Stationary DPP covariance kernels.

mod cauchy;
mod existence;
mod gengamma;
mod palm;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use existence::{existence_check, ExistenceReport, EXISTENCE_SLACK};
pub use palm::{palm_kernel, PalmKernel};

use crate::numerics::special::gamma;
use crate::{Error, Result, Scalar};

/// Kernel family. `Poisson` is the uncorrelated reference (K(x, y) = λ·1{x = y}).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gauss,
    Cauchy,
    #[serde(alias = "gen-gamma", alias = "generalized-gamma")]
    GenGamma,
    Poisson,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gauss => "gauss",
            Family::Cauchy => "cauchy",
            Family::GenGamma => "gengamma",
            Family::Poisson => "poisson",
        }
    }

    pub fn needs_alpha(self) -> bool {
        self != Family::Poisson
    }

    pub fn needs_nu(self) -> bool {
        matches!(self, Family::Cauchy | Family::GenGamma)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gauss" | "gaussian" => Ok(Family::Gauss),
            "cauchy" => Ok(Family::Cauchy),
            "gengamma" | "gen-gamma" | "generalized-gamma" => Ok(Family::GenGamma),
            "poisson" | "ppp" => Ok(Family::Poisson),
            other => Err(Error::Config(format!("unknown kernel family '{other}'"))),
        }
    }
}

/// Plain, serializable kernel parameters (distances in km, λ in BS/km²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: Family,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl KernelSpec {
    fn resolve<T: Scalar>(&self) -> Result<(Family, T, T, T)> {
        let need = |name: &str, v: Option<f64>, needed: bool| -> Result<T> {
            match (v, needed) {
                (Some(v), true) => Ok(T::c(v)),
                (_, false) => Ok(T::zero()),
                (None, true) => Err(Error::Config(format!(
                    "{} kernel requires '{name}'",
                    self.family
                ))),
            }
        };
        let alpha = need("alpha", self.alpha, self.family.needs_alpha())?;
        let nu = need("nu", self.nu, self.family.needs_nu())?;
        Ok((self.family, T::c(self.lambda), alpha, nu))
    }

    /// Existence report for these raw parameters.
    pub fn existence_check(&self) -> Result<ExistenceReport<f64>> {
        let (f, l, a, n) = self.resolve::<f64>()?;
        existence_check(f, l, a, n)
    }
}

/// Evaluation interface shared by stationary kernels and their Palm versions.
pub trait Kernel<T: Scalar>: Send + Sync {
    fn eval(&self, x: [T; 2], y: [T; 2]) -> T;

    fn diag(&self, x: [T; 2]) -> T {
        self.eval(x, x)
    }

    /// Fill `out` (row-major, `n x n`) with the Gram matrix of `pts`.
    fn gram(&self, pts: &[[T; 2]], out: &mut [T]) {
        let n = pts.len();
        for i in 0..n {
            out[i * n + i] = self.diag(pts[i]);
            for j in 0..i {
                let v = self.eval(pts[i], pts[j]);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
    }
}

/// A validated stationary kernel K(x, y) = K0(|x - y|).
#[derive(Clone)]
pub struct KernelModel<T: Scalar> {
    family: Family,
    lambda: T,
    alpha: T,
    nu: T,
    table: Option<Arc<gengamma::Table>>,
}

impl<T: Scalar> fmt::Debug for KernelModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelModel")
            .field("family", &self.family)
            .field("lambda", &self.lambda)
            .field("alpha", &self.alpha)
            .field("nu", &self.nu)
            .finish()
    }
}

impl<T: Scalar> PartialEq for KernelModel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
            && self.lambda == other.lambda
            && self.alpha == other.alpha
            && self.nu == other.nu
    }
}

fn positive<T: Scalar>(name: &str, v: T) -> Result<T> {
    if v.is_finite() && v > T::zero() {
        Ok(v)
    } else {
        Err(Error::invalid(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl<T: Scalar> KernelModel<T> {
    /// Validate parameters and the existence condition. `alpha` is ignored for
    /// Poisson, `nu` for Gauss/Poisson.
    pub fn new(family: Family, lambda: T, alpha: T, nu: T) -> Result<Self> {
        let mut m = Self::raw(family, lambda, alpha, nu)?;
        m.ensure_exists()?;
        if family == Family::GenGamma {
            m.table = Some(gengamma::table(m.nu.f()));
        }
        Ok(m)
    }

    /// Positivity checks only; no existence test and no GenGamma table, so
    /// only the spectral side is usable.
    pub(crate) fn raw(family: Family, lambda: T, alpha: T, nu: T) -> Result<Self> {
        let lambda = positive("lambda", lambda)?;
        let alpha = if family.needs_alpha() {
            positive("alpha", alpha)?
        } else {
            T::zero()
        };
        let nu = if family.needs_nu() {
            positive("nu", nu)?
        } else {
            T::zero()
        };
        Ok(Self {
            family,
            lambda,
            alpha,
            nu,
            table: None,
        })
    }

    pub fn gauss(lambda: T, alpha: T) -> Result<Self> {
        Self::new(Family::Gauss, lambda, alpha, T::zero())
    }

    pub fn cauchy(lambda: T, alpha: T, nu: T) -> Result<Self> {
        Self::new(Family::Cauchy, lambda, alpha, nu)
    }

    pub fn gengamma(lambda: T, alpha: T, nu: T) -> Result<Self> {
        Self::new(Family::GenGamma, lambda, alpha, nu)
    }

    pub fn poisson(lambda: T) -> Result<Self> {
        Self::new(Family::Poisson, lambda, T::zero(), T::zero())
    }

    pub fn from_spec(spec: &KernelSpec) -> Result<Self> {
        let (family, lambda, alpha, nu) = spec.resolve::<T>()?;
        Self::new(family, lambda, alpha, nu)
    }

    pub fn spec(&self) -> KernelSpec {
        KernelSpec {
            family: self.family,
            lambda: self.lambda.f(),
            alpha: self.family.needs_alpha().then(|| self.alpha.f()),
            nu: self.family.needs_nu().then(|| self.nu.f()),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Intensity λ = K0(0).
    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    /// K0 as a function of the distance `r >= 0`.
    pub fn radial(&self, r: T) -> T {
        let r = r.abs();
        match self.family {
            Family::Gauss => {
                let s = r / self.alpha;
                self.lambda * (-s * s).exp()
            }
            Family::Cauchy => {
                let s = r / self.alpha;
                self.lambda * (T::one() + s * s).powf(-(self.nu + T::one()))
            }
            Family::GenGamma => {
                let table = self.table.as_ref().expect("gengamma table");
                self.lambda * T::c(table.eval((r / self.alpha).f()))
            }
            Family::Poisson => {
                if r == T::zero() {
                    self.lambda
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Covariance K0(x) = K(x, 0).
    pub fn covariance(&self, x: [T; 2]) -> T {
        self.radial(x[0].hypot(x[1]))
    }

    /// Spectral density φ(ξ), the Fourier transform of K0.
    pub fn spectral_density(&self, xi: [T; 2]) -> Result<T> {
        self.spectral_radial(xi[0].hypot(xi[1]))
    }

    /// φ as a function of |ξ|.
    pub fn spectral_radial(&self, rho: T) -> Result<T> {
        let pi = T::PI();
        let (l, a, nu) = (self.lambda, self.alpha, self.nu);
        let rho = rho.abs();
        Ok(match self.family {
            Family::Gauss => l * pi * a * a * (-(pi * a * rho).powi(2)).exp(),
            Family::Cauchy => {
                let z = (pi * a * rho).f();
                let scale = l * pi * a * a / gamma(nu + T::one());
                scale * T::c(cauchy::mixture_integral(nu.f(), z))
            }
            Family::GenGamma => {
                let two = T::c(2.0);
                l * nu * a * a / (two * pi * gamma(two / nu)) * (-(a * rho).powf(nu)).exp()
            }
            Family::Poisson => return Err(Error::NoSpectralRepresentation("poisson")),
        })
    }

    /// φ(0) in closed form; for every family here this is also sup φ.
    pub fn spectral_at_origin(&self) -> Option<T> {
        let pi = T::PI();
        let (l, a, nu) = (self.lambda, self.alpha, self.nu);
        match self.family {
            Family::Gauss => Some(l * pi * a * a),
            Family::Cauchy => Some(l * pi * a * a / nu),
            Family::GenGamma => {
                let two = T::c(2.0);
                Some(l * nu * a * a / (two * pi * gamma(two / nu)))
            }
            Family::Poisson => None,
        }
    }

    /// Error unless the kernel defines a DPP (within [`EXISTENCE_SLACK`]).
    pub fn ensure_exists(&self) -> Result<()> {
        match self.spectral_at_origin() {
            Some(m) if m.f() > 1.0 + EXISTENCE_SLACK => Err(Error::Existence {
                max_spectral: m.f(),
            }),
            _ => Ok(()),
        }
    }

    /// Repulsiveness μ = (1/λ) ∫ K0(x)² dx ∈ [0, 1]; 0 for Poisson.
    pub fn repulsiveness(&self) -> T {
        let two = T::c(2.0);
        let Some(phi0) = self.spectral_at_origin() else {
            return T::zero();
        };
        match self.family {
            Family::Gauss => phi0 / two,
            Family::Cauchy => phi0 * self.nu / (two * self.nu + T::one()),
            Family::GenGamma => phi0 / two.powf(two / self.nu),
            Family::Poisson => T::zero(),
        }
    }

    /// Palm kernel given a point at `anchor`.
    pub fn palm(&self, anchor: [T; 2]) -> Result<PalmKernel<T>> {
        PalmKernel::new(self.clone(), anchor)
    }
}

impl<T: Scalar> Kernel<T> for KernelModel<T> {
    #[inline]
    fn eval(&self, x: [T; 2], y: [T; 2]) -> T {
        if self.family == Family::Poisson {
            return if x == y { self.lambda } else { T::zero() };
        }
        self.radial((x[0] - y[0]).hypot(x[1] - y[1]))
    }

    #[inline]
    fn diag(&self, _x: [T; 2]) -> T {
        self.lambda
    }
}

/// K0(x) for a kernel model.
pub fn covariance<T: Scalar>(model: &KernelModel<T>, x: [T; 2]) -> T {
    model.covariance(x)
}

/// φ(ξ) for a kernel model.
pub fn spectral_density<T: Scalar>(model: &KernelModel<T>, xi: [T; 2]) -> Result<T> {
    model.spectral_density(xi)
}

/// Repulsiveness coefficient μ of a kernel model.
pub fn repulsiveness_mu<T: Scalar>(model: &KernelModel<T>) -> T {
    model.repulsiveness()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(KernelModel::<f64>::gauss(-1.0, 1.0).is_err());
        assert!(KernelModel::<f64>::gauss(1.0, 0.0).is_err());
        assert!(KernelModel::<f64>::cauchy(1.0, 1.0, f64::NAN).is_err());
        assert!(KernelModel::<f64>::poisson(0.5).is_ok());
        assert!(matches!(
            KernelModel::<f64>::gauss(1.0, 1.0),
            Err(Error::Existence { .. })
        ));
    }

    #[test]
    fn covariance_at_origin_is_lambda() {
        for m in [
            KernelModel::<f64>::gauss(0.4, 0.8).unwrap(),
            KernelModel::cauchy(0.4, 1.5, 3.0).unwrap(),
            KernelModel::gengamma(0.4, 2.5, 2.6).unwrap(),
            KernelModel::poisson(0.4).unwrap(),
        ] {
            assert!((m.covariance([0.0, 0.0]) - 0.4).abs() < 1e-9, "{m:?}");
        }
    }

    #[test]
    fn spec_round_trip() {
        let m = KernelModel::<f64>::cauchy(0.4492, 1.558, 3.424).unwrap();
        let back = KernelModel::<f64>::from_spec(&m.spec()).unwrap();
        assert_eq!(m, back);
        let json = serde_json::to_string(&m.spec()).unwrap();
        assert!(json.contains("\"cauchy\""));
    }
}
