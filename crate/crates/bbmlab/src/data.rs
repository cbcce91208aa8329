//! Canonical initial-data families. Shifted and skewed Gaussians have
//! closed-form moments and decay fast enough that the periodic truncation
//! bias is negligible, which makes them the workhorses of every rate test.

use crate::error::{Error, Result};
use crate::grid::{derivative, lp_norm, Field, SpectralGrid};
use crate::kernels::bessel_kernel;

/// A named family of initial profiles.
#[derive(Clone, Debug, PartialEq)]
pub enum DataFamily {
    /// `amplitude * exp(-(x - center)^2 / (2 width^2))`
    Gaussian { center: f64, width: f64 },
    /// Gaussian times a linear tilt:
    /// `amplitude * (1 + skew * (x - center) / width) * exp(-(x - center)^2 / (2 width^2))`
    Skew { center: f64, width: f64, skew: f64 },
    /// The Bessel-type kernel `K_m^j` for the model's own `m`.
    KernelK { j: u32 },
    /// Samples loaded from a file (one value per node).
    Samples(Vec<f64>),
}

impl DataFamily {
    pub fn gaussian(center: f64, width: f64) -> Self {
        DataFamily::Gaussian { center, width }
    }

    /// Build the profile with unit amplitude.
    pub fn build(&self, grid: &SpectralGrid, m: f64) -> Result<Field> {
        match self {
            DataFamily::Gaussian { center, width } => {
                if !(*width > 0.0) {
                    return Err(Error::InvalidParameter("gaussian width must be positive".into()));
                }
                let (c, w) = (*center, *width);
                Ok(grid.sample(|x| (-((x - c) / w).powi(2) / 2.0).exp()))
            }
            DataFamily::Skew { center, width, skew } => {
                if !(*width > 0.0) {
                    return Err(Error::InvalidParameter("gaussian width must be positive".into()));
                }
                let (c, w, lam) = (*center, *width, *skew);
                Ok(grid.sample(|x| {
                    let z = (x - c) / w;
                    (1.0 + lam * z) * (-z * z / 2.0).exp()
                }))
            }
            DataFamily::KernelK { j } => bessel_kernel(m, *j, grid),
            DataFamily::Samples(values) => Field::new(grid.clone(), values.clone()),
        }
    }

    /// Closed-form raw moments `integral x^alpha v dx` for the analytic
    /// families, if available. Width-`w` Gaussian central moments enter via
    /// `E[z^2k] = (2k-1)!! w^{2k}`.
    pub fn raw_moment(&self, alpha: u32) -> Option<f64> {
        let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
        match self {
            DataFamily::Gaussian { center, width } => {
                let mass = sqrt_2pi * width;
                Some(mass * gaussian_raw_moment(*center, *width, alpha))
            }
            DataFamily::Skew { center, width, skew } => {
                // (1 + lam z) g(z): moment of x^alpha = E[x^alpha] + lam E[z x^alpha]
                let mass = sqrt_2pi * width;
                let base = gaussian_raw_moment(*center, *width, alpha);
                // E[z x^alpha] = E[(x - c)/w * x^alpha]
                //             = (E[x^{alpha+1}] - c E[x^alpha]) / w
                let tilted = (gaussian_raw_moment(*center, *width, alpha + 1)
                    - center * base)
                    / width;
                Some(mass * (base + skew * tilted))
            }
            _ => None,
        }
    }
}

/// `E[X^alpha]` for `X ~ N(c, w^2)`, via the binomial expansion over central
/// moments.
fn gaussian_raw_moment(c: f64, w: f64, alpha: u32) -> f64 {
    let mut total = 0.0;
    for k in 0..=alpha {
        if (alpha - k) % 2 != 0 {
            continue;
        }
        let central = double_factorial(alpha - k) * w.powi((alpha - k) as i32);
        total += binomial(alpha, k) * c.powi(k as i32) * central;
    }
    total
}

fn double_factorial(n: u32) -> f64 {
    // (n-1)!! for even n, i.e. the standard normal moment E[Z^n].
    if n == 0 {
        return 1.0;
    }
    let mut acc = 1.0;
    let mut k = n as i64 - 1;
    while k > 0 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Discrete stand-in for the `W^{2,1}` norm: `||v||_1 + ||v'||_1 + ||v''||_1`
/// with spectral derivatives and rectangle-rule quadrature.
pub fn w21_norm(v: &Field) -> f64 {
    let d1 = derivative(v, 1);
    let d2 = derivative(v, 2);
    lp_norm(v, 1.0).unwrap() + lp_norm(&d1, 1.0).unwrap() + lp_norm(&d2, 1.0).unwrap()
}

/// Rescale `v` so its discrete `W^{2,1}` norm equals `target`. Returns the
/// scaled field and the factor applied.
pub fn scale_to_w21(v: &Field, target: f64) -> Result<(Field, f64)> {
    let norm = w21_norm(v);
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter(
            "cannot rescale the zero field".into(),
        ));
    }
    let factor = target / norm;
    Ok((v.scale(factor), factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_moments_match_quadrature() {
        let grid = SpectralGrid::new(1024, 40.0).unwrap();
        let fam = DataFamily::Gaussian { center: 1.2, width: 0.8 };
        let f = fam.build(&grid, 2.0).unwrap();
        for alpha in 0..5u32 {
            let grid_moment = f.weighted_integral(|x| x.powi(alpha as i32));
            let exact = fam.raw_moment(alpha).unwrap();
            assert!(
                (grid_moment - exact).abs() < 1e-10 * exact.abs().max(1.0),
                "alpha={alpha}: {grid_moment} vs {exact}"
            );
        }
    }

    #[test]
    fn skew_moments_match_quadrature() {
        let grid = SpectralGrid::new(1024, 40.0).unwrap();
        let fam = DataFamily::Skew { center: -0.5, width: 1.1, skew: 0.4 };
        let f = fam.build(&grid, 2.0).unwrap();
        for alpha in 0..4u32 {
            let grid_moment = f.weighted_integral(|x| x.powi(alpha as i32));
            let exact = fam.raw_moment(alpha).unwrap();
            assert!(
                (grid_moment - exact).abs() < 1e-10 * exact.abs().max(1.0),
                "alpha={alpha}: {grid_moment} vs {exact}"
            );
        }
    }

    #[test]
    fn w21_scaling() {
        let grid = SpectralGrid::new(512, 20.0).unwrap();
        let f = grid.sample(|x| (-x * x).exp() * (1.0 + 0.2 * x));
        let (scaled, factor) = scale_to_w21(&f, 0.1).unwrap();
        assert!((w21_norm(&scaled) - 0.1).abs() < 1e-12);
        assert!(factor > 0.0);
    }

    #[test]
    fn w21_norm_of_gaussian() {
        // ||g||_1 = sqrt(2 pi), ||g'||_1 = 2, ||g''||_1 = 4 e^{-1/2} for a
        // unit-width, unit-amplitude Gaussian.
        let grid = SpectralGrid::new(2048, 40.0).unwrap();
        let g = grid.sample(|x| (-x * x / 2.0).exp());
        // rectangle rule meets the |g''| kinks at x = +-1, so the agreement
        // is O(dx^2), not spectral
        let expect = (2.0 * PI).sqrt() + 2.0 + 4.0 * (-0.5f64).exp();
        assert!((w21_norm(&g) - expect).abs() < 1e-4, "{} vs {expect}", w21_norm(&g));
    }
}
