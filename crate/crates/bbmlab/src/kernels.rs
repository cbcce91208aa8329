//! Generalized heat kernel `G_m`, Bessel-type kernels `K_m^j`, and the
//! derivative kernels `(d_x M)^r M^{2j} d_x^alpha G_m(t)` that appear as
//! asymptotic profiles. All kernels are built spectrally; real-space
//! quadrature is never used, so fractional `m` costs the same as integer `m`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{inverse, Field, SpectralGrid, Spectrum};

/// Identifier of a derivative kernel `(d_x M)^r M^{2j} d_x^alpha G_m(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    /// Dissipation order of `M = |d_x|^m`.
    pub m: f64,
    /// Heat-flow time; must be positive.
    pub t: f64,
    /// Count of `(d_x M)` factors.
    pub r: u32,
    /// Count of `M^2` factors.
    pub j: u32,
    /// Count of plain `d_x` factors.
    pub alpha: u32,
}

impl KernelSpec {
    pub fn heat(m: f64, t: f64) -> Self {
        KernelSpec { m, t, r: 0, j: 0, alpha: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "dissipation order must satisfy m >= 1, got {}",
                self.m
            )));
        }
        if !(self.t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kernel time must be positive, got {}",
                self.t
            )));
        }
        Ok(())
    }

    /// The composite symbol `(i xi |xi|^m)^r |xi|^{2mj} (i xi)^alpha e^{-t |xi|^m}`.
    pub fn symbol(&self, xi: f64) -> Complex64 {
        let a = xi.abs();
        let am = a.powf(self.m);
        let decay = (-self.t * am).exp();
        let dispersive = Complex64::new(0.0, xi * am).powu(self.r);
        let squared = a.powf(2.0 * self.m * self.j as f64);
        let derivative = Complex64::new(0.0, xi).powu(self.alpha);
        dispersive * derivative * (squared * decay)
    }
}

/// Generalized heat kernel `G_m(., t)`: inverse transform of `e^{-t |xi|^m}`.
/// Real, even, unit mass.
pub fn heat_kernel(m: f64, t: f64, grid: &SpectralGrid) -> Result<Field> {
    derivative_kernel(&KernelSpec::heat(m, t), grid)
}

/// Spectrum of a derivative kernel, without the final inverse transform.
pub fn derivative_kernel_spectrum(spec: &KernelSpec, grid: &SpectralGrid) -> Result<Spectrum> {
    spec.validate()?;
    let mut s = grid.spectrum_from_symbol(|xi| spec.symbol(xi))?;
    // The symbol has odd imaginary part when r + alpha is odd; drop it at the
    // unpaired Nyquist mode so the kernel is real on the grid.
    let ny = grid.nyquist_slot();
    s.coeffs_mut()[ny].im = 0.0;
    Ok(s)
}

/// Derivative kernel `(d_x M)^r M^{2j} d_x^alpha G_m(t)` on the grid.
pub fn derivative_kernel(spec: &KernelSpec, grid: &SpectralGrid) -> Result<Field> {
    Ok(inverse(&derivative_kernel_spectrum(spec, grid)?))
}

/// Bessel-type kernel `K_m^j`: inverse transform of `(1 + |xi|^m)^{-j}`.
/// Requires `m > 1` for an integrable kernel and `j >= 1`.
pub fn bessel_kernel(m: f64, j: u32, grid: &SpectralGrid) -> Result<Field> {
    Ok(inverse(&bessel_kernel_spectrum(m, j, grid)?))
}

pub fn bessel_kernel_spectrum(m: f64, j: u32, grid: &SpectralGrid) -> Result<Spectrum> {
    if !(m > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Bessel-type kernel requires m > 1, got {m}"
        )));
    }
    if j < 1 {
        return Err(Error::InvalidParameter(
            "Bessel-type kernel requires j >= 1".into(),
        ));
    }
    grid.spectrum_from_symbol(|xi| {
        Complex64::new((1.0 + xi.abs().powf(m)).powi(-(j as i32)), 0.0)
    })
}

/// The Bessel symbol `(1 + |xi|^m)^{-j}` itself.
pub fn bessel_symbol(m: f64, j: u32) -> impl Fn(f64) -> Complex64 {
    move |xi| Complex64::new((1.0 + xi.abs().powf(m)).powi(-(j as i32)), 0.0)
}

/// Gamma function; relative error at the 1e-15 level on (0, 10].
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Exact `L^2` norm of `d_x^j G_m(t)` under the `f^ = integral e^{-i x xi} f`
/// convention:
///
/// `|| d_x^j G_m(t) ||_2 = sqrt( Gamma((2j+1)/m) / (pi m) ) * (2t)^{-(2j+1)/(2m)}`
///
/// which follows from the Plancherel identity and the Euler integral
/// `integral_R xi^{2j} e^{-2t|xi|^m} dxi = (2/m) Gamma((2j+1)/m) (2t)^{-(2j+1)/m}`.
/// The decay exponent in `t` is `-j/m - 1/(2m)`.
pub fn kernel_l2_closed_form(m: f64, j: u32, t: f64) -> Result<f64> {
    if !(m >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "closed-form norm requires m >= 1, got {m}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "closed-form norm requires t > 0, got {t}"
        )));
    }
    let a = (2.0 * j as f64 + 1.0) / m;
    Ok((gamma(a) / (PI * m)).sqrt() * (2.0 * t).powf(-a / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{convolve, l2_norm, lp_norm};
    use crate::quad;

    fn kernel_grid() -> SpectralGrid {
        SpectralGrid::new(4096, 200.0).unwrap()
    }

    #[test]
    fn gaussian_case_peak_value() {
        // G_2(x, t) = (4 pi t)^{-1/2} e^{-x^2/4t}; at x = 0, t = 1 the peak is
        // (4 pi)^{-1/2}.
        let grid = SpectralGrid::new(1024, 30.0).unwrap();
        let g = heat_kernel(2.0, 1.0, &grid).unwrap();
        let i0 = grid.len() / 2; // x = 0 node
        assert_eq!(grid.nodes()[i0], 0.0);
        let expect = (4.0 * PI).powf(-0.5);
        assert!((g.values()[i0] - expect).abs() < 1e-12);
        // And the whole profile matches the closed form.
        let exact = grid.sample(|x| (4.0 * PI).powf(-0.5) * (-x * x / 4.0).exp());
        assert!(l2_norm(&g.sub(&exact)) < 1e-12);
    }

    #[test]
    fn unit_mass_for_all_m() {
        let grid = kernel_grid();
        for m in [2.0, 2.5, 3.0, 4.0] {
            let g = heat_kernel(m, 1.0, &grid).unwrap();
            assert!(
                (g.integral() - 1.0).abs() < 1e-10,
                "mass of G_{m} deviates: {}",
                g.integral()
            );
        }
    }

    #[test]
    fn rejects_bad_times() {
        let grid = SpectralGrid::new(64, 10.0).unwrap();
        assert!(heat_kernel(2.0, 0.0, &grid).is_err());
        assert!(heat_kernel(2.0, -1.0, &grid).is_err());
        assert!(heat_kernel(0.5, 1.0, &grid).is_err());
    }

    #[test]
    fn quartic_kernel_matches_quadrature_oracle() {
        // G_4(x, 1) = (1/pi) integral_0^inf e^{-xi^4} cos(x xi) dxi.
        let grid = SpectralGrid::new(2048, 50.0).unwrap();
        let g = heat_kernel(4.0, 1.0, &grid).unwrap();
        let n = grid.len();
        for idx in [n / 2, n / 2 + 10, n / 2 + 41, n / 2 + 100, n / 2 + 160] {
            let x = grid.nodes()[idx];
            let oracle = quad::integrate(|xi| (-xi.powi(4)).exp() * (x * xi).cos(), 0.0, 6.0, 1e-13, 1e-16)
                .unwrap()
                / PI;
            assert!(
                (g.values()[idx] - oracle).abs() < 1e-8,
                "x = {x}: grid {} vs oracle {oracle}",
                g.values()[idx]
            );
        }
    }

    #[test]
    fn bessel_kernel_moments() {
        // Unit mass and zero first moment, Eq.-level identities for K_m^j.
        let grid = SpectralGrid::new(1 << 18, 4000.0).unwrap();
        for m in [2.0, 2.5, 3.0] {
            for j in [1, 2, 3] {
                let k = bessel_kernel(m, j, &grid).unwrap();
                assert!(
                    (k.integral() - 1.0).abs() < 1e-10,
                    "mass of K_{m}^{j}: {}",
                    k.integral()
                );
                let first = k.weighted_integral(|x| x);
                assert!(first.abs() < 1e-9, "first moment of K_{m}^{j}: {first:.3e}");
            }
        }
    }

    #[test]
    fn bessel_kernel_m2_closed_form() {
        // K_2(x) = (1/2) e^{-|x|}; spectral truncation rings only at the kink,
        // so exclude one dx around x = 0.
        let grid = SpectralGrid::new(1 << 22, 40.0).unwrap();
        let k = bessel_kernel(2.0, 1, &grid).unwrap();
        let dx = grid.dx();
        let mut max_err = 0.0f64;
        for (&x, &v) in grid.nodes().iter().zip(k.values()) {
            if x.abs() < dx {
                continue;
            }
            max_err = max_err.max((v - 0.5 * (-x.abs()).exp()).abs());
        }
        assert!(max_err <= 1e-6, "max abs error off the kink: {max_err:.3e}");
    }

    #[test]
    fn derivative_kernel_degenerate_is_heat_kernel() {
        let grid = SpectralGrid::new(512, 40.0).unwrap();
        let spec = KernelSpec { m: 2.5, t: 1.5, r: 0, j: 0, alpha: 0 };
        let a = derivative_kernel(&spec, &grid).unwrap();
        let b = heat_kernel(2.5, 1.5, &grid).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn dispersive_factor_reduces_to_third_derivative_for_m2() {
        // For m = 2, (d_x M) = -d_x^3, so the r = 1 kernel is -G_2'''(t).
        let grid = SpectralGrid::new(2048, 60.0).unwrap();
        let spec = KernelSpec { m: 2.0, t: 1.0, r: 1, j: 0, alpha: 0 };
        let a = derivative_kernel(&spec, &grid).unwrap();
        let g = heat_kernel(2.0, 1.0, &grid).unwrap();
        let b = crate::grid::derivative(&g, 3).scale(-1.0);
        assert!(l2_norm(&a.sub(&b)) < 1e-10);
        // Its L2 norm is || d_x^3 G_2(t) ||_2.
        let expect = kernel_l2_closed_form(2.0, 3, 1.0).unwrap();
        assert!((l2_norm(&a) - expect).abs() < 1e-8 * expect);
    }

    #[test]
    fn composite_kernel_norm_matches_plancherel_oracle() {
        // (m, r, j, alpha, t) = (3, 1, 1, 2, 2): squared symbol magnitude is
        // xi^{2(m+1)r + 4mj + 2 alpha} e^{-2 t xi^m} = xi^24 e^{-4 xi^3}.
        let grid = SpectralGrid::new(2048, 60.0).unwrap();
        let spec = KernelSpec { m: 3.0, t: 2.0, r: 1, j: 1, alpha: 2 };
        let f = derivative_kernel(&spec, &grid).unwrap();
        let oracle = (quad::integrate(|xi: f64| xi.powi(24) * (-4.0 * xi.powi(3)).exp(), 0.0, 8.0, 1e-13, 0.0)
            .unwrap()
            / PI)
            .sqrt();
        assert!(
            (l2_norm(&f) - oracle).abs() < 1e-8 * oracle,
            "grid {} vs oracle {oracle}",
            l2_norm(&f)
        );
    }

    #[test]
    fn closed_form_matches_gaussian_integral() {
        // || G_2(1) ||_2 = (8 pi)^{-1/4} from the direct Gaussian integral.
        let v = kernel_l2_closed_form(2.0, 0, 1.0).unwrap();
        let expect = (8.0 * PI).powf(-0.25);
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn closed_form_scaling_is_exact_power_law() {
        for (m, j) in [(2.0, 0u32), (2.5, 1), (3.0, 2)] {
            let v1 = kernel_l2_closed_form(m, j, 1.0).unwrap();
            let v16 = kernel_l2_closed_form(m, j, 16.0).unwrap();
            let expect = 16.0f64.powf(-(j as f64) / m - 1.0 / (2.0 * m));
            assert!((v16 / v1 - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn closed_form_matches_quadrature_for_m3_j1() {
        // sqrt((1/pi) integral_0^inf xi^2 e^{-2 xi^3} dxi)
        let oracle = (quad::integrate(|xi: f64| xi * xi * (-2.0 * xi.powi(3)).exp(), 0.0, 10.0, 1e-13, 0.0)
            .unwrap()
            / PI)
            .sqrt();
        let v = kernel_l2_closed_form(3.0, 1, 1.0).unwrap();
        assert!((v - oracle).abs() < 1e-10 * oracle);
    }

    #[test]
    fn gamma_reference_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-13);
        assert!((gamma(1.0) - 1.0).abs() < 1e-15);
        assert!((gamma(1.5) - PI.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn grid_norms_match_closed_form() {
        // Spot checks of the acceptance sweep at its extremes.
        let grid = SpectralGrid::new(8192, 400.0).unwrap();
        for (m, j, t) in [(2.0, 0u32, 1.0), (2.5, 0, 0.5), (2.5, 2, 8.0), (4.0, 1, 2.0)] {
            let spec = KernelSpec { m, t, r: 0, j: 0, alpha: j };
            let f = derivative_kernel(&spec, &grid).unwrap();
            let grid_norm = l2_norm(&f);
            let closed = kernel_l2_closed_form(m, j, t).unwrap();
            assert!(
                (grid_norm - closed).abs() <= 1e-6 * closed,
                "m={m} j={j} t={t}: {grid_norm} vs {closed}"
            );
        }
    }

    #[test]
    fn self_similarity() {
        // G_m(x, 2^m) = (1/2) G_m(x/2, 1); x/2 lands on the grid at even nodes.
        let grid = SpectralGrid::new(8192, 400.0).unwrap();
        let n = grid.len();
        for m in [2.0, 2.5, 3.0] {
            let unit = heat_kernel(m, 1.0, &grid).unwrap();
            let scaled = heat_kernel(m, 2.0f64.powf(m), &grid).unwrap();
            let mut max_err = 0.0f64;
            for i in (0..n).step_by(2) {
                let expect = 0.5 * unit.values()[i / 2 + n / 4];
                max_err = max_err.max((scaled.values()[i] - expect).abs());
            }
            assert!(max_err < 1e-8, "m={m}: self-similarity error {max_err:.3e}");
        }
    }

    #[test]
    fn convolution_semigroup() {
        let grid = kernel_grid();
        for m in [2.0, 2.5, 3.0] {
            let a = heat_kernel(m, 0.75, &grid).unwrap();
            let b = heat_kernel(m, 1.25, &grid).unwrap();
            let c = convolve(&a, &b);
            let expect = heat_kernel(m, 2.0, &grid).unwrap();
            assert!(l2_norm(&c.sub(&expect)) < 1e-9);
        }
    }

    #[test]
    fn bessel_self_convolution() {
        // K_m^j = K_m * K_m^{j-1}: symbol-built vs direct real-space sum.
        let grid = SpectralGrid::new(1024, 100.0).unwrap();
        let m = 2.5;
        let k1 = bessel_kernel(m, 1, &grid).unwrap();
        let k2 = bessel_kernel(m, 2, &grid).unwrap();
        let k3 = bessel_kernel(m, 3, &grid).unwrap();
        let n = grid.len();
        let dx = grid.dx();
        let direct = |f: &Field, g: &Field| {
            let mut out = vec![0.0; n];
            for (i, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for y in 0..n {
                    // periodic index for x - y
                    let i_shift = (i + n - y) % n;
                    // nodes are offset so that index n/2 is x = 0
                    let idx = (i_shift + n / 2) % n;
                    acc += f.values()[y] * g.values()[idx];
                }
                *o = acc * dx;
            }
            Field::new(grid.clone(), out).unwrap()
        };
        let conv12 = direct(&k1, &k1);
        assert!(l2_norm(&conv12.sub(&k2)) < 1e-9, "{}", l2_norm(&conv12.sub(&k2)));
        let conv23 = direct(&k1, &k2);
        assert!(l2_norm(&conv23.sub(&k3)) < 1e-9);
    }

    #[test]
    fn fractional_tail_mass_is_controlled() {
        let grid = SpectralGrid::new(8192, 500.0).unwrap();
        let g = heat_kernel(2.5, 1.0, &grid).unwrap();
        assert!(g.tail_mass() < 1e-6, "tail mass {:.3e}", g.tail_mass());
        // The nominal kernel grid is not wide enough for fractional m.
        let narrow = heat_kernel(2.5, 1.0, &kernel_grid()).unwrap();
        assert!(narrow.tail_mass() > 1e-6);
    }

    #[test]
    fn lp_norm_power_law_in_time() {
        // || d_x^j G_m(t) ||_p = t^{-j/m - (1/m)(1 - 1/p)} * const exactly, by
        // self-similarity; check the ratio between two times.
        let grid = kernel_grid();
        for (m, j, p) in [(2.0, 0u32, 1.0), (3.0, 1, f64::INFINITY), (2.0, 1, 2.0)] {
            let spec_a = KernelSpec { m, t: 2.0, r: 0, j: 0, alpha: j };
            let spec_b = KernelSpec { m, t: 32.0, r: 0, j: 0, alpha: j };
            let na = lp_norm(&derivative_kernel(&spec_a, &grid).unwrap(), p).unwrap();
            let nb = lp_norm(&derivative_kernel(&spec_b, &grid).unwrap(), p).unwrap();
            let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
            let slope = -(j as f64) / m - (1.0 - inv_p) / m;
            let expect = 16.0f64.powf(slope);
            assert!(
                (nb / na / expect - 1.0).abs() < 1e-4,
                "m={m} j={j} p={p}: ratio {} vs {expect}",
                nb / na
            );
        }
    }
}
