//! Periodic truncation of the real line with continuous-convention spectral
//! transforms.
//!
//! Functions live on `n` uniform nodes of `[-L, L)`. The discrete transform is
//! scaled so that a coefficient approximates the continuous Fourier transform
//! `f^(xi) = integral e^{-i x xi} f(x) dx` at the grid frequency `xi_k = pi k / L`,
//! `k = -n/2 .. n/2 - 1`. With that scaling, multiplier operators and norm
//! quadrature transcribe directly from the continuous formulas.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct GridData {
    n: usize,
    half_width: f64,
    dx: f64,
    dxi: f64,
    nodes: Vec<f64>,
    freqs: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid on `[-L, L)` with `n` nodes (`n` a power of two).
#[derive(Clone)]
pub struct SpectralGrid(Arc<GridData>);

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.0.n)
            .field("half_width", &self.0.half_width)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.0.n == other.0.n && self.0.half_width == other.0.half_width
    }
}

impl SpectralGrid {
    /// Build a grid with nodes `x_i = -L + i * dx`, `dx = 2L/n`, and
    /// frequencies `xi_k = pi k / L` for `k = -n/2 .. n/2 - 1`.
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "domain half-width must be positive and finite, got {half_width}"
            )));
        }
        let dx = 2.0 * half_width / n as f64;
        let dxi = PI / half_width;
        let nodes = (0..n).map(|i| -half_width + i as f64 * dx).collect();
        // Slot k holds frequency index k for k < n/2 and k - n for k >= n/2,
        // matching the FFT layout; the single slot n/2 is the Nyquist mode.
        let freqs = (0..n)
            .map(|k| {
                let idx = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                idx * dxi
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(SpectralGrid(Arc::new(GridData {
            n,
            half_width,
            dx,
            dxi,
            nodes,
            freqs,
            fwd,
            inv,
        })))
    }

    pub fn len(&self) -> usize {
        self.0.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half_width(&self) -> f64 {
        self.0.half_width
    }

    /// Node spacing `dx = 2L/n`.
    pub fn dx(&self) -> f64 {
        self.0.dx
    }

    /// Frequency spacing `dxi = pi/L`.
    pub fn dxi(&self) -> f64 {
        self.0.dxi
    }

    /// Node positions `x_i`.
    pub fn nodes(&self) -> &[f64] {
        &self.0.nodes
    }

    /// Frequency of spectral slot `k` (FFT layout).
    pub fn freq(&self, slot: usize) -> f64 {
        self.0.freqs[slot]
    }

    /// All slot frequencies in FFT layout.
    pub fn freqs(&self) -> &[f64] {
        &self.0.freqs
    }

    /// Index of the unpaired Nyquist slot.
    pub fn nyquist_slot(&self) -> usize {
        self.0.n / 2
    }

    /// Largest resolved frequency magnitude `pi n / (2L)`.
    pub fn max_freq(&self) -> f64 {
        self.0.dxi * (self.0.n as f64) / 2.0
    }

    /// Sample a function at the grid nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.clone(),
            values: self.0.nodes.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Zero field.
    pub fn zero_field(&self) -> Field {
        Field {
            grid: self.clone(),
            values: vec![0.0; self.0.n],
        }
    }

    /// Spectrum built directly from a symbol evaluated at the grid frequencies.
    /// This is the transform of the (periodized) function whose continuous
    /// transform is `symbol`.
    pub fn spectrum_from_symbol(&self, symbol: impl Fn(f64) -> Complex64) -> Result<Spectrum> {
        let coeffs = self
            .0
            .freqs
            .iter()
            .map(|&xi| {
                let v = symbol(xi);
                if v.re.is_finite() && v.im.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFiniteSymbol { xi })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Spectrum {
            grid: self.clone(),
            coeffs,
        })
    }
}

/// Real samples of a function at the grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: SpectralGrid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: SpectralGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure(
                "field contains non-finite samples".into(),
            ));
        }
        Ok(Field { grid, values })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Field) -> Field {
        assert_eq!(self.grid, other.grid, "field addition across grids");
        Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        assert_eq!(self.grid, other.grid, "field subtraction across grids");
        Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Rectangle-rule quadrature of the samples.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    /// Rectangle-rule quadrature of `w(x) * f(x)`.
    pub fn weighted_integral(&self, w: impl Fn(f64) -> f64) -> f64 {
        self.grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| w(x) * v)
            .sum::<f64>()
            * self.grid.dx()
    }

    /// Fraction of the L1 mass lying outside `[-L/2, L/2]`. Large values mean
    /// the periodic truncation is biased and norms should not be trusted.
    pub fn tail_mass(&self) -> f64 {
        let half = self.grid.half_width() / 2.0;
        let mut outside = 0.0;
        let mut total = 0.0;
        for (&x, &v) in self.grid.nodes().iter().zip(&self.values) {
            let a = v.abs();
            total += a;
            if x.abs() > half {
                outside += a;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }
}

/// Complex spectral coefficients in FFT slot order, scaled so that
/// `coeffs[k] ~ f^(xi_k)` in the continuous convention.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: SpectralGrid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at the zero frequency, i.e. the quadrature of the field.
    pub fn mean_coeff(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn add(&self, other: &Spectrum) -> Spectrum {
        assert_eq!(self.grid, other.grid, "spectrum addition across grids");
        Spectrum {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Spectrum) -> Spectrum {
        assert_eq!(self.grid, other.grid, "spectrum subtraction across grids");
        Spectrum {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Spectrum {
        Spectrum {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    /// Pointwise product of coefficients; with the continuous scaling this is
    /// the transform of the convolution of the two fields.
    pub fn product(&self, other: &Spectrum) -> Spectrum {
        assert_eq!(self.grid, other.grid, "spectrum product across grids");
        Spectrum {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// L2 norm evaluated spectrally: `sqrt((1/2pi) sum |c_k|^2 dxi)`. Equal to
    /// the real-space rectangle-rule L2 norm by the discrete Plancherel identity.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (sum * self.grid.dxi() / (2.0 * PI)).sqrt()
    }
}

/// Forward transform: DFT scaled by `dx` and re-phased to the `[-L, L)` node
/// layout, approximating `f^(xi_k)`.
pub fn forward(f: &Field) -> Spectrum {
    let grid = f.grid.clone();
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.0.fwd.process(&mut buf);
    let dx = grid.dx();
    for (k, c) in buf.iter_mut().enumerate() {
        // e^{-i x_i xi_k} = (-1)^k e^{-2 pi i i k / n} on this node layout.
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *c *= sign * dx;
    }
    Spectrum { grid, coeffs: buf }
}

/// Inverse transform; exact discrete inverse of [`forward`].
pub fn inverse(s: &Spectrum) -> Field {
    let grid = s.grid.clone();
    let n = grid.len();
    let mut buf: Vec<Complex64> = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| if k % 2 == 0 { c } else { -c })
        .collect();
    grid.0.inv.process(&mut buf);
    let scale = 1.0 / (n as f64 * grid.dx());
    Field {
        grid,
        values: buf.iter().map(|c| c.re * scale).collect(),
    }
}

/// Multiply a spectrum by a symbol evaluated at the grid frequencies.
///
/// With `real_output` set, the imaginary (odd) part of the symbol is dropped
/// at the unpaired Nyquist mode so that the inverse transform of a Hermitian
/// input stays real.
pub fn apply_multiplier(
    s: &Spectrum,
    symbol: impl Fn(f64) -> Complex64,
    real_output: bool,
) -> Result<Spectrum> {
    let nyquist = s.grid.nyquist_slot();
    let coeffs = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let xi = s.grid.freq(k);
            let mut v = symbol(xi);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFiniteSymbol { xi });
            }
            if real_output && k == nyquist {
                v.im = 0.0;
            }
            Ok(c * v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum {
        grid: s.grid.clone(),
        coeffs,
    })
}

/// Spectral derivative `d^order/dx^order` (multiplier `(i xi)^order`).
pub fn derivative(f: &Field, order: u32) -> Field {
    let s = forward(f);
    let ds = apply_multiplier(
        &s,
        |xi| Complex64::new(0.0, xi).powu(order),
        true,
    )
    .expect("derivative symbol is finite");
    inverse(&ds)
}

/// Convolution of two fields via the spectral product. With the continuous
/// scaling this approximates `integral f(y) g(x - y) dy` on the periodic domain.
pub fn convolve(f: &Field, g: &Field) -> Field {
    inverse(&forward(f).product(&forward(g)))
}

/// Rectangle-rule `L^p` norm; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(f
            .values
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.abs())));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "L^p norm requires p >= 1 or p = inf, got {p}"
        )));
    }
    let dx = f.grid.dx();
    let sum: f64 = f.values.iter().map(|&v| v.abs().powf(p)).sum();
    Ok((sum * dx).powf(1.0 / p))
}

/// `sqrt(sum |f_i|^2 dx)`; the `p = 2` norm without the `powf` detour.
pub fn l2_norm(f: &Field) -> f64 {
    let dx = f.grid.dx();
    (f.values.iter().map(|&v| v * v).sum::<f64>() * dx).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct O(n^2) summation of the scaled DFT; oracle for `forward`.
    fn dft_oracle(f: &Field) -> Vec<Complex64> {
        let grid = f.grid();
        (0..grid.len())
            .map(|k| {
                let xi = grid.freq(k);
                let mut acc = Complex64::new(0.0, 0.0);
                for (&x, &v) in grid.nodes().iter().zip(f.values()) {
                    acc += v * (Complex64::new(0.0, -x * xi)).exp();
                }
                acc * grid.dx()
            })
            .collect()
    }

    fn random_field(grid: &SpectralGrid, rng: &mut impl Rng) -> Field {
        Field::new(
            grid.clone(),
            (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn grid_definition() {
        let g = SpectralGrid::new(16, 8.0).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.nodes()[0], -8.0);
        assert_eq!(g.nodes()[15], 7.0);
        // xi_k = pi k / 8 over k = -8..7
        assert!((g.freq(1) - PI / 8.0).abs() < 1e-15);
        assert!((g.freq(8) + PI).abs() < 1e-15); // Nyquist
        assert_eq!(g.dx() * g.len() as f64, 2.0 * g.half_width());
    }

    #[test]
    fn grid_unit_frequencies() {
        let g = SpectralGrid::new(16, PI).unwrap();
        assert!((g.dx() - PI / 8.0).abs() < 1e-15);
        for k in 0..16usize {
            let expect = if k < 8 { k as f64 } else { k as f64 - 16.0 };
            assert!((g.freq(k) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(SpectralGrid::new(15, 8.0).is_err());
        assert!(SpectralGrid::new(8, 8.0).is_err());
        assert!(SpectralGrid::new(16, 0.0).is_err());
        assert!(SpectralGrid::new(16, -1.0).is_err());
    }

    #[test]
    fn forward_of_zero_is_zero() {
        let g = SpectralGrid::new(32, 5.0).unwrap();
        let s = forward(&g.zero_field());
        assert!(s.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn forward_matches_direct_summation() {
        let g = SpectralGrid::new(64, 8.0 * PI).unwrap();
        let f = g.sample(|x| x.cos());
        let s = forward(&f);
        let oracle = dft_oracle(&f);
        for (a, b) in s.coeffs().iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-9, "{a} vs {b}");
        }
        // cos(x) concentrates at xi = +-1 with coefficient ~ L.
        let l = g.half_width();
        let slot_plus = (1.0 / g.dxi()).round() as usize;
        assert!((s.coeffs()[slot_plus].re - l).abs() < 1e-9);
        assert!((s.coeffs()[g.len() - slot_plus].re - l).abs() < 1e-9);
        let energy_at_pm1 = 2.0 * l * l;
        let total: f64 = s.coeffs().iter().map(|c| c.norm_sqr()).sum();
        assert!((total - energy_at_pm1).abs() < 1e-6 * energy_at_pm1);
    }

    #[test]
    fn gaussian_transform_closed_form() {
        let g = SpectralGrid::new(512, 20.0).unwrap();
        let f = g.sample(|x| (-x * x / 2.0).exp());
        let s = forward(&f);
        let c = (2.0 * PI).sqrt();
        let max_err = s
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let xi = g.freq(k);
                (v - Complex64::new(c * (-xi * xi / 2.0).exp(), 0.0)).norm()
            })
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-10, "max abs error {max_err}");
    }

    #[test]
    fn round_trip_identity_random_fields() {
        let g = SpectralGrid::new(256, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let f = random_field(&g, &mut rng);
            let back = inverse(&forward(&f));
            let err = l2_norm(&back.sub(&f));
            assert!(err <= 1e-12 * l2_norm(&f).max(1e-300));
        }
    }

    #[test]
    fn plancherel_identity_random_fields() {
        let g = SpectralGrid::new(128, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let f = random_field(&g, &mut rng);
            let real = l2_norm(&f).powi(2);
            let spec = forward(&f).l2_norm().powi(2);
            assert!((real - spec).abs() <= 1e-10 * real);
        }
    }

    #[test]
    fn multiplier_identity_and_zero() {
        let g = SpectralGrid::new(64, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_field(&g, &mut rng);
        let s = forward(&f);
        let same = apply_multiplier(&s, |_| Complex64::new(1.0, 0.0), false).unwrap();
        assert_eq!(s.coeffs(), same.coeffs());
        let zero = apply_multiplier(&s, |_| Complex64::new(0.0, 0.0), false).unwrap();
        assert!(zero.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn multiplier_is_linear() {
        let g = SpectralGrid::new(64, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f1 = random_field(&g, &mut rng);
        let f2 = random_field(&g, &mut rng);
        let symbol = |xi: f64| Complex64::new(xi.abs().powf(1.5), xi);
        let lhs = apply_multiplier(&forward(&f1).add(&forward(&f2)), symbol, false).unwrap();
        let rhs = apply_multiplier(&forward(&f1), symbol, false)
            .unwrap()
            .add(&apply_multiplier(&forward(&f2), symbol, false).unwrap());
        // coefficientwise multiplication distributes; floating point leaves
        // ulp-level residue from the re-association
        for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
            assert!((a - b).norm() <= 1e-14 * a.norm().max(1e-300), "{a} vs {b}");
        }
    }

    #[test]
    fn spectral_derivative_of_sine() {
        // On L = 4 pi the mode sin(2x) is on-grid; d/dx sin(2x) = 2 cos(2x).
        let g = SpectralGrid::new(128, 4.0 * PI).unwrap();
        let k = 2.0;
        let f = g.sample(|x| (k * x).sin());
        let df = derivative(&f, 1);
        let expect = g.sample(|x| k * (k * x).cos());
        let err = df
            .values()
            .iter()
            .zip(expect.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err <= 1e-10, "max error {err}");
    }

    #[test]
    fn multiplier_rejects_non_finite_symbol() {
        let g = SpectralGrid::new(32, 2.0).unwrap();
        let s = forward(&g.sample(|x| (-x * x).exp()));
        let r = apply_multiplier(&s, |xi| Complex64::new(1.0 / xi, 0.0), false);
        assert!(matches!(r, Err(Error::NonFiniteSymbol { .. })));
    }

    #[test]
    fn lp_norm_cases() {
        let g = SpectralGrid::new(256, 8.0).unwrap();
        let zero = g.zero_field();
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lp_norm(&zero, p).unwrap(), 0.0);
        }
        // Plateau of height 1 on [-1, 1): area 2 within one dx.
        let plateau = g.sample(|x| if (-1.0..1.0).contains(&x) { 1.0 } else { 0.0 });
        let l1 = lp_norm(&plateau, 1.0).unwrap();
        assert!((l1 - 2.0).abs() <= g.dx());
        assert_eq!(lp_norm(&plateau, f64::INFINITY).unwrap(), 1.0);
        assert!(lp_norm(&plateau, 0.5).is_err());
    }

    #[test]
    fn normalized_gaussian_has_unit_mass() {
        let g = SpectralGrid::new(1024, 30.0).unwrap();
        let f = g.sample(|x| (4.0 * PI).powf(-0.5) * (-x * x / 4.0).exp());
        assert!((lp_norm(&f, 1.0).unwrap() - 1.0).abs() < 1e-10);
        assert!((f.integral() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tail_mass_flags_wide_functions() {
        let g = SpectralGrid::new(256, 10.0).unwrap();
        let narrow = g.sample(|x| (-x * x).exp());
        assert!(narrow.tail_mass() < 1e-10);
        let wide = g.sample(|x| 1.0 / (1.0 + x * x));
        assert!(wide.tail_mass() > 1e-2);
    }

    #[test]
    fn convolution_of_gaussians() {
        // G(.,s) * G(.,t) with Gaussian heat kernels: closed-form semigroup.
        let g = SpectralGrid::new(1024, 30.0).unwrap();
        let kern = |t: f64| move |x: f64| (4.0 * PI * t).powf(-0.5) * (-x * x / (4.0 * t)).exp();
        let a = g.sample(kern(0.7));
        let b = g.sample(kern(1.3));
        let c = convolve(&a, &b);
        let expect = g.sample(kern(2.0));
        assert!(l2_norm(&c.sub(&expect)) < 1e-12);
    }
}
