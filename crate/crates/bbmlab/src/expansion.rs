//! Moment-based large-time expansions.
//!
//! Every expansion here is a finite sum of derivative kernels weighted by
//! moments of the initial data,
//!
//! `M_alpha(v0) = ((-1)^alpha / alpha!) integral x^alpha v0(x) dx`,
//!
//! assembled symbolically as an [`ExpansionTerm`] list first and evaluated
//! spectrally afterwards. Keeping the term list inspectable separates
//! combinatorics bugs (wrong term set, wrong coefficient) from spectral bugs
//! (wrong kernel), and the CLI prints it as the term table.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{inverse, lp_norm, Field, SpectralGrid};
use crate::kernels::KernelSpec;

/// Largest admissible expansion order; factorials stay exact in `f64` and the
/// expansions are asymptotic, so nothing is gained beyond this.
pub const MAX_ORDER: usize = 20;

fn factorial(n: u32) -> f64 {
    debug_assert!(n <= MAX_ORDER as u32);
    let mut acc: u64 = 1;
    for k in 2..=n as u64 {
        acc *= k;
    }
    acc as f64
}

fn check_order(n: usize) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::InvalidParameter(format!(
            "expansion order {n} exceeds the maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

fn check_integer_order(m: f64) -> Result<u32> {
    if m.fract() == 0.0 && m >= 2.0 && m <= 64.0 {
        Ok(m as u32)
    } else {
        Err(Error::InvalidParameter(format!(
            "this expansion requires integer m >= 2, got {m}"
        )))
    }
}

/// Moments of initial data with per-order truncation diagnostics.
#[derive(Clone, Debug)]
pub struct MomentVector {
    values: Vec<f64>,
    tail_estimate: Vec<f64>,
    threshold: f64,
}

impl MomentVector {
    /// Construct from explicit values (all tails treated as zero); handy for
    /// data with closed-form moments.
    pub fn exact(values: Vec<f64>) -> Self {
        let n = values.len();
        MomentVector { values, tail_estimate: vec![0.0; n], threshold: 1e-10 }
    }

    /// Highest order stored.
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    /// `M_alpha`.
    pub fn value(&self, alpha: usize) -> f64 {
        self.values[alpha]
    }

    /// Relative mass of the moment integrand outside `[-L/2, L/2]`.
    pub fn tail_estimate(&self, alpha: usize) -> f64 {
        self.tail_estimate[alpha]
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn trusted(&self, alpha: usize) -> bool {
        self.tail_estimate[alpha] < self.threshold
    }

    /// Orders whose quadrature tails exceed the threshold.
    pub fn untrusted_orders(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&a| !self.trusted(a)).collect()
    }

    /// Err on the first untrusted order, otherwise Ok.
    pub fn ensure_trusted(&self) -> Result<()> {
        for alpha in 0..self.values.len() {
            if !self.trusted(alpha) {
                return Err(Error::UntrustedMoment {
                    alpha,
                    tail: self.tail_estimate[alpha],
                    threshold: self.threshold,
                });
            }
        }
        Ok(())
    }
}

/// Grid-quadrature moments `M_alpha(v0)` for `alpha = 0..=n`, with the default
/// tail threshold of `1e-10`.
pub fn moments(v0: &Field, n: usize) -> Result<MomentVector> {
    moments_with_threshold(v0, n, 1e-10)
}

pub fn moments_with_threshold(v0: &Field, n: usize, threshold: f64) -> Result<MomentVector> {
    check_order(n)?;
    let grid = v0.grid();
    let half = grid.half_width() / 2.0;
    let dx = grid.dx();
    let mut values = Vec::with_capacity(n + 1);
    let mut tails = Vec::with_capacity(n + 1);
    for alpha in 0..=n as u32 {
        let mut signed = 0.0;
        let mut absolute = 0.0;
        let mut outside = 0.0;
        for (&x, &v) in grid.nodes().iter().zip(v0.values()) {
            let w = x.powi(alpha as i32) * v;
            signed += w;
            absolute += w.abs();
            if x.abs() > half {
                outside += w.abs();
            }
        }
        let sign = if alpha % 2 == 0 { 1.0 } else { -1.0 };
        values.push(sign / factorial(alpha) * signed * dx);
        tails.push(if absolute == 0.0 { 0.0 } else { outside / absolute });
    }
    Ok(MomentVector { values, tail_estimate: tails, threshold })
}

/// One profile in an expansion: `coefficient * K_m^{bessel_power} * kernel`.
#[derive(Clone, Debug)]
pub struct ExpansionTerm {
    /// Numeric coefficient: the moment times the `t^r/r! * t^j/j!` factor.
    pub coefficient: f64,
    /// The derivative kernel `(d_x M)^r M^{2j} d_x^alpha G_m(t)`.
    pub spec: KernelSpec,
    /// Extra convolution power of `K_m`; zero for the replaced expansions.
    pub bessel_power: u32,
    /// `(r, j, alpha)` indices this term came from.
    pub provenance: (u32, u32, u32),
}

/// Heat-flow expansion terms: `sum_{alpha <= n} M_alpha d_x^alpha G_m(t)`.
pub fn heat_expansion_terms(
    mv: &MomentVector,
    n: usize,
    m: f64,
    t: f64,
) -> Result<Vec<ExpansionTerm>> {
    check_order(n)?;
    if mv.order() < n {
        return Err(Error::InvalidParameter(format!(
            "moment vector holds orders 0..={} but the expansion needs {n}",
            mv.order()
        )));
    }
    Ok((0..=n as u32)
        .map(|alpha| ExpansionTerm {
            coefficient: mv.value(alpha as usize),
            spec: KernelSpec { m, t, r: 0, j: 0, alpha },
            bessel_power: 0,
            provenance: (0, 0, alpha),
        })
        .collect())
}

/// Complete expansion of the dissipative-dispersive flow for integer `m`:
/// the heat block plus the dispersive block
///
/// `sum_{r,j != (0,0)} (t^r/r!)(t^j/j!) sum_{alpha <= n - r - m j} M_alpha
///  (d_x M)^r M^{2j} d_x^alpha G_m(t)`,
///
/// with `j <= floor(n/2)` and pairs violating `n - r - m j >= 0` skipped.
pub fn bbm_integer_expansion_terms(
    mv: &MomentVector,
    n: usize,
    m: f64,
    t: f64,
) -> Result<Vec<ExpansionTerm>> {
    let m_int = check_integer_order(m)?;
    let mut terms = heat_expansion_terms(mv, n, m, t)?;
    for r in 0..=n as u32 {
        for j in 0..=(n / 2) as u32 {
            if r == 0 && j == 0 {
                continue;
            }
            let budget = n as i64 - r as i64 - (m_int as i64) * (j as i64);
            if budget < 0 {
                continue;
            }
            let weight = t.powi(r as i32) / factorial(r) * t.powi(j as i32) / factorial(j);
            for alpha in 0..=budget as u32 {
                terms.push(ExpansionTerm {
                    coefficient: weight * mv.value(alpha as usize),
                    spec: KernelSpec { m, t, r, j, alpha },
                    bessel_power: 0,
                    provenance: (r, j, alpha),
                });
            }
        }
    }
    Ok(terms)
}

/// Two-term (plus dispersive correction) expansion for fractional `m > 2`:
/// `M_0 G_m(t) + M_1 d_x G_m(t) + t M_0 (d_x M) G_m(t)`.
pub fn bbm_fractional_expansion_terms(
    mv: &MomentVector,
    m: f64,
    t: f64,
) -> Result<Vec<ExpansionTerm>> {
    if m.fract() == 0.0 || !(m > 2.0) {
        return Err(Error::InvalidParameter(format!(
            "fractional expansion requires non-integer m > 2, got {m}"
        )));
    }
    if mv.order() < 1 {
        return Err(Error::InvalidParameter(
            "fractional expansion needs moments up to order 1".into(),
        ));
    }
    Ok(vec![
        ExpansionTerm {
            coefficient: mv.value(0),
            spec: KernelSpec { m, t, r: 0, j: 0, alpha: 0 },
            bessel_power: 0,
            provenance: (0, 0, 0),
        },
        ExpansionTerm {
            coefficient: mv.value(1),
            spec: KernelSpec { m, t, r: 0, j: 0, alpha: 1 },
            bessel_power: 0,
            provenance: (0, 0, 1),
        },
        ExpansionTerm {
            coefficient: t * mv.value(0),
            spec: KernelSpec { m, t, r: 1, j: 0, alpha: 0 },
            bessel_power: 0,
            provenance: (1, 0, 0),
        },
    ])
}

/// KdV-type expansion: `sum_{j <= n} (t^j/j!) (d_x M)^j sum_{alpha <= n-j}
/// M_alpha d_x^alpha G_m(t)`.
pub fn kdv_expansion_terms(
    mv: &MomentVector,
    n: usize,
    m: f64,
    t: f64,
) -> Result<Vec<ExpansionTerm>> {
    check_integer_order(m)?;
    check_order(n)?;
    if mv.order() < n {
        return Err(Error::InvalidParameter(format!(
            "moment vector holds orders 0..={} but the expansion needs {n}",
            mv.order()
        )));
    }
    let mut terms = Vec::new();
    for j in 0..=n as u32 {
        let weight = t.powi(j as i32) / factorial(j);
        for alpha in 0..=(n as u32 - j) {
            terms.push(ExpansionTerm {
                coefficient: weight * mv.value(alpha as usize),
                // (d_x M)^j is r = j in kernel-spec indexing
                spec: KernelSpec { m, t, r: j, j: 0, alpha },
                bessel_power: 0,
                provenance: (j, 0, alpha),
            });
        }
    }
    Ok(terms)
}

/// The unreplaced expansion whose dispersive terms still carry `K_m^{r+j}`
/// convolutions; identical term set to [`bbm_integer_expansion_terms`] but
/// each `(r, j)` term is convolved with `K_m^{r+j}`.
pub fn preliminary_expansion_terms(
    mv: &MomentVector,
    n: usize,
    m: f64,
    t: f64,
) -> Result<Vec<ExpansionTerm>> {
    let mut terms = bbm_integer_expansion_terms(mv, n, m, t)?;
    for term in &mut terms {
        term.bessel_power = term.provenance.0 + term.provenance.1;
    }
    Ok(terms)
}

/// Evaluate a term list on a grid by accumulating the composite symbol and
/// taking one inverse transform.
pub fn evaluate_terms(terms: &[ExpansionTerm], grid: &SpectralGrid) -> Result<Field> {
    for term in terms {
        term.spec.validate()?;
    }
    let mut spectrum = grid.spectrum_from_symbol(|_| Complex64::new(0.0, 0.0))?;
    for term in terms {
        let m = term.spec.m;
        let bessel = term.bessel_power;
        for (slot, c) in spectrum.coeffs_mut().iter_mut().enumerate() {
            let xi = grid.freq(slot);
            let mut v = term.spec.symbol(xi) * term.coefficient;
            if bessel > 0 {
                v *= (1.0 + xi.abs().powf(m)).powi(-(bessel as i32));
            }
            *c += v;
        }
    }
    let ny = grid.nyquist_slot();
    spectrum.coeffs_mut()[ny].im = 0.0;
    Ok(inverse(&spectrum))
}

fn expansion_from(
    v0: &Field,
    order_for_moments: usize,
    build: impl Fn(&MomentVector) -> Result<Vec<ExpansionTerm>>,
) -> Result<(Field, Vec<ExpansionTerm>)> {
    let mv = moments(v0, order_for_moments)?;
    let terms = build(&mv)?;
    let field = evaluate_terms(&terms, v0.grid())?;
    Ok((field, terms))
}

/// Partial sum for the generalized heat flow (moments from grid quadrature).
pub fn heat_expansion(v0: &Field, n: usize, m: f64, t: f64) -> Result<(Field, Vec<ExpansionTerm>)> {
    expansion_from(v0, n, |mv| heat_expansion_terms(mv, n, m, t))
}

/// Partial sum for the dissipative-dispersive flow, integer `m`.
pub fn linear_expansion_integer_m(
    v0: &Field,
    n: usize,
    m: f64,
    t: f64,
) -> Result<(Field, Vec<ExpansionTerm>)> {
    expansion_from(v0, n, |mv| bbm_integer_expansion_terms(mv, n, m, t))
}

/// Three-term sum for the dissipative-dispersive flow, fractional `m > 2`.
pub fn linear_expansion_fractional_m(
    v0: &Field,
    m: f64,
    t: f64,
) -> Result<(Field, Vec<ExpansionTerm>)> {
    expansion_from(v0, 1, |mv| bbm_fractional_expansion_terms(mv, m, t))
}

/// Partial sum for the KdV-type flow, integer `m`.
pub fn kdv_expansion(u0: &Field, n: usize, m: f64, t: f64) -> Result<(Field, Vec<ExpansionTerm>)> {
    expansion_from(u0, n, |mv| kdv_expansion_terms(mv, n, m, t))
}

/// Partial sum with the `K_m^{r+j}` convolutions still in place.
pub fn preliminary_expansion_with_k(
    v0: &Field,
    n: usize,
    m: f64,
    t: f64,
) -> Result<(Field, Vec<ExpansionTerm>)> {
    expansion_from(v0, n, |mv| preliminary_expansion_terms(mv, n, m, t))
}

/// `|| exact - partial ||_p`; the two fields must share a grid.
pub fn residual_norm(exact: &Field, partial_sum: &Field, p: f64) -> Result<f64> {
    if exact.grid() != partial_sum.grid() {
        return Err(Error::GridMismatch);
    }
    lp_norm(&exact.sub(partial_sum), p)
}
