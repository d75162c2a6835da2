//! Closed-form Wigner function of `a psi_n + b psi_m`.
//!
//! The cross function
//!
//! ```text
//! W_{j,l}(x, p) = c_j* c_l sum_{k<=j} sum_{s<=l} B^{j,l}(k, s)
//!                 e^{2 i x lambda (h_j k - h_l s)}
//!                 e^{-(lambda h_j k + lambda h_l s + p/hbar)^2 / (2 lambda)}
//! ```
//!
//! is the Gauss integral of `e^{-i p y/hbar} psi_l(x + y/2) psi_j*(x - y/2)`
//! with the common factor `sqrt(2 pi / lambda) e^{-2 lambda x^2}` pulled out.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oscillator::{check_quantum_number, i_pow, ln_abs_normalization, DeformationParams};
use crate::qseries::b_factor;

/// An assembled Wigner value must satisfy `|Im W| <= IMAGINARY_RESIDUE (1 + |Re W|)`.
pub const IMAGINARY_RESIDUE: f64 = 1e-10;

/// Overall sign of the `1/(2 pi hbar)` prefactor.
///
/// `Positive` gives a Wigner function that integrates to `+1`.
/// `AsPrinted` keeps the leading minus sign of the printed single-particle
/// definition; it integrates to `-1` and is only kept as a canary for the
/// verification suite.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PrefactorSign {
    #[default]
    Positive,
    AsPrinted,
}

impl PrefactorSign {
    pub fn factor(self) -> f64 {
        match self {
            PrefactorSign::Positive => 1.0,
            PrefactorSign::AsPrinted => -1.0,
        }
    }
}

/// `|c_j| |c_l| B^{j,l}(k, s)` for all `k <= j`, `s <= l`, together with the
/// unit phase of `c_j* c_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairTable {
    pub j: usize,
    pub l: usize,
    pub phase: Complex64,
    values: Vec<f64>,
}

impl PairTable {
    pub fn new(
        j: usize,
        l: usize,
        params_j: &DeformationParams,
        params_l: &DeformationParams,
    ) -> Result<Self> {
        check_quantum_number("j", j)?;
        check_quantum_number("l", l)?;
        let ln_c = ln_abs_normalization(j, params_j) + ln_abs_normalization(l, params_l);
        let mut values = Vec::with_capacity((j + 1) * (l + 1));
        for k in 0..=j {
            for s in 0..=l {
                let b = b_factor(j, l, k, s, params_j.q(), params_l.q())?;
                values.push(f64::from(b.sign()) * (ln_c + b.log_magnitude()).exp());
            }
        }
        Ok(PairTable {
            j,
            l,
            phase: i_pow(j as i64).conj() * i_pow(l as i64),
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.j + 1
    }

    pub fn cols(&self) -> usize {
        self.l + 1
    }

    #[inline]
    pub fn get(&self, k: usize, s: usize) -> f64 {
        self.values[k * (self.l + 1) + s]
    }
}

fn check_shared(params_j: &DeformationParams, params_l: &DeformationParams) -> Result<()> {
    if params_j.shares_constants(params_l) {
        Ok(())
    } else {
        Err(Error::ParamMismatch(
            "both branches must share mass, omega and hbar".into(),
        ))
    }
}

/// `W_{j,l}(x, p)` evaluated term by term from [`b_factor`], with each
/// term's magnitude and Gaussian exponent combined in the log domain.
pub fn w_generic(
    j: usize,
    l: usize,
    params_j: &DeformationParams,
    params_l: &DeformationParams,
    x: f64,
    p: f64,
) -> Result<Complex64> {
    check_shared(params_j, params_l)?;
    check_quantum_number("j", j)?;
    check_quantum_number("l", l)?;
    let lambda = params_j.lambda();
    let (h_j, h_l) = (params_j.h(), params_l.h());
    let p_scaled = p / params_j.hbar();
    let ln_c = ln_abs_normalization(j, params_j) + ln_abs_normalization(l, params_l);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..=j {
        for s in 0..=l {
            let b = b_factor(j, l, k, s, params_j.q(), params_l.q())?;
            let centre = lambda * (h_j * k as f64 + h_l * s as f64) + p_scaled;
            let ln_mag = ln_c + b.log_magnitude() - centre * centre / (2.0 * lambda);
            let phase = 2.0 * x * lambda * (h_j * k as f64 - h_l * s as f64);
            sum += f64::from(b.sign()) * ln_mag.exp() * Complex64::cis(phase);
        }
    }
    Ok(i_pow(j as i64).conj() * i_pow(l as i64) * sum)
}

/// Same sum as [`w_generic`], driven by a precomputed table.
pub(crate) fn cross_sum(
    table: &PairTable,
    lambda: f64,
    h_j: f64,
    h_l: f64,
    x: f64,
    p_scaled: f64,
) -> Complex64 {
    let theta_j = 2.0 * x * lambda * h_j;
    let theta_l = -2.0 * x * lambda * h_l;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..table.rows() {
        let mut row = Complex64::new(0.0, 0.0);
        for s in 0..table.cols() {
            let centre = lambda * (h_j * k as f64 + h_l * s as f64) + p_scaled;
            let g = (-centre * centre / (2.0 * lambda)).exp();
            row += table.get(k, s) * g * Complex64::cis(theta_l * s as f64);
        }
        sum += row * Complex64::cis(theta_j * k as f64);
    }
    table.phase * sum
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuperpositionSpec {
    pub amp_a: Complex64,
    pub amp_b: Complex64,
    pub n: usize,
    pub m: usize,
    pub params_a: DeformationParams,
    pub params_b: DeformationParams,
}

impl SuperpositionSpec {
    pub fn new(
        amp_a: Complex64,
        amp_b: Complex64,
        n: usize,
        m: usize,
        params_a: DeformationParams,
        params_b: DeformationParams,
    ) -> Result<Self> {
        check_quantum_number("n", n)?;
        check_quantum_number("m", m)?;
        check_shared(&params_a, &params_b)?;
        let norm = amp_a.norm_sqr() + amp_b.norm_sqr();
        let drift = (norm - 1.0).abs();
        if drift.is_nan() || drift > 1e-12 {
            return Err(Error::domain(
                "amplitudes",
                norm,
                "|a|^2 + |b|^2 must equal 1",
            ));
        }
        Ok(SuperpositionSpec {
            amp_a,
            amp_b,
            n,
            m,
            params_a,
            params_b,
        })
    }

    /// `psi_n` alone (`a = 1`, `b = 0`).
    pub fn pure(n: usize, params: DeformationParams) -> Result<Self> {
        Self::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            n,
            n,
            params,
            params,
        )
    }

    /// Equal-weight superposition `(psi_n + psi_m) / sqrt 2` with one `q`.
    pub fn balanced(n: usize, m: usize, params: DeformationParams) -> Result<Self> {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(a, a, n, m, params, params)
    }

    pub fn lambda(&self) -> f64 {
        self.params_a.lambda()
    }

    pub fn hbar(&self) -> f64 {
        self.params_a.hbar()
    }
}

/// Per-spec tables for evaluating the superposition at many points.
#[derive(Clone, Debug)]
pub struct SuperpositionEvaluator {
    spec: SuperpositionSpec,
    sign: PrefactorSign,
    // (weight, table, h_j, h_l) for the four terms nn, nm, mn, mm
    terms: Vec<(Complex64, PairTable, f64, f64)>,
}

impl SuperpositionEvaluator {
    pub fn new(spec: &SuperpositionSpec, sign: PrefactorSign) -> Result<Self> {
        let (a, b) = (spec.amp_a, spec.amp_b);
        let (pa, pb) = (&spec.params_a, &spec.params_b);
        let layout = [
            (a.conj() * a, spec.n, pa, spec.n, pa),
            (a.conj() * b, spec.n, pa, spec.m, pb),
            (b.conj() * a, spec.m, pb, spec.n, pa),
            (b.conj() * b, spec.m, pb, spec.m, pb),
        ];
        let mut terms = Vec::with_capacity(4);
        for (weight, j, params_j, l, params_l) in layout {
            if weight == Complex64::new(0.0, 0.0) {
                continue;
            }
            let table = PairTable::new(j, l, params_j, params_l)?;
            terms.push((weight, table, params_j.h(), params_l.h()));
        }
        Ok(SuperpositionEvaluator {
            spec: *spec,
            sign,
            terms,
        })
    }

    pub fn spec(&self) -> &SuperpositionSpec {
        &self.spec
    }

    pub fn sign(&self) -> PrefactorSign {
        self.sign
    }

    pub fn prefactor(&self, x: f64) -> f64 {
        let lambda = self.spec.lambda();
        self.sign.factor() / (2.0 * PI * self.spec.hbar())
            * (2.0 * PI / lambda).sqrt()
            * (-2.0 * lambda * x * x).exp()
    }

    pub fn evaluate(&self, x: f64, p: f64) -> Result<f64> {
        let lambda = self.spec.lambda();
        let p_scaled = p / self.spec.hbar();
        let mut sum = Complex64::new(0.0, 0.0);
        for (weight, table, h_j, h_l) in &self.terms {
            sum += weight * cross_sum(table, lambda, *h_j, *h_l, x, p_scaled);
        }
        let w = self.prefactor(x) * sum;
        if !(w.re.is_finite() && w.im.is_finite()) {
            return Err(Error::InternalConsistency(format!(
                "non-finite Wigner value at x={x}, p={p}"
            )));
        }
        if w.im.abs() > IMAGINARY_RESIDUE * (1.0 + w.re.abs()) {
            return Err(Error::InternalConsistency(format!(
                "imaginary residue {:e} of W = {:e} at x={x}, p={p}",
                w.im, w.re
            )));
        }
        Ok(w.re)
    }
}

/// Wigner function of the superposition at one point, positive convention.
pub fn wigner_superposition(spec: &SuperpositionSpec, x: f64, p: f64) -> Result<f64> {
    SuperpositionEvaluator::new(spec, PrefactorSign::Positive)?.evaluate(x, p)
}
