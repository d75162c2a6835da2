//! Physical parameters and stationary states of the q-deformed oscillator.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qseries::{b_factor_single, ln_q_factorial};

/// Smallest admissible `q`; `1 - Q_MARGIN` is the largest.
pub const Q_MARGIN: f64 = 1e-9;

/// Largest quantum number accepted anywhere in the crate.
pub const MAX_QUANTUM_NUMBER: usize = 64;

/// Constants of one oscillator: `m`, `omega`, `hbar`, the deformation `q`,
/// and the derived `lambda = m omega / (2 hbar)` and `h = sqrt(-ln q / lambda)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformationParams {
    mass: f64,
    omega: f64,
    hbar: f64,
    lambda: f64,
    q: f64,
    h: f64,
}

impl DeformationParams {
    pub fn new(mass: f64, omega: f64, hbar: f64, q: f64) -> Result<Self> {
        for (field, value) in [("mass", mass), ("omega", omega), ("hbar", hbar)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(field, value, "must be finite and positive"));
            }
        }
        if !(q.is_finite() && (Q_MARGIN..=1.0 - Q_MARGIN).contains(&q)) {
            return Err(Error::domain("q", q, "must lie in [1e-9, 1 - 1e-9]"));
        }
        let lambda = mass * omega / (2.0 * hbar);
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::domain("lambda", lambda, "m*omega/(2*hbar) must be finite"));
        }
        let h = (-q.ln() / lambda).sqrt();
        Ok(DeformationParams {
            mass,
            omega,
            hbar,
            lambda,
            q,
            h,
        })
    }

    /// `m = omega = hbar = 1`, so `lambda = 1/2`.
    pub fn unit(q: f64) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, q)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Momentum shift per quantum of the Wigner peak, `2 lambda hbar h`
    /// (`= h` for unit constants). State `n` peaks near `p = -n * shift`.
    pub fn momentum_shift(&self) -> f64 {
        2.0 * self.lambda * self.hbar * self.h
    }

    /// Whether `m`, `omega` and `hbar` agree, i.e. both share one `lambda`.
    pub fn shares_constants(&self, other: &DeformationParams) -> bool {
        self.mass == other.mass && self.omega == other.omega && self.hbar == other.hbar
    }
}

/// Builds [`DeformationParams`] from the physical constants and `q`.
pub fn make_params(mass: f64, omega: f64, hbar: f64, q: f64) -> Result<DeformationParams> {
    DeformationParams::new(mass, omega, hbar, q)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureStateSpec {
    pub n: usize,
    pub params: DeformationParams,
}

impl PureStateSpec {
    pub fn new(n: usize, params: DeformationParams) -> Result<Self> {
        check_quantum_number("n", n)?;
        Ok(PureStateSpec { n, params })
    }
}

pub(crate) fn check_quantum_number(field: &'static str, n: usize) -> Result<()> {
    if n > MAX_QUANTUM_NUMBER {
        Err(Error::domain(field, n as f64, "exceeds the quantum-number cap of 64"))
    } else {
        Ok(())
    }
}

/// `i^n`, exactly.
pub fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `ln |c_n|` with `|c_n| = (2 lambda/pi)^{1/4} q^{n/2} (q;q)_n^{-1/2}`.
pub(crate) fn ln_abs_normalization(n: usize, params: &DeformationParams) -> f64 {
    0.25 * (2.0 * params.lambda / PI).ln() + 0.5 * n as f64 * params.q.ln()
        - 0.5 * ln_q_factorial(params.q, n)
}

/// `c_n = (2 lambda/pi)^{1/4} i^n q^{n/2} (q;q)_n^{-1/2}`.
pub fn normalization_c(n: usize, params: &DeformationParams) -> Complex64 {
    i_pow(n as i64) * ln_abs_normalization(n, params).exp()
}

/// The real coefficients of one stationary state,
/// `psi_n(x) = i^n e^{-lambda x^2} sum_k terms[k] e^{-2 i lambda h x k}`,
/// with `terms[k] = |c_n| (q^-n;q)_k / (q;q)_k q^{nk - k^2/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateCoefficients {
    pub n: usize,
    pub params: DeformationParams,
    pub phase: Complex64,
    pub terms: Vec<f64>,
}

impl StateCoefficients {
    pub fn new(spec: &PureStateSpec) -> Result<Self> {
        check_quantum_number("n", spec.n)?;
        let params = spec.params;
        let ln_c = ln_abs_normalization(spec.n, &params);
        let terms = (0..=spec.n)
            .map(|k| {
                let b = b_factor_single(spec.n, 0, k, 0, params.q)?;
                Ok(f64::from(b.sign()) * (ln_c + b.log_magnitude()).exp())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StateCoefficients {
            n: spec.n,
            params,
            phase: i_pow(spec.n as i64),
            terms,
        })
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let theta = -2.0 * self.params.lambda * self.params.h * x;
        let sum: Complex64 = self
            .terms
            .iter()
            .enumerate()
            .map(|(k, &t)| t * Complex64::cis(theta * k as f64))
            .sum();
        self.phase * sum * (-self.params.lambda * x * x).exp()
    }

    /// Constant `C` with `|psi_n(x)| <= C e^{-lambda x^2}`.
    pub fn envelope_constant(&self) -> f64 {
        self.terms.iter().map(|t| t.abs()).sum()
    }
}

/// `psi_n(x)` of the q-deformed oscillator.
pub fn psi(spec: &PureStateSpec, x: f64) -> Result<Complex64> {
    Ok(StateCoefficients::new(spec)?.eval(x))
}

/// Ordinary oscillator eigenfunction in the same `lambda` convention,
/// `(2 lambda/pi)^{1/4} (2^n n!)^{-1/2} H_n(sqrt(2 lambda) x) e^{-lambda x^2}`.
pub fn ho_reference_psi(n: usize, lambda: f64, x: f64) -> f64 {
    let y = (2.0 * lambda).sqrt() * x;
    // normalized recurrence for H_k / sqrt(2^k k!)
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * y * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (2.0 * lambda / PI).powf(0.25) * cur * (-lambda * x * x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_examples() {
        let p = make_params(1.0, 1.0, 1.0, 0.001).unwrap();
        assert_eq!(p.lambda(), 0.5);
        assert!((p.h() - 3.716_922_188_849_838).abs() < 1e-12);

        let p = make_params(1.0, 1.0, 1.0, (-1.0f64).exp()).unwrap();
        assert!((p.h() - 2f64.sqrt()).abs() < 1e-14);

        let p = make_params(2.0, 3.0, 1.0, 0.5).unwrap();
        assert_eq!(p.lambda(), 3.0);
        assert!((p.h() - (2f64.ln() / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn q_round_trip() {
        for q in [1e-9, 1e-3, 0.37, 0.9, 1.0 - 1e-9] {
            let p = make_params(1.3, 0.7, 0.9, q).unwrap();
            let back = (-p.lambda() * p.h() * p.h()).exp();
            assert!((back - q).abs() <= 1e-12 * q, "q={q}");
        }
    }

    #[test]
    fn rejects_bad_params() {
        let field = |r: Result<DeformationParams>| match r {
            Err(Error::Domain { field, .. }) => field,
            other => panic!("expected domain error, got {other:?}"),
        };
        assert_eq!(field(make_params(0.0, 1.0, 1.0, 0.5)), "mass");
        assert_eq!(field(make_params(1.0, -1.0, 1.0, 0.5)), "omega");
        assert_eq!(field(make_params(1.0, 1.0, f64::NAN, 0.5)), "hbar");
        assert_eq!(field(make_params(1.0, 1.0, 1.0, 1.0)), "q");
        assert_eq!(field(make_params(1.0, 1.0, 1.0, 0.0)), "q");
        assert_eq!(field(make_params(1.0, 1.0, 1.0, 1e-10)), "q");
        assert!(PureStateSpec::new(65, DeformationParams::unit(0.5).unwrap()).is_err());
    }

    #[test]
    fn normalization_examples() {
        let p = DeformationParams::unit(0.3).unwrap();
        let c0 = normalization_c(0, &p);
        assert!((c0.re - (1.0 / PI).powf(0.25)).abs() < 1e-15 && c0.im == 0.0);

        let p = DeformationParams::unit(0.5).unwrap();
        let c1 = normalization_c(1, &p);
        assert!(c1.re == 0.0 && (c1.im - (1.0 / PI).powf(0.25)).abs() < 1e-15);

        let p = DeformationParams::unit(0.9).unwrap();
        let c2 = normalization_c(2, &p);
        let expected = (1.0 / PI).sqrt() * 0.81 / ((1.0 - 0.9) * (1.0 - 0.81));
        assert!((c2.norm_sqr() - expected).abs() < 1e-13 * expected);
    }

    #[test]
    fn psi_examples() {
        for q in [0.001, 0.5, 0.95] {
            let spec = PureStateSpec::new(0, DeformationParams::unit(q).unwrap()).unwrap();
            for x in [-2.0, 0.0, 0.7] {
                let v = psi(&spec, x).unwrap();
                let ho = ho_reference_psi(0, 0.5, x);
                assert!((v.re - ho).abs() < 1e-15 && v.im == 0.0);
            }
        }
        let p = DeformationParams::unit(0.5).unwrap();
        let spec = PureStateSpec::new(1, p).unwrap();
        let v = psi(&spec, 0.0).unwrap();
        let expected = normalization_c(1, &p) * (1.0 - 2f64.sqrt());
        assert!((v - expected).norm() < 1e-15);
    }

    #[test]
    fn ho_reference_values() {
        assert!((ho_reference_psi(0, 0.5, 0.0) - (1.0 / PI).powf(0.25)).abs() < 1e-15);
        assert_eq!(ho_reference_psi(1, 0.5, 0.0), 0.0);
        // 50-digit evaluation of the explicit H_4 formula
        assert!((ho_reference_psi(4, 0.5, 1.3) - (-0.385_655_452_466_583_15)).abs() < 1e-14);
    }

    #[test]
    fn envelope_bound() {
        for q in [0.001, 0.4, 0.97] {
            for n in 0..=8 {
                let spec = PureStateSpec::new(n, DeformationParams::unit(q).unwrap()).unwrap();
                let coeffs = StateCoefficients::new(&spec).unwrap();
                let c = coeffs.envelope_constant();
                for i in -40..=40 {
                    let x = i as f64 * 0.25;
                    let bound = c * (-0.5 * x * x).exp();
                    assert!(coeffs.eval(x).norm() <= bound * (1.0 + 1e-12));
                }
            }
        }
    }
}
