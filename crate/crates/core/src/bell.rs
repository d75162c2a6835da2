//! Wigner functions of the four Bell states built from two q-oscillator
//! levels, `|0> -> psi_n` and `|1> -> psi_m`.
//!
//! Each Bell Wigner function is
//!
//! ```text
//! W = e^{-2 lambda_A x_A^2 - 2 lambda_B x_B^2} / (4 pi hbar^2 sqrt(lambda_A lambda_B))
//!     * [W1 +/- W2 + W3]
//! ```
//!
//! where every `W_i` is a quadruple sum of coefficient products weighted by
//! the momentum Gaussians [`epsilon`] and the position fringes [`kappa`].
//! `W1`/`W3` are the direct terms and `W2` is the interference term; only
//! `W2` changes sign between the `+` and `-` variants.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oscillator::{check_quantum_number, DeformationParams, PureStateSpec, StateCoefficients};
use crate::wigner2::{PairTable, IMAGINARY_RESIDUE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellVariant {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellFamily {
    /// `|01> +/- |10>`
    Psi,
    /// `|00> +/- |11>`
    Phi,
}

impl BellVariant {
    pub const ALL: [BellVariant; 4] = [
        BellVariant::PsiPlus,
        BellVariant::PsiMinus,
        BellVariant::PhiPlus,
        BellVariant::PhiMinus,
    ];

    pub fn family(self) -> BellFamily {
        match self {
            BellVariant::PsiPlus | BellVariant::PsiMinus => BellFamily::Psi,
            BellVariant::PhiPlus | BellVariant::PhiMinus => BellFamily::Phi,
        }
    }

    /// Relative sign of the two product states.
    pub fn sign(self) -> f64 {
        match self {
            BellVariant::PsiPlus | BellVariant::PhiPlus => 1.0,
            BellVariant::PsiMinus | BellVariant::PhiMinus => -1.0,
        }
    }

    pub fn with_sign(self, positive: bool) -> BellVariant {
        match (self.family(), positive) {
            (BellFamily::Psi, true) => BellVariant::PsiPlus,
            (BellFamily::Psi, false) => BellVariant::PsiMinus,
            (BellFamily::Phi, true) => BellVariant::PhiPlus,
            (BellFamily::Phi, false) => BellVariant::PhiMinus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BellVariant::PsiPlus => "psi+",
            BellVariant::PsiMinus => "psi-",
            BellVariant::PhiPlus => "phi+",
            BellVariant::PhiMinus => "phi-",
        }
    }
}

impl fmt::Display for BellVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BellVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        BellVariant::ALL
            .into_iter()
            .find(|v| v.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown Bell variant `{s}` (expected psi+, psi-, phi+ or phi-)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint4 {
    pub x_a: f64,
    pub p_a: f64,
    pub x_b: f64,
    pub p_b: f64,
}

impl PhasePoint4 {
    pub fn new(x_a: f64, p_a: f64, x_b: f64, p_b: f64) -> Self {
        PhasePoint4 { x_a, p_a, x_b, p_b }
    }

    /// Particle labels exchanged.
    pub fn swapped(&self) -> Self {
        PhasePoint4::new(self.x_b, self.p_b, self.x_a, self.p_a)
    }

    pub fn is_finite(&self) -> bool {
        [self.x_a, self.p_a, self.x_b, self.p_b]
            .iter()
            .all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellSpec {
    pub variant: BellVariant,
    pub n: usize,
    pub m: usize,
    pub params_a: DeformationParams,
    pub params_b: DeformationParams,
}

impl BellSpec {
    pub fn new(
        variant: BellVariant,
        n: usize,
        m: usize,
        params_a: DeformationParams,
        params_b: DeformationParams,
    ) -> Result<Self> {
        check_quantum_number("n", n)?;
        check_quantum_number("m", m)?;
        if n == m {
            return Err(Error::domain("m", m as f64, "the two levels must differ (n != m)"));
        }
        if params_a.hbar() != params_b.hbar() {
            return Err(Error::ParamMismatch(
                "both particles must use the same hbar".into(),
            ));
        }
        Ok(BellSpec {
            variant,
            n,
            m,
            params_a,
            params_b,
        })
    }

    pub fn with_variant(mut self, variant: BellVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn hbar(&self) -> f64 {
        self.params_a.hbar()
    }

    /// `e^{-2 lambda_A x_A^2 - 2 lambda_B x_B^2} / (4 pi hbar^2 sqrt(lambda_A lambda_B))`.
    pub fn prefactor(&self, x_a: f64, x_b: f64) -> f64 {
        let (la, lb) = (self.params_a.lambda(), self.params_b.lambda());
        let hbar = self.hbar();
        (-2.0 * la * x_a * x_a - 2.0 * lb * x_b * x_b).exp() / (4.0 * PI * hbar * hbar * (la * lb).sqrt())
    }
}

/// Position-space two-particle wavefunction of a Bell spec.
#[derive(Clone, Debug)]
pub struct BellWavefunction {
    variant: BellVariant,
    n_a: StateCoefficients,
    m_a: StateCoefficients,
    n_b: StateCoefficients,
    m_b: StateCoefficients,
}

impl BellWavefunction {
    pub fn new(spec: &BellSpec) -> Result<Self> {
        let coeffs = |n, params| StateCoefficients::new(&PureStateSpec::new(n, params)?);
        Ok(BellWavefunction {
            variant: spec.variant,
            n_a: coeffs(spec.n, spec.params_a)?,
            m_a: coeffs(spec.m, spec.params_a)?,
            n_b: coeffs(spec.n, spec.params_b)?,
            m_b: coeffs(spec.m, spec.params_b)?,
        })
    }

    pub fn eval(&self, x_a: f64, x_b: f64) -> Complex64 {
        let sign = self.variant.sign();
        let value = match self.variant.family() {
            BellFamily::Psi => {
                self.n_a.eval(x_a) * self.m_b.eval(x_b) + sign * self.m_a.eval(x_a) * self.n_b.eval(x_b)
            }
            BellFamily::Phi => {
                self.n_a.eval(x_a) * self.n_b.eval(x_b) + sign * self.m_a.eval(x_a) * self.m_b.eval(x_b)
            }
        };
        FRAC_1_SQRT_2 * value
    }
}

pub fn bell_wavefunction(spec: &BellSpec, x_a: f64, x_b: f64) -> Result<Complex64> {
    Ok(BellWavefunction::new(spec)?.eval(x_a, x_b))
}

/// `cos(2 lambda_A x_A h_A (a1 - a2) + 2 lambda_B x_B h_B (b1 - b2))`.
///
/// The first index pair belongs to particle A, the second to particle B.
pub fn kappa(a1: usize, a2: usize, b1: usize, b2: usize, spec: &BellSpec, x_a: f64, x_b: f64) -> f64 {
    let (pa, pb) = (&spec.params_a, &spec.params_b);
    let da = a1 as f64 - a2 as f64;
    let db = b1 as f64 - b2 as f64;
    (2.0 * pa.lambda() * x_a * pa.h() * da + 2.0 * pb.lambda() * x_b * pb.h() * db).cos()
}

/// `exp(-((a1 + a2) h_A lambda_A + p_A/hbar)^2 / (2 lambda_A))
///  * exp(-((b1 + b2) h_B lambda_B + p_B/hbar)^2 / (2 lambda_B))`.
///
/// Same index roles as [`kappa`].
pub fn epsilon(a1: usize, a2: usize, b1: usize, b2: usize, spec: &BellSpec, p_a: f64, p_b: f64) -> f64 {
    let hbar = spec.hbar();
    let gauss = |params: &DeformationParams, total: usize, p: f64| {
        let c = total as f64 * params.h() * params.lambda() + p / hbar;
        (-c * c / (2.0 * params.lambda())).exp()
    };
    gauss(&spec.params_a, a1 + a2, p_a) * gauss(&spec.params_b, b1 + b2, p_b)
}

/// The three bracketed sums at one point, plus the prefactor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellTerms {
    pub prefactor: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub sign: f64,
}

impl BellTerms {
    pub fn value(&self) -> f64 {
        self.prefactor * (self.w1 + self.sign * self.w2 + self.w3)
    }

    /// `prefactor * W2`, unsigned by the variant.
    pub fn interference(&self) -> f64 {
        self.prefactor * self.w2
    }

    pub fn direct(&self) -> f64 {
        self.prefactor * (self.w1 + self.w3)
    }
}

/// `(sum T eps cos, sum T eps sin)` over one particle's table.
fn particle_sums(table: &PairTable, point: &ParticlePoint) -> (f64, f64) {
    let (mut c, mut s) = (0.0, 0.0);
    for k1 in 0..table.rows() {
        for k2 in 0..table.cols() {
            let t = table.get(k1, k2) * point.eps[k1 + k2];
            let d = point.offset + k1 - k2;
            c += t * point.cos[d];
            s += t * point.sin[d];
        }
    }
    (c, s)
}

/// One `W_i`: `multiplier * sum_{a1,a2,b1,b2} A[a1][a2] B[b1][b2] eps kappa`.
#[derive(Clone, Debug)]
struct QuadTerm {
    multiplier: f64,
    a: PairTable,
    b: PairTable,
}

/// Per-point lookup tables for one particle: the momentum Gaussians indexed
/// by `a1 + a2` and the fringe phase indexed by `a1 - a2`.
struct ParticlePoint {
    eps: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    offset: usize,
}

impl ParticlePoint {
    fn new(params: &DeformationParams, hbar: f64, max_index: usize, x: f64, p: f64) -> Self {
        let (lambda, h) = (params.lambda(), params.h());
        let eps = (0..=2 * max_index)
            .map(|t| {
                let c = t as f64 * h * lambda + p / hbar;
                (-c * c / (2.0 * lambda)).exp()
            })
            .collect();
        let (mut cos, mut sin) = (Vec::new(), Vec::new());
        for d in -(max_index as i64)..=(max_index as i64) {
            let (s, c) = (2.0 * lambda * x * h * d as f64).sin_cos();
            cos.push(c);
            sin.push(s);
        }
        ParticlePoint {
            eps,
            cos,
            sin,
            offset: max_index,
        }
    }
}

impl QuadTerm {
    fn new(
        multiplier: f64,
        (j_a, l_a): (usize, usize),
        (j_b, l_b): (usize, usize),
        spec: &BellSpec,
    ) -> Result<Self> {
        let (pa, pb) = (&spec.params_a, &spec.params_b);
        Ok(QuadTerm {
            multiplier,
            a: PairTable::new(j_a, l_a, pa, pa)?,
            b: PairTable::new(j_b, l_b, pb, pb)?,
        })
    }

    fn evaluate(&self, pa: &ParticlePoint, pb: &ParticlePoint) -> Result<f64> {
        // kappa = cos(theta_a + theta_b) splits the quadruple sum into
        // per-particle sums, so each particle is reduced on its own
        let (ca, sa) = particle_sums(&self.a, pa);
        let (cb, sb) = particle_sums(&self.b, pb);
        let sum = ca * cb - sa * sb;
        let total = self.multiplier * self.a.phase * self.b.phase * sum;
        if total.im.abs() > IMAGINARY_RESIDUE * total.norm() {
            return Err(Error::InternalConsistency(format!(
                "coefficient phase left imaginary residue {:e}",
                total.im
            )));
        }
        Ok(total.re)
    }
}

/// A Bell spec with its coefficient tables precomputed; evaluation then
/// only builds the per-point Gaussian and fringe tables.
#[derive(Clone, Debug)]
pub struct BellEvaluator {
    spec: BellSpec,
    terms: [QuadTerm; 3],
    max_index: usize,
}

impl BellEvaluator {
    pub fn new(spec: &BellSpec) -> Result<Self> {
        let (n, m) = (spec.n, spec.m);
        // Table shapes follow the summation-index roles of each term.
        let terms = match spec.variant.family() {
            BellFamily::Psi => [
                QuadTerm::new(1.0, (n, n), (m, m), spec)?,
                QuadTerm::new(2.0, (n, m), (m, n), spec)?,
                QuadTerm::new(1.0, (m, m), (n, n), spec)?,
            ],
            BellFamily::Phi => [
                QuadTerm::new(1.0, (n, n), (n, n), spec)?,
                QuadTerm::new(2.0, (n, m), (n, m), spec)?,
                QuadTerm::new(1.0, (m, m), (m, m), spec)?,
            ],
        };
        Ok(BellEvaluator {
            spec: *spec,
            terms,
            max_index: n.max(m),
        })
    }

    pub fn spec(&self) -> &BellSpec {
        &self.spec
    }

    pub fn terms(&self, pt: &PhasePoint4) -> Result<BellTerms> {
        if !pt.is_finite() {
            return Err(Error::InternalConsistency(format!("non-finite point {pt:?}")));
        }
        let hbar = self.spec.hbar();
        let pa = ParticlePoint::new(&self.spec.params_a, hbar, self.max_index, pt.x_a, pt.p_a);
        let pb = ParticlePoint::new(&self.spec.params_b, hbar, self.max_index, pt.x_b, pt.p_b);
        let out = BellTerms {
            prefactor: self.spec.prefactor(pt.x_a, pt.x_b),
            w1: self.terms[0].evaluate(&pa, &pb)?,
            w2: self.terms[1].evaluate(&pa, &pb)?,
            w3: self.terms[2].evaluate(&pa, &pb)?,
            sign: self.spec.variant.sign(),
        };
        if !out.value().is_finite() {
            return Err(Error::InternalConsistency(format!(
                "non-finite Bell Wigner value at {pt:?}"
            )));
        }
        Ok(out)
    }

    pub fn evaluate(&self, pt: &PhasePoint4) -> Result<f64> {
        Ok(self.terms(pt)?.value())
    }
}

pub fn bell_wigner(spec: &BellSpec, pt: &PhasePoint4) -> Result<f64> {
    BellEvaluator::new(spec)?.evaluate(pt)
}

pub fn bell_interference_term(spec: &BellSpec, pt: &PhasePoint4) -> Result<f64> {
    Ok(BellEvaluator::new(spec)?.terms(pt)?.interference())
}
