//! Brute-force quadrature of the Wigner integrals and inner products.
//!
//! Nothing here knows about the closed forms: every routine takes plain
//! wavefunction callables and integrates the defining kernel on a composite
//! rule. It exists to cross-check the closed forms and to pin sign
//! conventions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bell::PhasePoint4;
use crate::error::{Error, Result};

/// Largest allowed `|integrand(edge)| / max |integrand|`.
pub const TRUNCATION_RATIO: f64 = 1e-13;

const GL_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Simpson,
    GaussLegendreComposite,
}

/// Integration over `[center - half_width, center + half_width]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSettings {
    pub half_width: f64,
    pub center: f64,
    pub points_per_unit: usize,
    pub rule: Rule,
}

impl QuadratureSettings {
    pub fn new(half_width: f64, points_per_unit: usize, rule: Rule) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::domain("half_width", half_width, "must be positive"));
        }
        if points_per_unit < 16 {
            return Err(Error::domain(
                "points_per_unit",
                points_per_unit as f64,
                "must be at least 16",
            ));
        }
        Ok(QuadratureSettings {
            half_width,
            center: 0.0,
            points_per_unit,
            rule,
        })
    }

    /// `Y = 2 sqrt(30 / lambda)`, 64 points per unit, composite Simpson.
    pub fn for_lambda(lambda: f64) -> Self {
        QuadratureSettings {
            half_width: 2.0 * (30.0 / lambda).sqrt(),
            center: 0.0,
            points_per_unit: 64,
            rule: Rule::Simpson,
        }
    }

    pub fn centered_at(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    pub fn with_points_per_unit(mut self, points_per_unit: usize) -> Self {
        self.points_per_unit = points_per_unit.max(16);
        self
    }

    pub fn with_rule(mut self, rule: Rule) -> Self {
        self.rule = rule;
        self
    }

    /// Raises the density to at least 16 samples per oscillation of an
    /// integrand whose fastest phase advances `angular_rate` radians per unit.
    pub fn with_oscillation_guard(mut self, angular_rate: f64) -> Self {
        let needed = (16.0 * angular_rate.abs() / (2.0 * PI)).ceil() as usize;
        self.points_per_unit = self.points_per_unit.max(needed);
        self
    }

    /// Nodes and weights. For `center == 0` the node set is exactly
    /// symmetric: `nodes[len - 1 - i] == -nodes[i]`.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let span = 2.0 * self.half_width;
        let target = (span * self.points_per_unit as f64).ceil() as usize;
        let half = match self.rule {
            Rule::Simpson => simpson_half(self.half_width, target),
            Rule::GaussLegendreComposite => gl_half(self.half_width, target),
        };
        mirror(half, self.center)
    }
}

/// Nodes on `[-Y, 0]` (inclusive of the midpoint node if any), to be mirrored.
type HalfNodes = (Vec<(f64, f64)>, Option<(f64, f64)>);

fn simpson_half(half_width: f64, target: usize) -> HalfNodes {
    // intervals per half, so the total count is a multiple of 4 and even per half
    let per_half = target.div_ceil(4).max(1) * 2;
    let step = half_width / per_half as f64;
    let mut left = Vec::with_capacity(per_half);
    for i in 0..per_half {
        let w = if i == 0 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        left.push((-half_width + i as f64 * step, w * step / 3.0));
    }
    // midpoint is an even index of the full rule, weight 2 (shared by both halves)
    (left, Some((0.0, 2.0 * step / 3.0)))
}

fn gl_half(half_width: f64, target: usize) -> HalfNodes {
    let panels = target.div_ceil(2 * GL_ORDER).max(1);
    let width = half_width / panels as f64;
    let rule = gauss_legendre(GL_ORDER);
    let mut left = Vec::with_capacity(panels * GL_ORDER);
    for p in 0..panels {
        let mid = -half_width + (p as f64 + 0.5) * width;
        for &(t, w) in &rule {
            left.push((mid + 0.5 * width * t, 0.5 * width * w));
        }
    }
    left.sort_by(|a, b| a.0.total_cmp(&b.0));
    (left, None)
}

fn mirror((left, mid): HalfNodes, center: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = left.iter().map(|&(y, w)| (y, w)).collect();
    out.extend(mid);
    out.extend(left.iter().rev().map(|&(y, w)| (-y, w)));
    if center != 0.0 {
        for node in &mut out {
            node.0 += center;
        }
    }
    out
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order as f64;
    let mut out = Vec::with_capacity(order);
    for i in 0..order {
        let mut t = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        out.push((t, 2.0 / ((1.0 - t * t) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn edge_ratio(edge: f64, max: f64) -> f64 {
    if max > 0.0 {
        edge / max
    } else {
        0.0
    }
}

fn check_truncation(edge: f64, max: f64) -> Result<()> {
    let ratio = edge_ratio(edge, max);
    if ratio > TRUNCATION_RATIO {
        Err(Error::Truncation { ratio })
    } else {
        Ok(())
    }
}

/// `integral f` over the settings' window, with the edge check.
pub fn integrate(f: impl Fn(f64) -> Complex64, settings: &QuadratureSettings) -> Result<Complex64> {
    let nodes = settings.nodes();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut max = 0.0f64;
    let mut edge = 0.0f64;
    let last = nodes.len() - 1;
    for (i, &(y, w)) in nodes.iter().enumerate() {
        let v = f(y);
        let mag = v.norm();
        max = max.max(mag);
        if i == 0 || i == last {
            edge = edge.max(mag);
        }
        sum += w * v;
    }
    check_truncation(edge, max)?;
    Ok(sum)
}

/// `(1/2 pi hbar) int e^{-i p y/hbar} psi(x + y/2) psi*(x - y/2) dy`.
///
/// Positive overall sign, so a normalized state integrates to `+1`.
pub fn wigner_numeric_1p(
    psi_fn: impl Fn(f64) -> Complex64,
    x: f64,
    p: f64,
    hbar: f64,
    settings: &QuadratureSettings,
) -> Result<Complex64> {
    let integral = integrate(
        |y| Complex64::cis(-p * y / hbar) * psi_fn(x + 0.5 * y) * psi_fn(x - 0.5 * y).conj(),
        settings,
    )?;
    Ok(integral / (2.0 * PI * hbar))
}

/// `(1/4 pi^2 hbar^2) iint e^{i (p_A y_A + p_B y_B)/hbar}
///  psi(x_A - y_A/2, x_B - y_B/2) psi*(x_A + y_A/2, x_B + y_B/2) dy_A dy_B`
/// on the tensor product of the settings' rule (which must be centered).
pub fn wigner_numeric_2p(
    psi2_fn: impl Fn(f64, f64) -> Complex64 + Sync,
    pt: &PhasePoint4,
    hbar: f64,
    settings: &QuadratureSettings,
) -> Result<Complex64> {
    let out = wigner_numeric_2p_momenta(psi2_fn, (pt.x_a, pt.x_b), &[(pt.p_a, pt.p_b)], hbar, settings)?;
    Ok(out[0])
}

/// Same integral at fixed `(x_A, x_B)` for several `(p_A, p_B)`; the
/// wavefunction lattice is tabulated once.
pub fn wigner_numeric_2p_momenta(
    psi2_fn: impl Fn(f64, f64) -> Complex64 + Sync,
    positions: (f64, f64),
    momenta: &[(f64, f64)],
    hbar: f64,
    settings: &QuadratureSettings,
) -> Result<Vec<Complex64>> {
    if settings.center != 0.0 {
        return Err(Error::domain(
            "center",
            settings.center,
            "two-particle quadrature needs a centered window",
        ));
    }
    let (x_a, x_b) = positions;
    let nodes = settings.nodes();
    let len = nodes.len();
    // the node set is exactly symmetric, so x + y_i/2 == x - y_{len-1-i}/2
    let table: Vec<Complex64> = (0..len * len)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / len, idx % len);
            psi2_fn(x_a - 0.5 * nodes[i].0, x_b - 0.5 * nodes[j].0)
        })
        .collect();
    let kernel: Vec<Complex64> = (0..len * len)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / len, idx % len);
            table[idx] * table[(len - 1 - i) * len + (len - 1 - j)].conj()
        })
        .collect();

    let mut max = 0.0f64;
    let mut edge = 0.0f64;
    for i in 0..len {
        for j in 0..len {
            let mag = kernel[i * len + j].norm();
            max = max.max(mag);
            if i == 0 || i == len - 1 || j == 0 || j == len - 1 {
                edge = edge.max(mag);
            }
        }
    }
    check_truncation(edge, max)?;

    let scale = 4.0 * PI * PI * hbar * hbar;
    momenta
        .iter()
        .map(|&(p_a, p_b)| {
            let phase_b: Vec<Complex64> = nodes
                .iter()
                .map(|&(y, w)| w * Complex64::cis(p_b * y / hbar))
                .collect();
            let sum = (0..len)
                .into_par_iter()
                .map(|i| {
                    let row = &kernel[i * len..(i + 1) * len];
                    let acc: Complex64 = row.iter().zip(&phase_b).map(|(k, ph)| k * ph).sum();
                    nodes[i].1 * Complex64::cis(p_a * nodes[i].0 / hbar) * acc
                })
                .collect::<Vec<_>>()
                .into_iter()
                .sum::<Complex64>();
            Ok(sum / scale)
        })
        .collect()
}

/// Composite Simpson nodes on `[a, b]` with `intervals` panels (rounded up
/// to even). For smooth, rapidly decaying integrands where the density
/// floor of [`QuadratureSettings`] would make a 4D tensor product too large.
pub fn simpson_rule(a: f64, b: f64, intervals: usize) -> Vec<(f64, f64)> {
    let n = intervals.max(2).div_ceil(2) * 2;
    let step = (b - a) / n as f64;
    (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (a + (b - a) * i as f64 / n as f64, w * step / 3.0)
        })
        .collect()
}

/// `<psi_a | psi_b> = int psi_a*(x) psi_b(x) dx`.
pub fn inner_product(
    psi_a: impl Fn(f64) -> Complex64,
    psi_b: impl Fn(f64) -> Complex64,
    settings: &QuadratureSettings,
) -> Result<Complex64> {
    integrate(|x| psi_a(x).conj() * psi_b(x), settings)
}

/// `int W(x, p) dp` over the settings' window (centered wherever the
/// caller put it).
pub fn marginal_p(
    w_fn: impl Fn(f64, f64) -> f64,
    x: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    Ok(integrate(|p| Complex64::new(w_fn(x, p), 0.0), settings)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground(lambda: f64) -> impl Fn(f64) -> Complex64 + Sync {
        move |x: f64| Complex64::new((2.0 * lambda / PI).powf(0.25) * (-lambda * x * x).exp(), 0.0)
    }

    fn analytic_ground_wigner(lambda: f64, hbar: f64, x: f64, p: f64) -> f64 {
        (-2.0 * lambda * x * x - p * p / (2.0 * lambda * hbar * hbar)).exp() / (PI * hbar)
    }

    #[test]
    fn plain_simpson_rule() {
        let rule = simpson_rule(-1.0, 2.0, 5);
        assert_eq!(rule.len(), 7);
        let cubic: f64 = rule.iter().map(|&(x, w)| w * x * x * x).sum();
        assert!((cubic - 15.0 / 4.0).abs() < 1e-14);
        let gauss: f64 = simpson_rule(-8.0, 8.0, 64).iter().map(|&(x, w)| w * (-x * x).exp()).sum();
        assert!((gauss - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn nodes_are_symmetric_and_integrate_polynomials() {
        for rule in [Rule::Simpson, Rule::GaussLegendreComposite] {
            let s = QuadratureSettings::new(3.0, 16, rule).unwrap();
            let nodes = s.nodes();
            let len = nodes.len();
            for i in 0..len {
                assert_eq!(nodes[len - 1 - i].0, -nodes[i].0);
            }
            let total: f64 = nodes.iter().map(|n| n.1).sum();
            assert!((total - 6.0).abs() < 1e-12, "{rule:?}");
            let cubic: f64 = nodes.iter().map(|&(y, w)| w * y * y).sum();
            assert!((cubic - 18.0).abs() < 1e-10, "{rule:?}");
        }
        let shifted = QuadratureSettings::new(1.0, 16, Rule::Simpson).unwrap().centered_at(5.0);
        let nodes = shifted.nodes();
        assert_eq!(nodes.first().unwrap().0, 4.0);
        assert_eq!(nodes.last().unwrap().0, 6.0);
    }

    #[test]
    fn gauss_legendre_weights() {
        let rule = gauss_legendre(8);
        let total: f64 = rule.iter().map(|r| r.1).sum();
        assert!((total - 2.0).abs() < 1e-14);
        // exact for degree 15
        let m14: f64 = rule.iter().map(|&(t, w)| w * t.powi(14)).sum();
        assert!((m14 - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn settings_validation() {
        assert!(QuadratureSettings::new(0.0, 64, Rule::Simpson).is_err());
        assert!(QuadratureSettings::new(5.0, 15, Rule::Simpson).is_err());
        let guarded = QuadratureSettings::for_lambda(0.5).with_oscillation_guard(100.0);
        assert!(guarded.points_per_unit >= 255);
    }

    #[test]
    fn ground_state_self_calibration() {
        let lambda = 0.5;
        let s = QuadratureSettings::for_lambda(lambda);
        let w = wigner_numeric_1p(ground(lambda), 0.0, 0.0, 1.0, &s).unwrap();
        assert!((w.re - 1.0 / PI).abs() < 1e-10 && w.im.abs() < 1e-10);
        for (x, p) in [(0.3, -1.2), (-1.0, 0.4), (2.0, 2.0)] {
            let w = wigner_numeric_1p(ground(lambda), x, p, 1.0, &s).unwrap();
            assert!((w.re - analytic_ground_wigner(lambda, 1.0, x, p)).abs() < 1e-9);
        }
        // hbar != 1 and lambda != 1/2
        let (lambda, hbar) = (1.5, 0.7);
        let s = QuadratureSettings::for_lambda(lambda);
        let w = wigner_numeric_1p(ground(lambda), 0.2, 0.5, hbar, &s).unwrap();
        assert!((w.re - analytic_ground_wigner(lambda, hbar, 0.2, 0.5)).abs() < 1e-9);
    }

    #[test]
    fn gauss_legendre_rule_agrees() {
        let s = QuadratureSettings::for_lambda(0.5).with_rule(Rule::GaussLegendreComposite);
        let w = wigner_numeric_1p(ground(0.5), 0.4, -0.9, 1.0, &s).unwrap();
        assert!((w.re - analytic_ground_wigner(0.5, 1.0, 0.4, -0.9)).abs() < 1e-10);
    }

    #[test]
    fn two_particle_product_ground_states() {
        let s = QuadratureSettings::for_lambda(0.5).with_points_per_unit(16);
        let g = ground(0.5);
        let pt = PhasePoint4::new(0.3, -0.5, -0.2, 0.8);
        let w = wigner_numeric_2p(|a, b| g(a) * g(b), &pt, 1.0, &s).unwrap();
        let expected = analytic_ground_wigner(0.5, 1.0, pt.x_a, pt.p_a)
            * analytic_ground_wigner(0.5, 1.0, pt.x_b, pt.p_b);
        assert!((w.re - expected).abs() < 1e-8 && w.im.abs() < 1e-10);
    }

    #[test]
    fn inner_products_and_marginals() {
        let s = QuadratureSettings::for_lambda(0.5);
        let n = inner_product(ground(0.5), ground(0.5), &s).unwrap();
        assert!((n.re - 1.0).abs() < 1e-10);

        let ps = QuadratureSettings::for_lambda(0.5);
        let w = |x: f64, p: f64| analytic_ground_wigner(0.5, 1.0, x, p);
        let m0 = marginal_p(w, 0.0, &ps).unwrap();
        assert!((m0 - (1.0 / PI).sqrt()).abs() < 1e-9);
        let m1 = marginal_p(w, 1.0, &ps).unwrap();
        assert!((m1 - (1.0 / PI).sqrt() * (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn truncation_is_reported() {
        let narrow = QuadratureSettings::new(1.0, 32, Rule::Simpson).unwrap();
        let err = wigner_numeric_1p(ground(0.5), 0.0, 0.0, 1.0, &narrow).unwrap_err();
        assert!(matches!(err, Error::Truncation { ratio } if ratio > 1e-3));
        assert!(inner_product(ground(0.5), ground(0.5), &narrow).is_err());
    }

    #[test]
    fn doubling_density_is_converged() {
        let s = QuadratureSettings::for_lambda(0.5);
        let s2 = s.with_points_per_unit(128);
        let psi = |x: f64| ground(0.5)(x) * Complex64::new(1.0, 0.3 * x);
        for (x, p) in [(0.0, 0.0), (0.5, -1.5), (-1.1, 0.7)] {
            let a = wigner_numeric_1p(psi, x, p, 1.0, &s).unwrap();
            let b = wigner_numeric_1p(psi, x, p, 1.0, &s2).unwrap();
            assert!((a - b).norm() < 1e-10);
        }
    }
}
