//! Rectangular phase-space windows, 2D slices of the Wigner functions and
//! the figure panels.

use std::fmt;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::bell::{BellEvaluator, BellSpec, BellVariant, PhasePoint4};
use crate::error::{Error, Result};
use crate::oscillator::DeformationParams;
use crate::wigner2::{PrefactorSign, SuperpositionEvaluator, SuperpositionSpec};

/// Points per axis of the figure windows.
pub const FIGURE_POINTS: usize = 301;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    X,
    P,
    XA,
    PA,
    XB,
    PB,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::X => "x",
            Label::P => "p",
            Label::XA => "xA",
            Label::PA => "pA",
            Label::XB => "xB",
            Label::PB => "pB",
        }
    }

    pub fn is_momentum(self) -> bool {
        matches!(self, Label::P | Label::PA | Label::PB)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "x" => Ok(Label::X),
            "p" => Ok(Label::P),
            "xA" | "xa" | "x_A" => Ok(Label::XA),
            "pA" | "pa" | "p_A" => Ok(Label::PA),
            "xB" | "xb" | "x_B" => Ok(Label::XB),
            "pB" | "pb" | "p_B" => Ok(Label::PB),
            _ => Err(format!("unknown coordinate `{s}` (expected x, p, xA, pA, xB or pB)")),
        }
    }
}

/// Uniform axis `min + i (max - min) / (count - 1)`, `i < count`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub label: Label,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(label: Label, min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::domain("axis range", max - min, "need finite min < max"));
        }
        if count < 2 {
            return Err(Error::domain("axis count", count as f64, "need at least 2 points"));
        }
        Ok(Axis {
            label,
            min,
            max,
            count,
        })
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.point(i))
    }
}

/// Two free axes plus fixed values for every other coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceSpec {
    pub free: [Axis; 2],
    pub fixed: Vec<(Label, f64)>,
}

impl SliceSpec {
    pub fn new(first: Axis, second: Axis, fixed: Vec<(Label, f64)>) -> Result<Self> {
        let mut seen: Vec<Label> = vec![first.label, second.label];
        for &(label, value) in &fixed {
            if !value.is_finite() {
                return Err(Error::domain("fixed coordinate", value, "must be finite"));
            }
            seen.push(label);
        }
        for (i, a) in seen.iter().enumerate() {
            if seen[i + 1..].contains(a) {
                return Err(Error::Arity(format!("coordinate {a} appears twice")));
            }
        }
        Ok(SliceSpec {
            free: [first, second],
            fixed,
        })
    }

    fn labels(&self) -> Vec<Label> {
        let mut out = vec![self.free[0].label, self.free[1].label];
        out.extend(self.fixed.iter().map(|f| f.0));
        out
    }
}

/// What a slice is taken through.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    Superposition {
        spec: SuperpositionSpec,
        sign: PrefactorSign,
    },
    Bell(BellSpec),
}

impl Target {
    pub fn superposition(spec: SuperpositionSpec) -> Self {
        Target::Superposition {
            spec,
            sign: PrefactorSign::Positive,
        }
    }

    pub fn coordinates(&self) -> &'static [Label] {
        match self {
            Target::Superposition { .. } => &[Label::X, Label::P],
            Target::Bell(_) => &[Label::XA, Label::PA, Label::XB, Label::PB],
        }
    }

    /// `1/(pi hbar)` for one particle, `1/(pi hbar)^2` for two.
    pub fn bound(&self) -> f64 {
        match self {
            Target::Superposition { spec, .. } => 1.0 / (std::f64::consts::PI * spec.hbar()),
            Target::Bell(spec) => (1.0 / (std::f64::consts::PI * spec.hbar())).powi(2),
        }
    }

    fn conventions(&self) -> String {
        match self {
            Target::Superposition { sign, .. } => format!("prefactor={sign:?}"),
            Target::Bell(_) => "prefactor=Positive;w3_operator=plus".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridMeta {
    /// SHA-256 of the target and slice description.
    pub spec_hash: String,
    pub conventions: String,
    /// Unix seconds at evaluation time. Not written to any output file.
    pub timestamp: u64,
}

/// `values[row * cols + col]` with `row` indexing the second free axis and
/// `col` the first. `terms`, when present, holds `prefactor * (W1, W2, W3)`
/// per point in the same order.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    pub slice: SliceSpec,
    pub values: Vec<f64>,
    pub terms: Option<Vec<[f64; 3]>>,
    pub meta: GridMeta,
}

impl PhaseGrid {
    pub fn cols(&self) -> usize {
        self.slice.free[0].count
    }

    pub fn rows(&self) -> usize {
        self.slice.free[1].count
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols() + col]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

fn spec_hash(target: &Target, slice: &SliceSpec) -> String {
    let digest = Sha256::digest(format!("{target:?}|{slice:?}").as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[allow(clippy::large_enum_variant)]
enum Evaluator {
    Single(SuperpositionEvaluator),
    Bell(BellEvaluator),
}

/// Evaluates the target on the slice. Rows are computed independently, so
/// the result does not depend on how rayon splits the work.
pub fn evaluate_slice(target: &Target, slice: &SliceSpec) -> Result<PhaseGrid> {
    evaluate_slice_with(target, slice, false)
}

pub fn evaluate_slice_with(target: &Target, slice: &SliceSpec, decompose: bool) -> Result<PhaseGrid> {
    let wanted = target.coordinates();
    let labels = slice.labels();
    if labels.len() != wanted.len() || !wanted.iter().all(|l| labels.contains(l)) {
        let got: Vec<_> = labels.iter().map(|l| l.as_str()).collect();
        let want: Vec<_> = wanted.iter().map(|l| l.as_str()).collect();
        return Err(Error::Arity(format!(
            "slice covers [{}] but the target needs [{}]",
            got.join(","),
            want.join(",")
        )));
    }
    let evaluator = match target {
        Target::Superposition { spec, sign } => {
            Evaluator::Single(SuperpositionEvaluator::new(spec, *sign)?)
        }
        Target::Bell(spec) => Evaluator::Bell(BellEvaluator::new(spec)?),
    };
    let decompose = decompose && matches!(evaluator, Evaluator::Bell(_));
    let [first, second] = slice.free;
    let position = |label: Label| wanted.iter().position(|&l| l == label).unwrap();
    let mut base = [0.0; 4];
    for &(label, value) in &slice.fixed {
        base[position(label)] = value;
    }
    let (i_first, i_second) = (position(first.label), position(second.label));

    let rows: Vec<Vec<(f64, [f64; 3])>> = (0..second.count)
        .into_par_iter()
        .map(|row| {
            let mut coords = base;
            coords[i_second] = second.point(row);
            (0..first.count)
                .map(|col| {
                    coords[i_first] = first.point(col);
                    let (value, terms) = match &evaluator {
                        Evaluator::Single(e) => (e.evaluate(coords[0], coords[1])?, [0.0; 3]),
                        Evaluator::Bell(e) => {
                            let pt = PhasePoint4::new(coords[0], coords[1], coords[2], coords[3]);
                            let t = e.terms(&pt)?;
                            (
                                t.value(),
                                [t.prefactor * t.w1, t.prefactor * t.w2, t.prefactor * t.w3],
                            )
                        }
                    };
                    if !value.is_finite() {
                        let at: Vec<String> = wanted
                            .iter()
                            .zip(coords.iter())
                            .map(|(l, v)| format!("{l}={v}"))
                            .collect();
                        return Err(Error::InternalConsistency(format!(
                            "non-finite value at {}",
                            at.join(", ")
                        )));
                    }
                    Ok((value, terms))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let flat: Vec<(f64, [f64; 3])> = rows.into_iter().flatten().collect();
    let values = flat.iter().map(|v| v.0).collect();
    let terms = decompose.then(|| flat.iter().map(|v| v.1).collect());
    Ok(PhaseGrid {
        slice: slice.clone(),
        values,
        terms,
        meta: GridMeta {
            spec_hash: spec_hash(target, slice),
            conventions: target.conventions(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub coord_1: f64,
    pub coord_2: f64,
    /// Signed value at the point of largest magnitude.
    pub value: f64,
}

/// Point of largest `|value|`; ties go to the first in row-major order.
pub fn find_peak(grid: &PhaseGrid) -> Peak {
    let mut best = 0;
    for (i, v) in grid.values.iter().enumerate() {
        if v.abs() > grid.values[best].abs() {
            best = i;
        }
    }
    let (row, col) = (best / grid.cols(), best % grid.cols());
    Peak {
        coord_1: grid.slice.free[0].point(col),
        coord_2: grid.slice.free[1].point(row),
        value: grid.values[best],
    }
}

/// `[-1.5, 1.5]`.
pub fn default_position_axis(label: Label, count: usize) -> Result<Axis> {
    Axis::new(label, -1.5, 1.5, count)
}

/// `[-(n_max + 2) s, 2 s]` with `s` the per-quantum momentum shift
/// (`= h` for unit constants).
pub fn default_momentum_axis(
    label: Label,
    n_max: usize,
    params: &DeformationParams,
    count: usize,
) -> Result<Axis> {
    let s = params.momentum_shift();
    Axis::new(label, -(n_max as f64 + 2.0) * s, 2.0 * s, count)
}

/// One figure panel: a file stem, what to evaluate, and where.
#[derive(Clone, Debug)]
pub struct FigurePanel {
    pub name: String,
    pub target: Target,
    pub slice: SliceSpec,
}

/// Parameters of the figure set.
#[derive(Clone, Copy, Debug)]
pub struct FigureSetup {
    pub params: DeformationParams,
    /// Levels of the superposition panel.
    pub superposition: (usize, usize),
    /// Levels of the Bell panels.
    pub bell: (usize, usize),
    pub points: usize,
}

impl FigureSetup {
    /// `q = 0.001`, unit constants, `(3, 5)` superposition, `(2, 6)` Bell
    /// states, 301 points per axis.
    pub fn standard() -> Result<Self> {
        Ok(FigureSetup {
            params: DeformationParams::unit(0.001)?,
            superposition: (3, 5),
            bell: (2, 6),
            points: FIGURE_POINTS,
        })
    }
}

/// Conditional slice through particle A's phase plane with particle B fixed
/// at `x_B = 0`, `p_B = -levels * shift_B`.
pub fn conditional_slice(spec: &BellSpec, levels: f64, points: usize) -> Result<SliceSpec> {
    let n_max = spec.n.max(spec.m);
    SliceSpec::new(
        default_position_axis(Label::XA, points)?,
        default_momentum_axis(Label::PA, n_max, &spec.params_a, points)?,
        vec![
            (Label::XB, 0.0),
            (Label::PB, -levels * spec.params_b.momentum_shift()),
        ],
    )
}

/// `(x_A, x_B)` slice at the fringe momenta `p = -(n + m)/2 * shift`.
pub fn fringe_slice(spec: &BellSpec, points: usize) -> Result<SliceSpec> {
    let mid = 0.5 * (spec.n + spec.m) as f64;
    SliceSpec::new(
        default_position_axis(Label::XA, points)?,
        default_position_axis(Label::XB, points)?,
        vec![
            (Label::PA, -mid * spec.params_a.momentum_shift()),
            (Label::PB, -mid * spec.params_b.momentum_shift()),
        ],
    )
}

/// All thirteen panels: fig1, fig2a-c, fig3a-c, fig4 (four variants) and
/// fig5a-b.
pub fn figure_panels(setup: &FigureSetup) -> Result<Vec<FigurePanel>> {
    let params = setup.params;
    let pts = setup.points;
    let mut panels = Vec::new();

    let (n1, m1) = setup.superposition;
    let sup = SuperpositionSpec::balanced(n1, m1, params)?;
    panels.push(FigurePanel {
        name: "fig1".into(),
        target: Target::superposition(sup),
        slice: SliceSpec::new(
            default_position_axis(Label::X, pts)?,
            default_momentum_axis(Label::P, n1.max(m1), &params, pts)?,
            vec![],
        )?,
    });

    let (n, m) = setup.bell;
    let mid = 0.5 * (n + m) as f64;
    for (fig, variant) in [("fig2", BellVariant::PsiPlus), ("fig3", BellVariant::PhiPlus)] {
        let spec = BellSpec::new(variant, n, m, params, params)?;
        for (panel, levels) in [("a", n as f64), ("b", mid), ("c", m as f64)] {
            panels.push(FigurePanel {
                name: format!("{fig}{panel}"),
                target: Target::Bell(spec),
                slice: conditional_slice(&spec, levels, pts)?,
            });
        }
    }
    for variant in BellVariant::ALL {
        let spec = BellSpec::new(variant, n, m, params, params)?;
        let suffix = variant.label().replace('+', "plus").replace('-', "minus");
        panels.push(FigurePanel {
            name: format!("fig4_{suffix}"),
            target: Target::Bell(spec),
            slice: fringe_slice(&spec, pts)?,
        });
    }
    for (panel, variant) in [("a", BellVariant::PsiMinus), ("b", BellVariant::PhiMinus)] {
        let spec = BellSpec::new(variant, n, m, params, params)?;
        panels.push(FigurePanel {
            name: format!("fig5{panel}"),
            target: Target::Bell(spec),
            slice: conditional_slice(&spec, mid, pts)?,
        });
    }
    Ok(panels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground_target() -> Target {
        Target::superposition(SuperpositionSpec::pure(0, DeformationParams::unit(0.5).unwrap()).unwrap())
    }

    #[test]
    fn axis_points() {
        let a = Axis::new(Label::X, -3.0, 3.0, 5).unwrap();
        let pts: Vec<f64> = a.points().collect();
        assert_eq!(pts, vec![-3.0, -1.5, 0.0, 1.5, 3.0]);
        assert!(Axis::new(Label::X, 1.0, 1.0, 5).is_err());
        assert!(Axis::new(Label::X, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn slice_validation() {
        let x = Axis::new(Label::X, -1.0, 1.0, 3).unwrap();
        assert!(SliceSpec::new(x, x, vec![]).is_err());
        let p = Axis::new(Label::P, -1.0, 1.0, 3).unwrap();
        assert!(SliceSpec::new(x, p, vec![(Label::P, 0.0)]).is_err());

        let single = SliceSpec::new(x, p, vec![]).unwrap();
        let bell = Target::Bell(
            BellSpec::new(
                BellVariant::PsiPlus,
                0,
                1,
                DeformationParams::unit(0.5).unwrap(),
                DeformationParams::unit(0.5).unwrap(),
            )
            .unwrap(),
        );
        assert!(matches!(evaluate_slice(&bell, &single), Err(Error::Arity(_))));
        let four = SliceSpec::new(
            Axis::new(Label::XA, -1.0, 1.0, 3).unwrap(),
            Axis::new(Label::PA, -1.0, 1.0, 3).unwrap(),
            vec![(Label::XB, 0.0), (Label::PB, 0.0)],
        )
        .unwrap();
        assert!(matches!(evaluate_slice(&ground_target(), &four), Err(Error::Arity(_))));
        assert!(evaluate_slice(&bell, &four).is_ok());
    }

    #[test]
    fn ground_grid_is_point_symmetric() {
        let slice = SliceSpec::new(
            Axis::new(Label::X, -3.0, 3.0, 5).unwrap(),
            Axis::new(Label::P, -3.0, 3.0, 5).unwrap(),
            vec![],
        )
        .unwrap();
        let grid = evaluate_slice(&ground_target(), &slice).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                assert!((grid.get(r, c) - grid.get(4 - r, 4 - c)).abs() < 1e-16);
            }
        }
        let peak = find_peak(&grid);
        assert_eq!((peak.coord_1, peak.coord_2), (0.0, 0.0));
        assert!((peak.value - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(grid.meta.spec_hash.len(), 64);
    }

    #[test]
    fn peak_tie_break() {
        let slice = SliceSpec::new(
            Axis::new(Label::X, 0.0, 1.0, 3).unwrap(),
            Axis::new(Label::P, 5.0, 6.0, 2).unwrap(),
            vec![],
        )
        .unwrap();
        let grid = PhaseGrid {
            slice,
            values: vec![0.0; 6],
            terms: None,
            meta: GridMeta {
                spec_hash: String::new(),
                conventions: String::new(),
                timestamp: 0,
            },
        };
        assert_eq!(
            find_peak(&grid),
            Peak {
                coord_1: 0.0,
                coord_2: 5.0,
                value: 0.0
            }
        );
        let mut g = grid.clone();
        g.values = vec![0.1, -0.3, 0.2, 0.3, 0.0, -0.3];
        let peak = find_peak(&g);
        assert_eq!((peak.coord_1, peak.coord_2, peak.value), (0.5, 5.0, -0.3));
    }

    #[test]
    fn figure_set_layout() {
        let setup = FigureSetup {
            points: 11,
            ..FigureSetup::standard().unwrap()
        };
        let panels = figure_panels(&setup).unwrap();
        let names: Vec<&str> = panels.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "fig1", "fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c", "fig4_psiplus",
                "fig4_psiminus", "fig4_phiplus", "fig4_phiminus", "fig5a", "fig5b"
            ]
        );
        let h = setup.params.h();
        let fixed_pb = panels[1].slice.fixed[1];
        assert_eq!(fixed_pb.0, Label::PB);
        assert!((fixed_pb.1 + 2.0 * h).abs() < 1e-12);
        let p_axis = panels[0].slice.free[1];
        assert!((p_axis.min + 7.0 * h).abs() < 1e-12 && (p_axis.max - 2.0 * h).abs() < 1e-12);
    }
}
