//! q-deformed harmonic oscillator: eigenfunctions, Wigner functions of
//! two-level superpositions and of the four Bell states, a numerical
//! quadrature oracle, phase-space grids and a command-line front end.

pub mod bell;
pub mod cli;
pub mod error;
pub mod grid;
pub mod oracle;
pub mod oscillator;
pub mod qseries;
pub mod wigner2;

pub use bell::{bell_interference_term, bell_wigner, BellSpec, BellVariant, PhasePoint4};
pub use error::{Error, Result};
pub use grid::{evaluate_slice, find_peak, Axis, Label, PhaseGrid, SliceSpec, Target};
pub use oscillator::{make_params, psi, DeformationParams, PureStateSpec};
pub use wigner2::{wigner_superposition, PrefactorSign, SuperpositionSpec};
