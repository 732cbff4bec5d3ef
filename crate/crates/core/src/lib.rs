//! Position-dependent-mass (PDM) Schrödinger toolkit.
//!
//! A PDM problem in `x` is carried by a point transformation `y = s(x)` to a
//! constant-mass problem in `y`, solved there (closed form, WKB or Numerov),
//! and pulled back. Units are `hbar = omega0 = m0 = 1`.
//!
//! ```
//! use pdm_core::{solve_levels, PotentialSpec, SolverConfig};
//!
//! let levels = solve_levels(&PotentialSpec::harmonic(), 2, &SolverConfig::default()).unwrap();
//! assert!((levels[2].energy - 2.5).abs() < 1e-8);
//! ```

pub mod coherent;
pub mod error;
pub mod ladder;
pub mod mass_models;
pub mod oscillators;
pub mod quadrature;
pub mod schrodinger;
pub mod special_fns;
pub mod spectra;
pub mod transform;

pub use num_complex::Complex64;

pub use coherent::{
    coherent_amplitudes, coherent_wavefunction, energy_moments, poisson_prob, required_truncation,
    uncertainty_product, uncertainty_product_sample, CoherentState,
};
pub use error::{PdmError, Result};
pub use ladder::{
    apply_ladder, beta_oscillator, commutator_value, factor_action, ladder_coefficient, missing_state,
    partner_potential, potential_from_beta, riccati_residual, Factor, FactorizationPair, Ladder, MissingState,
    MissingStates,
};
pub use mass_models::{
    allowed_ordering, coordinate_map, mass_at, mass_correction, mdnt_residual, CoordinateMap, Interval,
    MassFamily, MassKind, OrderingParameter,
};
pub use oscillators::{
    build_second_kind, first_kind_eigenfunction, squeezed_eigenfunction, squeezed_potential,
    FirstKindOscillator, SecondKindOscillator, SecondKindPotential,
};
pub use schrodinger::{solve_halfline, solve_levels, EigenSolution, SolverConfig};
pub use special_fns::{gamma_fn, hermite, kummer_poly, laguerre, PolyEval};
pub use spectra::{
    crossing_index, jn_constant, powerlaw_energy, sinh2_wkb_spectrum, wkb_level, wkb_quantize, WkbLevel,
    WkbMethod,
};
pub use transform::{
    effective_potential, effective_problem, fmt_sig, pullback_potential, pullback_wavefunction, pushforward_potential,
    pushforward_wavefunction, x_space_norm, PotentialKind, PotentialSpec, Space, WaveSample,
};
