//! Fixtures shared by the benchmarks.

use pdm_core::{MassFamily, PotentialSpec};

/// Families whose first-kind spectra are timed.
pub fn families() -> Vec<(&'static str, MassFamily)> {
    vec![
        ("singular0", MassFamily::singular0(1.0, 1.0).unwrap()),
        ("singular_n1", MassFamily::singular_n(1, 0.0, 1.0).unwrap()),
        ("regular", MassFamily::regular(1.0).unwrap()),
        ("rational_w", MassFamily::rational_w(0.5).unwrap()),
    ]
}

/// Confining y-space potentials on the whole line.
pub fn potentials() -> Vec<(&'static str, PotentialSpec)> {
    vec![
        ("harmonic", PotentialSpec::harmonic()),
        ("sinh2", PotentialSpec::sinh2(1.0).unwrap()),
        ("power_law2", PotentialSpec::power_law(2, 0.0, 1.0).unwrap()),
    ]
}
