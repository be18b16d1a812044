// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Named drive configurations used by the CLI, the validation suite and the
//! acceptance tests. All values are in units of `ω = 1`.

use crate::waveform::DriveSpec;
use num_complex::Complex64;

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Undriven: static bias and tunneling only.
pub fn kernel_static() -> DriveSpec {
    DriveSpec::new(1.0).with_eps0(1.0).with_delta(0, re(0.5))
}

/// Linear transverse drive at the first harmonic, `Δ_{±1} = 0.5`.
pub fn kernel_bloch_siegert() -> DriveSpec {
    DriveSpec::new(1.0).with_eps0(1.0).with_transverse_cos(1, 0.5)
}

/// Single longitudinal harmonic `A = 15` with `Δ = 0.5`.
pub fn kernel_longitudinal() -> DriveSpec {
    DriveSpec::new(1.0).with_eps0(1.0).with_cos(1, 15.0).with_delta(0, re(0.5))
}

/// Longitudinal harmonics 1, 2 (`A = 10, 20`), `ε₀ = 10`, transverse
/// harmonics 1, 2 with `Δ_{±k} = 0.25`.
pub fn kernel_biharmonic() -> DriveSpec {
    DriveSpec::new(1.0)
        .with_eps0(10.0)
        .with_cos(1, 10.0)
        .with_cos(2, 20.0)
        .with_transverse_cos(1, 0.25)
        .with_transverse_cos(2, 0.25)
}

/// Linear transverse drive `Δ_{±1} = 3`, `ε₀ = 1`.
pub fn prob_bloch_siegert() -> DriveSpec {
    DriveSpec::new(1.0).with_eps0(1.0).with_transverse_cos(1, 3.0)
}

/// Longitudinal harmonics 1 and 3 (`A = 13, 18`), `ε₀ = 1`, `Δ = 1.5`.
pub fn prob_longitudinal() -> DriveSpec {
    DriveSpec::new(1.0)
        .with_eps0(1.0)
        .with_cos(1, 13.0)
        .with_cos(3, 18.0)
        .with_delta(0, re(1.5))
}

/// Longitudinal harmonic 1 (`A = 13`), transverse harmonics 1–3 and static
/// tunneling all `1.5` (`Δ_{±k}`), `ε₀ = 1`.
pub fn prob_mixed() -> DriveSpec {
    DriveSpec::new(1.0)
        .with_eps0(1.0)
        .with_cos(1, 13.0)
        .with_delta(0, re(1.5))
        .with_transverse_cos(1, 1.5)
        .with_transverse_cos(2, 1.5)
        .with_transverse_cos(3, 1.5)
}

/// Bias used for the near-resonant weak-coupling maps (`ε₀ ≈ ω`).
pub const NEAR_RESONANT_EPS0: f64 = 1.1;

/// Template for the biharmonic Rabi and averaged-probability maps:
/// longitudinal harmonics 1 and 2 (amplitudes swept), `Δ = 0.25`.
pub fn map_biharmonic() -> DriveSpec {
    DriveSpec::new(1.0)
        .with_eps0(NEAR_RESONANT_EPS0)
        .with_cos(1, 0.0)
        .with_cos(2, 0.0)
        .with_delta(0, re(0.25))
}

/// Weak resonant drive: `ε₀ = −ω`, single longitudinal harmonic chosen so
/// that `|𝒥₁| = 0.05`.
pub fn weak_resonant() -> DriveSpec {
    let x = 1.5;
    let j1 = crate::bessel::bessel_j(1, x);
    DriveSpec::new(1.0)
        .with_eps0(-1.0)
        .with_cos(1, x)
        .with_delta(0, re(0.1 / j1))
}

/// All named presets.
pub fn all() -> Vec<(&'static str, DriveSpec)> {
    vec![
        ("kernel-static", kernel_static()),
        ("kernel-bloch-siegert", kernel_bloch_siegert()),
        ("kernel-longitudinal", kernel_longitudinal()),
        ("kernel-biharmonic", kernel_biharmonic()),
        ("prob-bloch-siegert", prob_bloch_siegert()),
        ("prob-longitudinal", prob_longitudinal()),
        ("prob-mixed", prob_mixed()),
        ("map-biharmonic", map_biharmonic()),
        ("weak-resonant", weak_resonant()),
    ]
}

pub fn by_name(name: &str) -> Option<DriveSpec> {
    all().into_iter().find(|(n, _)| *n == name).map(|(_, s)| s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for (name, s) in all() {
            s.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(by_name("prob-mixed").is_some());
        assert!(by_name("nope").is_none());
    }
}
