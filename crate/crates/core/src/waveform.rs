// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Periodic drive description and lab-frame Hamiltonian.
//!
//! The longitudinal bias is `ε(t) = ε₀ + Σ Aₙ cos(n ω_ε t) + Σ B_m sin(m ω_ε t)`
//! and the transverse coupling is `Δ(t) = Σ_k Δ_k e^{i k ω_Δ t}`, with
//! `ω_ε = a·ω` and `ω_Δ = b·ω` for positive integers `a`, `b`. Using integer
//! multipliers of a single base frequency keeps the drive commensurate with
//! period `T = 2π/ω`.

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::f64::consts::PI;
use std::path::Path;

/// One cosine harmonic `A·cos(n ω_ε t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosHarmonic {
    pub n: u32,
    #[serde(rename = "A")]
    pub amp: f64,
}

/// One sine harmonic `B·sin(m ω_ε t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinHarmonic {
    pub m: u32,
    #[serde(rename = "B")]
    pub amp: f64,
}

/// One transverse Fourier coefficient `Δ_k`; `k = 0` is the static tunneling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransverseCoeff {
    pub k: i32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl TransverseCoeff {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn one() -> f64 {
    1.0
}
fn one_u32() -> u32 {
    1
}

/// Full description of the periodic drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default)]
    pub eps0: f64,
    #[serde(default = "one_u32")]
    pub eps_mult: u32,
    #[serde(default = "one_u32")]
    pub delta_mult: u32,
    #[serde(default)]
    pub a_coeffs: Vec<CosHarmonic>,
    #[serde(default)]
    pub b_coeffs: Vec<SinHarmonic>,
    #[serde(default)]
    pub d_coeffs: Vec<TransverseCoeff>,
}

impl Default for DriveSpec {
    fn default() -> Self {
        Self::new(1.0)
    }
}

impl DriveSpec {
    /// Undriven spec with base frequency `omega`.
    pub fn new(omega: f64) -> Self {
        Self {
            omega,
            eps0: 0.0,
            eps_mult: 1,
            delta_mult: 1,
            a_coeffs: Vec::new(),
            b_coeffs: Vec::new(),
            d_coeffs: Vec::new(),
        }
    }

    pub fn with_eps0(mut self, eps0: f64) -> Self {
        self.eps0 = eps0;
        self
    }

    pub fn with_multipliers(mut self, eps_mult: u32, delta_mult: u32) -> Self {
        self.eps_mult = eps_mult;
        self.delta_mult = delta_mult;
        self
    }

    /// Adds (or replaces) the cosine harmonic `n`.
    pub fn with_cos(mut self, n: u32, amp: f64) -> Self {
        self.a_coeffs.retain(|h| h.n != n);
        self.a_coeffs.push(CosHarmonic { n, amp });
        self
    }

    /// Adds (or replaces) the sine harmonic `m`.
    pub fn with_sin(mut self, m: u32, amp: f64) -> Self {
        self.b_coeffs.retain(|h| h.m != m);
        self.b_coeffs.push(SinHarmonic { m, amp });
        self
    }

    /// Adds (or replaces) the transverse coefficient `Δ_k`.
    pub fn with_delta(mut self, k: i32, value: Complex64) -> Self {
        self.d_coeffs.retain(|c| c.k != k);
        self.d_coeffs.push(TransverseCoeff {
            k,
            re: value.re,
            im: value.im,
        });
        self
    }

    /// Checks the structural invariants.
    /// Real cosine transverse harmonic: sets `Δ_k = Δ_{−k} = amp`.
    pub fn with_transverse_cos(self, k: u32, amp: f64) -> Self {
        let v = Complex64::new(amp, 0.0);
        if k == 0 {
            return self.with_delta(0, v);
        }
        self.with_delta(k as i32, v).with_delta(-(k as i32), v)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidSpec(format!("omega must be > 0, got {}", self.omega)));
        }
        if !self.eps0.is_finite() {
            return Err(Error::InvalidSpec("eps0 must be finite".into()));
        }
        if self.eps_mult == 0 || self.delta_mult == 0 {
            return Err(Error::InvalidSpec("eps_mult and delta_mult must be >= 1".into()));
        }
        let mut seen = HashSet::new();
        for h in &self.a_coeffs {
            if h.n == 0 || !seen.insert(h.n) || !h.amp.is_finite() {
                return Err(Error::InvalidSpec(format!("bad or duplicate cosine harmonic n = {}", h.n)));
            }
        }
        seen.clear();
        for h in &self.b_coeffs {
            if h.m == 0 || !seen.insert(h.m) || !h.amp.is_finite() {
                return Err(Error::InvalidSpec(format!("bad or duplicate sine harmonic m = {}", h.m)));
            }
        }
        let mut seen_k = HashSet::new();
        for c in &self.d_coeffs {
            if !seen_k.insert(c.k) || !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidSpec(format!("bad or duplicate transverse harmonic k = {}", c.k)));
            }
        }
        Ok(())
    }

    /// Parses and validates a JSON document. Unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: DriveSpec = serde_json::from_str(text).map_err(|e| Error::SpecParse {
            path: "<inline>".into(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::SpecParse { message, .. } => Error::SpecParse {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("drive spec serializes")
    }

    /// `ω_ε = a·ω`.
    pub fn omega_eps(&self) -> f64 {
        self.eps_mult as f64 * self.omega
    }

    /// `ω_Δ = b·ω`.
    pub fn omega_delta(&self) -> f64 {
        self.delta_mult as f64 * self.omega
    }

    /// Common period `T = 2π/ω`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn has_longitudinal_drive(&self) -> bool {
        self.a_coeffs.iter().any(|h| h.amp != 0.0) || self.b_coeffs.iter().any(|h| h.amp != 0.0)
    }

    /// Largest transverse harmonic index `K`.
    pub fn max_transverse_index(&self) -> u32 {
        self.d_coeffs.iter().map(|c| c.k.unsigned_abs()).max().unwrap_or(0)
    }

    /// Static transverse coupling `Δ₀` (zero if absent).
    pub fn static_delta(&self) -> Complex64 {
        self.d_coeffs
            .iter()
            .find(|c| c.k == 0)
            .map(|c| c.value())
            .unwrap_or_default()
    }
}

/// `ε(t) = ε₀ + ε_ac(t)`.
pub fn epsilon_at(spec: &DriveSpec, t: f64) -> f64 {
    let w = spec.omega_eps();
    let cos_part: f64 = spec
        .a_coeffs
        .iter()
        .map(|h| h.amp * (h.n as f64 * w * t).cos())
        .sum();
    let sin_part: f64 = spec
        .b_coeffs
        .iter()
        .map(|h| h.amp * (h.m as f64 * w * t).sin())
        .sum();
    spec.eps0 + cos_part + sin_part
}

/// `Δ(t) = Σ_k Δ_k e^{i k ω_Δ t}`.
pub fn delta_at(spec: &DriveSpec, t: f64) -> Complex64 {
    let w = spec.omega_delta();
    spec.d_coeffs
        .iter()
        .map(|c| c.value() * Complex64::from_polar(1.0, c.k as f64 * w * t))
        .sum()
}

/// Lab-frame Hamiltonian `½ [[ε, Δ], [Δ̄, −ε]]`.
pub fn hamiltonian_at(spec: &DriveSpec, t: f64) -> Mat2 {
    let eps = Complex64::new(0.5 * epsilon_at(spec, t), 0.0);
    let d = 0.5 * delta_at(spec, t);
    Mat2::new(eps, d, d.conj(), -eps)
}

/// `Φ_ac(t) = ∫₀ᵗ ε_ac(τ) dτ` in closed form, with `Φ_ac(0) = 0`.
pub fn phase_antiderivative(spec: &DriveSpec, t: f64) -> f64 {
    let w = spec.omega_eps();
    let cos_part: f64 = spec
        .a_coeffs
        .iter()
        .map(|h| {
            let f = h.n as f64 * w;
            h.amp / f * (f * t).sin()
        })
        .sum();
    let sin_part: f64 = spec
        .b_coeffs
        .iter()
        .map(|h| {
            let f = h.m as f64 * w;
            h.amp / f * (1.0 - (f * t).cos())
        })
        .sum();
    cos_part + sin_part
}

/// Diagonal frame-change unitary `U₀(t) = exp(−(i/2)(ε₀t + Φ_ac(t)) σ_z)`.
pub fn frame_unitary(spec: &DriveSpec, t: f64) -> Mat2 {
    let theta = spec.eps0 * t + phase_antiderivative(spec, t);
    let ph = Complex64::from_polar(1.0, -0.5 * theta);
    Mat2::diag(ph, ph.conj())
}
