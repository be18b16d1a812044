// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Quantities read off a propagator: transition probability, Floquet
//! quasienergies and the period-averaged Hamiltonian.

use super::grid::{unitary_trace_grid, GridOptions};
use super::series::{unitary_analytic_trace, SeriesOptions};
use crate::error::{Error, Result};
use crate::kernel::{drive, KernelSpec};
use crate::mat2::{Mat2, Unitary2};
use crate::waveform::{frame_unitary, DriveSpec};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Largest unitarity defect accepted by [`quasienergies`].
pub const QUASI_UNITARITY_LIMIT: f64 = 1e-6;

/// Change under doubling accepted by [`effective_hamiltonian`].
pub const HEFF_TOL: f64 = 1e-6;

const HEFF_MAX_POINTS: usize = 1 << 14;

/// `|u₁₂|²`, unclamped.
pub fn transition_probability_raw(u: &Unitary2) -> f64 {
    u.u12.norm_sqr()
}

/// `|u₁₂|²` clamped to `[0, 1]` for reporting.
pub fn transition_probability(u: &Unitary2) -> f64 {
    transition_probability_raw(u).clamp(0.0, 1.0)
}

/// Floquet quasienergies from the one-period propagator.
///
/// The eigenvalues are `λ± = Tr/2 ± i√(1 − Tr²/4)` and the quasienergies
/// follow `U = e^{−iεT}`, i.e. `ε± = −arg(λ±)/T`, folded into `[−ω/2, ω/2)`
/// with `ω = 2π/T`. Returns `(ε₊, ε₋)`.
pub fn quasienergies(u_period: &Unitary2, period: f64) -> Result<(f64, f64)> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    if !u_period.is_finite() {
        return Err(Error::InvalidArgument("propagator has non-finite entries".into()));
    }
    let defect = u_period.unitarity_defect();
    if defect >= QUASI_UNITARITY_LIMIT {
        return Err(Error::Unitarity {
            defect,
            limit: QUASI_UNITARITY_LIMIT,
        });
    }
    let half = u_period.trace() * 0.5;
    let root = (Complex64::new(1.0, 0.0) - half * half).sqrt();
    let i = Complex64::new(0.0, 1.0);
    let lambdas = [half + i * root, half - i * root];
    for l in lambdas {
        if (l.norm() - 1.0).abs() >= QUASI_UNITARITY_LIMIT {
            return Err(Error::Unitarity {
                defect: (l.norm() - 1.0).abs(),
                limit: QUASI_UNITARITY_LIMIT,
            });
        }
    }
    let omega = 2.0 * PI / period;
    let fold = |e: f64| {
        let r = (e + 0.5 * omega).rem_euclid(omega) - 0.5 * omega;
        if r >= 0.5 * omega {
            r - omega
        } else {
            r
        }
    };
    let eps = |l: Complex64| fold(-l.arg() / period);
    Ok((eps(lambdas[0]), eps(lambdas[1])))
}

fn heff_at(ks: &KernelSpec, period: f64, n_points: usize, opt: &GridOptions) -> Result<Mat2> {
    let tr = unitary_trace_grid(ks, 0.0, period, n_points, opt)?;
    let h = period / (n_points - 1) as f64;
    let mut acc = Mat2::zero();
    for (k, (t, u)) in tr.times.iter().zip(&tr.u).enumerate() {
        let d = drive(ks, *t);
        let ham = Mat2::new(Complex64::default(), d, d.conj(), Complex64::default());
        let w = if k == 0 || k == n_points - 1 { 0.5 } else { 1.0 };
        acc = acc + (u.dagger() * ham * *u).scale(Complex64::new(w * h / period, 0.0));
    }
    Ok(acc)
}

/// `(1/T)∫₀ᵀ U†(t,0) H(t) U(t,0) dt` in the rotated frame, by the trapezoid
/// rule on `n_quad` panels, doubled until the change is below [`HEFF_TOL`].
pub fn effective_hamiltonian(spec: &DriveSpec, period: f64, n_quad: usize) -> Result<Mat2> {
    if n_quad < 64 {
        return Err(Error::InvalidArgument("n_quad must be >= 64".into()));
    }
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    let ks = KernelSpec::from_spec(spec, crate::gbf::DEFAULT_THRESHOLD)?;
    effective_hamiltonian_ks(&ks, period, n_quad)
}

pub fn effective_hamiltonian_ks(ks: &KernelSpec, period: f64, n_quad: usize) -> Result<Mat2> {
    let opt = GridOptions::default();
    let mut panels = n_quad;
    let mut prev = heff_at(ks, period, panels + 1, &opt)?;
    loop {
        panels *= 2;
        if panels + 1 > HEFF_MAX_POINTS {
            return Err(Error::QuadratureNotConverged {
                change: f64::NAN,
                limit: HEFF_TOL,
            });
        }
        let next = heff_at(ks, period, panels + 1, &opt)?;
        let change = next.max_abs_diff(&prev);
        prev = next;
        if change < HEFF_TOL {
            break;
        }
    }
    // the integrand is Hermitian at every node; symmetrize away roundoff
    let h = prev;
    let off = (h.u12 + h.u21.conj()) * 0.5;
    Ok(Mat2::new(
        Complex64::new(h.u11.re, 0.0),
        off,
        off.conj(),
        Complex64::new(h.u22.re, 0.0),
    ))
}

/// Infinite-time average of `p(t, 0)` from lab-frame propagators `us` at
/// `samples + 1` equispaced times over one lab period (last = monodromy).
///
/// Averaging `U(τ)Mⁿ` over `n` drops the cross terms between the Floquet
/// eigenvectors of `M`; the remaining `τ` average uses Simpson's rule.
pub fn floquet_average(us: &[Unitary2]) -> Result<f64> {
    let samples = us.len().saturating_sub(1);
    if samples < 2 || samples % 2 == 1 {
        return Err(Error::InvalidArgument("need an even number (>= 2) of panels".into()));
    }
    let m = us[samples];
    let half_tr = m.trace() * 0.5;
    let root = (half_tr * half_tr - m.det()).sqrt();
    let lambdas = [half_tr + root, half_tr - root];
    let degenerate = (lambdas[0] - lambdas[1]).norm() < 1e-12;
    let vecs: Vec<[Complex64; 2]> = lambdas
        .iter()
        .map(|&l| {
            let a = [m.u12, l - m.u11];
            let b = [l - m.u22, m.u21];
            let v = if a[0].norm() + a[1].norm() >= b[0].norm() + b[1].norm() { a } else { b };
            let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            [v[0] / n, v[1] / n]
        })
        .collect();
    let value = |u: &Mat2| -> f64 {
        if degenerate {
            return u.u12.norm_sqr();
        }
        vecs.iter().map(|v| ((u.u11 * v[0] + u.u12 * v[1]) * v[1].conj()).norm_sqr()).sum()
    };
    let acc: f64 = us
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let w = if i == 0 || i == samples {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * value(u)
        })
        .sum();
    Ok(acc / (3.0 * samples as f64))
}

/// Long-time average of the transition probability from the series engine.
///
/// Rotated-frame propagators are mapped back to the lab frame, where the
/// Hamiltonian is periodic with the drive period even when `ε₀/ω` is not an
/// integer.
pub fn long_time_average_series(spec: &DriveSpec, samples: usize, opt: &SeriesOptions) -> Result<f64> {
    if samples < 2 || samples % 2 == 1 {
        return Err(Error::InvalidArgument("samples must be even and >= 2".into()));
    }
    let ks = KernelSpec::from_spec(spec, crate::gbf::DEFAULT_THRESHOLD)?;
    let period = spec.period();
    let times: Vec<f64> = (0..=samples).map(|i| i as f64 * period / samples as f64).collect();
    let tr = unitary_analytic_trace(&ks, 0.0, &times, opt)?;
    let f0 = frame_unitary(spec, 0.0).dagger();
    let lab: Vec<Unitary2> = times.iter().zip(&tr.u).map(|(t, u)| frame_unitary(spec, *t) * *u * f0).collect();
    floquet_average(&lab)
}
