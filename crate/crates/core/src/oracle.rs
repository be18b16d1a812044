// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Reference solutions that share no code with the series or grid engines:
//! a classical RK4 integrator of `i dU/dt = H(t) U` with step doubling, and
//! nested trapezoid quadrature of low ⋆-powers of the kernel.

use crate::error::{Error, Result};
use crate::gbf::build_table;
use crate::kernel::{kernel_fast, KernelSpec};
use crate::mat2::{Mat2, Unitary2};
use crate::waveform::{frame_unitary, hamiltonian_at, DriveSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Frame in which the time-stepping oracle integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Raw drive Hamiltonian.
    Lab,
    /// Frame co-moving with the longitudinal phase; `H = [[0, D], [D̄, 0]]`.
    Rotated,
}

impl FromStr for Frame {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lab" => Ok(Frame::Lab),
            "rotated" => Ok(Frame::Rotated),
            _ => Err(Error::InvalidArgument(format!("unknown frame '{s}' (expected lab|rotated)"))),
        }
    }
}

/// Step limits for the integrator.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub min_steps: usize,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            min_steps: 64,
            max_steps: 1 << 24,
        }
    }
}

enum Ham<'a> {
    Lab(&'a DriveSpec),
    Rotated(Vec<(f64, Complex64)>),
}

impl Ham<'_> {
    fn new<'a>(spec: &'a DriveSpec, frame: Frame) -> Result<Ham<'a>> {
        Ok(match frame {
            Frame::Lab => Ham::Lab(spec),
            Frame::Rotated => {
                let table = build_table(spec, crate::gbf::DEFAULT_THRESHOLD)?;
                Ham::Rotated(
                    table
                        .nonzero()
                        .into_iter()
                        .map(|(l, j)| (spec.eps0 + l as f64 * spec.omega, j))
                        .collect(),
                )
            }
        })
    }

    /// `−i H(t)`.
    fn gen(&self, t: f64) -> Mat2 {
        let h = match self {
            Ham::Lab(spec) => hamiltonian_at(spec, t),
            Ham::Rotated(terms) => {
                let mut d = Complex64::default();
                for (f, j) in terms {
                    d += j * Complex64::from_polar(1.0, f * t);
                }
                Mat2::new(Complex64::default(), d, d.conj(), Complex64::default())
            }
        };
        h.scale(Complex64::new(0.0, -1.0))
    }

    /// Rough frequency scale, used to seed the step count.
    fn scale(&self) -> f64 {
        match self {
            Ham::Lab(spec) => {
                let e: f64 = spec.eps0.abs()
                    + spec.a_coeffs.iter().map(|h| h.amp.abs()).sum::<f64>()
                    + spec.b_coeffs.iter().map(|h| h.amp.abs()).sum::<f64>();
                let d: f64 = spec.d_coeffs.iter().map(|c| c.value().norm()).sum();
                0.5 * (e + d) + spec.omega_eps().max(spec.omega_delta())
            }
            Ham::Rotated(terms) => terms
                .iter()
                .map(|(f, j)| f.abs() + j.norm())
                .fold(0.0, f64::max),
        }
    }
}

fn rk4(h: &Ham, mut u: Mat2, t0: f64, t1: f64, steps: usize) -> Mat2 {
    let dt = (t1 - t0) / steps as f64;
    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let a = h.gen(t);
        let b = h.gen(t + 0.5 * dt);
        let c = h.gen(t + dt);
        let k1 = a * u;
        let k2 = b * (u + k1.scale(half));
        let k3 = b * (u + k2.scale(half));
        let k4 = c * (u + k3.scale(full));
        let sum = k1 + k2.scale(Complex64::new(2.0, 0.0)) + k3.scale(Complex64::new(2.0, 0.0)) + k4;
        u = u + sum.scale(Complex64::new(dt / 6.0, 0.0));
    }
    u
}

fn trace_with(h: &Ham, s: f64, times: &[f64], steps_total: usize) -> Vec<Mat2> {
    let span = times.last().map(|t| t - s).unwrap_or(0.0);
    let mut u = Mat2::identity();
    let mut prev = s;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t > prev {
            let n = ((t - prev) / span * steps_total as f64).ceil().max(1.0) as usize;
            u = rk4(h, u, prev, t, n);
        }
        prev = t;
        out.push(u);
    }
    out
}

/// `U(t_j, s)` for ascending `times ≥ s`, refined by step doubling until both
/// the doubling change and the unitarity defect fall below `tol` at every
/// sample.
pub fn integrate_trace(
    spec: &DriveSpec,
    s: f64,
    times: &[f64],
    tol: f64,
    frame: Frame,
    control: StepControl,
) -> Result<Vec<Unitary2>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("sample times must be ascending".into()));
    }
    if let Some(&t0) = times.first() {
        if t0 < s {
            return Err(Error::Acausal { t: t0, s });
        }
    }
    let h = Ham::new(spec, frame)?;
    let span = times.last().map(|t| t - s).unwrap_or(0.0);
    if span == 0.0 {
        return Ok(vec![Mat2::identity(); times.len()]);
    }
    let mut steps = ((span * h.scale() * 4.0).ceil() as usize).max(control.min_steps);
    let mut coarse = trace_with(&h, s, times, steps);
    let mut change = f64::INFINITY;
    while 2 * steps <= control.max_steps {
        steps *= 2;
        let fine = trace_with(&h, s, times, steps);
        change = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max);
        let defect = fine.iter().map(|u| u.unitarity_defect()).fold(0.0, f64::max);
        coarse = fine;
        if change < tol && defect < tol {
            return Ok(coarse);
        }
    }
    Err(Error::StepBudget { steps, change })
}

/// `U(t, s)` in the chosen frame.
pub fn integrate_schrodinger(spec: &DriveSpec, s: f64, t: f64, tol: f64, frame: Frame) -> Result<Unitary2> {
    if t < s {
        return Err(Error::Acausal { t, s });
    }
    Ok(integrate_trace(spec, s, &[t], tol, frame, StepControl::default())?[0])
}

/// Infinite-time average of `p(t) = |U₁₂(t, 0)|²` from one period of the
/// lab-frame propagator.
///
/// With `M = U(T, 0) = Σ λ_k v_k v_k†` and `U(nT + τ) = U(τ) Mⁿ`, averaging
/// over `n` removes the cross terms between distinct eigenvalues, leaving
/// `Σ_k |⟨0|U(τ)|v_k⟩⟨v_k|1⟩|²`, which is then averaged over `τ ∈ [0, T]`
/// by Simpson's rule on `samples` panels.
pub fn long_time_average(spec: &DriveSpec, samples: usize, tol: f64) -> Result<f64> {
    if samples < 2 || samples % 2 == 1 {
        return Err(Error::InvalidArgument("samples must be even and >= 2".into()));
    }
    let period = spec.period();
    let times: Vec<f64> = (0..=samples).map(|i| i as f64 * period / samples as f64).collect();
    let us = integrate_trace(spec, 0.0, &times, tol, Frame::Lab, StepControl::default())?;
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
        vecs.iter()
            .map(|v| ((u.u11 * v[0] + u.u12 * v[1]) * v[1].conj()).norm_sqr())
            .sum()
    };
    let mut acc = 0.0;
    for (i, u) in us.iter().enumerate() {
        let w = if i == 0 || i == samples {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * value(u);
    }
    Ok(acc / (3.0 * samples as f64))
}

/// Converts a lab-frame propagator into the rotated frame:
/// `U₀(t)† U U₀(s)`.
pub fn lab_to_rotated(spec: &DriveSpec, u: &Unitary2, t: f64, s: f64) -> Unitary2 {
    frame_unitary(spec, t).dagger() * *u * frame_unitary(spec, s)
}

fn kernel_matrix(ks: &KernelSpec, s: f64, t: f64, n: usize) -> (Vec<f64>, Vec<Complex64>) {
    let h = (t - s) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| s + i as f64 * h).collect();
    let mut k = vec![Complex64::default(); n * n];
    for i in 0..n {
        for j in 0..=i {
            k[i * n + j] = kernel_fast(ks, grid[i], grid[j]);
        }
    }
    (grid, k)
}

fn trap_weight(i: usize, lo: usize, hi: usize, h: f64) -> f64 {
    if hi == lo {
        0.0
    } else if i == lo || i == hi {
        0.5 * h
    } else {
        h
    }
}

fn nested_trapezoid(ks: &KernelSpec, k: usize, t: f64, s: f64, n: usize) -> Complex64 {
    let (grid, km) = kernel_matrix(ks, s, t, n);
    let h = grid.get(1).map(|g| g - s).unwrap_or(0.0);
    let last = n - 1;
    let kk = |i: usize, j: usize| km[i * n + j];
    match k {
        1 => kk(last, 0),
        2 => (0..n).map(|j| kk(last, j) * kk(j, 0) * trap_weight(j, 0, last, h)).sum(),
        _ => {
            // g(τ_j) = ∫_s^{τ_j} K(τ_j, σ) K(σ, s) dσ
            let g: Vec<Complex64> = (0..n)
                .map(|j| (0..=j).map(|i| kk(j, i) * kk(i, 0) * trap_weight(i, 0, j, h)).sum())
                .collect();
            (0..n).map(|j| kk(last, j) * g[j] * trap_weight(j, 0, last, h)).sum()
        }
    }
}

/// Nested-quadrature value of `K^{⋆k}(t, s)` together with an error estimate.
pub fn nested_quadrature_with_estimate(
    ks: &KernelSpec,
    k: usize,
    t: f64,
    s: f64,
    n: usize,
) -> Result<(Complex64, f64)> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidArgument("nested quadrature supports k = 1, 2, 3".into()));
    }
    if n < 32 {
        return Err(Error::InvalidArgument("nested quadrature needs n >= 32".into()));
    }
    if t < s {
        return Err(Error::Acausal { t, s });
    }
    if k == 1 || t == s {
        return Ok((nested_trapezoid(ks, k, t, s, n), 0.0));
    }
    // three nested grids with halving spacing, then Romberg in h²
    let a = nested_trapezoid(ks, k, t, s, n);
    let b = nested_trapezoid(ks, k, t, s, 2 * n - 1);
    let c = nested_trapezoid(ks, k, t, s, 4 * n - 3);
    let r1 = (4.0 * b - a) / 3.0;
    let r2 = (4.0 * c - b) / 3.0;
    let best = (16.0 * r2 - r1) / 15.0;
    Ok((best, (best - r2).norm()))
}

/// Nested trapezoid quadrature of the `k`-fold ⋆-power, `k ≤ 3`, with
/// Richardson extrapolation over `n`, `2n−1` and `4n−3` points. Fails if the
/// extrapolation change exceeds `1e−8·max(1, |value|)`.
pub fn nested_quadrature_star_power(ks: &KernelSpec, k: usize, t: f64, s: f64, n: usize) -> Result<Complex64> {
    let (v, err) = nested_quadrature_with_estimate(ks, k, t, s, n)?;
    let limit = 1e-8 * v.norm().max(1.0);
    if err > limit {
        return Err(Error::Discretization { change: err, limit });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbf::GbfTable;
    use std::f64::consts::PI;

    #[test]
    fn long_time_average_static_and_driven() {
        let spec = DriveSpec::new(1.0).with_eps0(1.0).with_delta(0, Complex64::new(0.5, 0.0));
        let p = long_time_average(&spec, 64, 1e-11).unwrap();
        assert!((p - 0.5 * 0.25 / 1.25).abs() < 1e-9, "{p}");

        // brute force over many periods, loose
        let spec = DriveSpec::new(1.0)
            .with_eps0(1.1)
            .with_cos(1, 2.0)
            .with_delta(0, Complex64::new(0.25, 0.0));
        let p = long_time_average(&spec, 128, 1e-10).unwrap();
        let times: Vec<f64> = (0..=8000).map(|i| i as f64 * 0.05).collect();
        let us = integrate_trace(&spec, 0.0, &times, 1e-8, Frame::Lab, StepControl::default()).unwrap();
        let brute = us.iter().map(|u| u.u12.norm_sqr()).sum::<f64>() / us.len() as f64;
        assert!((p - brute).abs() < 0.02, "{p} vs {brute}");
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let spec = DriveSpec::new(1.0);
        for frame in [Frame::Lab, Frame::Rotated] {
            let u = integrate_schrodinger(&spec, 0.0, 5.0, 1e-10, frame).unwrap();
            assert!(u.max_abs_diff(&Mat2::identity()) < 1e-12);
        }
    }

    #[test]
    fn full_rabi_cycle() {
        let d = 0.8;
        let spec = DriveSpec::new(1.0).with_delta(0, Complex64::new(d, 0.0));
        let u = integrate_schrodinger(&spec, 0.0, 2.0 * PI / d, 1e-10, Frame::Lab).unwrap();
        assert!(u.u12.norm_sqr() < 1e-18);
        let u = integrate_schrodinger(&spec, 0.0, PI / d, 1e-10, Frame::Lab).unwrap();
        assert!((u.u12.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn frames_agree_on_transition_moduli() {
        let spec = DriveSpec::new(1.0)
            .with_eps0(1.0)
            .with_cos(1, 2.5)
            .with_delta(0, Complex64::new(0.7, 0.0))
            .with_delta(1, Complex64::new(0.2, 0.1));
        let times: Vec<f64> = (1..=8).map(|k| k as f64 * 0.8).collect();
        let lab = integrate_trace(&spec, 0.3, &times, 1e-11, Frame::Lab, StepControl::default()).unwrap();
        let rot = integrate_trace(&spec, 0.3, &times, 1e-11, Frame::Rotated, StepControl::default()).unwrap();
        for ((a, b), t) in lab.iter().zip(&rot).zip(&times) {
            assert!((a.u12.norm() - b.u12.norm()).abs() < 1e-8);
            let conv = lab_to_rotated(&spec, a, *t, 0.3);
            assert!(conv.max_abs_diff(b) < 1e-8);
        }
    }

    #[test]
    fn composition() {
        let spec = DriveSpec::new(1.0).with_cos(2, 3.0).with_delta(0, Complex64::new(1.0, 0.0));
        let tol = 1e-10;
        let a = integrate_schrodinger(&spec, 0.0, 2.0, tol, Frame::Lab).unwrap();
        let b = integrate_schrodinger(&spec, 2.0, 4.5, tol, Frame::Lab).unwrap();
        let c = integrate_schrodinger(&spec, 0.0, 4.5, tol, Frame::Lab).unwrap();
        assert!((b * a).max_abs_diff(&c) < 10.0 * tol);
    }

    #[test]
    fn nested_constant_kernel() {
        let j = 0.6;
        let ks = KernelSpec::new(GbfTable::from_coeffs(0, vec![Complex64::new(j, 0.0)]), 0.0, 1.0).unwrap();
        let (t, s) = (2.3, 0.4);
        let u: f64 = t - s;
        // K = j² u, K⋆K = j⁴ u³/6, K⋆K⋆K = j⁶ u⁵/120
        let v2 = nested_quadrature_star_power(&ks, 2, t, s, 64).unwrap();
        assert!((v2 - Complex64::new(j.powi(4) * u.powi(3) / 6.0, 0.0)).norm() < 1e-12);
        let v3 = nested_quadrature_star_power(&ks, 3, t, s, 64).unwrap();
        assert!((v3 - Complex64::new(j.powi(6) * u.powi(5) / 120.0, 0.0)).norm() < 1e-12);
        assert!(nested_quadrature_star_power(&ks, 4, t, s, 64).is_err());
    }
}
