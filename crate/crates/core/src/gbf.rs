// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Generalized Bessel function (GBF) coefficients of the rotating-frame drive.
//!
//! In the frame that removes the longitudinal bias, the transverse coupling
//! becomes `D(t) = Σ_l 𝒥_l e^{i(ε₀ + lω)t}` with
//! `𝒥_l = Σ_k (Δ_k/2) G_p` over all `l = p·a + k·b`, where `G_p` are the
//! Fourier coefficients of `e^{iΦ_ac(t)}` on the `ω_ε` grid.
//!
//! `G_p` is computed two independent ways: a trapezoid/DFT quadrature of the
//! unimodular phase factor, and a discrete convolution of ordinary-Bessel
//! sequences (one factor per harmonic).

use crate::bessel::bessel_j_sequence;
use crate::error::{Error, Result};
use crate::waveform::{phase_antiderivative, DriveSpec};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Default relative truncation threshold for GBF tables.
pub const DEFAULT_THRESHOLD: f64 = 1e-12;

/// Quadrature self-check limit on coefficient changes under grid doubling.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Coefficients indexed by a contiguous integer range `[lo, lo + len)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedSeries {
    pub lo: i64,
    pub values: Vec<Complex64>,
}

impl IndexedSeries {
    pub fn zeros(lo: i64, hi: i64) -> Self {
        Self {
            lo,
            values: vec![Complex64::default(); (hi - lo + 1).max(0) as usize],
        }
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    /// Coefficient at `i`, zero outside the stored range.
    pub fn get(&self, i: i64) -> Complex64 {
        if i < self.lo || i > self.hi() {
            Complex64::default()
        } else {
            self.values[(i - self.lo) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values.iter().enumerate().map(move |(k, v)| (self.lo + k as i64, *v))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sum_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Restriction to `[lo, hi]`, zero-padded where needed.
    pub fn window(&self, lo: i64, hi: i64) -> Self {
        Self {
            lo,
            values: (lo..=hi).map(|i| self.get(i)).collect(),
        }
    }

    fn convolve_strided(&self, factor: &[Complex64], factor_lo: i64, stride: i64) -> Self {
        let f_hi = factor_lo + factor.len() as i64 - 1;
        let lo = self.lo + stride * factor_lo;
        let hi = self.hi() + stride * f_hi;
        let mut out = Self::zeros(lo, hi);
        for (i, a) in self.iter() {
            if a == Complex64::default() {
                continue;
            }
            for (q, b) in factor.iter().enumerate() {
                let idx = i + stride * (factor_lo + q as i64) - lo;
                out.values[idx as usize] += a * b;
            }
        }
        out
    }
}

/// Weighted GBF table `𝒥_l^Δ` over the retained band `[l_min, l_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbfTable {
    pub l_min: i64,
    pub l_max: i64,
    coeffs: Vec<Complex64>,
    /// Raw `G_p` the table was built from (empty for hand-built tables).
    pub raw_gbf: IndexedSeries,
    /// Relative threshold below which dropped coefficients fell.
    pub threshold: f64,
}

impl GbfTable {
    /// Table from explicit coefficients starting at `l_min`.
    pub fn from_coeffs(l_min: i64, coeffs: Vec<Complex64>) -> Self {
        let l_max = l_min + coeffs.len() as i64 - 1;
        Self {
            l_min,
            l_max,
            coeffs,
            raw_gbf: IndexedSeries::zeros(0, -1),
            threshold: 0.0,
        }
    }

    pub fn get(&self, l: i64) -> Complex64 {
        if l < self.l_min || l > self.l_max {
            Complex64::default()
        } else {
            self.coeffs[(l - self.l_min) as usize]
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn contains(&self, l: i64) -> bool {
        l >= self.l_min && l <= self.l_max
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(k, v)| (self.l_min + k as i64, *v))
    }

    /// Nonzero entries only.
    pub fn nonzero(&self) -> Vec<(i64, Complex64)> {
        self.iter().filter(|(_, v)| *v != Complex64::default()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sum_sq(&self) -> f64 {
        self.coeffs.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn sum_abs(&self) -> f64 {
        self.coeffs.iter().map(|v| v.norm()).sum()
    }

    /// Mirror table describing `D̄(t)`: coefficients `conj(𝒥_{−l})` at `l`.
    pub fn mirrored(&self) -> Self {
        let coeffs = self.coeffs.iter().rev().map(|v| v.conj()).collect();
        Self {
            l_min: -self.l_max,
            l_max: -self.l_min,
            coeffs,
            raw_gbf: IndexedSeries::zeros(0, -1),
            threshold: self.threshold,
        }
    }

    /// CSV rows `l,re,im,modulus`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("l,re,im,modulus\n");
        for (l, v) in self.iter() {
            s.push_str(&format!("{},{:.17e},{:.17e},{:.17e}\n", l, v.re, v.im, v.norm()));
        }
        s
    }
}

/// Carson-style bandwidth (in `p`) of `e^{iΦ_ac}`.
fn phase_bandwidth(spec: &DriveSpec) -> f64 {
    let w = spec.omega_eps();
    let a: f64 = spec
        .a_coeffs
        .iter()
        .filter(|h| h.amp != 0.0)
        .map(|h| h.amp.abs() / w + h.n as f64)
        .sum();
    let b: f64 = spec
        .b_coeffs
        .iter()
        .filter(|h| h.amp != 0.0)
        .map(|h| h.amp.abs() / w + h.m as f64)
        .sum();
    a + b
}

fn dft_gbf(spec: &DriveSpec, p_max: i64, n: usize) -> IndexedSeries {
    let te = 2.0 * PI / spec.omega_eps();
    let samples: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, phase_antiderivative(spec, te * j as f64 / n as f64)))
        .collect();
    let roots: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();
    let mut out = IndexedSeries::zeros(-p_max, p_max);
    let nn = n as i64;
    for (slot, p) in out.values.iter_mut().zip(-p_max..=p_max) {
        let pm = p.rem_euclid(nn);
        let mut acc = Complex64::default();
        for (j, f) in samples.iter().enumerate() {
            let idx = ((j as i64 * pm) % nn) as usize;
            acc += f * roots[idx];
        }
        *slot = acc / n as f64;
    }
    out
}

/// `G_p` for `p ∈ [−p_max, p_max]` by trapezoid quadrature over one period of
/// `ω_ε`, with a grid-doubling self-check.
pub fn gbf_coefficients(spec: &DriveSpec, p_max: i64) -> Result<IndexedSeries> {
    if p_max < 0 {
        return Err(Error::InvalidArgument("p_max must be >= 0".into()));
    }
    if !spec.has_longitudinal_drive() {
        let mut g = IndexedSeries::zeros(-p_max, p_max);
        g.values[p_max as usize] = Complex64::new(1.0, 0.0);
        return Ok(g);
    }
    let min_pts = 8.0 * (p_max as f64 + phase_bandwidth(spec) + 4.0);
    let n = (min_pts.ceil() as usize).next_power_of_two().max(64);
    let coarse = dft_gbf(spec, p_max, n);
    let fine = dft_gbf(spec, p_max, 2 * n);
    let change = coarse
        .values
        .iter()
        .zip(&fine.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if change > QUADRATURE_TOL {
        return Err(Error::QuadratureNotConverged {
            change,
            limit: QUADRATURE_TOL,
        });
    }
    Ok(fine)
}

const BESSEL_TAIL: f64 = 1e-14;

fn bessel_factor(x: f64) -> Result<Vec<f64>> {
    let ax = x.abs();
    let q_max = (ax + 12.0 * ax.cbrt().max(1.0) + 30.0).ceil() as usize;
    let seq = bessel_j_sequence(q_max, x);
    let tail = seq[q_max].abs().max(seq[q_max - 1].abs());
    if tail >= BESSEL_TAIL {
        return Err(Error::BesselNotConverged { tail, order: q_max });
    }
    Ok(seq)
}

/// `G_p` for `p ∈ [−p_max, p_max]` as a product of single-harmonic
/// Jacobi–Anger expansions.
pub fn gbf_via_bessel_convolution(spec: &DriveSpec, p_max: i64) -> Result<IndexedSeries> {
    if p_max < 0 {
        return Err(Error::InvalidArgument("p_max must be >= 0".into()));
    }
    let w = spec.omega_eps();
    let mut acc = IndexedSeries {
        lo: 0,
        values: vec![Complex64::new(1.0, 0.0)],
    };
    for h in spec.a_coeffs.iter().filter(|h| h.amp != 0.0) {
        // e^{i x sin(nθ)} = Σ_q J_q(x) e^{i q n θ}
        let x = h.amp / (h.n as f64 * w);
        let seq = bessel_factor(x)?;
        let q_max = seq.len() as i64 - 1;
        let factor: Vec<Complex64> = (-q_max..=q_max)
            .map(|q| {
                let v = seq[q.unsigned_abs() as usize];
                let v = if q < 0 && q % 2 != 0 { -v } else { v };
                Complex64::new(v, 0.0)
            })
            .collect();
        acc = acc.convolve_strided(&factor, -q_max, h.n as i64);
    }
    for h in spec.b_coeffs.iter().filter(|h| h.amp != 0.0) {
        // e^{i x (1 − cos(mθ))} = e^{ix} Σ_q (−i)^q J_q(x) e^{i q m θ}
        let x = h.amp / (h.m as f64 * w);
        let seq = bessel_factor(x)?;
        let q_max = seq.len() as i64 - 1;
        let lead = Complex64::from_polar(1.0, x);
        let minus_i = Complex64::new(0.0, -1.0);
        let factor: Vec<Complex64> = (-q_max..=q_max)
            .map(|q| {
                let v = seq[q.unsigned_abs() as usize];
                let v = if q < 0 && q % 2 != 0 { -v } else { v };
                lead * minus_i.powi(q.rem_euclid(4) as i32) * v
            })
            .collect();
        acc = acc.convolve_strided(&factor, -q_max, h.m as i64);
    }
    Ok(acc.window(-p_max, p_max))
}

/// `p_max` such that every `|G_p|` with `|p| > p_max` is below
/// `threshold · max|G|`.
pub fn gbf_p_max(spec: &DriveSpec, threshold: f64) -> Result<i64> {
    if !spec.has_longitudinal_drive() {
        return Ok(0);
    }
    let mut guess = (phase_bandwidth(spec).ceil() as i64).max(4);
    loop {
        let wide = 2 * guess + 16;
        let g = gbf_coefficients(spec, wide)?;
        let cut = threshold * g.max_abs();
        let p = g.iter().filter(|(_, v)| v.norm() >= cut).map(|(p, _)| p.abs()).max().unwrap_or(0);
        if p + 8 < wide {
            return Ok(p);
        }
        guess = wide;
    }
}

fn weighted_from_gbf(spec: &DriveSpec, g: &IndexedSeries, l_lo: i64, l_hi: i64) -> Vec<Complex64> {
    let a = spec.eps_mult as i64;
    let b = spec.delta_mult as i64;
    (l_lo..=l_hi)
        .map(|l| {
            spec.d_coeffs
                .iter()
                .filter_map(|c| {
                    let r = l - c.k as i64 * b;
                    (r % a == 0).then(|| 0.5 * c.value() * g.get(r / a))
                })
                .sum()
        })
        .collect()
}

fn p_max_for_band(spec: &DriveSpec, band: i64) -> i64 {
    let a = spec.eps_mult as i64;
    let reach = band + spec.delta_mult as i64 * spec.max_transverse_index() as i64;
    (reach + a - 1) / a + 1
}

/// `𝒥_l^Δ` for `l ∈ [−table_band, table_band]`.
pub fn weighted_coefficients(spec: &DriveSpec, table_band: i64) -> Result<GbfTable> {
    if table_band < 0 {
        return Err(Error::InvalidArgument("table_band must be >= 0".into()));
    }
    let g = gbf_coefficients(spec, p_max_for_band(spec, table_band))?;
    let coeffs = weighted_from_gbf(spec, &g, -table_band, table_band);
    Ok(GbfTable {
        l_min: -table_band,
        l_max: table_band,
        coeffs,
        raw_gbf: g,
        threshold: 0.0,
    })
}

/// Smallest `[l_min, l_max]` outside of which every `|𝒥_l|` is below
/// `threshold · max_l |𝒥_l|`. The search starts from a Carson-rule guess
/// and widens until the condition is certified on a margin.
pub fn truncation_band(spec: &DriveSpec, threshold: f64) -> Result<(i64, i64)> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument("threshold must lie in (0, 1)".into()));
    }
    let a = spec.eps_mult as i64;
    let b = spec.delta_mult as i64;
    let k = spec.max_transverse_index() as i64;
    let mut guess = a * (phase_bandwidth(spec).ceil() as i64) + b * k;
    loop {
        let wide = 2 * guess + 16;
        let table = weighted_coefficients(spec, wide)?;
        let cut = threshold * table.max_abs();
        let kept: Vec<i64> = table
            .iter()
            .filter(|(_, v)| *v != Complex64::default() && v.norm() >= cut)
            .map(|(l, _)| l)
            .collect();
        let (lo, hi) = match (kept.first(), kept.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Ok((0, 0)),
        };
        if lo > -wide + 8 && hi < wide - 8 {
            return Ok((lo, hi));
        }
        guess = wide;
    }
}

/// Table on the band selected by [`truncation_band`].
pub fn build_table(spec: &DriveSpec, threshold: f64) -> Result<GbfTable> {
    spec.validate()?;
    let (lo, hi) = truncation_band(spec, threshold)?;
    let reach = lo.abs().max(hi.abs());
    let g = gbf_coefficients(spec, p_max_for_band(spec, reach))?;
    let coeffs = weighted_from_gbf(spec, &g, lo, hi);
    Ok(GbfTable {
        l_min: lo,
        l_max: hi,
        coeffs,
        raw_gbf: g,
        threshold,
    })
}
