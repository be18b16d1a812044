// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Rotating-wave limits: each coefficient `𝒥_l` is treated as an isolated
//! two-level resonance with detuning `δ_l`, and amplitude sweeps over two
//! drive parameters.

use crate::error::{Error, Result};
use crate::gbf::{build_table, GbfTable, DEFAULT_THRESHOLD};
use crate::mat2::Mat2;
use crate::waveform::DriveSpec;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Sign convention for the detuning of the `l`-th channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detuning {
    /// `δ_l = ε₀ + lω`, the carrier offset of `𝒥_l` in the rotated frame.
    #[default]
    Carrier,
    /// `δ_l = lω − ε₀`.
    Flipped,
}

impl Detuning {
    pub fn value(self, l: i64, eps0: f64, omega: f64) -> f64 {
        match self {
            Detuning::Carrier => eps0 + l as f64 * omega,
            Detuning::Flipped => l as f64 * omega - eps0,
        }
    }
}

impl FromStr for Detuning {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "carrier" => Ok(Self::Carrier),
            "flipped" => Ok(Self::Flipped),
            _ => Err(Error::InvalidArgument(format!("unknown detuning convention '{s}'"))),
        }
    }
}

/// `[[0, 𝒥_l], [conj 𝒥_l, 0]]`.
pub fn rwa_hamiltonian(gbf: &GbfTable, l: i64) -> Result<Mat2> {
    if !gbf.contains(l) {
        return Err(Error::OutOfBand {
            index: l,
            lo: gbf.l_min,
            hi: gbf.l_max,
        });
    }
    let j = gbf.get(l);
    Ok(Mat2::new(Complex64::default(), j, j.conj(), Complex64::default()))
}

/// Half the generalized Rabi frequency, `√(|𝒥|² + δ²/4)`.
pub fn rabi_half_frequency(j: Complex64, detuning: f64) -> f64 {
    (j.norm_sqr() + 0.25 * detuning * detuning).sqrt()
}

fn channels(gbf: &GbfTable, eps0: f64, omega: f64, sign: Detuning) -> impl Iterator<Item = (f64, f64)> + '_ {
    gbf.iter().filter(|(_, j)| j.norm_sqr() > 0.0).map(move |(l, j)| {
        let w = rabi_half_frequency(j, sign.value(l, eps0, omega));
        (j.norm_sqr() / (w * w), w)
    })
}

/// Sum of independent Rabi oscillations,
/// `½ Σ_l (|𝒥_l|²/W_l²)(1 − cos 2W_l t)` with `W_l = √(|𝒥_l|² + δ_l²/4)`.
pub fn rwa_probability_with(gbf: &GbfTable, eps0: f64, omega: f64, t: f64, sign: Detuning) -> f64 {
    channels(gbf, eps0, omega, sign)
        .map(|(weight, w)| 0.5 * weight * (1.0 - (2.0 * w * t).cos()))
        .sum()
}

pub fn rwa_probability(gbf: &GbfTable, eps0: f64, omega: f64, t: f64) -> f64 {
    rwa_probability_with(gbf, eps0, omega, t, Detuning::Carrier)
}

/// Time average `½ Σ_l |𝒥_l|²/W_l²`.
pub fn rwa_average_with(gbf: &GbfTable, eps0: f64, omega: f64, sign: Detuning) -> f64 {
    channels(gbf, eps0, omega, sign).map(|(weight, _)| 0.5 * weight).sum()
}

pub fn rwa_average(gbf: &GbfTable, eps0: f64, omega: f64) -> f64 {
    rwa_average_with(gbf, eps0, omega, Detuning::Carrier)
}

/// A drive amplitude that a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "lowercase")]
pub enum Axis {
    /// Amplitude of the cosine harmonic `n` of the bias.
    Cos(u32),
    /// Amplitude of the sine harmonic `m` of the bias.
    Sin(u32),
    /// Real part of the transverse coefficient `Δ_k`.
    Delta(i32),
}

impl Axis {
    fn exists_in(&self, spec: &DriveSpec) -> bool {
        match *self {
            Axis::Cos(n) => spec.a_coeffs.iter().any(|h| h.n == n),
            Axis::Sin(m) => spec.b_coeffs.iter().any(|h| h.m == m),
            Axis::Delta(k) => spec.d_coeffs.iter().any(|c| c.k == k),
        }
    }

    fn apply(&self, spec: DriveSpec, value: f64) -> DriveSpec {
        match *self {
            Axis::Cos(n) => spec.with_cos(n, value),
            Axis::Sin(m) => spec.with_sin(m, value),
            Axis::Delta(k) => {
                let im = spec.d_coeffs.iter().find(|c| c.k == k).map(|c| c.im).unwrap_or(0.0);
                spec.with_delta(k, Complex64::new(value, im))
            }
        }
    }
}

impl FromStr for Axis {
    type Err = Error;
    /// `A1`, `B2`, `D0`, `D-1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad axis '{s}' (expected A<n>, B<m> or D<k>)"));
        let (head, rest) = s.split_at(s.char_indices().nth(1).map(|c| c.0).ok_or_else(bad)?);
        match head {
            "A" | "a" => rest.parse().map(Axis::Cos).map_err(|_| bad()),
            "B" | "b" => rest.parse().map(Axis::Sin).map_err(|_| bad()),
            "D" | "d" => rest.parse().map(Axis::Delta).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Cos(n) => write!(f, "A{n}"),
            Axis::Sin(m) => write!(f, "B{m}"),
            Axis::Delta(k) => write!(f, "D{k}"),
        }
    }
}

/// `(lo, hi, count)` in units of `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Range {
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        Self { lo, hi, count }
    }

    pub fn points(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.lo + i as f64 * step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub template: DriveSpec,
    pub axis1: Axis,
    pub axis2: Axis,
    pub range1: Range,
    pub range2: Range,
    #[serde(default)]
    pub detuning: Detuning,
}

impl SweepSpec {
    pub fn new(template: DriveSpec, axis1: Axis, range1: Range, axis2: Axis, range2: Range) -> Self {
        Self {
            template,
            axis1,
            axis2,
            range1,
            range2,
            detuning: Detuning::Carrier,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.template.validate()?;
        if self.range1.count < 2 || self.range2.count < 2 {
            return Err(Error::InvalidSpec("sweep counts must be >= 2".into()));
        }
        if self.axis1 == self.axis2 {
            return Err(Error::InvalidSpec("sweep axes must differ".into()));
        }
        for a in [self.axis1, self.axis2] {
            if !a.exists_in(&self.template) {
                return Err(Error::InvalidSpec(format!("axis {a} is not present in the template")));
            }
        }
        let finite = |r: &Range| r.lo.is_finite() && r.hi.is_finite();
        if !finite(&self.range1) || !finite(&self.range2) {
            return Err(Error::InvalidSpec("sweep ranges must be finite".into()));
        }
        Ok(())
    }

    /// Drive at cell `(i1, i2)`.
    pub fn cell(&self, v1: f64, v2: f64) -> DriveSpec {
        let s = self.axis1.apply(self.template.clone(), v1);
        self.axis2.apply(s, v2)
    }
}

/// Values over a sweep; `values[i2 * n1 + i1]`, so axis 2 is the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub values: Vec<f64>,
}

impl SweepGrid {
    pub fn get(&self, i1: usize, i2: usize) -> f64 {
        self.values[i2 * self.axis1.len() + i1]
    }
}

/// Fills a sweep cell by cell. Cells are computed in parallel but collected
/// in index order.
pub fn sweep_map<F>(sweep: &SweepSpec, f: F) -> Result<SweepGrid>
where
    F: Fn(&DriveSpec) -> Result<f64> + Sync,
{
    sweep.validate()?;
    let a1 = sweep.range1.points();
    let a2 = sweep.range2.points();
    let n1 = a1.len();
    let values = (0..n1 * a2.len())
        .into_par_iter()
        .map(|idx| f(&sweep.cell(a1[idx % n1], a2[idx / n1])))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SweepGrid {
        axis1: a1,
        axis2: a2,
        values,
    })
}

/// `|𝒥_l|` over the sweep, each cell from a fresh table.
pub fn rabi_map(sweep: &SweepSpec, l: i64) -> Result<SweepGrid> {
    sweep_map(sweep, |spec| Ok(build_table(spec, DEFAULT_THRESHOLD)?.get(l).norm()))
}

/// Averaged rotating-wave probability over the sweep.
pub fn avg_map(sweep: &SweepSpec) -> Result<SweepGrid> {
    sweep_map(sweep, |spec| {
        let table = build_table(spec, DEFAULT_THRESHOLD)?;
        Ok(rwa_average_with(&table, spec.eps0, spec.omega, sweep.detuning))
    })
}
