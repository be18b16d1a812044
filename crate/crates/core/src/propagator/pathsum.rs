// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Order-resolved resummation of the divided-difference series on a
//! frequency lattice.
//!
//! Every term of the series is a coefficient product times one divided
//! difference of `e^{ix(t−s)}` whose nodes are partial sums of carrier
//! frequencies. Those partial sums are the values visited by a walk on a
//! bipartite lattice: even sites `A_P` carry `Pω`, odd sites `X_P` carry
//! `σε₀ + Pω`. A step `A_P → X_{P+l}` has weight `a_l`, a step
//! `X_Q → A_{Q+l}` has weight `b_l`. Summing `Π weights · DD(visited values)`
//! over all walks of length `j` gives level `y_j` of the block-bidiagonal
//! system
//!
//! ```text
//! dy₀/dL = iX y₀,   dy_j/dL = iX y_j + iW y_{j−1}
//! ```
//!
//! which is propagated with Taylor steps. The starting time `s` enters only
//! through the phase `e^{i·value(P)·s}` at the end site, so one propagation
//! in `L = t − s` serves every `s`.

use crate::error::{Error, Result};
use crate::gbf::GbfTable;
use crate::kernel::KernelSpec;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Bipartite lattice with one hopping table per direction.
#[derive(Debug, Clone)]
pub(crate) struct Lattice {
    pub radius: i64,
    pub omega: f64,
    /// `σε₀`, offset of odd-site values.
    pub odd_offset: f64,
    /// `(l, a_l)` for `A_P → X_{P+l}`.
    pub up: Vec<(i64, Complex64)>,
    /// `(l, b_l)` for `X_Q → A_{Q+l}`.
    pub down: Vec<(i64, Complex64)>,
}

impl Lattice {
    /// Sector whose walks start with a `D` step: `a_l = 𝒥_l`, `b_l = conj 𝒥_{−l}`.
    pub fn upper(table: &GbfTable, eps0: f64, omega: f64, radius: i64) -> Self {
        let nz = table.nonzero();
        Self {
            radius,
            omega,
            odd_offset: eps0,
            up: nz.clone(),
            down: nz.iter().map(|(l, j)| (-l, j.conj())).collect(),
        }
    }

    /// Sector whose walks start with a `D̄` step.
    pub fn lower(table: &GbfTable, eps0: f64, omega: f64, radius: i64) -> Self {
        Self::upper(&table.mirrored(), -eps0, omega, radius)
    }

    pub fn sites(&self) -> usize {
        (2 * self.radius + 1) as usize
    }

    pub fn index(&self, p: i64) -> Option<usize> {
        (p.abs() <= self.radius).then(|| (p + self.radius) as usize)
    }

    pub fn site(&self, idx: usize) -> i64 {
        idx as i64 - self.radius
    }

    pub fn value(&self, level: usize, idx: usize) -> f64 {
        let base = self.site(idx) as f64 * self.omega;
        if level % 2 == 0 {
            base
        } else {
            base + self.odd_offset
        }
    }

    fn values(&self, level: usize) -> Vec<f64> {
        (0..self.sites()).map(|i| self.value(level, i)).collect()
    }

    fn hop_norm(&self) -> f64 {
        let a: f64 = self.up.iter().map(|(_, w)| w.norm()).sum();
        let b: f64 = self.down.iter().map(|(_, w)| w.norm()).sum();
        a.max(b)
    }

    /// `out += W v` from level parity `from_even` to the other parity.
    fn hop(&self, v: &[Complex64], from_even: bool, out: &mut [Complex64]) {
        let table = if from_even { &self.up } else { &self.down };
        let n = self.sites() as i64;
        for &(l, w) in table {
            let lo = 0.max(-l);
            let hi = n.min(n - l);
            if lo >= hi {
                continue;
            }
            let src = &v[lo as usize..hi as usize];
            let dst = &mut out[(lo + l) as usize..(hi + l) as usize];
            for (o, x) in dst.iter_mut().zip(src) {
                *o += w * x;
            }
        }
    }
}

/// Tables wider than this go through FFT convolution.
const FFT_TAPS: usize = 24;

/// Convolution plan for one hop direction.
struct FftHop {
    lmin: i64,
    spectrum: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

fn smooth_size(n: usize) -> usize {
    (n..)
        .find(|&m| {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("unbounded search")
}

impl FftHop {
    fn new(table: &[(i64, Complex64)], sites: usize, planner: &mut FftPlanner<f64>) -> Option<Self> {
        if table.len() < FFT_TAPS {
            return None;
        }
        let lmin = table.iter().map(|t| t.0).min()?;
        let lmax = table.iter().map(|t| t.0).max()?;
        let n = smooth_size(sites + (lmax - lmin) as usize);
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut spectrum = vec![Complex64::default(); n];
        for &(l, w) in table {
            spectrum[(l - lmin) as usize] += w / n as f64;
        }
        fwd.process(&mut spectrum);
        Some(Self { lmin, spectrum, fwd, inv })
    }

    fn apply(&self, v: &[Complex64], out: &mut [Complex64], buf: &mut Vec<Complex64>) {
        let n = self.spectrum.len();
        buf.clear();
        buf.extend_from_slice(v);
        buf.resize(n, Complex64::default());
        self.fwd.process(buf);
        for (b, k) in buf.iter_mut().zip(&self.spectrum) {
            *b *= k;
        }
        self.inv.process(buf);
        // output site d comes from convolution index d − lmin
        for (d, o) in out.iter_mut().enumerate() {
            let m = d as i64 - self.lmin;
            if m >= 0 && (m as usize) < n {
                *o += buf[m as usize];
            }
        }
    }
}

/// Level vectors `y_0..y_J` at one sample of `L`.
pub(crate) type Levels = Vec<Vec<Complex64>>;

/// Propagates the block system from `L = 0` to each (ascending, non-negative)
/// sample and returns the level vectors there.
pub(crate) fn propagate(lat: &Lattice, init: &Levels, samples: &[f64], theta: f64) -> Result<Vec<Levels>> {
    if samples.iter().any(|l| *l < 0.0) || samples.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("lag samples must be ascending and >= 0".into()));
    }
    let nl = init.len();
    let vals: Vec<Vec<f64>> = (0..2).map(|p| lat.values(p)).collect();
    let xmax = vals.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let bound = xmax + lat.hop_norm();
    let hmax = if bound > 0.0 { theta / bound } else { f64::INFINITY };
    let mut planner = FftPlanner::new();
    let ffts = [
        FftHop::new(&lat.up, lat.sites(), &mut planner),
        FftHop::new(&lat.down, lat.sites(), &mut planner),
    ];
    let mut buf = Vec::new();

    let mut apply = |v: &Levels, h: f64| -> Levels {
        let mut out: Levels = vec![vec![Complex64::default(); lat.sites()]; nl];
        for j in 0..nl {
            let x = &vals[j % 2];
            for (o, (a, xv)) in out[j].iter_mut().zip(v[j].iter().zip(x)) {
                *o = a * xv;
            }
            if j > 0 {
                let from_even = (j - 1) % 2 == 0;
                match &ffts[usize::from(!from_even)] {
                    Some(f) => f.apply(&v[j - 1], &mut out[j], &mut buf),
                    None => lat.hop(&v[j - 1], from_even, &mut out[j]),
                }
            }
            let f = I * h;
            out[j].iter_mut().for_each(|z| *z *= f);
        }
        out
    };
    let norm = |v: &Levels| v.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);

    let mut y = init.clone();
    let mut at = 0.0;
    let mut out = Vec::with_capacity(samples.len());
    for &target in samples {
        let gap = target - at;
        if gap > 0.0 {
            let steps = (gap / hmax).ceil().max(1.0) as usize;
            let h = gap / steps as f64;
            for _ in 0..steps {
                let scale = norm(&y).max(1e-300);
                let mut term = y.clone();
                for q in 1..200 {
                    term = apply(&term, h / q as f64);
                    for (a, b) in y.iter_mut().zip(&term) {
                        for (x, z) in a.iter_mut().zip(b) {
                            *x += z;
                        }
                    }
                    if norm(&term) < 1e-17 * scale {
                        break;
                    }
                }
            }
            at = target;
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Initial lattice radius: two hops plus a margin. Callers widen it when
/// the edge amplitude is not negligible.
pub(crate) fn default_radius(ks: &KernelSpec) -> i64 {
    let (lo, hi) = ks.band();
    2 * lo.abs().max(hi.abs()) + 24
}

/// Summed modulus of the level-`j` amplitude within `band` of the lattice edge.
pub(crate) fn edge_mass(lat: &Lattice, levels: &Levels, band: i64) -> f64 {
    let mut m = 0.0;
    for v in levels {
        for (i, z) in v.iter().enumerate() {
            if lat.site(i).abs() > lat.radius - band {
                m += z.norm();
            }
        }
    }
    m
}

/// `Σ_P e^{i·value(P)·s} y[P]`.
pub(crate) fn phase_sum(lat: &Lattice, level: usize, v: &[Complex64], s: f64) -> Complex64 {
    if s == 0.0 {
        return v.iter().sum();
    }
    let mut acc = Complex64::default();
    for (i, z) in v.iter().enumerate() {
        if *z != Complex64::default() {
            acc += z * Complex64::from_polar(1.0, lat.value(level, i) * s);
        }
    }
    acc
}

pub(crate) fn level_l1(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}
