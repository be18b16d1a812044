// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Analytic divided-difference series for ⋆-powers of the kernel and for
//! the unitary itself.
//!
//! `K^{⋆k}(t,s) = (−i)^{2k−1} Σ Π conj(𝒥_{n_i}) 𝒥_{m_i} e^{i(M_k−N_k)ωt}
//! e^{i[nodes](t−s)}`, summed over index tuples `(m_i, n_i)`. Direct
//! enumeration is offered for small bands; the lattice resummation in
//! [`super::pathsum`] handles the rest.

use super::pathsum::{default_radius, edge_mass, level_l1, phase_sum, propagate, Lattice, Levels};
use crate::divdiff::{exp_dd_slice, NodeList};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::mat2::{Mat2, Unitary2};
use num_complex::Complex64;

/// Summation multi-index of the `k`-th ⋆-power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexTuple {
    pub m: Vec<i64>,
    pub n: Vec<i64>,
}

impl IndexTuple {
    pub fn new(m: Vec<i64>, n: Vec<i64>) -> Result<Self> {
        if m.is_empty() || m.len() != n.len() {
            return Err(Error::InvalidArgument("index tuple needs k >= 1 matching m and n".into()));
        }
        Ok(Self { m, n })
    }

    pub fn order(&self) -> usize {
        self.m.len()
    }

    /// `M_k − N_k`.
    pub fn net(&self) -> i64 {
        self.m.iter().sum::<i64>() - self.n.iter().sum::<i64>()
    }

    pub fn validate(&self, ks: &KernelSpec) -> Result<()> {
        let (lo, hi) = ks.band();
        for &i in self.m.iter().chain(&self.n) {
            if i < lo || i > hi {
                return Err(Error::OutOfBand { index: i, lo, hi });
            }
        }
        Ok(())
    }
}

/// Nodes of the divided difference attached to one index tuple, in the
/// form that pairs with the prefactor `e^{i(M_k−N_k)ωt}`.
///
/// Starts from `[ε₀ + n₁ω, 0]`; each later factor `j` shifts every existing
/// node by `−(m_j − n_j)ω` and appends `ε₀ + n_jω` and `0`.
pub fn node_list(tuple: &IndexTuple, eps0: f64, omega: f64) -> NodeList {
    let mut nodes = Vec::with_capacity(2 * tuple.order());
    nodes.push(eps0 + tuple.n[0] as f64 * omega);
    nodes.push(0.0);
    for j in 1..tuple.order() {
        let shift = (tuple.m[j] - tuple.n[j]) as f64 * omega;
        for x in nodes.iter_mut() {
            *x -= shift;
        }
        nodes.push(eps0 + tuple.n[j] as f64 * omega);
        nodes.push(0.0);
    }
    NodeList::new(nodes).expect("node list is non-empty and finite")
}

/// Default cap on enumerated index tuples.
pub const DEFAULT_TUPLE_BUDGET: u128 = 1_000_000;

fn minus_i_pow(p: usize) -> Complex64 {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ][p % 4]
}

/// `K^{⋆k}(t, s)` by direct enumeration of index tuples. Terms whose
/// coefficient product is below `1e−16` of the largest are skipped.
pub fn star_power_analytic(ks: &KernelSpec, k: usize, t: f64, s: f64) -> Result<Complex64> {
    star_power_enumerated(ks, k, t, s, DEFAULT_TUPLE_BUDGET)
}

pub fn star_power_enumerated(ks: &KernelSpec, k: usize, t: f64, s: f64, budget: u128) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if t < s {
        return Err(Error::Acausal { t, s });
    }
    let terms = ks.terms();
    let count = (terms.len() as u128).checked_pow(2 * k as u32).unwrap_or(u128::MAX);
    if count > budget {
        return Err(Error::BudgetExceeded { required: count, budget });
    }
    if terms.is_empty() {
        return Ok(Complex64::default());
    }
    let jmax = terms.iter().map(|(_, j)| j.norm()).fold(0.0, f64::max);
    let cut = 1e-16 * jmax.powi(2 * k as i32);
    let nt = terms.len();
    let mut idx = vec![0usize; 2 * k];
    let mut acc = Complex64::default();
    let u = t - s;
    loop {
        let mut coef = Complex64::new(1.0, 0.0);
        for i in 0..k {
            coef *= terms[idx[2 * i + 1]].1.conj() * terms[idx[2 * i]].1;
        }
        if coef.norm() >= cut {
            let tuple = IndexTuple {
                m: (0..k).map(|i| terms[idx[2 * i]].0).collect(),
                n: (0..k).map(|i| terms[idx[2 * i + 1]].0).collect(),
            };
            let nodes = node_list(&tuple, ks.eps0, ks.omega);
            let phase = Complex64::from_polar(1.0, tuple.net() as f64 * ks.omega * t);
            acc += coef * phase * exp_dd_slice(nodes.nodes(), u);
        }
        // odometer
        let mut p = 0;
        loop {
            if p == 2 * k {
                return Ok(minus_i_pow(2 * k - 1) * acc);
            }
            idx[p] += 1;
            if idx[p] < nt {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

/// Knobs of the lattice resummation.
#[derive(Debug, Clone, Copy)]
pub struct SeriesOptions {
    /// Truncate once the `k`-th order's bound drops below this.
    pub tol: f64,
    pub k_max: usize,
    /// Lattice radius; `None` picks twice the band reach plus a margin.
    pub radius: Option<i64>,
    /// Taylor step size in units of the inverse generator norm.
    pub theta: f64,
    /// Compute the lower row from its own lattice instead of by conjugation.
    pub independent_lower: bool,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            k_max: 40,
            radius: None,
            theta: 4.0,
            independent_lower: true,
        }
    }
}

/// `K^{⋆k}(t, s)` by lattice resummation; exact up to the lattice edge.
pub fn star_power_pathsum(ks: &KernelSpec, k: usize, t: f64, s: f64, radius: Option<i64>) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if t < s {
        return Err(Error::Acausal { t, s });
    }
    let mut r = radius.unwrap_or_else(|| default_radius(ks));
    let reach = ks.band().0.abs().max(ks.band().1.abs()).max(1);
    loop {
        let lat = Lattice::upper(&ks.gbf, ks.eps0, ks.omega, r);
        let mut init: Levels = vec![vec![Complex64::default(); lat.sites()]; 2 * k + 1];
        for (l, j) in ks.terms() {
            if let Some(i) = lat.index(*l) {
                init[1][i] += j;
            }
        }
        let out = propagate(&lat, &init, &[t - s], 4.0)?;
        let y = &out[0];
        let total: f64 = y.iter().map(|v| level_l1(v)).sum();
        if radius.is_some() || edge_mass(&lat, y, reach) <= 1e-15 * total.max(1e-300) || r > 1 << 14 {
            return Ok(minus_i_pow(2 * k - 1) * phase_sum(&lat, 2 * k, &y[2 * k], s));
        }
        r *= 2;
    }
}

/// Unitaries at ascending times `t ≥ s` from the series.
#[derive(Debug, Clone)]
pub struct SeriesTrace {
    pub times: Vec<f64>,
    pub u: Vec<Unitary2>,
    /// Highest order `k` kept.
    pub orders: usize,
    /// Bound on the first dropped order.
    pub last_term: f64,
    pub radius: i64,
}

struct SectorResult {
    lat: Lattice,
    samples: Vec<Levels>,
}

fn run_sector(lat: Lattice, lags: &[f64], levels: usize, theta: f64) -> Result<SectorResult> {
    let mut init: Levels = vec![vec![Complex64::default(); lat.sites()]; levels];
    init[0][lat.index(0).expect("origin inside lattice")] = Complex64::new(1.0, 0.0);
    let samples = propagate(&lat, &init, lags, theta)?;
    Ok(SectorResult { lat, samples })
}

/// Bound on the order-`k` contribution of a sector, over all samples and
/// every `s`: the summed moduli at levels `2k` and `2k+1`.
fn order_bound(sec: &SectorResult, k: usize) -> f64 {
    sec.samples
        .iter()
        .map(|y| {
            let a = y.get(2 * k).map(|v| level_l1(v)).unwrap_or(0.0);
            let b = y.get(2 * k + 1).map(|v| level_l1(v)).unwrap_or(0.0);
            a.max(b)
        })
        .fold(0.0, f64::max)
}

fn assemble(sec: &SectorResult, y: &Levels, s: f64, k: usize) -> (Complex64, Complex64) {
    let mut diag = Complex64::default();
    let mut off = Complex64::default();
    for j in 0..=2 * k + 1 {
        let v = phase_sum(&sec.lat, j, &y[j], s);
        if j % 2 == 0 {
            diag += v;
        } else {
            off -= v;
        }
    }
    (diag, off)
}

/// Series unitary `U(t_i, s)` for every `t_i` in ascending `times`.
pub fn unitary_analytic_trace(ks: &KernelSpec, s: f64, times: &[f64], opt: &SeriesOptions) -> Result<SeriesTrace> {
    if !(opt.tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if let Some(&t0) = times.first() {
        if t0 < s {
            return Err(Error::Acausal { t: t0, s });
        }
    }
    let lags: Vec<f64> = times.iter().map(|t| t - s).collect();
    let reach = ks.band().0.abs().max(ks.band().1.abs()).max(1);
    let mut radius = opt.radius.unwrap_or_else(|| default_radius(ks));
    let mut k_try = 12.min(opt.k_max).max(1);
    loop {
        let levels = 2 * k_try + 2;
        let upper = run_sector(Lattice::upper(&ks.gbf, ks.eps0, ks.omega, radius), &lags, levels, opt.theta)?;
        let lower = if opt.independent_lower {
            Some(run_sector(Lattice::lower(&ks.gbf, ks.eps0, ks.omega, radius), &lags, levels, opt.theta)?)
        } else {
            None
        };
        let bound = |k: usize| {
            let a = order_bound(&upper, k);
            lower.as_ref().map(|l| a.max(order_bound(l, k))).unwrap_or(a)
        };
        let k_star = (1..=k_try).find(|&k| bound(k) < opt.tol);
        let Some(k_star) = k_star else {
            if k_try >= opt.k_max {
                return Err(Error::SeriesNotConverged {
                    orders: opt.k_max,
                    last_norm: bound(k_try),
                    tol: opt.tol,
                });
            }
            k_try = (2 * k_try).min(opt.k_max);
            continue;
        };
        if opt.radius.is_none() && radius < (1 << 14) {
            let mass = |sec: &SectorResult| {
                sec.samples
                    .iter()
                    .map(|y| edge_mass(&sec.lat, y, reach))
                    .fold(0.0, f64::max)
            };
            let m = lower.as_ref().map(|l| mass(&upper).max(mass(l))).unwrap_or_else(|| mass(&upper));
            if m > 1e-3 * opt.tol {
                radius *= 2;
                continue;
            }
        }
        let u = upper
            .samples
            .iter()
            .enumerate()
            .map(|(i, y)| {
                let (u11, u12) = assemble(&upper, y, s, k_star);
                let (u22, u21) = match &lower {
                    Some(l) => assemble(l, &l.samples[i], s, k_star),
                    None => (u11.conj(), -u12.conj()),
                };
                Mat2::new(u11, u12, u21, u22)
            })
            .collect();
        return Ok(SeriesTrace {
            times: times.to_vec(),
            u,
            orders: k_star,
            last_term: bound(k_star),
            radius,
        });
    }
}

/// Series unitary `U(t, s)`.
pub fn unitary_analytic(ks: &KernelSpec, t: f64, s: f64, tol: f64, k_max: usize) -> Result<Unitary2> {
    if t < s {
        return Err(Error::Acausal { t, s });
    }
    let opt = SeriesOptions {
        tol,
        k_max,
        ..SeriesOptions::default()
    };
    Ok(unitary_analytic_trace(ks, s, &[t], &opt)?.u[0])
}

/// Series unitary on the grid `t_i, s_j` of `[s0, t1]` with `n` points,
/// `j ≤ i`; entry `(i, j)` is stored at `i * n + j`.
pub fn unitary_analytic_map(ks: &KernelSpec, s0: f64, t1: f64, n: usize, opt: &SeriesOptions) -> Result<(Vec<Unitary2>, usize)> {
    if n < 2 || !(t1 > s0) {
        return Err(Error::InvalidArgument("map needs n >= 2 and t1 > s0".into()));
    }
    let h = (t1 - s0) / (n - 1) as f64;
    let lags: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    // one propagation over all lags from origin; phases place each start time
    let base = unitary_analytic_trace(ks, 0.0, &lags, opt)?;
    let upper_lat = Lattice::upper(&ks.gbf, ks.eps0, ks.omega, base.radius);
    let lower_lat = Lattice::lower(&ks.gbf, ks.eps0, ks.omega, base.radius);
    let levels = 2 * base.orders + 2;
    let upper = run_sector(upper_lat, &lags, levels, opt.theta)?;
    let lower = run_sector(lower_lat, &lags, levels, opt.theta)?;
    let mut out = vec![Mat2::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let lag = i - j;
            let s = s0 + j as f64 * h;
            let (u11, u12) = assemble(&upper, &upper.samples[lag], s, base.orders);
            let (u22, u21) = assemble(&lower, &lower.samples[lag], s, base.orders);
            out[i * n + j] = Mat2::new(u11, u12, u21, u22);
        }
    }
    Ok((out, base.orders))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbf::GbfTable;
    use crate::kernel::kernel_at_dd;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn node_list_examples() {
        let t = IndexTuple::new(vec![3], vec![-1]).unwrap();
        assert_eq!(node_list(&t, 0.5, 2.0).nodes(), &[0.5 - 2.0, 0.0]);
        let t = IndexTuple::new(vec![1, 4], vec![2, -1]).unwrap();
        let nl = node_list(&t, 0.5, 1.0);
        // shift by −(m₂ − n₂) = −5
        assert_eq!(nl.nodes(), &[0.5 + 2.0 - 5.0, -5.0, 0.5 - 1.0, 0.0]);
    }

    #[test]
    fn k1_anchor_and_constant_kernel() {
        let table = GbfTable::from_coeffs(-1, vec![c(0.2, 0.1), c(0.4, 0.0), c(-0.3, 0.2)]);
        let ks = KernelSpec::new(table, 0.3, 1.0).unwrap();
        for &(t, s) in &[(1.0, 0.0), (4.0, 1.5), (2.0, 2.0)] {
            let a = star_power_analytic(&ks, 1, t, s).unwrap();
            let b = kernel_at_dd(&ks, t, s).unwrap();
            assert!((a - b).norm() < 1e-13);
            let p = star_power_pathsum(&ks, 1, t, s, None).unwrap();
            assert!((p - b).norm() < 1e-12);
        }
        let j = 0.6;
        let ks = KernelSpec::new(GbfTable::from_coeffs(0, vec![c(j, 0.0)]), 0.0, 1.0).unwrap();
        let u: f64 = 1.7;
        let v = star_power_analytic(&ks, 2, u + 0.2, 0.2).unwrap();
        assert!((v - c(j.powi(4) * u.powi(3) / 6.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn enumeration_and_lattice_agree() {
        let table = GbfTable::from_coeffs(-1, vec![c(0.2, 0.1), c(0.4, 0.0), c(-0.3, 0.2)]);
        let ks = KernelSpec::new(table, 0.3, 1.0).unwrap();
        for k in 1..=3 {
            let a = star_power_analytic(&ks, k, 3.1, 0.4).unwrap();
            let b = star_power_pathsum(&ks, k, 3.1, 0.4, None).unwrap();
            assert!((a - b).norm() < 1e-12 * a.norm().max(1.0), "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let table = GbfTable::from_coeffs(-5, vec![c(0.1, 0.0); 11]);
        let ks = KernelSpec::new(table, 0.0, 1.0).unwrap();
        match star_power_enumerated(&ks, 4, 1.0, 0.0, 1000) {
            Err(Error::BudgetExceeded { required, budget }) => {
                assert_eq!(required, 11u128.pow(8));
                assert_eq!(budget, 1000);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn static_rabi_series() {
        let d = 0.9;
        let ks = KernelSpec::new(GbfTable::from_coeffs(0, vec![c(d / 2.0, 0.0)]), 0.0, 1.0).unwrap();
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let tr = unitary_analytic_trace(&ks, 0.0, &times, &SeriesOptions::default()).unwrap();
        for (t, u) in times.iter().zip(&tr.u) {
            assert!((u.u11 - c((d * t / 2.0).cos(), 0.0)).norm() < 1e-9);
            assert!((u.u12.norm_sqr() - (d * t / 2.0).sin().powi(2)).abs() < 1e-9);
            assert!(u.unitarity_defect() < 1e-8);
        }
        let empty = KernelSpec::new(GbfTable::from_coeffs(0, vec![c(0.0, 0.0)]), 0.2, 1.0).unwrap();
        let u = unitary_analytic(&empty, 2.0, 0.5, 1e-10, 10).unwrap();
        assert!(u.max_abs_diff(&Mat2::identity()) == 0.0);
    }
}
