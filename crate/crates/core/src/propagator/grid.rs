// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Discretized ⋆-algebra on the causal triangle `s ≤ t`.
//!
//! A function of two times is sampled on a uniform grid and stored as a
//! lower-triangular matrix; the ⋆-product becomes a trapezoid-weighted
//! triangular matrix product. The Dirac identity never appears on the grid.

use crate::error::{Error, Result};
use crate::kernel::{drive, drive_integral, KernelSpec};
use crate::mat2::{Mat2, Unitary2};
use crate::waveform::DriveSpec;
use num_complex::Complex64;
use rayon::prelude::*;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Samples `V[i][j] ≈ F(t_i, t_j)` for `j ≤ i` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoTimeGrid {
    pub s0: f64,
    pub t1: f64,
    pub n_points: usize,
    values: Vec<Complex64>,
}

impl TwoTimeGrid {
    pub fn zeros(s0: f64, t1: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 || !(t1 > s0) {
            return Err(Error::InvalidArgument("grid needs n_points >= 2 and t1 > s0".into()));
        }
        Ok(Self {
            s0,
            t1,
            n_points,
            values: vec![Complex64::default(); n_points * n_points],
        })
    }

    /// Fills every causal entry from `f(t, s)`, rows in parallel.
    pub fn from_fn<F>(s0: f64, t1: f64, n_points: usize, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let mut g = Self::zeros(s0, t1, n_points)?;
        let n = n_points;
        let h = g.h();
        g.values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let t = s0 + i as f64 * h;
            for (j, v) in row.iter_mut().enumerate().take(i + 1) {
                *v = f(t, s0 + j as f64 * h);
            }
        });
        Ok(g)
    }

    pub fn h(&self) -> f64 {
        (self.t1 - self.s0) / (self.n_points - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.s0 + i as f64 * self.h()
    }

    /// Entry `(i, j)`; zero above the diagonal.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j > i {
            Complex64::default()
        } else {
            self.values[i * self.n_points + j]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(j <= i, "grid entries above the diagonal are structurally zero");
        self.values[i * self.n_points + j] = v;
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.s0 == other.s0 && self.t1 == other.t1
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "[{}, {}]x{} vs [{}, {}]x{}",
                self.s0, self.t1, self.n_points, other.s0, other.t1, other.n_points
            )))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            values: self.values.iter().map(|v| f(*v)).collect(),
            ..self.clone()
        }
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_shape(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    /// Restriction to every `step`-th point, `step ≥ 1`.
    pub fn subsample(&self, step: usize) -> Result<Self> {
        if step == 0 || (self.n_points - 1) % step != 0 {
            return Err(Error::GridMismatch("subsample step must divide the interval count".into()));
        }
        let m = (self.n_points - 1) / step + 1;
        let mut out = Self::zeros(self.s0, self.t1, m)?;
        for i in 0..m {
            for j in 0..=i {
                out.set(i, j, self.get(i * step, j * step));
            }
        }
        Ok(out)
    }

    /// Column `j` as `(t_i, F(t_i, t_j))` for `i ≥ j`.
    pub fn column(&self, j: usize) -> Vec<(f64, Complex64)> {
        (j..self.n_points).map(|i| (self.time(i), self.get(i, j))).collect()
    }
}

/// `−K(t_i, t_j)` from `K = D(t)·conj(I(t) − I(s))`, `I(τ) = ∫_{s0}^τ D`.
pub fn neg_kernel_grid(ks: &KernelSpec, s0: f64, t1: f64, n: usize) -> Result<(TwoTimeGrid, Vec<Complex64>)> {
    let mut g = TwoTimeGrid::zeros(s0, t1, n)?;
    let h = g.h();
    let times: Vec<f64> = (0..n).map(|i| s0 + i as f64 * h).collect();
    let d: Vec<Complex64> = times.par_iter().map(|t| drive(ks, *t)).collect();
    let cum: Vec<Complex64> = times.par_iter().map(|t| drive_integral(ks, s0, *t)).collect();
    g.values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate().take(i + 1) {
            *v = -d[i] * (cum[i] - cum[j]).conj();
        }
    });
    Ok((g, d))
}

#[inline]
fn trap_w(k: usize, lo: usize, hi: usize, h: f64) -> f64 {
    if k == lo || k == hi {
        0.5 * h
    } else {
        h
    }
}

/// Trapezoid approximation of `∫_s^t F(t,τ) G(τ,s) dτ` on the grid.
pub fn star_product_grid(f: &TwoTimeGrid, g: &TwoTimeGrid) -> Result<TwoTimeGrid> {
    f.check_shape(g)?;
    let n = f.n_points;
    let h = f.h();
    let mut out = TwoTimeGrid::zeros(f.s0, f.t1, n)?;
    out.values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let frow = &f.values[i * n..i * n + n];
        for (j, v) in row.iter_mut().enumerate().take(i) {
            let mut acc = Complex64::default();
            for k in j..=i {
                acc += frow[k] * g.values[k * n + j] * trap_w(k, j, i, h);
            }
            *v = acc;
        }
    });
    Ok(out)
}

/// `Σ_{k≥1} K^{⋆k}` until the `k`-th term's largest modulus drops below
/// `tol`. Returns the sum and the number of orders used; the Dirac part of
/// the resolvent is implicit.
pub fn neumann_greens(kernel: &TwoTimeGrid, tol: f64, k_max: usize) -> Result<(TwoTimeGrid, usize)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let mut sum = TwoTimeGrid::zeros(kernel.s0, kernel.t1, kernel.n_points)?;
    let mut term = kernel.clone();
    let mut last = term.max_abs();
    if last == 0.0 {
        return Ok((sum, 0));
    }
    for k in 1..=k_max {
        sum.add_assign(&term)?;
        last = term.max_abs();
        if last < tol {
            return Ok((sum, k));
        }
        term = star_product_grid(&term, kernel)?;
    }
    Err(Error::SeriesNotConverged {
        orders: k_max,
        last_norm: last,
        tol,
    })
}

/// Column-only Neumann sum `Σ_k K^{⋆k}(t_i, t_0)` in `O(n²)` per order.
pub fn neumann_column(kernel: &TwoTimeGrid, tol: f64, k_max: usize) -> Result<(Vec<Complex64>, usize)> {
    let n = kernel.n_points;
    let h = kernel.h();
    let mut term: Vec<Complex64> = (0..n).map(|i| kernel.get(i, 0)).collect();
    let mut sum = vec![Complex64::default(); n];
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if norm(&term) == 0.0 {
        return Ok((sum, 0));
    }
    let mut last = 0.0;
    for k in 1..=k_max {
        for (a, b) in sum.iter_mut().zip(&term) {
            *a += b;
        }
        last = norm(&term);
        if last < tol {
            return Ok((sum, k));
        }
        term = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = Complex64::default();
                for (kk, tk) in term.iter().enumerate().take(i + 1) {
                    acc += kernel.get(i, kk) * tk * trap_w(kk, 0, i, h);
                }
                if i == 0 {
                    Complex64::default()
                } else {
                    acc
                }
            })
            .collect();
    }
    Err(Error::SeriesNotConverged {
        orders: k_max,
        last_norm: last,
        tol,
    })
}

/// Four rotated-frame unitary entries on a two-time grid.
#[derive(Debug, Clone)]
pub struct UnitaryGrid {
    pub u11: TwoTimeGrid,
    pub u12: TwoTimeGrid,
    pub u21: TwoTimeGrid,
    pub u22: TwoTimeGrid,
    /// Neumann orders used for the diagonal Green's function.
    pub orders: usize,
    /// Largest Richardson correction (estimated error of the raw trapezoid
    /// result at the finer resolution).
    pub discretization_estimate: f64,
}

impl UnitaryGrid {
    pub fn at(&self, i: usize, j: usize) -> Unitary2 {
        Mat2::new(self.u11.get(i, j), self.u12.get(i, j), self.u21.get(i, j), self.u22.get(i, j))
    }

    pub fn n_points(&self) -> usize {
        self.u11.n_points
    }

    pub fn max_unitarity_defect(&self) -> f64 {
        let n = self.n_points();
        (0..n)
            .flat_map(|i| (0..=i).map(move |j| (i, j)))
            .map(|(i, j)| self.at(i, j).unitarity_defect())
            .fold(0.0, f64::max)
    }
}

/// Knobs of the grid engine.
#[derive(Debug, Clone, Copy)]
pub struct GridOptions {
    /// Neumann truncation on the grid.
    pub series_tol: f64,
    pub k_max: usize,
    /// Limit on the estimated discretization error and (×10) on the unitarity
    /// defect of the returned entries.
    pub grid_tol: f64,
    /// Combine the `n` and `2n−1` point solutions into an `O(h⁴)` result.
    pub richardson: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            series_tol: 1e-12,
            k_max: 200,
            grid_tol: 1e-4,
            richardson: true,
        }
    }
}

fn raw_unitary_grid(ks: &KernelSpec, s0: f64, t1: f64, n: usize, opt: &GridOptions) -> Result<UnitaryGrid> {
    let (neg_k, d) = neg_kernel_grid(ks, s0, t1, n)?;
    let (g11, orders) = neumann_greens(&neg_k, opt.series_tol, opt.k_max)?;
    let h = neg_k.h();
    let mut u11 = TwoTimeGrid::zeros(s0, t1, n)?;
    let mut u21 = TwoTimeGrid::zeros(s0, t1, n)?;
    for j in 0..n {
        u11.set(j, j, Complex64::new(1.0, 0.0));
        for i in j + 1..n {
            let v = u11.get(i - 1, j) + 0.5 * h * (g11.get(i - 1, j) + g11.get(i, j));
            u11.set(i, j, v);
        }
        for i in j + 1..n {
            let a = d[i - 1].conj() * u11.get(i - 1, j);
            let b = d[i].conj() * u11.get(i, j);
            let v = u21.get(i - 1, j) - I * 0.5 * h * (a + b);
            u21.set(i, j, v);
        }
    }
    // The D̄-kernel of the second diagonal entry is the conjugate of the D-kernel,
    // so its resolvent, and hence u22, is the entrywise conjugate.
    let u22 = u11.map(|z| z.conj());
    let mut u12 = TwoTimeGrid::zeros(s0, t1, n)?;
    for j in 0..n {
        for i in j + 1..n {
            let a = d[i - 1] * u22.get(i - 1, j);
            let b = d[i] * u22.get(i, j);
            let v = u12.get(i - 1, j) - I * 0.5 * h * (a + b);
            u12.set(i, j, v);
        }
    }
    Ok(UnitaryGrid {
        u11,
        u12,
        u21,
        u22,
        orders,
        discretization_estimate: f64::NAN,
    })
}

fn richardson(coarse: &TwoTimeGrid, fine: &TwoTimeGrid) -> Result<(TwoTimeGrid, f64)> {
    let sub = fine.subsample(2)?;
    let mut out = sub.clone();
    let mut corr = 0.0f64;
    for i in 0..out.n_points {
        for j in 0..=i {
            let c = (sub.get(i, j) - coarse.get(i, j)) / 3.0;
            corr = corr.max(c.norm());
            out.set(i, j, sub.get(i, j) + c);
        }
    }
    Ok((out, corr))
}

/// Rotated-frame unitary on the triangle over `[s0, t1]` with `n_points`,
/// Richardson-combined with the `2n−1` point solution. The discretization
/// estimate is taken on the longest-lag column `s = s0` against a third,
/// finer level.
pub fn unitary_grid_ks(ks: &KernelSpec, s0: f64, t1: f64, n_points: usize, opt: &GridOptions) -> Result<UnitaryGrid> {
    let coarse = raw_unitary_grid(ks, s0, t1, n_points, opt)?;
    let fine = raw_unitary_grid(ks, s0, t1, 2 * n_points - 1, opt)?;
    let pick = |c: &TwoTimeGrid, f: &TwoTimeGrid| -> Result<TwoTimeGrid> {
        if opt.richardson {
            Ok(richardson(c, f)?.0)
        } else {
            f.subsample(2)
        }
    };
    let mut out = UnitaryGrid {
        u11: pick(&coarse.u11, &fine.u11)?,
        u12: pick(&coarse.u12, &fine.u12)?,
        u21: pick(&coarse.u21, &fine.u21)?,
        u22: pick(&coarse.u22, &fine.u22)?,
        orders: fine.orders,
        discretization_estimate: 0.0,
    };
    let tr = trace_levels(ks, s0, t1, n_points, opt)?;
    let col: Vec<Unitary2> = (0..n_points).map(|i| out.at(i, 0)).collect();
    out.discretization_estimate = max_diff(&col, &tr.u).max(tr.discretization_estimate);
    if out.discretization_estimate > opt.grid_tol {
        return Err(Error::Discretization {
            change: out.discretization_estimate,
            limit: opt.grid_tol,
        });
    }
    let defect = out.max_unitarity_defect();
    if defect > 10.0 * opt.grid_tol {
        return Err(Error::Unitarity {
            defect,
            limit: 10.0 * opt.grid_tol,
        });
    }
    Ok(out)
}

/// [`unitary_grid_ks`] from a drive spec, with `tol` as the grid tolerance.
pub fn unitary_grid(spec: &DriveSpec, s0: f64, t1: f64, n_points: usize, tol: f64) -> Result<UnitaryGrid> {
    let ks = KernelSpec::from_spec(spec, crate::gbf::DEFAULT_THRESHOLD)?;
    let opt = GridOptions {
        grid_tol: tol,
        ..GridOptions::default()
    };
    unitary_grid_ks(&ks, s0, t1, n_points, &opt)
}

/// Result of the `s = s0` trace variant.
#[derive(Debug, Clone)]
pub struct UnitaryTrace {
    pub times: Vec<f64>,
    pub u: Vec<Unitary2>,
    pub orders: usize,
    pub discretization_estimate: f64,
}

fn raw_trace(ks: &KernelSpec, s0: f64, t1: f64, n: usize, opt: &GridOptions) -> Result<(Vec<Unitary2>, usize)> {
    let (neg_k, d) = neg_kernel_grid(ks, s0, t1, n)?;
    let (g, orders) = neumann_column(&neg_k, opt.series_tol, opt.k_max)?;
    let h = neg_k.h();
    let mut u11 = vec![Complex64::new(1.0, 0.0); n];
    let mut u21 = vec![Complex64::default(); n];
    let mut u12 = vec![Complex64::default(); n];
    for i in 1..n {
        u11[i] = u11[i - 1] + 0.5 * h * (g[i - 1] + g[i]);
    }
    for i in 1..n {
        u21[i] = u21[i - 1] - I * 0.5 * h * (d[i - 1].conj() * u11[i - 1] + d[i].conj() * u11[i]);
        u12[i] = u12[i - 1] - I * 0.5 * h * (d[i - 1] * u11[i - 1].conj() + d[i] * u11[i].conj());
    }
    let u = (0..n).map(|i| Mat2::new(u11[i], u12[i], u21[i], u11[i].conj())).collect();
    Ok((u, orders))
}

fn richardson_pair(coarse: &[Unitary2], fine: &[Unitary2]) -> Vec<Unitary2> {
    coarse
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let f = fine[2 * i];
            f + (f - *c).scale(Complex64::new(1.0 / 3.0, 0.0))
        })
        .collect()
}

fn max_diff(a: &[Unitary2], b: &[Unitary2]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max)
}

/// Column `s = s0` of the grid engine on `n_points` uniform times with an
/// error estimate from three nested resolutions (`n`, `2n−1`, `4n−3`).
/// With Richardson enabled the result combines the two finer levels and the
/// estimate is its change against the combination of the two coarser ones.
fn trace_levels(ks: &KernelSpec, s0: f64, t1: f64, n_points: usize, opt: &GridOptions) -> Result<UnitaryTrace> {
    let (l0, _) = raw_trace(ks, s0, t1, n_points, opt)?;
    let (l1, _) = raw_trace(ks, s0, t1, 2 * n_points - 1, opt)?;
    let (l2, orders) = raw_trace(ks, s0, t1, 4 * n_points - 3, opt)?;
    let l1c: Vec<Unitary2> = (0..n_points).map(|i| l1[2 * i]).collect();
    let l2c: Vec<Unitary2> = (0..n_points).map(|i| l2[4 * i]).collect();
    let (u, est) = if opt.richardson {
        let r1 = richardson_pair(&l0, &l1);
        let r2: Vec<Unitary2> = richardson_pair(&l1, &l2).into_iter().step_by(2).collect();
        let est = max_diff(&r1, &r2);
        (r2, est)
    } else {
        let est = max_diff(&l1c, &l2c);
        (l2c, est)
    };
    let h = (t1 - s0) / (n_points - 1) as f64;
    Ok(UnitaryTrace {
        times: (0..n_points).map(|i| s0 + i as f64 * h).collect(),
        u,
        orders,
        discretization_estimate: est,
    })
}

fn check_trace(tr: &UnitaryTrace, opt: &GridOptions) -> Result<()> {
    if tr.discretization_estimate > opt.grid_tol {
        return Err(Error::Discretization {
            change: tr.discretization_estimate,
            limit: opt.grid_tol,
        });
    }
    let defect = tr.u.iter().map(|m| m.unitarity_defect()).fold(0.0, f64::max);
    if defect > 10.0 * opt.grid_tol {
        return Err(Error::Unitarity {
            defect,
            limit: 10.0 * opt.grid_tol,
        });
    }
    Ok(())
}

/// `U(t_i, s0)` on `n_points` uniform times using column-only ⋆-products.
pub fn unitary_trace_grid(ks: &KernelSpec, s0: f64, t1: f64, n_points: usize, opt: &GridOptions) -> Result<UnitaryTrace> {
    let tr = trace_levels(ks, s0, t1, n_points, opt)?;
    check_trace(&tr, opt)?;
    Ok(tr)
}
