// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! The two-time kernel `K(t,s) = D(t) ∫_s^t D̄(τ) dτ` of the rotating-frame
//! problem, its resonance decomposition and its period averages.
//!
//! Here `D(t) = Σ_l 𝒥_l e^{i f_l t}` with `f_l = ε₀ + lω`.

use crate::divdiff::exp_dd_slice;
use crate::error::{Error, Result};
use crate::gbf::{build_table, GbfTable};
use crate::waveform::DriveSpec;
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// GBF table together with the bias and base frequency that fix `f_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub gbf: GbfTable,
    pub eps0: f64,
    pub omega: f64,
    nonzero: Vec<(i64, Complex64)>,
}

impl KernelSpec {
    pub fn new(gbf: GbfTable, eps0: f64, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) || !eps0.is_finite() {
            return Err(Error::InvalidArgument("kernel needs finite eps0 and omega > 0".into()));
        }
        let nonzero = gbf.nonzero();
        if nonzero.iter().any(|(l, _)| !(eps0 + *l as f64 * omega).is_finite()) {
            return Err(Error::InvalidArgument("non-finite carrier frequency".into()));
        }
        Ok(Self { gbf, eps0, omega, nonzero })
    }

    /// Table from `spec` at the given truncation threshold.
    pub fn from_spec(spec: &DriveSpec, threshold: f64) -> Result<Self> {
        Self::new(build_table(spec, threshold)?, spec.eps0, spec.omega)
    }

    pub fn band(&self) -> (i64, i64) {
        (self.gbf.l_min, self.gbf.l_max)
    }

    /// `f_l = ε₀ + lω`.
    pub fn freq(&self, l: i64) -> f64 {
        self.eps0 + l as f64 * self.omega
    }

    /// Nonzero `(l, 𝒥_l)` in ascending `l`.
    pub fn terms(&self) -> &[(i64, Complex64)] {
        &self.nonzero
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    /// `α` with `ε₀ = −αω`, if the bias is an integer resonance.
    pub fn resonance(&self) -> Option<i64> {
        let a = -self.eps0 / self.omega;
        let r = a.round();
        ((a - r).abs() <= 1e-12 * a.abs().max(1.0)).then_some(r as i64)
    }

    fn require_resonance(&self, alpha: i64) -> Result<()> {
        match self.resonance() {
            Some(a) if a == alpha => Ok(()),
            _ => Err(Error::NotIntegerResonant {
                eps0: self.eps0,
                omega: self.omega,
            }),
        }
    }
}

fn check_causal(t: f64, s: f64) -> Result<()> {
    if t < s {
        Err(Error::Acausal { t, s })
    } else {
        Ok(())
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// `D(t)`.
pub fn drive(ks: &KernelSpec, t: f64) -> Complex64 {
    ks.terms()
        .iter()
        .map(|(l, j)| j * Complex64::from_polar(1.0, ks.freq(*l) * t))
        .sum()
}

/// `∫_s^t D(τ) dτ`.
pub fn drive_integral(ks: &KernelSpec, s: f64, t: f64) -> Complex64 {
    let u = t - s;
    ks.terms()
        .iter()
        .map(|(l, j)| {
            let f = ks.freq(*l);
            j * Complex64::from_polar(u * sinc(0.5 * f * u), 0.5 * f * (t + s))
        })
        .sum()
}

/// Sinc form of the kernel.
pub fn kernel_at(ks: &KernelSpec, t: f64, s: f64) -> Result<Complex64> {
    check_causal(t, s)?;
    let u = t - s;
    let mut acc = Complex64::default();
    for (n, jn) in ks.terms() {
        let fneg = ks.freq(*n);
        let inner = jn.conj() * Complex64::from_polar(u * sinc(0.5 * fneg * u), -0.5 * fneg * (t + s));
        for (m, jm) in ks.terms() {
            acc += inner * jm * Complex64::from_polar(1.0, ks.freq(*m) * t);
        }
    }
    Ok(acc)
}

/// Divided-difference form of the kernel.
pub fn kernel_at_dd(ks: &KernelSpec, t: f64, s: f64) -> Result<Complex64> {
    check_causal(t, s)?;
    let u = t - s;
    let mut acc = Complex64::default();
    for (n, jn) in ks.terms() {
        let dd = exp_dd_slice(&[ks.freq(*n), 0.0], u);
        for (m, jm) in ks.terms() {
            let beta = (m - n) as f64 * ks.omega;
            acc += jn.conj() * jm * Complex64::from_polar(1.0, beta * t) * dd;
        }
    }
    Ok(-I * acc)
}

/// Factored kernel `D(t) · conj(∫_s^t D)`, linear in the band size.
pub fn kernel_fast(ks: &KernelSpec, t: f64, s: f64) -> Complex64 {
    drive(ks, t) * drive_integral(ks, s, t).conj()
}

/// Resonant (RWA), counter-rotating (CR) and off-resonant (OR) parts at
/// `ε₀ = −αω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParts {
    pub rwa: Complex64,
    pub cr: Complex64,
    pub or_: Complex64,
}

impl KernelParts {
    pub fn total(&self) -> Complex64 {
        self.rwa + self.cr + self.or_
    }
}

pub fn kernel_split(ks: &KernelSpec, t: f64, s: f64, alpha: i64) -> Result<KernelParts> {
    check_causal(t, s)?;
    ks.require_resonance(alpha)?;
    let u = t - s;
    let ja = ks.gbf.get(alpha);
    let rwa = ja.norm_sqr() * u;
    let mut cr = Complex64::default();
    let mut or_ = Complex64::default();
    for (m, jm) in ks.terms() {
        if *m != alpha {
            cr += ja.conj() * jm * Complex64::from_polar(u, (m - alpha) as f64 * ks.omega * t);
        }
    }
    for (n, jn) in ks.terms() {
        if *n == alpha {
            continue;
        }
        let fneg = ks.freq(*n);
        let inner = jn.conj() * Complex64::from_polar(u * sinc(0.5 * fneg * u), -0.5 * fneg * (t + s));
        for (m, jm) in ks.terms() {
            or_ += inner * jm * Complex64::from_polar(1.0, ks.freq(*m) * t);
        }
    }
    Ok(KernelParts {
        rwa: Complex64::new(rwa, 0.0),
        cr,
        or_,
    })
}

fn average_term(ks: &KernelSpec, m: i64, n: i64, period: f64) -> Complex64 {
    let beta = (m - n) as f64 * ks.omega;
    exp_dd_slice(&[ks.freq(m), beta, beta, 0.0], period)
}

/// `(2/T²) ∫₀^T ∫₀^t K(t,s) ds dt`.
pub fn kernel_average(ks: &KernelSpec, period: f64) -> Complex64 {
    let mut acc = Complex64::default();
    for (n, jn) in ks.terms() {
        for (m, jm) in ks.terms() {
            acc += jn.conj() * jm * average_term(ks, *m, *n, period);
        }
    }
    acc * I * 2.0 / (period * period)
}

/// Same average restricted to index pairs `(m, n)` accepted by `keep`.
pub fn kernel_average_where(ks: &KernelSpec, period: f64, keep: impl Fn(i64, i64) -> bool) -> Complex64 {
    let mut acc = Complex64::default();
    for (n, jn) in ks.terms() {
        for (m, jm) in ks.terms() {
            if keep(*m, *n) {
                acc += jn.conj() * jm * average_term(ks, *m, *n, period);
            }
        }
    }
    acc * I * 2.0 / (period * period)
}

/// Closed-form period average of the diagonal (`m = n ≠ α`) counter-rotating
/// terms at `ε₀ = −αω`.
pub fn cr_average(ks: &KernelSpec, period: f64, alpha: i64) -> Result<Complex64> {
    ks.require_resonance(alpha)?;
    let mut acc = Complex64::default();
    for (m, jm) in ks.terms() {
        if *m == alpha {
            continue;
        }
        let a = (m - alpha) as f64 * ks.omega;
        acc += jm.norm_sqr() * Complex64::new(2.0 / (a * a * period), 1.0 / a);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::composite;
    use std::f64::consts::PI;

    fn table(entries: &[(i64, Complex64)]) -> GbfTable {
        let lo = entries.iter().map(|e| e.0).min().unwrap();
        let hi = entries.iter().map(|e| e.0).max().unwrap();
        let mut c = vec![Complex64::default(); (hi - lo + 1) as usize];
        for (l, v) in entries {
            c[(l - lo) as usize] = *v;
        }
        GbfTable::from_coeffs(lo, c)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn triangle_average(ks: &KernelSpec, period: f64) -> Complex64 {
        let (tx, tw) = composite(0.0, period, 24, 16);
        let mut acc = Complex64::default();
        for (t, wt) in tx.iter().zip(&tw) {
            let (sx, sw) = composite(0.0, *t, 12, 16);
            for (s, ws) in sx.iter().zip(&sw) {
                acc += kernel_at(ks, *t, *s).unwrap() * wt * ws;
            }
        }
        acc * 2.0 / (period * period)
    }

    #[test]
    fn trivial_kernels() {
        let ks = KernelSpec::new(table(&[(0, c(0.0, 0.0))]), 0.3, 1.0).unwrap();
        assert_eq!(kernel_at(&ks, 2.0, 1.0).unwrap(), c(0.0, 0.0));
        let ks = KernelSpec::new(table(&[(0, c(0.6, 0.0))]), 0.0, 1.0).unwrap();
        assert!((kernel_at(&ks, 2.5, 1.0).unwrap() - c(0.36 * 1.5, 0.0)).norm() < 1e-15);
        assert!((kernel_at_dd(&ks, 2.5, 1.0).unwrap() - c(0.36 * 1.5, 0.0)).norm() < 1e-14);
        assert_eq!(kernel_at(&ks, 1.0, 1.0).unwrap(), c(0.0, 0.0));
        assert!(kernel_at(&ks, 0.5, 1.0).is_err());
        assert!(kernel_at_dd(&ks, 0.5, 1.0).is_err());
    }

    #[test]
    fn forms_agree_including_resonance() {
        let t = table(&[(-2, c(0.1, 0.3)), (0, c(0.5, -0.2)), (1, c(-0.7, 0.05)), (3, c(0.2, 0.2))]);
        for &eps0 in &[0.37, -1.0, 2.0, 0.0] {
            let ks = KernelSpec::new(t.clone(), eps0, 1.3).unwrap();
            for &(tt, ss) in &[(0.2, 0.1), (5.0, -3.0), (11.0, 0.0), (1.0, 1.0)] {
                let a = kernel_at(&ks, tt, ss).unwrap();
                let b = kernel_at_dd(&ks, tt, ss).unwrap();
                let f = kernel_fast(&ks, tt, ss);
                assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-3), "{eps0} {tt} {ss}");
                assert!((a - f).norm() <= 1e-12 * a.norm().max(1e-3));
            }
        }
    }

    #[test]
    fn split_sums_to_kernel() {
        let t = table(&[(-1, c(0.3, 0.1)), (0, c(0.2, 0.0)), (1, c(0.1, -0.4)), (2, c(0.05, 0.0))]);
        let ks = KernelSpec::new(t, -1.0, 1.0).unwrap();
        for &(tt, ss) in &[(2.0, 0.5), (7.0, 1.0), (3.0, 3.0)] {
            let p = kernel_split(&ks, tt, ss, 1).unwrap();
            let k = kernel_at(&ks, tt, ss).unwrap();
            assert!((p.total() - k).norm() < 1e-12);
        }
        assert!(kernel_split(&ks, 1.0, 0.0, 0).is_err());

        let only = KernelSpec::new(table(&[(2, c(0.4, 0.3))]), -2.0, 1.0).unwrap();
        let p = kernel_split(&only, 3.0, 1.0, 2).unwrap();
        assert!((p.rwa - c(0.25 * 2.0, 0.0)).norm() < 1e-15);
        assert_eq!(p.cr, c(0.0, 0.0));
        assert_eq!(p.or_, c(0.0, 0.0));

        let two = KernelSpec::new(table(&[(0, c(0.4, 0.0)), (1, c(0.3, 0.0))]), 0.0, 1.0).unwrap();
        let p = kernel_split(&two, 1.5, 1.5, 0).unwrap();
        assert_eq!(p.total(), c(0.0, 0.0));
    }

    #[test]
    fn average_matches_quadrature() {
        let period = 2.0 * PI;
        let ks = KernelSpec::new(table(&[(0, c(0.7, 0.0))]), 0.0, 1.0).unwrap();
        let want = 0.49 * period / 3.0;
        assert!((kernel_average(&ks, period) - c(want, 0.0)).norm() < 1e-12);

        let ks = KernelSpec::new(table(&[(1, c(1.5, 0.0))]), 1.0, 1.0).unwrap();
        let q = triangle_average(&ks, period);
        assert!((kernel_average(&ks, period) - q).norm() < 1e-8, "{q}");

        let t = table(&[(-1, c(0.3, 0.1)), (0, c(0.2, 0.0)), (2, c(0.1, -0.4))]);
        let ks = KernelSpec::new(t, 0.4, 1.0).unwrap();
        let q = triangle_average(&ks, period);
        assert!((kernel_average(&ks, period) - q).norm() < 1e-8);
    }

    #[test]
    fn cr_average_cases() {
        let period = 2.0 * PI;
        let ks = KernelSpec::new(table(&[(1, c(1.0, 0.0))]), 0.0, 1.0).unwrap();
        let v = cr_average(&ks, period, 0).unwrap();
        assert!((v - c(1.0 / PI, 1.0)).norm() < 1e-14);

        let ks = KernelSpec::new(table(&[(0, c(1.0, 0.0))]), 0.0, 1.0).unwrap();
        assert_eq!(cr_average(&ks, period, 0).unwrap(), c(0.0, 0.0));

        let t = table(&[(-2, c(0.3, 0.1)), (-1, c(0.2, 0.0)), (1, c(0.1, -0.4)), (3, c(0.6, 0.0))]);
        let ks = KernelSpec::new(t, 1.0, 1.0).unwrap();
        let v = cr_average(&ks, period, -1).unwrap();
        let r = kernel_average_where(&ks, period, |m, n| m == n && m != -1);
        assert!((v - r).norm() < 1e-10);
        assert!(cr_average(&ks, period, 1).is_err());
    }

    #[test]
    fn undriven_kernel_is_translation_invariant() {
        let ks = KernelSpec::new(table(&[(0, c(0.5, 0.0))]), 0.8, 1.0).unwrap();
        for &cshift in &[0.3, 2.0, 17.0] {
            let a = kernel_at(&ks, 3.0 + cshift, 1.0 + cshift).unwrap();
            let b = kernel_at(&ks, 3.0, 1.0).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }
}
