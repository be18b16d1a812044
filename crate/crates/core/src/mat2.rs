// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense 2×2 complex matrices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

/// A 2×2 complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub u11: Complex64,
    pub u12: Complex64,
    pub u21: Complex64,
    pub u22: Complex64,
}

/// Propagators are ordinary 2×2 matrices; the alias documents intent.
pub type Unitary2 = Mat2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Mat2 {
    pub const fn new(u11: Complex64, u12: Complex64, u21: Complex64, u22: Complex64) -> Self {
        Self { u11, u12, u21, u22 }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(a: Complex64, b: Complex64) -> Self {
        Self::new(a, ZERO, ZERO, b)
    }

    pub fn dagger(&self) -> Self {
        Self::new(self.u11.conj(), self.u21.conj(), self.u12.conj(), self.u22.conj())
    }

    pub fn trace(&self) -> Complex64 {
        self.u11 + self.u22
    }

    pub fn det(&self) -> Complex64 {
        self.u11 * self.u22 - self.u12 * self.u21
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.u11 * c, self.u12 * c, self.u21 * c, self.u22 * c)
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.u11, self.u12, self.u21, self.u22]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |(self - other)_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Self::identity())
    }

    /// `‖H − H†‖_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.u11 + o.u11, self.u12 + o.u12, self.u21 + o.u21, self.u22 + o.u22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.u11 - o.u11, self.u12 - o.u12, self.u21 - o.u21, self.u22 - o.u22)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.u11 * o.u11 + self.u12 * o.u21,
            self.u11 * o.u12 + self.u12 * o.u22,
            self.u21 * o.u11 + self.u22 * o.u21,
            self.u21 * o.u12 + self.u22 * o.u22,
        )
    }
}
