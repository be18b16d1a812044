// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Divided differences of `x ↦ e^{ixτ}` over real nodes, confluent or not.
//!
//! The value `e^{i[x₀,…,x_n]τ}` is the `(0, n)` entry of `exp(iτZ)` where `Z`
//! is upper bidiagonal with the nodes on the diagonal and ones above it.
//! That exponential is computed by Taylor expansion of a scaled matrix
//! followed by repeated squaring. After every squaring the diagonal and
//! first superdiagonal are overwritten by their exact closed forms, which
//! keeps the recurrence anchored for clustered nodes.

use crate::error::{Error, Result};
use num_complex::Complex64;
use parking_lot::Mutex;
use std::collections::HashMap;

/// Ordered real nodes, repetitions allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeList {
    nodes: Vec<f64>,
}

impl NodeList {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidArgument("node list must be non-empty".into()));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("nodes must be finite".into()));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Order `n` of the divided difference (node count minus one).
    pub fn order(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn push(&mut self, x: f64) {
        self.nodes.push(x);
    }

    /// Nodes sorted ascending.
    pub fn canonical(&self) -> Vec<f64> {
        let mut v = self.nodes.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Distinct values with multiplicities, ascending.
    pub fn distinct(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for x in self.canonical() {
            match out.last_mut() {
                Some((v, c)) if *v == x => *c += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }
}

/// `e^{i(a+b)τ/2} · iτ · sinc((a−b)τ/2)`, the exact first divided difference.
fn first_dd(a: f64, b: f64, tau: f64) -> Complex64 {
    let h = 0.5 * (a - b) * tau;
    let sinc = if h.abs() < 1e-4 {
        let h2 = h * h;
        1.0 - h2 / 6.0 * (1.0 - h2 / 20.0)
    } else {
        h.sin() / h
    };
    Complex64::from_polar(1.0, 0.5 * (a + b) * tau) * Complex64::new(0.0, tau * sinc)
}

fn anchor(e: &mut [Complex64], x: &[f64], n: usize, tau: f64) {
    for j in 0..n {
        e[j * n + j] = Complex64::from_polar(1.0, x[j] * tau);
        if j + 1 < n {
            e[j * n + j + 1] = first_dd(x[j], x[j + 1], tau);
        }
    }
}

fn square_upper(e: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); n * n];
    for i in 0..n {
        for j in i..n {
            let mut acc = Complex64::default();
            for k in i..=j {
                acc += e[i * n + k] * e[k * n + j];
            }
            out[i * n + j] = acc;
        }
    }
    out
}

/// `(0, n)` entry of `exp(iτZ)` for sorted, centred nodes.
fn opitz(x: &[f64], tau: f64) -> Complex64 {
    let n = x.len();
    if n == 1 {
        return Complex64::from_polar(1.0, x[0] * tau);
    }
    if tau == 0.0 {
        return Complex64::default();
    }
    let spread = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let theta = tau.abs() * (spread + 1.0);
    let squarings = if theta > 0.5 { (theta / 0.5).log2().ceil() as u32 } else { 0 };
    let ts = tau / f64::powi(2.0, squarings as i32);

    // Taylor series of exp(i ts Z) exploiting the bidiagonal structure
    let mut e = vec![Complex64::default(); n * n];
    let mut term = vec![Complex64::default(); n * n];
    for j in 0..n {
        e[j * n + j] = Complex64::new(1.0, 0.0);
        term[j * n + j] = Complex64::new(1.0, 0.0);
    }
    let iz = Complex64::new(0.0, ts);
    for k in 1..64 {
        let mut next = vec![Complex64::default(); n * n];
        let mut nmax = 0.0f64;
        for i in 0..n {
            for j in i..n {
                // (term · Z)_{ij} = term_{ij} x_j + term_{i,j-1}
                let mut v = term[i * n + j] * x[j];
                if j > i {
                    v += term[i * n + j - 1];
                }
                let v = v * iz / k as f64;
                nmax = nmax.max(v.norm());
                next[i * n + j] = v;
            }
        }
        for (a, b) in e.iter_mut().zip(&next) {
            *a += b;
        }
        term = next;
        if nmax < 1e-18 {
            break;
        }
    }
    anchor(&mut e, x, n, ts);
    let mut t = ts;
    for _ in 0..squarings {
        e = square_upper(&e, n);
        t *= 2.0;
        anchor(&mut e, x, n, t);
    }
    e[n - 1]
}

/// `e^{i[x₀,…,x_n]τ}`. Independent of node order.
pub fn exp_divided_difference(nodes: &NodeList, tau: f64) -> Complex64 {
    exp_dd_slice(nodes.nodes(), tau)
}

/// Slice form of [`exp_divided_difference`].
pub fn exp_dd_slice(nodes: &[f64], tau: f64) -> Complex64 {
    assert!(!nodes.is_empty(), "divided difference needs at least one node");
    let mut x = nodes.to_vec();
    x.sort_by(f64::total_cmp);
    let c = 0.5 * (x[0] + x[x.len() - 1]);
    for v in x.iter_mut() {
        *v -= c;
    }
    Complex64::from_polar(1.0, c * tau) * opitz(&x, tau)
}

/// Residual of the standard recurrence
/// `f[x₀..x_n] = (f[x₁..x_n] − f[x₀..x_{n−1}]) / (x_n − x₀)`.
pub fn divided_difference_recurrence_check(nodes: &NodeList, tau: f64) -> Result<f64> {
    let x = nodes.nodes();
    if x.len() < 2 {
        return Err(Error::InvalidArgument("recurrence check needs at least two nodes".into()));
    }
    let c = nodes.canonical();
    if c.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("recurrence check rejects repeated nodes".into()));
    }
    let n = x.len() - 1;
    let full = exp_dd_slice(x, tau);
    let right = exp_dd_slice(&x[1..], tau);
    let left = exp_dd_slice(&x[..n], tau);
    Ok((full - (right - left) / (x[n] - x[0])).norm())
}

/// Thread-safe memo of divided-difference values keyed on the canonical
/// node form and `τ`.
#[derive(Debug, Default)]
pub struct DdCache {
    map: Mutex<HashMap<(Vec<u64>, u64), Complex64>>,
    capacity: usize,
}

impl DdCache {
    pub fn new(capacity: usize) -> Self {
        Self {
            map: Mutex::new(HashMap::new()),
            capacity,
        }
    }

    pub fn eval(&self, nodes: &[f64], tau: f64) -> Complex64 {
        let mut key: Vec<f64> = nodes.to_vec();
        key.sort_by(f64::total_cmp);
        // +0.0 and -0.0 must share an entry
        let key = (key.iter().map(|v| (v + 0.0).to_bits()).collect(), (tau + 0.0).to_bits());
        if let Some(v) = self.map.lock().get(&key) {
            return *v;
        }
        let v = exp_dd_slice(nodes, tau);
        let mut m = self.map.lock();
        if self.capacity > 0 && m.len() >= self.capacity {
            m.clear();
        }
        m.insert(key, v);
        v
    }

    pub fn len(&self) -> usize {
        self.map.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
