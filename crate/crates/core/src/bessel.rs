// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Ordinary Bessel functions of the first kind and integer order.

/// `J_n(x)` for `n ∈ [0, n_max]`, real `x`, by Miller's downward recurrence
/// normalized with `J₀ + 2 Σ J_{2k} = 1`.
pub fn bessel_j_sequence(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    // start far enough above both n_max and |x| that the seed error has decayed
    let start = {
        let m = (n_max as f64).max(ax) + 30.0 + 10.0 * ax.sqrt().max(1.0) + 1.5 * ax.powf(1.0 / 3.0) * 10.0;
        let m = m.ceil() as usize;
        m + (m & 1)
    };
    let mut jp1 = 0.0_f64;
    let mut j = 1e-300_f64;
    let mut norm = 0.0_f64;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / ax * j - jp1;
        jp1 = j;
        j = jm1;
        let idx = k - 1;
        if idx <= n_max {
            out[idx] = j;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j;
        }
        // rescale to stay in range
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += j; // J_0 term
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_n(x)` for any integer `n`, using `J_{−n} = (−1)ⁿ J_n`.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let v = bessel_j_sequence(m, x)[m];
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}
