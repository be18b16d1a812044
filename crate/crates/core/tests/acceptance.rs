// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use num_complex::Complex64;
use parking_lot::Mutex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};
use twolevel::divdiff::exp_dd_slice;
use twolevel::gbf::{build_table, gbf_coefficients, gbf_via_bessel_convolution};
use twolevel::kernel::{kernel_at, kernel_at_dd, KernelSpec};
use twolevel::oracle::{
    integrate_schrodinger, integrate_trace, long_time_average, nested_quadrature_with_estimate, Frame, StepControl,
};
use twolevel::propagator::series::star_power_enumerated;
use twolevel::propagator::{
    quasienergies, star_power_analytic, star_power_pathsum, transition_probability_raw, unitary_analytic,
    unitary_analytic_trace, unitary_trace_grid, GridOptions, SeriesOptions,
};
use twolevel::rwa::{avg_map, rabi_map, rwa_hamiltonian, rwa_probability, sweep_map, Axis, Range, SweepSpec};
use twolevel::{presets, DriveSpec, Mat2};

const THRESHOLD: f64 = 1e-12;
const SERIES_TOL: f64 = 1e-8;
const K_MAX: usize = 40;
const GRID_POINTS: usize = 513;
const ORACLE_TOL: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Unitarity defects collected from criteria 1 and 2 for criterion 7:
/// `(label, defect, limit)`.
static DEFECTS: Mutex<Vec<(String, f64, f64)>> = Mutex::new(Vec::new());

fn record_defect(label: &str, us: &[Mat2], limit: f64) {
    let d = us.iter().map(|u| u.unitarity_defect()).fold(0.0, f64::max);
    DEFECTS.lock().push((label.to_string(), d, limit));
}

fn max_dp(a: &[Mat2], b: &[Mat2]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (transition_probability_raw(x) - transition_probability_raw(y)).abs())
        .fold(0.0, f64::max)
}

fn ks_of(spec: &DriveSpec) -> KernelSpec {
    KernelSpec::from_spec(spec, THRESHOLD).expect("kernel spec")
}

fn series_opts() -> SeriesOptions {
    SeriesOptions {
        tol: SERIES_TOL,
        k_max: K_MAX,
        ..SeriesOptions::default()
    }
}

fn driven_sets() -> Vec<(&'static str, DriveSpec)> {
    vec![
        ("2a", presets::prob_bloch_siegert()),
        ("2d", presets::prob_longitudinal()),
        ("2g", presets::prob_mixed()),
    ]
}

// ---------------------------------------------------------------------------

fn c1_static_rabi() -> Outcome {
    let d0 = 0.5;
    let spec = DriveSpec::new(1.0).with_delta(0, Complex64::new(d0, 0.0));
    let ks = ks_of(&spec);
    let span = 2.0 * 2.0 * PI / d0;
    let times: Vec<f64> = (0..=400).map(|i| i as f64 * span / 400.0).collect();
    let opt = SeriesOptions {
        tol: 1e-12,
        ..series_opts()
    };
    let tr = unitary_analytic_trace(&ks, 0.0, &times, &opt).expect("series");
    let err = times
        .iter()
        .zip(&tr.u)
        .map(|(t, u)| (transition_probability_raw(u) - (0.5 * d0 * t).sin().powi(2)).abs())
        .fold(0.0, f64::max);
    record_defect("static Rabi series", &tr.u, 10.0 * opt.tol);
    outcome(err < 1e-10, format!("max |p - sin²(Δ₀t/2)| = {err:.2e} (limit 1e-10)"))
}

fn c2_triangle() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, spec) in driven_sets() {
        let st = Instant::now();
        let ks = ks_of(&spec);
        let opt = GridOptions::default();
        let grid = unitary_trace_grid(&ks, 0.0, spec.period(), GRID_POINTS, &opt).expect("grid");
        let series = unitary_analytic_trace(&ks, 0.0, &grid.times, &series_opts()).expect("series");
        let oracle = integrate_trace(&spec, 0.0, &grid.times, ORACLE_TOL, Frame::Lab, StepControl::default())
            .expect("oracle");
        let el = st.elapsed().as_secs_f64();
        let ds = max_dp(&series.u, &oracle);
        let dg = max_dp(&grid.u, &oracle);
        record_defect(&format!("{name} series"), &series.u, 10.0 * SERIES_TOL);
        record_defect(&format!("{name} grid"), &grid.u, 10.0 * opt.grid_tol);
        let ok = ds < 1e-6 && dg < 1e-4 && el < 60.0;
        pass &= ok;
        parts.push(format!("{name}: series {ds:.1e} grid {dg:.1e} in {el:.1}s"));
    }
    outcome(pass, format!("{} (limits 1e-6 / 1e-4 / 60s)", parts.join("; ")))
}

fn random_spec(rng: &mut ChaCha8Rng) -> DriveSpec {
    let resonant = rng.gen_bool(0.3);
    let eps0 = if resonant {
        -(rng.gen_range(-3i32..=3) as f64)
    } else {
        rng.gen_range(-3.0..3.0)
    };
    let mut spec = DriveSpec::new(1.0).with_eps0(eps0);
    for n in 1..=3u32 {
        if rng.gen_bool(0.5) {
            spec = spec.with_cos(n, rng.gen_range(0.0..8.0));
        }
    }
    if rng.gen_bool(0.3) {
        spec = spec.with_sin(rng.gen_range(1..=2), rng.gen_range(0.0..4.0));
    }
    let n_delta = rng.gen_range(1..=3);
    for _ in 0..n_delta {
        let k = rng.gen_range(-2..=2);
        spec = spec.with_delta(k, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    spec
}

fn c3_kernel_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4b45_524e);
    let mut worst: f64 = 0.0;
    let mut resonant = 0;
    let mut samples = 0;
    for _ in 0..100 {
        let spec = random_spec(&mut rng);
        let ks = ks_of(&spec);
        if ks.resonance().is_some() {
            resonant += 1;
        }
        for _ in 0..10 {
            let t = rng.gen_range(0.0..4.0 * PI);
            let s = rng.gen_range(0.0..t);
            let a = kernel_at(&ks, t, s).expect("integral form");
            let b = kernel_at_dd(&ks, t, s).expect("divided-difference form");
            let scale = a.norm().max(b.norm());
            let rel = if scale == 0.0 { 0.0 } else { (a - b).norm() / scale };
            worst = worst.max(rel);
            samples += 1;
        }
    }
    outcome(
        worst < 1e-12 && resonant > 0,
        format!("{samples} samples ({resonant} resonant specs), max relative difference {worst:.2e} (limit 1e-12)"),
    )
}

fn c4_nodes() -> Outcome {
    let n = 128;
    let pairs = [(2.0, 0.3), (5.0, 1.0)];
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (name, spec) in [("2a", presets::prob_bloch_siegert()), ("1d", presets::kernel_biharmonic())] {
        let ks = ks_of(&spec);
        let mut w: f64 = 0.0;
        for k in 1..=3 {
            for &(t, s) in &pairs {
                let (q, _) = nested_quadrature_with_estimate(&ks, k, t, s, n).expect("quadrature");
                let lattice = star_power_pathsum(&ks, k, t, s, None).expect("path sum");
                w = w.max((lattice - q).norm());
                // direct tuple enumeration wherever it fits the budget
                if let Ok(e) = star_power_enumerated(&ks, k, t, s, 1_000_000) {
                    w = w.max((e - q).norm());
                }
            }
        }
        // enumeration must be tractable for the small table
        if name == "2a" {
            let e = star_power_analytic(&ks, 3, 5.0, 1.0).expect("enumeration");
            let (q, _) = nested_quadrature_with_estimate(&ks, 3, 5.0, 1.0, n).expect("quadrature");
            w = w.max((e - q).norm());
        }
        lines.push(format!("{name}: {w:.1e}"));
        worst = worst.max(w);
    }
    outcome(worst < 1e-8, format!("max |analytic - quadrature| over k=1..3: {} (limit 1e-8)", lines.join(", ")))
}

/// `J_n(x)` from `(1/2π)∫cos(nτ − x sin τ)dτ` by the periodic trapezoid rule.
fn bessel_oracle(n: i64, x: f64) -> f64 {
    let m = 2048;
    (0..m)
        .map(|j| {
            let tau = 2.0 * PI * j as f64 / m as f64;
            (n as f64 * tau - x * tau.sin()).cos()
        })
        .sum::<f64>()
        / m as f64
}

fn c5_gbf() -> Outcome {
    // single harmonic reduces to ordinary Bessel
    let mut single: f64 = 0.0;
    for x in [0.5, 3.0, 13.0, 25.0] {
        let spec = DriveSpec::new(1.0).with_cos(1, x);
        let p_max = (x as i64) + 30;
        let q = gbf_coefficients(&spec, p_max).expect("quadrature");
        let c = gbf_via_bessel_convolution(&spec, p_max).expect("convolution");
        for p in -p_max..=p_max {
            let want = bessel_oracle(p, x);
            single = single.max((q.get(p).re - want).abs() + q.get(p).im.abs());
            single = single.max((c.get(p).re - want).abs() + c.get(p).im.abs());
        }
    }
    // quadrature vs convolution, Jacobi–Anger, Parseval on random drives
    let mut rng = ChaCha8Rng::seed_from_u64(0x4742_4621);
    let (mut agree, mut recon, mut parseval): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..20 {
        let spec = random_spec(&mut rng);
        let p_max = 80;
        let q = gbf_coefficients(&spec, p_max).expect("quadrature");
        let c = gbf_via_bessel_convolution(&spec, p_max).expect("convolution");
        for p in -p_max..=p_max {
            agree = agree.max((q.get(p) - c.get(p)).norm());
        }
        parseval = parseval.max((q.sum_sq() - 1.0).abs());
        let w = spec.omega_eps();
        for _ in 0..50 {
            let t = rng.gen_range(0.0..2.0 * PI / w);
            let phase: f64 = spec
                .a_coeffs
                .iter()
                .map(|h| h.amp / (h.n as f64 * w) * (h.n as f64 * w * t).sin())
                .sum::<f64>()
                + spec
                    .b_coeffs
                    .iter()
                    .map(|h| h.amp / (h.m as f64 * w) * (1.0 - (h.m as f64 * w * t).cos()))
                    .sum::<f64>();
            let sum: Complex64 = q.iter().map(|(p, g)| g * Complex64::from_polar(1.0, p as f64 * w * t)).sum();
            recon = recon.max((sum - Complex64::from_polar(1.0, phase)).norm());
        }
    }
    let pass = single < 1e-12 && agree < 1e-10 && recon < 1e-9 && parseval < 1e-9;
    outcome(
        pass,
        format!(
            "Bessel {single:.1e} (1e-12), quad/conv {agree:.1e} (1e-10), Jacobi-Anger {recon:.1e} (1e-9), Parseval {parseval:.1e} (1e-9)"
        ),
    )
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn c6_divdiff() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4444_0006);
    // permutation invariance
    let mut perm: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.gen_range(2..=12);
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-20.0..20.0)).collect();
        let tau = rng.gen_range(0.1..10.0);
        let a = exp_dd_slice(&x, tau);
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            x.swap(i, j);
        }
        let b = exp_dd_slice(&x, tau);
        perm = perm.max((a - b).norm() / a.norm().max(f64::MIN_POSITIVE));
    }
    // confluent closed forms
    let mut conf: f64 = 0.0;
    for _ in 0..200 {
        let m = rng.gen_range(0..=10usize);
        let x = rng.gen_range(-10.0..10.0);
        let tau = rng.gen_range(0.1..5.0);
        let got = exp_dd_slice(&vec![x; m + 1], tau);
        let want = Complex64::new(0.0, tau).powu(m as u32) * Complex64::from_polar(1.0, x * tau) / factorial(m);
        conf = conf.max((got - want).norm() / want.norm());
        // [0, 0, a]
        let a = rng.gen_range(0.5..10.0);
        let i = Complex64::new(0.0, 1.0);
        let want = ((Complex64::from_polar(1.0, a * tau) - 1.0) / a - i * tau) / a;
        let got = exp_dd_slice(&[0.0, a, 0.0], tau);
        conf = conf.max((got - want).norm() / want.norm());
    }
    // simplex bound
    let mut bound_ratio: f64 = 0.0;
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=12usize);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let tau: f64 = rng.gen_range(0.01..20.0);
        let m = n - 1;
        let bound = tau.powi(m as i32) / factorial(m);
        bound_ratio = bound_ratio.max(exp_dd_slice(&x, tau).norm() / bound);
    }
    // near-confluence continuity
    let mut cont: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=8usize);
        let base: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let tau = rng.gen_range(0.1..5.0);
        let mut conf_nodes = base.clone();
        conf_nodes.push(base[0]);
        let mut near = base.clone();
        near.push(base[0] + 1e-8);
        let a = exp_dd_slice(&conf_nodes, tau);
        let b = exp_dd_slice(&near, tau);
        cont = cont.max((a - b).norm() / a.norm().max(1e-300));
    }
    let pass = perm < 1e-13 && conf < 1e-12 && bound_ratio <= 1.0 + 1e-12 && cont < 1e-6;
    outcome(
        pass,
        format!(
            "permutation {perm:.1e} (1e-13), confluent {conf:.1e} (1e-12), max |dd|/bound {bound_ratio:.6} (<= 1), continuity {cont:.1e} (1e-6)"
        ),
    )
}

fn c7_unitarity_composition() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let defects = DEFECTS.lock().clone();
    if defects.is_empty() {
        return outcome(false, "no engine outputs recorded by criteria 1-2");
    }
    let worst = defects
        .iter()
        .map(|(l, d, lim)| {
            pass &= d < lim;
            (l.clone(), d / lim)
        })
        .fold((String::new(), 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    parts.push(format!("{} unitarity checks, worst {} at {:.1e} of limit", defects.len(), worst.0, worst.1));

    // composition: U(t,s) = U(t,r)U(r,s)
    let mut series_comp: f64 = 0.0;
    let mut grid_comp: f64 = 0.0;
    let static_spec = DriveSpec::new(1.0).with_delta(0, Complex64::new(0.5, 0.0));
    let mut specs = vec![("static", static_spec)];
    specs.extend(driven_sets());
    for (_, spec) in &specs {
        let ks = ks_of(spec);
        let tp = spec.period();
        for &(t, r, s) in &[(tp, 0.4 * tp, 0.0), (0.9 * tp, 0.5 * tp, 0.2 * tp)] {
            let full = unitary_analytic(&ks, t, s, SERIES_TOL, K_MAX).expect("series");
            let a = unitary_analytic(&ks, t, r, SERIES_TOL, K_MAX).expect("series");
            let b = unitary_analytic(&ks, r, s, SERIES_TOL, K_MAX).expect("series");
            series_comp = series_comp.max(full.max_abs_diff(&(a * b)));
        }
        // grid traces from two starting times, split at a shared node
        let opt = GridOptions::default();
        let n = GRID_POINTS;
        let from0 = unitary_trace_grid(&ks, 0.0, tp, n, &opt).expect("grid");
        let mid = (n - 1) / 2;
        let r = from0.times[mid];
        let from_r = unitary_trace_grid(&ks, r, tp, n - mid, &opt).expect("grid");
        for (j, u) in from_r.u.iter().enumerate() {
            let composed = *u * from0.u[mid];
            grid_comp = grid_comp.max(composed.max_abs_diff(&from0.u[mid + j]));
        }
    }
    let grid_limit = 10.0 * GridOptions::default().grid_tol;
    pass &= series_comp < 10.0 * SERIES_TOL && grid_comp < grid_limit;
    parts.push(format!(
        "composition series {series_comp:.1e} (limit {:.0e}), grid {grid_comp:.1e} (limit {grid_limit:.0e})",
        10.0 * SERIES_TOL
    ));
    outcome(pass, parts.join("; "))
}

fn c8_quasienergy() -> Outcome {
    let spec = presets::prob_bloch_siegert();
    let ks = ks_of(&spec);
    let tp = spec.period();
    let us = unitary_analytic(&ks, tp, 0.0, SERIES_TOL, K_MAX).expect("series");
    let uo = integrate_schrodinger(&spec, 0.0, tp, 1e-12, Frame::Rotated).expect("oracle");
    let (sp, sm) = match quasienergies(&us, tp) {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("series monodromy rejected: {e}")),
    };
    let (op, om) = quasienergies(&uo, tp).expect("oracle monodromy");
    let d = (sp - op).abs().max((sm - om).abs());
    let half = us.trace() * 0.5;
    let root = (Complex64::new(1.0, 0.0) - half * half).sqrt();
    let i = Complex64::new(0.0, 1.0);
    let modulus = ((half + i * root).norm() - 1.0).abs().max(((half - i * root).norm() - 1.0).abs());
    outcome(
        d < 1e-6 * spec.omega && modulus < 1e-6,
        format!("ε± = ({sp:.9}, {sm:.9}), oracle ({op:.9}, {om:.9}), |Δε| = {d:.1e} (limit 1e-6ω), ||λ|-1| = {modulus:.1e}"),
    )
}

/// Strict local maxima over the 8-neighbourhood of interior cells.
fn local_maxima(v: &[f64], n1: usize, n2: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i2 in 1..n2 - 1 {
        for i1 in 1..n1 - 1 {
            let c = v[i2 * n1 + i1];
            let mut is_max = true;
            for d2 in [-1i64, 0, 1] {
                for d1 in [-1i64, 0, 1] {
                    if (d1, d2) != (0, 0) {
                        let j = (i2 as i64 + d2) as usize * n1 + (i1 as i64 + d1) as usize;
                        is_max &= v[j] < c;
                    }
                }
            }
            if is_max {
                out.push((i1, i2));
            }
        }
    }
    out
}

fn within_one(a: &(usize, usize), set: &[(usize, usize)]) -> bool {
    set.iter()
        .any(|b| (a.0 as i64 - b.0 as i64).abs() <= 1 && (a.1 as i64 - b.1 as i64).abs() <= 1)
}

fn c9_rwa() -> Outcome {
    let template = presets::map_biharmonic();
    let eps0 = template.eps0;
    let tp = template.period();
    let times: Vec<f64> = (0..=180).map(|i| i as f64 * 3.0 * tp / 180.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5257_4139);
    let mut worst: f64 = 0.0;
    let mut worst_at = (0.0, 0.0);
    for _ in 0..20 {
        let a1 = rng.gen_range(-40.0..40.0);
        let a2 = rng.gen_range(-40.0..40.0);
        let spec = template.clone().with_cos(1, a1).with_cos(2, a2);
        let table = build_table(&spec, THRESHOLD).expect("table");
        let exact = integrate_trace(&spec, 0.0, &times, 1e-9, Frame::Lab, StepControl::default()).expect("oracle");
        for (t, u) in times.iter().zip(&exact) {
            let d = (rwa_probability(&table, eps0, spec.omega, *t) - transition_probability_raw(u)).abs();
            if d > worst {
                worst = d;
                worst_at = (a1, a2);
            }
        }
    }
    let sweep = SweepSpec::new(
        template,
        Axis::Cos(1),
        Range::new(-40.0, 40.0, 21),
        Axis::Cos(2),
        Range::new(-40.0, 40.0, 21),
    );
    let rwa = avg_map(&sweep).expect("rwa map");
    let exact = sweep_map(&sweep, |s| long_time_average(s, 256, 1e-8)).expect("oracle map");
    let mr = local_maxima(&rwa.values, 21, 21);
    let mo = local_maxima(&exact.values, 21, 21);
    let r_ok = mr.iter().filter(|m| within_one(m, &mo)).count();
    let o_ok = mo.iter().filter(|m| within_one(m, &mr)).count();
    let ridges = r_ok == mr.len() && o_ok == mo.len() && !mr.is_empty();
    outcome(
        worst < 0.02 && ridges,
        format!(
            "max |p_rwa - p| over 20 amplitudes, t <= 3T: {worst:.3} at A=({:.1}, {:.1}) (limit 0.02); ridge maxima matched within one cell: rwa {r_ok}/{}, oracle {o_ok}/{}",
            worst_at.0,
            worst_at.1,
            mr.len(),
            mo.len()
        ),
    )
}

fn first_bessel_zeros(n: i64, below: f64) -> Vec<f64> {
    let mut zeros = Vec::new();
    let step = 0.05;
    let mut x = 0.5;
    while x < below {
        let (a, b) = (bessel_oracle(n, x), bessel_oracle(n, x + step));
        if a * b < 0.0 {
            let (mut lo, mut hi) = (x, x + step);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if bessel_oracle(n, lo) * bessel_oracle(n, mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        x += step;
    }
    zeros
}

fn c10_structure() -> Outcome {
    let offsets = [0.37, 1.1, 2.9];
    let pairs = [(1.0, 0.2), (3.0, 1.4), (5.5, 0.7), (6.0, 6.0)];
    let shift_defect = |spec: &DriveSpec| {
        let ks = ks_of(spec);
        let mut m: f64 = 0.0;
        for &(t, s) in &pairs {
            let base = kernel_at(&ks, t, s).expect("kernel");
            for &tau in &offsets {
                m = m.max((kernel_at(&ks, t + tau, s + tau).expect("kernel") - base).norm());
            }
        }
        m
    };
    let undriven = shift_defect(&presets::kernel_static());
    let driven = [
        ("1b", shift_defect(&presets::kernel_bloch_siegert())),
        ("1c", shift_defect(&presets::kernel_longitudinal())),
        ("1d", shift_defect(&presets::kernel_biharmonic())),
    ];
    let driven_ok = driven.iter().all(|(_, d)| *d > 1e-3);

    // Rabi map zero set on the A₂ = 0 axis against zeros of J₁
    let zeros = first_bessel_zeros(1, 40.0);
    let quoted = [3.8317, 7.0156, 10.1735];
    let quoted_ok = quoted.iter().zip(&zeros).all(|(q, z)| (q - z).abs() < 1e-4);
    let sweep = SweepSpec::new(
        presets::map_biharmonic(),
        Axis::Cos(1),
        Range::new(-40.0, 40.0, 81),
        Axis::Cos(2),
        Range::new(-40.0, 40.0, 81),
    );
    let map = rabi_map(&sweep, -1).expect("rabi map");
    let i2 = map.axis2.iter().position(|a| a.abs() < 1e-12).expect("A2 = 0 row");
    let row: Vec<f64> = (0..81).map(|i1| map.get(i1, i2)).collect();
    let minima: Vec<f64> = (1..80)
        .filter(|&i| row[i] < row[i - 1] && row[i] < row[i + 1])
        .map(|i| map.axis1[i])
        .collect();
    let mut expected: Vec<f64> = vec![0.0];
    for z in &zeros {
        expected.push(*z);
        expected.push(-*z);
    }
    let h = map.axis1[1] - map.axis1[0];
    let exp_ok = expected.iter().all(|z| minima.iter().any(|m| (m - z).abs() <= h));
    let min_ok = minima.iter().all(|m| expected.iter().any(|z| (m - z).abs() <= h));
    let pass = undriven < 1e-12 && driven_ok && quoted_ok && exp_ok && min_ok;
    outcome(
        pass,
        format!(
            "undriven shift defect {undriven:.1e} (1e-12); driven {} (> 1e-3); A2=0 row: {} minima vs {} Bessel zeros, all within {h} ω: {}",
            driven.iter().map(|(n, d)| format!("{n} {d:.2e}")).collect::<Vec<_>>().join(", "),
            minima.len(),
            expected.len(),
            exp_ok && min_ok
        ),
    )
}

fn c11_heff() -> Outcome {
    let spec = presets::weak_resonant();
    let ks = ks_of(&spec);
    let Some(alpha) = ks.resonance() else {
        return outcome(false, "preset is not an integer resonance");
    };
    let j = rwa_hamiltonian(&ks.gbf, alpha).expect("resonant coefficient").u12;
    let h = twolevel::propagator::effective_hamiltonian(&spec, spec.period(), 64).expect("heff");
    let rel = (h.u12 - j).norm() / j.norm();
    outcome(
        rel < 0.05 && (j.norm() - 0.05).abs() < 1e-12 && h.hermiticity_defect() < 1e-9,
        format!("|𝒥| = {:.4}, H_eff,12 = {:.5}, relative deviation {rel:.4} (limit 0.05)", j.norm(), h.u12),
    )
}

fn main() {
    let criteria: Vec<(u32, &str, u64, fn() -> Outcome)> = vec![
        (1, "static Rabi closed form", 1, c1_static_rabi),
        (2, "series/grid/oracle triangle", 180, c2_triangle),
        (3, "kernel form equivalence", 5, c3_kernel_forms),
        (4, "star-power node validation", 120, c4_nodes),
        (5, "GBF suite", 10, c5_gbf),
        (6, "divided-difference suite", 10, c6_divdiff),
        (7, "unitarity and composition", 600, c7_unitarity_composition),
        (8, "quasienergies", 10, c8_quasienergy),
        (9, "rotating-wave regime", 600, c9_rwa),
        (10, "kernel and map structure", 300, c10_structure),
        (11, "effective Hamiltonian limit", 30, c11_heff),
    ];
    let mut failed = Vec::new();
    for (id, title, budget, f) in criteria {
        let st = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f));
        let el = st.elapsed();
        let within = el <= Duration::from_secs(budget);
        let (pass, detail) = match res {
            Ok(o) => (o.pass && within, o.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                (false, format!("panicked: {msg}"))
            }
        };
        println!(
            "[{}] criterion {id:>2} {title}: {detail} [{:.2}s, limit {budget}s]",
            if pass { "PASS" } else { "FAIL" },
            el.as_secs_f64()
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
