//! Acceptance criteria, one line each. Oracles are computed here from the
//! defining formulas, not from library helpers.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slowfast_core::blowup::{rescaled_integral_residual, Region as BoxRegion};
use slowfast_core::cyclicity::*;
use slowfast_core::dulac::{dulac_integrable, dulac_real};
use slowfast_core::foliation::*;
use slowfast_core::isoclines::*;
use slowfast_core::leaves::*;
use slowfast_core::{Cpx, Eps};

struct Outcome {
    pass: bool,
    detail: String,
}

fn eps(e: f64) -> Eps {
    Eps::new(e).unwrap()
}

fn within(t: Instant, limit: f64) -> (bool, Duration) {
    let d = t.elapsed();
    (d.as_secs_f64() < limit, d)
}

/// Interior grid of `n` points of `(a, b)`, endpoints included.
fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn reference_direction() -> Poly {
    Poly::from_terms(&[(1, 1, 1.0), (1, 0, -0.4)])
}

fn c1_closed_form() -> Outcome {
    let t = Instant::now();
    let e = eps(1.0);
    let err = grid(0.01, 0.99, 200)
        .into_iter()
        .map(|y| (dulac_real(y, e).unwrap() - (1.0 - y)).abs())
        .fold(0.0, f64::max);
    let (fast, d) = within(t, 1.0);
    Outcome { pass: err < 1e-10 && fast, detail: format!("max |D(y) - (1-y)| = {err:.2e} in {d:.2?}") }
}

fn c2_involution() -> Outcome {
    let t = Instant::now();
    let (mut inv, mut fix) = (0.0f64, 0.0f64);
    for e in [0.1, 0.25, 0.5, 2.0, 5.0] {
        let ee = eps(e);
        for k in 0..100 {
            let y = (k as f64 + 0.5) / 100.0;
            let w = dulac_real(y, ee).unwrap();
            inv = inv.max((dulac_real(w, ee).unwrap() - y).abs());
        }
        let yc = e / (1.0 + e);
        fix = fix.max((dulac_real(yc, ee).unwrap() - yc).abs());
    }
    let (fast, d) = within(t, 5.0);
    Outcome {
        pass: inv < 1e-8 && fix < 1e-9 && fast,
        detail: format!("max |D(D(y)) - y| = {inv:.2e}, max |D(y_c) - y_c| = {fix:.2e} in {d:.2?}"),
    }
}

/// `eps arg y + arg(1 - y) - eps theta`, reduced modulo `2 pi`.
fn arg_identity(y: Cpx, theta: f64, e: f64) -> f64 {
    let r = e * y.arg() + (1.0 - y).arg() - e * theta;
    (r + PI).rem_euclid(2.0 * PI) - PI
}

fn c3_isoclines() -> Outcome {
    let mut worst = 0.0f64;
    let mut end_gap = 0.0f64;
    let mut samples = 0usize;
    for e in [0.1, 0.25, 0.5, 0.8] {
        let ee = eps(e);
        let mut curves = Vec::new();
        // theta = 0 is the pair C+0, C-0 traced below
        for k in [1, 2, 3, 5, 6, 7] {
            let theta = -PI + 2.0 * PI * k as f64 / 8.0;
            for side in [Side::D0, Side::D1] {
                curves.push(trace_isocline(theta, side, ee, 5.0, 1e-3).unwrap());
            }
        }
        for b in BoundaryCurve::ALL {
            let c = trace_boundary_curve(b, ee, 5.0, 1e-3).unwrap();
            if matches!(b, BoundaryCurve::PlusPi | BoundaryCurve::MinusPi) {
                let near_one = c.samples.iter().map(|y| (y - 1.0).norm()).fold(f64::INFINITY, f64::min);
                end_gap = end_gap.max(near_one);
            }
            curves.push(c);
        }
        for c in &curves {
            for &y in &c.samples {
                worst = worst.max(arg_identity(y, c.theta, e).abs());
                samples += 1;
            }
        }
    }
    Outcome {
        pass: worst < 1e-9 && end_gap < 1e-4,
        detail: format!("max residual {worst:.2e} over {samples} samples; C±pi reach |y-1| = {end_gap:.2e}"),
    }
}

/// First-order distance of `w` to `{Im log h = eps theta}`: the residual over
/// `|d log h / dy|`.
fn distance_to_isocline(w: Cpx, theta: f64, e: f64) -> f64 {
    let grad = (e / w - 1.0 / (1.0 - w)).norm();
    arg_identity(w, theta, e).abs() / grad
}

fn distance_to_negative_ray(w: Cpx) -> f64 {
    if w.re <= 0.0 {
        w.im.abs()
    } else {
        w.norm()
    }
}

fn interior_samples(c: &IsoclineCurve, n: usize) -> Vec<Cpx> {
    let m = c.samples.len();
    (0..n).map(|k| c.samples[1 + k * (m - 3) / (n - 1)]).collect()
}

fn c4_boundary_mapping() -> Outcome {
    let mut zero_side = 0.0f64;
    let mut ray = 0.0f64;
    let mut wrong_half = 0usize;
    for e in [0.25, 0.5, 0.8, 2.0] {
        let ee = eps(e);
        let c = trace_boundary_curve(BoundaryCurve::PlusZero, ee, 5.0, 1e-3).unwrap();
        for y in interior_samples(&c, 50) {
            let w = dulac_integrable(y, ee).unwrap();
            zero_side = zero_side.max(distance_to_isocline(w, 0.0, e));
            if w.im > 1e-12 {
                wrong_half += 1;
            }
        }
        // C±pi is empty once eps >= 1
        for b in [BoundaryCurve::PlusPi, BoundaryCurve::MinusPi].into_iter().filter(|_| e < 1.0) {
            let c = trace_boundary_curve(b, ee, 5.0, 1e-3).unwrap();
            for y in interior_samples(&c, 50) {
                ray = ray.max(distance_to_negative_ray(dulac_integrable(y, ee).unwrap()));
            }
        }
    }
    Outcome {
        pass: zero_side < 1e-7 && ray < 1e-7 && wrong_half == 0,
        detail: format!("D(C+0) off C-0 by {zero_side:.2e} ({wrong_half} in upper half); D(C±pi) off (-inf,0) by {ray:.2e}"),
    }
}

fn covering_oracle(x: Cpx, y: Cpx, y0: Cpx, e: f64) -> f64 {
    let f = |y: Cpx| y * (1.0 - y).powf(1.0 / e);
    let rhs = (f(y) - f(y0)) * (1.0 - y).powf(-1.0 / e);
    (x * x - rhs).norm()
}

fn c5_covering() -> Outcome {
    let mut cover = 0.0f64;
    let mut drift = 0.0f64;
    let mut paths = 0usize;
    let mut check = |p: &LeafPath, y0: Cpx, e: f64| {
        for (x, y) in p.points() {
            cover = cover.max(covering_oracle(x, y, y0, e));
        }
        drift = drift.max(p.h_drift(eps(e)));
        paths += 1;
    };
    for e in [0.1, 0.5, 2.0] {
        let ee = eps(e);
        let mut starts = Vec::new();
        for r in [0.3, 0.6, 0.9] {
            for k in 0..12 {
                let y = Cpx::from_polar(r, -PI + 2.0 * PI * (k as f64 + 0.5) / 12.0) * 0.8 + 0.2;
                if matches!(classify_point(y, ee), Ok(Region::D0 | Region::D1)) {
                    starts.push(y);
                }
            }
        }
        starts.extend([0.5 * (e / (1.0 + e) + 1.0), 0.3 * e / (1.0 + e)].map(|y| Cpx::new(y, 0.0)));
        for y in starts {
            for b in [Branch::One, Branch::Two] {
                if let Ok(p) = base_lift(y, ee, b) {
                    check(&p, y, e);
                }
            }
        }
        if e < 1.0 {
            let cpi = trace_boundary_curve(BoundaryCurve::PlusPi, ee, 5.0, 1e-3).unwrap();
            let y_plus = cpi.samples[cpi.samples.len() / 3];
            let f8 = figure_eight(y_plus, ee).unwrap();
            check(&f8.loop_path, y_plus, e);
        }
    }
    Outcome {
        pass: cover < 1e-8 && drift < 1e-8 && paths > 60,
        detail: format!("{paths} lifted paths: covering residual {cover:.2e}, H drift {drift:.2e}"),
    }
}

fn c6_holonomy() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for e in [0.1, 0.5] {
        let ee = eps(e);
        let cpi = trace_boundary_curve(BoundaryCurve::PlusPi, ee, 5.0, 1e-3).unwrap();
        let f8 = figure_eight(cpi.samples[cpi.samples.len() / 3], ee).unwrap();
        let params = FoliationParams::integrable(e).unwrap();
        for x in [1e-3, -1e-3, 1e-2, -1e-2] {
            match holonomy_transport(&f8, &params, x) {
                Ok(v) => worst = worst.max((v - x).norm()),
                Err(err) => failures.push(format!("eps {e}, x {x}: {err}")),
            }
        }
    }
    let (fast, d) = within(t, 30.0);
    Outcome {
        pass: failures.is_empty() && worst < 1e-6 && fast,
        detail: format!("max |Hol(x) - x| = {worst:.2e} in {d:.2?}{}", failures.join("; ")),
    }
}

/// `d(delta)/delta` at a few section points for a sequence of `delta`;
/// `None` where every displacement is below integration noise.
fn scaled_displacements(e: f64, q: &Poly, ys: &[f64], deltas: &[f64]) -> Vec<Option<Vec<f64>>> {
    ys.iter()
        .map(|&y| {
            let d: Vec<f64> = deltas
                .iter()
                .map(|&dl| displacement(y, &FoliationParams::new(e, dl, Poly::zero(), q.clone()).unwrap()).unwrap())
                .collect();
            if d.iter().all(|v| v.abs() < 10.0 * DISPLACEMENT_NOISE) {
                None
            } else {
                Some(d.iter().zip(deltas).map(|(v, dl)| v / dl).collect())
            }
        })
        .collect()
}

/// Largest `|r_k / r_{k+1} - 1|` over consecutive scaled displacements.
fn ratio_spread(rows: &[Option<Vec<f64>>]) -> f64 {
    rows.iter()
        .flatten()
        .flat_map(|r| r.windows(2).map(|w| (w[0] / w[1] - 1.0).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

/// Cycles against level-mapped Melnikov zeros and the `delta` scaling.
fn first_order(e: f64, q: Poly) -> (bool, String) {
    let deltas = [1e-3, 5e-4, 2.5e-4];
    let params = FoliationParams::new(e, 1e-4, Poly::zero(), q.clone()).unwrap();
    let cycles = find_real_cycles(&params, &real_section_grid(&params, 60).unwrap()).unwrap();
    let zeros = melnikov_zeros(&params, &melnikov_level_grid(params.eps, 40)).unwrap();
    let mapped: Vec<f64> = zeros.iter().map(|&c| level_to_y(c, params.eps).unwrap()).collect();
    let matched = cycles.len() == mapped.len()
        && cycles.iter().zip(&mapped).all(|(c, m)| (c.y_fixed - m).abs() < 1e-2);
    let ys = real_section_grid(&params, 7).unwrap();
    let rows = scaled_displacements(e, &q, &ys[1..6], &deltas);
    let live = rows.iter().flatten().count();
    let spread = ratio_spread(&rows);
    let pass = matched && spread < 0.05;
    let detail = format!(
        "cycles {:?} vs Melnikov {:?}; d/delta ratio spread {spread:.3} on {live}/{} points",
        cycles.iter().map(|c| format!("{:.5}", c.y_fixed)).collect::<Vec<_>>(),
        mapped.iter().map(|y| format!("{y:.5}")).collect::<Vec<_>>(),
        rows.len()
    );
    (pass, detail)
}

fn c7_first_order() -> Outcome {
    let q = Poly::constant(1.0);
    let (pass, detail) = first_order(0.5, q.clone());
    // Q dy is even under x -> -x, so the flow is reversible: no cycles, and
    // both displacement and Melnikov function vanish identically.
    let params = FoliationParams::new(0.5, 1e-4, Poly::zero(), q).unwrap();
    let m = melnikov(0.4 * params.eps.h_center(), &params).unwrap();
    let vanishing = m.value.abs() <= 1e-9 * m.abs_integral.max(1e-300);
    Outcome { pass: pass && vanishing, detail: format!("Q = 1: {detail}; I/|I| = {:.1e}", m.value / m.abs_integral) }
}

fn c7b_first_order_quadratic() -> Outcome {
    let (pass, detail) = first_order(0.5, reference_direction());
    Outcome { pass, detail: format!("Q = x(y-0.4): {detail}") }
}

fn square(lo: Cpx, hi: Cpx, n: usize) -> ContourD {
    let c = [lo, Cpx::new(hi.re, lo.im), hi, Cpx::new(lo.re, hi.im), lo];
    let arcs = c
        .windows(2)
        .map(|w| ContourArc { kind: ArcKind::Free, points: (0..=n).map(|k| w[0] + (w[1] - w[0]) * (k as f64 / n as f64)).collect() })
        .collect();
    ContourD { arcs }
}

fn c8_argument_principle() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut exact = 0;
    let mut worst_residual = 0.0f64;
    for case in 0..20 {
        let center = Cpx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let r = rng.gen_range(0.5..2.0);
        let (contour, margin): (ContourD, Box<dyn Fn(Cpx) -> f64>) = if case % 2 == 0 {
            (ContourD::circle(center, r, 24), Box::new(move |z: Cpx| ((z - center).norm() - r).abs()))
        } else {
            let (lo, hi) = (center - Cpx::new(r, r), center + Cpx::new(r, r));
            let d = move |z: Cpx| ((z.re - lo.re).abs().min((z.re - hi.re).abs())).min((z.im - lo.im).abs().min((z.im - hi.im).abs()));
            (square(lo, hi, 6), Box::new(d))
        };
        let mut zeros = Vec::new();
        while zeros.len() < rng.gen_range(0..6) {
            let z = center + Cpx::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)) * r;
            if margin(z) > 0.1 * r {
                zeros.push(z);
            }
        }
        let inside = zeros.iter().filter(|z| contour.contains(**z)).count() as u32;
        let f = |y: Cpx| Ok(zeros.iter().fold((0.3 * y).exp(), |acc, z| acc * (y - z)));
        let rep = variation_of_argument(f, &contour).unwrap();
        if rep.bound == inside && rep.residual < 0.25 {
            exact += 1;
        }
        worst_residual = worst_residual.max(rep.residual);
    }
    let params = FoliationParams::new(0.5, 1e-4, Poly::zero(), reference_direction()).unwrap();
    let cycles = find_real_cycles(&params, &real_section_grid(&params, 60).unwrap()).unwrap().len() as u32;
    let contour = ContourD::build(&params, &ContourOptions::default()).unwrap();
    let rep = variation_of_argument(|y| displacement_complex(y, &params), &contour).unwrap();
    let newton = newton_zeros(|y| displacement_complex(y, &params), &contour, 8).len() as u32;
    let equality = newton != rep.bound || rep.bound == cycles;
    let (fast, d) = within(t, 60.0);
    Outcome {
        pass: exact == 20 && rep.bound >= cycles && equality && fast,
        detail: format!(
            "synthetic {exact}/20 exact (residual <= {worst_residual:.1e}); reference bound {} (winding {:.6}), real cycles {cycles}, Newton zeros {newton}; {d:.2?}",
            rep.bound, rep.winding
        ),
    }
}

fn c9_blowup() -> Outcome {
    let region = BoxRegion { x_max: 1.0, y_max: 2.0, n: 201 };
    let r: Vec<f64> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&e| rescaled_integral_residual(e, &region).unwrap()).collect();
    let ratios: Vec<f64> = r.windows(2).map(|w| w[1] / w[0]).collect();
    let pass = ratios.iter().all(|q| (q - 0.5).abs() <= 0.15 * 0.5);
    Outcome { pass, detail: format!("residuals {:?}, successive ratios {:?}", fmt(&r, 3), fmt(&ratios, 4)) }
}

fn fmt(v: &[f64], digits: usize) -> Vec<String> {
    v.iter().map(|x| format!("{x:.digits$e}")).collect()
}

fn c10_uniformity() -> Outcome {
    let t = Instant::now();
    let rows = cyclicity_experiment(&[0.05, 0.1, 0.2, 0.4, 0.8], &Poly::zero(), &reference_direction(), &[1e-4], &ExperimentOptions::default());
    let bounds: Vec<Option<u32>> = rows.iter().map(|r| r.bound).collect();
    let finite: Vec<u32> = bounds.iter().flatten().copied().collect();
    let all_finite = finite.len() == rows.len();
    let max = finite.iter().copied().max().unwrap_or(0);
    let min = finite.iter().copied().min().unwrap_or(0);
    let scatter = max as f64 / min.max(1) as f64;
    let errors: Vec<&str> = rows.iter().filter_map(|r| r.error.as_deref()).collect();
    let (fast, d) = within(t, 600.0);
    Outcome {
        pass: all_finite && scatter <= 4.0 && fast && !rows.iter().any(|r| r.violation),
        detail: format!("bounds {bounds:?}, scatter {scatter:.2}, {d:.2?}{}", if errors.is_empty() { String::new() } else { format!("; errors: {}", errors.join(" | ")) }),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1", c1_closed_form),
        ("2", c2_involution),
        ("3", c3_isoclines),
        ("4", c4_boundary_mapping),
        ("5", c5_covering),
        ("6", c6_holonomy),
        ("7", c7_first_order),
        ("7b", c7b_first_order_quadratic),
        ("8", c8_argument_principle),
        ("9", c9_blowup),
        ("10", c10_uniformity),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == name) {
            continue;
        }
        let o = run();
        println!("criterion {name:>3}: {} — {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
