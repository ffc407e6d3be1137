//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use common::{corpus, corpus_matrix, fixture, random_square, rel_diff};
use num_complex::Complex64;
use permbound::bounds::{
    extract_rank1, f_sup_estimate, gurvits_estimate, marcus_bounds, verify_rank1, ExtractOptions, FSupOptions,
    VectorEnsemble,
};
use permbound::matrix::{cholesky_factor, random_psd, CMatrix, ComplexVector, HermitianMatrix, TOL_CHOL};
use permbound::permanent::{ln_factorial, per_naive, per_psd_log, per_rank1, per_ryser, per_tensor};
use permbound::relax::{barrier_value_grad, feasible_start, rel_solve, rel_solve_from, SolverOptions};
use permbound::rng::Stream;
use permbound::tight::{ratio_experiment, sphere_ensemble, tight_instance, worst_case_constant, PerMethod, RatioConfig};
use permbound::EULER_GAMMA;
use std::process::Command;
use std::time::{Duration, Instant};

type Criterion = (&'static str, fn() -> Outcome, u64);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn c1_sandwich() -> Outcome {
    let mut worst_upper = f64::INFINITY;
    let mut worst_lower = f64::INFINITY;
    let mut worst_sharp = f64::INFINITY;
    let mut failures = 0;
    for n in 2..=10 {
        for i in 0..100 {
            let a = corpus_matrix(n, i);
            let rel = rel_solve(&a, &SolverOptions::default()).unwrap().log_rel;
            let per = per_psd_log(&a).unwrap().ln();
            let nf = n as f64;
            let upper = rel - per;
            let lower = per - (rel - nf * (EULER_GAMMA + 1.0));
            let sharp = per - (rel - nf * EULER_GAMMA - (nf * nf.ln() - ln_factorial(n)));
            worst_upper = worst_upper.min(upper);
            worst_lower = worst_lower.min(lower);
            worst_sharp = worst_sharp.min(sharp);
            if upper < -1e-6 || lower < -1e-6 || sharp < -1e-6 {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!(
            "900 instances, {failures} violations; min slack rel-per {worst_upper:.3e}, per-lower {worst_lower:.3e}, per-sharp {worst_sharp:.3e}"
        ),
    )
}

fn c2_oracles() -> Outcome {
    let mut rng = Stream::derive(2, 0);
    let mut worst: f64 = 0.0;
    for n in 1..=9 {
        for _ in 0..100 {
            let m = random_square(n, &mut rng);
            let r = per_ryser(&m).unwrap();
            let nv = per_naive(&m).unwrap();
            let mut pairs = vec![(r, nv)];
            if n <= 4 {
                let t = per_tensor(&m).unwrap();
                pairs.push((r, t));
                pairs.push((nv, t));
            }
            for (p, q) in pairs {
                worst = worst.max((p - q).norm() / p.norm().max(q.norm()));
            }
        }
    }
    outcome(worst <= 1e-9, format!("n = 1..9 (tensor n ≤ 4), max pairwise relative error {worst:.3e}"))
}

fn c3_closed_forms() -> Outcome {
    let mut rng = Stream::derive(3, 0);
    let mut worst_rank1: f64 = 0.0;
    for i in 0..100 {
        let n = 1 + i % 10;
        let v = ComplexVector::new(rng.cnormal_vec(n));
        let a = HermitianMatrix::outer(&v);
        let ryser = per_ryser(a.as_matrix()).unwrap().re;
        worst_rank1 = worst_rank1.max(rel_diff(per_rank1(&v).to_linear(), ryser));
    }
    let mut bracket_fail = 0;
    for a in corpus(2..=10, 100) {
        let per = per_psd_log(&a).unwrap().ln();
        let (lo, hi) = marcus_bounds(&a);
        if per < lo.ln() - 1e-9 || per > hi.ln() + 1e-9 {
            bracket_fail += 1;
        }
    }
    outcome(
        worst_rank1 <= 1e-9 && bracket_fail == 0,
        format!("rank-1 max relative error {worst_rank1:.3e}; Marcus bracket violations {bracket_fail}/900"),
    )
}

fn c4_solver() -> Outcome {
    let opts = SolverOptions::default();
    let a22 = HermitianMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
    let r22 = rel_solve(&a22, &opts).unwrap().rel().to_linear();
    let a22_ok = rel_diff(r22, 9.0) <= 1e-6;

    let mut ident_worst: f64 = 0.0;
    for n in 1..=12 {
        let r = rel_solve(&HermitianMatrix::identity(n), &opts).unwrap().rel().to_linear();
        ident_worst = ident_worst.max((r - 1.0).abs());
    }

    let mut tight_worst: f64 = 0.0;
    for d in [1, 2, 4, 8] {
        for n in [d.max(2), 8, 12] {
            for seed in 0..10 {
                let u = sphere_ensemble(d, n, seed).unwrap();
                let inst = tight_instance(&u, seed).unwrap();
                let r = rel_solve(&inst.a, &opts).unwrap().rel().to_linear();
                tight_worst = tight_worst.max((r - 1.0).abs());
            }
        }
    }

    let mut rng = Stream::derive(4, 0);
    let mut multi_worst: f64 = 0.0;
    for i in 0..20 {
        let a = corpus_matrix(2 + i % 9, 100 + i);
        let reference = rel_solve(&a, &opts).unwrap().rel().to_linear();
        let factor = cholesky_factor(&a, TOL_CHOL);
        let x0 = feasible_start(&a, &factor).unwrap();
        for _ in 0..10 {
            let start: Vec<f64> = x0.iter().map(|x| x * (0.02 + 0.98 * rng.next_open01())).collect();
            let r = rel_solve_from(&a, &opts, start).unwrap().rel().to_linear();
            multi_worst = multi_worst.max(rel_diff(r, reference));
        }
    }

    let mut fd_worst: f64 = 0.0;
    for i in 0..50 {
        let n = 2 + i % 7;
        let a = random_psd(n, n, &mut rng);
        let factor = cholesky_factor(&a, TOL_CHOL);
        let x0 = feasible_start(&a, &factor).unwrap();
        let x: Vec<f64> = x0.iter().map(|x| 1.9 * x * (0.05 + 0.95 * rng.next_open01())).collect();
        let mu = 10f64.powf(-2.0 * rng.next_open01());
        let Ok((_, g)) = barrier_value_grad(&x, &factor, mu) else {
            continue;
        };
        let fd: Vec<f64> = (0..n)
            .map(|k| {
                let h = 1e-6 * x[k];
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let fp = barrier_value_grad(&xp, &factor, mu).unwrap().0;
                let fm = barrier_value_grad(&xm, &factor, mu).unwrap().0;
                (fp - fm) / (2.0 * h)
            })
            .collect();
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = g.iter().zip(&fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        fd_worst = fd_worst.max(err / scale);
    }

    let pass = a22_ok && ident_worst <= 1e-8 && tight_worst <= 1e-6 && multi_worst <= 1e-6 && fd_worst <= 1e-5;
    outcome(
        pass,
        format!(
            "rel(a22) = {r22:.9}; |rel(I_n)-1| ≤ {ident_worst:.1e}; tight |rel-1| ≤ {tight_worst:.1e} (120 instances); \
             multi-start spread {multi_worst:.1e}; FD gradient rel err {fd_worst:.1e}"
        ),
    )
}

fn c5_estimator() -> Outcome {
    let mut z_sum = 0.0;
    let mut count = 0;
    for i in 0..50 {
        let n = 2 + i % 7;
        let a = corpus_matrix(n, 200 + i);
        let per = per_psd_log(&a).unwrap().ln();
        let est = gurvits_estimate(&cholesky_factor(&a, TOL_CHOL), 100_000, 500 + i as u64).unwrap();
        let z = ((est.mean_log - per).exp() - 1.0) / est.std_err_rel;
        z_sum += z;
        count += 1;
    }
    let pooled = z_sum / (count as f64).sqrt();

    // Moments of CN(0,1): E|g|^2 = 1, E|g|^4 = 2, E g = E g^2 = E g^2 conj(g) = 0, E ln|g|^2 = -γ.
    let mut rng = Stream::derive(5, 0);
    let samples = 1_000_000;
    let g: Vec<Complex64> = (0..samples).map(|_| rng.cnormal()).collect();
    let moment = |f: &dyn Fn(Complex64) -> Complex64, target: Complex64| {
        let vals: Vec<Complex64> = g.iter().map(|&z| f(z)).collect();
        let mean = vals.iter().sum::<Complex64>() / samples as f64;
        let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (samples - 1) as f64;
        (mean - target).norm() / (var / samples as f64).sqrt()
    };
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let zs = [
        moment(&|z| z * z.conj(), one),
        moment(&|z| (z * z.conj()).powu(2), 2.0 * one),
        moment(&|z| z, zero),
        moment(&|z| z * z, zero),
        moment(&|z| z * z * z.conj(), zero),
        moment(&|z| Complex64::new(z.norm_sqr().ln(), 0.0), Complex64::new(-EULER_GAMMA, 0.0)),
    ];
    let worst_moment = zs.iter().cloned().fold(0.0, f64::max);
    let log_mean = g.iter().map(|z| z.norm_sqr().ln()).sum::<f64>() / samples as f64;
    outcome(
        pooled.abs() <= 4.0 && worst_moment <= 5.0,
        format!(
            "pooled z over 50 instances = {pooled:.3}; moment suite max |z| = {worst_moment:.2}; E ln|g|² ≈ {log_mean:.5}"
        ),
    )
}

fn c6_certificates() -> Outcome {
    let mut margin_fail = 0;
    let mut within = 0;
    let mut total = 0;
    let mut gaps = Vec::new();
    let bound = EULER_GAMMA + 1.0 + 0.05;
    for (idx, a) in corpus(2..=10, 100).into_iter().enumerate() {
        let sol = rel_solve(&a, &SolverOptions::default()).unwrap();
        let opts = ExtractOptions { seed: idx as u64, ..Default::default() };
        let cert = extract_rank1(&a, &sol, &opts).unwrap();
        let check = verify_rank1(&a, &cert.w, 1e-7).unwrap();
        if check.margin < -1e-7 * (1.0 + a.max_norm()) {
            margin_fail += 1;
        }
        let gap = (sol.log_rel - cert.log_lower.ln()) / a.n() as f64;
        gaps.push(gap);
        total += 1;
        if gap <= bound {
            within += 1;
        }
    }
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let frac = within as f64 / total as f64;
    outcome(
        margin_fail == 0 && frac >= 0.9,
        format!(
            "margin failures {margin_fail}/{total}; gap/n ≤ γ+1.05 for {:.1}%; gap/n median {:.4}, p90 {:.4}, max {:.4}",
            100.0 * frac,
            gaps[total / 2],
            gaps[total * 9 / 10],
            gaps[total - 1]
        ),
    )
}

fn c7_f_functional() -> Outcome {
    let mut rng = Stream::derive(7, 0);
    let floor = (-EULER_GAMMA).exp() - 0.02;
    let mut min_f = f64::INFINITY;
    let mut max_f: f64 = 0.0;
    for i in 0..50 {
        let d = 1 + (rng.next_u64() % 20) as usize;
        let n = 1 + (rng.next_u64() % 20) as usize;
        let cols = CMatrix::from_fn(d, n, |_, _| rng.cnormal());
        let u = VectorEnsemble::normalized(cols).unwrap();
        let f = f_sup_estimate(&u, &FSupOptions { seed: i, ..Default::default() });
        min_f = min_f.min(f);
        max_f = max_f.max(f);
    }
    let mut basis_worst: f64 = 0.0;
    for d in 1..=12 {
        let f = f_sup_estimate(&VectorEnsemble::standard_basis(d), &FSupOptions::default());
        basis_worst = basis_worst.max((f - 1.0).abs());
    }
    outcome(
        max_f <= 1.0 && min_f >= floor && basis_worst <= 1e-6,
        format!("random ensembles f ∈ [{min_f:.4}, {max_f:.4}] (floor {floor:.4}); standard basis |f-1| ≤ {basis_worst:.1e}"),
    )
}

fn c8_tightness() -> Vec<(String, Outcome)> {
    let config = RatioConfig {
        d_list: vec![1, 2, 4, 8],
        n_list: vec![8, 12],
        k_list: vec![1],
        seeds: (0..10).collect(),
        ..Default::default()
    };
    let rows = ratio_experiment(&config).unwrap();
    let cap = worst_case_constant() * 1.02;
    let exact: Vec<_> = rows.iter().filter(|r| r.per_method == PerMethod::Ryser).collect();
    let out_of_range = exact.iter().filter(|r| !(r.ratio_root >= 1.0 - 1e-9 && r.ratio_root <= cap)).count();
    let max_ratio = exact.iter().map(|r| r.ratio_root).fold(0.0, f64::max);
    let a = outcome(
        out_of_range == 0 && !exact.is_empty(),
        format!("{} exact rows, {out_of_range} outside [1, {cap:.4}], max ratio_root {max_ratio:.4}", exact.len()),
    );

    let target = (12.0 * 12f64.ln() - ln_factorial(12)).exp().powf(1.0 / 12.0);
    let d1: Vec<f64> = rows.iter().filter(|r| r.d == 1 && r.n == 12).map(|r| r.ratio_root).collect();
    let d1_err = d1.iter().map(|r| (r - target).abs()).fold(0.0, f64::max);
    let b = outcome(d1_err <= 1e-6, format!("d=1, n=12 ratio_root = {:.9}, formula {target:.9}", d1[0]));

    let mean = |d: usize| {
        let v: Vec<f64> = rows.iter().filter(|r| r.d == d && r.n == 12).map(|r| r.ratio_root).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let trend: Vec<String> = [1, 2, 4, 8].iter().map(|&d| format!("d={d}: {:.4}", mean(d))).collect();
    let c = outcome(mean(8) > target, format!("n=12 mean ratio_root over 10 seeds: {}", trend.join(", ")));
    vec![("8a".into(), a), ("8b".into(), b), ("8c".into(), c)]
}

fn c9_monotonicity() -> Outcome {
    let mut rng = Stream::derive(9, 0);
    let mut worst = f64::INFINITY;
    for i in 0..200 {
        let n = 1 + i % 10;
        let b = random_psd(n, 1 + (rng.next_u64() as usize) % n, &mut rng);
        let noise = random_psd(n, 1 + (rng.next_u64() as usize) % n, &mut rng);
        let scale = 10f64.powf(-3.0 * rng.next_open01());
        let a = HermitianMatrix::admit(b.as_matrix() + noise.as_matrix() * Complex64::new(scale, 0.0)).unwrap();
        let (pa, pb) = (per_psd_log(&a).unwrap().ln(), per_psd_log(&b).unwrap().ln());
        if pb.is_finite() {
            worst = worst.min(pa - pb);
        }
    }
    outcome(worst >= -1e-9, format!("200 pairs, min ln per(A) - ln per(B) = {worst:.3e}"))
}

fn c10_cli() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_permbound"))
            .args(["--format", "json", "bounds", "--seed", "11"])
            .arg(fixture("a22.json"))
            .output()
            .unwrap()
    };
    let (first, second) = (run(), run());
    let identical = first.stdout == second.stdout && first.status.success();
    let v: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    let get = |k: &str| v[k]["log"].as_f64().unwrap_or(f64::NAN);
    let checks = [
        rel_diff(get("log_rel").exp(), 9.0) <= 1e-6,
        (get("log_per_exact") - 5f64.ln()).abs() <= 1e-9,
        (get("log_marcus_lo") - 4f64.ln()).abs() <= 1e-9,
        (get("log_marcus_hi") - 8f64.ln()).abs() <= 1e-9,
        v["orderings"]["all_hold"] == serde_json::Value::Bool(true),
    ];
    outcome(
        identical && checks.iter().all(|&c| c),
        format!(
            "byte-identical {identical}; log_rel {:.9}, log_per {:.9}, marcus ({:.9}, {:.9}), orderings {}",
            get("log_rel"),
            get("log_per_exact"),
            get("log_marcus_lo"),
            get("log_marcus_hi"),
            v["orderings"]["all_hold"]
        ),
    )
}

fn main() {
    let single: Vec<Criterion> = vec![
        ("1", c1_sandwich, 120),
        ("2", c2_oracles, 60),
        ("3", c3_closed_forms, 30),
        ("4", c4_solver, 120),
        ("5", c5_estimator, 180),
        ("6", c6_certificates, 180),
        ("7", c7_f_functional, 60),
    ];
    let mut failed = Vec::new();
    let mut report = |name: &str, o: &Outcome, elapsed: Duration, budget: u64| {
        let status = if o.pass { "PASS" } else { "FAIL" };
        let over = if elapsed.as_secs() > budget { " [over time budget]" } else { "" };
        println!("criterion {name:>3}: {status} ({:.1}s / {budget}s){over} — {}", elapsed.as_secs_f64(), o.detail);
        if !o.pass {
            failed.push(name.to_string());
        }
    };
    for (name, f, budget) in single {
        let t = Instant::now();
        let o = f();
        report(name, &o, t.elapsed(), budget);
    }
    let t = Instant::now();
    let parts = c8_tightness();
    let elapsed = t.elapsed();
    for (name, o) in &parts {
        report(name, o, elapsed, 300);
    }
    for (name, f, budget) in [("9", c9_monotonicity as fn() -> Outcome, 60), ("10", c10_cli, 10)] {
        let t = Instant::now();
        let o = f();
        report(name, &o, t.elapsed(), budget);
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: FAILED criteria {}", failed.join(", "));
        std::process::exit(1);
    }
}
