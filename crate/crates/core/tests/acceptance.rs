//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Each criterion also has a wall-clock budget.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use whipchain::continuum::{green_column, green_table, grid};
use whipchain::convergence::{tension_comparison, truncation_study, RefinementReport};
use whipchain::curvature::{CurvatureContext, TangentVector};
use whipchain::dynamics::{acceleration, simulate, step_rk4};
use whipchain::kink::{discrete_green_limit, gravity_negative_tension_probe, pivot_approximation_residual, riccati_solve, KinkSpec};
use whipchain::profile::{Analytic, ProfileSpec};
use whipchain::tension::{closed_form_inverse, tension, tension_sign_probe, TridiagonalOperator};
use whipchain::ChainState;

type Check = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn hanging_chain_equilibrium() -> Check {
    let (n, g) = (100, 9.8);
    let st = ChainState::hanging(n, g).map_err(|e| e.to_string())?;
    let acc = acceleration(&st).map_err(|e| e.to_string())?;
    let max_acc = acc.iter().map(|a| a.abs()).fold(0.0, f64::max);
    ensure(max_acc <= 1e-10, || format!("max |theta''| = {max_acc:e}"))?;
    let lam = tension(&st).map_err(|e| e.to_string())?.lambda;
    let mut worst: f64 = 0.0;
    for (k, l) in lam.iter().enumerate() {
        let exact = n as f64 * g * (n - k) as f64;
        worst = worst.max((l - exact).abs() / exact);
    }
    ensure(worst <= 1e-9, || format!("tension relative error {worst:e}"))?;
    Ok(format!("max |theta''| = {max_acc:.1e}, tension rel err = {worst:.1e}"))
}

fn rigid_rotation() -> Check {
    let w = 2.0;
    let mut levels = Vec::new();
    let mut max_acc: f64 = 0.0;
    for n in [25, 50, 100, 200] {
        let st = ChainState::straight(n, 0.3, w, 0.0).map_err(|e| e.to_string())?;
        let acc = acceleration(&st).map_err(|e| e.to_string())?;
        max_acc = acc.iter().map(|a| a.abs()).fold(max_acc, f64::max);
        let err = tension_comparison(&st, |s| w * w * (1.0 - s * s) / 2.0).map_err(|e| e.to_string())?;
        levels.push((n, err));
    }
    ensure(max_acc <= 1e-12, || format!("max |theta''| = {max_acc:e}"))?;
    let report = RefinementReport::from_levels(levels).map_err(|e| e.to_string())?;
    ensure(report.is_monotone(), || format!("tension errors not decreasing: {:?}", report.levels))?;
    ensure(report.observed_order >= 0.9, || format!("observed order {:.3}", report.observed_order))?;
    Ok(format!("max |theta''| = {max_acc:.1e}, tension order = {:.3}", report.observed_order))
}

fn conservation() -> Check {
    let n = 50;
    let free = ChainState::from_profile(n, |s| 0.3 * (PI * s).sin(), |s| 0.5 + 0.3 * (PI * s).cos(), 0.0)
        .map_err(|e| e.to_string())?;
    let traj = simulate(&free, 1e-3, 10.0, 10).map_err(|e| e.to_string())?;
    let dk = traj.relative_drift(|d| d.kinetic);
    let dl = traj.relative_drift(|d| d.angular_momentum);
    ensure(dk <= 1e-8 && dl <= 1e-8, || format!("g=0 drift: K {dk:e}, L {dl:e}"))?;
    let swing = ChainState::from_profile(n, |s| -FRAC_PI_2 + 0.1 * (1.0 - (1.0 - s).powi(2)), |_| 0.0, 9.8)
        .map_err(|e| e.to_string())?;
    let traj = simulate(&swing, 1e-3, 10.0, 10).map_err(|e| e.to_string())?;
    let de = traj.relative_drift(|d| d.total_energy());
    ensure(de <= 1e-8, || format!("g=9.8 energy drift {de:e}"))?;
    Ok(format!("K drift {dk:.1e}, L drift {dl:.1e}, E drift (g=9.8) {de:.1e}"))
}

fn closed_form_inverse_vs_elimination() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=200);
        let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();
        let inv = closed_form_inverse(&TridiagonalOperator::from_angles(&theta)).map_err(|e| e.to_string())?;
        let reference = common::dense_inverse(&common::tension_matrix(&theta));
        for (i, row) in reference.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                worst = worst.max((inv.get(i, j) - v).abs());
            }
        }
    }
    ensure(worst <= 1e-10, || format!("max abs difference {worst:e}"))?;
    Ok(format!("max abs difference {worst:.1e} over 100 configurations"))
}

fn curvature_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut min_nonneg = f64::INFINITY;
    let (mut acute_configs, mut sections) = (0, 0);
    for c in 0..100 {
        let n = rng.gen_range(2..=60);
        // even configurations keep every joint angle below π/2
        let spread = if c % 2 == 0 { 0.45 * PI } else { PI };
        let mut theta = vec![rng.gen_range(-PI..PI)];
        for _ in 1..n {
            let last = *theta.last().unwrap();
            theta.push(last + rng.gen_range(-spread..spread));
        }
        let st = ChainState::new(theta.clone(), vec![0.0; n], 0.0).map_err(|e| e.to_string())?;
        let ctx = CurvatureContext::new(&st).map_err(|e| e.to_string())?;
        let all_nonneg = theta.windows(2).all(|w| (w[1] - w[0]).cos() >= 0.0);
        for _ in 0..10 {
            let u = TangentVector::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let v = TangentVector::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let a = ctx.curvature_numerator(&u, &v).map_err(|e| e.to_string())?;
            let b = ctx.gauss_codazzi(&u, &v).map_err(|e| e.to_string())?;
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
            if all_nonneg {
                min_nonneg = min_nonneg.min(a);
            }
            sections += 1;
        }
        if !all_nonneg {
            acute_configs += 1;
            let (p, q) = ctx.find_negative_section().ok_or("no negative section found")?;
            let (u, v) = (TangentVector::basis(n, p - 1), TangentVector::basis(n, q - 1));
            let num = ctx.curvature_numerator(&u, &v).map_err(|e| e.to_string())?;
            let gc = ctx.gauss_codazzi(&u, &v).map_err(|e| e.to_string())?;
            ensure(num < 0.0 && gc < 0.0, || format!("section ({p},{q}) has numerator {num:e}"))?;
        }
    }
    ensure(worst <= 1e-10, || format!("relative difference {worst:e}"))?;
    ensure(min_nonneg >= -1e-12, || format!("negative curvature {min_nonneg:e} with all couplings >= 0"))?;
    ensure(acute_configs > 0, || "no configuration with a negative coupling was drawn".into())?;
    Ok(format!(
        "{sections} sections, rel diff {worst:.1e}, min numerator (a >= 0) {min_nonneg:.1e}, negative section in {acute_configs}/{acute_configs} acute configs"
    ))
}

fn green_function() -> Check {
    let mut flat = Vec::new();
    for m in [50, 100, 200, 400] {
        let t = green_table(&vec![0.0; m + 1]).map_err(|e| e.to_string())?;
        let err = t.max_error(|s, q| 1.0 - s.max(q));
        ensure(err <= 4.0 / (m * m) as f64 && err < 1e-12, || format!("kappa=0, m={m}: error {err:e}"))?;
        flat.push(err);
    }
    // With κ ≡ 0 the table is exact, so the order is measured on κ ≡ c.
    let c: f64 = 2.0;
    let exact = |s: f64, q: f64| (c * s.min(q)).cosh() * (c * (1.0 - s.max(q))).sinh() / (c * c.cosh());
    let mut levels = Vec::new();
    for m in [50, 100, 200, 400] {
        let t = green_table(&vec![c; m + 1]).map_err(|e| e.to_string())?;
        levels.push((m, t.max_error(exact)));
    }
    let report = RefinementReport::from_levels(levels).map_err(|e| e.to_string())?;
    ensure(report.observed_order >= 1.9, || format!("kappa=c order {:.3}", report.observed_order))?;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let m = 200;
    let mut worst_sym: f64 = 0.0;
    let mut min_entry = f64::INFINITY;
    for _ in 0..10 {
        let coeffs: Vec<(f64, f64, f64)> =
            (0..4).map(|_| (rng.gen_range(-4.0..4.0), rng.gen_range(0.0..6.0), rng.gen_range(0.0..PI))).collect();
        let kappa: Vec<f64> = grid(m)
            .iter()
            .map(|s| coeffs.iter().map(|(a, f, p)| a * (f * PI * s + p).sin()).sum())
            .collect();
        let t = green_table(&kappa).map_err(|e| e.to_string())?;
        worst_sym = worst_sym.max(t.symmetry_defect());
        min_entry = min_entry.min(t.min_entry());
        ensure((0..m).all(|k| t.get(k, k) > 0.0), || "nonpositive diagonal entry".into())?;
    }
    ensure(worst_sym <= 1e-8, || format!("symmetry defect {worst_sym:e}"))?;
    ensure(min_entry >= -1e-12, || format!("negative entry {min_entry:e}"))?;
    Ok(format!(
        "kappa=0 max err {:.1e} (exact), kappa=2 order {:.3}, symmetry {worst_sym:.1e}, min entry {min_entry:.1e}",
        flat.iter().copied().fold(0.0, f64::max),
        report.observed_order
    ))
}

fn discrete_green_limit_criterion() -> Check {
    let profile = ProfileSpec::sine(1.0, 1.0);
    let m = 4000;
    let column = green_column(&profile.kappa_grid(m), 2400).map_err(|e| e.to_string())?;
    let reference = column[1200];
    let seq = discrete_green_limit(&profile, 0.3, 0.6, &[50, 100, 200, 400, 800]).map_err(|e| e.to_string())?;
    let errors: Vec<f64> = seq.iter().map(|s| (s.value - reference).abs()).collect();
    ensure(errors.windows(2).all(|w| w[1] < w[0]), || format!("errors not decreasing: {errors:?}"))?;
    Ok(format!("errors {:.2e} -> {:.2e}", errors[0], errors[errors.len() - 1]))
}

fn riccati() -> Check {
    let m = 1000;
    let mut worst: f64 = 0.0;
    for c in [0.5, 2.0] {
        let sol = riccati_solve(&vec![c; m + 1], &[]).map_err(|e| e.to_string())?;
        for j in 0..=m {
            worst = worst.max((sol.f[j] - c * (c * sol.s(j)).tanh()).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("tanh error {worst:e}"))?;

    let so = 0.4;
    let kink = KinkSpec::new(so, 1.0).map_err(|e| e.to_string())?;
    let sol = riccati_solve(&vec![0.0; m + 1], &[kink]).map_err(|e| e.to_string())?;
    let mut kink_rel: f64 = 0.0;
    for j in 0..=m {
        let s = sol.s(j);
        if s >= so + 0.05 - 1e-12 {
            let exact = 1.0 / (s - so);
            kink_rel = kink_rel.max((sol.f[j] - exact).abs() / exact);
        }
    }
    ensure(kink_rel <= 0.05, || format!("kink blow-up relative error {kink_rel:e}"))?;

    let mut min_ratio = f64::INFINITY;
    for profile in [ProfileSpec::sine(1.0, 1.0), ProfileSpec::sine(0.5, 2.0)] {
        let mut prev = None;
        for n in [100, 200, 400, 800] {
            let chain = profile.chain(n, 0.0).map_err(|e| e.to_string())?;
            let r = pivot_approximation_residual(&chain, &[]).map_err(|e| e.to_string())?;
            if let Some(p) = prev {
                min_ratio = min_ratio.min(p / r);
            }
            prev = Some(r);
        }
    }
    ensure(min_ratio >= 1.5, || format!("pivot residual ratio {min_ratio:.3}"))?;
    Ok(format!("tanh err {worst:.1e}, kink rel err {kink_rel:.2e}, min pivot ratio {min_ratio:.2}"))
}

fn truncation_order() -> Check {
    let n_list = [100, 200, 400, 800];
    let cases = [
        (Analytic::sine(1.0, 1.0), Analytic::poly(&[1.0, -2.0, 1.0])),
        (Analytic::poly(&[0.2, -1.0, 0.0, 0.5]), Analytic::Sine { amplitude: 0.5, frequency: 1.5, offset: 1.0 }),
    ];
    let mut min_order = f64::INFINITY;
    for (theta, sigma) in &cases {
        let (evol, tens) = truncation_study(theta, sigma, &n_list).map_err(|e| e.to_string())?;
        min_order = min_order.min(evol.observed_order).min(tens.observed_order);
    }
    ensure(min_order >= 1.9, || format!("observed order {min_order:.3}"))?;
    Ok(format!("min observed order {min_order:.3}"))
}

fn pendulum_period() -> Check {
    let mut worst: f64 = 0.0;
    let dt = 1e-5;
    for phi0 in [0.5_f64, 2.0] {
        let k = (phi0 / 2.0).sin();
        let exact = 4.0 * common::elliptic_k(k);
        let agm = 4.0 * common::elliptic_k_agm(k);
        ensure((exact - agm).abs() <= 1e-12 * exact, || format!("quadrature and AGM disagree: {exact} vs {agm}"))?;
        let mut st = ChainState::new(vec![phi0 - FRAC_PI_2], vec![0.0], 1.0).map_err(|e| e.to_string())?;
        // ω goes negative, returns to zero at T/2, and crosses from + to - at T
        let (mut t, mut prev) = (0.0, 0.0);
        let mut half_seen = false;
        let period = loop {
            st = step_rk4(&st, dt).map_err(|e| e.to_string())?;
            t += dt;
            let w = st.omega()[0];
            if !half_seen && prev < 0.0 && w >= 0.0 {
                half_seen = true;
            } else if half_seen && prev > 0.0 && w <= 0.0 {
                break t - dt * w / (w - prev);
            }
            prev = w;
            if t > 2.0 * exact {
                return Err("no full period found".into());
            }
        };
        worst = worst.max((period - exact).abs() / exact);
    }
    ensure(worst <= 1e-6, || format!("relative period error {worst:e}"))?;
    Ok(format!("relative period error {worst:.1e}"))
}

fn negative_tension_probes() -> Check {
    let n = 10;
    let mut worst: f64 = 0.0;
    for theta1 in [FRAC_PI_2, 1.0, 0.3] {
        let p = gravity_negative_tension_probe(theta1, n).map_err(|e| e.to_string())?;
        let straight = vec![theta1; n];
        let m11 = common::dense_inverse(&common::tension_matrix(&straight))[0][0];
        let exact = -(n as f64) * m11 * theta1.sin();
        ensure(p.lambda1 < 0.0, || format!("lambda_1 = {:e} at theta_1 = {theta1}", p.lambda1))?;
        worst = worst.max((p.lambda1 - exact).abs());
    }
    ensure(worst <= 1e-10, || format!("lambda_1 error {worst:e}"))?;
    let kinked = ProfileSpec::straight(0.0)
        .with_kinks(vec![KinkSpec::new(0.5, 2.5).map_err(|e| e.to_string())?])
        .chain(n, 0.0)
        .map_err(|e| e.to_string())?;
    ensure(kinked.theta().windows(2).any(|w| (w[1] - w[0]).cos() < 0.0), || "kink is not acute".into())?;
    let report = tension_sign_probe(&kinked).map_err(|e| e.to_string())?;
    let first = report.negatives.first().ok_or("no negative tension under unit-velocity probes")?;
    Ok(format!(
        "inverted lambda_1 err {worst:.1e}; kink probe omega = e_{} gives lambda_{} = {:.3}",
        first.j, first.i, first.lambda
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("hanging-chain equilibrium", 1, hanging_chain_equilibrium),
        ("rigid rotation", 5, rigid_rotation),
        ("conservation", 30, conservation),
        ("closed-form inverse vs elimination", 10, closed_form_inverse_vs_elimination),
        ("curvature oracle equivalence", 30, curvature_oracle),
        ("Green function", 10, green_function),
        ("discrete to continuum Green limit", 10, discrete_green_limit_criterion),
        ("Riccati approximation", 10, riccati),
        ("truncation order", 5, truncation_order),
        ("n=1 pendulum period", 10, pendulum_period),
        ("negative-tension probes", 1, negative_tension_probes),
    ];
    let mut failed = 0;
    for (idx, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*budget);
        let (tag, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {budget} s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("{tag} {:>2} {name} [{:.2} s] {detail}", idx + 1, elapsed.as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
