use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::chain::ChainState;
use crate::continuum::{
    cfl_limit, continuum_energy, evolve as evolve_curve, green_column, green_identity_check, green_table, grid,
    sigma_solve,
};
use crate::convergence::{default_dt, refinement_study, tension_comparison, truncation_study, RefinementReport};
use crate::curvature::{CurvatureContext, TangentVector};
use crate::dynamics::{simulate as simulate_chain, suggested_dt};
use crate::error::{Result, WhipError};
use crate::kink::{discrete_green_limit, gravity_negative_tension_probe, kink_green_from, pivot_comparison, riccati_solve};
use crate::profile::Analytic;
use crate::svg::{ChartOptions, Series};
use crate::tension::{tension as chain_tension, tension_sign_probe};

use super::config::{self, Study};
use super::output::{row, Format, Output};
use super::{Common, Outcome};

/// Errors at or below this level make a study count as exact.
const EXACT_LEVEL: f64 = 1e-12;

struct Run {
    seed: u64,
    out: Output,
}

impl Run {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| WhipError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| WhipError::Invalid(format!("{}: {e}", path.display())))
}

fn config_doc(c: &Common) -> Result<Value> {
    match &c.config {
        Some(p) => read_json(p),
        None => Ok(json!({})),
    }
}

fn invalid(e: serde_json::Error) -> WhipError {
    WhipError::Invalid(format!("config: {e}"))
}

fn load<T: DeserializeOwned>(c: &Common) -> Result<(config::Common, T)> {
    config::parse(config_doc(c)?).map_err(|e| match e {
        WhipError::Json(j) => invalid(j),
        other => other,
    })
}

fn start(c: &Common, file: &config::Common) -> Result<Run> {
    let dir = c
        .out
        .clone()
        .or_else(|| file.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("whipchain-out"));
    let format = c.format.or(file.format).unwrap_or(Format::Csv);
    Ok(Run { seed: c.seed.or(file.seed).unwrap_or(0), out: Output::create(&dir, format)? })
}

fn state_flag(c: &Common) -> Result<Option<ChainState>> {
    match &c.state {
        Some(p) => Ok(Some(serde_json::from_value(read_json(p)?).map_err(invalid)?)),
        None => Ok(None),
    }
}

fn echo<T: Serialize>(cfg: &T) -> Result<Value> {
    Ok(serde_json::to_value(cfg)?)
}

fn max_abs_change(values: impl Iterator<Item = f64>) -> f64 {
    let mut first = None;
    let mut worst: f64 = 0.0;
    for v in values {
        let v0 = *first.get_or_insert(v);
        worst = worst.max((v - v0).abs());
    }
    worst
}

pub(crate) fn simulate(c: &Common) -> Result<Outcome> {
    let (file, mut cfg): (_, config::SimulateConfig) = load(c)?;
    let state = cfg.chain(state_flag(c)?)?;
    let dt = cfg.dt.unwrap_or_else(|| suggested_dt(state.n()));
    let traj = simulate_chain(&state, dt, cfg.t_end, cfg.sample_every)?;
    let mut run = start(c, &file)?;
    run.out.write_with("trajectory.csv", |w| traj.write_csv(w))?;
    let series = |label: &str, f: &dyn Fn(&crate::dynamics::Diagnostics) -> f64| {
        Series::new(label, traj.times.iter().zip(&traj.diagnostics).map(|(t, d)| (*t, f(d))).collect())
    };
    run.out.chart(
        "energy.svg",
        &[series("K + U", &|d| d.total_energy()), series("K", &|d| d.kinetic), series("U", &|d| d.potential)],
        &ChartOptions {
            title: format!("energy, n = {}", state.n()),
            x_label: "t".into(),
            y_label: "energy".into(),
            ..Default::default()
        },
    )?;
    let summary = json!({
        "samples": traj.times.len(),
        "energy_change": max_abs_change(traj.diagnostics.iter().map(|d| d.total_energy())),
        "angular_momentum_change": max_abs_change(traj.diagnostics.iter().map(|d| d.angular_momentum)),
        "min_tension": traj.diagnostics.iter().map(|d| d.min_tension).fold(f64::INFINITY, f64::min),
    });
    cfg.state = Some(state);
    cfg.initial = None;
    cfg.n = None;
    cfg.dt = Some(dt);
    run.out.finish("simulate", run.seed, echo(&cfg)?, summary)?;
    Ok(Outcome::Ok)
}

pub(crate) fn tension(c: &Common) -> Result<Outcome> {
    let (file, mut cfg): (_, config::TensionConfig) = load(c)?;
    let state = cfg.chain(state_flag(c)?)?;
    let t = chain_tension(&state)?;
    let mut run = start(c, &file)?;
    run.out.write_with("tension.csv", |w| {
        writeln!(w, "k,lambda,pivot")?;
        for (k, (l, b)) in t.lambda.iter().zip(&t.pivots).enumerate() {
            writeln!(w, "{},{}", k + 1, row(&[*l, *b]))?;
        }
        Ok(())
    })?;
    let pts = t.lambda.iter().enumerate().map(|(k, l)| ((k + 1) as f64, *l)).collect();
    run.out.chart(
        "tension.svg",
        &[Series::new("lambda", pts)],
        &ChartOptions { title: "tension".into(), x_label: "k".into(), y_label: "lambda".into(), ..Default::default() },
    )?;
    let summary = json!({
        "n": state.n(),
        "min": t.min(),
        "max": t.lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    });
    cfg.state = Some(state);
    cfg.initial = None;
    cfg.n = None;
    run.out.finish("tension", run.seed, echo(&cfg)?, summary)?;
    Ok(Outcome::Ok)
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> TangentVector {
    TangentVector::new((0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
}

pub(crate) fn curvature(c: &Common, random: Option<usize>) -> Result<Outcome> {
    let (file, mut cfg): (_, config::CurvatureConfig) = load(c)?;
    let state = cfg.chain(state_flag(c)?)?;
    let mut run = start(c, &file)?;
    let n = state.n();
    let ctx = CurvatureContext::new(&state)?;
    let mut rng = run.rng();
    let mut sections = cfg.sections.clone();
    cfg.random = random.unwrap_or(cfg.random);
    for _ in 0..cfg.random {
        let u = random_vector(&mut rng, n);
        let v = random_vector(&mut rng, n);
        sections.push((u, v));
    }
    if sections.is_empty() {
        return Err(WhipError::Invalid("no sections: give `sections` or --random K".into()));
    }
    let mut rows = Vec::with_capacity(sections.len());
    for (u, v) in &sections {
        let numerator = ctx.curvature_numerator(u, v)?;
        let gc = ctx.gauss_codazzi(u, v)?;
        let (den, k) = match ctx.sectional_curvature(u, v) {
            Ok(s) => (s.denominator, s.curvature),
            Err(WhipError::DegeneratePlane { denominator }) => (denominator, f64::NAN),
            Err(e) => return Err(e),
        };
        rows.push([numerator, gc, den, k]);
    }
    run.out.write_with("curvature.csv", |w| {
        writeln!(w, "index,numerator,gauss_codazzi,denominator,curvature")?;
        for (i, r) in rows.iter().enumerate() {
            writeln!(w, "{i},{}", row(r))?;
        }
        Ok(())
    })?;
    let ks: Vec<f64> = rows.iter().map(|r| r[3]).filter(|k| k.is_finite()).collect();
    if !ks.is_empty() {
        run.out.chart(
            "curvature.svg",
            &[Series::new("K", ks.iter().enumerate().map(|(i, k)| (i as f64, *k)).collect())],
            &ChartOptions {
                title: format!("sectional curvature, n = {n}"),
                x_label: "section".into(),
                y_label: "K".into(),
                ..Default::default()
            },
        )?;
    }
    let summary = json!({
        "sections": rows.len(),
        "degenerate": rows.len() - ks.len(),
        "min_curvature": ks.iter().copied().fold(f64::INFINITY, f64::min),
        "max_curvature": ks.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "negative_section": ctx.find_negative_section(),
    });
    cfg.state = Some(state);
    cfg.initial = None;
    cfg.n = None;
    run.out.finish("curvature", run.seed, echo(&cfg)?, summary)?;
    Ok(Outcome::Ok)
}

pub(crate) fn green(c: &Common) -> Result<Outcome> {
    let (file, mut cfg): (_, config::GreenConfig) = load(c)?;
    let kappa = match (&cfg.curve, &cfg.kappa) {
        (Some(curve), _) => {
            cfg.m = curve.m();
            curve.kappa()
        }
        (None, k) => {
            if cfg.m < 3 {
                return Err(WhipError::Invalid("green needs m >= 3".into()));
            }
            let k = k.clone().unwrap_or(Analytic::Constant { value: 0.0 });
            cfg.kappa = Some(k.clone());
            grid(cfg.m).iter().map(|&s| k.value(s)).collect()
        }
    };
    let table = green_table(&kappa)?;
    let mut run = start(c, &file)?;
    run.out.write_with("green.csv", |w| table.write_csv(w))?;
    let m = cfg.m;
    let s = grid(m);
    let columns: Vec<Series> = [m / 4, m / 2, 3 * m / 4]
        .iter()
        .map(|&k| Series::new(format!("q = {:.3}", s[k]), (0..=m).map(|j| (s[j], table.get(j, k))).collect()))
        .collect();
    run.out.chart(
        "green.svg",
        &columns,
        &ChartOptions { title: "Green function".into(), x_label: "s".into(), y_label: "G(s, q)".into(), ..Default::default() },
    )?;
    let summary = json!({
        "m": m,
        "symmetry_defect": table.symmetry_defect(),
        "min_entry": table.min_entry(),
        "identity_residual": green_identity_check(&kappa)?,
    });
    run.out.finish("green", run.seed, echo(&cfg)?, summary)?;
    Ok(Outcome::Ok)
}

pub(crate) fn evolve(c: &Common) -> Result<Outcome> {
    let (file, mut cfg): (_, config::EvolveConfig) = load(c)?;
    let curve = cfg.resolve()?;
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => f64::min(1e-3, 0.5 * cfl_limit(&curve, &sigma_solve(&curve)?)),
    };
    let traj = evolve_curve(&curve, dt, cfg.t_end, cfg.sample_every)?;
    let mut run = start(c, &file)?;
    run.out.write_with("evolve.csv", |w| traj.write_csv(w))?;
    let energies: Vec<f64> = traj.curves.iter().map(|cv| continuum_energy(cv).total()).collect();
    run.out.chart(
        "energy.svg",
        &[Series::new("K + U", traj.times.iter().copied().zip(energies.iter().copied()).collect())],
        &ChartOptions {
            title: format!("continuum energy, m = {}", curve.m()),
            x_label: "t".into(),
            y_label: "energy".into(),
            ..Default::default()
        },
    )?;
    let summary = json!({
        "samples": traj.times.len(),
        "energy_change": max_abs_change(energies.iter().copied()),
    });
    cfg.curve = Some(curve);
    cfg.initial = None;
    cfg.m = None;
    cfg.dt = Some(dt);
    run.out.finish("evolve", run.seed, echo(&cfg)?, summary)?;
    Ok(Outcome::Ok)
}

pub(crate) fn riccati(c: &Common) -> Result<Outcome> {
    let (file, cfg): (_, config::RiccatiConfig) = load(c)?;
    cfg.profile.validate()?;
    let sol = riccati_solve(&cfg.profile.kappa_grid(cfg.m), &cfg.profile.kinks)?;
    let comparison = match cfg.n {
        Some(n) => Some(pivot_comparison(&cfg.profile.chain(n, 0.0)?, &cfg.profile.kinks, 2)?),
        None => None,
    };
    let mut run = start(c, &file)?;
    run.out.write_with("riccati.csv", |w| {
        writeln!(w, "s,f,F")?;
        for j in 0..=sol.m {
            writeln!(w, "{}", row(&[sol.s(j), sol.f[j], sol.integral[j]]))?;
        }
        Ok(())
    })?;
    if let Some(pc) = &comparison {
        run.out.write_with("pivots.csv", |w| {
            writeln!(w, "i,b,predicted,excluded")?;
            for (i, ((b, p), ex)) in pc.pivots.iter().zip(&pc.predicted).zip(&pc.excluded).enumerate() {
                writeln!(w, "{},{},{}", i + 1, row(&[*b, *p]), u8::from(*ex))?;
            }
            Ok(())
        })?;
    }
    run.out.chart(
        "riccati.svg",
        &[Series::new("f", (0..=sol.m).map(|j| (sol.s(j), sol.f[j])).collect())],
        &ChartOptions { title: "Riccati solution".into(), x_label: "s".into(), y_label: "f".into(), ..Default::default() },
    )?;
    let summary = json!({
        "m": sol.m,
        "kink_nodes": sol.kink_nodes,
        "epsilon": sol.epsilon(),
        "pivot_residual": comparison.as_ref().map(|pc| pc.residual()),
    });
    run.out.finish("riccati", run.seed, echo(&cfg)?, summary)?;
    Ok(Outcome::Ok)
}

pub(crate) fn kink_green(c: &Common) -> Result<Outcome> {
    let (file, cfg): (_, config::KinkGreenConfig) = load(c)?;
    cfg.profile.validate()?;
    if cfg.points.is_empty() {
        return Err(WhipError::Invalid("kink-green needs at least one point".into()));
    }
    let sol = riccati_solve(&cfg.profile.kappa_grid(cfg.m), &cfg.profile.kinks)?;
    let values = cfg
        .points
        .iter()
        .map(|&(x, y)| kink_green_from(&sol, x, y, &cfg.profile.kinks))
        .collect::<Result<Vec<_>>>()?;
    let limits = if cfg.n_list.is_empty() {
        Vec::new()
    } else {
        cfg.points
            .iter()
            .map(|&(x, y)| discrete_green_limit(&cfg.profile, x, y, &cfg.n_list))
            .collect::<Result<Vec<_>>>()?
    };
    let mut run = start(c, &file)?;
    run.out.write_with("kink_green.csv", |w| {
        writeln!(w, "x,y,value,epsilon,truncated")?;
        for (&(x, y), v) in cfg.points.iter().zip(&values) {
            writeln!(w, "{},{}", row(&[x, y, v.value, v.epsilon]), u8::from(v.truncated))?;
        }
        Ok(())
    })?;
    if !limits.is_empty() {
        run.out.write_with("limit.csv", |w| {
            writeln!(w, "x,y,n,i,j,value")?;
            for (&(x, y), seq) in cfg.points.iter().zip(&limits) {
                for s in seq {
                    writeln!(w, "{},{},{},{},{}", row(&[x, y]), s.n, s.i, s.j, row(&[s.value]))?;
                }
            }
            Ok(())
        })?;
        let series: Vec<Series> = cfg
            .points
            .iter()
            .zip(&limits)
            .map(|(&(x, y), seq)| {
                Series::new(format!("({x}, {y})"), seq.iter().map(|s| (s.n as f64, s.value)).collect())
            })
            .collect();
        run.out.chart(
            "limit.svg",
            &series,
            &ChartOptions {
                title: "(1/n) M^ij".into(),
                x_label: "n".into(),
                y_label: "value".into(),
                ..Default::default()
            },
        )?;
    }
    let summary = json!({ "values": values, "limits": limits });
    run.out.finish("kink-green", run.seed, echo(&cfg)?, summary)?;
    Ok(Outcome::Ok)
}

fn order_chart(run: &mut Run, reports: &[(&str, &RefinementReport)], y_label: &str) -> Result<()> {
    let series: Vec<Series> = reports
        .iter()
        .map(|(label, r)| Series::new(*label, r.levels.iter().map(|(n, e)| (*n as f64, *e)).collect()))
        .collect();
    let note = reports
        .iter()
        .map(|(label, r)| format!("{label}: slope {:.3}", -r.observed_order))
        .collect::<Vec<_>>()
        .join(", ");
    run.out.chart(
        "converge.svg",
        &series,
        &ChartOptions {
            title: "refinement".into(),
            x_label: "n".into(),
            y_label: y_label.into(),
            log_log: true,
            annotation: Some(note),
            ..Default::default()
        },
    )
}

fn write_levels(run: &mut Run, header: &str, rows: Vec<(usize, Vec<f64>)>) -> Result<()> {
    run.out.write_with("converge.csv", |w| {
        writeln!(w, "{header}")?;
        for (n, vals) in &rows {
            writeln!(w, "{n},{}", row(vals))?;
        }
        Ok(())
    })
}

pub(crate) fn converge(c: &Common, threshold_flag: Option<f64>) -> Result<Outcome> {
    let (file, file_threshold, study) = config::parse_study(config_doc(c)?).map_err(|e| match e {
        WhipError::Json(j) => invalid(j),
        other => other,
    })?;
    let threshold = threshold_flag.or(file_threshold).unwrap_or_else(|| study.default_threshold());
    let mut run = start(c, &file)?;
    let (observed, summary) = match &study {
        Study::Truncation { theta, sigma, n_list } => {
            let (evol, tens) = truncation_study(theta, sigma, n_list)?;
            let rows = evol
                .levels
                .iter()
                .zip(&tens.levels)
                .map(|(a, b)| (a.0, vec![a.1, b.1]))
                .collect();
            write_levels(&mut run, "n,evolution,tension", rows)?;
            order_chart(&mut run, &[("evolution", &evol), ("tension", &tens)], "residual")?;
            let observed = evol.observed_order.min(tens.observed_order);
            (observed, json!({ "evolution": evol, "tension": tens }))
        }
        Study::Refinement { initial, n_list, t_end, dt } => {
            let st = match dt {
                Some(dt) => refinement_study(initial, n_list, *t_end, |_| *dt)?,
                None => refinement_study(initial, n_list, *t_end, default_dt)?,
            };
            let rows = st
                .angle_errors
                .iter()
                .zip(&st.rate_errors)
                .map(|(a, r)| (a.0, vec![a.1, r.1]))
                .collect();
            write_levels(&mut run, "n,angle_error,rate_error", rows)?;
            if st.max_angle_error() <= EXACT_LEVEL {
                (f64::INFINITY, json!({ "study": st, "exact": true }))
            } else {
                let report = st.report()?;
                order_chart(&mut run, &[("angle", &report)], "max angle error")?;
                (report.observed_order, json!({ "study": st, "report": report }))
            }
        }
        Study::Tension { initial, sigma, n_list } => {
            let levels = n_list
                .iter()
                .map(|&n| Ok((n, tension_comparison(&initial.chain(n)?, |s| sigma.value(s))?)))
                .collect::<Result<Vec<_>>>()?;
            write_levels(&mut run, "n,tension_error", levels.iter().map(|(n, e)| (*n, vec![*e])).collect())?;
            if levels.iter().all(|l| l.1 <= EXACT_LEVEL) {
                (f64::INFINITY, json!({ "levels": levels, "exact": true }))
            } else {
                let report = RefinementReport::from_levels(levels)?;
                order_chart(&mut run, &[("tension", &report)], "max tension error")?;
                (report.observed_order, json!({ "report": report }))
            }
        }
        Study::GreenLimit { profile, x, y, n_list, m_ref } => {
            let m = *m_ref;
            let col = green_column(&profile.kappa_grid(m), (y * m as f64).round() as usize)?;
            let reference = col[(x * m as f64).round() as usize];
            let seq = discrete_green_limit(profile, *x, *y, n_list)?;
            let levels: Vec<(usize, f64)> = seq.iter().map(|s| (s.n, (s.value - reference).abs())).collect();
            write_levels(&mut run, "n,error", levels.iter().map(|(n, e)| (*n, vec![*e])).collect())?;
            let report = RefinementReport::from_levels(levels)?;
            order_chart(&mut run, &[("green", &report)], "|(1/n) M - G|")?;
            (report.observed_order, json!({ "reference": reference, "report": report }))
        }
    };
    let passed = observed >= threshold;
    let summary = json!({
        "observed_order": if observed.is_finite() { json!(observed) } else { json!("exact") },
        "threshold": threshold,
        "passed": passed,
        "details": summary,
    });
    let mut cfg = echo(&study)?;
    cfg["threshold"] = json!(threshold);
    run.out.finish("converge", run.seed, cfg, summary)?;
    Ok(if passed { Outcome::Ok } else { Outcome::BelowThreshold { observed, threshold } })
}

pub(crate) fn probe(c: &Common, random: Option<usize>) -> Result<Outcome> {
    let (file, mut cfg): (_, config::ProbeConfig) = load(c)?;
    if cfg.n == 0 {
        return Err(WhipError::Invalid("probe needs n >= 1".into()));
    }
    cfg.random = random.unwrap_or(cfg.random);
    if let Some(s) = state_flag(c)? {
        cfg.state = Some(s);
    }
    let gravity = cfg
        .theta1
        .iter()
        .map(|&t| gravity_negative_tension_probe(t, cfg.n))
        .collect::<Result<Vec<_>>>()?;
    let mut run = start(c, &file)?;
    let mut rng = run.rng();
    let mut sign_rows: Vec<(String, usize, usize, f64)> = Vec::new();
    let mut state_summary = Value::Null;
    if let Some(state) = &cfg.state {
        let report = tension_sign_probe(state)?;
        for neg in &report.negatives {
            sign_rows.push(("state".into(), neg.i, neg.j, neg.lambda));
        }
        for &i in &report.rest_negative {
            let l = report.rest_tension.as_ref().map_or(f64::NAN, |t| t[i - 1]);
            sign_rows.push(("state_rest".into(), i, 0, l));
        }
        state_summary = json!({
            "negatives": report.negatives.len(),
            "rest_negative": report.rest_negative,
            "min_probe_tension": report.min_probe_tension,
        });
    }
    let mut with_negative = 0;
    let mut min_random = f64::INFINITY;
    for r in 0..cfg.random {
        let theta = (0..cfg.n).map(|_| rng.gen_range(-PI..PI)).collect();
        let state = ChainState::new(theta, vec![0.0; cfg.n], 0.0)?;
        let report = tension_sign_probe(&state)?;
        min_random = min_random.min(report.min_probe_tension);
        if !report.negatives.is_empty() {
            with_negative += 1;
        }
        for neg in &report.negatives {
            sign_rows.push((format!("random_{r}"), neg.i, neg.j, neg.lambda));
        }
    }
    run.out.write_with("gravity_probe.csv", |w| {
        writeln!(w, "theta1,n,lambda1,m11,predicted")?;
        for (t, p) in cfg.theta1.iter().zip(&gravity) {
            writeln!(w, "{},{},{}", row(&[*t]), cfg.n, row(&[p.lambda1, p.m11, p.predicted]))?;
        }
        Ok(())
    })?;
    if cfg.state.is_some() || cfg.random > 0 {
        run.out.write_with("sign_probe.csv", |w| {
            writeln!(w, "source,i,j,lambda")?;
            for (src, i, j, l) in &sign_rows {
                writeln!(w, "{src},{i},{j},{}", row(&[*l]))?;
            }
            Ok(())
        })?;
    }
    let summary = json!({
        "gravity": gravity,
        "state": state_summary,
        "random": { "configurations": cfg.random, "with_negative": with_negative, "min_probe_tension": min_random },
    });
    run.out.finish("probe", run.seed, echo(&cfg)?, summary)?;
    Ok(Outcome::Ok)
}
