use std::path::PathBuf;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use riemann_ifs::lambda_class::classify_lambda;
use riemann_ifs::rds::{finite_time_lyapunov, run_orbit, SymbolStream, TraceObserver};
use riemann_ifs::series::{koenigs_linearizer, linearization_residual, taylor_at_zero};
use riemann_ifs::stats::circle::{invariant_candidate_check, unit_circle_curve};
use riemann_ifs::stats::coverage::coverage_probe;
use riemann_ifs::stats::kac::{kac_return_times, tail_scaling};
use riemann_ifs::stats::measure::empirical_cesaro_measure;
use riemann_ifs::stats::nonnormal::non_normality_probe;
use riemann_ifs::stats::occupation::occupation_fraction;
use riemann_ifs::stats::sojourn::{laminar_durations, occupation_identity_check, sojourn_decomposition, Neighbourhood};
use riemann_ifs::stats::tail::{default_k, hill_tail_index, tail_rows};
use riemann_ifs::systems::HypothesisReport;
use riemann_ifs::{Family, IfsSystem, SpherePoint};

use crate::config::{self, RunConfig};
use crate::emit::Emitter;
use crate::{Cli, CliError, Command, MapName, OUT_DIR_ENV};

#[derive(Clone, Copy)]
enum Theorem {
    None,
    Density,
    Intermittency,
}

fn out_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.output.directory.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn c(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Opens the emitter, writes the hypothesis report and enforces the gate.
fn start(cli: &Cli, cfg: &RunConfig, name: &str, sys: &IfsSystem, gate: Theorem) -> Result<Emitter, CliError> {
    let mut em = Emitter::new(&out_dir(cli, cfg), name, cfg)?;
    let hyp = sys.check_hypotheses();
    em.always_json(
        "hypotheses.json",
        &json!({"regime": hyp.regime(), "report": &hyp}),
    )?;
    if let Some(msg) = violation(&hyp, gate) {
        if !cli.force {
            em.finish()?;
            return Err(CliError::Hypothesis(msg));
        }
        eprintln!("riemann-ifs: warning: {msg}; continuing because of --force");
    }
    Ok(em)
}

fn violation(h: &HypothesisReport, gate: Theorem) -> Option<String> {
    let verdict = match gate {
        Theorem::None => None,
        Theorem::Density => h.density_theorem,
        Theorem::Intermittency => h.intermittency_theorem,
    };
    (verdict == Some(false)).then(|| format!("{} ({})", h.regime(), flags(h)))
}

fn flags(h: &HypothesisReport) -> String {
    let mut v = Vec::new();
    if h.lambda_in_unit_disc == Some(false) {
        v.push("|lambda| >= 1");
    }
    if h.lambda_nonreal == Some(false) {
        v.push("lambda is real");
    }
    if !h.lyapunov_positive {
        v.push("exponent at 0 is not positive");
    }
    if !h.p0_above_half {
        v.push("p0 <= 1/2");
    }
    if h.mu_outside_unit_disc == Some(false) {
        v.push("|mu| <= 1");
    }
    v.join(", ")
}

fn z0(cfg: &RunConfig) -> SpherePoint {
    SpherePoint::finite(c(cfg.run.z0))
}

fn neighbourhood(cfg: &RunConfig) -> Result<Neighbourhood, CliError> {
    Ok(Neighbourhood::new(cfg.run.epsilon, cfg.run.r_far)?)
}

fn done(em: Emitter, summary: impl Serialize) -> Result<(), CliError> {
    let dir = em.finish()?;
    let line = serde_json::to_string(&summary).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("{line}");
    eprintln!("riemann-ifs: wrote {}", dir.display());
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    if let Command::Schema = cli.command {
        println!("{}", serde_json::to_string_pretty(&config::schema()).expect("schema serializes"));
        return Ok(());
    }
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    match &cli.command {
        Command::Mobius => {
            cfg.system.family = Family::Mobius;
            cfg.system.p0 = 0.5;
        }
        Command::Logistic => {
            cfg.system.family = Family::Logistic;
            cfg.run.epsilon = 0.05;
            cfg.run.r_far = 2.0;
            cfg.run.z0 = [0.3, 0.0];
        }
        Command::ClassifyLambda { re, im } => {
            if let Some(re) = re {
                cfg.system.lambda[0] = *re;
            }
            if let Some(im) = im {
                cfg.system.lambda[1] = *im;
            }
        }
        Command::Linearize { order: Some(k), .. } => cfg.probe.k_series = *k,
        _ => {}
    }
    let sys = cfg.system()?;
    let run = &cfg.run;
    let probe = &cfg.probe;
    match &cli.command {
        Command::Schema => unreachable!(),
        Command::Simulate => {
            let mut em = start(cli, &cfg, "simulate", &sys, Theorem::None)?;
            let mut trace = TraceObserver::default();
            let st = run_orbit(&sys, z0(&cfg), &mut SymbolStream::new(run.seed, 0, sys.p0()), run.n_steps, &mut [&mut trace])?;
            let end = st.sphere_point();
            let summary = json!({
                "n_steps": st.step,
                "final_point": end.to_complex().map(pair),
                "final_is_infinity": end.is_infinity(),
                "finite_time_lyapunov": finite_time_lyapunov(&st)?,
            });
            em.csv("trace.csv", &trace.rows)?;
            em.json("simulate.json", &summary)?;
            done(em, summary)
        }
        Command::Occupation => {
            let mut em = start(cli, &cfg, "occupation", &sys, Theorem::Intermittency)?;
            let r = occupation_fraction(&sys, z0(&cfg), neighbourhood(&cfg)?, run.n_steps, run.trials, run.seed)?;
            em.csv("occupation.csv", &r.rows())?;
            em.json("occupation.json", &r)?;
            done(em, json!({"median": r.summary.median, "min_bursts": r.completed_bursts.iter().min()}))
        }
        Command::Sojourn => {
            let mut em = start(cli, &cfg, "sojourn", &sys, Theorem::Intermittency)?;
            let rec = sojourn_decomposition(
                &sys,
                z0(&cfg),
                neighbourhood(&cfg)?,
                run.n_steps,
                &mut SymbolStream::new(run.seed, 0, sys.p0()),
            )?;
            let (num, den) = rec.decomposed_fraction();
            let summary = json!({
                "n_steps": rec.n_steps,
                "in_w_count": rec.in_w_count,
                "raw_fraction": rec.in_w_count as f64 / rec.n_steps as f64,
                "decomposed_fraction": [num, den],
                "identity_residual": occupation_identity_check(&rec) as f64,
                "completed_laminar": rec.eta.len(),
                "completed_bursts": rec.xi.len(),
                "mean_eta": rec.mean_eta(),
                "mean_xi": rec.mean_xi(),
                "eta_partial": rec.eta_partial,
                "xi_partial": rec.xi_partial,
                "no_alternation": rec.no_alternation,
            });
            em.csv("sojourn.csv", &rec.rows())?;
            em.json("sojourn.json", &summary)?;
            done(em, summary)
        }
        Command::Kac => {
            let mut em = start(cli, &cfg, "kac", &sys, Theorem::Intermittency)?;
            let k = kac_return_times(&sys, run.inner_radius, run.samples, run.cap, run.seed)?;
            let mut means = Vec::new();
            let mut n = (run.samples as usize / 8).max(1);
            while n <= run.samples as usize {
                means.push(json!({"n": n, "mean": k.running_mean(n)}));
                n *= 2;
            }
            let levels: Vec<u32> = (8..=16).collect();
            let tail = match tail_scaling(&k, sys.p0(), &levels) {
                Ok(t) => json!(t),
                Err(e) => json!({"error": e.to_string()}),
            };
            let summary = json!({
                "inner_radius": k.inner_radius,
                "cap": k.cap,
                "samples": k.samples.len(),
                "censored": k.censored,
                "running_means": means,
                "tail_scaling": tail,
            });
            em.csv("kac.csv", &k.rows())?;
            em.json("kac.json", &summary)?;
            done(em, json!({"censored": k.censored, "mean": k.running_mean(k.samples.len())}))
        }
        Command::Tail => {
            let mut em = start(cli, &cfg, "tail", &sys, Theorem::Intermittency)?;
            let eta = laminar_durations(
                &sys,
                z0(&cfg),
                neighbourhood(&cfg)?,
                run.samples as usize,
                probe.max_steps,
                &mut SymbolStream::new(run.seed, 0, sys.p0()),
            )?;
            let x: Vec<f64> = eta.iter().map(|&e| e as f64).collect();
            let k = if probe.tail_k == 0 { default_k(x.len()) } else { probe.tail_k };
            let est = hill_tail_index(&x, k, run.seed)?;
            let summary = json!({"estimate": &est, "reference_alpha": (1.0 / sys.p0()).log2()});
            em.csv("tail.csv", &tail_rows(&x))?;
            em.json("tail.json", &summary)?;
            done(em, summary)
        }
        Command::Measure => {
            let mut em = start(cli, &cfg, "measure", &sys, Theorem::Intermittency)?;
            let r = empirical_cesaro_measure(
                &sys,
                z0(&cfg),
                run.n_steps,
                run.burnin,
                probe.cells,
                probe.near_radius,
                &mut SymbolStream::new(run.seed, 0, sys.p0()),
            )?;
            let summary = json!({
                "mass_near_zero": r.mass_near_zero,
                "near_radius": probe.near_radius,
                "burnin": r.burnin,
                "n_steps": r.n_steps,
                "scheme": r.histogram.scheme,
                "regime": r.regime,
            });
            em.csv("histogram.csv", &r.histogram.rows())?;
            em.json("measure.json", &summary)?;
            done(em, json!({"mass_near_zero": r.mass_near_zero}))
        }
        Command::Coverage => {
            let mut em = start(cli, &cfg, "coverage", &sys, Theorem::Density)?;
            let r = coverage_probe(&sys, z0(&cfg), probe.depth, probe.cells, probe.frontier_budget)?;
            em.csv("coverage.csv", &r.per_depth)?;
            em.json("coverage.json", &r)?;
            done(em, json!({"fraction": r.fraction, "depth_reached": r.depth_reached, "partial": r.partial}))
        }
        Command::ClassifyLambda { .. } => {
            let mut em = start(cli, &cfg, "classify-lambda", &sys, Theorem::None)?;
            let cls = classify_lambda(cfg.lambda(), probe.qmax, probe.tol)?;
            em.json("classification.json", &cls)?;
            done(em, cls)
        }
        Command::Linearize { map, .. } => {
            let mut em = start(cli, &cfg, "linearize", &sys, Theorem::None)?;
            let (own, other) = match map {
                MapName::F0 => (0, 1),
                MapName::F1 => (1, 0),
            };
            let k = probe.k_series;
            let f = taylor_at_zero(sys.map(own), k)?;
            let phi = koenigs_linearizer(&f, k)?;
            let residual = linearization_residual(&phi, &f, f.multiplier())?;
            let g = taylor_at_zero(sys.map(other), k)?;
            let cross = linearization_residual(&phi, &g, g.multiplier())?;
            let summary = json!({
                "map": if own == 0 { "f0" } else { "f1" },
                "order": k,
                "multiplier": pair(f.multiplier()),
                "phi": phi.coeffs().iter().map(|z| z.re).collect::<Vec<_>>(),
                "phi_im": phi.coeffs().iter().map(|z| z.im).collect::<Vec<_>>(),
                "residual_max": residual.max_abs(),
                "other_map_residual": cross.coeffs().iter().map(|z| pair(*z)).collect::<Vec<_>>(),
            });
            em.json("linearization.json", &summary)?;
            done(em, summary)
        }
        Command::Curve => {
            let mut em = start(cli, &cfg, "curve", &sys, Theorem::None)?;
            let cv = unit_circle_curve(cfg.lambda(), probe.curve_samples)?;
            let summary = json!({"lambda": cv.lambda, "samples": cv.rows.len(), "crossings": cv.crossings});
            em.csv("curve.csv", &cv.rows)?;
            em.json("curve.json", &summary)?;
            done(em, summary)
        }
        Command::InvariantsCheck => {
            let mut em = start(cli, &cfg, "invariants-check", &sys, Theorem::None)?;
            let v = invariant_candidate_check(cfg.lambda())?;
            let invariant = v.iter().filter(|x| x.invariant).count();
            em.json("invariants.json", &json!({"lambda": cfg.system.lambda, "candidates": &v}))?;
            done(em, json!({"candidates": v.len(), "invariant": invariant}))
        }
        Command::ProbeNonnormal => {
            let mut em = start(cli, &cfg, "probe-nonnormal", &sys, Theorem::None)?;
            let t = non_normality_probe(cfg.lambda(), probe.scale, probe.cycles)?;
            let summary = json!({
                "lambda": t.lambda,
                "r": t.r,
                "kappa": t.kappa,
                "cycles": t.cycles,
                "steps": t.steps.len(),
                "block_gains": &t.block_gains,
                "total_gain": t.total_gain(),
            });
            em.csv("nonnormal.csv", &t.steps)?;
            em.json("nonnormal.json", &summary)?;
            done(em, json!({"total_gain": t.total_gain()}))
        }
        Command::Mobius => {
            let mut em = start(cli, &cfg, "mobius", &sys, Theorem::None)?;
            let r = empirical_cesaro_measure(
                &sys,
                z0(&cfg),
                run.n_steps,
                run.burnin,
                probe.cells,
                probe.near_radius,
                &mut SymbolStream::new(run.seed, 0, sys.p0()),
            )?;
            let at0 = run_orbit(&sys, SpherePoint::ZERO, &mut SymbolStream::new(run.seed, 1, sys.p0()), run.n_steps, &mut [])?;
            let summary = json!({
                "mu": cfg.system.mu,
                "mass_near_zero": r.mass_near_zero,
                "near_radius": probe.near_radius,
                "lyapunov_closed_form": sys.lyapunov_at_origin().value,
                "lyapunov_estimate": finite_time_lyapunov(&at0)?,
                "regime": r.regime,
            });
            em.csv("histogram.csv", &r.histogram.rows())?;
            em.json("mobius.json", &summary)?;
            done(em, summary)
        }
        Command::Logistic => {
            let mut em = start(cli, &cfg, "logistic", &sys, Theorem::None)?;
            let w = neighbourhood(&cfg)?;
            let a = occupation_fraction(&sys, z0(&cfg), w, run.n_steps, run.trials, run.seed)?;
            let swapped_sys = sys.with_p0(1.0 - sys.p0())?;
            let b = occupation_fraction(&swapped_sys, z0(&cfg), w, run.n_steps, run.trials, run.seed)?;
            let summary = json!({
                "epsilon": run.epsilon,
                "p_g2": sys.p0(),
                "median": a.summary.median,
                "swapped_p_g2": swapped_sys.p0(),
                "swapped_median": b.summary.median,
            });
            em.csv("occupation.csv", &a.rows())?;
            em.csv("occupation_swapped.csv", &b.rows())?;
            em.json("logistic.json", &summary)?;
            done(em, summary)
        }
    }
}
