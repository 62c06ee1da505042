//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines always reach stdout.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skewforms::cases::{self, Finding, GasDynamicsInput, GAS_SOURCES};
use skewforms::characteristics::{
    canonical_system, closure_along, detect_degeneracy, fan_initial_states, integrate, HamiltonJacobi,
    IntegrateOptions,
};
use skewforms::expr::Bindings;
use skewforms::relations::{self, Ansatz, Classification, EvolutionaryRelation, IntegratingFactor};
use skewforms::{parse, parse_with, testing, Chart, Expr, Form, ParseContext, Pseudostructure, ZeroTest};

type Criterion = (&'static str, fn() -> Outcome);

const BIN: &str = env!("CARGO_BIN_EXE_skewforms");

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn s(v: &[&str]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn random_degree(rng: &mut ChaCha8Rng, n: usize) -> usize {
    rng.gen_range(0..=n.min(3))
}

fn algebraic_laws() -> Outcome {
    const TRIALS: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = [0usize; 4];
    for _ in 0..TRIALS {
        let n = rng.gen_range(1..=5);
        let chart = testing::chart(n);
        let p = random_degree(&mut rng, n);
        let q = random_degree(&mut rng, n);
        let r = random_degree(&mut rng, n);
        let a = testing::form(&mut rng, &chart, p, 3);
        let b = testing::form(&mut rng, &chart, q, 3);
        let c = testing::form(&mut rng, &chart, r, 3);

        failures[0] += usize::from(!a.d().d().is_zero());

        let lhs = a.wedge(&b).unwrap().d();
        let second = a.wedge(&b.d()).unwrap();
        let rhs = a.d().wedge(&b).unwrap().add(&if p % 2 == 1 { second.neg() } else { second }).unwrap();
        failures[1] += usize::from(lhs != rhs);

        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        failures[2] += usize::from(ab != if (p * q) % 2 == 1 { ba.neg() } else { ba });

        let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        failures[3] += usize::from(left != right);
    }
    outcome(
        failures.iter().all(|&f| f == 0),
        format!(
            "{TRIALS} trials each; failures d∘d {}, Leibniz {}, graded commutativity {}, associativity {}",
            failures[0], failures[1], failures[2], failures[3]
        ),
    )
}

fn commutator_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let zt = ZeroTest::default();
    let h = 1e-5;
    let mut worst = 0.0_f64;
    let mut checked = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=5);
        let chart = testing::chart(n);
        let a = testing::form(&mut rng, &chart, 1, 3);
        let coeffs = a.one_form_coefficients().unwrap();
        let k = a.commutator(None, &zt).unwrap();
        for _ in 0..10 {
            let point: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let at = |p: &[f64]| {
                let mut b = Bindings::new();
                for (name, v) in chart.coords().iter().zip(p) {
                    b.insert(name, *v);
                }
                b
            };
            let partial = |f: &Expr, i: usize| {
                let (mut hi, mut lo) = (point.clone(), point.clone());
                hi[i] += h;
                lo[i] -= h;
                (f.eval(&at(&hi)).unwrap() - f.eval(&at(&lo)).unwrap()) / (2.0 * h)
            };
            for e in &k.entries {
                let numeric = partial(&coeffs[e.beta], e.alpha) - partial(&coeffs[e.alpha], e.beta);
                let symbolic = e.total.eval(&at(&point)).unwrap();
                worst = worst.max((numeric - symbolic).abs() / symbolic.abs().max(1.0));
                checked += 1;
            }
        }
    }
    outcome(worst <= 1e-5, format!("100 forms x 10 points, {checked} components, max rel err {worst:.2e} (<= 1e-5)"))
}

fn connection_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let zt = ZeroTest::default();
    let (mut split_failures, mut symmetric_failures) = (0, 0);
    for _ in 0..50 {
        let n = rng.gen_range(2..=4);
        let chart = testing::chart(n);
        let a = testing::form(&mut rng, &chart, 1, 3);
        let conn = testing::connection(&mut rng, &chart, false);
        let flat = a.commutator(None, &zt).unwrap();
        let full = a.commutator(Some(&conn), &zt).unwrap();
        let coeffs = a.one_form_coefficients().unwrap();
        for (f, e) in flat.entries.iter().zip(&full.entries) {
            let torsion: Expr = (0..n)
                .map(|s| &(&conn.gamma(s, e.beta, e.alpha) - &conn.gamma(s, e.alpha, e.beta)) * &coeffs[s])
                .sum();
            split_failures += usize::from(e.total != &f.total + &torsion);
        }
        let sym = testing::connection(&mut rng, &chart, true);
        let report = a.commutator(Some(&sym), &zt).unwrap();
        symmetric_failures += report.entries.iter().filter(|e| !e.connection_part.is_zero()).count();
    }
    outcome(
        split_failures == 0 && symmetric_failures == 0,
        format!("50 pairs; split mismatches {split_failures}, nonzero symmetric connection parts {symmetric_failures}"),
    )
}

fn thermodynamics() -> Outcome {
    let zt = ZeroTest::default();
    let chart = Chart::new(&["T", "V"]).unwrap();
    let omega = Form::parse(&chart, "c_v dT + R*T/V dV", &ParseContext::new()).unwrap();
    let verdict = relations::analyze(&EvolutionaryRelation::new(omega.clone()), &zt).unwrap();
    let nonidentical = verdict.classification == Classification::Nonidentical;
    let k = omega.commutator(None, &zt).unwrap().component(0, 1);
    let k_ok = k == parse("R/V").unwrap();
    let mu = match relations::find_integrating_factor(&omega, Ansatz::Auto, &zt).unwrap() {
        IntegratingFactor::Found { mu, .. } => Some(mu),
        _ => None,
    };
    let mu_ok = mu == Some(parse("1/T").unwrap());
    let closed_form = omega.scale(&parse("1/T").unwrap());
    let closed = closed_form.d().is_zero();
    let entropy = relations::potential(&closed_form);
    let ds_ok = entropy.as_ref().is_some_and(|s| s.d().sub(&closed_form).unwrap().is_zero());

    let (code, stdout, _) = run_cli(&["factor", "thermodynamics_form.json"]);
    let cli_ok = code == 0 && stdout.contains("\"mu\": \"T^-1\"");
    outcome(
        nonidentical && k_ok && mu_ok && closed && ds_ok && cli_ok,
        format!(
            "nonidentical {nonidentical}, K_TV = {k}, mu = {}, d(omega/T) = 0 {closed}, S = {}, dS = omega/T {ds_ok}, cli factor {cli_ok}",
            mu.map(|m| m.to_string()).unwrap_or_else(|| "none".into()),
            entropy.map(|s| s.to_string()).unwrap_or_else(|| "none".into()),
        ),
    )
}

fn harmonic_period() -> Outcome {
    let hj = HamiltonJacobi::new("t", s(&["x"]), s(&["p"]), parse("(p^2 + x^2)/2").unwrap()).unwrap();
    let sys = canonical_system(&hj).unwrap();
    let steps = (2.0 * PI / 1e-3).round() as usize;
    let opts = IntegrateOptions { dt: 2.0 * PI / steps as f64, steps, ..Default::default() };
    let initial = vec![vec![1.0, 0.0, 0.0], vec![0.3, -0.7, 0.0], vec![-1.2, 0.5, 0.0]];
    let trajectories = integrate(&sys, &initial, &opts).unwrap();
    let theta = sys.default_theta();
    let mut return_err = 0.0_f64;
    let mut drift = 0.0_f64;
    let mut closure = 0.0_f64;
    for (y0, traj) in initial.iter().zip(&trajectories) {
        let last = traj.last();
        return_err = return_err.max((last[0] - y0[0]).abs().max((last[1] - y0[1]).abs()));
        let e0 = traj.diagnostics[0];
        drift = drift.max(traj.diagnostics.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max));
        closure = closure.max(closure_along(&sys, &theta, traj, &opts.constants, 1e-6).unwrap().max_residual);
    }

    // −E dt + p dx pulled back to a trajectory t = τ, x = X(τ), p = P(τ), u = W(τ)
    let tau = Expr::sym("tau");
    let path = Pseudostructure::new(
        Chart::new(&["tau"]).unwrap(),
        [
            ("t".to_string(), tau.clone()),
            ("x".to_string(), Expr::opaque("X", vec![tau.clone()])),
            ("p".to_string(), Expr::opaque("P", vec![tau.clone()])),
            ("u".to_string(), Expr::opaque("W", vec![tau.clone()])),
        ]
        .into(),
        vec![],
    )
    .unwrap();
    let structural = theta.pullback(&path).unwrap().d().is_zero();
    outcome(
        return_err <= 1e-6 && drift <= 1e-6 && structural && closure <= 1e-6,
        format!(
            "{steps} steps of {:.6e}; return err {return_err:.2e}, energy drift {drift:.2e}, pullback d = 0 {structural}, du - theta residual {closure:.2e}",
            opts.dt
        ),
    )
}

fn focusing_fan() -> Outcome {
    let hj = HamiltonJacobi::new("t", s(&["x"]), s(&["p"]), parse("p^2/2").unwrap()).unwrap();
    let sys = canonical_system(&hj).unwrap();
    let initial = [parse("a").unwrap(), parse("-a").unwrap(), parse("-a^2/2").unwrap()];
    let fan = fan_initial_states(&initial, "a", -1.0, 1.0, 21, &Default::default()).unwrap();
    let params: Vec<f64> = fan.iter().map(|(a, _)| *a).collect();
    let states: Vec<Vec<f64>> = fan.into_iter().map(|(_, y)| y).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for dt in [1e-2, 1e-3] {
        let opts = IntegrateOptions { dt, steps: (1.5 / dt).round() as usize, jobs: 2, ..Default::default() };
        let trajectories = integrate(&sys, &states, &opts).unwrap();
        let events = detect_degeneracy(&trajectories, &params, 0).unwrap();
        let worst = events.iter().map(|e| (e.time - 1.0).abs()).fold(0.0, f64::max);
        ok &= !events.is_empty() && worst <= 2.0 * dt;
        parts.push(format!("dt {dt:e}: {} events, max |t - 1| {worst:.2e} (<= {:e})", events.len(), 2.0 * dt));
    }
    outcome(ok, parts.join("; "))
}

fn electromagnetic() -> Outcome {
    let ctx = ParseContext::new().with_function("f", &["xi"]);
    let report = cases::electromagnetic(&parse_with("f(xi)", &ctx).unwrap(), &ZeroTest::default()).unwrap();
    let direction = match report.findings.get("direction") {
        Some(Finding::Text(d)) => d.clone(),
        other => format!("{other:?}"),
    };
    let claim = |name: &str| report.claim_named(name).is_some_and(|c| c.passed);
    let dir_ok = direction == "c" && claim("integrating direction dl/dt = c");
    let pullback_ok = claim("dS vanishes on x - c t = const") && claim("dI vanishes on x - c t = const");
    outcome(dir_ok && pullback_ok, format!("dl/dt = {direction}, pullback derivatives zero {pullback_ok}"))
}

fn gas_dynamics() -> Outcome {
    let zt = ZeroTest::default();
    let ctx = ParseContext::new().with_function("g", &["t"]);
    let p = |t: &str| parse_with(t, &ctx).unwrap();
    let v3 = |a: &str, b: &str, c: &str| [p(a), p(b), p(c)];
    let base = |u: [Expr; 3], f: [Expr; 3], unsteady: bool| GasDynamicsInput {
        velocity: u,
        h0: p("x^2 + y*z"),
        force: f,
        temperature: p("T0"),
        unsteady,
        normals: vec![],
    };
    let attributed = |input: &GasDynamicsInput| -> (String, Vec<String>) {
        let r = cases::gas_dynamics(input, &zt).unwrap();
        let class = match &r.findings["classification"] {
            Finding::Text(s) => s.clone(),
            other => format!("{other:?}"),
        };
        let names = match &r.findings["attributed"] {
            Finding::List(items) => items
                .iter()
                .filter_map(|f| if let Finding::Text(s) = f { Some(s.clone()) } else { None })
                .collect(),
            _ => vec![],
        };
        (class, names)
    };
    let runs = [
        ("potential", base(v3("2*x", "-2*y", "0"), v3("x", "y", "z"), true), None),
        ("vorticity", base(v3("y", "x^2", "0"), v3("0", "0", "0"), false), Some(GAS_SOURCES[1])),
        ("force", base(v3("0", "0", "0"), v3("-y", "x", "0"), false), Some(GAS_SOURCES[2])),
        ("unsteady", base(v3("g(t)", "0", "0"), v3("0", "0", "0"), true), Some(GAS_SOURCES[3])),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, input, expect) in &runs {
        let (class, names) = attributed(input);
        let good = match expect {
            None => class == "identical" && names.is_empty(),
            Some(src) => class == "nonidentical" && names == vec![src.to_string()],
        };
        ok &= good;
        parts.push(format!("{name}: {class} {names:?}"));
    }
    outcome(ok, parts.join("; "))
}

fn golden_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN)
        .args(args)
        .current_dir(golden_dir())
        .env_remove("SKEWFORMS_CONFIG")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn determinism() -> Outcome {
    let mut files: Vec<String> = std::fs::read_dir(golden_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "json").then(|| p.file_name().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    files.sort();
    let mut runs = 0;
    let mut mismatches = Vec::new();
    for f in &files {
        let command = if f.starts_with("case_") {
            "case"
        } else if f.contains("harmonic") || f.contains("focusing") || f.contains("strip") {
            "characteristics"
        } else if f.contains("pseudostructures") || f.contains("chain") || f.contains("connections") || f.contains("sphere") {
            "validate"
        } else {
            "analyze"
        };
        for extra in [&[][..], &["--text"][..], &["--jobs", "3"][..]] {
            let mut args = vec![command, f.as_str()];
            args.extend_from_slice(extra);
            let a = run_cli(&args);
            let b = run_cli(&args);
            runs += 1;
            if a != b {
                mismatches.push(format!("{command} {f} {extra:?}"));
            }
        }
    }
    outcome(mismatches.is_empty(), format!("{runs} invocations run twice, {} differ {mismatches:?}", mismatches.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("algebraic laws", algebraic_laws),
        ("commutator vs finite differences", commutator_oracle),
        ("commutator with connection", connection_structure),
        ("thermodynamics", thermodynamics),
        ("harmonic oscillator period", harmonic_period),
        ("focusing fan degeneracy", focusing_fan),
        ("electromagnetic plane wave", electromagnetic),
        ("gas dynamics attribution", gas_dynamics),
        ("CLI determinism", determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        failed += usize::from(!o.passed);
        println!(
            "[{}] {}. {name}: {} ({:.2}s)",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} passed in {:.2}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
