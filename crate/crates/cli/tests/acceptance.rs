//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qipa::circuits::{build_ansatz, AnsatzCircuit, AnsatzFamily, Gate};
use qipa::encoding::{build_biprime, load_test_hamiltonian_15, BiprimeSpec};
use qipa::experiment::{run_experiment, ExperimentConfig, Problem};
use qipa::linalg::{inner, Spectrum};
use qipa::mclachlan::{assemble_a, assemble_c_exact, assemble_c_qite, energy, EvalMode, OracleSpec};
use qipa::solver::{cg_solve, evolve, Convergence, EvolutionTrace, Method, SolverConfig, Status};
use qipa::Observable;

// Golden encodings
const GOLDEN_BUDGET: Duration = Duration::from_secs(1);

// Biprime oracle equivalence
const BIPRIMES: [u64; 11] = [9, 15, 21, 25, 33, 35, 49, 55, 65, 77, 91];
const BIPRIME_BUDGET: Duration = Duration::from_secs(10);
const H15_CONSTANT: f64 = 186.0;
/// `(qubits, coefficient)` of every non-constant term, `s_l` on qubit `l − 1`.
const H15_TERMS: [(&[usize], f64); 15] = [
    (&[0], 48.0),
    (&[1], 96.0),
    (&[0, 1], 84.0),
    (&[2], 48.0),
    (&[0, 2], 34.0),
    (&[1, 2], 68.0),
    (&[0, 1, 2], 32.0),
    (&[3], 96.0),
    (&[0, 3], 68.0),
    (&[1, 3], 136.0),
    (&[0, 1, 3], 64.0),
    (&[2, 3], 84.0),
    (&[0, 2, 3], 32.0),
    (&[1, 2, 3], 64.0),
    (&[0, 1, 2, 3], 16.0),
];

// McLachlan correctness
const MCLACHLAN_INSTANCES: usize = 50;
const MCLACHLAN_FD_STEP: f64 = 1e-5;
const MCLACHLAN_FD_TOL: f64 = 1e-7;
const MCLACHLAN_HADAMARD_TOL: f64 = 1e-10;
const MCLACHLAN_BUDGET: Duration = Duration::from_secs(60);

// Analytic flow
const FLOW_TOL: f64 = 1e-8;
const FLOW_THETAS: [f64; 6] = [0.1, 0.5, 1.0, 1.7, 2.5, 3.0];
const FLOW_TAUS: [f64; 5] = [0.0, 0.3, 1.0, 2.0, 4.0];

// Exact-propagator fidelity
const FIDELITY_MIN: f64 = 0.999;
const FIDELITY_DT: f64 = 0.005;
const FIDELITY_TAU: f64 = 5.0;
const FIDELITY_INSTANCES: u64 = 10;
const FIDELITY_LAYERS: usize = 2;
const FIDELITY_BUDGET: Duration = Duration::from_secs(120);

// Comparative speedup
const SPEEDUP_DT: f64 = 0.01;
/// Threshold `E_ground + SPEEDUP_LEVEL·(E_max − E_ground)`.
const SPEEDUP_LEVEL: f64 = 1e-3;
const SPEEDUP_MIN_REDUCTION: f64 = 0.20;
const SPEEDUP_BUDGET: Duration = Duration::from_secs(300);

// Twin solutions
const TWIN_SMALL_DT: f64 = 0.01;
const TWIN_LARGE_DT: f64 = 0.04;
const TWIN_EQUAL_TOL: f64 = 0.05;
const TWIN_BUDGET: Duration = Duration::from_secs(120);

// Transmon
const TRANSMON_TOL: f64 = 1e-3;
const TRANSMON_FLUXES: [f64; 2] = [0.25, 0.0];
const TRANSMON_LEVELS: [usize; 2] = [4, 16];
const TRANSMON_BUDGET: Duration = Duration::from_secs(300);

// QITE monotone descent
const DESCENT_DT: f64 = 0.01;
const DESCENT_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_encodings() -> Outcome {
    let mut counts = BTreeMap::new();
    for op in ["number", "cos", "sin"] {
        for scheme in ["binary", "gray"] {
            let out = Command::new(env!("CARGO_BIN_EXE_qipa"))
                .args(["dump-encoding", "--op", op, "-d", "16", "--scheme", scheme])
                .output()
                .map_err(|e| e.to_string())?;
            ensure(out.status.success(), || format!("dump-encoding {op} {scheme} failed"))?;
            let golden = std::fs::read_to_string(data(&format!("golden/{op}_{scheme}_d16.txt"))).map_err(|e| e.to_string())?;
            let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
            ensure(text == golden, || format!("{op} {scheme} differs from the golden file"))?;
            counts.insert(format!("{op}/{scheme}"), text.lines().count());
        }
    }
    for scheme in ["binary", "gray"] {
        let got = (counts[&format!("cos/{scheme}")], counts[&format!("sin/{scheme}")], counts[&format!("number/{scheme}")]);
        ensure(got == (15, 15, 5), || format!("{scheme}: cos/sin/N term counts {got:?}"))?;
    }
    Ok("6 files byte-identical, 15 + 15 + 5 terms per scheme".into())
}

fn factor_codewords(n: u64) -> BTreeSet<usize> {
    let l = (n >> 1).ilog2() as usize;
    let bits = |v: u64| -> Option<usize> {
        let x = (v - 1) / 2;
        (x < (1 << l)).then(|| (0..l).map(|j| ((((x >> j) & 1) ^ 1) as usize) << j).sum())
    };
    (3..n)
        .step_by(2)
        .filter(|q| n % q == 0)
        .filter_map(|q| Some(bits(q)? | (bits(n / q)? << l)))
        .collect()
}

fn biprime_equivalence() -> Outcome {
    for n in BIPRIMES {
        let h = build_biprime(&BiprimeSpec::new(n).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let zeros: BTreeSet<usize> =
            h.diagonal().iter().enumerate().filter(|(_, e)| e.norm() < 1e-9).map(|(i, _)| i).collect();
        let expected = factor_codewords(n);
        ensure(!expected.is_empty() && zeros == expected, || format!("N = {n}: zeros {zeros:?}, factor codewords {expected:?}"))?;
    }
    let h15 = build_biprime(&BiprimeSpec::new(15).unwrap()).unwrap().simplify();
    let mut got: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (c, w) in h15.terms() {
        ensure(c.im == 0.0, || format!("complex coefficient {c} on {w}"))?;
        ensure(w.ops().values().all(|p| *p == qipa::Pauli::Z), || format!("non-Z word {w}"))?;
        got.insert(w.ops().keys().copied().collect(), c.re);
    }
    let mut expected: BTreeMap<Vec<usize>, f64> = H15_TERMS.iter().map(|(q, c)| (q.to_vec(), *c)).collect();
    expected.insert(Vec::new(), H15_CONSTANT);
    ensure(got == expected, || format!("H15 terms {got:?}"))?;
    Ok(format!("{} moduli, H15 has 16 exact coefficients", BIPRIMES.len()))
}

fn random_observable(n: usize, rng: &mut ChaCha8Rng) -> Observable {
    let letters = ['I', 'X', 'Y', 'Z'];
    let mut text = String::new();
    for code in 1..4usize.pow(n as u32) {
        let word: Vec<String> = (0..n)
            .filter_map(|q| {
                let l = letters[(code / 4usize.pow(q as u32)) % 4];
                (l != 'I').then(|| format!("{l}{q}"))
            })
            .collect();
        text.push_str(&format!("{} {}\n", rng.random_range(-1.0..1.0), word.join(" ")));
    }
    Observable::from_pauli_text(&text, Some(n)).unwrap()
}

fn mclachlan_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_a, mut worst_c, mut worst_h) = (0.0f64, 0.0f64, 0.0f64);
    for instance in 0..MCLACHLAN_INSTANCES {
        let n = 1 + instance % 3;
        let family = if instance % 2 == 0 { AnsatzFamily::Y } else { AnsatzFamily::YZ };
        let circuit = build_ansatz(family, n, 1 + rng.random_range(0..2)).unwrap();
        let theta: Vec<f64> = (0..circuit.n_params()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let h = random_observable(n, &mut rng);

        let a = assemble_a(&circuit, &theta, EvalMode::Direct).unwrap();
        let c = assemble_c_qite(&circuit, &theta, &h, EvalMode::Direct).unwrap();
        let derivs: Vec<Vec<_>> = (0..circuit.n_params())
            .map(|k| {
                let (mut p, mut m) = (theta.clone(), theta.clone());
                p[k] += MCLACHLAN_FD_STEP;
                m[k] -= MCLACHLAN_FD_STEP;
                let (sp, sm) = (circuit.apply(&p).unwrap(), circuit.apply(&m).unwrap());
                sp.amplitudes().iter().zip(sm.amplitudes()).map(|(x, y)| (x - y) / (2.0 * MCLACHLAN_FD_STEP)).collect()
            })
            .collect();
        for k in 0..circuit.n_params() {
            for m in 0..circuit.n_params() {
                worst_a = worst_a.max((a[(k, m)] - inner(&derivs[k], &derivs[m]).re).abs());
            }
            let (mut p, mut q) = (theta.clone(), theta.clone());
            p[k] += MCLACHLAN_FD_STEP;
            q[k] -= MCLACHLAN_FD_STEP;
            let grad = (energy(&circuit, &p, &h).unwrap() - energy(&circuit, &q, &h).unwrap()) / (2.0 * MCLACHLAN_FD_STEP);
            worst_c = worst_c.max((c[k] + 0.5 * grad).abs());
        }

        let a_h = assemble_a(&circuit, &theta, EvalMode::HadamardExact).unwrap();
        let c_h = assemble_c_qite(&circuit, &theta, &h, EvalMode::HadamardExact).unwrap();
        worst_h = worst_h.max((&a_h - &a).amax()).max((&c_h - &c).amax());
    }
    ensure(worst_a <= MCLACHLAN_FD_TOL, || format!("A vs finite differences: {worst_a:e}"))?;
    ensure(worst_c <= MCLACHLAN_FD_TOL, || format!("C vs energy gradient: {worst_c:e}"))?;
    ensure(worst_h <= MCLACHLAN_HADAMARD_TOL, || format!("Hadamard vs direct: {worst_h:e}"))?;
    Ok(format!(
        "{MCLACHLAN_INSTANCES} instances; max |ΔA| = {worst_a:.1e}, |ΔC| = {worst_c:.1e}, Hadamard {worst_h:.1e}"
    ))
}

fn ry1() -> AnsatzCircuit {
    AnsatzCircuit::new(1, vec![Gate::ry(0, 0)], AnsatzFamily::Custom).unwrap()
}

fn z() -> Observable {
    Observable::from_pauli_text("1 Z0", Some(1)).unwrap()
}

fn analytic_flow() -> Outcome {
    let (circuit, h) = (ry1(), z());
    let mut worst = 0.0f64;
    for &theta in &FLOW_THETAS {
        let a = assemble_a(&circuit, &[theta], EvalMode::Direct).unwrap();
        let rate = |c| cg_solve(&a, &c, 1e-14, 10, 0.0).unwrap().x[0];
        let qite = rate(assemble_c_qite(&circuit, &[theta], &h, EvalMode::Direct).unwrap());
        worst = worst.max((qite - 2.0 * theta.sin()).abs());
        for &tau in &FLOW_TAUS {
            let c = assemble_c_exact(&circuit, &[theta], &h, tau, &OracleSpec::double()).unwrap();
            worst = worst.max((rate(c) - 2.0 * theta.sin() * tau.cosh()).abs());
        }
    }
    ensure(worst <= FLOW_TOL, || format!("max deviation {worst:e}"))?;
    Ok(format!("{} θ × {} τ points, max deviation {worst:.1e}", FLOW_THETAS.len(), FLOW_TAUS.len()))
}

fn centered(h: &Observable) -> (f64, f64) {
    let c = h.constant().re;
    (c, h.shifted(c).simplify().one_norm())
}

fn exact_propagator_fidelity() -> Outcome {
    let mut worst = [1.0f64; 2];
    for seed in 0..FIDELITY_INSTANCES {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let h = random_observable(2, &mut rng);
        let circuit = build_ansatz(AnsatzFamily::YZ, 2, FIDELITY_LAYERS).unwrap();
        let theta0: Vec<f64> = (0..circuit.n_params()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (shift, scale) = centered(&h);
        for (i, oracle) in [OracleSpec::qite(), OracleSpec::double()].into_iter().enumerate() {
            let cfg = SolverConfig {
                dt: FIDELITY_DT,
                tau_total: FIDELITY_TAU,
                cg_tol: 1e-10,
                convergence: Convergence::MaxSteps,
                energy_shift: shift,
                energy_scale: scale,
                track_fidelity: true,
                ..Default::default()
            };
            let trace = evolve(&h, &circuit, &theta0, &cfg, &Method::General { oracle }).unwrap();
            ensure(trace.status == Status::MaxSteps, || format!("seed {seed}: {:?}", trace.status))?;
            let min = trace.records.iter().map(|r| r.fidelity.unwrap()).fold(1.0, f64::min);
            worst[i] = worst[i].min(min);
        }
    }
    ensure(worst.iter().all(|&f| f >= FIDELITY_MIN), || format!("min fidelity n=1 {:.6}, n=2 {:.6}", worst[0], worst[1]))?;
    Ok(format!("{FIDELITY_INSTANCES} Hamiltonians, min fidelity n=1 {:.6}, n=2 {:.6}", worst[0], worst[1]))
}

fn steps_to_threshold(h: &Observable, circuit: &AnsatzCircuit, theta0: &[f64], norm: (f64, f64), tau: f64, method: Method) -> Result<usize, String> {
    let spectrum = Spectrum::new(&h.to_dense().unwrap());
    let level = spectrum.ground_energy() + SPEEDUP_LEVEL * spectrum.range();
    let cfg = SolverConfig {
        dt: SPEEDUP_DT,
        tau_total: tau,
        convergence: Convergence::EnergyThreshold { level },
        energy_shift: norm.0,
        energy_scale: norm.1,
        ..Default::default()
    };
    let trace = evolve(h, circuit, theta0, &cfg, &method).map_err(|e| e.to_string())?;
    ensure(trace.status == Status::Converged, || format!("{} did not reach the threshold: {:?}", method.name(), trace.status))?;
    Ok(trace.steps())
}

fn comparative_speedup() -> Outcome {
    let h15 = build_biprime(&BiprimeSpec::new(15).unwrap()).unwrap();
    let t3 = load_test_hamiltonian_15();
    let cases: Vec<(&str, Observable, AnsatzCircuit, Vec<f64>, (f64, f64), f64)> = vec![
        ("Z", z(), ry1(), vec![0.1], (0.0, 1.0), 20.0),
        ("T3", t3.clone(), build_ansatz(AnsatzFamily::Y, 3, 1).unwrap(), vec![1e-2; 6], centered(&t3), 200.0),
        ("H15", h15.clone(), build_ansatz(AnsatzFamily::Y, 4, 1).unwrap(), vec![1e-2; 8], centered(&h15), 300.0),
    ];
    let mut parts = Vec::new();
    let mut best = 0.0f64;
    for (name, h, circuit, theta0, norm, tau) in cases {
        let qite = steps_to_threshold(&h, &circuit, &theta0, norm, tau, Method::Qite)?;
        let qipa = steps_to_threshold(&h, &circuit, &theta0, norm, tau, Method::Qipa)?;
        ensure(qipa <= qite, || format!("{name}: QIPA {qipa} > QITE {qite}"))?;
        let reduction = 1.0 - qipa as f64 / qite as f64;
        best = best.max(reduction);
        parts.push(format!("{name} {qite}→{qipa} ({:.0}%)", 100.0 * reduction));
    }
    ensure(best >= SPEEDUP_MIN_REDUCTION, || format!("largest reduction {:.1}%", 100.0 * best))?;
    Ok(parts.join(", "))
}

fn h15_config() -> ExperimentConfig {
    ExperimentConfig::load(&data("configs/h15.toml")).unwrap()
}

fn twin_amplitudes(dt: f64, out: &std::path::Path) -> Result<(f64, f64), String> {
    let mut cfg = h15_config();
    cfg.method = Method::Qipa;
    cfg.solver.dt = dt;
    cfg.output.top_k = 2;
    cfg.output.dir = out.join(format!("dt_{dt}"));
    let run = run_experiment(&cfg).map_err(|e| e.to_string())?;
    ensure(run.summary.status == Status::Converged, || format!("δτ = {dt}: {:?}", run.summary.status))?;
    let sols = &run.summary.solutions;
    let pairs: BTreeSet<(i64, i64)> = sols.iter().map(|s| (s.labels["q"], s.labels["p"])).collect();
    ensure(pairs == BTreeSet::from([(3, 5), (5, 3)]), || format!("δτ = {dt}: top two decode to {pairs:?}"))?;
    Ok((sols[0].amplitude, sols[1].amplitude))
}

fn twin_solutions() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = twin_amplitudes(TWIN_SMALL_DT, tmp.path())?;
    let small = (a - b) / a;
    ensure(small <= TWIN_EQUAL_TOL, || format!("δτ = {TWIN_SMALL_DT}: amplitudes {a:.4}, {b:.4}"))?;
    let (c, d) = twin_amplitudes(TWIN_LARGE_DT, tmp.path())?;
    let large = (c - d) / c;
    ensure(large > TWIN_EQUAL_TOL, || format!("δτ = {TWIN_LARGE_DT}: amplitudes {c:.4}, {d:.4} do not differ"))?;
    Ok(format!("δτ {TWIN_SMALL_DT}: {a:.4}/{b:.4}; δτ {TWIN_LARGE_DT}: {c:.4}/{d:.4}"))
}

fn transmon_config(flux: f64, d: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(&data("configs/transmon.toml")).unwrap();
    if let Problem::Transmon { flux: f, d: levels, .. } = &mut cfg.problem {
        *f = flux;
        *levels = d;
    }
    cfg
}

fn transmon_ground_state() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for d in TRANSMON_LEVELS {
        for flux in TRANSMON_FLUXES {
            let mut steps = Vec::new();
            for method in [Method::Qite, Method::Qipa] {
                let mut cfg = transmon_config(flux, d);
                let unit = cfg.problem.energy_unit();
                cfg.method = method;
                cfg.output.dir = tmp.path().join(format!("d{d}_f{flux}_{}", cfg.method.name()));
                let run = run_experiment(&cfg).map_err(|e| e.to_string())?;
                let err = run.summary.abs_error.unwrap();
                ensure(run.summary.status == Status::Converged && err <= TRANSMON_TOL * unit, || {
                    format!("d = {d}, f = {flux}, {}: {:?}, error {err:e}", cfg.method.name(), run.summary.status)
                })?;
                steps.push(run.summary.steps);
            }
            ensure(steps[1] <= steps[0], || format!("d = {d}, f = {flux}: QIPA {} > QITE {}", steps[1], steps[0]))?;
            parts.push(format!("d{d} f{flux} {}→{}", steps[0], steps[1]));
        }
    }
    Ok(parts.join(", "))
}

fn max_increase(trace: &EvolutionTrace) -> f64 {
    trace.records.windows(2).map(|w| w[1].e1 - w[0].e1).fold(f64::NEG_INFINITY, f64::max)
}

fn qite_monotone_descent() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut configs: Vec<(String, ExperimentConfig)> = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(data("configs")).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    for path in paths {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        configs.push((name, ExperimentConfig::load(&path).map_err(|e| e.to_string())?));
    }
    for d in TRANSMON_LEVELS {
        for flux in TRANSMON_FLUXES {
            configs.push((format!("transmon_d{d}_f{flux}"), transmon_config(flux, d)));
        }
    }
    let mut worst = f64::NEG_INFINITY;
    for (name, mut cfg) in configs.clone() {
        cfg.method = Method::Qite;
        cfg.solver.dt = DESCENT_DT;
        cfg.output.dir = tmp.path().join(&name);
        let run = run_experiment(&cfg).map_err(|e| e.to_string())?;
        let inc = max_increase(&run.trace);
        ensure(inc <= DESCENT_TOL, || format!("{name}: E₁ rose by {inc:e}"))?;
        worst = worst.max(inc);
    }
    Ok(format!("{} problems, largest step increase {worst:.1e}", configs.len()))
}

fn run_criterion(name: &str, budget: Option<Duration>, f: fn() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    });
    let elapsed = start.elapsed();
    let outcome = outcome.and_then(|detail| match budget {
        Some(b) if elapsed > b => Err(format!("{detail}; took {:.1} s, budget {} s", elapsed.as_secs_f64(), b.as_secs())),
        _ => Ok(detail),
    });
    match &outcome {
        Ok(detail) => println!("PASS {name}: {detail} [{:.2} s]", elapsed.as_secs_f64()),
        Err(detail) => println!("FAIL {name}: {detail} [{:.2} s]", elapsed.as_secs_f64()),
    }
    outcome.is_ok()
}

fn main() {
    // `cargo test -- --list` and similar probes expect a quick exit.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, Option<Duration>, fn() -> Outcome); 9] = [
        ("golden_encodings", Some(GOLDEN_BUDGET), golden_encodings),
        ("biprime_oracle_equivalence", Some(BIPRIME_BUDGET), biprime_equivalence),
        ("mclachlan_correctness", Some(MCLACHLAN_BUDGET), mclachlan_correctness),
        ("analytic_flow", None, analytic_flow),
        ("exact_propagator_fidelity", Some(FIDELITY_BUDGET), exact_propagator_fidelity),
        ("comparative_speedup", Some(SPEEDUP_BUDGET), comparative_speedup),
        ("twin_solution_recovery", Some(TWIN_BUDGET), twin_solutions),
        ("transmon_ground_state", Some(TRANSMON_BUDGET), transmon_ground_state),
        ("qite_monotone_descent", None, qite_monotone_descent),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let failed: Vec<&str> = criteria.iter().filter(|(n, b, f)| !run_criterion(n, *b, *f)).map(|(n, _, _)| *n).collect();
    println!("{} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
