//! Acceptance gate: one test per criterion, each printing a single
//! `acceptance criterion N: PASS` line once its assertions hold. Every
//! expected value is computed against an independent in-test oracle
//! (analytic ranks, brute-force sign scans, direct evaluation, or
//! high-precision library functions) — never against the code under test.

use std::collections::HashMap;
use std::time::Instant;

use ordo_core::classifier::{classify, insert_function};
use ordo_core::comparator::{
    comp, find_root_free_start, ldif, CompOutcome, ComparatorConfig, ComplexityFn,
};
use ordo_core::composer::{compose, emit_plan, execute_plan, PlanNode};
use ordo_core::expr::{eval, parse, BinaryOp, EvalMode, Expr};
use ordo_core::registry::Registry;

fn cfg() -> ComparatorConfig {
    ComparatorConfig::default()
}

fn f(src: &str) -> ComplexityFn {
    ComplexityFn::parse(src).unwrap_or_else(|e| panic!("fixture {src}: {e}"))
}

/// Reference families: polynomials of degree 1–3, n·log(n), 2^n, n!,
/// plus a second degree-1 polynomial, tagged with analytic growth ranks.
fn reference_family() -> Vec<(ComplexityFn, &'static str, u32)> {
    vec![
        (f("n"), "n", 0),
        (f("3*n + 5"), "3n+5", 0),
        (f("n*log2(n)"), "n*log2(n)", 1),
        (f("n^2"), "n^2", 2),
        (f("n^3"), "n^3", 3),
        (f("2^n"), "2^n", 4),
        (f("factorial(n)"), "n!", 5),
    ]
}

fn oracle_outcome(rank1: u32, rank2: u32) -> CompOutcome {
    match rank1.cmp(&rank2) {
        std::cmp::Ordering::Equal => CompOutcome::Equivalent,
        std::cmp::Ordering::Less => CompOutcome::FirstSmaller,
        std::cmp::Ordering::Greater => CompOutcome::SecondSmaller,
    }
}

/// Criterion 1 — every ordered pair from the reference families
/// classifies exactly as the analytic limit dictates.
#[test]
fn criterion_1_reference_family_matrix() {
    let family = reference_family();
    let cfg = cfg();
    let clock = Instant::now();
    let mut checked = 0;
    for i in 0..family.len() {
        for j in 0..family.len() {
            if i == j {
                continue;
            }
            let (f1, n1, r1) = &family[i];
            let (f2, n2, r2) = &family[j];
            let want = oracle_outcome(*r1, *r2);
            let got = comp(f1, f2, &cfg).outcome;
            assert_eq!(got, want, "comp({n1}, {n2})");
            checked += 1;
        }
    }
    let elapsed = clock.elapsed();
    assert_eq!(checked, 42);
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "matrix took {elapsed:?}, budget is 10 s"
    );
    println!(
        "acceptance criterion 1: PASS — 42/42 ordered-pair outcomes match the analytic \
         oracle on the reference families in {elapsed:?}"
    );
}

/// Criterion 2 — scaling by a constant never changes the Θ-class.
#[test]
fn criterion_2_scale_invariance() {
    let family = reference_family();
    let cfg = cfg();
    let mut checked = 0;
    for (func, name, _) in &family {
        for c in [0.5, 2.0, 100.0] {
            let scaled = ComplexityFn::parse(&format!("{c} * ({func})")).unwrap();
            let got = comp(func, &scaled, &cfg).outcome;
            assert_eq!(got, CompOutcome::Equivalent, "comp({name}, {c}*{name})");
            checked += 1;
        }
    }
    assert_eq!(checked, 21);
    println!("acceptance criterion 2: PASS — 21/21 scaled pairs compare Equivalent");
}

/// Largest sign change of `ldif` on a step-1e-3 grid over [1, 100].
fn largest_crossing(f1: &ComplexityFn, f2: &ComplexityFn) -> f64 {
    let sign = |v: f64| {
        if v.abs() <= 1e-12 {
            0.0
        } else {
            v.signum()
        }
    };
    let mut last_sign = 0.0;
    let mut largest = f64::NAN;
    for i in 0..=99_000u32 {
        let x = 1.0 + i as f64 * 1e-3;
        let Ok(v) = ldif(f1, f2, x) else { continue };
        let s = sign(v);
        if s == 0.0 {
            largest = x;
        } else {
            if last_sign != 0.0 && s != last_sign {
                largest = x;
            }
            last_sign = s;
        }
    }
    assert!(largest.is_finite(), "oracle found no crossing");
    largest
}

/// Criterion 3 — the root sweep starts strictly past the largest
/// crossing, and not farther than 2·q beyond it.
#[test]
fn criterion_3_root_localization() {
    let cfg = cfg();
    let cases = [("n^2", "4*n"), ("n^2", "10*n"), ("2^n", "n^3")];
    for (a, b) in cases {
        let f1 = f(a);
        let f2 = f(b);
        let crossing = largest_crossing(&f1, &f2);
        let clock = Instant::now();
        let s = find_root_free_start(&f1, &f2, &cfg);
        let elapsed = clock.elapsed();
        assert!(
            s > crossing && s <= crossing + 2.0 * cfg.q as f64,
            "({a}, {b}): start {s} vs largest crossing {crossing}"
        );
        assert!(
            elapsed.as_secs_f64() < 1.0,
            "({a}, {b}) took {elapsed:?}, budget is 1 s"
        );
    }
    println!(
        "acceptance criterion 3: PASS — 3/3 start points land in (crossing, crossing + 2q] \
         against the brute-force grid oracle"
    );
}

/// Criterion 4 — classification of a 10-function set spanning 5 analytic
/// classes, plus incremental insertion equivalence.
#[test]
fn criterion_4_classifier_partition() {
    let cfg = cfg();
    let clock = Instant::now();
    let base: Vec<(&str, &str)> = vec![
        ("lin", "n"),
        ("lin2", "3*n + 5"),
        ("nlogn", "n*log2(n)"),
        ("nlogn2", "2*n*log2(n)"),
        ("quad", "n^2"),
        ("quad2", "5*n^2 + n"),
        ("cube", "n^3"),
        ("cube2", "n^3/4"),
        ("exp2", "2^n"),
        ("exp2b", "3*2^n"),
    ];
    let fns = |pairs: &[(&str, &str)]| {
        pairs
            .iter()
            .map(|(id, src)| ((*id).to_owned(), f(src)))
            .collect::<Vec<_>>()
    };
    let lib = classify(fns(&base), &cfg).unwrap();

    // Oracle partition, ascending by analytic growth.
    let want: Vec<Vec<&str>> = vec![
        vec!["lin", "lin2"],
        vec!["nlogn", "nlogn2"],
        vec!["quad", "quad2"],
        vec!["cube", "cube2"],
        vec!["exp2", "exp2b"],
    ];
    let got: Vec<Vec<&str>> = lib.classes().iter().map(|c| c.ids().collect()).collect();
    assert_eq!(got, want, "partition mismatch");

    // Intra-class coherence, exhaustively.
    for class in lib.classes() {
        let members = class.members();
        for (ai, a) in members.iter().enumerate() {
            for b in &members[ai + 1..] {
                let got = comp(&a.1, &b.1, &cfg).outcome;
                assert_eq!(
                    got,
                    CompOutcome::Equivalent,
                    "within-class {} vs {}",
                    a.0,
                    b.0
                );
            }
        }
    }

    // Inserting two more functions reproduces classify-from-scratch.
    let extra = [("lin3", "7*n"), ("quart", "n^4")];
    let mut incremental = lib;
    for (id, src) in extra {
        incremental = insert_function(incremental, id, f(src)).unwrap();
    }
    let mut all = base.clone();
    all.extend(extra);
    let scratch = classify(fns(&all), &cfg).unwrap();
    let shape = |lib: &ordo_core::ClassifiedLibrary| -> Vec<Vec<String>> {
        lib.classes()
            .iter()
            .map(|c| {
                let mut ids: Vec<String> = c.ids().map(str::to_owned).collect();
                ids.sort();
                ids
            })
            .collect()
    };
    assert_eq!(shape(&incremental), shape(&scratch), "insert vs reclassify");

    let elapsed = clock.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "criterion took {elapsed:?}, budget is 30 s"
    );
    println!(
        "acceptance criterion 4: PASS — 5-class partition matches the oracle, intra-class \
         pairs all <1>, insertion equals reclassification in {elapsed:?}"
    );
}

/// Deterministic in-test PRNG (SplitMix64).
struct SplitMix64(u64);

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

const OPERATOR_REGISTRY: &str = r#"{
    "services": [
        {"id": "add", "operation": "+", "arity": 2, "impl": "p1 + p2"},
        {"id": "sub", "operation": "-", "arity": 2, "impl": "p1 - p2"},
        {"id": "mul", "operation": "*", "arity": 2, "impl": "p1 * p2"},
        {"id": "div", "operation": "/", "arity": 2, "impl": "p1 / p2"},
        {"id": "pow", "operation": "^", "arity": 2, "impl": "p1 ^ p2"},
        {"id": "neg", "operation": "-", "arity": 1, "impl": "-p1"}
    ]
}"#;

fn random_operator_expr(rng: &mut SplitMix64, depth: usize) -> Expr {
    if depth == 0 || rng.below(4) == 0 {
        return match rng.below(3) {
            0 => Expr::var("x"),
            1 => Expr::var("y"),
            _ => Expr::number((1 + rng.below(5)) as f64),
        };
    }
    let op = match rng.below(5) {
        0 => BinaryOp::Add,
        1 => BinaryOp::Sub,
        2 => BinaryOp::Mul,
        3 => BinaryOp::Div,
        _ => BinaryOp::Pow,
    };
    Expr::binary(
        op,
        random_operator_expr(rng, depth - 1),
        random_operator_expr(rng, depth - 1),
    )
}

/// Criterion 5 — plans over a complete operator registry agree with
/// direct evaluation at random bindings.
#[test]
fn criterion_5_composition_soundness() {
    let reg = Registry::from_json(OPERATOR_REGISTRY, &cfg()).unwrap();
    let mut rng = SplitMix64(0x5EED_CAB1E);
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < 10 {
        attempts += 1;
        assert!(attempts < 1000, "rejection sampling runaway");
        let e = random_operator_expr(&mut rng, 3);

        // Reject expressions that are not evaluable at a probe point, so
        // every accepted case tests real arithmetic.
        let mut probe = HashMap::new();
        probe.insert("x".to_owned(), 1.25);
        probe.insert("y".to_owned(), 2.5);
        if eval(&e, &probe, EvalMode::Linear).is_err() {
            continue;
        }

        let plan = compose(&e, &reg).unwrap_or_else(|err| panic!("compose {e}: {err}"));
        let mut points = 0;
        let mut tries = 0;
        while points < 5 {
            tries += 1;
            assert!(tries < 1000, "binding sampling runaway for {e}");
            let mut b = HashMap::new();
            b.insert("x".to_owned(), 0.5 + 4.0 * rng.unit());
            b.insert("y".to_owned(), 0.5 + 4.0 * rng.unit());
            let Ok(want) = eval(&e, &b, EvalMode::Linear) else {
                continue;
            };
            let got = execute_plan(&plan, &b).unwrap_or_else(|err| panic!("execute {e}: {err}"));
            assert!(
                (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                "{e} at {b:?}: plan {got} vs eval {want}"
            );
            points += 1;
        }
        accepted += 1;
    }
    println!(
        "acceptance criterion 5: PASS — 10 random operator expressions x 5 bindings agree \
         with direct evaluation within 1e-9 relative"
    );
}

const TAYLOR_REGISTRY: &str = r#"{
    "services": [
        {"id": "add", "operation": "+", "arity": 2, "impl": "p1 + p2"},
        {"id": "sub", "operation": "-", "arity": 2, "impl": "p1 - p2"},
        {"id": "mul", "operation": "*", "arity": 2, "impl": "p1 * p2"},
        {"id": "div", "operation": "/", "arity": 2, "impl": "p1 / p2"},
        {"id": "pow", "operation": "^", "arity": 2, "impl": "p1 ^ p2"}
    ],
    "formulas": [
        {"id": "taylor_sin", "lhs": "sin(?x)", "rhs": "?x - ?x^3/6",
         "error": "abs(?x)^5/120", "validity": "1 - abs(?x)"}
    ]
}"#;

/// Criterion 6 — the Taylor cascade produces an Approx plan whose value
/// stays within the instantiated error bound of the true value.
#[test]
fn criterion_6_cascade_and_approximation_bound() {
    let reg = Registry::from_json(TAYLOR_REGISTRY, &cfg()).unwrap();
    let e = parse("sin(x) + x^2").unwrap();
    let plan = compose(&e, &reg).unwrap();

    let has_approx = match plan.root() {
        PlanNode::Invoke { args, .. } => args
            .iter()
            .any(|a| matches!(a, PlanNode::Approx { formula, .. } if formula == "taylor_sin")),
        _ => false,
    };
    assert!(
        has_approx,
        "plan lacks the Approx node: {}",
        emit_plan(&plan)
    );
    assert_eq!(plan.errors().len(), 1);

    for x in [0.05, 0.1, 0.2] {
        let mut b = HashMap::new();
        b.insert("x".to_owned(), x);
        let got = execute_plan(&plan, &b).unwrap();
        let truth = x.sin() + x * x;
        let oracle_bound = x.powi(5) / 120.0;
        // The plan's own instantiated error expression must equal the
        // hand-derived oracle bound…
        let stated = eval(&plan.errors()[0].error, &b, EvalMode::Linear).unwrap();
        assert!(
            (stated - oracle_bound).abs() <= 1e-12 * oracle_bound,
            "x={x}: stated bound {stated} vs oracle {oracle_bound}"
        );
        // …and the actual deviation must stay within it.
        assert!(
            (got - truth).abs() <= oracle_bound,
            "x={x}: |{got} - {truth}| > {oracle_bound}"
        );
    }
    println!(
        "acceptance criterion 6: PASS — Approx plan within the instantiated Taylor bound \
         at x in {{0.05, 0.1, 0.2}}"
    );
}

/// Criterion 7 — among numeric candidates, the composed plan invokes the
/// one with the lowest asymptotic complexity.
#[test]
fn criterion_7_lowest_complexity_selection() {
    let src = r#"{
        "numeric_services": [
            {"id": "sin_quadratic", "operation": "sin", "arity": 1,
             "complexity": "n^2", "impl": "p1 - p1^3/6"},
            {"id": "sin_loglinear", "operation": "sin", "arity": 1,
             "complexity": "n*log2(n)", "impl": "p1 - p1^3/6 + p1^5/120"}
        ]
    }"#;
    let reg = Registry::from_json(src, &cfg()).unwrap();
    let plan = compose(&parse("sin(x)").unwrap(), &reg).unwrap();
    match plan.root() {
        PlanNode::NumericInvoke {
            service,
            complexity,
            ..
        } => {
            assert_eq!(service, "sin_loglinear");
            assert_eq!(complexity.to_string(), "n*log2(n)");
        }
        other => panic!("expected NumericInvoke, got {other:?}"),
    }
    println!(
        "acceptance criterion 7: PASS — plan invokes the n*log2(n) candidate, not the n^2 one"
    );
}

/// Piecewise fixture: linear inside the window [10, 20], factorial
/// outside, blended continuously so it is expressible in the grammar.
const PIECEWISE_FIXTURE: &str = "max(0, min(min(n - 9.5, 20.5 - n), 1))*n \
                   + (1 - max(0, min(min(n - 9.5, 20.5 - n), 1)))*factorial(n)";

/// Oscillating fixture: an erratically spiking exponential, maxed with n.
const OSCILLATING_FIXTURE: &str = "max(1000 + floor(2^ceil(n*sin(mod(n, 1000)))), n)";

/// Criterion 8 — the pathological fixtures terminate inside the
/// documented evaluation budget and produce a result without error.
#[test]
fn criterion_8_pathological_robustness() {
    let cfg = cfg();
    let quad = f("n^2");
    for (name, src) in [
        ("piecewise", PIECEWISE_FIXTURE),
        ("oscillating", OSCILLATING_FIXTURE),
    ] {
        let pathological = f(src);
        let result = comp(&pathological, &quad, &cfg);
        let budget = cfg.eval_budget(result.trace.roots.len());
        assert!(
            result.trace.evaluations <= budget,
            "{name}: {} evaluations exceed budget {budget}",
            result.trace.evaluations
        );
        // Any categorical outcome is acceptable; reaching here without a
        // panic or an unbounded loop is the claim under test.
        let _ = result.outcome;
    }
    println!(
        "acceptance criterion 8: PASS — piecewise and oscillating fixtures vs n^2 terminate \
         within the evaluation budget"
    );
}

/// Everything the suite emits as JSON, concatenated.
fn suite_json_outputs() -> String {
    let cfg = cfg();
    let mut out = String::new();

    let family = reference_family();
    for (f1, _, _) in &family {
        for (f2, _, _) in &family {
            let result = comp(f1, f2, &cfg);
            out.push_str(&serde_json::to_string(&result).unwrap());
            out.push('\n');
        }
    }

    let reg = Registry::from_json(TAYLOR_REGISTRY, &cfg).unwrap();
    for src in ["sin(x) + x^2", "x^2 - 1/x", "sin(0.5)"] {
        let plan = compose(&parse(src).unwrap(), &reg).unwrap();
        out.push_str(&emit_plan(&plan));
        out.push('\n');
    }

    let fns = vec![
        ("lin".to_owned(), f("n")),
        ("nlogn".to_owned(), f("n*log2(n)")),
        ("quad".to_owned(), f("n^2")),
    ];
    let lib = classify(fns, &cfg).unwrap();
    out.push_str(&format!("{lib}\n"));
    out
}

/// Criterion 9 — two runs of the suite's JSON-producing surface are
/// byte-identical.
#[test]
fn criterion_9_determinism() {
    let first = suite_json_outputs();
    let second = suite_json_outputs();
    assert_eq!(first, second, "suite outputs differ between runs");
    assert!(!first.is_empty());
    println!(
        "acceptance criterion 9: PASS — {} bytes of JSON output byte-identical across runs",
        first.len()
    );
}
