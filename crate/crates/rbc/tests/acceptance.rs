//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them all).

use std::process::Command;
use std::time::Instant;

use num_rational::Ratio;

use rbc::games::bounds::{chshn_bounds, leq_bound, recursive_bound, recursive_bound_pow2};
use rbc::games::product_game;
use rbc::protocols::audits::hiding_audit_multiround;
use rbc::protocols::multiround::{multiround_run, MultiroundParams};
use rbc::protocols::sbgkw::sbgkw_binding_bruteforce;
use rbc::qcommit::{device_requirement, epsilon_bound, multiphoton_epsilon, BasisPair};
use rbc::spacetime::{light_travel_time, max_commitment_time};

fn pass(criterion: u32, detail: &str) {
    println!("ACCEPTANCE {criterion:2} PASS: {detail}");
}

#[test]
fn criterion_01_multiround_experimental_bound() {
    let start = Instant::now();
    let series = recursive_bound_pow2(512, 5).expect("valid parameters");
    let elapsed = start.elapsed();
    let epsilon = series.last();
    assert!(
        (2.2e-10..=2.4e-10).contains(&epsilon),
        "epsilon {epsilon} outside [2.2e-10, 2.4e-10]"
    );
    assert!(
        elapsed.as_micros() < 1000,
        "bound computation took {elapsed:?}, budget 1 ms"
    );

    // the CLI reports the same number
    let output = Command::new(env!("CARGO_BIN_EXE_rbc"))
        .args(["bound", "multiround", "--n", "512", "--m", "5"])
        .output()
        .expect("binary runs");
    assert!(output.status.success());
    let report: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("report is JSON");
    let cli_epsilon = report["epsilon"].as_f64().unwrap();
    assert_eq!(cli_epsilon, epsilon);
    pass(
        1,
        &format!("bound multiround --n 512 --m 5 -> epsilon = {epsilon:.4e} in {elapsed:?}"),
    );
}

#[test]
fn criterion_02_two_round_quantum_bound() {
    let epsilon = chshn_bounds(512).quantum_binding_epsilon;
    let target = 2f64.sqrt() * 2f64.powi(-256);
    assert!(
        (epsilon - target).abs() <= target * 5e-3,
        "epsilon {epsilon} differs from sqrt(2) 2^-256 = {target} beyond 3 significant figures"
    );
    assert!((epsilon / 1.21e-77 - 1.0).abs() < 0.02);
    pass(2, &format!("chshn quantum epsilon(512) = {epsilon:.3e} = sqrt(2) 2^-256"));
}

#[test]
fn criterion_03_error_tolerance_threshold() {
    let pair = BasisPair::bb84();
    let lambda1 = pair.lambda1();
    assert!(
        (lambda1 - 0.1464).abs() <= 1e-4,
        "lambda1 = {lambda1}, expected 0.1464 +/- 0.0001"
    );

    // the secure region empties exactly as err crosses lambda1 (1e-4 grid)
    let mut err = 0.1400f64;
    while err <= 0.1520 {
        let (feasible, _) = device_requirement(err, 1.0, &pair);
        assert_eq!(
            feasible,
            err < lambda1,
            "flip mismatch at err = {err} (lambda1 = {lambda1})"
        );
        err += 1e-4;
    }
    pass(3, &format!("lambda1 = {lambda1:.6}; secure region flips exactly at err = lambda1"));
}

#[test]
fn criterion_04_light_travel_figures() {
    let one_way_us = light_travel_time(131.0).unwrap() * 1e6;
    assert!(
        (one_way_us - 437.0).abs() <= 1.0,
        "131 km one-way = {one_way_us} us, expected 437 +/- 1"
    );

    let earth = max_commitment_time(12_742.0).unwrap();
    assert!(
        (earth.milliseconds - 21.2).abs() <= 0.1,
        "max commitment for 12742 km = {} ms, expected 21.2 +/- 0.1",
        earth.milliseconds
    );

    // six-round run at 131 km spacing: 5 sustain units of s/((1+eps) c)
    let mut params = MultiroundParams::new(512, 5, 1, 42);
    params.distance_km = Some(131.0);
    let run = multiround_run(&params).unwrap();
    assert!(run.outcome.accepted);
    let duration_ms = run.outcome.duration_ms.unwrap();
    assert!(
        (duration_ms - 2.18).abs() <= 0.01,
        "6-round duration = {duration_ms} ms, expected 2.18 +/- 0.01"
    );
    pass(
        4,
        &format!(
            "131 km -> {one_way_us:.1} us; 12742 km -> {:.2} ms; 6-round run -> {duration_ms:.3} ms",
            earth.milliseconds
        ),
    );
}

#[test]
fn criterion_05_bruteforce_vs_bound() {
    let start = Instant::now();
    for (q, m) in [(2u64, 1usize), (2, 2), (2, 3), (4, 1), (4, 2)] {
        let game = product_game(q, m).unwrap();
        let result = game.classical_value_bruteforce().unwrap();
        let bound = recursive_bound(q as f64, m).unwrap().last();
        assert!(
            leq_bound(result.value, bound),
            "omega({q},{m}) = {} exceeds c_m = {bound}",
            result.value
        );
        if m == 1 {
            assert_eq!(result.value, Ratio::new(1, q), "omega_1 must equal 1/q");
        }
        if (q, m) == (2, 2) {
            assert_eq!(result.value, Ratio::new(3, 4));
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "enumeration took {elapsed:?}");
    pass(
        5,
        &format!("omega <= c_m for (2,1..3), (4,1..2); omega_1 = 1/q; omega_2(2) = 3/4 in {elapsed:?}"),
    );
}

#[test]
fn criterion_06_hiding_exactness() {
    let start = Instant::now();
    let audit = hiding_audit_multiround(1, 2).unwrap();
    let elapsed = start.elapsed();
    assert!(audit.exactly_uniform, "a transcript distribution deviated from 2^-nt");
    assert!(elapsed.as_secs() < 10, "audit took {elapsed:?}");
    pass(
        6,
        &format!(
            "all {} deterministic challenger scripts give exactly uniform transcripts ({elapsed:?})",
            audit.scripts_checked
        ),
    );
}

#[test]
fn criterion_07_sbgkw_binding_saturation() {
    for n in 1..=3usize {
        let result = sbgkw_binding_bruteforce(n).unwrap();
        assert_eq!(
            result.max_p0_plus_p1,
            Ratio::new(1, 1) + Ratio::new(1u64, 1 << n),
            "max p0 + p1 at n = {n}"
        );
        assert!(result.witness_is_all_zero(), "witness at n = {n} is not all-zeros");
    }
    pass(7, "max p0 + p1 = 1 + 2^-n exactly at n = 1, 2, 3; witness = all-zeros strategy");
}

#[test]
fn criterion_08_certification_floor() {
    use rbc::certify::{
        attack_joint_statevector, classical_d, violation_floor, AttackJoint,
        CertificationAssignment, CommitFunction,
    };

    // closed form vs statevector oracle at n = 1..3
    for n in 1..=3usize {
        let q = 1u64 << n;
        let joint = AttackJoint::new(n);
        for b in 0..q {
            let oracle = attack_joint_statevector(n, b).unwrap();
            for x1 in 0..q {
                for x2 in 0..q {
                    let closed = joint.pr_x2(x1, b, x2) / q as f64;
                    let got = oracle[(x1 * q + x2) as usize];
                    assert!(
                        (closed - got).abs() < 1e-12,
                        "n={n} b={b}: |{closed} - {got}| >= 1e-12"
                    );
                }
            }
        }
    }

    // violation floor >= 1/4 over the exhaustive deterministic family, n <= 2
    for n in 1..=2usize {
        let joint = AttackJoint::new(n);
        let cells = 1usize << (2 * n);
        for code in 0..(1u64 << cells) {
            let p1: Vec<f64> = (0..cells)
                .map(|i| if code >> i & 1 == 1 { 1.0 } else { 0.0 })
                .collect();
            let d = CertificationAssignment::from_conditional(n, p1).unwrap();
            assert!(violation_floor(&joint, &d).unwrap() >= 0.25 - 1e-12);
        }
    }

    // classical construction guarantee, exhaustive at n = 2
    let n = 2;
    let q = 1u64 << n;
    let epsilon = (-(n as f64) / 2.0).exp2();
    for code in 0..q.pow(q as u32) {
        let mut c = code;
        let table: Vec<u64> = (0..q)
            .map(|_| {
                let v = c % q;
                c /= q;
                v
            })
            .collect();
        let cert = classical_d(&CommitFunction::new(n, table).unwrap());
        assert!(cert.worst[0] <= epsilon + 1e-15);
        assert!(cert.worst[1] <= epsilon + 1e-15);
    }
    pass(
        8,
        "attack joint matches statevector to 1e-12 (n <= 3); floor >= 1/4 for every D (n <= 2); \
         classical D <= 2^(-n/2) exhaustively at n = 2",
    );
}

#[test]
fn criterion_09_chernoff_dominance_and_multiphoton() {
    let pair = BasisPair::bb84();
    let lambda1 = pair.lambda1();

    // exact binomial tail never exceeds its Chernoff relaxation
    let mut checked = 0u32;
    for n in 1..=200usize {
        let mut delta = 0.0f64;
        while delta < lambda1 {
            let b = epsilon_bound(n, delta, &pair).unwrap();
            assert!(
                b.exact_log <= b.chernoff_log + 1e-12,
                "n={n} delta={delta}: exact exceeds Chernoff"
            );
            checked += 1;
            delta += 0.01;
        }
    }

    // weak-coherent bound is monotone in mu ...
    let (n, gamma, delta) = (1500usize, 0.5f64, 0.05f64);
    let mut prev = 0.0;
    for i in 0..25 {
        let mu = 1e-4 * 10f64.powf(i as f64 / 6.0);
        let eps = multiphoton_epsilon(n, gamma, delta, mu, &pair).unwrap().epsilon;
        assert!(eps + 1e-15 >= prev, "epsilon decreased at mu = {mu}");
        prev = eps;
    }

    // ... and collapses onto the ideal bound as mu -> 0
    let m = (gamma * n as f64).ceil() as usize;
    let ideal = epsilon_bound(m, delta, &pair).unwrap().chernoff;
    let tiny_mu = multiphoton_epsilon(n, gamma, delta, 1e-9, &pair).unwrap().epsilon;
    assert!(
        (tiny_mu - ideal).abs() < 1e-10,
        "mu -> 0 limit: |{tiny_mu} - {ideal}| >= 1e-10"
    );
    pass(
        9,
        &format!("exact <= Chernoff on {checked} grid points; multiphoton monotone and mu->0 consistent"),
    );
}

#[test]
fn criterion_10_simulate_determinism() {
    let invocations: [&[&str]; 4] = [
        &[
            "simulate", "multiround", "--n", "16", "--m", "4", "--d", "1", "--seed",
            "20240917", "--distance-km", "131",
        ],
        &["simulate", "sbgkw", "--n", "12", "--d", "0", "--seed", "7", "--open-at", "3/2"],
        &["simulate", "secret-sharing", "--d", "1", "--seed", "99"],
        &["simulate", "dot", "--m0", "a3", "--m1", "5c", "--n", "8", "--c", "1", "--seed", "4"],
    ];
    for args in invocations {
        let run = |_: u32| {
            let output = Command::new(env!("CARGO_BIN_EXE_rbc"))
                .args(args)
                .output()
                .expect("binary runs");
            assert!(output.status.success(), "{args:?} failed");
            output.stdout
        };
        let first = run(1);
        let second = run(2);
        assert_eq!(first, second, "{args:?} not byte-identical across runs");
        assert!(!first.is_empty());
    }
    pass(10, "all four simulate invocations byte-identical across repeated runs");
}
