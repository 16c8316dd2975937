//! Acceptance suite: one test per criterion, each printing a pass line with
//! its elapsed time. Expected values are the published tables of the cubic
//! example (integer-exact) and oracle cross-checks at the stated tolerances.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sturmkit::connection::{adjacent, build_connection_graph, Provenance};
use sturmkit::invariants::{
    build_sturm_data, morse_index, spectral_morse_oracle, zero_number_profiles,
    zero_number_shooting, InvariantOptions, SturmData,
};
use sturmkit::problem::ProblemSpec;
use sturmkit::shooting::{find_equilibria, scan_curve, Equilibrium, ShootOptions, ShootingCurve};
use sturmkit::sim::{
    cosine_ic, evolve, heteroclinic_probe, is_nonincreasing, zero_number_series, SimOptions,
};
use sturmkit::ConnectionGraph;

struct Instance {
    spec: ProblemSpec,
    curve: ShootingCurve,
    eqs: Vec<Equilibrium>,
    data: SturmData,
    graph: ConnectionGraph,
}

fn compute(spec: ProblemSpec) -> Instance {
    let opts = ShootOptions::default();
    let curve = scan_curve(&spec, 64, &opts).expect("scan");
    let mut eqs = find_equilibria(&spec, &curve, &opts).expect("roots");
    let data = build_sturm_data(&spec, &curve, &mut eqs, &opts, &InvariantOptions::default())
        .expect("sturm data");
    let a_values: Vec<f64> = eqs.iter().map(|e| e.a).collect();
    let graph = build_connection_graph(&data, &a_values).expect("graph");
    Instance { spec, curve, eqs, data, graph }
}

fn chafee_infante(lambda: f64) -> Instance {
    compute(ProblemSpec::chafee_infante(lambda).unwrap())
}

fn edge_set(graph: &ConnectionGraph) -> BTreeSet<(usize, usize)> {
    graph.edges.iter().map(|e| (e.source, e.target)).collect()
}

fn pass(name: &str, t0: Instant, budget: Duration) {
    let elapsed = t0.elapsed();
    println!("{name}: PASS ({elapsed:.2?})");
    assert!(elapsed < budget, "{name} exceeded its runtime budget: {elapsed:.2?}");
}

/// Expected zero-number matrix entries (j, k, z) of the five-equilibrium
/// regime.
const ZMAT_FIVE: &[(usize, usize, i64)] = &[
    (1, 2, 0),
    (1, 3, 0),
    (1, 4, 0),
    (1, 5, 0),
    (2, 3, 1),
    (2, 4, 1),
    (2, 5, 0),
    (3, 4, 1),
    (3, 5, 0),
    (4, 5, 0),
];

/// Expected zero-number matrix of the seven-equilibrium regime.
fn zmat_seven() -> Vec<(usize, usize, i64)> {
    let mut table = Vec::new();
    for j in 2..=7 {
        table.push((1, j, 0));
    }
    for j in 3..=6 {
        table.push((2, j, 1));
    }
    table.push((2, 7, 0));
    table.extend_from_slice(&[(3, 4, 2), (3, 5, 2), (3, 6, 1), (3, 7, 0)]);
    table.extend_from_slice(&[(4, 5, 2), (4, 6, 1), (4, 7, 0)]);
    table.extend_from_slice(&[(5, 6, 1), (5, 7, 0)]);
    table.push((6, 7, 0));
    table
}

#[test]
fn criterion_1_three_equilibria_below_first_bifurcation() {
    let t0 = Instant::now();
    let inst = chafee_infante(0.5);

    assert_eq!(inst.eqs.len(), 3);
    for (e, exact) in inst.eqs.iter().zip([-1.0, 0.0, 1.0]) {
        assert!((e.a - exact).abs() < 1e-8, "a_{} = {} (expected {})", e.id, e.a, exact);
    }
    assert_eq!(inst.data.morse, vec![0, 1, 0]);
    assert_eq!(inst.data.sigma, vec![1, 2, 3]);
    let edges = edge_set(&inst.graph);
    assert_eq!(edges, BTreeSet::from([(2, 1), (2, 3)]));
    pass("criterion 1 (lambda = 0.5)", t0, Duration::from_secs(5));
}

#[test]
fn criterion_2_five_equilibrium_regime_tables() {
    let t0 = Instant::now();
    let inst = chafee_infante(2.0);

    assert_eq!(inst.eqs.len(), 5);
    assert_eq!(inst.data.sigma, vec![1, 4, 3, 2, 5], "sigma must be the transposition (2 4)");
    assert_eq!(inst.data.morse, vec![0, 1, 2, 1, 0]);

    for &(j, k, z) in ZMAT_FIVE {
        assert_eq!(inst.data.zmat[j - 1][k - 1], z, "z(e{j}-e{k})");
    }
    for j in 1..=5usize {
        for k in j + 1..=5 {
            let expected = if k == 5 && j >= 2 { -1 } else { 0 };
            assert_eq!(inst.data.rcounts[j - 1][k - 1], expected, "r({j},{k})");
        }
    }

    let hasse: BTreeSet<(usize, usize)> = inst.graph.hasse_edges.iter().copied().collect();
    assert_eq!(
        hasse,
        BTreeSet::from([(3, 2), (3, 4), (2, 1), (2, 5), (4, 1), (4, 5)])
    );
    let transitive: BTreeSet<(usize, usize)> = inst
        .graph
        .edges
        .iter()
        .filter(|e| e.provenance == Provenance::Cascade)
        .map(|e| (e.source, e.target))
        .collect();
    assert_eq!(transitive, BTreeSet::from([(3, 1), (3, 5)]));
    pass("criterion 2 (lambda = 2)", t0, Duration::from_secs(10));
}

#[test]
fn criterion_3_seven_equilibrium_regime_tables() {
    let t0 = Instant::now();
    let inst = chafee_infante(5.0);

    assert_eq!(inst.eqs.len(), 7);
    assert_eq!(inst.data.morse, vec![0, 1, 2, 3, 2, 1, 0]);
    for (j, k, z) in zmat_seven() {
        assert_eq!(inst.data.zmat[j - 1][k - 1], z, "z(e{j}-e{k})");
    }

    // signed crossing counts of the same regime
    let r_expect = |j: usize, k: usize| -> i64 {
        match (j, k) {
            (2, 7) => -1,
            (3, 6) => -1,
            (3, 7) => -2,
            (4, 6) => -1,
            (4, 7) => -2,
            (5, 6) => -1,
            (5, 7) => -2,
            (6, 7) => -1,
            _ => 0,
        }
    };
    for j in 1..=7usize {
        for k in j + 1..=7 {
            assert_eq!(inst.data.rcounts[j - 1][k - 1], r_expect(j, k), "r({j},{k})");
        }
    }

    let hasse: BTreeSet<(usize, usize)> = inst.graph.hasse_edges.iter().copied().collect();
    assert_eq!(
        hasse,
        BTreeSet::from([
            (4, 3),
            (4, 5),
            (3, 2),
            (3, 6),
            (5, 2),
            (5, 6),
            (2, 1),
            (2, 7),
            (6, 1),
            (6, 7)
        ])
    );
    pass("criterion 3 (lambda = 5)", t0, Duration::from_secs(15));
}

/// Ten odd cubics with random coefficients, with the effective parameter
/// lambda*c1 drawn from (0.1, 8.8) away from the bifurcation values 1 and 4.
fn random_cubics() -> Vec<ProblemSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut specs = Vec::new();
    while specs.len() < 10 {
        let c1: f64 = rng.random_range(0.8..1.2);
        let c3: f64 = rng.random_range(0.5..1.5);
        let eff: f64 = rng.random_range(0.1..8.8);
        if (eff - 1.0).abs() < 0.05 || (eff - 4.0).abs() < 0.05 {
            continue;
        }
        specs.push(ProblemSpec::odd_cubic(eff / c1, c1, c3).unwrap());
    }
    specs
}

#[test]
fn criterion_4_oracle_equivalence() {
    let t0 = Instant::now();
    let mut instances: Vec<Instance> =
        vec![chafee_infante(0.5), chafee_infante(2.0), chafee_infante(5.0)];
    instances.extend(random_cubics().into_iter().map(compute));

    let opts = ShootOptions::default();
    let mut pairs_checked = 0usize;
    let mut morse_checked = 0usize;
    for inst in &instances {
        for e in &inst.eqs {
            let angle = morse_index(e).expect("angle formula");
            let spectral = spectral_morse_oracle(&inst.spec, e, 257).expect("spectral oracle");
            assert_eq!(
                angle, spectral.positive_count,
                "Morse disagreement at {} e{}",
                inst.spec.name, e.id
            );
            morse_checked += 1;
        }
        let n = inst.eqs.len();
        for j in 1..=n {
            for k in j + 1..=n {
                let z_profile = zero_number_profiles(&inst.eqs[j - 1], &inst.eqs[k - 1])
                    .expect("profile oracle");
                let (z_shoot, _r) =
                    zero_number_shooting(&inst.spec, &inst.curve, &inst.eqs, j, k, &opts)
                        .expect("shooting formula");
                assert_eq!(
                    z_profile, z_shoot,
                    "zero-number disagreement at {} pair ({j},{k})",
                    inst.spec.name
                );
                pairs_checked += 1;
            }
        }
        assert!(inst.data.agreement.iter().flatten().all(|&a| a));
    }
    println!(
        "criterion 4: {} pairs and {} Morse indices cross-checked, zero disagreements",
        pairs_checked, morse_checked
    );
    pass("criterion 4 (oracle equivalence)", t0, Duration::from_secs(600));
}

#[test]
fn criterion_5_wolfrum_checksum() {
    let t0 = Instant::now();
    let mut instances: Vec<Instance> =
        vec![chafee_infante(0.5), chafee_infante(2.0), chafee_infante(5.0)];
    instances.extend(random_cubics().into_iter().map(compute));

    for inst in &instances {
        // direct adjacency edges, recomputed here
        let a_values: Vec<f64> = inst.eqs.iter().map(|e| e.a).collect();
        let n = inst.data.n;
        let mut direct = BTreeSet::new();
        for s in 1..=n {
            for t in 1..=n {
                if s != t
                    && inst.data.morse[s - 1] > inst.data.morse[t - 1]
                    && adjacent(s, t, &inst.data, &a_values)
                {
                    direct.insert((s, t));
                }
            }
        }
        // transitive closure of the hasse edges, recomputed here
        let mut closure: BTreeSet<(usize, usize)> =
            inst.graph.hasse_edges.iter().copied().collect();
        loop {
            let mut grew = false;
            let snapshot: Vec<(usize, usize)> = closure.iter().copied().collect();
            for &(a, b) in &snapshot {
                for &(c, d) in &snapshot {
                    if b == c && closure.insert((a, d)) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        assert_eq!(direct, closure, "Wolfrum mismatch for {}", inst.spec.name);
        assert_eq!(direct, edge_set(&inst.graph));
    }
    pass("criterion 5 (Wolfrum checksum)", t0, Duration::from_secs(600));
}

#[test]
fn criterion_6_dropping_lemma_on_random_pairs() {
    let t0 = Instant::now();
    let opts = SimOptions { m: 257, snapshot_dt: 0.1, ..SimOptions::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    for lambda in [0.5, 2.0, 5.0] {
        let spec = ProblemSpec::chafee_infante_semilinear(lambda).unwrap();
        // pool of random low-mode states, paired 20 ways
        let ics: Vec<Vec<f64>> = (0..10)
            .map(|_| {
                let coeffs: Vec<f64> = (0..5)
                    .map(|k| rng.random_range(-1.0..1.0) * 0.8 / (1 + k * k) as f64)
                    .collect();
                cosine_ic(&coeffs, opts.m)
            })
            .collect();
        let trajectories: Vec<_> = ics
            .par_iter()
            .map(|ic| evolve(&spec, ic, 20.0, &opts).expect("evolution"))
            .collect();

        let mut all_pairs: Vec<(usize, usize)> =
            (0..10).flat_map(|i| (i + 1..10).map(move |j| (i, j))).collect();
        for i in (1..all_pairs.len()).rev() {
            all_pairs.swap(i, rng.random_range(0..=i));
        }
        let mut violations = 0;
        for &(i, j) in all_pairs.iter().take(20) {
            let series = zero_number_series(&trajectories[i], &trajectories[j]).unwrap();
            if !is_nonincreasing(&series) {
                violations += 1;
                eprintln!("violation at lambda={lambda} pair ({i},{j}): {series:?}");
            }
        }
        assert_eq!(violations, 0, "dropping lemma violated at lambda = {lambda}");
        println!("criterion 6: lambda = {lambda}: 20 pairs, zero violations");
    }
    pass("criterion 6 (dropping lemma)", t0, Duration::from_secs(1200));
}

/// Probe plan of the five-equilibrium regime: the mode-1 directions of the
/// center and the mode-0 directions of both saddles.
fn probe_targets(spec: &ProblemSpec, inst_eqs: &[Equilibrium], opts: &SimOptions) -> Vec<(usize, usize, i32, usize)> {
    let plan = [(3usize, 1usize), (2, 0), (4, 0)];
    let mut jobs = Vec::new();
    for (source, mode) in plan {
        for sign in [1i32, -1] {
            jobs.push((source, mode, sign));
        }
    }
    jobs.par_iter()
        .map(|&(source, mode, sign)| {
            let e = inst_eqs.iter().find(|e| e.id == source).expect("source exists");
            let report = heteroclinic_probe(spec, e, mode, sign, inst_eqs, opts)
                .expect("probe resolves");
            (source, mode, sign, report.target)
        })
        .collect()
}

fn check_probe_targets(results: &[(usize, usize, i32, usize)], graph: &ConnectionGraph) {
    let mut from_center: BTreeSet<usize> = BTreeSet::new();
    for &(source, mode, _sign, target) in results {
        assert!(
            graph.has_edge(source, target),
            "probe e{source} reached e{target}, which is not a successor"
        );
        if source == 3 && mode == 1 {
            from_center.insert(target);
        }
        if source == 2 || source == 4 {
            assert!(
                target == 1 || target == 5,
                "saddle probe from e{source} landed on e{target}"
            );
        }
    }
    assert_eq!(from_center, BTreeSet::from([2, 4]), "mode-1 probes must reach both saddles");
}

#[test]
fn criterion_7_heteroclinic_probes() {
    let t0 = Instant::now();
    let inst = compute(ProblemSpec::chafee_infante_semilinear(2.0).unwrap());
    let opts = SimOptions { m: 257, ..SimOptions::default() };
    let results = probe_targets(&inst.spec, &inst.eqs, &opts);
    check_probe_targets(&results, &inst.graph);
    pass("criterion 7 (probes, lambda = 2)", t0, Duration::from_secs(60));
}

#[test]
fn criterion_8_fully_nonlinear_consistency() {
    let t0 = Instant::now();
    let opts = SimOptions { m: 257, ..SimOptions::default() };

    let semilinear = compute(ProblemSpec::chafee_infante_semilinear(2.0).unwrap());
    let mut expected = probe_targets(&semilinear.spec, &semilinear.eqs, &opts);

    let fully = compute(ProblemSpec::chafee_infante(2.0).unwrap());
    let mut observed = probe_targets(&fully.spec, &fully.eqs, &opts);
    check_probe_targets(&observed, &fully.graph);

    expected.sort_unstable();
    observed.sort_unstable();
    assert_eq!(
        expected, observed,
        "the fully nonlinear equation must realize the same probe targets"
    );
    pass("criterion 8 (fully nonlinear form)", t0, Duration::from_secs(600));
}
