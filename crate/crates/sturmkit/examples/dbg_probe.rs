use sturmkit::invariants::{build_sturm_data, InvariantOptions};
use sturmkit::problem::ProblemSpec;
use sturmkit::shooting::{find_equilibria, scan_curve, ShootOptions};
use sturmkit::sim::{heteroclinic_probe, SimOptions};

fn main() {
    let spec = ProblemSpec::chafee_infante(2.0).unwrap();
    let shoot = ShootOptions::default();
    let curve = scan_curve(&spec, 64, &shoot).unwrap();
    let mut eqs = find_equilibria(&spec, &curve, &shoot).unwrap();
    build_sturm_data(&spec, &curve, &mut eqs, &shoot, &InvariantOptions::default()).unwrap();
    for eps in [1e-2, 1e-3, 3e-2, 1e-1] {
        let opts = SimOptions { m: 257, eps, ..SimOptions::default() };
        for sign in [1, -1] {
            match heteroclinic_probe(&spec, &eqs[2], 1, sign, &eqs, &opts) {
                Ok(r) => println!(
                    "eps={eps:.0e} sign {sign:+}: target e{} t={:.2} min_dist={:?}",
                    r.target,
                    r.transit_time,
                    r.min_distance.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>()
                ),
                Err(e) => println!("eps={eps:.0e} sign {sign:+}: {e}"),
            }
        }
    }
}
