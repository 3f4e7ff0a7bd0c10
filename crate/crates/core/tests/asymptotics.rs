use pmlab::analysis::leading_asymptotics_check;
use pmlab::fsi::{self, SimConfig};
use pmlab::interdiffusion::{self, geometric_times, SpectralConfig};
use pmlab::model::{compute_masses, eigen_structure, FluidParams, MassPair};
use pmlab::scenario;

fn ratio_band(name: &str, amp: f64) -> (MassPair, pmlab::analysis::LeadingAsymptotics) {
    let p = FluidParams::new(1.0, 1.0).unwrap();
    let init = scenario::build(name, amp).unwrap();
    let masses = compute_masses(&init, &eigen_structure(&p)).unwrap();
    let traj = fsi::run(&init, &SimConfig::for_horizon(&p, 500.0, scenario::radius(name)), &p).unwrap();
    let mut sc = SpectralConfig::for_horizon(&p, 500.0, 0.1);
    sc.snapshot_times = geometric_times(100.0, 500.0, 4);
    let xi1 = interdiffusion::solve_xi(1, &masses, &p, &sc).unwrap();
    let xi2 = interdiffusion::solve_xi(2, &masses, &p, &sc).unwrap();
    (masses, leading_asymptotics_check(&traj.v_series, &xi1, &xi2, &p, (100.0, 500.0)).unwrap())
}

#[test]
fn velocity_follows_wave_prediction() {
    let (m, full) = ratio_band("generic", 0.05);
    assert!(m.m1 * m.m1 > m.m2 * m.m2);
    assert!(!full.degenerate);
    assert!(full.ratio_min >= 0.7 && full.ratio_max <= 1.3, "{full:?}");
    let (_, half) = ratio_band("generic", 0.025);
    let dist = |r: &pmlab::analysis::LeadingAsymptotics| r.rows.iter().map(|x| (x.3 - 1.0).abs()).fold(0.0, f64::max);
    assert!(dist(&half) < dist(&full), "halving: {} vs {}", dist(&half), dist(&full));
}

#[test]
fn opposite_masses_give_degenerate_prediction() {
    let (m, r) = ratio_band("antisymmetric", 0.05);
    assert!((m.m1 + m.m2).abs() < 1e-12 * m.m1.abs().max(1e-300));
    assert!(r.degenerate, "{:?}", &r.rows[..2]);
}
