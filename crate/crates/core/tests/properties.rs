use pmlab::analysis::{decade_rule, fit_decay, DecayKind};
use pmlab::cli::{apply_file, RunConfig};
use pmlab::diffusion::{theta_mass, DiffusionWave};
use pmlab::lemmas::{lemma_preconditions, Lemma, LemmaParams};
use pmlab::model::*;
use pmlab::weights::*;
use pmlab::Error;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = FluidParams> {
    (0.2f64..6.0, 0.05f64..8.0).prop_map(|(g, n)| FluidParams::new(g, n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvectors_biorthogonal(p in params()) {
        prop_assert!(eigen_structure(&p).residual(&p) < 1e-12);
        prop_assert!((p.c * p.c - p.gamma).abs() < 1e-14 * p.gamma);
        prop_assert!(p.p2 > 0.0);
    }

    #[test]
    fn projection_round_trip(p in params(), v in prop::collection::vec(-1.0f64..1.0, 1..40), seed in 0.0f64..1.0) {
        let eig = eigen_structure(&p);
        let u: Vec<f64> = v.iter().enumerate().map(|(k, a)| (a * 3.0 + seed + k as f64).sin()).collect();
        let (a, b) = characteristic_project(&v, &u, &eig).unwrap();
        let (v2, u2) = characteristic_reconstruct(&a, &b, &eig).unwrap();
        for k in 0..v.len() {
            prop_assert!((v2[k] - v[k]).abs() < 1e-12 && (u2[k] - u[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn nonlinearity_is_quadratic(p in params(), s in prop::sample::select(vec![-1.0f64, 1.0])) {
        let target = -p.p2 / 2.0;
        let err = |w: f64| (nonlinear_n(&[1.0 + w], &[0.0], &p).unwrap()[0] / (w * w) - target).abs();
        // the remainder is cubic, so the quotient error shrinks linearly in w
        let (e1, e2) = (err(s * 1e-2), err(s * 1e-3));
        prop_assert!(e2 < 0.2 * e1 + 1e-6, "{e1} {e2}");
        prop_assert!(e2 < 1e-2 * target.abs().max(1.0) * p.gamma.max(1.0).powi(2));
    }

    #[test]
    fn mass_identities(
        p in params(),
        a in -0.3f64..0.3, ca in -4.0f64..4.0, wa in 0.3f64..2.0,
        b in -0.3f64..0.3, cb in -4.0f64..4.0, wb in 0.3f64..2.0,
        big_v in -0.2f64..0.2,
    ) {
        let init = InitialData {
            v0_pert: Profile::Gaussian { amp: a, center: ca, width: wa },
            u0: Profile::Sum(vec![Profile::Gaussian { amp: b, center: cb, width: wb }, Profile::DGaussian { amp: a, center: -cb, width: wb }]),
            v0_mass: big_v,
        };
        let m = compute_masses(&init, &eigen_structure(&p)).unwrap();
        let (iv, iu) = profile_integrals(&init).unwrap();
        let two_pi = (2.0 * std::f64::consts::PI).sqrt();
        prop_assert!((iv - a * wa * two_pi).abs() < 1e-9);
        prop_assert!((iu - b * wb * two_pi).abs() < 1e-9);
        let sum = p.p2 / (2.0 * p.c * p.c) * (iu + big_v);
        let diff = -p.p2 / (2.0 * p.c) * iv;
        let scale = 1.0 + sum.abs() + diff.abs();
        prop_assert!((m.m1 + m.m2 - sum).abs() < 1e-9 * scale);
        prop_assert!((m.m1 - m.m2 - diff).abs() < 1e-9 * scale);
    }

    #[test]
    fn weights_positive(x in -1e4f64..1e4, z in -20.0f64..20.0, t in 0.0f64..1e4, alpha in 0.0f64..4.0, lam in -3.0f64..3.0, mu in 0.1f64..10.0, k in 0.5f64..10.0) {
        let c = lam.abs().max(0.1);
        // the Gaussian weight underflows far from its ray, so sample it within 20 widths
        let xg = lam * (t + 1.0) + z * (mu * (t + 1.0)).sqrt();
        let vals = [
            theta_w(xg, t, alpha, lam, mu),
            psi(x, t, alpha, lam),
            psi74(x, t, lam),
            psi_bar(x, t, lam),
            psi_tilde(x, t, lam),
            cap_psi(x, t, 1, c),
            cap_psi(x, t, 2, c),
            cap_phi(x, t, 1, c),
            cap_phi(x, t, 2, c),
        ];
        for v in vals {
            prop_assert!(v > 0.0 && v.is_finite(), "{vals:?}");
        }
        let chi = chi_k(x, t, lam, -lam, k);
        prop_assert!(chi >= 0.0 && chi.is_finite());
    }

    #[test]
    fn theta_carries_its_mass(m in -2.0f64..2.0, nu in 0.2f64..4.0, lam in -2.0f64..2.0, t in 0.0f64..200.0) {
        let w = DiffusionWave::new(m, lam, nu).unwrap();
        prop_assert!((theta_mass(&w, t) - m).abs() < 1e-8 * (1.0 + m.abs()));
        if m == 0.0 {
            prop_assert_eq!(w.theta(lam * (t + 1.0), t), 0.0);
        } else {
            prop_assert!(w.theta(lam * (t + 1.0), t) != 0.0);
        }
    }

    #[test]
    fn power_laws_are_recovered(a in -3.0f64..-0.2, amp in 1e-6f64..1e3) {
        let series: Vec<(f64, f64)> = (0..60).map(|k| {
            let t = 10.0 * 1.1f64.powi(k);
            (t, amp * (t + 1.0).powf(a))
        }).collect();
        let f = fit_decay(&series, (10.0, 1e4)).unwrap();
        prop_assert!((f.exponent - a).abs() < 1e-9 && f.kind == DecayKind::Algebraic);
    }

    #[test]
    fn decaying_ratios_are_bounded(c in 0.1f64..10.0, a in 0.0f64..1.0) {
        let s: Vec<(f64, f64)> = [4.0, 16.0, 64.0, 256.0, 1024.0].iter().map(|&t| (t, c * (1.0 + 1.0 / t) * t.powf(-a))).collect();
        prop_assert!(decade_rule(&s).pass);
        let grow: Vec<(f64, f64)> = s.iter().map(|&(t, _)| (t, c * t.powf(0.5))).collect();
        prop_assert!(!decade_rule(&grow).pass);
    }

    #[test]
    fn same_family_lemma_rejects_small_alpha(alpha in -1.0f64..3.0) {
        let p = LemmaParams { alpha, ..Lemma::SameTheta.default_params() };
        prop_assert!(matches!(lemma_preconditions(Lemma::SameTheta, &p), Err(Error::Precondition(_))));
    }

    #[test]
    fn early_slab_rejects_beta_outside_range(beta in prop_oneof![-2.0f64..-0.01, 1.25f64..4.0]) {
        let p = LemmaParams { beta, ..Lemma::EarlySlab.default_params() };
        prop_assert!(matches!(lemma_preconditions(Lemma::EarlySlab, &p), Err(Error::Precondition(_))));
    }

    #[test]
    fn config_echo_round_trips(g in 0.2f64..5.0, nu in 0.1f64..5.0, amp in 0.0f64..0.2, t in 1.0f64..1e3, seed in 0u64..1000, snaps in prop::collection::vec(0.1f64..100.0, 0..4)) {
        let cfg = RunConfig { gamma: g, nu, amplitude: amp, t_final: t, seed, snapshots: if snaps.is_empty() { None } else { Some(snaps) }, ..RunConfig::default() };
        let mut back = RunConfig::default();
        apply_file(&mut back, &cfg.echo()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn psi_slope_at_origin() {
    for c in [0.5, 1.0, 2.0] {
        for i in 1..=2 {
            let (t0, t1) = (1e2, 1e4);
            let s = (cap_psi(0.0, t1, i, c) / cap_psi(0.0, t0, i, c)).ln() / ((t1 + 1.0) / (t0 + 1.0)).ln();
            assert!((s + 1.75).abs() < 0.02, "c={c} i={i} slope {s}");
            let f = (cap_phi(0.0, t1, i, c) / cap_phi(0.0, t0, i, c)).ln() / ((t1 + 1.0) / (t0 + 1.0)).ln();
            assert!((f + 1.5).abs() < 0.02, "c={c} i={i} phi slope {f}");
        }
    }
}

#[test]
fn theta_ray_slope_and_origin_decay() {
    let p = FluidParams::new(1.0, 1.0).unwrap();
    let eig = eigen_structure(&p);
    let m = MassPair::new(0.7, -0.4);
    for i in 1..=2 {
        let w = DiffusionWave::family(i, &m, &eig, &p).unwrap();
        let at = |t: f64| w.theta(w.lambda * (t + 1.0), t).abs();
        let s = (at(1e4) / at(1e2)).ln() / (10001.0f64 / 101.0).ln();
        assert!((s + 0.5).abs() < 0.02, "family {i}: {s}");
        let logs: Vec<f64> = [20.0, 40.0, 60.0, 80.0].iter().map(|&t| w.theta(0.0, t).abs().ln()).collect();
        let d: Vec<f64> = logs.windows(2).map(|x| x[1] - x[0]).collect();
        assert!(d.iter().all(|&v| v < 0.0));
        // log θ(0,t) ≈ -c² t / (2ν) + O(log t): successive differences are nearly equal
        assert!((d[2] - d[0]).abs() < 0.05 * d[0].abs(), "{d:?}");
    }
}
