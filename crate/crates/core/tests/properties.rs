use proptest::prelude::*;

use sqg_lab::estimates::commutator_block;
use sqg_lab::lp::{besov_norm, build_partition};
use sqg_lab::solver::{run, run_td, EvolutionConfig, Forcing};
use sqg_lab::spectral::{semigroup_apply, snapshot, velocity_from_theta};
use sqg_lab::{Field, Grid2D};

fn grid() -> Grid2D {
    Grid2D::new(32, 2.0 * std::f64::consts::PI * 4.0).unwrap()
}

/// Mean-free sums of a few low cosines, band-limited on the 32² box.
fn field() -> impl Strategy<Value = Field> {
    prop::collection::vec((-6i64..=6, -6i64..=6, -1.0f64..1.0, 0.0f64..6.3), 1..6).prop_map(|modes| {
        let g = grid();
        let k0 = g.k0();
        Field::from_fn(g, |x, y| {
            modes
                .iter()
                .map(|&(m1, m2, a, p)| a * (k0 * (m1 as f64 * x + m2 as f64 * y) + p).cos())
                .sum()
        })
        .unwrap()
        .without_mean()
    })
}

fn rel(a: &Field, b: &Field) -> f64 {
    a.max_abs_diff(b) / a.sup_norm().max(b.sup_norm()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn blocks_sum_back_to_the_field(u in field()) {
        let p = build_partition(*u.grid()).unwrap();
        let back = p.decompose(&u).unwrap().reconstruct().unwrap();
        prop_assert!(u.max_abs_diff(&back) <= 1e-12 * u.sup_norm().max(1.0));
    }

    #[test]
    fn commutator_is_bilinear(a in field(), b in field(), w in field(), x in -2.0f64..2.0, y in -2.0f64..2.0, q in -1i32..=1) {
        let v = velocity_from_theta(&w).unwrap();
        let mix = a.axpby(x, &b, y).unwrap();
        let lhs = commutator_block(&v, &mix, q).unwrap();
        let rhs = commutator_block(&v, &a, q).unwrap().axpby(x, &commutator_block(&v, &b, q).unwrap(), y).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-11 * (1.0 + rhs.sup_norm()));

        let v2 = velocity_from_theta(&b).unwrap();
        let vmix = sqg_lab::VectorField::new(
            v.v1.axpby(x, &v2.v1, y).unwrap(),
            v.v2.axpby(x, &v2.v2, y).unwrap(),
        ).unwrap();
        let lhs = commutator_block(&vmix, &a, q).unwrap();
        let rhs = commutator_block(&v, &a, q).unwrap().axpby(x, &commutator_block(&v2, &a, q).unwrap(), y).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-11 * (1.0 + rhs.sup_norm()));
    }

    #[test]
    fn poisson_semigroup_contracts_lp(u in field(), t in 0.0f64..5.0) {
        let s = semigroup_apply(&u, t, 1.0).unwrap();
        for p in [1.0, 2.0, 4.0, f64::INFINITY] {
            prop_assert!(s.lp_norm(p) <= u.lp_norm(p) * (1.0 + 1e-12) + 1e-14, "p = {p}");
        }
    }

    #[test]
    fn velocity_is_divergence_free(u in field()) {
        let v = velocity_from_theta(&u).unwrap();
        prop_assert!(v.divergence().sup_norm() <= 1e-12 * (1.0 + v.grad_sup()));
    }

    #[test]
    fn besov_norm_is_homogeneous_and_translation_invariant(u in field(), a in -3.0f64..3.0, s in -0.5f64..1.0, shift in 0usize..32) {
        let n0 = besov_norm(&u, s, f64::INFINITY, 1.0).unwrap().value;
        let scaled = besov_norm(&u.scale(a), s, f64::INFINITY, 1.0).unwrap().value;
        prop_assert!((scaled - a.abs() * n0).abs() <= 1e-12 * (1.0 + n0));
        let dx = u.grid().dx();
        let moved = besov_norm(&u.translate((shift as f64 * dx, 0.0)), s, 2.0, 2.0).unwrap().value;
        let still = besov_norm(&u, s, 2.0, 2.0).unwrap().value;
        prop_assert!((moved - still).abs() <= 1e-10 * (1.0 + still));
    }

    #[test]
    fn snapshots_roundtrip_bit_for_bit(u in field(), t in 0.0f64..10.0) {
        let back = snapshot::decode(&snapshot::encode(&u, t)).unwrap();
        prop_assert_eq!(back.t.to_bits(), t.to_bits());
        prop_assert!(back.field.physical().iter().zip(u.physical()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn evolution_keeps_zero_mean(u in field(), f in field()) {
        let cfg = EvolutionConfig {
            t_end: 0.2,
            dt: 0.02,
            ..EvolutionConfig::default()
        }
        .with_forcing(Forcing::Steady(f));
        let tr = run(&u, &cfg).unwrap();
        for s in &tr.states {
            prop_assert!(s.is_mean_free());
            prop_assert!(s.spectral()[0].norm() == 0.0);
        }
    }

    #[test]
    fn inviscid_transport_reverses(u in field(), w in field()) {
        let v = velocity_from_theta(&w.scale(0.5)).unwrap();
        let cfg = EvolutionConfig {
            kappa: 0.0,
            t_end: 0.2,
            dt: 0.01,
            snapshot_every: 20,
            ..EvolutionConfig::default()
        };
        let forward = run_td(&u, &v, &cfg).unwrap();
        let back = run_td(forward.last(), &v.scale(-1.0), &cfg).unwrap();
        prop_assert!(rel(&u, back.last()) <= 1e-10, "error {}", rel(&u, back.last()));
    }
}
