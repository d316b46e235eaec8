use proptest::prelude::*;
use setlat::catalog;
use setlat::oracle::{campaign_cases, enumerate_lattice_minimizers, CampaignSpec};
use setlat::solver::{
    collect_candidate, default_tolerance, sweep, verification_probe, verify_infimizer, verify_lattice_minimizer,
    MinimizeOptions,
};
use setlat::{lattice_inf, CandidateSet, CoSampling, ExtReal, GValue, Point, SetFunction, VarSpace};

fn seeded(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: prop::test_runner::RngSeed::Fixed(31),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn vop() -> SetFunction {
    catalog::linear_vop(0.25, 2.0).unwrap()
}

fn grid_points(f: &SetFunction) -> Vec<Point> {
    match f.space() {
        VarSpace::Grid(p) => p.clone(),
        VarSpace::Box { .. } => unreachable!(),
    }
}

fn subset(points: &[Point], mask: &[bool]) -> Vec<Point> {
    points.iter().zip(mask).filter(|(_, &b)| b).map(|(p, _)| p.clone()).collect()
}

fn alpha(a: f64) -> Vec<f64> {
    vec![a, 1.0 - a]
}

fn hat_points(hat: &SetFunction) -> Vec<Point> {
    match hat.space() {
        VarSpace::Grid(p) => p.clone(),
        VarSpace::Box { lower, upper } => {
            (0..=40).map(|i| vec![lower[0] + (upper[0] - lower[0]) * i as f64 / 40.0]).collect()
        }
    }
}

proptest! {
    #![proptest_config(seeded(64))]

    #[test]
    fn antitone_in_candidate_set(mask in prop::collection::vec(any::<bool>(), 81), extra in prop::collection::vec(any::<bool>(), 81), first in 0usize..81) {
        let f = vop();
        let g = grid_points(&f);
        let mut m = subset(&g, &mask);
        m.push(g[first].clone());
        let n: Vec<Point> = m.iter().cloned().chain(subset(&g, &extra)).collect();
        let hm = f.inf_translate(&CandidateSet::new(m).unwrap()).unwrap();
        let hn = f.inf_translate(&CandidateSet::new(n).unwrap()).unwrap();
        for x in hat_points(&hm).iter().step_by(7) {
            let a = hn.eval_or_empty(x).unwrap();
            let b = hm.eval_or_empty(x).unwrap();
            prop_assert!(a.order_geq(&b, 1e-12).unwrap());
        }
    }

    #[test]
    fn infimum_is_preserved(mask in prop::collection::vec(any::<bool>(), 25), first in 0usize..25) {
        let f = catalog::linear_vop(0.5, 2.0).unwrap();
        let g = grid_points(&f);
        let mut m = subset(&g, &mask);
        m.push(g[first].clone());
        let hat = f.inf_translate(&CandidateSet::new(m).unwrap()).unwrap();
        let over_f: Vec<GValue> = g.iter().map(|x| f.eval(x).unwrap()).collect();
        let over_hat: Vec<GValue> = hat_points(&hat).iter().map(|x| hat.eval(x).unwrap()).collect();
        prop_assert!(lattice_inf(&over_f).unwrap().equals(&lattice_inf(&over_hat).unwrap(), 0.0).unwrap());
    }

    #[test]
    fn scalarization_commutes_with_translation(ys in prop::collection::vec(0.05f64..20.0, 1..12), a in 0.0f64..=1.0, x in -5.0f64..5.0) {
        let f = catalog::hyperbola(1e-4, 100.0).unwrap();
        let m = CandidateSet::new(ys.into_iter().map(|y| vec![y]).collect()).unwrap();
        let hat = f.inf_translate(&m).unwrap();
        let z = alpha(a);
        let lhs = f.scalarized_inf_translation(&m, &z, &[x]).unwrap();
        let rhs = hat.eval_or_empty(&[x]).unwrap().support(&z).unwrap();
        if lhs.is_finite() {
            prop_assert!((lhs.value() - rhs.value()).abs() <= 1e-12 * lhs.value().abs().max(1.0));
        } else {
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn translated_scalarization_is_midpoint_convex(a in 0.05f64..0.95, x1 in -0.2f64..0.2, x2 in -0.2f64..0.2) {
        let f = catalog::hyperbola(1e-4, 100.0).unwrap();
        let ys: Vec<Point> = (0..=480).map(|i| vec![0.2 + 0.01 * i as f64]).collect();
        let m = CandidateSet::new(ys).unwrap().convexified(CoSampling { random: 64, seed: 3 });
        let z = alpha(a);
        let phi = |x: f64| f.scalarized_inf_translation(&m, &z, &[x]).unwrap().value();
        prop_assert!(phi(0.5 * (x1 + x2)) <= 0.5 * (phi(x1) + phi(x2)) + 1e-4);
    }

    #[test]
    fn inf_extension_scalarization_is_exact(x in 1e-4f64..100.0, a in 0.0f64..=1.0) {
        let f = catalog::hyperbola(1e-4, 100.0).unwrap();
        let z = alpha(a);
        prop_assert_eq!(f.scalarize(&z, &[x]).unwrap(), ExtReal::new(z[0] * x + z[1] * (1.0 / x)));
    }

    #[test]
    fn monotone_refinement(mask in prop::collection::vec(any::<bool>(), 81), extra in prop::collection::vec(any::<bool>(), 81), first in 0usize..81) {
        let f = vop();
        let g = grid_points(&f);
        let mut m = subset(&g, &mask);
        m.push(g[first].clone());
        let n: Vec<Point> = m.iter().cloned().chain(subset(&g, &extra)).collect();
        let cone = f.cone().clone();
        let base = cone.base_directions(&[1.0, 1.0], 16).unwrap();
        let probe = verification_probe(f.space(), 0, 1);
        let co = CoSampling { random: 8, seed: 0 };
        let small = verify_infimizer(&f, &CandidateSet::new(m).unwrap(), &base, &probe, co, 1e-6).unwrap();
        let large = verify_infimizer(&f, &CandidateSet::new(n).unwrap(), &base, &probe, co, 1e-6).unwrap();
        for (a, b) in large.gaps.iter().zip(&small.gaps) {
            prop_assert!(a <= b);
        }
    }
}

#[test]
fn forward_necessity() {
    let cases: Vec<(SetFunction, Vec<Point>)> = vec![
        (vop(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
        (catalog::scalar_identity(1.0, 2.0, -3.0, 3.0).unwrap(), vec![vec![1.0]]),
    ];
    for (f, m) in cases {
        let m = CandidateSet::new(m).unwrap();
        let cone = f.cone().clone();
        let anchor = cone.default_anchor().unwrap();
        let base = cone.base_directions(&anchor, 20).unwrap();
        let tol = default_tolerance(f.space());
        let probe = verification_probe(f.space(), 400, 5);
        let check = verify_infimizer(&f, &m, &base, &probe, CoSampling::default(), tol).unwrap();
        assert!(check.is_infimizer);
        let hat = f.inf_translate(&m).unwrap();
        let xs = hat_points(&hat);
        for z in base.directions() {
            let at_zero = f.scalarized_inf_translation(&m, z, &vec![0.0; f.space().dim()]).unwrap();
            for x in &xs {
                let v = f.scalarized_inf_translation(&m, z, x).unwrap();
                assert!(v >= ExtReal::new(at_zero.value() - 2.0 * tol), "{z:?} {x:?}");
            }
        }
    }
}

#[test]
fn sweep_then_verify_on_finer_base() {
    let opts = MinimizeOptions::default();
    for (f, tol) in [(vop(), 1e-9), (catalog::scalar_identity(1.0, 2.0, -3.0, 3.0).unwrap(), 1e-6)] {
        let cone = f.cone().clone();
        let anchor = cone.default_anchor().unwrap();
        let coarse = cone.base_directions(&anchor, 8).unwrap();
        let fine = coarse.merged(&cone.base_directions(&anchor, 64).unwrap()).unwrap();
        let results = sweep(&f, &coarse, &opts);
        assert!(results.iter().all(|r| r.converged));
        let m = collect_candidate(&results, 1e-6).unwrap();
        let probe = verification_probe(f.space(), 4000, 11);
        let check = verify_infimizer(&f, &m, &fine, &probe, CoSampling::default(), tol).unwrap();
        assert!(check.is_infimizer, "{:?}", check.gaps);
    }
}

#[test]
fn hyperbola_sweep_verifies_on_its_own_base() {
    let f = catalog::hyperbola(1e-4, 100.0).unwrap();
    let base = f.cone().interior_directions(&[1.0, 1.0], 9).unwrap();
    let results = sweep(&f, &base, &MinimizeOptions::default());
    assert!(results.iter().all(|r| r.converged));
    let m = collect_candidate(&results, 1e-6).unwrap();
    let probe = verification_probe(f.space(), 20000, 2);
    let check = verify_infimizer(&f, &m, &base, &probe, CoSampling::default(), 1e-6).unwrap();
    // bounded by the probe spacing near each minimizer
    assert!(check.gaps.iter().all(|g| *g <= ExtReal::new(1e-6)), "{:?}", check.gaps);
}

#[test]
fn lattice_minimizers_agree_with_enumeration() {
    let spec = CampaignSpec { instances: 60, seed: 19, ..CampaignSpec::default() };
    for case in campaign_cases(&spec).unwrap() {
        let inst = &case.instance;
        let f = inst.to_function().unwrap();
        let grid = inst.grid().to_vec();
        let expected = enumerate_lattice_minimizers(inst).unwrap();
        for (i, x) in grid.iter().enumerate() {
            if inst.values()[i].is_empty() {
                continue;
            }
            let got = verify_lattice_minimizer(&f, x, &grid).unwrap();
            assert_eq!(got, expected.contains(&i), "point {x:?}");
        }
    }
}
