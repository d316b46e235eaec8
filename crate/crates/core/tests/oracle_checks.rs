use std::sync::Arc;

use setlat::catalog;
use setlat::oracle::{
    campaign_cases, check_commutation, check_inf_translation_lemma, exact_inf, oracle_directions, run_campaign,
    CampaignSpec, FiniteInstance, LemmaOptions, POWER_SET_LIMIT,
};
use setlat::solver::build_infimum;
use setlat::{CandidateSet, Cone, GValue, Point};

/// Normals of every candidate facet of `co P + C`: the dual generators and
/// the perpendiculars of point pairs that land in `C⁺`.
fn candidate_normals(cone: &Cone, p: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = cone.dual_generators().to_vec();
    for a in p {
        for b in p {
            let n = [-(b[1] - a[1]), b[0] - a[0]];
            for s in [1.0, -1.0] {
                let z = vec![s * n[0], s * n[1]];
                if (z[0] != 0.0 || z[1] != 0.0) && cone.dual_contains(&z, 1e-12) {
                    out.push(z);
                }
            }
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `q ∈ co P + C`, decided by the facet normals of the hull.
fn in_upper_hull(cone: &Cone, p: &[Point], q: &[f64]) -> bool {
    if p.is_empty() {
        return false;
    }
    candidate_normals(cone, p)
        .iter()
        .all(|z| dot(z, q) >= p.iter().map(|g| dot(z, g)).fold(f64::INFINITY, f64::min) - 1e-9)
}

fn union(inst: &FiniteInstance, set: &[usize]) -> Vec<Point> {
    set.iter().flat_map(|&i| inst.values()[i].generators().iter().cloned()).collect()
}

/// `M` is an infimizer iff every generator of every value lies in the hull
/// spanned by the values over `M`.
fn brute_infimizer(inst: &FiniteInstance, m: &[usize]) -> bool {
    let mine = union(inst, m);
    let all: Vec<usize> = (0..inst.len()).collect();
    union(inst, &all).iter().all(|q| in_upper_hull(inst.cone(), &mine, q))
}

fn instance_of(f: &setlat::SetFunction) -> FiniteInstance {
    FiniteInstance::from_function(f).unwrap()
}

fn catalog_instances() -> Vec<(FiniteInstance, Vec<Point>)> {
    let grid = |xs: &[f64]| setlat::VarSpace::new_grid(xs.iter().map(|x| vec![*x]).collect()).unwrap();
    vec![
        (instance_of(&catalog::linear_vop(1.0, 2.0).unwrap()), vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
        (instance_of(&catalog::linear_vop(0.5, 2.0).unwrap()), vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
        (instance_of(&catalog::linear_vop(0.5, 2.0).unwrap()), vec![vec![1.0, 0.0]]),
        (instance_of(&catalog::hyperbola_on(grid(&[0.25, 0.5, 1.0, 2.0, 4.0])).unwrap()), vec![vec![1.0]]),
        (
            instance_of(&catalog::hyperbola_on(grid(&[-1.0, 0.5, 1.0, 2.0])).unwrap()),
            vec![vec![0.5], vec![1.0], vec![2.0]],
        ),
    ]
}

#[test]
fn lemma_on_catalog_instances() {
    for (inst, m) in catalog_instances() {
        let m = inst.indices_of(&m).unwrap();
        let all: Vec<usize> = (0..inst.len()).collect();
        let r = check_inf_translation_lemma(&inst, &m, &all, LemmaOptions::default()).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.exhaustive_supersets, inst.len() <= POWER_SET_LIMIT);
        assert_eq!(r.c1.holds, brute_infimizer(&inst, &m));
    }
}

#[test]
fn lemma_on_random_instances_matches_brute_force() {
    let spec = CampaignSpec { instances: 100, seed: 101, ..CampaignSpec::default() };
    let mut exhaustive = 0;
    for (i, case) in campaign_cases(&spec).unwrap().iter().enumerate() {
        let r = check_inf_translation_lemma(
            &case.instance,
            &case.m,
            &case.n,
            LemmaOptions { seed: i as u64, inject_fault: false },
        )
        .unwrap();
        assert!(r.passed, "case {i}: {r:?}");
        assert_eq!(r.c1.holds, brute_infimizer(&case.instance, &case.m), "case {i}");
        if case.instance.len() <= POWER_SET_LIMIT {
            assert!(r.exhaustive_supersets);
            assert_eq!(r.supersets_tested, 1 << (case.instance.len() - case.m.len()));
            exhaustive += 1;
        }
    }
    assert!(exhaustive > 10);
}

#[test]
fn injected_fault_is_caught() {
    let spec = CampaignSpec { instances: 20, seed: 5, ..CampaignSpec::default() };
    let report = run_campaign(&spec, LemmaOptions { seed: 0, inject_fault: true }).unwrap();
    assert!(!report.passed);
    assert!(!report.lemma_failures.is_empty());
    let failing = &report.cases[report.lemma_failures[0]].lemma;
    assert!(!failing.a.holds && failing.a.witness.is_some());
}

#[test]
fn campaign_is_deterministic() {
    let spec = CampaignSpec { instances: 40, seed: 9, ..CampaignSpec::default() };
    let a = serde_json::to_string(&run_campaign(&spec, LemmaOptions::default()).unwrap()).unwrap();
    let b = serde_json::to_string(&run_campaign(&spec, LemmaOptions::default()).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exact_inf_matches_build_infimum() {
    for (inst, m) in catalog_instances() {
        let idx = inst.indices_of(&m).unwrap();
        if !brute_infimizer(&inst, &idx) {
            continue;
        }
        let all: Vec<usize> = (0..inst.len()).collect();
        let (grid_inf, _) = exact_inf(&inst, &all).unwrap();
        let f = inst.to_function().unwrap();
        let built = build_infimum(&f, &CandidateSet::new(m).unwrap()).unwrap();
        assert!(grid_inf.equals(&built, 1e-12).unwrap());
    }
}

#[test]
fn commutation_on_catalog_instances() {
    for (inst, m) in catalog_instances() {
        let idx = inst.indices_of(&m).unwrap();
        let dirs = oracle_directions(inst.cone(), 32).unwrap();
        assert!(check_commutation(&inst, &idx, &dirs).unwrap() <= 1e-12);
    }
}

#[test]
fn union_versus_hull() {
    // two incomparable points: the union misses the segment between them
    let c = Arc::new(Cone::orthant(2).unwrap());
    let vals = vec![
        GValue::point(c.clone(), vec![2.0, 0.0]).unwrap(),
        GValue::point(c.clone(), vec![0.0, 2.0]).unwrap(),
        GValue::point(c.clone(), vec![1.0, 1.0]).unwrap(),
    ];
    let inst = FiniteInstance::new(c, vec![vec![0.0], vec![1.0], vec![2.0]], vals).unwrap();
    let (hull, union) = exact_inf(&inst, &[0, 1]).unwrap();
    assert_eq!(union.len(), 2);
    assert!(hull.contains_point(&[1.0, 1.0], 0.0).unwrap());
    assert!(brute_infimizer(&inst, &[0, 1]));
    assert!(!brute_infimizer(&inst, &[2]));
}
