use criterion::{black_box, criterion_group, criterion_main, Criterion};
use setlat::calcvar::{solve_sccvp, CvpOptions, CvpProblem};
use setlat::oracle::{run_campaign, CampaignSpec, LemmaOptions};
use setlat::solver::{scalar_minimize, sweep, verification_probe, verify_infimizer, MinimizeOptions};
use setlat::{catalog, CandidateSet, CoSampling};

fn solver(c: &mut Criterion) {
    let hyperbola = catalog::hyperbola(1e-4, 100.0).unwrap();
    let opts = MinimizeOptions::default();
    c.bench_function("scalar_minimize_hyperbola", |b| {
        b.iter(|| scalar_minimize(&hyperbola, black_box(&[0.5, 0.5]), &opts).unwrap())
    });
    let base = hyperbola.cone().interior_directions(&[1.0, 1.0], 9).unwrap();
    c.bench_function("sweep_hyperbola_9", |b| b.iter(|| sweep(&hyperbola, black_box(&base), &opts)));

    let vop = catalog::linear_vop(0.25, 2.0).unwrap();
    let closed = vop.cone().base_directions(&[1.0, 1.0], 180).unwrap();
    let probe = verification_probe(vop.space(), 0, 0);
    let m = CandidateSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    c.bench_function("verify_linear_vop_181", |b| {
        b.iter(|| verify_infimizer(&vop, black_box(&m), &closed, &probe, CoSampling::default(), 1e-9).unwrap())
    });

    let spec = CampaignSpec { instances: 20, ..CampaignSpec::default() };
    c.bench_function("oracle_campaign_20", |b| {
        b.iter(|| run_campaign(black_box(&spec), LemmaOptions::default()).unwrap())
    });

    let (lag, boundary, _) = CvpProblem::quadratic_default(100).build(0).unwrap();
    let cvp = CvpOptions::default();
    let mut g = c.benchmark_group("cvp");
    g.sample_size(10);
    g.bench_function("solve_sccvp_n100", |b| {
        b.iter(|| solve_sccvp(&lag, black_box(&[0.5, 0.5]), &boundary, 100, &cvp).unwrap())
    });
    g.finish();
}

criterion_group!(benches, solver);
criterion_main!(benches);
