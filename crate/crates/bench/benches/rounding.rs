use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use robust_center::config::ConfigOptions;
use robust_center::lp::relax::lp_threshold;
use robust_center::rational::ratio;
use robust_center::sampler::{draw_rng, CenterSampler};
use robust_center::{kcenter, knapcenter, matcenter};
use robust_center_bench::{cardinality, knapsack, partition};

fn relaxation(c: &mut Criterion) {
    let mut g = c.benchmark_group("lp_threshold");
    for n in [8, 12] {
        let inst = partition(n);
        g.bench_function(format!("partition/{n}"), |b| b.iter(|| lp_threshold(&inst, true).unwrap()));
    }
    g.finish();
}

fn draws(c: &mut Criterion, name: &str, sampler: &dyn CenterSampler) {
    let mut i = 0;
    c.bench_function(name, |b| {
        b.iter_batched(
            || {
                i += 1;
                draw_rng(7, i)
            },
            |mut rng| sampler.draw(&mut rng).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn samplers(c: &mut Criterion) {
    let opts = ConfigOptions::default();
    let half = ratio(1, 2);
    let inst = cardinality(12);
    draws(c, "draw/kcenter", &kcenter::solve_frkcenter(&inst, &ratio(1, 4)).unwrap());
    let inst = knapsack(10);
    draws(c, "draw/knap-basic", &knapcenter::sample_basic_frknapcenter(&inst).unwrap());
    draws(c, "draw/knap-exact", &knapcenter::sample_frknapcenter_exact_budget(&inst, &half, &opts).unwrap());
    let inst = partition(10);
    draws(c, "draw/mat-pseudo", &matcenter::pseudo_round(&inst).unwrap());
    draws(c, "draw/mat-exact", &matcenter::sample_frmatcenter_exact(&inst, &half, &opts).unwrap());
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = relaxation, samplers
}
criterion_main!(benches);
