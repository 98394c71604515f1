use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bsym::closedform::ProblemSpec;
use bsym::exec::Execution;
use bsym::fragment::random_problem_for;
use bsym::symmetry::{verify_pair, CaseId, Method, CATALOG};

fn jobs(per_case: usize) -> Vec<(CaseId, ProblemSpec)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbe7c);
    CATALOG
        .iter()
        .flat_map(|c| {
            (0..per_case)
                .map(|_| (c.id, random_problem_for(&mut rng, c)))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn run(exec: Execution, jobs: &[(CaseId, ProblemSpec)], method: Method) -> usize {
    exec.map(jobs, |(id, p)| verify_pair(p, id.case(), 51, 1e-6, method))
        .iter()
        .filter(|r| r.as_ref().is_ok_and(|r| r.passed()))
        .count()
}

fn batch(c: &mut Criterion) {
    let jobs = jobs(4);
    for method in [Method::Oracle, Method::ClosedForm] {
        let mut group = c.benchmark_group(format!("verify_batch/{}", method.name()));
        group.sample_size(10);
        for (name, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::from_parameter(name), &jobs, |b, jobs| {
                b.iter(|| run(exec, jobs, method))
            });
        }
        group.finish();
    }
}

criterion_group!(benches, batch);
criterion_main!(benches);
