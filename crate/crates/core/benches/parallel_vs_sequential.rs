use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use twofold::harness::appliance::{run_appliance_experiment, ApplianceConfig};
use twofold::harness::benchmark::{default_model_specs, synthetic_benchmark_datasets, SyntheticProfile};
use twofold::harness::{rolling_origin_evaluate, ExperimentPlan};
use twofold::hurdle::Scope;
use twofold::par::Execution;

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn rolling_origin(c: &mut Criterion) {
    let profile = SyntheticProfile {
        years: 1,
        ..SyntheticProfile::default()
    };
    let (datasets, _) = synthetic_benchmark_datasets(&profile).expect("synthetic data");
    let mut group = c.benchmark_group("rolling_origin");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    for (name, execution) in MODES {
        let plan = ExperimentPlan {
            test_span_days: 7,
            repetitions: 2,
            scope: Scope::Local,
            models: default_model_specs(false),
            execution,
            ..ExperimentPlan::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &plan, |b, plan| {
            b.iter(|| rolling_origin_evaluate(plan, &datasets).expect("evaluation"))
        });
    }
    group.finish();
}

fn appliance(c: &mut Criterion) {
    let cfg = ApplianceConfig {
        n_windows: 300,
        repetitions: 4,
        ..ApplianceConfig::default()
    };
    let mut group = c.benchmark_group("appliance");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &execution, |b, &execution| {
            b.iter(|| run_appliance_experiment(&cfg, execution).expect("experiment"))
        });
    }
    group.finish();
}

criterion_group!(benches, rolling_origin, appliance);
criterion_main!(benches);
