use artcloud_bench::patterns;
use artcloud_core::art2::stabilize_f1;
use artcloud_core::{Art2Network, Art2Params};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn stabilize(c: &mut Criterion) {
    let params = Art2Params::default();
    let input = &patterns(1, 200, 7)[0];
    c.bench_function("stabilize_f1 m=200", |b| b.iter(|| stabilize_f1(black_box(input), None, &params).unwrap()));
}

fn present(c: &mut Criterion) {
    let train = patterns(50, 200, 11);
    c.bench_function("present 50 patterns m=200", |b| {
        b.iter(|| {
            let mut net = Art2Network::new(Art2Params::default(), 200).unwrap();
            for p in &train {
                net.present(black_box(p), true).unwrap();
            }
            net.committed()
        })
    });

    let mut net = Art2Network::new(Art2Params::default(), 200).unwrap();
    for p in &train {
        net.present(p, true).unwrap();
    }
    let probe = &patterns(1, 200, 99)[0];
    c.bench_function("classify against trained network", |b| b.iter(|| net.classify(black_box(probe)).unwrap()));
}

criterion_group!(benches, stabilize, present);
criterion_main!(benches);
