use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use huntboard_core::replay::{replay_many_sequential, BoardLog};
use huntboard_core::sim::generate_log;
use huntboard_core::BoardId;

fn corpus(boards: usize, len: usize) -> Vec<BoardLog> {
    (0..boards as u64)
        .map(|seed| {
            let mut log = generate_log(seed, len);
            let id = BoardId::new(format!("b{seed}")).unwrap();
            for e in &mut log.events {
                e.board = id.clone();
            }
            log.board_id = id;
            log
        })
        .collect()
}

fn bench_replay(c: &mut Criterion) {
    let mut group = c.benchmark_group("replay_many");
    for &boards in &[8usize, 64] {
        let logs = corpus(boards, 300);
        let events: usize = logs.iter().map(|l| l.events.len()).sum();
        group.throughput(Throughput::Elements(events as u64));
        group.bench_with_input(BenchmarkId::new("sequential", boards), &logs, |b, logs| {
            b.iter(|| replay_many_sequential(logs))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", boards), &logs, |b, logs| {
            b.iter(|| huntboard_core::replay::replay_many_parallel(logs))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_replay);
criterion_main!(benches);
