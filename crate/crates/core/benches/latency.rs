//! Query latency against pattern length and number of occurrences. The
//! figures are for inspection; nothing here is asserted.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rlindex::{corpus, Index};

fn latency(c: &mut Criterion) {
    let corpora = [
        ("copy-edit", corpus::copy_edit(100_000, 50, 5, 4, 2).unwrap()),
        ("random-s4", corpus::random(100_000, 4, 2).unwrap()),
    ];
    for (name, text) in corpora {
        let idx = Index::build(&text, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut g = c.benchmark_group(format!("latency/{name}"));
        for m in [4usize, 16, 64, 256] {
            let patterns: Vec<Vec<u8>> = (0..64)
                .map(|_| {
                    let i = rng.gen_range(0..=text.len() - m);
                    text[i..i + m].to_vec()
                })
                .collect();
            let occ: usize = patterns.iter().map(|p| idx.count(p) as usize).sum();
            eprintln!("{name} m={m}: mean occ {:.1}", occ as f64 / patterns.len() as f64);
            g.bench_with_input(BenchmarkId::new("locate", m), &patterns, |b, ps| {
                b.iter(|| ps.iter().map(|p| idx.locate(black_box(p)).len()).sum::<usize>())
            });
            g.bench_with_input(BenchmarkId::new("count", m), &patterns, |b, ps| {
                b.iter(|| ps.iter().map(|p| idx.count(black_box(p))).sum::<u64>())
            });
        }
        g.finish();
    }
}

criterion_group!(benches, latency);
criterion_main!(benches);
