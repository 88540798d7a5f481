use amrpress_bench::{coarse_blocks, dataset};
use amrpress_core::amr::synth::Preset;
use amrpress_core::container::{container_read, container_write};
use amrpress_core::harness::RankPlan;
use amrpress_core::preprocess::{arrange, Arrangement};
use amrpress_core::sz::{
    compress_1d_baseline, compress_level, decompress_level, histogram, huffman_decode, huffman_encode, Algorithm,
    CompressorConfig, EbMode, Encoding, HuffmanTable, DEFAULT_CHUNK_ELEMS,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

fn level_compressors(c: &mut Criterion) {
    let ds = dataset(Preset::Rough, 64, 8);
    let blocks = coarse_blocks(&ds);
    let mut g = c.benchmark_group("level");
    g.throughput(Throughput::Elements(blocks.values.len() as u64));
    for (name, alg, enc, arr) in [
        ("lr-sle", Algorithm::Lr, Encoding::Sle, Arrangement::Linear),
        ("lr-per-block", Algorithm::Lr, Encoding::PerBlock, Arrangement::Linear),
        ("lr-lm", Algorithm::Lr, Encoding::LinearMerge, Arrangement::Linear),
        ("interp-cluster", Algorithm::Interp, Encoding::Sle, Arrangement::Cluster),
    ] {
        let cfg = CompressorConfig::new(alg, EbMode::RangeRelative, 1e-3, 8)
            .with_encoding(enc)
            .with_arrangement(arr);
        let buf = arrange(&blocks, arr).unwrap();
        let bytes = compress_level(&buf, &cfg).unwrap();
        g.bench_function(BenchmarkId::new("compress", name), |b| b.iter(|| compress_level(black_box(&buf), &cfg).unwrap()));
        g.bench_function(BenchmarkId::new("decompress", name), |b| b.iter(|| decompress_level(black_box(&bytes)).unwrap()));
    }
    let cfg = CompressorConfig::new(Algorithm::Baseline1d, EbMode::RangeRelative, 1e-3, 8);
    g.bench_function("compress/baseline1d", |b| {
        b.iter(|| compress_1d_baseline(black_box(&blocks.values), &cfg, DEFAULT_CHUNK_ELEMS).unwrap())
    });
    g.finish();
}

fn huffman(c: &mut Criterion) {
    let symbols: Vec<u32> = (0..1_000_000u32).map(|i| 32768 + (i.wrapping_mul(2654435761) >> 28)).collect();
    let table = HuffmanTable::from_histogram(&histogram(&symbols)).unwrap();
    let (bytes, bits) = huffman_encode(&symbols, &table).unwrap();
    let mut g = c.benchmark_group("huffman");
    g.throughput(Throughput::Elements(symbols.len() as u64));
    g.bench_function("encode", |b| b.iter(|| huffman_encode(black_box(&symbols), &table).unwrap()));
    g.bench_function("decode", |b| b.iter(|| huffman_decode(black_box(&bytes), bits, symbols.len(), &table).unwrap()));
    g.finish();
}

fn container(c: &mut Criterion) {
    let ds = dataset(Preset::Smooth, 64, 8);
    let cfg = CompressorConfig::new(Algorithm::Lr, EbMode::RangeRelative, 1e-3, 8);
    let mut g = c.benchmark_group("container");
    g.sample_size(10);
    g.throughput(Throughput::Elements(ds.value_count() as u64));
    for ranks in [1, 4] {
        let plan = RankPlan::round_robin(&ds.skeleton(), ranks).unwrap();
        let bytes = container_write(&ds, &cfg, &plan, DEFAULT_CHUNK_ELEMS).unwrap().bytes;
        g.bench_function(BenchmarkId::new("write", ranks), |b| {
            b.iter(|| container_write(black_box(&ds), &cfg, &plan, DEFAULT_CHUNK_ELEMS).unwrap())
        });
        g.bench_function(BenchmarkId::new("read", ranks), |b| b.iter(|| container_read(black_box(&bytes)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, level_compressors, huffman, container);
criterion_main!(benches);
