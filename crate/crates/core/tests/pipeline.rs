use amrpress_core::amr::synth::{generate_synthetic, Preset, SyntheticSpec};
use amrpress_core::amr::AmrDataset;
use amrpress_core::container::{container_read, container_write, read_container_header};
use amrpress_core::harness::{run_simulated_write, RankPlan};
use amrpress_core::metrics::{bound_violations, quality_report};
use amrpress_core::preprocess::{remove_redundancy, Arrangement};
use amrpress_core::sz::{huffman_decode, huffman_encode, histogram, Algorithm, CompressorConfig, EbMode, Encoding, HuffmanTable};
use proptest::prelude::*;

fn synth(preset: Preset, n: usize, u: usize, levels: usize, fields: usize, seed: u64) -> AmrDataset {
    generate_synthetic(&SyntheticSpec {
        preset,
        dims: [n, n, n],
        levels,
        unit_block_size: u,
        refine_threshold: 0.85,
        seed,
        max_grid_size: 16,
        field_count: fields,
    })
    .unwrap()
}

fn algorithm() -> impl Strategy<Value = Algorithm> {
    prop::sample::select(vec![Algorithm::Lr, Algorithm::Interp, Algorithm::Baseline1d])
}

fn encoding() -> impl Strategy<Value = Encoding> {
    prop::sample::select(vec![Encoding::Sle, Encoding::PerBlock, Encoding::LinearMerge])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn error_bound_holds_through_container(
        alg in algorithm(),
        enc in encoding(),
        cluster: bool,
        rough: bool,
        rel: bool,
        eb_exp in 1i32..5,
        ranks in 1usize..5,
        seed in 0u64..1000,
    ) {
        let ds = synth(if rough { Preset::Rough } else { Preset::Smooth }, 32, 8, 2, 2, seed);
        let mode = if rel { EbMode::RangeRelative } else { EbMode::Absolute };
        let cfg = CompressorConfig::new(alg, mode, 10f64.powi(-eb_exp), 8)
            .with_encoding(enc)
            .with_arrangement(if cluster { Arrangement::Cluster } else { Arrangement::Linear });
        let plan = RankPlan::round_robin(&ds.skeleton(), ranks).unwrap();
        let out = container_write(&ds, &cfg, &plan, 1000).unwrap();
        let back = container_read(&out.bytes).unwrap();
        prop_assert_eq!(back.skeleton(), ds.skeleton());
        prop_assert_eq!(bound_violations(&ds, &back, &cfg, &plan), 0);
    }

    #[test]
    fn huffman_round_trip(symbols in prop::collection::vec(0u32..300, 1..3000)) {
        let table = HuffmanTable::from_histogram(&histogram(&symbols)).unwrap();
        let (bytes, bits) = huffman_encode(&symbols, &table).unwrap();
        prop_assert_eq!(huffman_decode(&bytes, bits, symbols.len(), &table).unwrap(), symbols);
    }
}

#[test]
fn decompression_needs_only_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.amrc");
    let cfg = CompressorConfig::new(Algorithm::Lr, EbMode::Absolute, 1e-3, 8);
    let kept = {
        let ds = synth(Preset::Rough, 32, 8, 3, 2, 1);
        let plan = RankPlan::round_robin(&ds.skeleton(), 3).unwrap();
        std::fs::write(&path, container_write(&ds, &cfg, &plan, 1024).unwrap().bytes).unwrap();
        ds
    };
    let back = container_read(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(back.skeleton(), kept.skeleton());
    let plan = RankPlan::round_robin(&kept.skeleton(), 3).unwrap();
    assert_eq!(bound_violations(&kept, &back, &cfg, &plan), 0);
}

#[test]
fn rank_count_changes_metadata_only() {
    let ds = synth(Preset::Smooth, 32, 8, 2, 1, 5);
    let cfg = CompressorConfig::new(Algorithm::Lr, EbMode::Absolute, 1e-4, 8);
    for ranks in [1, 2, 3, 5, 8] {
        let (a, _) = run_simulated_write(&ds, &cfg, ranks, 0.03, 1024).unwrap();
        let (b, _) = run_simulated_write(&ds, &cfg, ranks, 0.03, 1024).unwrap();
        assert_eq!(a.bytes, b.bytes, "R={ranks} not deterministic");
        let back = container_read(&a.bytes).unwrap();
        let plan = RankPlan::round_robin(&ds.skeleton(), ranks).unwrap();
        assert_eq!(bound_violations(&ds, &back, &cfg, &plan), 0);
        let finest = ds.levels.len() - 1;
        for (p, q) in ds.levels[finest].fields[0].iter().flatten().zip(back.levels[finest].fields[0].iter().flatten()) {
            assert!((p - q).abs() <= 1e-4);
        }
    }
}

#[test]
fn report_reconciles_with_file() {
    let ds = synth(Preset::Rough, 32, 8, 2, 3, 2);
    let cfg = CompressorConfig::new(Algorithm::Interp, EbMode::RangeRelative, 1e-3, 8);
    let (out, report) = run_simulated_write(&ds, &cfg, 4, 0.03, 1024).unwrap();
    let (header, records) = read_container_header(&out.bytes).unwrap();
    let payload: u64 = records.iter().map(|r| r.compressed_len).sum();
    assert_eq!(report.payload_bytes, payload);
    assert_eq!(report.file_bytes as usize, out.bytes.len());
    assert_eq!(records.last().map(|r| r.offset + r.compressed_len), Some(out.bytes.len() as u64));
    assert_eq!(report.invocations, records.len() as u64);
    assert_eq!(report.invocations_per_rank(), vec![2 * 3; 4]);
    for r in 0..4 {
        let sum: u64 = records.iter().filter(|c| c.rank as usize == r).map(|c| c.actual_elements).sum();
        assert_eq!(header.rank_original_elements[r], sum);
    }
    // No chunk mixes levels or fields, and each (level, field) is cut once per rank.
    for l in 0..2u16 {
        for f in 0..3u16 {
            let n = records.iter().filter(|c| c.level == l && c.field == f).count();
            assert_eq!(n, 4);
        }
    }
    let masks = remove_redundancy(&ds.skeleton());
    let kept: u64 = masks.iter().map(|m| m.kept_blocks() as u64 * 512).sum::<u64>() * 3;
    assert_eq!(records.iter().map(|r| r.actual_elements).sum::<u64>(), kept);
    let padding: u64 = records
        .iter()
        .map(|r| header.chunk_elements[r.level as usize][r.field as usize] as u64 - r.actual_elements)
        .sum();
    assert_eq!(report.padding_elements, padding);
    assert_eq!(report.modeled_startup_seconds, report.invocations as f64 * 0.03);
}

#[test]
fn quality_report_rows() {
    let ds = synth(Preset::Smooth, 32, 8, 2, 2, 3);
    let cfg = CompressorConfig::new(Algorithm::Lr, EbMode::Absolute, 1e-3, 8);
    let plan = RankPlan::round_robin(&ds.skeleton(), 2).unwrap();
    let out = container_write(&ds, &cfg, &plan, 1024).unwrap();
    let back = container_read(&out.bytes).unwrap();
    let q = quality_report(&ds, &back, &out.records, out.bytes.len() as u64).unwrap();
    assert_eq!(q.rows.len(), 4);
    assert_eq!(q.fields.len(), 2);
    assert!(q.total.max_abs_error <= 1e-3);
    assert!(q.rows.iter().all(|r| r.psnr.is_finite() && r.psnr > 40.0));
    assert_eq!(q.total.compression_ratio, out.compression_ratio());
    assert!((q.total.bitrate - 64.0 / q.total.compression_ratio).abs() < 1e-9);
    let identical = quality_report(&ds, &ds, &out.records, out.bytes.len() as u64).unwrap();
    assert!(identical.fields.iter().all(|r| r.psnr == f64::INFINITY));
}
