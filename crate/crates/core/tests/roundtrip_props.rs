use std::io::Cursor;

use biphoton::grid::ArmWindow;
use biphoton::io::csv::{read_map_csv, write_map_csv};
use biphoton::io::frames::{FrameReader, FrameWriter};
use biphoton::io::tensor::{read_grid, write_grid};
use biphoton::{AmplitudeGrid, CameraFrame, CorrelationAccumulator, CrystalPumpParams, GridSpec, Map2};
use num_complex::Complex64;
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;

const N_K: usize = 3;
const N_L: usize = 2;
const BINS: u32 = (N_K * N_L) as u32;

fn grid() -> GridSpec {
    GridSpec {
        n_k: N_K,
        n_lambda: N_L,
        k_step: 2.0,
        lambda_step: 0.5,
        signal: ArmWindow { k_center: 10.0, lambda_center: 800.0 },
        idler: ArmWindow { k_center: -10.0, lambda_center: 800.0 },
    }
}

fn arm_events() -> impl Strategy<Value = Vec<u32>> {
    btree_set(0..BINS, 0..=BINS as usize).prop_map(|s| s.into_iter().collect())
}

fn frames() -> impl Strategy<Value = Vec<CameraFrame>> {
    vec((arm_events(), arm_events()), 0..40).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (s, d))| CameraFrame {
                frame_index: i as u64,
                signal_events: s,
                idler_events: d,
            })
            .collect()
    })
}

fn accumulate(fs: &[CameraFrame]) -> CorrelationAccumulator {
    let mut acc = CorrelationAccumulator::new(grid());
    for f in fs {
        acc.ingest_frame(f).unwrap();
    }
    acc
}

proptest! {
    #[test]
    fn merge_of_any_partition_equals_whole(fs in frames(), cuts in vec(0usize..40, 0..4)) {
        let whole = accumulate(&fs);
        let mut cuts: Vec<usize> = cuts.into_iter().map(|c| c.min(fs.len())).collect();
        cuts.push(0);
        cuts.push(fs.len());
        cuts.sort_unstable();
        let mut merged = CorrelationAccumulator::new(grid());
        // merge in reverse to exercise commutativity as well
        for w in cuts.windows(2).rev() {
            merged.merge(&accumulate(&fs[w[0]..w[1]])).unwrap();
        }
        prop_assert_eq!(merged, whole);
    }

    #[test]
    fn frame_file_round_trip(fs in frames(), seed in any::<u64>()) {
        let mut w = FrameWriter::new(Cursor::new(Vec::new()), N_K as u32, N_L as u32, seed).unwrap();
        for f in &fs {
            w.write_frame(f).unwrap();
        }
        let (cursor, n) = w.finish().unwrap();
        prop_assert_eq!(n, fs.len() as u64);
        let r = FrameReader::new(Cursor::new(cursor.into_inner())).unwrap();
        prop_assert_eq!(r.header.seed, seed);
        prop_assert_eq!(r.header.n_frames, fs.len() as u64);
        let back: Vec<CameraFrame> = r.collect::<Result<_, _>>().unwrap();
        prop_assert_eq!(back, fs);
    }

    #[test]
    fn tensor_round_trip(
        vals in vec((any::<f64>(), any::<f64>()), (N_K * N_L).pow(2)),
        norm in any::<bool>(),
    ) {
        let g = AmplitudeGrid {
            params: CrystalPumpParams::reference(),
            grid: grid(),
            values: vals.iter().map(|(a, b)| Complex64::new(*a, *b)).collect(),
            norm_applied: norm,
        };
        let mut buf = Vec::new();
        write_grid(&g, &mut buf).unwrap();
        let back = read_grid(Cursor::new(buf)).unwrap();
        prop_assert_eq!(back.norm_applied, norm);
        prop_assert_eq!(back.grid.n_k, N_K);
        for (a, b) in back.values.iter().zip(&g.values) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn csv_round_trip(
        rows in vec(-1e6f64..1e6, 1..5),
        cols in vec(-1e6f64..1e6, 1..5),
        seed in vec(prop::option::of(any::<f64>().prop_filter("finite", |v| v.is_finite())), 25),
    ) {
        let n = rows.len() * cols.len();
        let m = Map2::new("a", rows, "b", cols, seed[..n].to_vec());
        let mut buf = Vec::new();
        write_map_csv(&m, &mut buf).unwrap();
        prop_assert_eq!(read_map_csv(buf.as_slice()).unwrap(), m);
    }
}

#[test]
fn one_bin_tensor_round_trip() {
    let mut g1 = grid();
    g1.n_k = 1;
    g1.n_lambda = 1;
    let g = AmplitudeGrid {
        params: CrystalPumpParams::reference(),
        grid: g1,
        values: vec![Complex64::new(0.25, -1.5)],
        norm_applied: true,
    };
    let mut buf = Vec::new();
    write_grid(&g, &mut buf).unwrap();
    let back = read_grid(Cursor::new(buf)).unwrap();
    assert_eq!(back.values, g.values);
    assert_eq!(back.grid, g.grid);
}
