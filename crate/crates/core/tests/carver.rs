mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use seamforge_core::carver::{
    cumulative_matrix, insert_k_seams, insert_seam, merge_seam, optimal_seam, remove_k_seams, remove_seam,
    transpose_for_horizontal, CarveSession, EditEvent, EnergyMode, Orientation, SeamBias, SynthesisKind,
};
use seamforge_core::energy::{backward_energy, forward_costs, saliency_energy, EnergyMap};
use seamforge_core::{BitDepth, Origin, ProvenanceGrid, RasterImage, Seam, Variant};

fn bits(p: &[f64]) -> Vec<u64> {
    p.iter().map(|v| v.to_bits()).collect()
}

#[test]
fn random_six_by_eight_tables_match_enumeration() {
    let mut rng = rng(21);
    for _ in 0..50 {
        let e = EnergyMap::from_fn(6, 8, |_, _| rng.random_range(0.0..1.0));
        let m = cumulative_matrix(&e, EnergyMode::Backward, None).unwrap();
        let seam = optimal_seam(&m);
        assert_eq!(m.last_row_min().1, brute_force_min(&e, None));
        assert_eq!(path_cost(&e, None, seam.columns()), m.last_row_min().1);
        Seam::vertical(seam.columns().to_vec(), 6).unwrap();
    }
}

#[test]
fn expensive_column_avoided_where_connectivity_allows() {
    for c in 0..8 {
        let e = EnergyMap::from_fn(8, 8, |_, col| if col == c { 10.0 } else { 0.0 });
        let seam = optimal_seam(&cumulative_matrix(&e, EnergyMode::Backward, None).unwrap());
        assert!(
            seam.columns().iter().all(|&s| s != c),
            "column {c}: {:?}",
            seam.columns()
        );
        assert_eq!(m_cost(&e, &seam), brute_force_min(&e, None));
    }
}

fn m_cost(e: &EnergyMap, seam: &Seam) -> f64 {
    path_cost(e, None, seam.columns())
}

#[test]
fn every_removal_step_is_optimal_for_the_current_image() {
    let mut rng = rng(22);
    for variant in [Variant::Backward, Variant::Forward, Variant::Saliency] {
        let img = noise_image(&mut rng, 8, 7, 3);
        let saliency = saliency_energy(&img);
        let mut session = CarveSession::new(img);
        let mut static_map = saliency;
        for _ in 0..5 {
            let current = session.image().clone();
            let seam = session.reduce_once(variant, SeamBias::none()).unwrap();
            let EditEvent::Removal { cost, .. } = session.history().last().unwrap() else {
                panic!("expected a removal")
            };
            let expected = match variant {
                Variant::Backward => brute_force_min(&backward_energy(&current), None),
                Variant::Forward => {
                    let (w, h) = current.dims();
                    brute_force_min(&EnergyMap::zeros(w, h), Some(&forward_costs(&current)))
                }
                _ => {
                    let best = brute_force_min(&static_map, None);
                    static_map = static_map.remove_columns(seam.columns()).unwrap();
                    best
                }
            };
            assert_eq!(*cost, expected, "{variant:?}");
        }
    }
}

#[test]
fn costs_do_not_decrease_on_uniform_plus_noise() {
    let mut rng = rng(23);
    let img = RasterImage::from_fn(24, 16, 1, BitDepth::Sixteen, |_, _, _| {
        0.5 + rng.random_range(-0.01..0.01)
    })
    .unwrap();
    let mut session = CarveSession::new(img.clone());
    session.reduce(8, Variant::Saliency, SeamBias::none()).unwrap();
    let costs: Vec<f64> = session
        .history()
        .iter()
        .map(|e| match e {
            EditEvent::Removal { cost, .. } => *cost,
            _ => unreachable!(),
        })
        .collect();
    assert!(costs.windows(2).all(|w| w[0] <= w[1]), "{costs:?}");
}

#[test]
fn removals_follow_provenance_and_width_algebra() {
    let mut rng = rng(24);
    for variant in Variant::ALL {
        let img = noise_image(&mut rng, 20, 9, 3);
        let mut session = CarveSession::new(img.clone());
        session.reduce(6, variant, SeamBias::none()).unwrap();
        assert_eq!(session.width(), 14);
        session.enlarge(9, variant, SeamBias::none()).unwrap();
        assert_eq!(session.width(), 20 - 6 + 9);
        let prov = session.provenance();
        prov.validate().unwrap();
        for r in 0..prov.height() {
            for c in 0..prov.width() {
                match prov.get(r, c) {
                    Origin::Original { row, col } => {
                        assert_eq!(bits(session.image().pixel(r, c)), bits(img.pixel(row, col)));
                    }
                    Origin::Synthesized(id) => {
                        let kind = prov.record(id).unwrap().kind;
                        assert!(variant == Variant::Merge || kind == SynthesisKind::Inserted);
                    }
                }
            }
        }
    }
}

#[test]
fn merged_pixels_are_exact_means_of_their_parents() {
    let mut rng = rng(25);
    let img = noise_image(&mut rng, 10, 6, 3);
    let (out, prov) = {
        let mut s = CarveSession::new(img.clone());
        s.reduce(1, Variant::Merge, SeamBias::none()).unwrap();
        (s.image().clone(), s.provenance().clone())
    };
    let mut merged = 0;
    for r in 0..6 {
        for c in 0..9 {
            if let Origin::Synthesized(id) = prov.get(r, c) {
                let rec = prov.record(id).unwrap();
                assert_eq!(rec.kind, SynthesisKind::Merged);
                let [a, b] = rec.parents.map(|p| p.original().unwrap());
                for k in 0..3 {
                    let mean = (img.sample(a.0, a.1, k) + img.sample(b.0, b.1, k)) / 2.0;
                    assert_eq!(out.sample(r, c, k), mean);
                }
                merged += 1;
            }
        }
    }
    assert_eq!(merged, 6);
}

#[test]
fn batch_insertion_restores_width_after_removal() {
    let mut rng = rng(26);
    let img = noise_image(&mut rng, 30, 10, 3);
    let (small, seams, _) = remove_k_seams(&img, 7, Variant::Forward, None, None).unwrap();
    assert_eq!(seams.len(), 7);
    let (big, paths) = insert_k_seams(&small, 7, Variant::Forward, None).unwrap();
    assert_eq!(big.dims(), img.dims());
    assert_eq!(paths.len(), 7);
    let mut seen = std::collections::HashSet::new();
    for p in &paths {
        for (r, &c) in p.iter().enumerate() {
            assert!(seen.insert((r, c)), "inserted positions repeat");
        }
    }
}

#[test]
fn horizontal_seams_are_vertical_seams_of_the_transpose() {
    let mut rng = rng(27);
    let img = noise_image(&mut rng, 7, 5, 3);
    assert_eq!(transpose_for_horizontal(&transpose_for_horizontal(&img)), img);
    let t = transpose_for_horizontal(&img);
    let cols = optimal_seam(&cumulative_matrix(&backward_energy(&t), EnergyMode::Backward, None).unwrap());
    let horizontal = Seam::new(cols.columns().to_vec(), 5, Orientation::Horizontal).unwrap();
    let (h_out, h_prov) = remove_seam(&img, &horizontal, ProvenanceGrid::identity(7, 5)).unwrap();
    let (v_out, v_prov) = remove_seam(&t, &cols, ProvenanceGrid::identity(5, 7)).unwrap();
    assert_eq!(h_out.dims(), (7, 4));
    assert_eq!(h_out, transpose_for_horizontal(&v_out));
    assert_eq!(h_prov, v_prov.transposed());

    let (ins, _, seam) = insert_seam(&img, &horizontal, ProvenanceGrid::identity(7, 5)).unwrap();
    assert_eq!(ins.dims(), (7, 6));
    assert_eq!(seam.orientation(), Orientation::Horizontal);
    let (merged, _) = merge_seam(&img, &horizontal, ProvenanceGrid::identity(7, 5)).unwrap();
    assert_eq!(merged.dims(), (7, 4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn removal_provenance_invariant(seed: u64, w in 2usize..14, h in 1usize..10, frac in 0.0f64..0.5) {
        let mut rng = rng(seed);
        let img = noise_image(&mut rng, w, h, 1);
        let k = ((w as f64) * frac) as usize;
        let (out, seams, prov) = remove_k_seams(&img, k, Variant::Backward, None, None).unwrap();
        prop_assert_eq!(out.width(), w - k);
        prop_assert_eq!(seams.len(), k);
        for r in 0..h {
            let mut last = None;
            for c in 0..w - k {
                let (row, col) = prov.get(r, c).original().unwrap();
                prop_assert_eq!(row, r);
                prop_assert!(last.map_or(true, |l| col > l));
                last = Some(col);
                prop_assert_eq!(bits(out.pixel(r, c)), bits(img.pixel(row, col)));
            }
        }
        for s in &seams {
            for pair in s.columns().windows(2) {
                prop_assert!(pair[0].abs_diff(pair[1]) <= 1);
            }
        }
    }

    #[test]
    fn transposed_provenance_is_consistent(seed: u64, w in 2usize..9, h in 3usize..9) {
        let mut rng = rng(seed);
        let img = noise_image(&mut rng, w, h, 1);
        let mut session = CarveSession::new(img.transposed());
        session.reduce(1, Variant::Forward, SeamBias::none()).unwrap();
        session.enlarge(1, Variant::Forward, SeamBias::none()).unwrap();
        let prov = session.provenance().transposed();
        let back = session.image().transposed();
        for r in 0..back.height() {
            for c in 0..back.width() {
                if let Some((row, col)) = prov.get(r, c).original() {
                    prop_assert_eq!(bits(back.pixel(r, c)), bits(img.pixel(row, col)));
                }
            }
        }
        prop_assert_eq!(prov.transposed(), session.provenance().clone());
    }
}
