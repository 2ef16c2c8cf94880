mod common;

use common::brute_mask_coverage;
use protosample::eval::{coverage_counts, coverage_metrics, fixture_dataset, run_sweep, select_for_strategy, Denominator, SweepSpec};
use protosample::io::Strategy;

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

#[test]
fn prototype_sampling_annotates_more_class_area_than_random() {
    let data = fixture_dataset(7, 10).unwrap();
    let stride = data[0].meta.stride_px;
    let spec = SweepSpec::new(
        vec![Strategy::Random, Strategy::ProtoStandard, Strategy::ProtoAdaptive],
        vec![3],
        vec![8 * stride],
        SEEDS.to_vec(),
    );
    let table = run_sweep(&data, &spec).unwrap();
    let med = |s| table.median_for(s, 3, 8 * stride).unwrap().class_area_pct.unwrap();
    let (random, standard, adaptive) = (med(Strategy::Random), med(Strategy::ProtoStandard), med(Strategy::ProtoAdaptive));
    assert!(standard >= adaptive);
    assert!(standard - random >= 0.2);
    assert!(adaptive - random >= 0.2);
}

#[test]
fn single_slide_whole_coverage() {
    let data = fixture_dataset(1, 1).unwrap();
    let w = &data[0];
    let full = vec![protosample::io::Region {
        wsi_id: w.meta.wsi_id.clone(),
        x_px: 0,
        y_px: 0,
        w_px: w.meta.level0_w,
        h_px: w.meta.level0_h,
        score: 0.0,
        rank: 0,
        strategy: Strategy::Random,
    }];
    let r = coverage_metrics(&full, &w.gt, Denominator::Tissue);
    assert_eq!(r.annotated_tissue_pct, 1.0);
    assert_eq!(r.class_area_pct, Some(1.0));
    assert_eq!(r.point_capture_ratio, Some(1.0));
}

#[test]
fn pooled_counts_match_pixel_enumeration() {
    let data = fixture_dataset(7, 4).unwrap();
    for strategy in [Strategy::Random, Strategy::ProtoStandard, Strategy::ProtoAdaptive, Strategy::Diversity] {
        let spec = SweepSpec::new(vec![strategy], vec![3], vec![2048], vec![1]);
        let sel = select_for_strategy(&data, &spec.config(strategy, 3, 2048, 1)).unwrap();
        for w in &data {
            let mine: Vec<_> = sel.regions.iter().filter(|r| r.wsi_id == w.meta.wsi_id).cloned().collect();
            let c = coverage_counts(&sel.regions, &w.gt, Some(&w.meta.wsi_id));
            let (th, tt) = brute_mask_coverage(&w.gt.tissue_mask, &mine);
            let (ch, ct) = brute_mask_coverage(w.gt.class_mask.as_ref().unwrap(), &mine);
            assert_eq!((c.tissue_covered, c.tissue_total), (th, tt), "{strategy}");
            assert_eq!((c.class_covered, c.class_total), (Some(ch), Some(ct)), "{strategy}");
        }
    }
}
