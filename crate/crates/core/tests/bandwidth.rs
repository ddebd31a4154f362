mod common;

use std::f64::consts::PI;

use annulus_core::bandwidth::{gcv_score, rss_trace, OracleForm};
use annulus_core::simulate::generate;
use annulus_core::{
    build_annulus_kernel, default_grid, elbow_scan, fit_all, gcv_select, hat_coefficients,
    oracle_bandwidth, select_bandwidth, select_h_z, AnnulusObjective, CorrelationFamily,
    CorrelationModel, Dataset, Error, MeanFunction, NeighborIndex, RadialAnnulusKernel,
    SimScenario, SmoothingKernel,
};
use common::{adaptive_simpson, affine_dataset, uniform_points};

fn kz(c1: f64, c2: f64) -> RadialAnnulusKernel {
    build_annulus_kernel(c1, c2, 2, AnnulusObjective::MinProduct).unwrap()
}

fn sp_sample(c: f64, n: usize, seed: u64) -> Dataset {
    let model = CorrelationModel::new(CorrelationFamily::Spherical, c, 1.0, 2, 0.1).unwrap();
    let scn = SimScenario::new(MeanFunction::Mu2D, n, model, seed, 1).unwrap();
    generate(&scn, 0).unwrap().data
}

#[test]
fn affine_truth_picks_smallest_feasible_bandwidth() {
    let (data, _, _) = affine_dataset(200, 2, 41);
    let k = kz(1.0, 1.5);
    let grid = default_grid(
        &NeighborIndex::new(&data),
        &SmoothingKernel::Annulus(k.clone()),
    )
    .unwrap();
    let sel = select_h_z(&data, &k, &grid).unwrap();
    let first_feasible = sel.rss_trace.iter().position(|v| v.is_finite()).unwrap();
    assert_eq!(sel.h_z, grid[first_feasible]);
    assert!(sel
        .rss_trace
        .iter()
        .filter(|v| v.is_finite())
        .all(|&v| v < 1e-20));
}

#[test]
fn tiny_grid_is_infeasible() {
    let (data, _, _) = affine_dataset(100, 2, 43);
    let err = select_h_z(&data, &kz(1.0, 1.5), &[1e-6]).unwrap_err();
    assert!(matches!(err, Error::AllInfeasible { .. }), "{err}");
}

#[test]
fn subset_grid_keeps_the_minimizer() {
    let data = sp_sample(2.0, 300, 5);
    let k = kz(1.0, 1.5);
    let grid = default_grid(
        &NeighborIndex::new(&data),
        &SmoothingKernel::Annulus(k.clone()),
    )
    .unwrap();
    let full = select_h_z(&data, &k, &grid).unwrap();
    let at = grid.iter().position(|&h| h == full.h_z).unwrap();
    let subset: Vec<f64> = grid
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 3 == at % 3)
        .map(|(_, &h)| h)
        .collect();
    assert_eq!(select_h_z(&data, &k, &subset).unwrap().h_z, full.h_z);
}

#[test]
fn sp_selection_is_interior_and_nonsingular() {
    let data = sp_sample(2.0, 500, 20240601);
    let k = kz(1.0, 1.5);
    let ko = SmoothingKernel::epanechnikov(2);
    let grid = default_grid(
        &NeighborIndex::new(&data),
        &SmoothingKernel::Annulus(k.clone()),
    )
    .unwrap();
    let sel = select_bandwidth(&data, &k, &ko, &grid).unwrap();
    assert!(!sel.at_grid_edge, "h_z = {} at the grid edge", sel.h_z);
    let first = sel.rss_trace.iter().position(|v| v.is_finite()).unwrap();
    let last = sel.rss_trace.iter().rposition(|v| v.is_finite()).unwrap();
    assert!(sel.rss_trace[first..=last].iter().all(|v| v.is_finite()));
    assert_eq!(fit_all(&data, sel.h_o, &ko).singular_count(), 0);
}

#[test]
fn gcv_matches_hand_computation() {
    let points = uniform_points(10, 1, 3);
    let y: Vec<f64> = points.iter().map(|x| (3.0 * x).sin()).collect();
    let data = Dataset::new(points, 1, y.clone(), annulus_core::Metric::Euclidean).unwrap();
    let k = SmoothingKernel::epanechnikov(1);
    let h = 0.6;
    let mut rss = 0.0;
    let mut trace = 0.0;
    for i in 0..10 {
        let c = hat_coefficients(&data, i, h, &k).unwrap();
        let fitted: f64 = c.iter().zip(&y).map(|(a, b)| a * b).sum();
        rss += (y[i] - fitted).powi(2);
        trace += c[i];
    }
    let expected = (rss / 10.0) / (1.0 - trace / 10.0).powi(2);
    let got = gcv_score(&data, h, &k).unwrap();
    assert!(
        (got - expected).abs() < 1e-12 * expected.max(1.0),
        "{got} vs {expected}"
    );
}

#[test]
fn gcv_tracks_mse_under_independent_errors() {
    // A vanishing correlation range makes the errors independent at n = 400.
    let model = CorrelationModel::new(CorrelationFamily::Spherical, 1e-6, 1.0, 2, 0.1).unwrap();
    let scn = SimScenario::new(MeanFunction::Mu2D, 400, model, 77, 1).unwrap();
    let sim = generate(&scn, 0).unwrap();
    let ko = SmoothingKernel::epanechnikov(2);
    let grid = default_grid(&NeighborIndex::new(&sim.data), &ko).unwrap();
    let gcv = gcv_select(&sim.data, &ko, &grid).unwrap();
    let mse: Vec<f64> = grid
        .iter()
        .map(|&h| {
            let fit = fit_all(&sim.data, h, &ko);
            if fit.singular_count() > 0 {
                return f64::INFINITY;
            }
            fit.fitted
                .iter()
                .zip(&sim.truth)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                / 400.0
        })
        .collect();
    let best = grid[mse
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0];
    let ratio = gcv.h / best;
    assert!(
        (0.5..=2.0).contains(&ratio),
        "gcv {} vs mse-optimal {best}",
        gcv.h
    );
}

#[test]
fn gcv_undersmooths_strong_correlation() {
    let data = sp_sample(3.0, 500, 20240601);
    let ko = SmoothingKernel::epanechnikov(2);
    let k = kz(2.0, 2.5);
    let za_grid = default_grid(
        &NeighborIndex::new(&data),
        &SmoothingKernel::Annulus(k.clone()),
    )
    .unwrap();
    let h_o = select_bandwidth(&data, &k, &ko, &za_grid).unwrap().h_o;
    let grid = default_grid(&NeighborIndex::new(&data), &ko).unwrap();
    let gcv = gcv_select(&data, &ko, &grid).unwrap();
    assert!(gcv.h < h_o, "gcv {} not below {h_o}", gcv.h);
}

#[test]
fn rss_trace_is_finite_above_the_lower_bound() {
    let data = sp_sample(2.0, 300, 9);
    let k = SmoothingKernel::Annulus(kz(1.0, 1.5));
    let grid = default_grid(&NeighborIndex::new(&data), &k).unwrap();
    let trace = rss_trace(&data, &k, &grid);
    // Large bandwidths can leave central points with an empty annulus, so
    // the feasible set is a contiguous block that need not reach the top.
    let first = trace.iter().position(|v| v.is_finite()).unwrap();
    let last = trace.iter().rposition(|v| v.is_finite()).unwrap();
    assert!(
        first <= 1 && last >= grid.len() - 3,
        "feasible block {first}..={last}"
    );
    assert!(trace[first..=last]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0));
}

#[test]
fn integrated_correlation_matches_radial_integrals() {
    let model = |family, c, dim| CorrelationModel::new(family, c, 1.0, dim, 0.1).unwrap();
    let sp = model(CorrelationFamily::Spherical, 2.0, 2)
        .integrated_correlation()
        .unwrap();
    let oracle = 2.0
        * PI
        * adaptive_simpson(
            &|s| s * (1.0 - 1.5 * s / 2.0 + 0.5 * (s / 2.0).powi(3)),
            0.0,
            2.0,
            1e-13,
        );
    assert!((sp - PI * 4.0 / 5.0).abs() < 1e-3);
    assert!((sp - oracle).abs() < 1e-8);
    let exp = model(CorrelationFamily::Exponential, 2.0, 2)
        .integrated_correlation()
        .unwrap();
    assert!((exp - 2.0 * PI / 4.0).abs() < 1e-6, "{exp}");
    let invq = model(CorrelationFamily::InverseQuadratic, 4.0, 1)
        .integrated_correlation()
        .unwrap();
    assert!((invq - PI / 2.0).abs() < 1e-6, "{invq}");
    assert!(model(CorrelationFamily::InverseQuadratic, 4.0, 2)
        .integrated_correlation()
        .is_err());
}

#[test]
fn oracle_scales_with_n_and_rejects_zero_noise() {
    let ko = SmoothingKernel::epanechnikov(2);
    for alpha in [1.0, 0.5] {
        let m = CorrelationModel::new(CorrelationFamily::Exponential, 2.0, alpha, 2, 0.1).unwrap();
        for form in [OracleForm::LeadingTerm, OracleForm::AsPrinted] {
            let a = oracle_bandwidth(&m, MeanFunction::Mu2D, 500, &ko, form).unwrap();
            let b = oracle_bandwidth(&m, MeanFunction::Mu2D, 1000, &ko, form).unwrap();
            assert!((b / a - 2f64.powf(-alpha / 6.0)).abs() < 1e-12);
        }
    }
    let quiet = CorrelationModel::new(CorrelationFamily::Spherical, 2.0, 1.0, 2, 0.0).unwrap();
    let err = oracle_bandwidth(
        &quiet,
        MeanFunction::Mu2D,
        500,
        &ko,
        OracleForm::LeadingTerm,
    )
    .unwrap_err();
    assert!(matches!(err, Error::DegenerateNoise));
    assert!(err.to_string().contains("degenerate noise"));
}

#[test]
fn elbow_is_deterministic_and_needs_candidates() {
    let data = sp_sample(2.0, 200, 31);
    let c1: Vec<f64> = (2..=8).map(|k| 0.25 * k as f64).collect();
    let a = elbow_scan(&data, &c1, 2, AnnulusObjective::MinAmise);
    let b = elbow_scan(&data, &c1, 2, AnnulusObjective::MinAmise);
    match (a, b) {
        (Ok(a), Ok(b)) => {
            assert_eq!(a.chosen_c1.to_bits(), b.chosen_c1.to_bits());
            assert_eq!(a.cbar_list(), b.cbar_list());
        }
        (Err(a), Err(b)) => assert_eq!(a.to_string(), b.to_string()),
        (a, b) => panic!("runs disagree: {a:?} / {b:?}"),
    }
    let err = elbow_scan(&data, &[1.0], 2, AnnulusObjective::MinAmise).unwrap_err();
    assert!(err
        .to_string()
        .contains("need ≥ 3 candidates for stability detection"));
}
