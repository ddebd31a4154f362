mod common;

use annulus_core::simulate::{
    correlation_penalty, covariance_matrix, factor_covariance, generate, mean_sd, mse_prac,
    mse_sigma2, parse_scenarios, run_scenario, sse_cor, trial_rng, write_table_csv, HarnessOptions,
};
use annulus_core::{
    correlation_value, pairwise_distances, CorrelationFamily, CorrelationModel, Dataset,
    MeanFunction, Method, Metric, SimScenario, SmoothingKernel,
};
use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

const FAMILIES: [CorrelationFamily; 3] = [
    CorrelationFamily::Spherical,
    CorrelationFamily::Exponential,
    CorrelationFamily::InverseQuadratic,
];

fn model(family: CorrelationFamily, c: f64, sigma2: f64) -> CorrelationModel {
    CorrelationModel::new(family, c, 1.0, 2, sigma2).unwrap()
}

#[test]
fn correlation_families() {
    let n = 500;
    let unit = (n as f64).powf(-0.5);
    for f in FAMILIES {
        let m = model(f, 2.0, 0.1);
        assert_eq!(correlation_value(&m, 0.0, n), 1.0);
        let mut prev = 1.0;
        for k in 1..=400 {
            let r = correlation_value(&m, k as f64 * 1e-3, n);
            assert!(r <= prev && r >= 0.0, "{f:?} not monotone at step {k}");
            prev = r;
        }
    }
    let sp = model(CorrelationFamily::Spherical, 2.0, 0.1);
    assert_eq!(correlation_value(&sp, 2.0 * unit, n), 0.0);
    let iq = model(CorrelationFamily::InverseQuadratic, 4.0, 0.1);
    assert!((correlation_value(&iq, unit / 2.0, n) - 0.5).abs() < 1e-14);
}

#[test]
fn zero_noise_returns_the_mean() {
    let scn = SimScenario::new(
        MeanFunction::Mu2D,
        100,
        model(CorrelationFamily::Spherical, 2.0, 0.0),
        4,
        1,
    )
    .unwrap();
    let sim = generate(&scn, 0).unwrap();
    assert_eq!(sim.data.responses(), sim.truth.as_slice());
    for (i, m) in sim.truth.iter().enumerate() {
        assert_eq!(*m, MeanFunction::Mu2D.eval(sim.data.point(i)));
    }
}

#[test]
fn generation_is_deterministic() {
    let scn = SimScenario::new(
        MeanFunction::Mu2D,
        200,
        model(CorrelationFamily::Exponential, 2.0, 0.1),
        9,
        2,
    )
    .unwrap();
    let a = generate(&scn, 1).unwrap();
    let b = generate(&scn, 1).unwrap();
    assert_eq!(a.data.points(), b.data.points());
    assert_eq!(a.errors, b.errors);
    assert_ne!(a.errors, generate(&scn, 0).unwrap().errors);
}

#[test]
fn covariance_matrix_is_symmetric_and_factorizes() {
    let scn = SimScenario::new(
        MeanFunction::Mu2D,
        300,
        model(CorrelationFamily::Spherical, 3.0, 0.1),
        2,
        1,
    )
    .unwrap();
    let sim = generate(&scn, 0).unwrap();
    let sigma = covariance_matrix(sim.data.points(), 2, &scn.model);
    assert_eq!((&sigma - sigma.transpose()).abs().max(), 0.0);
    let l = factor_covariance(&sigma, 0.1).unwrap();
    let back = &l * l.transpose();
    assert!((back - &sigma).abs().max() < 1e-8);
}

#[test]
fn monte_carlo_moments_on_a_fixed_pair() {
    // Two points a fixed distance apart, with the n-scaling of a 500-point sample.
    let n = 500;
    let m = model(CorrelationFamily::Exponential, 2.0, 0.1);
    let t = 0.03;
    let rho = m.correlation(t, n);
    let mut sigma = nalgebra::DMatrix::from_element(2, 2, 0.1 * rho);
    sigma[(0, 0)] = 0.1;
    sigma[(1, 1)] = 0.1;
    let l = factor_covariance(&sigma, 0.1).unwrap();
    let mut rng = trial_rng(1234, 0);
    let reps = 10_000;
    let (mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0);
    for _ in 0..reps {
        let z = DVector::from_iterator(2, (0..2).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let e = &l * z;
        s11 += e[0] * e[0];
        s22 += e[1] * e[1];
        s12 += e[0] * e[1];
    }
    let r = reps as f64;
    let var = s11 / r;
    // Var of a sample variance of N(0, s2) is 2 s2^2 / r.
    assert!(
        (var - 0.1).abs() < 3.0 * (2.0 * 0.01 / r).sqrt(),
        "variance {var}"
    );
    let corr = s12 / (s11 * s22).sqrt();
    assert!(
        (corr - rho).abs() < 3.0 * (1.0 - rho * rho) / r.sqrt(),
        "corr {corr} vs {rho}"
    );
}

#[test]
fn metric_arithmetic() {
    assert_eq!(mse_prac(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
    assert_eq!(mse_prac(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
    assert_eq!(mse_sigma2(&[0.1, 0.1], 0.1).unwrap(), 0.0);
    assert!((mse_sigma2(&[0.11], 0.1).unwrap() - 1e-4).abs() < 1e-15);
    assert_eq!(mean_sd(&[3.0]), (3.0, 0.0));

    let scn = SimScenario::new(
        MeanFunction::Mu2D,
        60,
        model(CorrelationFamily::Spherical, 2.0, 0.1),
        1,
        1,
    )
    .unwrap();
    let sim = generate(&scn, 0).unwrap();
    let dist = pairwise_distances(&sim.data);
    let exact = sse_cor(|d| scn.model.correlation(d, 60), &scn.model, &dist, 0.02).unwrap();
    assert_eq!(exact, 0.0);
    let tiny = model(CorrelationFamily::Spherical, 1e-9, 0.1);
    assert_eq!(sse_cor(|_| 0.7, &tiny, &dist, 0.02).unwrap(), 0.0);
}

#[test]
fn penalty_by_hand_on_three_points() {
    let rows = vec![
        vec![0.0, 0.0],
        vec![0.1, 0.0],
        vec![0.0, 0.1],
        vec![0.12, 0.1],
    ];
    let data = Dataset::from_rows(&rows, vec![0.0; 4], Metric::Euclidean).unwrap();
    let k = SmoothingKernel::epanechnikov(2);
    let m = CorrelationModel::new(CorrelationFamily::Exponential, 1.0, 1.0, 2, 0.3).unwrap();
    let h = 0.5;
    let mut total = 0.0;
    for i in 0..4 {
        let c = annulus_core::hat_coefficients(&data, i, h, &k).unwrap();
        for s in 0..4 {
            if s != i {
                total += c[s] * m.correlation(data.distance(data.point(i), data.point(s)), 4);
            }
        }
    }
    let expected = 2.0 * 0.3 / 4.0 * total;
    let got = correlation_penalty(&data, &m, h, &k).unwrap();
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");

    let independent =
        CorrelationModel::new(CorrelationFamily::Spherical, 1e-9, 1.0, 2, 0.3).unwrap();
    assert_eq!(
        correlation_penalty(&data, &independent, h, &k).unwrap(),
        0.0
    );
}

#[test]
fn single_trial_table_has_zero_sd() {
    let scn = SimScenario::new(
        MeanFunction::Mu2D,
        150,
        model(CorrelationFamily::Spherical, 2.0, 0.1),
        3,
        1,
    )
    .unwrap();
    let res = run_scenario(
        &scn,
        &[Method::Raw, Method::Gcv],
        &HarnessOptions::default(),
    )
    .unwrap();
    assert_eq!(res.rows.len(), 3);
    for row in &res.rows {
        assert_eq!(row.trials, 1);
        assert_eq!(row.sd, 0.0);
    }
    let mut a = Vec::new();
    write_table_csv(&res.rows, &mut a).unwrap();
    let again = run_scenario(
        &scn,
        &[Method::Raw, Method::Gcv],
        &HarnessOptions::default(),
    )
    .unwrap();
    let mut b = Vec::new();
    write_table_csv(&again.rows, &mut b).unwrap();
    assert_eq!(a, b);
    assert!(String::from_utf8(a)
        .unwrap()
        .starts_with("model,c,D,n,method,measure,mean,sd,trials,failures,fallbacks"));
}

#[test]
fn min_epan_never_loses() {
    let scn = SimScenario::new(
        MeanFunction::Mu2D,
        200,
        model(CorrelationFamily::Spherical, 2.0, 0.1),
        8,
        3,
    )
    .unwrap();
    let methods = [
        Method::Za { c1: 1.0, c2: 1.5 },
        Method::Gcv,
        Method::MinEpan,
    ];
    let res = run_scenario(&scn, &methods, &HarnessOptions::default()).unwrap();
    for t in &res.trials {
        let best = t
            .methods
            .iter()
            .find(|o| o.method == Method::MinEpan)
            .unwrap()
            .mse_prac
            .unwrap();
        for o in &t.methods {
            if let Some(v) = o.mse_prac {
                assert!(
                    best <= v,
                    "trial {}: minEpan {best} > {} {v}",
                    t.trial,
                    o.method
                );
            }
        }
    }
}

#[test]
fn config_errors_name_the_line() {
    let ok = "# comment\nfamily=EXP c=2.5 D=2 n=500 sigma2=0.1 seed=1 trials=2 methods=ZA(1,1.5),GCV,minEpan,Raw\n";
    let specs = parse_scenarios(ok).unwrap();
    assert_eq!(specs[0].methods.len(), 4);
    assert_eq!(specs[0].methods[0], Method::Za { c1: 1.0, c2: 1.5 });

    let bad = format!("{ok}family=WAVE c=1 D=2 n=50 sigma2=0.1 seed=1 trials=1 methods=GCV\n");
    let e = parse_scenarios(&bad).unwrap_err().to_string();
    assert!(e.contains("line 3") && e.contains("WAVE"), "{e}");
    let e = parse_scenarios("family=SP c=2 D=2 n=50 sigma2=0.1 seed=1 trials=1 methods=LOESS\n")
        .unwrap_err()
        .to_string();
    assert!(e.contains("line 1"), "{e}");
}
