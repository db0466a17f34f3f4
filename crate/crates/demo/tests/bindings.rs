use atomexact_demo::{delta_curves, exact_histogram, mean_density, nprop_samples};

#[test]
fn density_integrates_to_one() {
    for (xbar, n, eps) in [(0.5, 100, 0.1), (0.1, 30, 1.0), (1.0, 300, 0.01)] {
        let k = 20_000;
        let total: f64 = (0..k)
            .map(|i| mean_density((i as f64 + 0.5) / k as f64, xbar, n, eps))
            .sum::<f64>()
            / k as f64;
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }
}

#[test]
fn histogram_tracks_density() {
    let bins = 10;
    let out = exact_histogram(0.5, 100, 0.1, 20_000, bins, 3).unwrap();
    assert_eq!(out.len(), 3 * bins);
    let (emp, exact) = (&out[bins..2 * bins], &out[2 * bins..]);
    let mass: f64 = emp.iter().sum::<f64>() / bins as f64;
    assert!((mass - 1.0).abs() < 1e-9);
    for (e, a) in emp.iter().zip(exact) {
        // a bin holds about 2000 draws; 5 standard errors of a density estimate
        assert!(
            (e - a).abs() < 5.0 * (a * 10.0 / 20_000.0f64).sqrt() + 0.05,
            "{e} vs {a}"
        );
    }
}

#[test]
fn delta_curves_decrease() {
    let out = delta_curves(100, 0.02, 1, 1.0, 1000, 30);
    let k = out.len() / 3;
    assert_eq!(out[0], 1.0);
    for series in [&out[k..2 * k], &out[2 * k..]] {
        assert!(series.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn nprop_is_reproducible() {
    let a = nprop_samples(100, 0.1, 1.0, 1.0, 50, 9).unwrap();
    assert_eq!(a, nprop_samples(100, 0.1, 1.0, 1.0, 50, 9).unwrap());
    assert!(a.iter().all(|v| *v >= 1.0));
}
