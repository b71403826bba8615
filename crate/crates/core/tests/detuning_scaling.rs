//! Deviation of the full distant-JC dynamics from the reduced model shrinks
//! as the square of the detuning at fixed couplings, the window growing
//! with the reduced period.

use std::f64::consts::PI;

use spinorbit::effective::{compare_jc_reduction, ComparisonSettings};

fn deviation(delta: f64) -> f64 {
    let (w, wt) = (2.5e7, 2.5e7);
    let t = 2.0 * PI * delta / (w * wt);
    let settings = ComparisonSettings {
        fock_dim: 4,
        samples: 200,
        ..Default::default()
    };
    compare_jc_reduction(w, wt, delta, delta, t, &settings)
        .unwrap()
        .overall_max_deviation()
}

#[test]
fn deviation_falls_as_inverse_square_of_detuning() {
    let deltas = [2.5e8, 5e8, 1e9, 2.5e9];
    let devs: Vec<f64> = deltas.iter().map(|&d| deviation(d)).collect();
    assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
    // least-squares slope of log(deviation) against log(delta)
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = devs.iter().map(|d| d.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!((slope + 2.0).abs() < 0.25, "slope {slope}, deviations {devs:?}");
    assert!(devs[0] / devs[3] > 10.0);
}
