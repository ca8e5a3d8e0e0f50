/// Largest relative disagreement between analytic gradients and central
/// finite differences, over all coordinates of `params`.
///
/// `loss_fn` returns the loss and its analytic gradient at a point.
/// Relative error per coordinate is `|analytic - fd| / max(|analytic|, |fd|, 1e-8)`.
pub fn gradient_check<F>(loss_fn: F, params: &[f64], epsilon: f64) -> f64
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    assert!(epsilon > 0.0, "perturbation must be positive");
    let (_, analytic) = loss_fn(params);
    assert_eq!(analytic.len(), params.len(), "gradient length mismatch");

    let mut probe = params.to_vec();
    let mut worst = 0.0f64;
    for i in 0..params.len() {
        probe[i] = params[i] + epsilon;
        let (plus, _) = loss_fn(&probe);
        probe[i] = params[i] - epsilon;
        let (minus, _) = loss_fn(&probe);
        probe[i] = params[i];

        let fd = (plus - minus) / (2.0 * epsilon);
        let denom = analytic[i].abs().max(fd.abs()).max(1e-8);
        worst = worst.max((analytic[i] - fd).abs() / denom);
    }
    worst
}
