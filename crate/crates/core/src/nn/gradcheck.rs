//! Central finite-difference gradient checking.

use super::Parameter;

/// Relative error used throughout: `|a − n| / max(|a|, |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares the analytic gradients already stored in each `Parameter::grad`
/// against central differences of `loss` and returns the largest relative
/// error. Parameter values are restored before returning.
pub fn grad_check<F>(params: &mut [Parameter], delta: f64, mut loss: F) -> f64
where
    F: FnMut(&[Parameter]) -> f64,
{
    let mut worst = 0.0f64;
    for p in 0..params.len() {
        for i in 0..params[p].value.len() {
            let original = params[p].value.as_slice()[i];
            params[p].value.as_mut_slice()[i] = original + delta;
            let plus = loss(params);
            params[p].value.as_mut_slice()[i] = original - delta;
            let minus = loss(params);
            params[p].value.as_mut_slice()[i] = original;
            let numeric = (plus - minus) / (2.0 * delta);
            let analytic = params[p].grad.as_slice()[i];
            worst = worst.max(relative_error(analytic, numeric));
        }
    }
    worst
}
