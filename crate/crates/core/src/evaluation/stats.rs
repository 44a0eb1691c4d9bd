use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no values to summarise")]
pub struct EmptyInput;

/// Five-number summary plus mean. Quartiles use linear interpolation at
/// position `p * (n - 1)` of the sorted values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub n: usize,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// NaN values are ignored; an input with no other values is [`EmptyInput`].
pub fn box_stats(values: &[f64]) -> Result<BoxStats, EmptyInput> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    if sorted.is_empty() {
        return Err(EmptyInput);
    }
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(BoxStats {
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: sorted[n - 1],
        mean: sorted.iter().sum::<f64>() / n as f64,
        n,
    })
}
