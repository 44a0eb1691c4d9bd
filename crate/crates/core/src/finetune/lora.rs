//! Low-rank update algebra: `ΔW = (alpha / r) · B · A` with `B: d_out × r`
//! and `A: r × d_in`, plus merging an update into a base weight and taking
//! it back out.

use std::ops::{Add, Sub};

use ndarray::Array2;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoraError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Computes the scaled product. The matrix product is formed first and then
/// scaled, so doubling `alpha` doubles every entry exactly.
pub fn lora_delta(b: &Array2<f64>, a: &Array2<f64>, alpha: f64, r: usize) -> Result<Array2<f64>, LoraError> {
    if r == 0 {
        return Err(LoraError::ShapeMismatch("rank must be at least 1".into()));
    }
    if b.ncols() != r || a.nrows() != r {
        return Err(LoraError::ShapeMismatch(format!(
            "B is {}x{}, A is {}x{}, rank {r}",
            b.nrows(),
            b.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = alpha / r as f64;
    Ok(b.dot(a).mapv(|x| x * scale))
}

fn same_shape<T>(w: &Array2<T>, d: &Array2<T>) -> Result<(), LoraError> {
    if w.dim() != d.dim() {
        return Err(LoraError::ShapeMismatch(format!("W is {:?}, delta is {:?}", w.dim(), d.dim())));
    }
    Ok(())
}

/// `W + ΔW`, elementwise.
pub fn merge_lora<T>(w: &Array2<T>, delta: &Array2<T>) -> Result<Array2<T>, LoraError>
where
    T: Clone + Add<Output = T>,
{
    same_shape(w, delta)?;
    let mut out = w.clone();
    out.zip_mut_with(delta, |x, d| *x = x.clone() + d.clone());
    Ok(out)
}

/// `W' − ΔW`, elementwise.
pub fn unmerge_lora<T>(merged: &Array2<T>, delta: &Array2<T>) -> Result<Array2<T>, LoraError>
where
    T: Clone + Sub<Output = T>,
{
    same_shape(merged, delta)?;
    let mut out = merged.clone();
    out.zip_mut_with(delta, |x, d| *x = x.clone() - d.clone());
    Ok(out)
}

/// Trainable parameters of one adapter, `r · (d_in + d_out)`.
pub fn lora_param_count(d_in: usize, d_out: usize, r: usize) -> usize {
    r * (d_in + d_out)
}

/// Parameters of the full weight being adapted, `d_in · d_out`.
pub fn full_param_count(d_in: usize, d_out: usize) -> usize {
    d_in * d_out
}
