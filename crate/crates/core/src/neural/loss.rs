use crate::error::{Error, Result};

/// Mean sigmoid cross-entropy of logits against 0/1 labels, and its
/// gradient with respect to each logit.
pub fn loss_bce(logits: &[f64], labels: &[f64]) -> Result<(f64, Vec<f64>)> {
    if logits.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} logits for {} labels",
            logits.len(),
            labels.len()
        )));
    }
    if logits.is_empty() {
        return Err(Error::EmptyInput("logits"));
    }
    let b = logits.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (&z, &y) in logits.iter().zip(labels) {
        // max(z, 0) - z y + ln(1 + e^{-|z|})
        loss += z.max(0.0) - z * y + (-z.abs()).exp().ln_1p();
        grad.push((sigmoid(z) - y) / b);
    }
    Ok((loss / b, grad))
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
