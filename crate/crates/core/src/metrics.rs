//! Normalized streaming performance: `Ω_b` for one buffer size and
//! `μ_total` across buffer sizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::AccuracyCurve;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaResult {
    pub buffer_size: usize,
    pub omega: f64,
    pub num_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuTotalResult {
    pub buffer_sizes: Vec<usize>,
    pub mu: f64,
}

/// Arithmetic mean, accumulated as offsets from the first value so that a
/// run of identical values averages to exactly that value.
pub fn mean(values: &[f64]) -> f64 {
    let Some(&first) = values.first() else {
        return f64::NAN;
    };
    first + values.iter().map(|v| v - first).sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (`n - 1` denominator); 0 for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Mean over test events of streaming accuracy divided by offline accuracy.
///
/// Both curves must share event timestamps. Values above 1 are kept as-is.
pub fn omega_b(
    stream: &AccuracyCurve,
    offline: &AccuracyCurve,
    buffer_size: usize,
) -> Result<OmegaResult> {
    let (s, o) = (stream.events(), offline.events());
    if s.is_empty() {
        return Err(Error::Alignment(
            "streaming curve has no test events".into(),
        ));
    }
    if s.len() != o.len() {
        return Err(Error::Alignment(format!(
            "streaming curve has {} events, offline curve has {}",
            s.len(),
            o.len()
        )));
    }
    let mut ratios = Vec::with_capacity(s.len());
    for (a, b) in s.iter().zip(o) {
        if a.t != b.t {
            return Err(Error::Alignment(format!(
                "event timestamps differ: {} vs {}",
                a.t, b.t
            )));
        }
        if b.accuracy <= 0.0 {
            return Err(Error::Division(format!(
                "offline accuracy is zero at t = {}",
                b.t
            )));
        }
        ratios.push(a.accuracy / b.accuracy);
    }
    Ok(OmegaResult {
        buffer_size,
        omega: mean(&ratios),
        num_events: s.len(),
    })
}

/// Arithmetic mean of `Ω_b` over distinct buffer sizes.
pub fn mu_total(omegas: &[OmegaResult]) -> Result<MuTotalResult> {
    if omegas.is_empty() {
        return Err(Error::Usage(
            "mu_total needs at least one buffer size".into(),
        ));
    }
    let mut sizes: Vec<usize> = omegas.iter().map(|o| o.buffer_size).collect();
    sizes.sort_unstable();
    if let Some(w) = sizes.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Usage(format!("buffer size {} appears twice", w[0])));
    }
    let mu = mean(&omegas.iter().map(|o| o.omega).collect::<Vec<_>>());
    Ok(MuTotalResult {
        buffer_sizes: sizes,
        mu,
    })
}
