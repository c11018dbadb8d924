use crate::error::{Error, Result};
use crate::model::{Channel, Trace};
use crate::scalar::Scalar;

/// Minimum number of whole drive periods a trace must span for ripple analysis.
pub const MIN_CYCLES: usize = 10;

/// Global maximum of a series as `(index, value)`; ties go to the earliest sample.
pub fn peak_of<S: Scalar>(series: &[S]) -> Result<(usize, S)> {
    let (&first, rest) = series.split_first().ok_or(Error::EmptyTrace)?;
    let mut best = (0, first);
    for (i, &v) in rest.iter().enumerate() {
        if v > best.1 {
            best = (i + 1, v);
        }
    }
    Ok(best)
}

/// Time and value of a channel's global maximum.
pub fn peak<S: Scalar>(trace: &Trace<S>, channel: Channel) -> Result<(S, S)> {
    let (i, v) = peak_of(trace.channel(channel))?;
    Ok((trace.time(i), v))
}

/// Slow and ripple components of a pulse-train response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpDecomposition<S> {
    /// Mean over the analysed cycle.
    pub f0: S,
    /// Max minus min over the analysed cycle.
    pub fpp: S,
    /// Zero-based index of the analysed drive period.
    pub cycle_index: usize,
}

/// Splits the last full drive period of a channel into mean and peak-to-peak.
///
/// Periods are counted from t = 0 in whole samples, so the rate should give
/// an integer number of samples per period. The caller chooses the span;
/// a trace covering several thermal time constants is needed for a steady
/// cycle, and at least [`MIN_CYCLES`] periods are required here.
pub fn pp_decompose<S: Scalar>(
    trace: &Trace<S>,
    channel: Channel,
    rate_f: S,
) -> Result<PpDecomposition<S>> {
    let series = trace.channel(channel);
    if series.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if !(rate_f > S::zero()) {
        return Err(Error::Precondition("pulse rate must be positive".into()));
    }
    let spp = (S::one() / (rate_f * trace.dt))
        .round()
        .to_usize()
        .unwrap_or(0);
    if spp < 2 {
        return Err(Error::TooShort(
            "fewer than two samples per drive period".into(),
        ));
    }
    let cycles = (series.len() - 1) / spp;
    if cycles < MIN_CYCLES {
        return Err(Error::TooShort(format!(
            "{cycles} full periods, need at least {MIN_CYCLES}"
        )));
    }
    let start = (cycles - 1) * spp;
    let window = &series[start..=start + spp];
    let mean = window[..spp].iter().fold(S::zero(), |a, &b| a + b) / S::from_count(spp);
    let (lo, hi) = window
        .iter()
        .fold((S::infinity(), S::neg_infinity()), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    Ok(PpDecomposition {
        f0: mean,
        fpp: hi - lo,
        cycle_index: cycles - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_from(force: Vec<f64>, dt: f64) -> Trace<f64> {
        let n = force.len();
        let mut t = Trace::with_capacity(dt, n);
        t.force = force;
        for ch in [
            Channel::POpt,
            Channel::TAbs,
            Channel::TAir,
            Channel::PressureDelta,
            Channel::Displacement,
        ] {
            *t.channel_mut(ch) = vec![0.0; n];
        }
        t
    }

    #[test]
    fn peak_ties_pick_earliest() {
        assert_eq!(peak_of(&[1.0, 3.0, 2.0, 3.0]).unwrap(), (1, 3.0));
        let t = trace_from(vec![0.0; 5], 0.1);
        assert_eq!(peak(&t, Channel::Force).unwrap(), (0.0, 0.0));
        assert_eq!(peak_of::<f64>(&[]), Err(Error::EmptyTrace));
    }

    #[test]
    fn sinusoid_decomposes_into_offset_and_double_amplitude() {
        let (a, b, f, dt) = (0.3, 1.7, 50.0, 1e-4);
        let series: Vec<f64> = (0..=4000)
            .map(|k| a * (2.0 * std::f64::consts::PI * f * k as f64 * dt).sin() + b)
            .collect();
        let d = pp_decompose(&trace_from(series, dt), Channel::Force, f).unwrap();
        assert!((d.f0 - b).abs() < 1e-12);
        // one sample of phase resolution at 200 samples per period
        let resolution = a * (2.0 * std::f64::consts::PI / 200.0);
        assert!((d.fpp - 2.0 * a).abs() <= resolution);
        assert_eq!(d.cycle_index, 19);
    }

    #[test]
    fn constant_series_has_no_ripple() {
        let d = pp_decompose(&trace_from(vec![2.0; 2001], 1e-3), Channel::Force, 10.0).unwrap();
        assert_eq!(d.fpp, 0.0);
        assert_eq!(d.f0, 2.0);
    }

    #[test]
    fn short_traces_are_rejected() {
        let t = trace_from(vec![0.0; 500], 1e-3);
        assert!(matches!(
            pp_decompose(&t, Channel::Force, 10.0),
            Err(Error::TooShort(_))
        ));
        assert!(matches!(
            pp_decompose(&t, Channel::Force, 900.0),
            Err(Error::TooShort(_))
        ));
    }
}
