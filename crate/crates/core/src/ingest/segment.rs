use crate::error::{Error, Result};
use crate::radar::{ActivityLabel, CirMatrix, Provenance, SampleRecord};

/// Sample length used throughout: 10 s of slow time.
pub const DEFAULT_WINDOW_S: f64 = 10.0;

/// Number of repetitions in a window of `window_s` seconds.
pub fn window_columns(window_s: f64, t_st: f64) -> Result<usize> {
    if !(window_s >= t_st) {
        return Err(Error::Config(format!(
            "window {window_s} s is shorter than one repetition ({t_st} s)"
        )));
    }
    let ratio = window_s / t_st;
    let w = ratio.round();
    if (ratio - w).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Config(format!(
            "window {window_s} s is not a whole number of {t_st} s repetitions"
        )));
    }
    Ok(w as usize)
}

/// Cuts a full recording into non-overlapping windows in temporal order.
/// A trailing partial window is dropped. `provenance.segment_index` is set
/// per segment.
pub fn segment_recording(
    stream: &CirMatrix,
    window_s: f64,
    label: ActivityLabel,
    provenance: &Provenance,
) -> Result<Vec<SampleRecord>> {
    let w = window_columns(window_s, stream.t_st())?;
    if w < 2 {
        return Err(Error::Config("segments need at least two repetitions".into()));
    }
    let count = stream.m_slow() / w;
    (0..count)
        .map(|s| {
            let matrix = stream.matrix().column_range(s * w, (s + 1) * w);
            let cir = CirMatrix::new(matrix, stream.t_ft(), stream.t_st())?;
            let prov = Provenance {
                segment_index: s,
                ..provenance.clone()
            };
            Ok(SampleRecord::new(cir, label, prov))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radar::ComplexMatrix;
    use num_complex::Complex64;

    fn stream(cols: usize) -> CirMatrix {
        let data = (0..2 * cols).map(|i| Complex64::new(i as f64, 0.0)).collect();
        CirMatrix::new(ComplexMatrix::from_column_major(2, cols, data).unwrap(), 1e-9, 0.1).unwrap()
    }

    fn prov() -> Provenance {
        Provenance {
            car: "1".into(),
            seat: Some("front".into()),
            participant: Some("p1".into()),
            recording: "r".into(),
            segment_index: 0,
        }
    }

    #[test]
    fn two_minutes_give_twelve_segments() {
        let segs = segment_recording(&stream(1200), 10.0, ActivityLabel::Breathing, &prov()).unwrap();
        assert_eq!(segs.len(), 12);
        assert!(segs.iter().all(|s| s.cir.m_slow() == 100));
        for (i, s) in segs.iter().enumerate() {
            assert_eq!(s.provenance.segment_index, i);
            // temporal order, non-overlapping
            assert_eq!(s.cir.matrix().get(0, 0).re, (i * 100 * 2) as f64);
        }
    }

    #[test]
    fn five_minutes_and_short_recordings() {
        assert_eq!(segment_recording(&stream(3000), 10.0, ActivityLabel::Empty, &prov()).unwrap().len(), 30);
        assert!(segment_recording(&stream(99), 10.0, ActivityLabel::Empty, &prov()).unwrap().is_empty());
        assert!(segment_recording(&stream(99), 0.05, ActivityLabel::Empty, &prov()).is_err());
        assert!(segment_recording(&stream(99), 0.25, ActivityLabel::Empty, &prov()).is_err());
    }

    #[test]
    fn columns_are_conserved() {
        for cols in [2usize, 57, 100, 1234] {
            let segs = segment_recording(&stream(cols), 1.0, ActivityLabel::Moving, &prov()).unwrap();
            let used: usize = segs.iter().map(|s| s.cir.m_slow()).sum();
            assert_eq!(used + cols % 10, cols);
        }
    }
}
