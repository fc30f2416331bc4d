//! C interface to uwbocc: CIR matrices, mean removal, noise augmentation,
//! detectors and AUC.
//!
//! Every function returns a [`UwbStatus`]; on failure the message is
//! available from [`uwb_last_error`] on the same thread. Handles are
//! created by `*_new`/`*_load`/`*_read_file` style functions and released
//! with the matching `*_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uwbocc::augment::{augment, noise_sigma, AugmentPolicy, SnrReference};
use uwbocc::baseline::{energy_detector, energy_detector_flops, fft_detector, fft_detector_flops};
use uwbocc::eval::{roc_auc, Scorer};
use uwbocc::ingest::cir_file;
use uwbocc::neural::load_checkpoint;
use uwbocc::pipeline::NetworkScorer;
use uwbocc::radar::{mean_remove_matrix, ComplexMatrix, MeanRemovedMatrix};
use uwbocc::Error;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UwbStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument or configuration value was rejected.
    InvalidArgument = 2,
    /// A file could not be read.
    Io = 3,
    /// Input data was malformed or inconsistent.
    Data = 4,
    /// A computation produced a non-finite value.
    Numeric = 5,
    /// An internal error was caught at the boundary.
    Panic = 6,
}

/// Complex N x M matrix, either raw CIR or a residual.
pub struct UwbCir {
    matrix: ComplexMatrix,
    residual: bool,
}

enum Kind {
    Network(Box<NetworkScorer>),
    Energy(usize),
    Fft,
}

/// A detector mapping a residual to a score.
pub struct UwbDetector {
    kind: Kind,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(UwbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } | Error::MissingFile(_) | Error::MissingCheckpoint(_) => UwbStatus::Io,
            Error::NonFinite(_) | Error::Divergence { .. } => UwbStatus::Numeric,
            _ if e.exit_code() == 2 => UwbStatus::InvalidArgument,
            _ => UwbStatus::Data,
        };
        Failure(status, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(UwbStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Outcome) -> UwbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UwbStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            UwbStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(UwbStatus::NullPointer, format!("{name} is null")))
}

unsafe fn put<T>(p: *mut T, value: T, name: &str) -> Outcome {
    if p.is_null() {
        return Err(Failure(UwbStatus::NullPointer, format!("{name} is null")));
    }
    p.write(value);
    Ok(())
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    let s = get(p, "path")?;
    let s = CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

fn residual_of(cir: &UwbCir) -> Result<MeanRemovedMatrix, Failure> {
    if !cir.residual {
        return Err(invalid("expected a residual; call uwb_mean_remove first"));
    }
    Ok(MeanRemovedMatrix::from_matrix(cir.matrix.clone()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uwb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn uwb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a raw CIR from `2 * n_fast * m_slow` doubles: interleaved real and
/// imaginary parts, column-major (one frame after another).
#[no_mangle]
pub unsafe extern "C" fn uwb_cir_new(
    n_fast: usize,
    m_slow: usize,
    data: *const f64,
    out: *mut *mut UwbCir,
) -> UwbStatus {
    guard(|| {
        if n_fast == 0 || m_slow == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        let len = n_fast
            .checked_mul(m_slow)
            .and_then(|x| x.checked_mul(2))
            .ok_or_else(|| invalid("matrix too large"))?;
        get(data, "data")?;
        let raw = std::slice::from_raw_parts(data, len);
        let values = raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let matrix = ComplexMatrix::from_column_major(n_fast, m_slow, values)?;
        put(out, boxed(UwbCir { matrix, residual: false }), "out")
    })
}

/// Reads a `.cir` file as a raw CIR.
#[no_mangle]
pub unsafe extern "C" fn uwb_cir_read_file(path: *const c_char, out: *mut *mut UwbCir) -> UwbStatus {
    guard(|| {
        let path = path_arg(path)?;
        let matrix = cir_file::read(&path)?;
        put(out, boxed(UwbCir { matrix, residual: false }), "out")
    })
}

/// Releases a CIR handle; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn uwb_cir_free(cir: *mut UwbCir) {
    if !cir.is_null() {
        drop(Box::from_raw(cir));
    }
}

#[no_mangle]
pub unsafe extern "C" fn uwb_cir_shape(cir: *const UwbCir, n_fast: *mut usize, m_slow: *mut usize) -> UwbStatus {
    guard(|| {
        let c = get(cir, "cir")?;
        put(n_fast, c.matrix.rows(), "n_fast")?;
        put(m_slow, c.matrix.cols(), "m_slow")
    })
}

/// Copies the matrix into `out` in the layout of [`uwb_cir_new`]; `len`
/// must be `2 * n_fast * m_slow`.
#[no_mangle]
pub unsafe extern "C" fn uwb_cir_copy_data(cir: *const UwbCir, out: *mut f64, len: usize) -> UwbStatus {
    guard(|| {
        let c = get(cir, "cir")?;
        let values = c.matrix.as_slice();
        if len != 2 * values.len() {
            return Err(invalid(format!("buffer holds {len} doubles, matrix needs {}", 2 * values.len())));
        }
        get(out as *const f64, "out")?;
        let dst = std::slice::from_raw_parts_mut(out, len);
        for (d, z) in dst.chunks_exact_mut(2).zip(values) {
            d[0] = z.re;
            d[1] = z.im;
        }
        Ok(())
    })
}

/// Squared Frobenius norm.
#[no_mangle]
pub unsafe extern "C" fn uwb_cir_energy(cir: *const UwbCir, out: *mut f64) -> UwbStatus {
    guard(|| put(out, get(cir, "cir")?.matrix.energy(), "out"))
}

/// Subtracts the slow-time mean of every fast-time row. `mean` may be null;
/// otherwise it receives `2 * n_fast` doubles (interleaved re/im).
#[no_mangle]
pub unsafe extern "C" fn uwb_mean_remove(cir: *const UwbCir, mean: *mut f64, out: *mut *mut UwbCir) -> UwbStatus {
    guard(|| {
        let c = get(cir, "cir")?;
        let (mu, residual) = mean_remove_matrix(&c.matrix)?;
        if !mean.is_null() {
            let dst = std::slice::from_raw_parts_mut(mean, 2 * mu.len());
            for (d, z) in dst.chunks_exact_mut(2).zip(&mu) {
                d[0] = z.re;
                d[1] = z.im;
            }
        }
        let handle = UwbCir {
            matrix: residual.into_matrix(),
            residual: true,
        };
        put(out, boxed(handle), "out")
    })
}

/// Per-component noise variance giving `snr_db` against reference energy
/// `e_s` for an `n_fast x m_slow` residual.
#[no_mangle]
pub unsafe extern "C" fn uwb_noise_sigma2(
    e_s: f64,
    snr_db: f64,
    n_fast: usize,
    m_slow: usize,
    out: *mut f64,
) -> UwbStatus {
    guard(|| {
        let reference = SnrReference::new(e_s)?;
        if n_fast == 0 || m_slow == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        put(out, noise_sigma(reference, snr_db, n_fast, m_slow), "out")
    })
}

/// Detector input for one draw: white noise at `snr_db` (seeded by `seed`)
/// added to `residual`, then scaled to unit energy. `snr_db = +inf` only
/// normalizes.
#[no_mangle]
pub unsafe extern "C" fn uwb_augment(
    residual: *const UwbCir,
    e_s: f64,
    snr_db: f64,
    seed: u64,
    exact_scaling: bool,
    out: *mut *mut UwbCir,
) -> UwbStatus {
    guard(|| {
        let r = residual_of(get(residual, "residual")?)?;
        if snr_db.is_nan() {
            return Err(invalid("SNR is NaN"));
        }
        let reference = SnrReference::new(e_s)?;
        let policy = AugmentPolicy::grid(vec![snr_db]).with_exact_scaling(exact_scaling);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = augment(&r, reference, snr_db, &policy, &mut rng)?;
        let handle = UwbCir {
            matrix: x.into_matrix(),
            residual: true,
        };
        put(out, boxed(handle), "out")
    })
}

/// Sliding-window energy score of a residual.
#[no_mangle]
pub unsafe extern "C" fn uwb_energy_score(residual: *const UwbCir, window: usize, out: *mut f64) -> UwbStatus {
    guard(|| {
        let r = residual_of(get(residual, "residual")?)?;
        put(out, energy_detector(&r, window)?, "out")
    })
}

/// Slow-time spectral peak score of a residual.
#[no_mangle]
pub unsafe extern "C" fn uwb_fft_score(residual: *const UwbCir, out: *mut f64) -> UwbStatus {
    guard(|| {
        let r = residual_of(get(residual, "residual")?)?;
        put(out, fft_detector(&r)?, "out")
    })
}

/// Loads a trained network from a checkpoint file.
#[no_mangle]
pub unsafe extern "C" fn uwb_detector_load(path: *const c_char, out: *mut *mut UwbDetector) -> UwbStatus {
    guard(|| {
        let path = path_arg(path)?;
        let ckpt = load_checkpoint(&path)?;
        let kind = Kind::Network(Box::new(NetworkScorer::new(ckpt.network)));
        put(out, boxed(UwbDetector { kind }), "out")
    })
}

/// Energy detector over `window` frames.
#[no_mangle]
pub unsafe extern "C" fn uwb_detector_energy(window: usize, out: *mut *mut UwbDetector) -> UwbStatus {
    guard(|| {
        if window == 0 {
            return Err(invalid("window must be positive"));
        }
        put(out, boxed(UwbDetector { kind: Kind::Energy(window) }), "out")
    })
}

/// Slow-time spectral peak detector.
#[no_mangle]
pub unsafe extern "C" fn uwb_detector_fft(out: *mut *mut UwbDetector) -> UwbStatus {
    guard(|| put(out, boxed(UwbDetector { kind: Kind::Fft }), "out"))
}

/// Releases a detector handle; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn uwb_detector_free(detector: *mut UwbDetector) {
    if !detector.is_null() {
        drop(Box::from_raw(detector));
    }
}

/// Scores a residual; networks return an occupancy probability.
#[no_mangle]
pub unsafe extern "C" fn uwb_detector_score(
    detector: *const UwbDetector,
    residual: *const UwbCir,
    out: *mut f64,
) -> UwbStatus {
    guard(|| {
        let d = get(detector, "detector")?;
        let r = residual_of(get(residual, "residual")?)?;
        let score = match &d.kind {
            Kind::Network(net) => {
                let shape = net.network.input_shape;
                let expected = uwbocc::neural::input_shape(r.n_fast(), r.m_slow(), net.network.variant.dimensionality);
                if shape != expected {
                    return Err(invalid(format!("network expects input {shape:?}, residual gives {expected:?}")));
                }
                net.score(std::slice::from_ref(&r))?[0]
            }
            Kind::Energy(w) => energy_detector(&r, *w)?,
            Kind::Fft => fft_detector(&r)?,
        };
        put(out, score, "out")
    })
}

/// Floating-point operations of one detection on an `n_fast x m_slow`
/// residual.
#[no_mangle]
pub unsafe extern "C" fn uwb_detector_flops(
    detector: *const UwbDetector,
    n_fast: usize,
    m_slow: usize,
    out: *mut u64,
) -> UwbStatus {
    guard(|| {
        let d = get(detector, "detector")?;
        let flops = match &d.kind {
            Kind::Network(net) => {
                let expected = uwbocc::neural::input_shape(n_fast, m_slow, net.network.variant.dimensionality);
                if net.network.input_shape != expected {
                    return Err(invalid(format!(
                        "network expects input {:?}, got {expected:?}",
                        net.network.input_shape
                    )));
                }
                net.flops()
            }
            Kind::Energy(_) => energy_detector_flops(n_fast, m_slow),
            Kind::Fft => fft_detector_flops(n_fast, m_slow),
        };
        put(out, flops, "out")
    })
}

/// Area under the ROC curve; `labels[i]` is nonzero for positives.
#[no_mangle]
pub unsafe extern "C" fn uwb_roc_auc(scores: *const f64, labels: *const u8, len: usize, out: *mut f64) -> UwbStatus {
    guard(|| {
        if len == 0 {
            return Err(invalid("no scores"));
        }
        get(scores, "scores")?;
        get(labels, "labels")?;
        let s = std::slice::from_raw_parts(scores, len);
        let l: Vec<bool> = std::slice::from_raw_parts(labels, len).iter().map(|&x| x != 0).collect();
        put(out, roc_auc(s, &l)?, "out")
    })
}
