//! C ABI over `hcoseg`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` and
//! released by the matching `*_free`. Every fallible call returns an
//! [`HcStatus`]; on failure [`hc_last_error`] describes the cause for the
//! calling thread. Panics never unwind into C and surface as
//! `HC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hcoseg::config::PipelineConfig;
use hcoseg::hierarchy::coseg_call_count;
use hcoseg::metrics::{frame_f, frame_iou};
use hcoseg::pipeline::{segment, Segmentation};
use hcoseg::{BinaryMask, Error, ErrorClass, Frame, FrameSequence};

/// Result of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad configuration key or value.
    Config = 2,
    Io = 3,
    /// Inputs violate a documented precondition.
    Validation = 4,
    /// Caller buffer length does not match the data.
    BufferSize = 5,
    Panic = 6,
}

/// Frames collected for segmentation.
pub struct HcSequence {
    width: usize,
    height: usize,
    frames: Vec<Frame>,
}

/// Pipeline settings, initially the library defaults.
pub struct HcConfig {
    inner: PipelineConfig,
}

/// Output of [`hc_segment`].
pub struct HcResult {
    inner: Segmentation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: HcStatus, msg: impl AsRef<str>) -> HcStatus {
    set_last_error(msg.as_ref());
    status
}

fn from_error(e: Error) -> HcStatus {
    let status = match e.class() {
        ErrorClass::Usage => HcStatus::Config,
        ErrorClass::Io => HcStatus::Io,
        ErrorClass::Validation => HcStatus::Validation,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> HcStatus) -> HcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(HcStatus::Panic, format!("panic: {msg}"))
        }
    }
}

/// Runs `f` with a shared reference, reporting null handles.
unsafe fn with_ref<T>(p: *const T, name: &str, f: impl FnOnce(&T) -> HcStatus) -> HcStatus {
    match p.as_ref() {
        Some(r) => guard(|| f(r)),
        None => fail(HcStatus::NullPointer, format!("{name} is null")),
    }
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, HcStatus> {
    if p.is_null() {
        return Err(fail(HcStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(HcStatus::Validation, format!("{name} is not UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failure on this thread, or null if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

// Sequences ----------------------------------------------------------------

/// New empty sequence of `width`x`height` frames; null if either is zero.
#[no_mangle]
pub extern "C" fn hc_sequence_new(width: usize, height: usize) -> *mut HcSequence {
    if width == 0 || height == 0 {
        set_last_error("sequence dimensions must be nonzero");
        return ptr::null_mut();
    }
    Box::into_raw(Box::new(HcSequence {
        width,
        height,
        frames: Vec::new(),
    }))
}

/// Appends a frame of interleaved 8-bit RGB, row-major, `len == 3*w*h`.
///
/// # Safety
/// `seq` must come from [`hc_sequence_new`]; `rgb` must point to `len`
/// readable bytes.
#[no_mangle]
pub unsafe extern "C" fn hc_sequence_push_rgb(seq: *mut HcSequence, rgb: *const u8, len: usize) -> HcStatus {
    let Some(seq) = seq.as_mut() else {
        return fail(HcStatus::NullPointer, "sequence is null");
    };
    if rgb.is_null() {
        return fail(HcStatus::NullPointer, "rgb is null");
    }
    guard(|| {
        let expected = 3 * seq.width * seq.height;
        if len != expected {
            return fail(HcStatus::BufferSize, format!("expected {expected} bytes, got {len}"));
        }
        let pixels = std::slice::from_raw_parts(rgb, len).to_vec();
        match Frame::new(seq.width, seq.height, pixels, seq.frames.len()) {
            Ok(f) => {
                seq.frames.push(f);
                HcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of frames pushed so far; 0 for a null handle.
///
/// # Safety
/// `seq` must be null or come from [`hc_sequence_new`].
#[no_mangle]
pub unsafe extern "C" fn hc_sequence_len(seq: *const HcSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.frames.len())
}

/// # Safety
/// `seq` must be null or come from [`hc_sequence_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hc_sequence_free(seq: *mut HcSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

// Configuration ------------------------------------------------------------

#[no_mangle]
pub extern "C" fn hc_config_new() -> *mut HcConfig {
    Box::into_raw(Box::new(HcConfig {
        inner: PipelineConfig::default(),
    }))
}

/// Sets one configuration key, using the same names and syntax as the
/// configuration file.
///
/// # Safety
/// `cfg` must come from [`hc_config_new`]; `key` and `value` must be
/// NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hc_config_set(cfg: *mut HcConfig, key: *const c_char, value: *const c_char) -> HcStatus {
    let Some(cfg) = cfg.as_mut() else {
        return fail(HcStatus::NullPointer, "config is null");
    };
    let (key, value) = match (c_str(key, "key"), c_str(value, "value")) {
        (Ok(k), Ok(v)) => (k, v),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    guard(|| match cfg.inner.set(key, value) {
        Ok(()) => HcStatus::Ok,
        Err(e) => from_error(e),
    })
}

/// Replaces `cfg` with the contents of a configuration file.
///
/// # Safety
/// `cfg` must come from [`hc_config_new`]; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hc_config_load(cfg: *mut HcConfig, path: *const c_char) -> HcStatus {
    let Some(cfg) = cfg.as_mut() else {
        return fail(HcStatus::NullPointer, "config is null");
    };
    let path = match c_str(path, "path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    guard(|| match PipelineConfig::from_file(Path::new(path)) {
        Ok(c) => {
            cfg.inner = c;
            HcStatus::Ok
        }
        Err(e) => from_error(e),
    })
}

/// # Safety
/// `cfg` must be null or come from [`hc_config_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hc_config_free(cfg: *mut HcConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

// Segmentation -------------------------------------------------------------

/// Segments `seq` and stores a new result handle in `*out`. `cfg` may be
/// null for defaults. On failure `*out` is set to null.
///
/// # Safety
/// Handles must come from their constructors; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_segment(seq: *const HcSequence, cfg: *const HcConfig, out: *mut *mut HcResult) -> HcStatus {
    if out.is_null() {
        return fail(HcStatus::NullPointer, "out is null");
    }
    *out = ptr::null_mut();
    let default;
    let cfg = match cfg.as_ref() {
        Some(c) => &c.inner,
        None => {
            default = PipelineConfig::default();
            &default
        }
    };
    with_ref(seq, "sequence", |seq| {
        let run = || -> hcoseg::Result<Segmentation> {
            cfg.validate()?;
            let frames = FrameSequence::new("ffi", seq.frames.clone())?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.jobs.unwrap_or(0))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| segment(&frames, cfg, None))
        };
        match run() {
            Ok(r) => {
                *out = Box::into_raw(Box::new(HcResult { inner: r }));
                HcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of frames in the result; 0 for a null handle.
///
/// # Safety
/// `res` must be null or come from [`hc_segment`].
#[no_mangle]
pub unsafe extern "C" fn hc_result_len(res: *const HcResult) -> usize {
    res.as_ref().map_or(0, |r| r.inner.masks.len())
}

/// Effective hierarchy depth used; 0 for a null handle.
///
/// # Safety
/// `res` must be null or come from [`hc_segment`].
#[no_mangle]
pub unsafe extern "C" fn hc_result_depth(res: *const HcResult) -> usize {
    res.as_ref().map_or(0, |r| r.inner.tree.depth())
}

/// Number of pair co-segmentations performed; 0 for a null handle.
///
/// # Safety
/// `res` must be null or come from [`hc_segment`].
#[no_mangle]
pub unsafe extern "C" fn hc_result_coseg_calls(res: *const HcResult) -> u64 {
    res.as_ref().map_or(0, |r| r.inner.coseg_calls)
}

unsafe fn result_frame<T>(
    res: *const HcResult,
    frame: usize,
    dst: *mut T,
    len: usize,
    fill: impl FnOnce(&Segmentation, &mut [T]),
) -> HcStatus {
    if dst.is_null() {
        return fail(HcStatus::NullPointer, "destination is null");
    }
    with_ref(res, "result", |r| {
        let r = &r.inner;
        let Some(mask) = r.masks.get(frame) else {
            return fail(HcStatus::Validation, format!("frame {frame} out of range 0..{}", r.masks.len()));
        };
        let n = mask.width() * mask.height();
        if len != n {
            return fail(HcStatus::BufferSize, format!("expected {n} elements, got {len}"));
        }
        fill(r, std::slice::from_raw_parts_mut(dst, len));
        HcStatus::Ok
    })
}

/// Copies the refined probability map of `frame` (row-major, `w*h` values
/// in [0,1]) into `dst`.
///
/// # Safety
/// `res` must come from [`hc_segment`]; `dst` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hc_result_copy_map(res: *const HcResult, frame: usize, dst: *mut f64, len: usize) -> HcStatus {
    result_frame(res, frame, dst, len, |r, out| out.copy_from_slice(r.maps[frame].values()))
}

/// Copies the binary mask of `frame` as 0/1 bytes into `dst`.
///
/// # Safety
/// `res` must come from [`hc_segment`]; `dst` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hc_result_copy_mask(res: *const HcResult, frame: usize, dst: *mut u8, len: usize) -> HcStatus {
    result_frame(res, frame, dst, len, |r, out| {
        for (o, &b) in out.iter_mut().zip(r.masks[frame].bits()) {
            *o = b as u8;
        }
    })
}

/// # Safety
/// `res` must be null or come from [`hc_segment`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hc_result_free(res: *mut HcResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

// Stateless helpers --------------------------------------------------------

/// Pair co-segmentations needed for `length` frames at `depth`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_coseg_call_count(length: usize, depth: usize, out: *mut u64) -> HcStatus {
    if out.is_null() {
        return fail(HcStatus::NullPointer, "out is null");
    }
    guard(|| match coseg_call_count(length, depth) {
        Ok(n) => {
            *out = n;
            HcStatus::Ok
        }
        Err(e) => from_error(e),
    })
}

unsafe fn masks(pred: *const u8, gt: *const u8, width: usize, height: usize) -> Result<(BinaryMask, BinaryMask), HcStatus> {
    if pred.is_null() || gt.is_null() {
        return Err(fail(HcStatus::NullPointer, "mask is null"));
    }
    let n = width.checked_mul(height).unwrap_or(0);
    let load = |p: *const u8| BinaryMask::new(width, height, std::slice::from_raw_parts(p, n).iter().map(|&v| v != 0).collect());
    match (load(pred), load(gt)) {
        (Ok(a), Ok(b)) => Ok((a, b)),
        (Err(e), _) | (_, Err(e)) => Err(from_error(e)),
    }
}

/// Intersection over union of two `width`x`height` byte masks (nonzero is
/// foreground). Two empty masks score 1.
///
/// # Safety
/// `pred` and `gt` must each hold `width*height` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_iou(pred: *const u8, gt: *const u8, width: usize, height: usize, out: *mut f64) -> HcStatus {
    if out.is_null() {
        return fail(HcStatus::NullPointer, "out is null");
    }
    guard(|| match masks(pred, gt, width, height) {
        Ok((a, b)) => match frame_iou(&a, &b) {
            Ok(v) => {
                *out = v;
                HcStatus::Ok
            }
            Err(e) => from_error(e),
        },
        Err(s) => s,
    })
}

/// Weighted F-measure with weight `beta2` on precision.
///
/// # Safety
/// As for [`hc_iou`].
#[no_mangle]
pub unsafe extern "C" fn hc_f_measure(
    pred: *const u8,
    gt: *const u8,
    width: usize,
    height: usize,
    beta2: f64,
    out: *mut f64,
) -> HcStatus {
    if out.is_null() {
        return fail(HcStatus::NullPointer, "out is null");
    }
    guard(|| match masks(pred, gt, width, height) {
        Ok((a, b)) => match frame_f(&a, &b, beta2) {
            Ok(v) => {
                *out = v;
                HcStatus::Ok
            }
            Err(e) => from_error(e),
        },
        Err(s) => s,
    })
}
