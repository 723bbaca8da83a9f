//! C ABI over `cvenc`.
//!
//! Every function returns a [`CvStatus`]. On failure a message is kept per
//! thread and can be read with [`cvenc_last_error_message`]. Objects are
//! opaque handles created by the library and released with the matching
//! `*_free` function. Rasters cross the boundary as row-major buffers of
//! `height * width` elements.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cvenc::decoding::{decode_instances, DecodeParams};
use cvenc::encoding::{encode_targets, EncodeParams, EncodedTargets};
use cvenc::metrics::{evaluate_with, AjiMode};
use cvenc::raster::{Connectivity, LabelMap, RasterShape, ScalarField, VectorField};
use cvenc::rw::{rw_instances, RwParams};
use cvenc::synth::{generate_scene, SynthParams};
use cvenc::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    DataError = 4,
    NotConverged = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CvAjiMode {
    Literal = 0,
    UsedFlag = 1,
}

/// Connectivity is 4 or 8.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CvEncodeParams {
    pub erosion_radius: u32,
    pub center_distance_threshold: f64,
    pub connectivity: u32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CvDecodeParams {
    pub inside_threshold: f64,
    pub center_threshold: f64,
    pub connectivity: u32,
    pub min_instance_area: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CvRwParams {
    pub beta: f64,
    pub cg_tolerance: f64,
    pub cg_max_iters: usize,
    pub connectivity: u32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct CvMetrics {
    pub aji: f64,
    pub iou: f64,
    pub dice: f64,
}

/// Opaque instance label map.
pub struct CvLabelMap(LabelMap);

/// Opaque encoded training targets.
pub struct CvTargets(EncodedTargets);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CvStatus {
    match e {
        Error::ShapeMismatch { .. } | Error::DataLength { .. } => CvStatus::ShapeMismatch,
        Error::InvalidParameter(_) | Error::InvalidShape { .. } | Error::Config { .. } => CvStatus::InvalidArgument,
        Error::NotConverged { .. } => CvStatus::NotConverged,
        _ => CvStatus::DataError,
    }
}

struct Fail(CvStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null() -> Fail {
    Fail(CvStatus::NullPointer, "null pointer argument".into())
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> CvStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CvStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CvStatus::Panic
        }
    }
}

fn connectivity(code: u32) -> Result<Connectivity, Fail> {
    match code {
        4 => Ok(Connectivity::Four),
        8 => Ok(Connectivity::Eight),
        other => Err(Fail(CvStatus::InvalidArgument, format!("connectivity must be 4 or 8, got {other}"))),
    }
}

fn connectivity_code(c: Connectivity) -> u32 {
    match c {
        Connectivity::Four => 4,
        Connectivity::Eight => 8,
    }
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn slice<'a, T>(ptr: *const T, len: usize) -> Result<&'a [T], Fail> {
    if ptr.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `ptr` must be null or valid for `len` writes.
unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize) -> Result<&'a mut [T], Fail> {
    if ptr.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

/// # Safety
/// `ptr` must be null or point to a live handle.
unsafe fn handle<'a, T>(ptr: *const T) -> Result<&'a T, Fail> {
    ptr.as_ref().ok_or_else(null)
}

fn shape(height: usize, width: usize) -> Result<RasterShape, Fail> {
    Ok(RasterShape::new(height, width)?)
}

/// # Safety
/// `out` must be null or valid for one write.
unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread; empty if nothing has failed.
#[no_mangle]
pub extern "C" fn cvenc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn cvenc_encode_params_default() -> CvEncodeParams {
    let p = EncodeParams::default();
    CvEncodeParams {
        erosion_radius: p.erosion_radius,
        center_distance_threshold: p.center_distance_threshold,
        connectivity: connectivity_code(p.connectivity),
    }
}

#[no_mangle]
pub extern "C" fn cvenc_decode_params_default() -> CvDecodeParams {
    let p = DecodeParams::default();
    CvDecodeParams {
        inside_threshold: p.inside_threshold,
        center_threshold: p.center_threshold,
        connectivity: connectivity_code(p.connectivity),
        min_instance_area: p.min_instance_area,
    }
}

#[no_mangle]
pub extern "C" fn cvenc_rw_params_default() -> CvRwParams {
    let p = RwParams::default();
    CvRwParams {
        beta: p.beta,
        cg_tolerance: p.cg_tolerance,
        cg_max_iters: p.cg_max_iters,
        connectivity: connectivity_code(p.connectivity),
    }
}

impl CvDecodeParams {
    fn to_rust(self) -> Result<DecodeParams, Fail> {
        Ok(DecodeParams {
            inside_threshold: self.inside_threshold,
            center_threshold: self.center_threshold,
            connectivity: connectivity(self.connectivity)?,
            min_instance_area: self.min_instance_area,
        })
    }
}

/// Copies `height * width` labels into a new label map.
///
/// # Safety
/// `labels` must be valid for `height * width` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn cvenc_label_map_new(
    height: usize,
    width: usize,
    labels: *const u32,
    out: *mut *mut CvLabelMap,
) -> CvStatus {
    guard(|| {
        let s = shape(height, width)?;
        let data = slice(labels, s.len())?.to_vec();
        emit(out, CvLabelMap(LabelMap::from_vec(s, data)?))
    })
}

/// # Safety
/// `map` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cvenc_label_map_free(map: *mut CvLabelMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// # Safety
/// `map` must be a live handle; `height` and `width` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cvenc_label_map_dims(
    map: *const CvLabelMap,
    height: *mut usize,
    width: *mut usize,
) -> CvStatus {
    guard(|| {
        let m = &handle(map)?.0;
        if height.is_null() || width.is_null() {
            return Err(null());
        }
        *height = m.height();
        *width = m.width();
        Ok(())
    })
}

/// Copies the labels out; `len` must equal `height * width`.
///
/// # Safety
/// `map` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cvenc_label_map_copy(map: *const CvLabelMap, out: *mut u32, len: usize) -> CvStatus {
    guard(|| {
        let m = &handle(map)?.0;
        if len != m.shape().len() {
            return Err(Fail(CvStatus::ShapeMismatch, format!("buffer holds {len}, map has {}", m.shape().len())));
        }
        slice_mut(out, len)?.copy_from_slice(m.data());
        Ok(())
    })
}

/// Synthetic scene with default shape parameters.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cvenc_synth_scene(
    seed: u64,
    height: usize,
    width: usize,
    nucleus_count: usize,
    out: *mut *mut CvLabelMap,
) -> CvStatus {
    guard(|| {
        let params = SynthParams { nucleus_count, ..SynthParams::new(seed, shape(height, width)?) };
        emit(out, CvLabelMap(generate_scene(&params)?))
    })
}

/// # Safety
/// `gt` must be a live handle, `params` null (defaults) or valid, `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cvenc_encode(
    gt: *const CvLabelMap,
    params: *const CvEncodeParams,
    out: *mut *mut CvTargets,
) -> CvStatus {
    guard(|| {
        let gt = &handle(gt)?.0;
        let p = params.as_ref().copied().unwrap_or_else(|| cvenc_encode_params_default());
        let p = EncodeParams {
            erosion_radius: p.erosion_radius,
            center_distance_threshold: p.center_distance_threshold,
            connectivity: connectivity(p.connectivity)?,
        };
        emit(out, CvTargets(encode_targets(gt, &p)?))
    })
}

/// # Safety
/// `targets` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cvenc_targets_free(targets: *mut CvTargets) {
    if !targets.is_null() {
        drop(Box::from_raw(targets));
    }
}

/// Copies the targets out as 0/1 masks and vector channels. Any output
/// pointer may be null to skip it; non-null buffers hold `len` elements.
///
/// # Safety
/// `targets` must be a live handle; each non-null buffer valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cvenc_targets_copy(
    targets: *const CvTargets,
    inside: *mut u8,
    center: *mut u8,
    dx: *mut f64,
    dy: *mut f64,
    len: usize,
) -> CvStatus {
    guard(|| {
        let t = &handle(targets)?.0;
        if len != t.inside.shape().len() {
            return Err(Fail(CvStatus::ShapeMismatch, format!("buffer holds {len}, raster has {}", t.inside.shape().len())));
        }
        for (src, dst) in [(&t.inside, inside), (&t.center, center)] {
            if !dst.is_null() {
                for (d, &s) in slice_mut(dst, len)?.iter_mut().zip(src.data()) {
                    *d = s as u8;
                }
            }
        }
        for (src, dst) in [(t.vectors.dx(), dx), (t.vectors.dy(), dy)] {
            if !dst.is_null() {
                slice_mut(dst, len)?.copy_from_slice(src);
            }
        }
        Ok(())
    })
}

/// Number of instances with a centroid, i.e. the instance count of the ground truth.
///
/// # Safety
/// `targets` must be a live handle and `count` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cvenc_targets_instance_count(targets: *const CvTargets, count: *mut usize) -> CvStatus {
    guard(|| {
        let t = &handle(targets)?.0;
        *count.as_mut().ok_or_else(null)? = t.centroids.len();
        Ok(())
    })
}

/// Decodes instances from inside/center probabilities and center vectors.
///
/// # Safety
/// The four input buffers must be valid for `height * width` reads; `params`
/// null (defaults) or valid; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cvenc_decode(
    height: usize,
    width: usize,
    inside_prob: *const f64,
    center_prob: *const f64,
    dx: *const f64,
    dy: *const f64,
    params: *const CvDecodeParams,
    out: *mut *mut CvLabelMap,
) -> CvStatus {
    guard(|| {
        let s = shape(height, width)?;
        let inside = ScalarField::from_vec(s, slice(inside_prob, s.len())?.to_vec())?;
        let center = ScalarField::from_vec(s, slice(center_prob, s.len())?.to_vec())?;
        let vectors = VectorField::from_channels(s, slice(dx, s.len())?.to_vec(), slice(dy, s.len())?.to_vec())?;
        let p = params.as_ref().copied().unwrap_or_else(|| cvenc_decode_params_default()).to_rust()?;
        let (labels, _) = decode_instances(&inside, &center, &vectors, &p)?;
        emit(out, CvLabelMap(labels))
    })
}

/// Random walker baseline from inside/center probabilities.
///
/// # Safety
/// Input buffers must be valid for `height * width` reads; parameter
/// pointers null (defaults) or valid; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cvenc_random_walker(
    height: usize,
    width: usize,
    inside_prob: *const f64,
    center_prob: *const f64,
    decode_params: *const CvDecodeParams,
    rw_params: *const CvRwParams,
    out: *mut *mut CvLabelMap,
) -> CvStatus {
    guard(|| {
        let s = shape(height, width)?;
        let inside = ScalarField::from_vec(s, slice(inside_prob, s.len())?.to_vec())?;
        let center = ScalarField::from_vec(s, slice(center_prob, s.len())?.to_vec())?;
        let dp = decode_params.as_ref().copied().unwrap_or_else(|| cvenc_decode_params_default()).to_rust()?;
        let rp = rw_params.as_ref().copied().unwrap_or_else(|| cvenc_rw_params_default());
        let rp = RwParams {
            beta: rp.beta,
            cg_tolerance: rp.cg_tolerance,
            cg_max_iters: rp.cg_max_iters,
            connectivity: connectivity(rp.connectivity)?,
        };
        emit(out, CvLabelMap(rw_instances(&inside, &center, &dp, &rp)?))
    })
}

/// AJI, IoU and Dice of `pred` against `gt`.
///
/// # Safety
/// `gt` and `pred` must be live handles and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cvenc_evaluate(
    gt: *const CvLabelMap,
    pred: *const CvLabelMap,
    mode: CvAjiMode,
    out: *mut CvMetrics,
) -> CvStatus {
    guard(|| {
        let (gt, pred) = (&handle(gt)?.0, &handle(pred)?.0);
        let mode = match mode {
            CvAjiMode::Literal => AjiMode::Literal,
            CvAjiMode::UsedFlag => AjiMode::UsedFlag,
        };
        let r = evaluate_with(gt, pred, mode)?;
        if out.is_null() {
            return Err(null());
        }
        ptr::write(out, CvMetrics { aji: r.aji, iou: r.iou, dice: r.dice });
        Ok(())
    })
}
