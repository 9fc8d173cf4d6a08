//! C ABI for scoring with trained model files.
//!
//! Models are exposed as opaque handles created by [`pylm_model_open`] and
//! released by [`pylm_model_close`]. Functions return [`PylmStatus`] codes;
//! on failure a thread-local message is available via [`pylm_last_error`].
//! The matching declarations live in `include/pylm.h`.
//!
//! Scoring follows the toolkit's conventions: contexts shorter than
//! `order - 1` are padded with the begin symbol, unknown words map to the
//! unknown symbol, and sentence scoring appends the end-symbol event.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;

use pylm::corpus::BOS_ID;
use pylm::model::{LanguageModel, Model};

/// Status codes. Mirrors the CLI exit-code families.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PylmStatus {
    Ok = 0,
    NullArgument = 1,
    Utf8 = 2,
    Io = 3,
    Format = 4,
}

/// Opaque model handle.
pub struct PylmModel {
    model: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message).unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Message for the most recent failure on this thread, or null. The pointer
/// is valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pylm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Version of the model file format this library reads.
#[no_mangle]
pub extern "C" fn pylm_format_version() -> u32 {
    pylm::io::FORMAT_VERSION
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, PylmStatus> {
    if ptr.is_null() {
        set_error("null string argument".into());
        return Err(PylmStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        PylmStatus::Utf8
    })
}

/// Loads a model file. On success writes a handle to `out_model`; the
/// caller owns it and must release it with [`pylm_model_close`].
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out_model` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn pylm_model_open(
    path: *const c_char,
    out_model: *mut *mut PylmModel,
) -> PylmStatus {
    if out_model.is_null() {
        set_error("null out_model".into());
        return PylmStatus::NullArgument;
    }
    let path = match str_arg(path) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match Model::load(Path::new(path)) {
        Ok(model) => {
            clear_error();
            *out_model = Box::into_raw(Box::new(PylmModel { model }));
            PylmStatus::Ok
        }
        Err(e) => {
            let status = match e.exit_code() {
                3 => PylmStatus::Io,
                _ => PylmStatus::Format,
            };
            set_error(e.to_string());
            status
        }
    }
}

/// Releases a handle returned by [`pylm_model_open`]. Null is a no-op.
///
/// # Safety
/// `model` must be a handle from [`pylm_model_open`] not yet closed.
#[no_mangle]
pub unsafe extern "C" fn pylm_model_close(model: *mut PylmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pylm_model_order(model: *const PylmModel) -> u32 {
    model.as_ref().map_or(0, |m| m.model.order() as u32)
}

/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pylm_model_vocab_size(model: *const PylmModel) -> u64 {
    model.as_ref().map_or(0, |m| m.model.vocab().len() as u64)
}

/// Static name of the model family: "mkn", "hpylm", or "hpylmc".
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pylm_model_kind(model: *const PylmModel) -> *const c_char {
    match model.as_ref() {
        Some(m) => match m.model.kind_name() {
            "mkn" => c"mkn".as_ptr(),
            "hpylm" => c"hpylm".as_ptr(),
            _ => c"hpylmc".as_ptr(),
        },
        None => std::ptr::null(),
    }
}

/// Log2 probability of `target` after the given context words. Contexts
/// shorter than `order - 1` are padded with the begin symbol on the left;
/// longer contexts use their rightmost words. Unknown words map to the
/// unknown symbol.
///
/// # Safety
/// `model` must be a live handle; `context` must point to `context_len`
/// valid strings; `target` and `out_log2p` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pylm_score_ngram(
    model: *const PylmModel,
    context: *const *const c_char,
    context_len: usize,
    target: *const c_char,
    out_log2p: *mut f64,
) -> PylmStatus {
    let handle = match model.as_ref() {
        Some(m) => m,
        None => {
            set_error("null model".into());
            return PylmStatus::NullArgument;
        }
    };
    if out_log2p.is_null() || (context.is_null() && context_len > 0) {
        set_error("null output or context".into());
        return PylmStatus::NullArgument;
    }
    let target = match str_arg(target) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let vocab = handle.model.vocab();
    let ctx_len = handle.model.order() - 1;
    let mut ctx = vec![BOS_ID; ctx_len];
    for i in 0..context_len.min(ctx_len) {
        let word = match str_arg(*context.add(context_len - 1 - i)) {
            Ok(s) => s,
            Err(status) => return status,
        };
        ctx[ctx_len - 1 - i] = vocab.encode(word);
    }
    let p = handle.model.prob(&ctx, vocab.encode(target));
    clear_error();
    *out_log2p = p.log2();
    PylmStatus::Ok
}

/// Total log2 probability of a whitespace-tokenized sentence, including the
/// end-symbol event. Writes the event count (tokens + 1) to `out_events`
/// when non-null.
///
/// # Safety
/// `model` must be a live handle; `sentence` and `out_log2p` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pylm_score_sentence(
    model: *const PylmModel,
    sentence: *const c_char,
    out_log2p: *mut f64,
    out_events: *mut u64,
) -> PylmStatus {
    let handle = match model.as_ref() {
        Some(m) => m,
        None => {
            set_error("null model".into());
            return PylmStatus::NullArgument;
        }
    };
    if out_log2p.is_null() {
        set_error("null out_log2p".into());
        return PylmStatus::NullArgument;
    }
    let text = match str_arg(sentence) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let vocab = handle.model.vocab();
    let order = handle.model.order();
    let ids: Vec<u32> = text.split_whitespace().map(|t| vocab.encode(t)).collect();
    let mut window = vec![BOS_ID; order - 1];
    let mut total = 0.0;
    for pos in 0..=ids.len() {
        let target = if pos < ids.len() {
            ids[pos]
        } else {
            pylm::corpus::EOS_ID
        };
        total += handle.model.prob(&window, target).log2();
        if order > 1 && pos < ids.len() {
            window.rotate_left(1);
            window[order - 2] = ids[pos];
        }
    }
    clear_error();
    *out_log2p = total;
    if !out_events.is_null() {
        *out_events = ids.len() as u64 + 1;
    }
    PylmStatus::Ok
}
