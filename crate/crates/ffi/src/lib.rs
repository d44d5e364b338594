//! C ABI over the valign metrics, aggregators and bootstrap.
//!
//! Rankings cross the boundary as NUL-terminated strings of comma-separated
//! value ids, best first (`"security,benevolence,tradition"`). Every
//! function returns a [`ValignStatus`]; on failure
//! [`valign_last_error_message`] describes the error on the calling thread.
//! Strings returned by the library are freed with [`valign_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use valign::aggregation::{aggregate, Method, TiePolicy};
use valign::metrics::{
    f1_at_k, jaccard_at_k, krippendorff_alpha, rbo_at_k, AlphaConfig, DepthPolicy, RboConfig,
    SetDistance,
};
use valign::uncertainty::{bootstrap, BootstrapConfig};
use valign::{top_k, Error, JudgeKind, LoadMode, PanelMatrix, Ranking, ValueTaxonomy};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValignStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    InvalidRanking = 4,
    InsufficientData = 5,
    Io = 6,
    Parse = 7,
    Internal = 8,
}

/// A loaded value taxonomy.
pub struct ValignTaxonomy(ValueTaxonomy);

/// A loaded annotation panel.
pub struct ValignPanel(PanelMatrix);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ValignBootstrap {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Inputs that were NaN (undefined) and excluded from resamples.
    pub undefined: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ValignStatus {
    match e {
        Error::InvalidRanking(_) | Error::DuplicateId(_) | Error::UnknownValue(_) => {
            ValignStatus::InvalidRanking
        }
        Error::Insufficient(_) | Error::Empty(_) | Error::KTooLarge { .. } => {
            ValignStatus::InsufficientData
        }
        Error::Io { .. } => ValignStatus::Io,
        Error::Json(_) | Error::Csv(_) | Error::Toml(_) | Error::Parse(_) | Error::Taxonomy(_) => {
            ValignStatus::Parse
        }
        Error::Panel(_) | Error::InvalidArgument(_) | Error::TooManyValues { .. } => {
            ValignStatus::InvalidArgument
        }
        _ => ValignStatus::Internal,
    }
}

struct Fail(ValignStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ValignStatus {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(Ok(())) => ValignStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside valign".into());
            ValignStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(ValignStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(ValignStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ranking(p: *const c_char, what: &str) -> Result<Ranking, Fail> {
    let s = text(p, what)?;
    let names: Vec<&str> = s.split(',').map(str::trim).filter(|n| !n.is_empty()).collect();
    Ok(Ranking::from_names(&names)?)
}

fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    // SAFETY: null is rejected; the caller promises a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| Fail(ValignStatus::NullPointer, format!("{what} is null")))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn valign_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn valign_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn valign_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// F1 of the top-`k` sets of two rankings.
///
/// # Safety
/// `a` and `b` must be valid C strings; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn valign_f1_at_k(
    a: *const c_char,
    b: *const c_char,
    k: usize,
    result: *mut f64,
) -> ValignStatus {
    guard(|| {
        let (a, b) = (ranking(a, "a")?, ranking(b, "b")?);
        *out(result, "result")? = f1_at_k(&top_k(&a, k)?, &top_k(&b, k)?)?;
        Ok(())
    })
}

/// Jaccard index of the top-`k` sets of two rankings.
///
/// # Safety
/// `a` and `b` must be valid C strings; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn valign_jaccard_at_k(
    a: *const c_char,
    b: *const c_char,
    k: usize,
    result: *mut f64,
) -> ValignStatus {
    guard(|| {
        let (a, b) = (ranking(a, "a")?, ranking(b, "b")?);
        *out(result, "result")? = jaccard_at_k(&top_k(&a, k)?, &top_k(&b, k)?)?;
        Ok(())
    })
}

/// Normalized rank-biased overlap to depth `k` with persistence `p`.
///
/// # Safety
/// `a` and `b` must be valid C strings; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn valign_rbo_at_k(
    a: *const c_char,
    b: *const c_char,
    k: usize,
    p: f64,
    result: *mut f64,
) -> ValignStatus {
    guard(|| {
        let (a, b) = (ranking(a, "a")?, ranking(b, "b")?);
        let cfg = RboConfig {
            p,
            k,
            depth_policy: DepthPolicy::Strict,
        };
        *out(result, "result")? = rbo_at_k(&a, &b, &cfg)?.value;
        Ok(())
    })
}

/// Aggregates `n` voter rankings. `method` is `kemeny`, `majority` or
/// `borda`; `tie_policy` is NULL for the default or a policy name. The
/// consensus is written to `*ranking_out` and must be freed with
/// [`valign_string_free`].
///
/// # Safety
/// `voters` must point to `n` valid C strings; `method` must be a valid C
/// string; `tie_policy` must be NULL or a valid C string; `ranking_out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn valign_aggregate(
    method: *const c_char,
    voters: *const *const c_char,
    n: usize,
    k: usize,
    tie_policy: *const c_char,
    ranking_out: *mut *mut c_char,
) -> ValignStatus {
    guard(|| {
        let method: Method = text(method, "method")?.parse()?;
        let policy: TiePolicy = if tie_policy.is_null() {
            TiePolicy::default()
        } else {
            text(tie_policy, "tie_policy")?.parse()?
        };
        if voters.is_null() {
            return Err(Fail(ValignStatus::NullPointer, "voters is null".into()));
        }
        let rankings = (0..n)
            .map(|i| ranking(*voters.add(i), "voter"))
            .collect::<Result<Vec<_>, _>>()?;
        let slot = out(ranking_out, "ranking_out")?;
        let agg = aggregate(method, &rankings, k, policy)?;
        let joined: Vec<&str> = agg.ranking.items().iter().map(|v| v.as_str()).collect();
        *slot = owned_string(joined.join(","));
        Ok(())
    })
}

/// Percentile bootstrap of the mean of `n` values. NaN marks an undefined
/// value, which is excluded from each resample.
///
/// # Safety
/// `values` must point to `n` readable doubles; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn valign_bootstrap_mean(
    values: *const f64,
    n: usize,
    replicates: usize,
    confidence: f64,
    seed: u64,
    result: *mut ValignBootstrap,
) -> ValignStatus {
    guard(|| {
        if values.is_null() {
            return Err(Fail(ValignStatus::NullPointer, "values is null".into()));
        }
        let xs: Vec<Option<f64>> = std::slice::from_raw_parts(values, n)
            .iter()
            .map(|&x| (!x.is_nan()).then_some(x))
            .collect();
        let slot = out(result, "result")?;
        let cfg = BootstrapConfig {
            replicates,
            confidence,
            seed,
            parallel: true,
        };
        let r = bootstrap(&xs, &cfg)?;
        *slot = ValignBootstrap {
            mean: r.mean,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            undefined: r.undefined,
        };
        Ok(())
    })
}

/// The bundled ten-value taxonomy. Free with [`valign_taxonomy_free`].
#[no_mangle]
pub extern "C" fn valign_taxonomy_bundled() -> *mut ValignTaxonomy {
    Box::into_raw(Box::new(ValignTaxonomy(ValueTaxonomy::bundled())))
}

/// Loads a TOML or JSON taxonomy file.
///
/// # Safety
/// `path` must be a valid C string; `taxonomy_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn valign_taxonomy_load(
    path: *const c_char,
    taxonomy_out: *mut *mut ValignTaxonomy,
) -> ValignStatus {
    guard(|| {
        let path = text(path, "path")?;
        let slot = out(taxonomy_out, "taxonomy_out")?;
        let t = ValueTaxonomy::load(Path::new(path), LoadMode::Strict)?;
        *slot = Box::into_raw(Box::new(ValignTaxonomy(t)));
        Ok(())
    })
}

/// Number of basic values, or 0 for NULL.
///
/// # Safety
/// `taxonomy` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn valign_taxonomy_value_count(taxonomy: *const ValignTaxonomy) -> usize {
    taxonomy.as_ref().map_or(0, |t| t.0.basic_values().len())
}

/// # Safety
/// `taxonomy` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn valign_taxonomy_free(taxonomy: *mut ValignTaxonomy) {
    if !taxonomy.is_null() {
        drop(Box::from_raw(taxonomy));
    }
}

/// Loads a `.json` or `.csv` panel file.
///
/// # Safety
/// `path` must be a valid C string; `panel_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn valign_panel_load(
    path: *const c_char,
    panel_out: *mut *mut ValignPanel,
) -> ValignStatus {
    guard(|| {
        let path = text(path, "path")?;
        let slot = out(panel_out, "panel_out")?;
        let p = PanelMatrix::load(Path::new(path))?;
        *slot = Box::into_raw(Box::new(ValignPanel(p)));
        Ok(())
    })
}

/// Parses a panel from its JSON record list.
///
/// # Safety
/// `json` must be a valid C string; `panel_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn valign_panel_from_json(
    json: *const c_char,
    panel_out: *mut *mut ValignPanel,
) -> ValignStatus {
    guard(|| {
        let json = text(json, "json")?;
        let slot = out(panel_out, "panel_out")?;
        let p = PanelMatrix::read_json(json.as_bytes())?;
        *slot = Box::into_raw(Box::new(ValignPanel(p)));
        Ok(())
    })
}

/// Checks every ranking in the panel against the taxonomy.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn valign_panel_validate(
    panel: *const ValignPanel,
    taxonomy: *const ValignTaxonomy,
) -> ValignStatus {
    guard(|| {
        let (Some(p), Some(t)) = (panel.as_ref(), taxonomy.as_ref()) else {
            return Err(Fail(ValignStatus::NullPointer, "panel or taxonomy is null".into()));
        };
        p.0.validate(&t.0)?;
        Ok(())
    })
}

/// Number of interviews, or 0 for NULL.
///
/// # Safety
/// `panel` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn valign_panel_interview_count(panel: *const ValignPanel) -> usize {
    panel.as_ref().map_or(0, |p| p.0.interviews().len())
}

/// Krippendorff's alpha over the panel's expert columns. `distance` is
/// `jaccard`, `masi` or `nominal`.
///
/// # Safety
/// `panel` must be a live handle; `distance` a valid C string; `result`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn valign_panel_expert_alpha(
    panel: *const ValignPanel,
    distance: *const c_char,
    k: usize,
    result: *mut f64,
) -> ValignStatus {
    guard(|| {
        let p = panel
            .as_ref()
            .ok_or_else(|| Fail(ValignStatus::NullPointer, "panel is null".into()))?;
        let distance: SetDistance = text(distance, "distance")?.parse()?;
        let slot = out(result, "result")?;
        let cols = p.0.expert_columns();
        *slot = krippendorff_alpha(&p.0, &cols, &AlphaConfig { distance, k })?.alpha;
        Ok(())
    })
}

/// Number of model judges when `model` is true, expert judges otherwise.
///
/// # Safety
/// `panel` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn valign_panel_judge_count(panel: *const ValignPanel, model: bool) -> usize {
    let kind = if model { JudgeKind::Model } else { JudgeKind::Expert };
    panel.as_ref().map_or(0, |p| p.0.judges_of_kind(kind).len())
}

/// # Safety
/// `panel` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn valign_panel_free(panel: *mut ValignPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}
