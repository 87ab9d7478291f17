//! C ABI over `radar-lz`.
//!
//! Every fallible call returns an [`RlzStatus`]; on failure a message is
//! kept per thread and can be read with [`rlz_last_error`]. Learners are
//! opaque heap handles released with [`rlz_learner_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use radar_lz::context_tree::SymbolAlphabet;
use radar_lz::harness::{self, ExperimentConfig};
use radar_lz::learner::{LearnerConfig, UniversalLearner};
use radar_lz::scene::{gen_zadoff_chu, quantize, Occupancy};
use radar_lz::{Action, Error, Obs};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    AlphabetViolation = 3,
    CostBound = 4,
    Config = 5,
    Io = 6,
    Undefined = 7,
    Panic = 8,
}

/// Opaque learner handle.
pub struct RlzLearner {
    inner: UniversalLearner,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RlzStatus {
    match err {
        Error::AlphabetViolation { .. } => RlzStatus::AlphabetViolation,
        Error::CostBound { .. } => RlzStatus::CostBound,
        Error::UndefinedAverage => RlzStatus::Undefined,
        Error::Config(_) | Error::Toml(_) => RlzStatus::Config,
        Error::Parameter(_) | Error::Input(_) => RlzStatus::InvalidArgument,
        Error::Csv(_) | Error::Io(_) => RlzStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), (RlzStatus, String)>) -> RlzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RlzStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside radar-lz".into());
            RlzStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (RlzStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RlzStatus, String) {
    (RlzStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (RlzStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (RlzStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn learner_mut<'a>(h: *mut RlzLearner) -> Result<&'a mut RlzLearner, (RlzStatus, String)> {
    h.as_mut().ok_or_else(|| null("learner handle"))
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rlz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a learner with default settings and the given seed.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rlz_learner_new(
    observations: u32,
    actions: u32,
    seed: u64,
    out: *mut *mut RlzLearner,
) -> RlzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let alphabet = SymbolAlphabet::new(observations, actions).map_err(lib_err)?;
        let config = LearnerConfig {
            seed,
            ..LearnerConfig::default()
        };
        let inner = UniversalLearner::new(alphabet, config).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(RlzLearner { inner }));
        Ok(())
    })
}

/// Creates a learner from a TOML learner section (same keys as `[learner]`
/// in an experiment config).
///
/// # Safety
/// `config_toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rlz_learner_new_with_config(
    observations: u32,
    actions: u32,
    config_toml: *const c_char,
    out: *mut *mut RlzLearner,
) -> RlzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(config_toml, "config_toml")?;
        let config: LearnerConfig = radar_lz_toml(text)?;
        let alphabet = SymbolAlphabet::new(observations, actions).map_err(lib_err)?;
        let inner = UniversalLearner::new(alphabet, config).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(RlzLearner { inner }));
        Ok(())
    })
}

fn radar_lz_toml(text: &str) -> Result<LearnerConfig, (RlzStatus, String)> {
    let wrapped = format!("[learner]\n{text}");
    ExperimentConfig::from_toml_str(&wrapped)
        .map(|c| c.learner)
        .map_err(lib_err)
}

/// Releases a learner. NULL is ignored.
///
/// # Safety
/// `handle` must come from `rlz_learner_new*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rlz_learner_free(handle: *mut RlzLearner) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Chooses a waveform index for the current observation symbol.
///
/// # Safety
/// `handle` must be a live learner; `out_action` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rlz_learner_select(
    handle: *mut RlzLearner,
    obs: u32,
    out_action: *mut u32,
) -> RlzStatus {
    guard(|| {
        let l = learner_mut(handle)?;
        if out_action.is_null() {
            return Err(null("out_action"));
        }
        let a = l.inner.select_waveform(Obs(obs)).map_err(lib_err)?;
        *out_action = a.0;
        Ok(())
    })
}

/// Reports the outcome of the last selected waveform.
///
/// # Safety
/// `handle` must be a live learner.
#[no_mangle]
pub unsafe extern "C" fn rlz_learner_observe(
    handle: *mut RlzLearner,
    obs: u32,
    action: u32,
    cost: f64,
    next_obs: u32,
) -> RlzStatus {
    guard(|| {
        let l = learner_mut(handle)?;
        l.inner
            .observe_and_update(Obs(obs), Action(action), cost, Obs(next_obs))
            .map_err(lib_err)
    })
}

/// Running average cost; `RLZ_STATUS_UNDEFINED` before the first step.
///
/// # Safety
/// `handle` must be a live learner; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rlz_learner_average_cost(
    handle: *mut RlzLearner,
    out: *mut f64,
) -> RlzStatus {
    guard(|| {
        let l = learner_mut(handle)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = l.inner.average_cost().map_err(lib_err)?;
        Ok(())
    })
}

/// Number of context-tree nodes including the root; 0 for NULL.
///
/// # Safety
/// `handle` must be NULL or a live learner.
#[no_mangle]
pub unsafe extern "C" fn rlz_learner_node_count(handle: *const RlzLearner) -> usize {
    handle.as_ref().map_or(0, |l| l.inner.tree().len())
}

/// Runs the experiment described by a TOML config file and writes its CSVs
/// and plots into `out_dir`.
///
/// # Safety
/// Both arguments must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn rlz_run_experiment(
    config_path: *const c_char,
    out_dir: *const c_char,
) -> RlzStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(config_path, "config_path")?);
        let out = PathBuf::from(str_arg(out_dir, "out_dir")?);
        let config = ExperimentConfig::load(&path).map_err(lib_err)?;
        let result = harness::run_experiment(&config).map_err(lib_err)?;
        harness::write_outputs(&result, &out).map_err(lib_err)?;
        Ok(())
    })
}

/// Observation symbol for an occupancy index over `subchannels` bands and a
/// detection flag.
///
/// # Safety
/// `out_symbol` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rlz_quantize(
    subchannels: u32,
    occupancy_index: u32,
    detected: bool,
    out_symbol: *mut u32,
) -> RlzStatus {
    guard(|| {
        if out_symbol.is_null() {
            return Err(null("out_symbol"));
        }
        let occ = Occupancy::from_index(subchannels, occupancy_index).map_err(lib_err)?;
        *out_symbol = quantize(&occ, detected).0;
        Ok(())
    })
}

/// Writes a Zadoff-Chu sequence into two caller-provided arrays of `length`.
///
/// # Safety
/// `out_re` and `out_im` must each point to `length` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rlz_zadoff_chu(
    length: usize,
    root: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> RlzStatus {
    guard(|| {
        if out_re.is_null() || out_im.is_null() {
            return Err(null("output buffer"));
        }
        let seq = gen_zadoff_chu(length, root).map_err(lib_err)?;
        let re = std::slice::from_raw_parts_mut(out_re, length);
        let im = std::slice::from_raw_parts_mut(out_im, length);
        for (i, z) in seq.iter().enumerate() {
            re[i] = z.re;
            im[i] = z.im;
        }
        Ok(())
    })
}
