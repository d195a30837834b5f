//! C ABI over the `jpsro` crate.
//!
//! Games and runs are opaque heap handles released with their `_free`
//! function. Every fallible call returns a [`JpsroStatus`]; on failure a
//! message is kept per thread and read with [`jpsro_last_error_message`].
//! Panics never cross the boundary; they are reported as
//! `JPSRO_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use jpsro::experiments::{run_seed, Algo, ExperimentConfig};
use jpsro::jpsro::{write_trace_jsonl, IterationRecord, RunConfig, RunStatus};
use jpsro::metagame::{PayoffTensor, Provenance, Shape};
use jpsro::population::{NeuplConfig, PopulationMode};
use jpsro::solver::{solve_cce, JointDistribution, Objective};
use jpsro::{Error, ExtensiveGame, GameSpec};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JpsroStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownGame = 3,
    Solver = 4,
    Runtime = 5,
    Panic = 6,
    BufferTooSmall = 7,
    OutOfRange = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JpsroAlgo {
    Jpsro = 0,
    NeuplTabular = 1,
    NeuplParametric = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JpsroObjective {
    MaxGini = 0,
    MaxWelfare = 1,
    MaxEntropy = 2,
}

/// Run settings. `algo` takes a `JpsroAlgo` value and `objective` a
/// `JpsroObjective` value.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct JpsroRunOptions {
    pub algo: u32,
    pub objective: u32,
    pub solver_epsilon: f64,
    pub termination_epsilon: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

pub struct JpsroGame {
    spec: GameSpec,
    game: ExtensiveGame,
}

pub struct JpsroRun {
    converged: bool,
    records: Vec<IterationRecord>,
    sigmas: Vec<JointDistribution>,
}

struct Failure {
    status: JpsroStatus,
    message: String,
}

impl Failure {
    fn new(status: JpsroStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownGame(_) | Error::UnsupportedParameters { .. } | Error::MalformedSpec(_) => {
                JpsroStatus::UnknownGame
            }
            Error::Solver(_) => JpsroStatus::Solver,
            Error::InvalidConfig(_)
            | Error::DimensionMismatch(_)
            | Error::InvalidMixture(_)
            | Error::InvalidPolicy(_)
            | Error::Parse(_) => JpsroStatus::InvalidArgument,
            Error::PlayerOutOfRange { .. } | Error::UnknownStrategy { .. } => JpsroStatus::OutOfRange,
            _ => JpsroStatus::Runtime,
        };
        Failure::new(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> JpsroStatus {
    let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|panic| {
        let message = panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        Err(Failure::new(JpsroStatus::Panic, message))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            JpsroStatus::Ok
        }
        Err(f) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = Some(f.message));
            f.status
        }
    }
}

fn non_null<T>(ptr: *const T, name: &str) -> Result<(), Failure> {
    if ptr.is_null() {
        Err(Failure::new(JpsroStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

/// Copy `src` into `(dst, len)`; reports the required length in `needed`
/// when it is not null.
unsafe fn fill<T: Copy>(src: &[T], dst: *mut T, len: usize, needed: *mut usize) -> Result<(), Failure> {
    if !needed.is_null() {
        *needed = src.len();
    }
    if len < src.len() {
        return Err(Failure::new(
            JpsroStatus::BufferTooSmall,
            format!("buffer holds {len}, {} needed", src.len()),
        ));
    }
    if !src.is_empty() {
        non_null(dst, "out")?;
        std::ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    }
    Ok(())
}

fn objective(code: u32) -> Result<Objective, Failure> {
    match code {
        0 => Ok(Objective::MaxGini),
        1 => Ok(Objective::MaxWelfare),
        2 => Ok(Objective::MaxEntropy),
        other => Err(Failure::new(JpsroStatus::InvalidArgument, format!("unknown objective {other}"))),
    }
}

fn algo(code: u32) -> Result<Algo, Failure> {
    match code {
        0 => Ok(Algo::Jpsro),
        1 => Ok(Algo::NeuplTabular),
        2 => Ok(Algo::NeuplParametric),
        other => Err(Failure::new(JpsroStatus::InvalidArgument, format!("unknown algorithm {other}"))),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn jpsro_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Bytes needed for the last error message including the terminating NUL,
/// or 0 when the last call on this thread succeeded.
#[no_mangle]
pub extern "C" fn jpsro_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |m| m.len() + 1))
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len` bytes).
///
/// # Safety
/// `buf` must be valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn jpsro_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_deref().unwrap_or("").as_bytes();
        let n = bytes.len().min(len - 1);
        std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Build a game from a spec such as `kuhn_poker(players=3)`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jpsro_game_new(spec: *const c_char, out: *mut *mut JpsroGame) -> JpsroStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| Failure::new(JpsroStatus::InvalidArgument, "spec is not UTF-8"))?;
        let spec: GameSpec = text.parse()?;
        let game = spec.build()?;
        *out = Box::into_raw(Box::new(JpsroGame { spec, game }));
        Ok(())
    })
}

/// # Safety
/// `game` must come from `jpsro_game_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn jpsro_game_free(game: *mut JpsroGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// # Safety
/// `game` must be a live game handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn jpsro_game_num_players(game: *const JpsroGame, out: *mut usize) -> JpsroStatus {
    guard(|| {
        non_null(game, "game")?;
        non_null(out, "out")?;
        *out = (*game).game.num_players();
        Ok(())
    })
}

/// # Safety
/// `game` must be a live game handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn jpsro_game_num_infosets(
    game: *const JpsroGame,
    player: usize,
    out: *mut usize,
) -> JpsroStatus {
    guard(|| {
        non_null(game, "game")?;
        non_null(out, "out")?;
        let g = &(*game).game;
        g.check_player(player)?;
        *out = g.num_infosets(player);
        Ok(())
    })
}

/// Defaults: exact JPSRO, Max-Gini, solver epsilon 0.01, termination
/// epsilon 1e-3, 60 iterations, seed 0.
#[no_mangle]
pub extern "C" fn jpsro_run_options_default() -> JpsroRunOptions {
    let run = RunConfig::new(GameSpec::new("rps"));
    JpsroRunOptions {
        algo: JpsroAlgo::Jpsro as u32,
        objective: JpsroObjective::MaxGini as u32,
        solver_epsilon: run.solver_epsilon,
        termination_epsilon: run.termination_epsilon,
        max_iterations: run.max_iterations,
        seed: run.seed,
    }
}

/// Run one seed to termination or the iteration cap.
///
/// # Safety
/// `game` must be a live game handle, `options` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn jpsro_run_new(
    game: *const JpsroGame,
    options: *const JpsroRunOptions,
    out: *mut *mut JpsroRun,
) -> JpsroStatus {
    guard(|| {
        non_null(game, "game")?;
        non_null(options, "options")?;
        non_null(out, "out")?;
        let game = &*game;
        let o = *options;
        let algo = algo(o.algo)?;
        let mut run = RunConfig::new(game.spec.clone());
        run.objective = objective(o.objective)?;
        run.solver_epsilon = o.solver_epsilon;
        run.termination_epsilon = o.termination_epsilon;
        run.max_iterations = o.max_iterations;
        run.seed = o.seed;
        let mode = match algo {
            Algo::NeuplParametric => PopulationMode::SharedParametric,
            _ => PopulationMode::TabularExact,
        };
        let config = ExperimentConfig {
            algo,
            neupl: NeuplConfig::new(run, mode),
            seeds: vec![o.seed],
        };
        config.validate()?;
        let result = run_seed(&game.game, &config, o.seed)?;
        *out = Box::into_raw(Box::new(JpsroRun {
            converged: result.status == RunStatus::Converged,
            records: result.records,
            sigmas: result.sigmas,
        }));
        Ok(())
    })
}

/// # Safety
/// `run` must come from `jpsro_run_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn jpsro_run_free(run: *mut JpsroRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must be a live run handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn jpsro_run_converged(run: *const JpsroRun, out: *mut bool) -> JpsroStatus {
    guard(|| {
        non_null(run, "run")?;
        non_null(out, "out")?;
        *out = (*run).converged;
        Ok(())
    })
}

/// # Safety
/// `run` must be a live run handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn jpsro_run_num_records(run: *const JpsroRun, out: *mut usize) -> JpsroStatus {
    guard(|| {
        non_null(run, "run")?;
        non_null(out, "out")?;
        *out = (*run).records.len();
        Ok(())
    })
}

unsafe fn record<'a>(run: *const JpsroRun, index: usize) -> Result<&'a IterationRecord, Failure> {
    non_null(run, "run")?;
    let run = &*run;
    run.records.get(index).ok_or_else(|| {
        Failure::new(JpsroStatus::OutOfRange, format!("record {index} of {}", run.records.len()))
    })
}

/// CCE gap certified by record `index`.
///
/// # Safety
/// `run` must be a live run handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn jpsro_run_cce_gap(run: *const JpsroRun, index: usize, out: *mut f64) -> JpsroStatus {
    guard(|| {
        let r = record(run, index)?;
        non_null(out, "out")?;
        *out = r.cce_gap;
        Ok(())
    })
}

/// Per-player CCE values of record `index` into `values[0..len]`.
///
/// # Safety
/// `run` must be a live run handle; `values` valid for `len` writes;
/// `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn jpsro_run_values(
    run: *const JpsroRun,
    index: usize,
    values: *mut f64,
    len: usize,
    needed: *mut usize,
) -> JpsroStatus {
    guard(|| fill(&record(run, index)?.values, values, len, needed))
}

/// Per-player deviation gains of record `index` into `gains[0..len]`.
///
/// # Safety
/// As for `jpsro_run_values`.
#[no_mangle]
pub unsafe extern "C" fn jpsro_run_deviation_gains(
    run: *const JpsroRun,
    index: usize,
    gains: *mut f64,
    len: usize,
    needed: *mut usize,
) -> JpsroStatus {
    guard(|| fill(&record(run, index)?.deviation_gains, gains, len, needed))
}

/// Row-major probabilities of the meta-distribution certified by record
/// `index`; its shape is the record's population sizes.
///
/// # Safety
/// As for `jpsro_run_values`.
#[no_mangle]
pub unsafe extern "C" fn jpsro_run_sigma(
    run: *const JpsroRun,
    index: usize,
    probs: *mut f64,
    len: usize,
    needed: *mut usize,
) -> JpsroStatus {
    guard(|| {
        record(run, index)?;
        let run = &*run;
        fill(run.sigmas[index].probs(), probs, len, needed)
    })
}

/// Trace in JSON-lines form, NUL-terminated. `needed` receives the byte
/// count including the NUL.
///
/// # Safety
/// `run` must be a live run handle; `buf` valid for `len` writes; `needed`
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn jpsro_run_trace_jsonl(
    run: *const JpsroRun,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> JpsroStatus {
    guard(|| {
        non_null(run, "run")?;
        let mut text = Vec::new();
        let run = &*run;
        write_trace_jsonl(&run.records, &mut text)?;
        text.push(0);
        let bytes: Vec<c_char> = text.into_iter().map(|b| b as c_char).collect();
        fill(&bytes, buf, len, needed)
    })
}

/// Solve for a CCE of a normal-form game. `shape[0..num_players]` gives the
/// strategy counts; `payoffs` holds, for every joint strategy in row-major
/// order, one payoff per player. The distribution is written to
/// `probs[0..len]`.
///
/// # Safety
/// `shape` must be valid for `num_players` reads, `payoffs` for
/// `payoffs_len` reads and `probs` for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn jpsro_solve_cce(
    num_players: usize,
    shape: *const usize,
    payoffs: *const f64,
    payoffs_len: usize,
    objective_code: u32,
    epsilon: f64,
    probs: *mut f64,
    len: usize,
) -> JpsroStatus {
    guard(|| {
        non_null(shape, "shape")?;
        non_null(payoffs, "payoffs")?;
        if num_players == 0 {
            return Err(Failure::new(JpsroStatus::InvalidArgument, "at least one player is required"));
        }
        let dims = std::slice::from_raw_parts(shape, num_players).to_vec();
        let entries = dims
            .iter()
            .try_fold(1usize, |acc, &d| if d == 0 { None } else { acc.checked_mul(d) })
            .ok_or_else(|| Failure::new(JpsroStatus::InvalidArgument, "shape must be positive and not overflow"))?;
        if entries.checked_mul(num_players) != Some(payoffs_len) {
            return Err(Failure::new(
                JpsroStatus::InvalidArgument,
                format!("expected {} payoffs, got {payoffs_len}", entries.saturating_mul(num_players)),
            ));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Failure::new(JpsroStatus::InvalidArgument, "epsilon must be non-negative"));
        }
        let values = std::slice::from_raw_parts(payoffs, payoffs_len).to_vec();
        let tensor = PayoffTensor::from_values(Shape(dims), values, Provenance::Exact)?;
        let sigma = solve_cce(&tensor, objective(objective_code)?, epsilon)?;
        fill(sigma.probs(), probs, len, std::ptr::null_mut())
    })
}
