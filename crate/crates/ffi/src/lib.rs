//! C ABI over the `suffice` core.
//!
//! Every fallible function returns a [`SufficeStatus`]; on failure the
//! message is available from [`suffice_last_error`] on the same thread.
//! Objects are opaque handles released with their `_free` function. Strings
//! returned through `char **` are owned by the caller and released with
//! [`suffice_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use suffice::error::Error;
use suffice::estimators::{saturate, truth_by_estimator, CoverRule, Estimator, NotionParams};
use suffice::experiment::{self, ExperimentConfig, Report};
use suffice::fastgrow::{make_fastseq, Variant};
use suffice::formulas::{brute_truth, parse_sentence, Sentence};
use suffice::games::{self, GameSpec, Outcome, Parity, Player};
use suffice::oracles::parity_winner;
use suffice::wellfounded::bounded_wf_search;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SufficeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    OutOfClass = 4,
    LevelMismatch = 5,
    Overflow = 6,
    Budget = 7,
    NonConvergence = 8,
    Precondition = 9,
    Malformed = 10,
    OutOfBounds = 11,
    Config = 12,
    Io = 13,
    Panic = 14,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SufficeOutcome {
    SecondWins = 0,
    Draw = 1,
    FirstWins = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SufficePlayer {
    First = 1,
    Second = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SufficeVariant {
    Plain = 0,
    Strict = 1,
    Monotone = 2,
}

pub struct SufficeSentence(Sentence);
pub struct SufficeParams(NotionParams);
pub struct SufficeEstimator(Estimator);
pub struct SufficeReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SufficeStatus {
    match e {
        Error::Syntax { .. } => SufficeStatus::Syntax,
        Error::OutOfClass(_) => SufficeStatus::OutOfClass,
        Error::MissingVariable(_) => SufficeStatus::Malformed,
        Error::LevelMismatch { .. } => SufficeStatus::LevelMismatch,
        Error::Overflow { .. } => SufficeStatus::Overflow,
        Error::Budget(_) => SufficeStatus::Budget,
        Error::NonConvergence { .. } => SufficeStatus::NonConvergence,
        Error::Precondition(_) => SufficeStatus::Precondition,
        Error::Malformed(_) => SufficeStatus::Malformed,
        Error::IndexOutOfBounds { .. } => SufficeStatus::OutOfBounds,
        Error::Config { .. } => SufficeStatus::Config,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => SufficeStatus::Io,
    }
}

struct Fail(SufficeStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SufficeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SufficeStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            SufficeStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(SufficeStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn utf8<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(SufficeStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn suffice_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn suffice_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn suffice_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn suffice_sentence_parse(text: *const c_char, out: *mut *mut SufficeSentence) -> SufficeStatus {
    guard(|| {
        let s = parse_sentence(utf8(text, "text")?)?;
        write(out, boxed(SufficeSentence(s)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn suffice_sentence_free(s: *mut SufficeSentence) {
    free(s)
}

/// Canonical text of the sentence.
#[no_mangle]
pub unsafe extern "C" fn suffice_sentence_render(s: *const SufficeSentence, out: *mut *mut c_char) -> SufficeStatus {
    guard(|| write(out, owned_string(deref(s, "sentence")?.0.to_string()), "out"))
}

/// Number of set quantifiers.
#[no_mangle]
pub unsafe extern "C" fn suffice_sentence_depth(s: *const SufficeSentence, out: *mut usize) -> SufficeStatus {
    guard(|| write(out, deref(s, "sentence")?.0.depth(), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn suffice_sentence_negate(s: *const SufficeSentence, out: *mut *mut SufficeSentence) -> SufficeStatus {
    guard(|| write(out, boxed(SufficeSentence(deref(s, "sentence")?.0.negate())), "out"))
}

/// Exact truth by exhaustive search over at most `max_bits` witness bits.
#[no_mangle]
pub unsafe extern "C" fn suffice_brute_truth(s: *const SufficeSentence, max_bits: u32, out: *mut bool) -> SufficeStatus {
    guard(|| write(out, brute_truth(&deref(s, "sentence")?.0, max_bits)?, "out"))
}

/// Notion parameters with the given minimum lower end and rate text such as
/// `lin(2)` or `sq`.
#[no_mangle]
pub unsafe extern "C" fn suffice_params_new(a_min: u64, rate: *const c_char, out: *mut *mut SufficeParams) -> SufficeStatus {
    guard(|| {
        let p = NotionParams::new(a_min, utf8(rate, "rate")?.parse()?)?;
        write(out, boxed(SufficeParams(p)), "out")
    })
}

/// Minimum element counts for levels `1..=len`.
#[no_mangle]
pub unsafe extern "C" fn suffice_params_set_cover(p: *mut SufficeParams, mins: *const usize, len: usize) -> SufficeStatus {
    guard(|| {
        let p = p.as_mut().ok_or_else(|| null("params"))?;
        if mins.is_null() && len > 0 {
            return Err(null("mins"));
        }
        let cover: Vec<CoverRule> =
            (0..len).map(|i| CoverRule { min_elements: *mins.add(i) }).collect();
        let next = p.0.clone().with_cover(cover);
        next.validate()?;
        p.0 = next;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn suffice_params_free(p: *mut SufficeParams) {
    free(p)
}

#[no_mangle]
pub unsafe extern "C" fn suffice_saturate(
    s: *const SufficeSentence,
    p: *const SufficeParams,
    out: *mut *mut SufficeEstimator,
) -> SufficeStatus {
    guard(|| {
        let e = saturate(&deref(s, "sentence")?.0, &deref(p, "params")?.0, None)?;
        write(out, boxed(SufficeEstimator(e)), "out")
    })
}

/// Parse the bracket form, e.g. `{L0(1,4),L0(2,6)}`.
#[no_mangle]
pub unsafe extern "C" fn suffice_estimator_parse(text: *const c_char, out: *mut *mut SufficeEstimator) -> SufficeStatus {
    guard(|| {
        let e: Estimator = utf8(text, "text")?.parse()?;
        write(out, boxed(SufficeEstimator(e)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn suffice_estimator_render(e: *const SufficeEstimator, out: *mut *mut c_char) -> SufficeStatus {
    guard(|| write(out, owned_string(deref(e, "estimator")?.0.to_string()), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn suffice_estimator_level(e: *const SufficeEstimator, out: *mut u32) -> SufficeStatus {
    guard(|| write(out, deref(e, "estimator")?.0.level(), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn suffice_estimator_free(e: *mut SufficeEstimator) {
    free(e)
}

#[no_mangle]
pub unsafe extern "C" fn suffice_truth_by_estimator(
    s: *const SufficeSentence,
    e: *const SufficeEstimator,
    out: *mut bool,
) -> SufficeStatus {
    guard(|| write(out, truth_by_estimator(&deref(s, "sentence")?.0, &deref(e, "estimator")?.0)?, "out"))
}

/// Fill `out[0..len]` with a fast-growing sequence for `rate`.
#[no_mangle]
pub unsafe extern "C" fn suffice_fastseq(
    rate: *const c_char,
    variant: SufficeVariant,
    margin: u64,
    cap: u64,
    out: *mut u64,
    len: usize,
) -> SufficeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v = match variant {
            SufficeVariant::Plain => Variant::Plain,
            SufficeVariant::Strict => Variant::Strict,
            SufficeVariant::Monotone => Variant::Monotone,
        };
        let s = make_fastseq(&utf8(rate, "rate")?.parse()?, len, v, margin, cap)?;
        ptr::copy_nonoverlapping(s.values.as_ptr(), out, len);
        Ok(())
    })
}

/// Bounded well-foundedness search; `relation` is `pred`, `succ`, `omega2`
/// or a generated graph name, optionally followed by `@start`.
#[no_mangle]
pub unsafe extern "C" fn suffice_wf_search(
    relation: *const c_char,
    a: *const u64,
    len: usize,
    out_well_founded: *mut bool,
) -> SufficeStatus {
    guard(|| {
        if a.is_null() && len > 0 {
            return Err(null("a"));
        }
        let (r, start) = experiment::parse_relation(utf8(relation, "relation")?)?;
        let seq = if len == 0 { &[][..] } else { std::slice::from_raw_parts(a, len) };
        write(out_well_founded, bounded_wf_search(&r, start, seq).is_well_founded(), "out_well_founded")
    })
}

fn outcome(o: Outcome) -> SufficeOutcome {
    match o {
        Outcome::SecondWins => SufficeOutcome::SecondWins,
        Outcome::Draw => SufficeOutcome::Draw,
        Outcome::FirstWins => SufficeOutcome::FirstWins,
    }
}

fn player(p: Player) -> SufficePlayer {
    match p {
        Player::First => SufficePlayer::First,
        Player::Second => SufficePlayer::Second,
    }
}

/// Value of the seeded random game tree.
#[no_mangle]
pub unsafe extern "C" fn suffice_random_game_value(
    seed: u64,
    plies: usize,
    branching: usize,
    out: *mut SufficeOutcome,
) -> SufficeStatus {
    guard(|| {
        let g = GameSpec::random(seed, plies, branching)?;
        write(out, outcome(games::solve(&g, games::DEFAULT_NODE_BUDGET)?.value), "out")
    })
}

/// Winner of the timeout game on a seeded random arena at `scale`, and of
/// the parity game on the same arena.
#[no_mangle]
pub unsafe extern "C" fn suffice_priority_game(
    seed: u64,
    states: usize,
    scale: u64,
    first_wants_odd: bool,
    out_timeout_winner: *mut SufficePlayer,
    out_parity_winner: *mut SufficePlayer,
) -> SufficeStatus {
    guard(|| {
        let wants = if first_wants_odd { Parity::Odd } else { Parity::Even };
        let arena = games::random_arena(seed, states, 2, 3)?;
        let g = games::build_priority_game(experiment::priority_spec(arena.clone(), 0, wants, scale)?)?;
        write(out_timeout_winner, player(games::solve_priority(&g)?), "out_timeout_winner")?;
        write(out_parity_winner, player(parity_winner(&arena, 0, wants)?), "out_parity_winner")
    })
}

/// Run an experiment from TOML text. Output paths in the config are
/// honoured.
#[no_mangle]
pub unsafe extern "C" fn suffice_run_experiment(config_toml: *const c_char, out: *mut *mut SufficeReport) -> SufficeStatus {
    guard(|| {
        let c = ExperimentConfig::from_toml(utf8(config_toml, "config_toml")?)?;
        let r = experiment::run(&c)?;
        r.write(&c.output)?;
        write(out, boxed(SufficeReport(r)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn suffice_report_counts(
    r: *const SufficeReport,
    out_cases: *mut usize,
    out_agreements: *mut usize,
    out_budget_exhausted: *mut bool,
) -> SufficeStatus {
    guard(|| {
        let s = &deref(r, "report")?.0.summary;
        write(out_cases, s.cases, "out_cases")?;
        write(out_agreements, s.agreements, "out_agreements")?;
        write(out_budget_exhausted, s.status == experiment::RunStatus::BudgetExhausted, "out_budget_exhausted")
    })
}

#[no_mangle]
pub unsafe extern "C" fn suffice_report_csv(r: *const SufficeReport, out: *mut *mut c_char) -> SufficeStatus {
    guard(|| write(out, owned_string(deref(r, "report")?.0.to_csv()?), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn suffice_report_json(r: *const SufficeReport, out: *mut *mut c_char) -> SufficeStatus {
    guard(|| write(out, owned_string(deref(r, "report")?.0.to_json()?), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn suffice_report_free(r: *mut SufficeReport) {
    free(r)
}
