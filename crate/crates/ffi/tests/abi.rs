use std::ffi::{CStr, CString};
use std::ptr;

use suffice_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    suffice_string_free(s);
    out
}

unsafe fn last_error() -> String {
    CStr::from_ptr(suffice_last_error()).to_str().unwrap().to_owned()
}

#[test]
fn sentence_estimator_round_trip() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(suffice_sentence_parse(c("AA X. EX Y. AA y. X(0) <-> Y(0)").as_ptr(), &mut s), SufficeStatus::Ok);
        let mut depth = 0;
        assert_eq!(suffice_sentence_depth(s, &mut depth), SufficeStatus::Ok);
        assert_eq!(depth, 2);
        let mut p = ptr::null_mut();
        assert_eq!(suffice_params_new(2, c("sq").as_ptr(), &mut p), SufficeStatus::Ok);
        let cover = [2usize, 2];
        assert_eq!(suffice_params_set_cover(p, cover.as_ptr(), cover.len()), SufficeStatus::Ok);
        let mut e = ptr::null_mut();
        assert_eq!(suffice_saturate(s, p, &mut e), SufficeStatus::Ok);
        let (mut v, mut brute) = (false, false);
        assert_eq!(suffice_truth_by_estimator(s, e, &mut v), SufficeStatus::Ok);
        assert_eq!(suffice_brute_truth(s, 12, &mut brute), SufficeStatus::Ok);
        assert!(v && brute);

        let mut text = ptr::null_mut();
        assert_eq!(suffice_estimator_render(e, &mut text), SufficeStatus::Ok);
        let text = c(&take(text));
        let mut back = ptr::null_mut();
        assert_eq!(suffice_estimator_parse(text.as_ptr(), &mut back), SufficeStatus::Ok);
        let mut level = 0;
        assert_eq!(suffice_estimator_level(back, &mut level), SufficeStatus::Ok);
        assert_eq!(level, 2);

        let mut n = ptr::null_mut();
        assert_eq!(suffice_sentence_negate(s, &mut n), SufficeStatus::Ok);
        let mut en = ptr::null_mut();
        assert_eq!(suffice_saturate(n, p, &mut en), SufficeStatus::Ok);
        assert_eq!(suffice_truth_by_estimator(n, en, &mut v), SufficeStatus::Ok);
        assert!(!v);

        for h in [e, back, en] {
            suffice_estimator_free(h);
        }
        suffice_sentence_free(s);
        suffice_sentence_free(n);
        suffice_params_free(p);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(suffice_sentence_parse(c("AA y. y%0=0").as_ptr(), &mut s), SufficeStatus::OutOfClass);
        assert!(s.is_null());
        assert!(last_error().contains("zero period"));
        assert_eq!(suffice_sentence_parse(c("AA y. (").as_ptr(), &mut s), SufficeStatus::Syntax);
        assert_eq!(suffice_sentence_parse(ptr::null(), &mut s), SufficeStatus::NullPointer);
        assert_eq!(suffice_sentence_parse(c("AA y. true").as_ptr(), ptr::null_mut()), SufficeStatus::NullPointer);
        let bad = [0xffu8, 0];
        assert_eq!(suffice_sentence_parse(bad.as_ptr().cast(), &mut s), SufficeStatus::InvalidUtf8);
        let mut p = ptr::null_mut();
        assert_eq!(suffice_params_new(0, c("wobble").as_ptr(), &mut p), SufficeStatus::Syntax);
        let mut out = [0u64; 8];
        assert_eq!(
            suffice_fastseq(c("exp2").as_ptr(), SufficeVariant::Plain, 1, 1 << 40, out.as_mut_ptr(), out.len()),
            SufficeStatus::Overflow
        );
        let mut r = ptr::null_mut();
        assert_eq!(suffice_run_experiment(c("kind = \"nope\"").as_ptr(), &mut r), SufficeStatus::Config);
        suffice_sentence_free(ptr::null_mut());
        suffice_string_free(ptr::null_mut());
    }
}

#[test]
fn sequences_search_and_games() {
    unsafe {
        let mut a = [0u64; 6];
        assert_eq!(suffice_fastseq(c("lin(2)").as_ptr(), SufficeVariant::Plain, 1, u64::MAX, a.as_mut_ptr(), 6), SufficeStatus::Ok);
        assert_eq!(a, [3, 9, 21, 45, 93, 189]);
        let mut wf = true;
        assert_eq!(suffice_wf_search(c("succ@0").as_ptr(), a.as_ptr(), a.len(), &mut wf), SufficeStatus::Ok);
        assert!(!wf);
        assert_eq!(suffice_wf_search(c("pred@2").as_ptr(), a.as_ptr(), a.len(), &mut wf), SufficeStatus::Ok);
        assert!(wf);
        let mut o = SufficeOutcome::Draw;
        assert_eq!(suffice_random_game_value(4, 4, 2, &mut o), SufficeStatus::Ok);
        let (mut t, mut p) = (SufficePlayer::First, SufficePlayer::First);
        for seed in 0..10 {
            assert_eq!(suffice_priority_game(seed, 3, 1, seed % 2 == 0, &mut t, &mut p), SufficeStatus::Ok);
            assert_eq!(t, p);
        }
    }
}

#[test]
fn experiment_report() {
    unsafe {
        let mut r = ptr::null_mut();
        let cfg = c("kind = \"jump_tower\"\nseed = 2\n");
        assert_eq!(suffice_run_experiment(cfg.as_ptr(), &mut r), SufficeStatus::Ok);
        let (mut cases, mut agree, mut exhausted) = (0, 0, true);
        assert_eq!(suffice_report_counts(r, &mut cases, &mut agree, &mut exhausted), SufficeStatus::Ok);
        assert!(cases > 0 && cases == agree && !exhausted);
        let mut csv = ptr::null_mut();
        assert_eq!(suffice_report_csv(r, &mut csv), SufficeStatus::Ok);
        assert!(take(csv).starts_with("id,family"));
        let mut json = ptr::null_mut();
        assert_eq!(suffice_report_json(r, &mut json), SufficeStatus::Ok);
        assert!(take(json).contains("\"agreement_rate\": 1.0"));
        suffice_report_free(r);
    }
}
