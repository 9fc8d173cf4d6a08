//! Exercises the C ABI end to end: a model trained and saved through the
//! core library is opened and scored through the extern "C" surface, and the
//! header is checked against the exported symbols.

use std::ffi::{CStr, CString};

use pylm::corpus::{Corpus, Vocabulary, BOS_ID};
use pylm::hpylm::{HpylmModel, TrainConfig};
use pylm::model::{LanguageModel, Model};
use pylm::seeded_rng;

use pylm_ffi::*;

fn sents(text: &[&str]) -> Vec<Vec<String>> {
    text.iter()
        .map(|s| s.split_whitespace().map(str::to_string).collect())
        .collect()
}

fn trained_model_file(dir: &std::path::Path) -> (std::path::PathBuf, Model) {
    let text = sents(&[
        "der alte hof liegt am wald",
        "der neue hof liegt am see",
        "die kinder spielen am see",
    ]);
    let vocab = Vocabulary::build(text.clone(), 1);
    let corpus = Corpus::encode(&vocab, text);
    let cfg = TrainConfig {
        order: 3,
        burn_in: 5,
        ..Default::default()
    };
    let mut rng = seeded_rng(42);
    let (m, _) = HpylmModel::train(&vocab, &corpus, &cfg, &mut rng, |_, _| {});
    let model = Model::Hpylm(m);
    let path = dir.join("model.pylm");
    model.save(&path).unwrap();
    (path, model)
}

#[test]
fn open_score_close_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let (path, model) = trained_model_file(dir.path());
    let c_path = CString::new(path.to_str().unwrap()).unwrap();

    let mut handle: *mut PylmModel = std::ptr::null_mut();
    let status = unsafe { pylm_model_open(c_path.as_ptr(), &mut handle) };
    assert_eq!(status, PylmStatus::Ok);
    assert!(!handle.is_null());

    unsafe {
        assert_eq!(pylm_model_order(handle), 3);
        assert_eq!(pylm_model_vocab_size(handle), model.vocab().len() as u64);
        let kind = CStr::from_ptr(pylm_model_kind(handle));
        assert_eq!(kind.to_str().unwrap(), "hpylm");
    }

    // Full context: must equal the library probability exactly.
    let der = CString::new("der").unwrap();
    let alte = CString::new("alte").unwrap();
    let hof = CString::new("hof").unwrap();
    let ctx = [der.as_ptr(), alte.as_ptr()];
    let mut log2p = 0.0;
    let status =
        unsafe { pylm_score_ngram(handle, ctx.as_ptr(), ctx.len(), hof.as_ptr(), &mut log2p) };
    assert_eq!(status, PylmStatus::Ok);
    let vocab = model.vocab();
    let expect = model
        .prob(
            &[vocab.encode("der"), vocab.encode("alte")],
            vocab.encode("hof"),
        )
        .log2();
    assert_eq!(log2p, expect);

    // Short context: padded with the begin symbol.
    let mut padded = 0.0;
    let ctx1 = [alte.as_ptr()];
    let status = unsafe { pylm_score_ngram(handle, ctx1.as_ptr(), 1, hof.as_ptr(), &mut padded) };
    assert_eq!(status, PylmStatus::Ok);
    let expect_padded = model
        .prob(&[BOS_ID, vocab.encode("alte")], vocab.encode("hof"))
        .log2();
    assert_eq!(padded, expect_padded);

    // An unknown target maps to the unknown symbol and still scores.
    let zebra = CString::new("zebra").unwrap();
    let mut unk = 0.0;
    let status =
        unsafe { pylm_score_ngram(handle, ctx.as_ptr(), ctx.len(), zebra.as_ptr(), &mut unk) };
    assert_eq!(status, PylmStatus::Ok);
    assert!(unk.is_finite());

    // Sentence scoring sums per-event log2 probabilities plus the end event.
    let sentence = CString::new("der alte hof").unwrap();
    let mut total = 0.0;
    let mut events = 0u64;
    let status = unsafe { pylm_score_sentence(handle, sentence.as_ptr(), &mut total, &mut events) };
    assert_eq!(status, PylmStatus::Ok);
    assert_eq!(events, 4);
    let ids: Vec<u32> = ["der", "alte", "hof"]
        .iter()
        .map(|t| vocab.encode(t))
        .collect();
    let mut expect_total = model.prob(&[BOS_ID, BOS_ID], ids[0]).log2();
    expect_total += model.prob(&[BOS_ID, ids[0]], ids[1]).log2();
    expect_total += model.prob(&[ids[0], ids[1]], ids[2]).log2();
    expect_total += model.prob(&[ids[1], ids[2]], pylm::corpus::EOS_ID).log2();
    assert!((total - expect_total).abs() < 1e-12);

    unsafe { pylm_model_close(handle) };
}

#[test]
fn error_codes_and_messages() {
    let mut handle: *mut PylmModel = std::ptr::null_mut();

    // Missing file -> Io, with a message.
    let missing = CString::new("/nonexistent/nowhere.pylm").unwrap();
    let status = unsafe { pylm_model_open(missing.as_ptr(), &mut handle) };
    assert_eq!(status, PylmStatus::Io);
    let msg = unsafe { CStr::from_ptr(pylm_last_error()) };
    assert!(!msg.to_str().unwrap().is_empty());

    // Garbage file -> Format.
    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("garbage.pylm");
    std::fs::write(&garbage, b"definitely not a model").unwrap();
    let c_garbage = CString::new(garbage.to_str().unwrap()).unwrap();
    let status = unsafe { pylm_model_open(c_garbage.as_ptr(), &mut handle) };
    assert_eq!(status, PylmStatus::Format);

    // Null arguments -> NullArgument.
    let status = unsafe { pylm_model_open(std::ptr::null(), &mut handle) };
    assert_eq!(status, PylmStatus::NullArgument);
    let status = unsafe { pylm_model_open(missing.as_ptr(), std::ptr::null_mut()) };
    assert_eq!(status, PylmStatus::NullArgument);

    let mut out = 0.0;
    let target = CString::new("x").unwrap();
    let status = unsafe {
        pylm_score_ngram(
            std::ptr::null(),
            std::ptr::null(),
            0,
            target.as_ptr(),
            &mut out,
        )
    };
    assert_eq!(status, PylmStatus::NullArgument);

    // Closing null is a no-op.
    unsafe { pylm_model_close(std::ptr::null_mut()) };
}

#[test]
fn format_version_matches_core() {
    assert_eq!(pylm_format_version(), pylm::io::FORMAT_VERSION);
}

/// The hand-maintained header must declare exactly the exported functions.
#[test]
fn header_parity() {
    let root = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{root}/include/pylm.h")).unwrap();
    let source = std::fs::read_to_string(format!("{root}/src/lib.rs")).unwrap();

    let exported: std::collections::BTreeSet<String> = source
        .lines()
        .filter(|l| l.contains("extern \"C\" fn pylm_"))
        .map(|l| {
            let start = l.find("fn pylm_").unwrap() + 3;
            let rest = &l[start..];
            rest[..rest.find('(').unwrap_or(rest.len())]
                .trim()
                .to_string()
        })
        .collect();
    assert!(!exported.is_empty());

    let declared: std::collections::BTreeSet<String> = header
        .split(&['(', ')', ' ', '\n', '*', ';'][..])
        .filter(|tok| tok.starts_with("pylm_"))
        .map(str::to_string)
        .collect();

    for f in &exported {
        assert!(declared.contains(f), "header is missing {f}");
    }
    for d in declared.iter().filter(|d| !d.contains('#')) {
        assert!(exported.contains(d), "header declares unknown {d}");
    }
}
