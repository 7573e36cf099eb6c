//! Exercises the C ABI from Rust: status codes, error messages, handle
//! lifecycle, and scoring through both model kinds.

use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use catkit::corpus::{Document, Source};
use catkit::sampler::TrainingExample;
use catkit::scorer::{esa_build, train_linear, LinearConfig};

use catkit_capi::{
    catkit_last_error_message, catkit_scorer_free, catkit_scorer_kind, catkit_scorer_open,
    catkit_scorer_score, catkit_scorer_score_batch, catkit_version, CatkitScorer, CatkitStatus,
};

fn train_model(path: &Path) {
    let examples = vec![
        TrainingExample {
            category: "sports".into(),
            document: "goal match stadium".into(),
            label: 1,
            doc_id: "a".into(),
        },
        TrainingExample {
            category: "finance".into(),
            document: "goal match stadium".into(),
            label: 0,
            doc_id: "a".into(),
        },
        TrainingExample {
            category: "finance".into(),
            document: "stock bond market".into(),
            label: 1,
            doc_id: "b".into(),
        },
        TrainingExample {
            category: "sports".into(),
            document: "stock bond market".into(),
            label: 0,
            doc_id: "b".into(),
        },
    ];
    let config = LinearConfig {
        bits: 12,
        epochs: 6,
        base_lr: 0.5,
        ..LinearConfig::default()
    };
    train_linear(&examples, &config).unwrap().save(path).unwrap();
}

fn open(path: &Path) -> *mut CatkitScorer {
    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    let mut handle: *mut CatkitScorer = ptr::null_mut();
    let status = unsafe { catkit_scorer_open(c_path.as_ptr(), &mut handle) };
    assert_eq!(status, CatkitStatus::CatkitOk);
    assert!(!handle.is_null());
    handle
}

#[test]
fn version_is_a_c_string() {
    let version = unsafe { CStr::from_ptr(catkit_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn open_score_free_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.bin");
    train_model(&model_path);

    let handle = open(&model_path);
    let kind = unsafe { CStr::from_ptr(catkit_scorer_kind(handle)) };
    assert_eq!(kind.to_str().unwrap(), "linear");

    let sports = CString::new("sports").unwrap();
    let finance = CString::new("finance").unwrap();
    let doc = CString::new("goal match stadium").unwrap();
    let mut s_sports = 0.0f64;
    let mut s_finance = 0.0f64;
    unsafe {
        assert_eq!(
            catkit_scorer_score(handle, sports.as_ptr(), doc.as_ptr(), &mut s_sports),
            CatkitStatus::CatkitOk
        );
        assert_eq!(
            catkit_scorer_score(handle, finance.as_ptr(), doc.as_ptr(), &mut s_finance),
            CatkitStatus::CatkitOk
        );
        catkit_scorer_free(handle);
    }
    assert!(s_sports > s_finance, "{s_sports} <= {s_finance}");
    assert!(s_sports > 0.0 && s_sports < 1.0);
}

#[test]
fn esa_index_loads_through_the_same_abi() {
    let dir = tempfile::tempdir().unwrap();
    let index_path = dir.path().join("index.esa");
    let docs = vec![
        Document::new("d1", Source::Wikipedia, "dog puppy leash dog", ["c".to_string()]),
        Document::new("d2", Source::Wikipedia, "stock market bond", ["c".to_string()]),
    ];
    esa_build(&docs, 1, 1.0).unwrap().save(&index_path).unwrap();

    let handle = open(&index_path);
    let kind = unsafe { CStr::from_ptr(catkit_scorer_kind(handle)) };
    assert_eq!(kind.to_str().unwrap(), "esa");
    let dog = CString::new("dog").unwrap();
    let mut score = 0.0f64;
    unsafe {
        assert_eq!(
            catkit_scorer_score(handle, dog.as_ptr(), dog.as_ptr(), &mut score),
            CatkitStatus::CatkitOk
        );
        catkit_scorer_free(handle);
    }
    assert_eq!(score, 1.0);
}

#[test]
fn batch_scoring_fills_the_output_array() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.bin");
    train_model(&model_path);
    let handle = open(&model_path);

    let sports = CString::new("sports").unwrap();
    let docs: Vec<CString> = ["goal match stadium", "stock bond market", ""]
        .iter()
        .map(|s| CString::new(*s).unwrap())
        .collect();
    let doc_ptrs: Vec<*const std::ffi::c_char> = docs.iter().map(|d| d.as_ptr()).collect();
    let mut out = vec![0.0f64; doc_ptrs.len()];
    unsafe {
        assert_eq!(
            catkit_scorer_score_batch(
                handle,
                sports.as_ptr(),
                doc_ptrs.as_ptr(),
                doc_ptrs.len(),
                out.as_mut_ptr(),
            ),
            CatkitStatus::CatkitOk
        );
        catkit_scorer_free(handle);
    }
    assert!(out[0] > out[1]);
    assert!(out.iter().all(|s| s.is_finite()));
}

#[test]
fn error_paths_set_codes_and_messages() {
    let mut handle: *mut CatkitScorer = ptr::null_mut();

    // Null path.
    let status = unsafe { catkit_scorer_open(ptr::null(), &mut handle) };
    assert_eq!(status, CatkitStatus::CatkitErrNullArgument);
    let message = unsafe { CStr::from_ptr(catkit_last_error_message()) };
    assert!(message.to_str().unwrap().contains("NULL"));

    // Missing file.
    let missing = CString::new("/nonexistent/model.bin").unwrap();
    let status = unsafe { catkit_scorer_open(missing.as_ptr(), &mut handle) };
    assert_eq!(status, CatkitStatus::CatkitErrIo);
    let message = unsafe { CStr::from_ptr(catkit_last_error_message()) };
    assert!(message.to_str().unwrap().contains("/nonexistent/model.bin"));

    // Not a model file.
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.bin");
    std::fs::write(&junk, b"JUNKJUNKJUNKJUNK").unwrap();
    let c_junk = CString::new(junk.to_str().unwrap()).unwrap();
    let status = unsafe { catkit_scorer_open(c_junk.as_ptr(), &mut handle) };
    assert_eq!(status, CatkitStatus::CatkitErrFormat);

    // Corrupted model file.
    let model_path = dir.path().join("model.bin");
    train_model(&model_path);
    let mut bytes = std::fs::read(&model_path).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xff;
    std::fs::write(&model_path, bytes).unwrap();
    let c_model = CString::new(model_path.to_str().unwrap()).unwrap();
    let status = unsafe { catkit_scorer_open(c_model.as_ptr(), &mut handle) };
    assert_eq!(status, CatkitStatus::CatkitErrCorrupt);

    // Null argument to score.
    let ok_path = dir.path().join("ok.bin");
    train_model(&ok_path);
    let handle = open(&ok_path);
    let mut score = 0.0;
    let status =
        unsafe { catkit_scorer_score(handle, ptr::null(), ptr::null(), &mut score) };
    assert_eq!(status, CatkitStatus::CatkitErrNullArgument);
    unsafe { catkit_scorer_free(handle) };

    // Freeing NULL is a no-op.
    unsafe { catkit_scorer_free(ptr::null_mut()) };
}

/// Compiles and runs a small C client against the generated header and the
/// cdylib, proving the header matches the ABI.
#[test]
fn c_client_compiles_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let target_dir = manifest.join("../../target/debug");
    let lib = target_dir.join("libcatkit_capi.so");
    if !lib.is_file() {
        // The cdylib is produced alongside the test build; if the layout
        // ever changes, surface it instead of silently passing.
        panic!("cdylib not found at {}", lib.display());
    }
    let cc = match std::process::Command::new("cc").arg("--version").output() {
        Ok(_) => "cc",
        Err(_) => {
            eprintln!("skipping: no C compiler available");
            return;
        }
    };

    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.bin");
    train_model(&model_path);

    let c_src = r#"
#include <stdio.h>
#include <string.h>
#include "catkit.h"

int main(int argc, char **argv) {
    if (argc < 2) return 10;
    CatkitScorer *scorer = NULL;
    if (catkit_scorer_open(argv[1], &scorer) != CATKIT_OK) {
        fprintf(stderr, "open failed: %s\n", catkit_last_error_message());
        return 11;
    }
    if (strcmp(catkit_scorer_kind(scorer), "linear") != 0) return 12;
    double on_topic = 0.0, off_topic = 0.0;
    if (catkit_scorer_score(scorer, "sports", "goal match stadium", &on_topic) != CATKIT_OK)
        return 13;
    if (catkit_scorer_score(scorer, "finance", "goal match stadium", &off_topic) != CATKIT_OK)
        return 14;
    if (!(on_topic > off_topic)) return 15;
    if (catkit_scorer_open("/nonexistent", &scorer) != CATKIT_ERR_IO) return 16;
    catkit_scorer_free(scorer);
    printf("%f %f\n", on_topic, off_topic);
    return 0;
}
"#;
    let c_file = dir.path().join("client.c");
    std::fs::write(&c_file, c_src).unwrap();
    let bin_path = dir.path().join("client");
    let compile = std::process::Command::new(cc)
        .arg(&c_file)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&target_dir)
        .arg("-lcatkit_capi")
        .arg(format!("-Wl,-rpath,{}", target_dir.display()))
        .arg("-o")
        .arg(&bin_path)
        .output()
        .unwrap();
    assert!(
        compile.status.success(),
        "cc failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );
    let run = std::process::Command::new(&bin_path)
        .arg(&model_path)
        .output()
        .unwrap();
    assert!(
        run.status.success(),
        "client exited {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
}
