use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use rawr_ffi::*;

unsafe fn graph(text: &str) -> *mut RawrGraph {
    let c = CString::new(text).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(rawr_graph_from_edge_list(c.as_ptr(), &mut g), RawrStatus::Ok);
    g
}

unsafe fn last_error() -> String {
    let p = rawr_last_error_message();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

#[test]
fn star_round_trip() {
    unsafe {
        let g = graph("0 1\n0 2\n0 3\n");
        assert_eq!(rawr_graph_num_nodes(g), 4);
        assert_eq!(rawr_graph_num_edges(g), 3);

        let mut p = ptr::null_mut();
        assert_eq!(rawr_partition_refine(g, 0.0, &mut p), RawrStatus::Ok);
        assert_eq!(rawr_partition_num_blocks(p), 2);
        let mut blocks = [9usize; 4];
        assert_eq!(rawr_partition_block_of(p, blocks.as_mut_ptr(), 4), RawrStatus::Ok);
        assert_eq!(blocks, [0, 1, 1, 1]);

        let mut residual = -1.0;
        assert_eq!(rawr_quotient_residual(g, p, &mut residual), RawrStatus::Ok);
        assert_eq!(residual, 0.0);

        let mut r = ptr::null_mut();
        assert_eq!(rawr_rewire(g, p, RawrVariant::RepNodes, &mut r), RawrStatus::Ok);
        assert_eq!(rawr_rewired_num_nodes(r), 6);

        let mut before = 0.0;
        let mut after = 0.0;
        assert_eq!(rawr_mean_effective_resistance(g, ptr::null(), &mut before), RawrStatus::Ok);
        assert_eq!(rawr_mean_effective_resistance(g, r, &mut after), RawrStatus::Ok);
        assert!((before - 1.5).abs() < 1e-12);
        assert!(after < before);

        let labels = [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let mut value = -1.0;
        assert_eq!(rawr_srl(g, p, r, labels.as_ptr(), 2, 2, &mut value), RawrStatus::Ok);
        assert!(value >= 0.0 && value.is_finite());

        rawr_rewired_free(r);
        rawr_partition_free(p);
        rawr_graph_free(g);
    }
}

#[test]
fn p3_resistance_and_percentile() {
    unsafe {
        let edges = [0usize, 1, 1, 2];
        let mut g = ptr::null_mut();
        assert_eq!(rawr_graph_from_edges(3, edges.as_ptr(), 2, &mut g), RawrStatus::Ok);
        let mut er = 0.0;
        assert_eq!(rawr_mean_effective_resistance(g, ptr::null(), &mut er), RawrStatus::Ok);
        assert!((er - 4.0 / 3.0).abs() < 1e-9);
        let mut eps = 0.0;
        assert_eq!(rawr_degree_percentile(g, 100, &mut eps), RawrStatus::Ok);
        assert_eq!(eps, 2.0);
        assert_eq!(rawr_degree_percentile(g, 30, &mut eps), RawrStatus::InvalidInput);
        rawr_graph_free(g);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let bad = CString::new("0 0\n").unwrap();
        let mut g = ptr::null_mut();
        assert_eq!(rawr_graph_from_edge_list(bad.as_ptr(), &mut g), RawrStatus::Parse);
        assert!(g.is_null());
        assert!(last_error().contains("self-loop"), "{}", last_error());

        assert_eq!(rawr_graph_from_edge_list(ptr::null(), &mut g), RawrStatus::NullPointer);
        let mut p = ptr::null_mut();
        assert_eq!(rawr_partition_refine(ptr::null(), 0.0, &mut p), RawrStatus::NullPointer);

        let g = graph("0 1\n");
        assert_eq!(rawr_partition_refine(g, -1.0, &mut p), RawrStatus::InvalidInput);
        assert_eq!(rawr_partition_refine(g, 0.0, &mut p), RawrStatus::Ok);
        let mut small = [0usize; 1];
        assert_eq!(rawr_partition_block_of(p, small.as_mut_ptr(), 1), RawrStatus::InvalidInput);

        let disconnected = graph("0 1\n2 3\n");
        let mut er = 0.0;
        assert_eq!(rawr_mean_effective_resistance(disconnected, ptr::null(), &mut er), RawrStatus::InvalidInput);

        rawr_partition_free(p);
        rawr_graph_free(g);
        rawr_graph_free(disconnected);
        rawr_graph_free(ptr::null_mut());
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "rawr.h"

int main(void) {
    RawrGraph *g = NULL;
    RawrPartition *p = NULL;
    RawrRewired *r = NULL;
    double before = 0.0, after = 0.0;
    if (rawr_graph_from_edge_list("0 1\n1 2\n", &g) != RAWR_STATUS_OK) return 1;
    if (rawr_partition_refine(g, 0.0, &p) != RAWR_STATUS_OK) return 2;
    if (rawr_rewire(g, p, RAWR_VARIANT_REP_NODES, &r) != RAWR_STATUS_OK) return 3;
    if (rawr_mean_effective_resistance(g, NULL, &before) != RAWR_STATUS_OK) return 4;
    if (rawr_mean_effective_resistance(g, r, &after) != RAWR_STATUS_OK) return 5;
    if (rawr_graph_from_edge_list("0 0\n", &g) != RAWR_STATUS_PARSE) return 6;
    printf("%.6f %.6f %zu\n", before, after, rawr_partition_num_blocks(p));
    rawr_rewired_free(r);
    rawr_partition_free(p);
    return 0;
}
"#;

fn find_cc() -> Option<String> {
    ["cc", "gcc", "clang"].into_iter().map(String::from).find(|c| {
        Command::new(c).arg("--version").output().map(|o| o.status.success()).unwrap_or(false)
    })
}

#[test]
fn c_program_links_against_header() {
    let Some(cc) = find_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("librawr_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let bin = dir.path().join("main");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = text.split_whitespace().collect();
    assert_eq!(fields[0], "1.333333");
    assert!(fields[1].parse::<f64>().unwrap() < 4.0 / 3.0);
    assert_eq!(fields[2], "2");
}
