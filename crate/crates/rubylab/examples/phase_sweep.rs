//! Run the sweep stage of the pipeline over a detuning range and print the
//! per-point classification, demonstrating config-driven artifact output.

use rubylab::config::default_config;
use rubylab::pipeline::{run, verify_manifest, Stage};

fn main() {
    let mut cfg = default_config();
    cfg.sweep_detunings = vec![1.0, 3.5];
    let out = std::env::temp_dir().join("rubylab_phase_sweep");
    let manifest = run(&cfg, Stage::Sweep, &out).unwrap();
    println!("wrote {} files to {}", manifest.files.len(), out.display());
    for f in &manifest.files {
        println!("  {} ({} bytes, sha256 {}...)", f.name, f.bytes, &f.sha256[..12]);
    }
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    println!("\nsweep.csv:\n{csv}");
    verify_manifest(&out).unwrap();
    println!("manifest checksums verified on reload");
}
