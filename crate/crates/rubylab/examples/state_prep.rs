//! The two-puncture state-preparation protocol: an ancilla Bell pair
//! controls both connector strings, then a Bell measurement projects the
//! patch into |+> or |-> with equal probability.

use rubylab::codesim::{build_patch, run_protocol, two_puncture_prep_script, PatchSpec};

fn main() {
    let spec = PatchSpec::default_two_puncture();
    let script = two_puncture_prep_script();
    println!("protocol script:\n{}\n", serde_json::to_string_pretty(&script).unwrap());

    // a single run, with its full outcome log
    let (patch, mut t) = build_patch(&spec, 42).unwrap();
    let log = run_protocol(&script, &patch, &mut t).unwrap();
    println!("sample run (seed 42), outcome log as JSON lines:");
    for rec in &log {
        println!("{}", serde_json::to_string(rec).unwrap());
    }

    // seeded repetitions: the Bell outcome is a fair coin
    let runs = 500u64;
    let mut plus = 0usize;
    for seed in 0..runs {
        let (patch, mut t) = build_patch(&spec, seed).unwrap();
        let log = run_protocol(&script, &patch, &mut t).unwrap();
        if log[0].outcome == Some(1) {
            plus += 1;
        }
    }
    println!(
        "\n{runs} seeded runs: |+> frequency {:.3} (expected 0.5)",
        plus as f64 / runs as f64
    );
}
