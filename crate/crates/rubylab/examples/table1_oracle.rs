//! The six detectable states of the two-puncture patch and their loop and
//! connector signatures, reproduced on the stabilizer oracle.

use rubylab::codesim::{
    build_patch, measure_table1_signature, run_protocol, two_puncture_prep_script, PatchSpec, Step,
};

fn main() {
    let spec = PatchSpec::default_two_puncture();
    println!(
        "patch: {}x{} faces, punctures at {:?}, {} code qubits\n",
        spec.width, spec.height, spec.punctures,
        2 * spec.width * spec.height + spec.width + spec.height
    );
    println!("{:<10} {:>7} {:>7} {:>7} {:>7}   label", "prepared", "Z_C", "X_C'", "Z_S", "X_S'");

    let direct: [(&str, &[Step]); 4] = [
        ("identity", &[]),
        ("e pair", &[Step::ApplyXString]),
        ("m pair", &[Step::ApplyZString]),
        ("eps pair", &[Step::ApplyXString, Step::ApplyZString]),
    ];
    for (name, script) in direct {
        let (patch, mut t) = build_patch(&spec, 3).unwrap();
        run_protocol(script, &patch, &mut t).unwrap();
        let sig = measure_table1_signature(&patch, &t).unwrap();
        let [a, b, c, d] = sig.values;
        println!("{name:<10} {a:>7.1} {b:>7.1} {c:>7.1} {d:>7.1}   {:?}", sig.label);
    }

    // the superpositions come from the entangled-ancilla protocol, steered
    // to each Bell outcome by a loop correction
    for want in [1i8, -1] {
        let (patch, mut t) = build_patch(&spec, 5).unwrap();
        let log = run_protocol(&two_puncture_prep_script(), &patch, &mut t).unwrap();
        if log[0].outcome != Some(want) {
            t.apply_pauli(&patch.z_loop(0, 0).unwrap());
        }
        let sig = measure_table1_signature(&patch, &t).unwrap();
        let [a, b, c, d] = sig.values;
        let name = if want > 0 { "|+> state" } else { "|-> state" };
        println!("{name:<10} {a:>7.1} {b:>7.1} {c:>7.1} {d:>7.1}   {:?}", sig.label);
    }
}
