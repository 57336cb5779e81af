//! Stabilizer simulation of the punctured surface-code patch.

pub mod patch;
pub mod protocol;
pub mod tableau;

pub use patch::{build_patch, CodePatch, CodesimError, PatchSpec};
pub use protocol::{
    measure_table1_signature, run_protocol, two_puncture_prep_script, OutcomeRecord, Step,
};
pub use tableau::Tableau;
