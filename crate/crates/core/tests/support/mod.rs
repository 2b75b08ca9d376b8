pub mod reference;
pub mod synth;
