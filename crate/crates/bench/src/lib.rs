//! Fixtures shared by the benchmarks.

use std::path::Path;

use bitvision_core::dataset::{default_signatures, synth_image, SynthConfig};
use bitvision_core::device::{load_profile, DeviceProfile};

/// Loads a profile shipped under `profiles/`.
pub fn shipped_profile(name: &str) -> DeviceProfile {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../profiles").join(name);
    load_profile(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// A synthetic SYNTH container for `profile` with a few placed blocks.
pub fn sample_container(profile: &DeviceProfile) -> Vec<u8> {
    let sigs = default_signatures(3, profile);
    synth_image(profile, &sigs, &SynthConfig::default(), 0)
        .expect("synthesize sample")
        .container
}
