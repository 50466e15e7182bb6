//! Channels shipped with the crate.

use crate::channel::ChannelSpec;
use crate::dense::KrausChannel;
use crate::error::Result;

/// Five qubits, four atoms: `p(00321) = 0.2`, `p(01300) = 0.3`,
/// `p(11323) = 1/3`, `p(30000) = 1/6`.
pub const EXAMPLE_SPEC: &str = include_str!("../fixtures/example.spec");
/// Amplitude damping with decay 0.1.
pub const AMPLITUDE_DAMPING: &str = include_str!("../fixtures/amplitude_damping.kraus");
/// Phase flip with probability 0.15.
pub const DEPHASING: &str = include_str!("../fixtures/dephasing.kraus");
/// Two-qubit mixture of seeded random coherent rotations.
pub const RANDOM_ROTATION: &str = include_str!("../fixtures/random_rotation.kraus");

pub const SPEC_NAMES: &[&str] = &["example"];
pub const KRAUS_NAMES: &[&str] = &["amplitude-damping", "dephasing", "random-rotation"];

pub fn example_spec() -> ChannelSpec {
    ChannelSpec::parse(EXAMPLE_SPEC).expect("bundled fixture parses")
}

pub fn amplitude_damping() -> KrausChannel {
    KrausChannel::parse(AMPLITUDE_DAMPING).expect("bundled fixture parses")
}

pub fn dephasing() -> KrausChannel {
    KrausChannel::parse(DEPHASING).expect("bundled fixture parses")
}

pub fn random_rotation() -> KrausChannel {
    KrausChannel::parse(RANDOM_ROTATION).expect("bundled fixture parses")
}

/// A bundled spec by name.
pub fn named_spec(name: &str) -> Option<Result<ChannelSpec>> {
    match name {
        "example" => Some(ChannelSpec::parse(EXAMPLE_SPEC)),
        _ => None,
    }
}

/// A bundled Kraus channel by name.
pub fn named_kraus(name: &str) -> Option<Result<KrausChannel>> {
    let text = match name {
        "amplitude-damping" => AMPLITUDE_DAMPING,
        "dephasing" => DEPHASING,
        "random-rotation" => RANDOM_ROTATION,
        _ => return None,
    };
    Some(KrausChannel::parse(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load() {
        assert_eq!(example_spec().atoms().len(), 4);
        assert_eq!(amplitude_damping().num_qubits(), 1);
        assert_eq!(dephasing().ops().len(), 2);
        assert_eq!(random_rotation().num_qubits(), 2);
        assert!(named_spec("nope").is_none());
        for name in KRAUS_NAMES {
            assert!(named_kraus(name).unwrap().is_ok());
        }
    }
}
