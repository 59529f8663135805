//! Reference models shipped with the crate.

macro_rules! fixture {
    ($file:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/", $file))
    };
}

pub const M1: &str = fixture!("m1.json");
pub const M1_ANTIFERRO: &str = fixture!("m1_antiferro.json");
pub const M2: &str = fixture!("m2.json");
pub const M3: &str = fixture!("m3.json");
pub const M4: &str = fixture!("m4.json");
pub const FIG8: &str = fixture!("fig8.json");
pub const FIG9: &str = fixture!("fig9.json");

pub const ALL_MODELS: &[(&str, &str)] = &[
    ("m1", M1),
    ("m1_antiferro", M1_ANTIFERRO),
    ("m2", M2),
    ("m3", M3),
    ("m4", M4),
    ("fig8", FIG8),
    ("fig9", FIG9),
];

pub fn by_name(name: &str) -> Option<&'static str> {
    ALL_MODELS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Closed-form reference values for the bundled models.
pub const EXPECTED: &str = fixture!("expected.json");
