//! Scenarios shipped with the binary.

use crate::{CliError, Scenario};

/// `(name, source)`, sorted by name.
const BUNDLED: [(&str, &str); 7] = [
    ("bump-seq-s1", include_str!("../scenarios/bump-seq-s1.toml")),
    ("bump-slab", include_str!("../scenarios/bump-slab.toml")),
    ("bump-torus-closed", include_str!("../scenarios/bump-torus-closed.toml")),
    ("cylinder", include_str!("../scenarios/cylinder.toml")),
    ("extension-roundtrip", include_str!("../scenarios/extension-roundtrip.toml")),
    ("flat-slab-s0", include_str!("../scenarios/flat-slab-s0.toml")),
    ("flat-torus", include_str!("../scenarios/flat-torus.toml")),
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

pub fn bundled_source(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Nearest bundled name, if any is reasonably close.
pub fn suggest(name: &str) -> Option<String> {
    BUNDLED
        .iter()
        .map(|(n, _)| (strsim::jaro_winkler(name, n), *n))
        .filter(|(s, _)| *s > 0.7)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, n)| n.to_string())
}

pub fn find_bundled(name: &str) -> Result<Scenario, CliError> {
    let src = bundled_source(name)
        .ok_or_else(|| CliError::UnknownScenario { name: name.to_string(), suggestion: suggest(name) })?;
    Scenario::from_toml(src)
}

/// All bundled scenarios, parsed.
pub fn bundled() -> Vec<Scenario> {
    BUNDLED.iter().map(|(n, s)| Scenario::from_toml(s).unwrap_or_else(|e| panic!("bundled scenario {n}: {e}"))).collect()
}
