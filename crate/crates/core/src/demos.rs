//! Bundled demo systems (the descriptor files under `data/`).

use crate::error::{Error, Result};
use crate::nikishin::{MixedSystem, SystemDescriptor};

/// (name, (m_1, m_2), descriptor text).
pub const DEMOS: [(&str, (usize, usize), &str); 5] = [
    ("classical", (0, 0), include_str!("../data/classical.toml")),
    ("demo01", (0, 1), include_str!("../data/demo01.toml")),
    ("demo10", (1, 0), include_str!("../data/demo10.toml")),
    ("demo11", (1, 1), include_str!("../data/demo11.toml")),
    ("demo02", (0, 2), include_str!("../data/demo02.toml")),
];

pub fn descriptor(name: &str) -> Result<SystemDescriptor> {
    let (_, _, text) = DEMOS
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| Error::InputError(format!("unknown demo '{name}'")))?;
    SystemDescriptor::from_toml(text)
}

pub fn load(name: &str) -> Result<MixedSystem> {
    descriptor(name)?.build()
}

/// Demo with the given (m_1, m_2).
pub fn by_shape(m1: usize, m2: usize) -> Result<MixedSystem> {
    let (name, _, _) = DEMOS
        .iter()
        .find(|(_, s, _)| *s == (m1, m2))
        .ok_or_else(|| Error::InputError(format!("no demo with shape ({m1}, {m2})")))?;
    load(name)
}
