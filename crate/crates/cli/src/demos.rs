//! Built-in fixtures.

pub const DEMOS: &[(&str, &str)] = &[
    ("qubit-born", include_str!("../scenarios/qubit_born.qs")),
    ("two-sector", include_str!("../scenarios/two_sector.qs")),
    ("mppc-fail", include_str!("../scenarios/mppc_fail.qs")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    DEMOS.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    DEMOS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Every scenario shipped with the crate, by file name.
pub const CORPUS: &[(&str, &str)] = &[
    ("qubit_born.qs", include_str!("../scenarios/qubit_born.qs")),
    ("two_sector.qs", include_str!("../scenarios/two_sector.qs")),
    ("mppc_fail.qs", include_str!("../scenarios/mppc_fail.qs")),
    ("qutrit_sweep.qs", include_str!("../scenarios/qutrit_sweep.qs")),
    ("equivalence.qs", include_str!("../scenarios/equivalence.qs")),
    ("instruments.qs", include_str!("../scenarios/instruments.qs")),
    ("algebras.qs", include_str!("../scenarios/algebras.qs")),
    ("pointer.qs", include_str!("../scenarios/pointer.qs")),
];
