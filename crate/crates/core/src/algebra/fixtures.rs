use super::FiniteAlgebra;

const FIXTURES: &[(&str, &str)] = &[
    ("lattice2", include_str!("../../fixtures/lattice2.json")),
    ("lattice_n5", include_str!("../../fixtures/lattice_n5.json")),
    ("lattice_2x2", include_str!("../../fixtures/lattice_2x2.json")),
    ("baker4", include_str!("../../fixtures/baker4.json")),
    ("z2", include_str!("../../fixtures/z2.json")),
    ("z2cube", include_str!("../../fixtures/z2cube.json")),
    ("boolean2", include_str!("../../fixtures/boolean2.json")),
];

/// Names of the bundled algebras, in a fixed order.
pub fn fixture_names() -> impl Iterator<Item = &'static str> {
    FIXTURES.iter().map(|(n, _)| *n)
}

/// A bundled algebra by bare name. `lattice_2x2sq` is accepted as an alias
/// of `lattice_2x2` (the square of `lattice2`).
pub fn fixture(name: &str) -> Option<FiniteAlgebra> {
    let name = if name == "lattice_2x2sq" {
        "lattice_2x2"
    } else {
        name
    };
    FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| FiniteAlgebra::from_json(text).expect("bundled fixture is valid"))
}
