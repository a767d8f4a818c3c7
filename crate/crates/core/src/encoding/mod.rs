//! Problem Hamiltonians as qubit observables.

pub mod biprime;
pub mod fermion;
pub mod levels;

pub use biprime::{binary_variables, build_biprime, load_test_hamiltonian_15, BiprimeSpec};
pub use fermion::{jordan_wigner, parse_integrals, FermionOperator, Ladder};
pub use levels::{
    build_transmon, encode_level_operator, EncodingScheme, LevelEncoding, LevelOperator, TransmonSpec,
};
