//! Structural checks of the linear dynamics: stability, coherent-coupling eigenmodes and the
//! closed-system (decay-free) quantum-mechanics-free subsystem.

mod coherent;
mod qmfs;
mod stability;

pub use coherent::{
    coherent_coupling_eigen, coupling_matrix, eigenvector_orthonormality_defect, first_order_eigenvectors,
    orthonormality_defect, two_mode_eigenfrequencies, two_mode_numeric, CoherentCoupling, CoherentEigen,
};
pub use qmfs::{
    interaction_hamiltonian_drift, interaction_hamiltonian_mode_drift, canonical_form, qmfs_commutator_blocks, qmfs_evolve,
    symplectic_check, symplectic_defect, to_canonical_order, QmfsEvolution, QmfsTrack, QmfsVariables,
    CANONICAL_ORDER,
};
pub use stability::{characteristic_coefficients, stability_eigenvalues, StabilityReport};
