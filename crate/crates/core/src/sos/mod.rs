//! Semidefinite programs for truncated quadratic module membership.

mod generators;
mod program;

pub use generators::{Generator, GeneratorSet, GeneratorTag};
pub use program::{
    build_archimedean_check, build_coercivity_check, build_hierarchy_step, build_membership_program,
    reconstruct_identity, BuildError, Direction, FreeBlock, MembershipProgram, SosBlock,
};
