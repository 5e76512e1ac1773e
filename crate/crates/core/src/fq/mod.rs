//! Finite fields `F_q` with `q <= 2^12`, Fourier analysis of distributions
//! on them, and exhaustive checks of the anti-concentration statements.

mod additive;
mod claims;
mod field;
mod fourier;

pub use additive::{
    cosine_inequality_check, is_subgroup, iterated_sumset, kneser_sweep, sumset, sym_set, AdditiveGroup, Cyclic,
    InequalityCheck, KneserSweep, FLOAT_SLACK,
};
pub use claims::{
    check_level_set_nesting, check_zeros_claim, distributions_with_denominator, full_rank_check, full_rank_report,
    full_rank_trial, lo_bound_check, lo_sweep_cell, spectrum_subgroup_check, subgroup_energy, symmetrized_balance,
    zeros_claim_range, FullRankReport, LoCellReport, LoCheck, NestingCheck, SpectrumOutcome, SymmetrizedBalance,
    ZEROS_MAX_ROWS,
};
pub use field::{rank, Elem, FieldTable, MAX_ORDER, MAX_SUBGROUP_DEGREE};
pub use fourier::{
    exact_dot_distribution, level_function, psi_level_set, roots_of_unity, DotDistribution, FqDistribution,
    FOURIER_SLACK,
};
