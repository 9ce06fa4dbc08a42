//! Invariants, radius-of-analyticity estimates and bounds, and a priori
//! bound checks evaluated on computed trajectories.

pub mod balance;
pub mod invariants;
pub mod ledger;
pub mod npe;
pub mod radius;

pub use balance::{gevrey_balance_residual, gevrey_balance_residual_with_rate, gevrey_energy, gevrey_energy_rate};
pub use invariants::{dissipation_rate, invariant_report, InvariantReport, InvariantTracker, NormSet};
pub use ledger::{gronwall_ledger, GronwallLedger, GronwallReport, LedgerRow, NpdLedger, NpeLedger};
pub use npe::{
    npe_gevrey_energy_sqrt, npe_radius_bound, NpeBudgetRow, NpeRadiusBudget, NpeRadiusParams, NpeSample,
    NpeTracker,
};
pub use radius::{
    npd_radius_bound, radius_estimate, radius_estimate_with_floor, radius_from_amplitudes, radius_record,
    shell_spectrum, shell_spectrum_of, species_gevrey_sum, state_radius_estimate, RadiusFit, RadiusRecord,
    ShellStat, T0Calibrator, DEFAULT_NOISE_FLOOR, MIN_SHELLS,
};
