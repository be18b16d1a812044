// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Propagator engines and derived observables.

pub mod grid;

pub use grid::{
    neumann_greens, star_product_grid, unitary_grid, unitary_grid_ks, unitary_trace_grid, GridOptions, TwoTimeGrid,
    UnitaryGrid, UnitaryTrace,
};
pub mod observables;
pub(crate) mod pathsum;
pub mod series;

pub use series::{
    node_list, star_power_analytic, star_power_pathsum, unitary_analytic, unitary_analytic_trace, IndexTuple,
    SeriesOptions, SeriesTrace,
};
pub use observables::{
    effective_hamiltonian, effective_hamiltonian_ks, floquet_average, long_time_average_series, quasienergies, transition_probability, transition_probability_raw,
};
