//! Yankee Swap: fair allocation of indivisible goods to agents with matroid
//! rank (binary submodular) valuations.
//!
//! The solver computes a prioritized Lorenz dominating allocation by letting
//! the least-utility, highest-priority agent repeatedly claim one unit of
//! value through a transfer path in the exchange graph over goods. Such
//! allocations are simultaneously leximin, EFX, half-maximin-share, and
//! maximize both utilitarian and Nash welfare; the [`fairness`] module
//! verifies each property against exhaustive ground truth on small
//! instances, and [`bench`] measures solves against the `n + m` iteration
//! bound and the `m²(n + τ)(m + n)` cost model.
//!
//! Start with [`solver::yankee_swap`]:
//!
//! ```
//! use matroidswap::{Instance, ValuationOracle};
//!
//! // Two agents who value any set of the three goods at its size.
//! let inst = Instance::simple(3, vec![ValuationOracle::uniform(3), ValuationOracle::uniform(3)]);
//! let (alloc, trace) = matroidswap::solver::yankee_swap(&inst).unwrap();
//! assert_eq!(matroidswap::allocation::utility_vector(&alloc, &inst).unwrap(), vec![2, 1]);
//! assert!(trace.total_iterations() <= 3 + 2);
//! ```
//!
//! The `examples/` directory holds one runnable walkthrough per capability;
//! the `matroidswap` binary exposes the same functionality as `solve`,
//! `verify`, `oracle`, `bench`, `rpe` and `check-oracle` subcommands over
//! JSON instance files.

pub mod allocation;
pub mod bench;
pub mod cli;
pub mod enumeration;
mod error;
pub mod exchange;
pub mod fairness;
pub mod format;
pub mod goods;
pub mod instance;
pub mod order;
pub mod solver;
pub mod valuation;

pub use allocation::Allocation;
pub use error::{Error, Result};
pub use goods::{Agent, Good, GoodSet};
pub use instance::Instance;
pub use order::{AugmentedUtility, LorenzOrder, NswValue, SortedUtilityVector};
pub use valuation::ValuationOracle;
