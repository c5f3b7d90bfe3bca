//! Scenario generation, strategy execution under temporary impact, the
//! optimal strategy, and Monte Carlo estimation of expected utility.

mod execute;
mod grid;
mod mc;
mod optimal;
mod paths;
mod strategy;
mod view;

pub use execute::{execute_rule, execute_strategy, terminal_wealth, StrategyTrace};
pub use grid::SimGrid;
pub use mc::{log_ratio, mc_expected_utility, mc_utilities, McConfig, McEstimate, McSamples};
pub use optimal::{
    optimal_rate, optimal_rate_with, projection, projection_with, signal_estimate, KernelOrientation,
    OptimalStrategy,
};
pub use paths::{simulate_on_grid, simulate_paths, PathBundle};
pub use strategy::{
    lift_baseline_strategy, perturb_rule, FnStrategy, Lifted, MertonChase, Perturbed, RateRule, Strategy,
    ZeroStrategy,
};
pub use view::{SignalView, ViewTransform};
