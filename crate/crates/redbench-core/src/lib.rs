// Deterministic redstone-circuit simulator plus the benchmark harness built
// on top of it: task files, temporal contract checking, reference device
// constructors, the failure-device corpus, the agent tool gateway, and the
// capacity-gap analytics.

pub mod analytics;
pub mod build;
pub mod contract;
pub mod corpus;
pub mod device;
pub mod engine;
pub mod gateway;
pub mod task;
pub(crate) mod yaml;
pub mod world;

pub use engine::{compute_wire_shape, recompute_power, PowerSnapshot};
pub use world::{Block, Direction, Pos, Region, World, WorldConfig};
