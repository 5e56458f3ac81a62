//! Pickup-and-delivery TSP: instances, tours, neighbourhood operators,
//! exact search and a learned operator-selection policy.

pub mod enumerate;
pub mod exact;
pub mod instance;
pub mod learn;
pub mod operators;
pub mod par;
pub mod tour;
pub mod verify;

pub use instance::{Instance, NodeId, Point};
pub use operators::{Move, MoveError, OperatorKind};
pub use tour::{Position, Tour, TourError};
