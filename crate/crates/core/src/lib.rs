pub mod density;
pub mod gk;
pub mod lattice;
pub mod ring;
pub mod suite;

pub use ring::{Elem, FElem, Ring, RingError, RingSpec};
