//! Certificates and hierarchies for copositivity of symmetric tensors.

pub mod combinatorics;
pub mod error;
pub mod examples;
pub mod grid;
pub mod io;
pub mod limits;
pub mod linalg;
pub mod oracle;
pub mod partition;
pub mod polycone;
pub mod scalar;
pub mod screen;
pub mod soscone;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{FloatTensor, RationalTensor, SymTensor, SymTensorBuilder};
