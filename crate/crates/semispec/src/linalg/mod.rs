pub mod arnoldi;
pub mod banded;
pub mod dense;
pub mod expm;
