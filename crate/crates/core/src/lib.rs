pub mod bethe_engine;
pub mod chain_rep;
pub mod error;
pub mod residual;
pub mod rmatrices;
pub mod scalar_field;
pub mod tensor_alg;
pub mod verify_harness;
