//! Dense matrix substrate and the on-disk tensor format.

mod io;
mod matrix;
mod ops;

pub use io::{decode, encode, read_tensor, read_tensor_as, write_tensor, AnyTensor, FIXED_HEADER_LEN, MAGIC, VERSION};
pub use matrix::{RealMatrix, Tensor};
pub use ops::{matmul, matmul_transposed, softmax_in_place, softmax_rows};

pub(crate) use ops::{axpy, dot};
