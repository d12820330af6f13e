pub mod arith;
pub mod error;
pub mod exec;
pub mod groups;
pub mod linalg;
pub mod regconst;
pub mod dlog;
pub mod quadfield;
pub mod cft;
pub mod legendre;
pub mod tamagawa;
pub mod certify;
