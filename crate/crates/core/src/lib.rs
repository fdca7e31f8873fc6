//! Size-change based binding-time analysis and offline partial evaluation
//! for pure logic programs.

pub mod bta;
pub mod cli;
pub mod closure;
pub mod lincons;
pub mod norm;
pub mod pe;
pub mod scg;
pub mod syntax;
