//! FC-Datalog: Datalog whose universe is the set of factors of an input
//! word, with fragment analysis, a family of evaluators and compilers from
//! regular expressions with back-references, multi-head automata and
//! space-bounded Turing machines.

pub mod analysis;
pub mod compilers;
pub mod drx;
pub mod error;
pub mod eval;
pub mod machines;
pub mod matching;
pub mod program;
pub mod syntax;
pub mod word;

pub use analysis::{classify, FragmentFlags, FragmentReport, Tier};
pub use drx::DrxAst;
pub use error::{Error, Result, SourceSpan};
pub use program::{Program, Rule};
pub use syntax::{parse_drx, parse_program, print_program};
pub use word::{Alphabet, FactorId, FactorTable};
