//! Constructions into FC-Datalog and the regex matching machinery.

pub mod automaton;
pub mod drx_automaton;
pub mod drx_compile;
pub mod drx_match;
pub mod pspace;

pub use automaton::{compile_2dfa, compile_2nfa};
pub use drx_automaton::{drx_check_deterministic, drx_position_automaton, DeterminismReport, PositionAutomaton};
pub use drx_compile::{compile_drx, compile_drx_dolla, compile_drx_dollaplus, CompileStats, DrxTarget};
pub use drx_match::{drx_match, drx_match_bruteforce, ConstraintMatcher, DrxMatcher, MemoryState};
pub use pspace::generate_pspace_instance;
