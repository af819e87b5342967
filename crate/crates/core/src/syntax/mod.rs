//! Concrete text formats: programs, regexes, automaton and Turing-machine
//! JSON, and the canonical program printer.

pub mod drx;
pub mod expect;
pub mod json;
pub mod program;

pub use drx::parse_drx;
pub use expect::{parse_expectations, Expectations};
pub use json::{parse_automaton, parse_turing};
pub use program::{parse_program, print_atom, print_pattern, print_program, print_rule};
