//! Lexing and parsing for every concrete syntax in the toolchain.

mod lexer;
mod parser;

pub use parser::{
    parse_core_script, parse_query, parse_query_with, parse_schema, parse_source_script,
    parse_type, parse_value, ParseOptions, VarKind,
};
