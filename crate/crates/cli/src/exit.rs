//! Process exit codes. Each error path has its own code.

pub const OK: i32 = 0;
/// A verification ran to completion and found a failure.
pub const VERIFICATION_FAILED: i32 = 1;
pub const USAGE: i32 = 2;
pub const IO: i32 = 3;
/// Malformed JSON, including an empty file.
pub const PARSE: i32 = 4;
/// Well-formed JSON that does not match the instance schema.
pub const SCHEMA: i32 = 5;
/// Schema-valid instance whose module, derivation or field data is inconsistent.
pub const INVARIANT: i32 = 6;
/// A cap or budget was hit before the answer was known.
pub const INCONCLUSIVE: i32 = 7;
/// The request is outside what the command supports (e.g. an infinite module).
pub const REFUSED: i32 = 8;

pub const HELP: &str = "\
Exit codes:
  0  success
  1  verification failed (report written)
  2  usage error
  3  I/O error
  4  parse error (malformed or empty JSON)
  5  schema error
  6  invariant violation in the instance
  7  cap or budget exhausted, result inconclusive
  8  request refused (unsupported input, e.g. infinite module)";
