//! `LEVEL code message` lines on stderr.

use std::fmt::Display;

pub fn info(code: &str, message: impl Display) {
    eprintln!("INFO {code} {message}");
}

pub fn warn(code: &str, message: impl Display) {
    eprintln!("WARN {code} {message}");
}

pub fn error(code: &str, message: impl Display) {
    eprintln!("ERROR {code} {message}");
}
