//! Command-line entry point.

pub fn main_entry() {
    std::process::exit(0);
}
