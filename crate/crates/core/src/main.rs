fn main() { semimatch::cli::main_entry(); }
