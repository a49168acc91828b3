//! Command-line surface. Filled in alongside the library modules.

pub fn run(_args: Vec<String>) -> i32 {
    eprintln!("not yet implemented");
    2
}
