use clap::Parser;

use sct_pe::cli::{main_with, RunConfig};

fn main() {
    env_logger::init();
    let cfg = RunConfig::parse();
    // Deep answer terms are built and dropped recursively.
    let code = std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(move || main_with(&cfg))
        .expect("spawn main thread")
        .join()
        .unwrap_or(101);
    std::process::exit(code);
}
