//! `mf` command-line tool. `MF_THREADS` sets the worker thread count.

fn main() {
    if let Some(n) = std::env::var("MF_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    std::process::exit(moyal::cli::run(std::env::args_os()));
}
