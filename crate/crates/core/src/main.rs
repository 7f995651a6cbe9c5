fn main() {
    let threads = std::env::var(hublab::cli::THREADS_ENV).ok();
    std::process::exit(hublab::cli::run(std::env::args_os(), threads.as_deref()));
}
