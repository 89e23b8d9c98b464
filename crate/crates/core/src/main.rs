fn main() {
    let seed = std::env::var("GEODEC_SEED").ok();
    std::process::exit(geodec::cli::main_with_args(std::env::args_os(), seed.as_deref()));
}
