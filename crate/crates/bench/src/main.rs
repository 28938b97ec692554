fn main() {
    std::process::exit(dpsynth_bench::cli::main_with_args(std::env::args_os()));
}
