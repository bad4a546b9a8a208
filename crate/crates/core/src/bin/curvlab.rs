fn main() {
    std::process::exit(curvlab::runner::run(std::env::args_os()));
}
