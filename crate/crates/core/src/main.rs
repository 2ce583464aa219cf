fn main() {
    std::process::exit(well_revival::cli::run(std::env::args_os()));
}
