fn main() {
    std::process::exit(semslam::cli::run());
}
