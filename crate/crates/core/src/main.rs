fn main() {
    std::process::exit(levywh::run_cli());
}
