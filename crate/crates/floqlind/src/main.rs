fn main() {
    std::process::exit(floqlind::cli::run() as i32);
}
