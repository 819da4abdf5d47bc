fn main() { std::process::exit(certctx::cli::run()); }
