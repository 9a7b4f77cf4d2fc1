fn main() {
    let args = std::env::args_os().map(|a| a.to_string_lossy().into_owned());
    std::process::exit(autores_cli::main_with_args(args));
}
