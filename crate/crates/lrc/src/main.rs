use std::process::exit;

fn main() {
    let code = lrc::cli::run(
        std::env::args_os(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    exit(code);
}
