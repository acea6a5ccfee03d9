use std::io::Write;

fn main() {
    let args = std::env::args().collect();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = herzmorrey::cli::run_cli(args, &mut out, &mut std::io::stderr());
    let _ = out.flush();
    std::process::exit(code);
}
