use std::io;

fn main() {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = leanml::cli::run(std::env::args_os(), &mut stdin.lock(), &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}
