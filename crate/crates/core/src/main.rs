use std::io::Write;

fn main() {
    let (code, text) = tsirelson::cli::run(std::env::args_os());
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
    std::process::exit(code);
}
