use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let (code, out) = dynobs_cli::run(&argv);
    print!("{out}");
    ExitCode::from(code as u8)
}
