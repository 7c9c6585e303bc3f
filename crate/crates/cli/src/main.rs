use std::io::IsTerminal;
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let color = stdout.is_terminal();
    let code = orthobox_cli::run_with(std::env::args_os(), &mut stdout.lock(), &mut std::io::stderr(), color);
    ExitCode::from(code as u8)
}
