use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let report = suffbench::cli::run(std::env::args_os());
    if let Some(text) = &report.help {
        if report.exit_code == 0 {
            print!("{text}");
        } else {
            eprint!("{text}");
        }
        return ExitCode::from(report.exit_code as u8);
    }
    let mut out = std::io::stdout().lock();
    // A closed pipe is not worth a panic.
    let _ = out.write_all(report.to_json().as_bytes());
    let _ = out.flush();
    ExitCode::from(report.exit_code as u8)
}
