use std::process::ExitCode;

fn main() -> ExitCode {
    let cfg = match pucell_cli::parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match pucell_cli::run(&cfg) {
        Ok(()) => ExitCode::from(pucell_cli::EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
