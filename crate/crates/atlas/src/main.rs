use clap::Parser;

fn main() {
    let cli = match atlas::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { atlas::EXIT_INVALID } else { atlas::EXIT_OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match atlas::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("atlas: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
