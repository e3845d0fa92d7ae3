use clap::Parser;

fn main() {
    let cli = sqg_lab::cli::Cli::parse();
    match sqg_lab::cli::execute(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
