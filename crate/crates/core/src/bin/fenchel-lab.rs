use clap::Parser;
use fenchel_lab::cli::{main_with, Args};

fn main() {
    let code = match Args::try_parse() {
        Ok(args) => main_with(&args),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() { 2 } else { 0 }
        }
    };
    std::process::exit(code);
}
