use std::io;

fn main() {
    let code = std::thread::Builder::new()
        .stack_size(foc::cli::STACK_SIZE)
        .spawn(|| foc::cli::run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock()))
        .expect("spawn main thread")
        .join()
        .unwrap_or(101);
    std::process::exit(code);
}
