use clap::Parser;

fn main() {
    let cfg = tacfit::io::RunConfig::parse();
    std::process::exit(tacfit::io::run(&cfg));
}
