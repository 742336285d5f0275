//! Command-line interface for the moment-problem solvers.

fn main() {
    std::process::exit(momentcurve::cli_main());
}
