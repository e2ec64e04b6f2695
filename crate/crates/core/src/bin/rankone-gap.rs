fn main() {
    std::process::exit(rankone_gap::cli::main_entry());
}
