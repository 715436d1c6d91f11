fn main() {
    talkgraph::cli::main()
}
