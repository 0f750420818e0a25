fn main() {
    // CLI wired up after the pipeline module lands.
}
