fn main() {
    println!("{}", vopt_core::probe());
}
