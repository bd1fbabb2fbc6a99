fn main() {
    println!("nqdlab");
}
