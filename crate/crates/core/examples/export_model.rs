//! Prints the built-in `vgg-small` model as pretty JSON.
fn main() {
    let model = hdap::model_space::ModelSpec::vgg_small();
    println!("{}", serde_json::to_string_pretty(&model).expect("model serializes"));
}
