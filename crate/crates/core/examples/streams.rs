//! Reproducible, independent random streams keyed by (seed, id, replication).

use rand::Rng;
use twostage::seeding::derive_stream;

fn main() {
    let draw = |id: &str, rep: u64| -> Vec<f64> {
        let mut rng = derive_stream(42, id, rep);
        (0..3).map(|_| rng.random()).collect()
    };
    println!("rate/0    {:?}", draw("rate", 0));
    println!("rate/0    {:?}  (same key, same draws)", draw("rate", 0));
    println!("rate/1    {:?}", draw("rate", 1));
    println!("allocate/0 {:?}", draw("allocate", 0));
}
