//! Compares fill-in and factorization time of the available orderings on the
//! shifted system `I + λQ` of a square lattice.
//!
//! ```bash
//! cargo run --release --example ordering_fill -- 100
//! ```

use std::time::Instant;

use dominant_features::lattice::{build_regular_q, AnisotropyWeights, Lattice};
use dominant_features::sparse::{Ordering, SymbolicCholesky};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let side: usize = std::env::args().nth(1).map_or(Ok(100), |s| s.parse())?;
    let lat = Lattice::full(side, side, 1.0)?;
    let q = build_regular_q(&lat, AnisotropyWeights::isotropic())?;
    let a = q.scaled_plus_diagonal(30.0, &vec![1.0; q.dim()])?;
    println!("{side}×{side} lattice, nnz(A) = {}", a.nnz());
    for ordering in [Ordering::Natural, Ordering::BandwidthReducing, Ordering::NestedDissection] {
        let t0 = Instant::now();
        let sym = SymbolicCholesky::analyze(&a, ordering)?;
        let analyse = t0.elapsed();
        let reps = 10;
        let t1 = Instant::now();
        for _ in 0..reps {
            sym.factor(&a)?;
        }
        let numeric = t1.elapsed() / reps;
        println!(
            "{ordering:?}: nnz(T) = {:>8}, analyse {analyse:?}, numeric {numeric:?}",
            sym.factor_nnz()
        );
    }
    Ok(())
}
