//! Checks `q_x = |Z_x|² / 4^N` for every outcome of a brickwork lattice and
//! reports the largest residual.
//!
//! ```text
//! cargo run --release --example born_sweep -- 2 1
//! ```

use std::time::Instant;

use brickwork::partition::max_born_partition_residual;
use brickwork::{canonical_angle_field, Lattice};

fn main() -> brickwork::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<i64>().expect("dimensions are integers"));
    let m = args.next().unwrap_or(1);
    let n = args.next().unwrap_or(1);
    let lattice = Lattice::brickwork(m, n)?;
    let field = canonical_angle_field(&lattice)?;
    let start = Instant::now();
    let residual = max_born_partition_residual(&lattice, &field)?;
    println!(
        "{m}x{n} brickwork, {} sites: max residual {residual:.3e} in {:.2?}",
        lattice.num_sites(),
        start.elapsed()
    );
    Ok(())
}
