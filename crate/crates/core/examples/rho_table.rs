//! Prints the first certified rho for a handful of small parameter sets.

use std::time::Instant;

use msrcode::mds::{generate, DEFAULT_MAX_SUBSETS};
use msrcode::CodeParams;

fn main() -> msrcode::Result<()> {
    for (n, k, d) in [(4, 2, 3), (5, 2, 3), (5, 3, 4), (6, 3, 4), (6, 4, 5), (7, 4, 5), (9, 4, 6), (4, 2, 2)] {
        let p = CodeParams::derive(n, k, d)?;
        let start = Instant::now();
        let g = generate(&p, 8, 1, DEFAULT_MAX_SUBSETS)?;
        println!(
            "({n},{k},{d}) alpha={} width={} rho={} attempts={} subsets={} in {:?}",
            p.alpha,
            g.search.parity_check.field().spec().width_bits(),
            g.search.rho.value(),
            g.search.attempts,
            g.search.report.subsets_checked,
            start.elapsed()
        );
    }
    Ok(())
}
