//! Fixtures shared by the benchmarks.

use approachlab::corpus::{corpus_instance, CorpusParams};
use approachlab::{Instance, LinearProgram, Rational, Vector};

/// A corpus instance with default parameters.
pub fn corpus(name: &str) -> Instance {
    corpus_instance(name, &CorpusParams::default()).expect("corpus name")
}

/// A bounded feasible LP in `n` nonnegative variables with `m` packing rows.
/// Coefficients come from a fixed linear congruential sequence.
pub fn packing_lp(n: usize, m: usize) -> LinearProgram {
    let mut state = 12345u64;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 33) % 9 + 1) as i64
    };
    let mut lp = LinearProgram::new(n);
    lp.objective = Vector::from((0..n).map(|_| Rational::from(next())).collect::<Vec<_>>());
    for _ in 0..m {
        let row = Vector::from((0..n).map(|_| Rational::from(next())).collect::<Vec<_>>());
        lp.add_le(row, Rational::from(next() * 10));
    }
    for i in 0..n {
        lp.add_nonneg(i);
    }
    lp
}
