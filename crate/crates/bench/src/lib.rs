//! Fixtures shared by the criterion benches.

use crgen_core::protocol::AuxTests;
use crgen_core::{build_codebook, Codebook, CodebookParams, SourceParams, TestChannel};

/// Source, test channel and a codebook of `n1 x n2` codewords of length `n`.
pub fn desk_fixture(n: usize, n1: u64, n2: u64) -> (SourceParams, TestChannel, Codebook, AuxTests) {
    let source = SourceParams::standard(0.8).expect("valid source");
    let ch = TestChannel::new(0.5).expect("valid channel");
    let (i_ux, i_uy) = crgen_core::capacity::aux_mutual_informations(&source, &ch).expect("finite");
    let params = CodebookParams::with_sizes(n, 0.2, i_ux, i_uy, n1, n2).expect("valid sizes");
    let book = build_codebook(&params, &source, &ch, 0, crgen_core::codebook::DEFAULT_BUDGET).expect("within budget");
    let tests = AuxTests::new(&source, &ch, 0.2).expect("valid tests");
    (source, ch, book, tests)
}
