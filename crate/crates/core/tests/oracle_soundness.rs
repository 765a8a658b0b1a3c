mod common;

use flma::softfloat::Format;

#[test]
fn softfloat_binary32_fuzz() {
    common::softfloat_fuzz(Format::Binary32, 200_000, 11).unwrap();
}

#[test]
fn softfloat_binary64_fuzz() {
    common::softfloat_fuzz(Format::Binary64, 200_000, 12).unwrap();
}

#[test]
fn references_survive_doubled_precision() {
    common::reference_recheck(20_000, 13).unwrap();
}
