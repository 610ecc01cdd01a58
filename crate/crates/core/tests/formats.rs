//! Byte-level checks against files written by an independent encoder
//! (Python `struct` + `hashlib`), kept under `tests/data`.

use std::io::Cursor;

use ironmask::ecc::{CodeParams, Codeword, Sign};
use ironmask::geometry::UnitVector;
use ironmask::protection::{
    encode_codeword, hash_codeword, protect, read_protected, write_protected, HashId, MatrixEncoding, ProtectedTemplate,
};
use ironmask::rotation::OrthogonalMatrix;
use ironmask::{seeded_rng, Error};
use nalgebra::DMatrix;

const CODEWORD_4_2: &[u8] = include_bytes!("data/codeword_4_2.bin");
const CONTAINER_F64: &[u8] = include_bytes!("data/container_4_2_f64.irmk");
const CONTAINER_F32: &[u8] = include_bytes!("data/container_4_2_f32.irmk");

fn digest(hex_str: &str) -> [u8; 32] {
    hex::decode(hex_str).unwrap().try_into().unwrap()
}

fn golden_codeword() -> Codeword {
    Codeword::new(4, vec![0, 3], vec![Sign::Plus, Sign::Minus]).unwrap()
}

fn golden_matrix() -> OrthogonalMatrix {
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        0.6, -0.8, 0.0, 0.0,
        0.8, 0.6, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, -1.0, 0.0,
    ]);
    OrthogonalMatrix::new(m).unwrap()
}

fn golden_template() -> ProtectedTemplate {
    let params = CodeParams::new(4, 2).unwrap();
    ProtectedTemplate::new(params, HashId::Sha256, hash_codeword(&golden_codeword()), golden_matrix()).unwrap()
}

#[test]
fn codeword_encoding_matches_golden_file() {
    assert_eq!(encode_codeword(&golden_codeword()), CODEWORD_4_2);
}

#[test]
fn single_entry_codeword_layout() {
    let c = Codeword::new(4, vec![2], vec![Sign::Plus]).unwrap();
    let bytes = encode_codeword(&c);
    assert_eq!(hex::encode(&bytes), "49524d4b4357303104000000010000000200000001");
    assert_eq!(bytes.len(), 21);
}

#[test]
fn sha256_matches_independent_implementation() {
    let single = Codeword::new(4, vec![2], vec![Sign::Plus]).unwrap();
    assert_eq!(hash_codeword(&single), digest("97062c9ffc985b42f2f16caf28afde2209fcef8a41055376229f29b98e77f359"));
    assert_eq!(
        hash_codeword(&golden_codeword()),
        digest("97324a8c1b9e191d44d7ba19404a95a826491bc24a28375d12e5845150e27c48")
    );
    let neg = Codeword::new(3, vec![2], vec![Sign::Minus]).unwrap();
    assert_eq!(hash_codeword(&neg), digest("23172e91689ad0ef0a4c7c3c833bc0faea4fbc1418d5104185fe5a547e6a03eb"));
}

#[test]
fn container_f64_matches_golden_file() {
    let pt = golden_template();
    assert_eq!(pt.to_bytes(MatrixEncoding::F64), CONTAINER_F64);
    let read = read_protected(&mut Cursor::new(CONTAINER_F64)).unwrap();
    assert_eq!(read, pt);
    let mut again = Vec::new();
    write_protected(&read, &mut again, MatrixEncoding::F64).unwrap();
    assert_eq!(again, CONTAINER_F64);
}

#[test]
fn container_f32_matches_golden_file() {
    let pt = golden_template();
    assert_eq!(pt.to_bytes(MatrixEncoding::F32), CONTAINER_F32);
    let read = read_protected(&mut Cursor::new(CONTAINER_F32)).unwrap();
    assert_eq!(read.digest(), pt.digest());
    assert_eq!(read.params(), pt.params());
    assert!(read.helper().residual() <= 1e-8);
    let diff = (read.helper().matrix() - pt.helper().matrix()).abs().max();
    assert!(diff <= 1e-7, "{diff}");
    assert_eq!(read.to_bytes(MatrixEncoding::F32), CONTAINER_F32);
}

#[test]
fn container_sizes() {
    let params = CodeParams::new(512, 16).unwrap();
    let mut rng = seeded_rng(1);
    let t = UnitVector::random(512, &mut rng).unwrap();
    let pt = protect(&t, params, &mut rng).unwrap();
    assert_eq!(pt.to_bytes(MatrixEncoding::F32).len(), 1_048_628);
    assert_eq!(pt.to_bytes(MatrixEncoding::F64).len(), 20 + 32 + 8 * 512 * 512);
}

#[test]
fn every_prefix_of_golden_container_is_rejected() {
    for cut in 0..CONTAINER_F64.len() {
        let err = read_protected(&mut Cursor::new(&CONTAINER_F64[..cut])).unwrap_err();
        assert!(matches!(err, Error::BadMagic | Error::CorruptMatrix(_) | Error::CorruptHeader(_)), "cut {cut}: {err}");
    }
}

#[test]
fn header_field_errors() {
    let mut bad = CONTAINER_F64.to_vec();
    bad[0] = b'X';
    assert!(matches!(read_protected(&mut Cursor::new(&bad)), Err(Error::BadMagic)));
    let mut bad = CONTAINER_F64.to_vec();
    bad[4] = 2;
    assert!(matches!(read_protected(&mut Cursor::new(&bad)), Err(Error::UnsupportedVersion(2))));
    let mut bad = CONTAINER_F64.to_vec();
    bad[16] = 7;
    assert!(matches!(read_protected(&mut Cursor::new(&bad)), Err(Error::UnsupportedHashId(7))));
    let mut bad = CONTAINER_F64.to_vec();
    // Top byte of entry (0, 0): 0.6 becomes 39321.6.
    bad[59] = 0x40;
    assert!(matches!(read_protected(&mut Cursor::new(&bad)), Err(Error::CorruptMatrix(_))));
}
