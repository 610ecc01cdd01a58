//! Enrollment and verification of protected templates, plus the canonical
//! codeword encoding and the `IRMK` container.
//!
//! Container layout, all integers little-endian:
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0 | 4 | magic `IRMK` |
//! | 4 | 2 | version (1) |
//! | 6 | 2 | flags; bit 0 set = matrix entries are `f32` |
//! | 8 | 4 | `n` |
//! | 12 | 4 | `α` |
//! | 16 | 1 | hash id (1 = SHA-256) |
//! | 17 | 3 | reserved, zero |
//! | 20 | 32 | digest |
//! | 52 | `n²·w` | helper matrix, row-major |

use std::io::{Read, Write};

use nalgebra::DMatrix;
use rand::Rng;
use sha2::{Digest, Sha256};
use subtle::ConstantTimeEq;

use crate::ecc::{decode, decode_list, usample, CodeParams, Codeword, Sign};
use crate::error::{Error, Result};
use crate::geometry::{check_same_dim, UnitVector};
use crate::rotation::{apply, hrmg, orthogonality_residual, OrthogonalMatrix, ORTHO_TOLERANCE};

pub const CODEWORD_MAGIC: &[u8; 8] = b"IRMKCW01";
pub const CONTAINER_MAGIC: &[u8; 4] = b"IRMK";
pub const CONTAINER_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 20;
pub const DIGEST_LEN: usize = 32;
const FLAG_F32: u16 = 1;

/// Orthogonality tolerance when reading a matrix stored as `f32`.
pub const F32_TOLERANCE: f64 = 1e-5;

pub type Digest32 = [u8; DIGEST_LEN];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum HashId {
    Sha256 = 1,
}

impl HashId {
    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            1 => Ok(HashId::Sha256),
            other => Err(Error::UnsupportedHashId(other)),
        }
    }

    pub fn output_len(self) -> usize {
        match self {
            HashId::Sha256 => 32,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MatrixEncoding {
    #[default]
    F64,
    F32,
}

impl MatrixEncoding {
    fn width(self) -> usize {
        match self {
            MatrixEncoding::F64 => 8,
            MatrixEncoding::F32 => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

impl Decision {
    pub fn is_accept(self) -> bool {
        self == Decision::Accept
    }
}

/// The stored pair `(H(c), P)`. The codeword itself is never retained.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtectedTemplate {
    params: CodeParams,
    hash_id: HashId,
    digest: Digest32,
    helper: OrthogonalMatrix,
}

impl ProtectedTemplate {
    pub fn new(params: CodeParams, hash_id: HashId, digest: Digest32, helper: OrthogonalMatrix) -> Result<Self> {
        check_same_dim(params.dim(), helper.dim())?;
        Ok(ProtectedTemplate { params, hash_id, digest, helper })
    }

    pub fn params(&self) -> CodeParams {
        self.params
    }

    pub fn hash_id(&self) -> HashId {
        self.hash_id
    }

    pub fn digest(&self) -> &Digest32 {
        &self.digest
    }

    pub fn helper(&self) -> &OrthogonalMatrix {
        &self.helper
    }

    pub fn to_bytes(&self, encoding: MatrixEncoding) -> Vec<u8> {
        let n = self.params.dim();
        let mut out = Vec::with_capacity(HEADER_LEN + DIGEST_LEN + n * n * encoding.width());
        write_protected(self, &mut out, encoding).expect("writing to a Vec cannot fail");
        out
    }

    /// Parses a complete container; trailing bytes are rejected.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cursor = bytes;
        let pt = read_protected(&mut cursor)?;
        if !cursor.is_empty() {
            return Err(Error::CorruptMatrix(format!("{} trailing bytes", cursor.len())));
        }
        Ok(pt)
    }
}

/// `IRMKCW01 ‖ n ‖ α ‖ (index ‖ sign)*` with `u32` LE integers and sign
/// bytes `0x01` / `0xFF`.
pub fn encode_codeword(c: &Codeword) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 5 * c.weight());
    out.extend_from_slice(CODEWORD_MAGIC);
    out.extend_from_slice(&(c.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(c.weight() as u32).to_le_bytes());
    for (j, s) in c.entries() {
        out.extend_from_slice(&(j as u32).to_le_bytes());
        out.push(match s {
            Sign::Plus => 0x01,
            Sign::Minus => 0xFF,
        });
    }
    out
}

pub fn hash_codeword(c: &Codeword) -> Digest32 {
    Sha256::digest(encode_codeword(c)).into()
}

pub fn digests_equal(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && bool::from(a.ct_eq(b))
}

/// Enrolls `t`: draws `c`, builds `P` with `P·t = c`, and keeps `H(c)`.
pub fn protect<R: Rng + ?Sized>(t: &UnitVector, params: CodeParams, rng: &mut R) -> Result<ProtectedTemplate> {
    Ok(protect_revealing(t, params, rng)?.0)
}

/// [`protect`] that also hands back the secret codeword, for attack
/// ground truth and validation harnesses.
pub fn protect_revealing<R: Rng + ?Sized>(
    t: &UnitVector,
    params: CodeParams,
    rng: &mut R,
) -> Result<(ProtectedTemplate, Codeword)> {
    check_same_dim(params.dim(), t.dim())?;
    let c = usample(params, rng);
    let helper = hrmg(t, &c.dense(), rng)?;
    let digest = hash_codeword(&c);
    Ok((ProtectedTemplate { params, hash_id: HashId::Sha256, digest, helper }, c))
}

/// Accepts iff `decode(P·probe)` hashes to the stored digest.
pub fn verify(pt: &ProtectedTemplate, probe: &UnitVector) -> Result<Decision> {
    let moved = apply(&pt.helper, probe)?;
    let c = decode(&moved, pt.params)?;
    Ok(decision(digests_equal(&hash_codeword(&c), &pt.digest)))
}

/// Relaxed verification: accepts if any of the `count` codewords closest to
/// `P·probe` hashes to the stored digest.
pub fn verify_list(pt: &ProtectedTemplate, probe: &UnitVector, count: usize) -> Result<Decision> {
    let moved = apply(&pt.helper, probe)?;
    let mut hit = false;
    for c in decode_list(&moved, pt.params, count)? {
        hit |= digests_equal(&hash_codeword(&c), &pt.digest);
    }
    Ok(decision(hit))
}

fn decision(accept: bool) -> Decision {
    if accept {
        Decision::Accept
    } else {
        Decision::Reject
    }
}

pub fn write_protected<W: Write>(pt: &ProtectedTemplate, w: &mut W, encoding: MatrixEncoding) -> Result<()> {
    let flags = match encoding {
        MatrixEncoding::F64 => 0u16,
        MatrixEncoding::F32 => FLAG_F32,
    };
    let mut header = Vec::with_capacity(HEADER_LEN + DIGEST_LEN);
    header.extend_from_slice(CONTAINER_MAGIC);
    header.extend_from_slice(&CONTAINER_VERSION.to_le_bytes());
    header.extend_from_slice(&flags.to_le_bytes());
    header.extend_from_slice(&(pt.params.dim() as u32).to_le_bytes());
    header.extend_from_slice(&(pt.params.weight() as u32).to_le_bytes());
    header.push(pt.hash_id as u8);
    header.extend_from_slice(&[0, 0, 0]);
    header.extend_from_slice(&pt.digest);
    w.write_all(&header)?;
    let mut body = Vec::with_capacity(pt.params.dim().pow(2) * encoding.width());
    for x in pt.helper.row_major() {
        match encoding {
            MatrixEncoding::F64 => body.extend_from_slice(&x.to_le_bytes()),
            MatrixEncoding::F32 => body.extend_from_slice(&(x as f32).to_le_bytes()),
        }
    }
    w.write_all(&body)?;
    Ok(())
}

/// Reads one container. A truncated stream yields [`Error::BadMagic`] (before
/// the magic is complete) or [`Error::CorruptMatrix`], never a partial value.
pub fn read_protected<R: Read>(r: &mut R) -> Result<ProtectedTemplate> {
    let mut magic = [0u8; 4];
    if read_full(r, &mut magic)? < magic.len() || &magic != CONTAINER_MAGIC {
        return Err(Error::BadMagic);
    }
    let mut rest = [0u8; HEADER_LEN - 4 + DIGEST_LEN];
    if read_full(r, &mut rest)? < rest.len() {
        return Err(Error::CorruptMatrix("truncated header".into()));
    }
    let u16_at = |i: usize| u16::from_le_bytes([rest[i], rest[i + 1]]);
    let u32_at = |i: usize| u32::from_le_bytes([rest[i], rest[i + 1], rest[i + 2], rest[i + 3]]);
    let version = u16_at(0);
    if version != CONTAINER_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let flags = u16_at(2);
    if flags & !FLAG_F32 != 0 {
        return Err(Error::CorruptHeader(format!("unknown flags {flags:#06x}")));
    }
    let encoding = if flags & FLAG_F32 != 0 { MatrixEncoding::F32 } else { MatrixEncoding::F64 };
    let (n, alpha) = (u32_at(4) as usize, u32_at(8) as usize);
    let params = CodeParams::new(n, alpha).map_err(|e| Error::CorruptHeader(e.to_string()))?;
    let hash_id = HashId::from_byte(rest[12])?;
    if rest[13..16] != [0, 0, 0] {
        return Err(Error::CorruptHeader("reserved bytes are not zero".into()));
    }
    let mut digest = [0u8; DIGEST_LEN];
    digest.copy_from_slice(&rest[16..16 + DIGEST_LEN]);
    debug_assert_eq!(hash_id.output_len(), DIGEST_LEN);

    let width = encoding.width();
    let expected = (n as u64) * (n as u64) * width as u64;
    let mut body = Vec::new();
    r.take(expected).read_to_end(&mut body)?;
    if (body.len() as u64) < expected {
        return Err(Error::CorruptMatrix(format!("matrix truncated at {} of {expected} bytes", body.len())));
    }
    let entries: Vec<f64> = match encoding {
        MatrixEncoding::F64 => body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect(),
        MatrixEncoding::F32 => {
            body.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64).collect()
        }
    };
    if entries.iter().any(|x| !x.is_finite()) {
        return Err(Error::CorruptMatrix("non-finite entry".into()));
    }
    let m = DMatrix::from_row_slice(n, n, &entries);
    let tolerance = match encoding {
        MatrixEncoding::F64 => ORTHO_TOLERANCE,
        MatrixEncoding::F32 => F32_TOLERANCE,
    };
    let residual = orthogonality_residual(&m);
    if !(residual <= tolerance) {
        return Err(Error::CorruptMatrix(format!(
            "orthogonality residual {residual:e} exceeds {tolerance:e}"
        )));
    }
    let helper = match encoding {
        MatrixEncoding::F64 => OrthogonalMatrix::from_trusted(m),
        MatrixEncoding::F32 => OrthogonalMatrix::from_trusted(m).refine(),
    };
    Ok(ProtectedTemplate { params, hash_id, digest, helper })
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(k) => filled += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::*;
    use crate::ecc::enumerate;
    use crate::geometry::normalize;

    fn params(n: usize, a: usize) -> CodeParams {
        CodeParams::new(n, a).unwrap()
    }

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    #[test]
    fn codeword_encoding_layout() {
        let c: Codeword = "4 1 2:+".parse().unwrap();
        assert_eq!(hex::encode(encode_codeword(&c)), "49524d4b4357303104000000010000000200000001");
        let c: Codeword = "300 2 7:- 299:+".parse().unwrap();
        let bytes = encode_codeword(&c);
        assert_eq!(bytes.len(), 16 + 10);
        assert_eq!(&bytes[16..21], &[7, 0, 0, 0, 0xFF]);
        assert_eq!(&bytes[21..26], &[0x2B, 0x01, 0, 0, 0x01]);
    }

    #[test]
    fn encoding_is_injective_and_decode_stable() {
        let mut seen = HashSet::new();
        let mut digests = HashSet::new();
        for c in enumerate(params(5, 2)) {
            let bytes = encode_codeword(&c);
            assert_eq!(encode_codeword(&decode(&c.dense(), c.params()).unwrap()), bytes);
            assert!(seen.insert(bytes));
            assert!(digests.insert(hash_codeword(&c)));
        }
        assert_eq!(digests.len(), 40);
        for c in enumerate(params(5, 3)) {
            assert!(seen.insert(encode_codeword(&c)));
        }
    }

    #[test]
    fn digest_comparison() {
        assert!(digests_equal(b"abc", b"abc"));
        assert!(!digests_equal(b"abc", b"abd"));
        assert!(!digests_equal(b"abc", b"ab"));
    }

    #[test]
    fn protect_is_reproducible_and_maps_t_to_c() {
        let p = params(4, 2);
        let t = normalize(&[0.1, -0.7, 0.2, 0.4]).unwrap();
        let a = protect(&t, p, &mut rng(5)).unwrap();
        let b = protect(&t, p, &mut rng(5)).unwrap();
        assert_eq!(a.to_bytes(MatrixEncoding::F64), b.to_bytes(MatrixEncoding::F64));
        let c = usample(p, &mut rng(5));
        assert_eq!(a.digest(), &hash_codeword(&c));
        let pt_t = a.helper().mul_vec(&t).unwrap();
        let dense = c.to_dense();
        assert!(pt_t.iter().zip(&dense).all(|(x, y)| (x - y).abs() <= 1e-8));
    }

    #[test]
    fn zero_noise_round_trip_accepts() {
        let mut r = rng(6);
        for &(n, a) in &[(4, 2), (32, 5), (128, 16)] {
            let t = UnitVector::random(n, &mut r).unwrap();
            let pt = protect(&t, params(n, a), &mut r).unwrap();
            assert_eq!(verify(&pt, &t).unwrap(), Decision::Accept);
            assert_eq!(verify_list(&pt, &t, 3).unwrap(), Decision::Accept);
            let other = UnitVector::random(n, &mut r).unwrap();
            if n >= 32 {
                assert_eq!(verify(&pt, &other).unwrap(), Decision::Reject);
            }
        }
    }

    #[test]
    fn verify_rejects_wrong_dimension() {
        let t = normalize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let pt = protect(&t, params(4, 2), &mut rng(1)).unwrap();
        assert!(matches!(verify(&pt, &normalize(&[1.0, 2.0]).unwrap()), Err(Error::DimMismatch { .. })));
        assert!(matches!(
            protect(&t, params(5, 2), &mut rng(1)),
            Err(Error::DimMismatch { expected: 5, found: 4 })
        ));
    }

    #[test]
    fn list_verification_widens_acceptance() {
        // A probe decoding to a neighbour of the enrolled codeword is rejected
        // by plain verification but caught by a long enough list: 96 codewords
        // tie with the enrolled one at inner product 3/4.
        let p = params(16, 4);
        let mut r = rng(7);
        let t = UnitVector::random(16, &mut r).unwrap();
        let (pt, c) = protect_revealing(&t, p, &mut r).unwrap();
        let mut shifted = c.to_dense();
        let j = c.support()[0];
        let free = (0..16).find(|i| !c.support().contains(i)).unwrap();
        shifted[j] = 0.0;
        shifted[free] = 0.5;
        let target = normalize(&shifted).unwrap();
        let probe = apply(&pt.helper().transpose(), &target).unwrap();
        assert_eq!(verify(&pt, &probe).unwrap(), Decision::Reject);
        assert_eq!(verify_list(&pt, &probe, 100).unwrap(), Decision::Accept);
    }

    #[test]
    fn container_round_trip_f64_is_exact() {
        let t = UnitVector::random(24, &mut rng(8)).unwrap();
        let pt = protect(&t, params(24, 6), &mut rng(9)).unwrap();
        let bytes = pt.to_bytes(MatrixEncoding::F64);
        assert_eq!(bytes.len(), 20 + 32 + 8 * 24 * 24);
        let back = ProtectedTemplate::from_bytes(&bytes).unwrap();
        assert_eq!(back, pt);
        assert_eq!(back.to_bytes(MatrixEncoding::F64), bytes);
    }

    #[test]
    fn container_round_trip_f32() {
        let t = UnitVector::random(64, &mut rng(10)).unwrap();
        let pt = protect(&t, params(64, 8), &mut rng(11)).unwrap();
        let bytes = pt.to_bytes(MatrixEncoding::F32);
        assert_eq!(bytes.len(), 20 + 32 + 4 * 64 * 64);
        assert_eq!(u16::from_le_bytes([bytes[6], bytes[7]]), 1);
        let back = ProtectedTemplate::from_bytes(&bytes).unwrap();
        assert_eq!(back.digest(), pt.digest());
        assert!(back.helper().residual() <= 1e-8);
        assert!((back.helper().matrix() - pt.helper().matrix()).amax() < 1e-6);
        assert_eq!(verify(&back, &t).unwrap(), Decision::Accept);
    }

    #[test]
    fn container_contains_only_digest_and_matrix() {
        let t = UnitVector::random(16, &mut rng(12)).unwrap();
        let (pt, c) = protect_revealing(&t, params(16, 4), &mut rng(13)).unwrap();
        let bytes = pt.to_bytes(MatrixEncoding::F64);
        let preimage = encode_codeword(&c);
        assert!(!bytes.windows(CODEWORD_MAGIC.len()).any(|w| w == CODEWORD_MAGIC));
        assert!(!bytes.windows(preimage.len()).any(|w| w == preimage.as_slice()));
        assert_eq!(&bytes[20..52], pt.digest());
        let rebuilt: Vec<u8> = pt.helper().row_major().flat_map(f64::to_le_bytes).collect();
        assert_eq!(&bytes[52..], rebuilt.as_slice());
    }

    #[test]
    fn container_rejects_malformed_input() {
        let t = UnitVector::random(8, &mut rng(14)).unwrap();
        let pt = protect(&t, params(8, 2), &mut rng(15)).unwrap();
        let good = pt.to_bytes(MatrixEncoding::F64);

        for cut in [0, 2, 3] {
            assert!(matches!(ProtectedTemplate::from_bytes(&good[..cut]), Err(Error::BadMagic)));
        }
        for cut in [4, 19, 51, 52, good.len() - 1] {
            assert!(matches!(ProtectedTemplate::from_bytes(&good[..cut]), Err(Error::CorruptMatrix(_))), "cut={cut}");
        }
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(ProtectedTemplate::from_bytes(&bad), Err(Error::BadMagic)));
        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(ProtectedTemplate::from_bytes(&bad), Err(Error::UnsupportedVersion(2))));
        let mut bad = good.clone();
        bad[16] = 7;
        assert!(matches!(ProtectedTemplate::from_bytes(&bad), Err(Error::UnsupportedHashId(7))));
        let mut bad = good.clone();
        bad[18] = 1;
        assert!(matches!(ProtectedTemplate::from_bytes(&bad), Err(Error::CorruptHeader(_))));
        let mut bad = good.clone();
        bad[52 + 8 + 7] ^= 0x40;
        assert!(matches!(ProtectedTemplate::from_bytes(&bad), Err(Error::CorruptMatrix(_))));
        let mut bad = good.clone();
        bad.push(0);
        assert!(matches!(ProtectedTemplate::from_bytes(&bad), Err(Error::CorruptMatrix(_))));
    }
}
