//! Channel coding for the protected downlink channels: CRC attachment,
//! tail-biting convolutional coding with soft-decision decoding, sub-block
//! interleaving with circular-buffer rate matching, and the fixed
//! control-format-indicator codebook.

use crate::error::{Result, SimError};

/// Generator polynomials of the rate-1/3, constraint-length-7 code.
/// Bit 6 taps the current input, bit 0 the oldest memory element.
const GENERATORS: [u8; 3] = [0o133, 0o171, 0o165];

/// Column read order of the sub-block interleaver.
const COLUMN_PERMUTATION: [usize; 32] = [
    1, 17, 9, 25, 5, 21, 13, 29, 3, 19, 11, 27, 7, 23, 15, 31, 0, 16, 8, 24, 4, 20, 12, 28, 2,
    18, 10, 26, 6, 22, 14, 30,
];

/// CRC-16 with polynomial 0x1021 and zero initial state; returns the 16
/// parity bits most-significant first.
pub fn crc16(bits: &[u8]) -> [u8; 16] {
    let mut reg: u16 = 0;
    for &b in bits {
        let feedback = ((reg >> 15) as u8 ^ b) & 1;
        reg <<= 1;
        if feedback == 1 {
            reg ^= 0x1021;
        }
    }
    let mut out = [0u8; 16];
    for (i, bit) in out.iter_mut().enumerate() {
        *bit = ((reg >> (15 - i)) & 1) as u8;
    }
    out
}

/// Appends CRC parity to a payload, XOR-masking the parity bits with
/// `mask` (an identifier scrambling; zero for broadcast).
pub fn append_crc16(payload: &[u8], mask: u16) -> Vec<u8> {
    let parity = crc16(payload);
    let mut out = payload.to_vec();
    for (i, &p) in parity.iter().enumerate() {
        out.push(p ^ ((mask >> (15 - i)) & 1) as u8);
    }
    out
}

/// Verifies the masked CRC of a payload+parity block.
pub fn check_crc16(bits: &[u8], mask: u16) -> bool {
    if bits.len() < 16 {
        return false;
    }
    let (payload, parity) = bits.split_at(bits.len() - 16);
    let expect = crc16(payload);
    parity
        .iter()
        .enumerate()
        .all(|(i, &p)| p ^ ((mask >> (15 - i)) & 1) as u8 == expect[i])
}

fn parity7(x: u8) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Tail-biting convolutional encoder: the shift register starts loaded
/// with the last six input bits, so the trellis path begins and ends in
/// the same state. Returns the three coded streams.
pub fn conv_encode(bits: &[u8]) -> [Vec<u8>; 3] {
    let d = bits.len();
    assert!(d >= 6, "tail-biting needs at least 6 bits");
    let mut mem: u8 = 0;
    for i in 0..6 {
        mem |= (bits[d - 1 - i] & 1) << (5 - i);
    }
    let mut streams = [
        Vec::with_capacity(d),
        Vec::with_capacity(d),
        Vec::with_capacity(d),
    ];
    for &b in bits {
        let window = ((b & 1) << 6) | mem;
        for (g, s) in GENERATORS.iter().zip(streams.iter_mut()) {
            s.push(parity7(window & g));
        }
        mem = ((b & 1) << 5) | (mem >> 1);
    }
    streams
}

/// Read order of the 32-column sub-block interleaver: indices into the
/// original stream, in transmitted order. Dummy padding occupies the
/// front of the matrix and is skipped.
fn subblock_read_order(d: usize) -> Vec<usize> {
    let rows = d.div_ceil(32);
    let n_dummy = rows * 32 - d;
    let mut order = Vec::with_capacity(d);
    for &col in COLUMN_PERMUTATION.iter() {
        for row in 0..rows {
            let pos = row * 32 + col;
            if pos >= n_dummy {
                order.push(pos - n_dummy);
            }
        }
    }
    order
}

/// Rate matching: interleave each coded stream, concatenate into a
/// circular buffer, and read `e` bits cyclically (repetition when
/// e > 3d, puncturing when e < 3d).
pub fn rate_match(streams: &[Vec<u8>; 3], e: usize) -> Vec<u8> {
    let d = streams[0].len();
    let order = subblock_read_order(d);
    let mut buffer = Vec::with_capacity(3 * d);
    for s in streams {
        assert_eq!(s.len(), d);
        buffer.extend(order.iter().map(|&i| s[i]));
    }
    (0..e).map(|k| buffer[k % buffer.len()]).collect()
}

/// Inverse of `rate_match` for soft values: accumulates the LLRs of
/// repeated bit positions and de-interleaves back into three streams of
/// length `d`. Punctured positions stay at zero.
pub fn rate_recover(llr: &[f64], d: usize) -> [Vec<f64>; 3] {
    let order = subblock_read_order(d);
    let mut buffer = vec![0.0f64; 3 * d];
    for (k, &v) in llr.iter().enumerate() {
        buffer[k % (3 * d)] += v;
    }
    let mut out = [vec![0.0; d], vec![0.0; d], vec![0.0; d]];
    for (s, chunk) in buffer.chunks(d).enumerate() {
        for (j, &v) in chunk.iter().enumerate() {
            out[s][order[j]] = v;
        }
    }
    out
}

/// Exact maximum-likelihood tail-biting Viterbi decoder: runs the 64-state
/// trellis once per candidate start state and keeps the best path that
/// returns to its starting state. LLR convention: positive favors bit 0.
pub fn tbcc_decode(llr: &[Vec<f64>; 3]) -> Vec<u8> {
    let d = llr[0].len();
    // Per-step, per-window branch metrics (bipolar correlation).
    let mut branch = vec![[0.0f64; 128]; d];
    for k in 0..d {
        for (w, slot) in branch[k].iter_mut().enumerate() {
            let mut m = 0.0;
            for (g, stream) in GENERATORS.iter().zip(llr.iter()) {
                let bit = parity7(w as u8 & g);
                m += stream[k] * (1.0 - 2.0 * bit as f64);
            }
            *slot = m;
        }
    }

    let mut best_metric = f64::NEG_INFINITY;
    let mut best_bits = vec![0u8; d];
    let mut prev = vec![[0u8; 64]; d];
    for start in 0..64usize {
        let mut metric = [f64::NEG_INFINITY; 64];
        metric[start] = 0.0;
        for k in 0..d {
            let mut next = [f64::NEG_INFINITY; 64];
            let step_prev = &mut prev[k];
            for s in 0..64usize {
                if metric[s] == f64::NEG_INFINITY {
                    continue;
                }
                for u in 0..2usize {
                    let window = (u << 6) | s;
                    let m = metric[s] + branch[k][window];
                    let ns = (u << 5) | (s >> 1);
                    if m > next[ns] {
                        next[ns] = m;
                        step_prev[ns] = s as u8;
                    }
                }
            }
            metric = next;
        }
        if metric[start] > best_metric {
            best_metric = metric[start];
            let mut state = start;
            for k in (0..d).rev() {
                best_bits[k] = (state >> 5) as u8;
                state = prev[k][state] as usize;
            }
        }
    }
    best_bits
}

/// Full transmit chain for a CRC-protected convolutionally coded block.
pub fn encode_block(payload: &[u8], crc_mask: u16, e: usize) -> Vec<u8> {
    let with_crc = append_crc16(payload, crc_mask);
    rate_match(&conv_encode(&with_crc), e)
}

/// Full receive chain: rate recovery, tail-biting decoding and CRC
/// verification. Returns the payload when the CRC checks out.
pub fn decode_block(llr: &[f64], payload_len: usize, crc_mask: u16) -> Option<Vec<u8>> {
    let d = payload_len + 16;
    let recovered = rate_recover(llr, d);
    let bits = tbcc_decode(&recovered);
    if check_crc16(&bits, crc_mask) {
        Some(bits[..payload_len].to_vec())
    } else {
        None
    }
}

/// 32-bit codeword announcing control format indicator `cfi` (1..=3):
/// a cyclic repetition of one of three patterns with pairwise Hamming
/// distance 21 or 22.
pub fn cfi_codeword(cfi: u8) -> Result<[u8; 32]> {
    let pattern: [u8; 3] = match cfi {
        1 => [0, 1, 1],
        2 => [1, 0, 1],
        3 => [1, 1, 0],
        _ => {
            return Err(SimError::InvalidConfiguration(format!(
                "CFI {cfi} has no codeword"
            )))
        }
    };
    let mut cw = [0u8; 32];
    for (k, slot) in cw.iter_mut().enumerate() {
        *slot = pattern[k % 3];
    }
    Ok(cw)
}

/// Maximum-correlation decoder for the CFI codebook.
pub fn cfi_decode(llr: &[f64; 32]) -> u8 {
    let mut best = (f64::NEG_INFINITY, 1u8);
    for cfi in 1..=3u8 {
        let cw = cfi_codeword(cfi).expect("cfi in range");
        let score: f64 = cw
            .iter()
            .zip(llr.iter())
            .map(|(&b, &l)| l * (1.0 - 2.0 * b as f64))
            .sum();
        if score > best.0 {
            best = (score, cfi);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn to_llr(bits: &[u8]) -> Vec<f64> {
        bits.iter().map(|&b| 1.0 - 2.0 * b as f64).collect()
    }

    #[test]
    fn crc16_known_vectors() {
        assert_eq!(crc16(&[0; 24]), [0; 16]);
        // A single 1 bit leaves exactly the polynomial in the register.
        let one = crc16(&[1]);
        let poly: Vec<u8> = (0..16).map(|i| ((0x1021u16 >> (15 - i)) & 1) as u8).collect();
        assert_eq!(one.to_vec(), poly);
    }

    #[test]
    fn crc16_mask_roundtrip() {
        let payload: Vec<u8> = (0..24).map(|i| (i * 7 % 3 == 0) as u8).collect();
        let block = append_crc16(&payload, 0xC3A5);
        assert!(check_crc16(&block, 0xC3A5));
        assert!(!check_crc16(&block, 0x0000));
        let mut corrupted = block.clone();
        corrupted[5] ^= 1;
        assert!(!check_crc16(&corrupted, 0xC3A5));
    }

    #[test]
    fn conv_encoder_impulse_responses() {
        // Impulse at position 0 with zero memory: each stream reads out
        // its generator taps in time order.
        let mut bits = vec![0u8; 40];
        bits[0] = 1;
        let s = conv_encode(&bits);
        assert_eq!(&s[0][..8], &[1, 0, 1, 1, 0, 1, 1, 0]);
        assert_eq!(&s[1][..8], &[1, 1, 1, 1, 0, 0, 1, 0]);
        assert_eq!(&s[2][..8], &[1, 1, 1, 0, 1, 0, 1, 0]);
        // Impulse at the last position preloads the register and wraps.
        let mut bits = vec![0u8; 40];
        bits[39] = 1;
        let s = conv_encode(&bits);
        assert_eq!(&s[0][..7], &[0, 1, 1, 0, 1, 1, 0]);
        assert_eq!(s[0][39], 1);
    }

    #[test]
    fn conv_encoder_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a: Vec<u8> = (0..44).map(|_| rng.gen_range(0..2u8)).collect();
        let b: Vec<u8> = (0..44).map(|_| rng.gen_range(0..2u8)).collect();
        let xor: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let ea = conv_encode(&a);
        let eb = conv_encode(&b);
        let ex = conv_encode(&xor);
        for s in 0..3 {
            for k in 0..44 {
                assert_eq!(ex[s][k], ea[s][k] ^ eb[s][k]);
            }
        }
    }

    #[test]
    fn subblock_order_is_permutation_with_known_prefix() {
        let order = subblock_read_order(40);
        assert_eq!(&order[..10], &[9, 25, 17, 1, 33, 13, 29, 21, 5, 37]);
        let mut seen = vec![false; 40];
        for &i in &order {
            assert!(!seen[i]);
            seen[i] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn rate_match_repeats_circular_buffer() {
        let streams = conv_encode(&append_crc16(&[1, 0, 1, 1, 0, 0, 1, 0], 0));
        let out = rate_match(&streams, 1920);
        let cycle = 3 * 24;
        for k in 0..1920 {
            assert_eq!(out[k], out[k % cycle]);
        }
        // Puncturing takes a prefix of the same buffer.
        let short = rate_match(&streams, 50);
        assert_eq!(short[..], out[..50]);
    }

    #[test]
    fn rate_recover_accumulates_repetitions() {
        let llr = vec![1.0; 1920];
        let rec = rate_recover(&llr, 40);
        for s in rec {
            for v in s {
                assert!((v - 16.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coded_block_roundtrips_noiselessly() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for &(payload_len, e, mask) in
            &[(24usize, 480usize, 0u16), (28, 72, 0xFFFF), (24, 1920, 0), (28, 72, 0x1234)]
        {
            for _ in 0..20 {
                let payload: Vec<u8> = (0..payload_len).map(|_| rng.gen_range(0..2u8)).collect();
                let coded = encode_block(&payload, mask, e);
                assert_eq!(coded.len(), e);
                let decoded = decode_block(&to_llr(&coded), payload_len, mask)
                    .expect("noiseless decode");
                assert_eq!(decoded, payload);
            }
        }
    }

    #[test]
    fn decoder_corrects_sparse_errors_on_repeated_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let payload: Vec<u8> = (0..24).map(|_| rng.gen_range(0..2u8)).collect();
        let coded = encode_block(&payload, 0, 480);
        let mut llr = to_llr(&coded);
        // Flip 40 of 480 soft bits; fourfold repetition plus the code's
        // distance should absorb this easily.
        for _ in 0..40 {
            let i = rng.gen_range(0..480);
            llr[i] = -llr[i];
        }
        let decoded = decode_block(&llr, 24, 0).expect("robust decode");
        assert_eq!(decoded, payload);
    }

    #[test]
    fn wrong_crc_mask_rejects() {
        let payload: Vec<u8> = (0..28).map(|i| (i % 3 == 1) as u8).collect();
        let coded = encode_block(&payload, 0xABCD, 72);
        assert!(decode_block(&to_llr(&coded), 28, 0xABCD).is_some());
        assert!(decode_block(&to_llr(&coded), 28, 0xABCE).is_none());
    }

    #[test]
    fn cfi_codewords_are_well_separated() {
        let cws: Vec<[u8; 32]> = (1..=3).map(|c| cfi_codeword(c).unwrap()).collect();
        let dist = |a: &[u8; 32], b: &[u8; 32]| -> usize {
            a.iter().zip(b.iter()).filter(|(x, y)| x != y).count()
        };
        assert_eq!(dist(&cws[0], &cws[1]), 22);
        assert_eq!(dist(&cws[0], &cws[2]), 21);
        assert_eq!(dist(&cws[1], &cws[2]), 21);
        assert!(cfi_codeword(0).is_err());
        assert!(cfi_codeword(4).is_err());
    }

    #[test]
    fn cfi_decode_tolerates_flips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for cfi in 1..=3u8 {
            let cw = cfi_codeword(cfi).unwrap();
            let mut llr = [0.0f64; 32];
            for (i, &b) in cw.iter().enumerate() {
                llr[i] = 1.0 - 2.0 * b as f64;
            }
            assert_eq!(cfi_decode(&llr), cfi);
            // Up to 8 flips stays well inside half the minimum distance.
            for _ in 0..8 {
                let i = rng.gen_range(0..32);
                llr[i] = -llr[i];
            }
            assert_eq!(cfi_decode(&llr), cfi);
        }
    }
}
