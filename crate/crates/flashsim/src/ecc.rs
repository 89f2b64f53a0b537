//! Concatenated read-path ECC: a BCH code per 512 B sector, escalating to an
//! LDPC outer code over a multi-sector codeword when the inner decode fails.

use rand::Rng;

use crate::config::EccConfig;

const SECTOR: u64 = 512;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EccOutcome {
    /// Bytes moved over the channel beyond the requested sectors.
    pub extra_transfer: u64,
    /// Decode time after the data arrives, seconds.
    pub decode_latency: f64,
    /// Outer codewords that had to be decoded.
    pub escalations: u32,
}

/// Decode a read of `sectors` sectors starting at sector `first` of a page.
pub fn ecc_read_path<R: Rng>(ecc: &EccConfig, first: u32, sectors: u32, rng: &mut R) -> EccOutcome {
    let cw = ecc.codeword_sectors;
    let mut out = EccOutcome {
        decode_latency: ecc.bch_decode_latency,
        ..Default::default()
    };
    if sectors == 0 {
        return out;
    }
    let last = first + sectors - 1;
    for word in first / cw..=last / cw {
        let lo = (word * cw).max(first);
        let hi = ((word + 1) * cw - 1).min(last);
        let covered = hi - lo + 1;
        let mut failed = false;
        for _ in 0..covered {
            // one draw per sector whatever the probability, so runs that
            // differ only in p_BCH see the same address stream
            failed |= rng.random::<f64>() < ecc.bch_fail_prob;
        }
        if failed {
            out.escalations += 1;
            out.extra_transfer += (cw - covered) as u64 * SECTOR;
        }
    }
    if out.escalations > 0 {
        out.decode_latency += ecc.ldpc_base_latency + ecc.mean_iterations * ecc.ldpc_per_iteration_latency;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ecc(p: f64) -> EccConfig {
        EccConfig {
            bch_fail_prob: p,
            ..EccConfig::default()
        }
    }

    #[test]
    fn error_free_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for first in [0, 3, 7] {
            let o = ecc_read_path(&ecc(0.0), first, 1, &mut rng);
            assert_eq!(o.escalations, 0);
            assert_eq!(o.extra_transfer, 0);
            assert!((o.decode_latency - 200e-9).abs() < 1e-15);
        }
    }

    #[test]
    fn always_fail_fetches_whole_codeword() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let o = ecc_read_path(&ecc(1.0), 5, 1, &mut rng);
        assert_eq!(o.escalations, 1);
        assert_eq!(512 + o.extra_transfer, 4096);
        assert!((o.decode_latency - (200e-9 + 1e-6 + 4.0 * 250e-9)).abs() < 1e-15);

        // an aligned 4 KB read already holds the codeword
        let o = ecc_read_path(&ecc(1.0), 0, 8, &mut rng);
        assert_eq!((o.escalations, o.extra_transfer), (1, 0));

        // a read straddling two codewords escalates both
        let o = ecc_read_path(&ecc(1.0), 6, 4, &mut rng);
        assert_eq!(o.escalations, 2);
        assert_eq!(o.extra_transfer, 12 * 512);
    }

    #[test]
    fn escalation_rate_matches_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 200_000;
        let hits: u32 = (0..n).map(|_| ecc_read_path(&ecc(0.01), 0, 1, &mut rng).escalations).sum();
        let rate = hits as f64 / n as f64;
        assert!((rate - 0.01).abs() < 0.001, "{rate}");
    }
}
