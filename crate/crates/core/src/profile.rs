//! Access-interval profiles of a working set.
//!
//! A profile is a histogram of `(interval, block_count)` bins sorted by
//! interval, with prefix sums of block count and access rate so that every
//! threshold query is a binary search.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

pub const DEFAULT_BINS: usize = 65_536;

/// Upper bound on lognormal draws; larger sets weight each draw.
pub const SAMPLE_CAP: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    /// Representative access interval, seconds.
    pub interval: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessProfile {
    block_size: u64,
    bins: Vec<Bin>,
    /// `cum_count[k]` blocks and `cum_rate[k]` accesses/s in the first `k` bins.
    cum_count: Vec<u64>,
    cum_rate: Vec<f64>,
}

impl AccessProfile {
    /// Build from arbitrary bins; they are sorted and equal intervals merged.
    pub fn from_bins(block_size: u64, mut bins: Vec<Bin>) -> Result<Self> {
        if block_size == 0 {
            return Err(ModelError::config("block_size", "must be positive"));
        }
        for b in &bins {
            if !(b.interval > 0.0 && b.interval.is_finite()) {
                return Err(ModelError::config(
                    "interval_s",
                    format!("{} is not a positive finite interval", b.interval),
                ));
            }
        }
        bins.retain(|b| b.count > 0);
        if bins.is_empty() {
            return Err(ModelError::config("block_count", "profile holds no blocks"));
        }
        bins.sort_by(|a, b| a.interval.total_cmp(&b.interval));
        let mut merged: Vec<Bin> = Vec::with_capacity(bins.len());
        for b in bins {
            match merged.last_mut() {
                Some(last) if last.interval == b.interval => last.count += b.count,
                _ => merged.push(b),
            }
        }
        let mut cum_count = Vec::with_capacity(merged.len() + 1);
        let mut cum_rate = Vec::with_capacity(merged.len() + 1);
        let (mut n, mut r) = (0u64, 0.0f64);
        cum_count.push(0);
        cum_rate.push(0.0);
        for b in &merged {
            n += b.count;
            r += b.count as f64 / b.interval;
            cum_count.push(n);
            cum_rate.push(r);
        }
        Ok(Self {
            block_size,
            bins: merged,
            cum_count,
            cum_rate,
        })
    }

    /// One block per interval.
    pub fn from_intervals(block_size: u64, intervals: &[f64]) -> Result<Self> {
        Self::from_bins(
            block_size,
            intervals.iter().map(|&interval| Bin { interval, count: 1 }).collect(),
        )
    }

    pub fn lognormal(n_blocks: u64, sigma: f64, total_throughput: f64, block_size: u64, seed: u64) -> Result<Self> {
        Self::lognormal_with_bins(n_blocks, sigma, total_throughput, block_size, seed, DEFAULT_BINS)
    }

    /// Lognormal intervals, location solved so the byte throughput is exact.
    ///
    /// Draws are sorted and grouped into `n_bins` equal-count quantile bins;
    /// each bin's interval is the harmonic mean of its members, which keeps the
    /// total access rate identical to the unquantized sample.
    pub fn lognormal_with_bins(
        n_blocks: u64,
        sigma: f64,
        total_throughput: f64,
        block_size: u64,
        seed: u64,
        n_bins: usize,
    ) -> Result<Self> {
        if n_blocks == 0 {
            return Err(ModelError::config("n_blocks", "must be positive"));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(ModelError::config("sigma", "must be finite and non-negative"));
        }
        if !(total_throughput > 0.0 && total_throughput.is_finite()) {
            return Err(ModelError::config("total_throughput", "must be positive"));
        }
        if block_size == 0 {
            return Err(ModelError::config("block_size", "must be positive"));
        }
        if n_bins == 0 {
            return Err(ModelError::config("bins", "must be positive"));
        }

        let m = n_blocks.min(SAMPLE_CAP) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // log-interval offsets from the location parameter
        let mut x: Vec<f64> = (0..m)
            .map(|_| sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        x.sort_by(f64::total_cmp);

        let weight = |j: usize| -> u64 {
            let n = n_blocks as u128;
            let (a, b) = (j as u128 * n / m as u128, (j as u128 + 1) * n / m as u128);
            (b - a) as u64
        };

        let n_bins = n_bins.min(m);
        let mut counts = Vec::with_capacity(n_bins);
        let mut inv_sums = Vec::with_capacity(n_bins);
        for b in 0..n_bins {
            let (lo, hi) = (b * m / n_bins, (b + 1) * m / n_bins);
            let mut count = 0u64;
            let mut inv = 0.0;
            for (j, xj) in x.iter().enumerate().take(hi).skip(lo) {
                let w = weight(j);
                count += w;
                inv += w as f64 * (-xj).exp();
            }
            counts.push(count);
            inv_sums.push(inv);
        }
        // sum over blocks of exp(-(mu + x)) must equal throughput / block_size
        let s: f64 = inv_sums.iter().sum();
        let mu = (s * block_size as f64 / total_throughput).ln();
        let bins = counts
            .into_iter()
            .zip(inv_sums)
            .map(|(count, inv)| Bin {
                interval: mu.exp() * count as f64 / inv,
                count,
            })
            .collect();
        Self::from_bins(block_size, bins)
    }

    pub fn block_size(&self) -> u64 {
        self.block_size
    }

    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    pub fn n_blocks(&self) -> u64 {
        *self.cum_count.last().unwrap()
    }

    pub fn dataset_bytes(&self) -> f64 {
        self.n_blocks() as f64 * self.block_size as f64
    }

    /// Σ 1/τ_i, accesses per second.
    pub fn total_rate(&self) -> f64 {
        *self.cum_rate.last().unwrap()
    }

    pub fn total_throughput(&self) -> f64 {
        self.total_rate() * self.block_size as f64
    }

    pub fn min_interval(&self) -> f64 {
        self.bins[0].interval
    }

    pub fn max_interval(&self) -> f64 {
        self.bins.last().unwrap().interval
    }

    /// Number of leading bins in S(T).
    fn bins_within(&self, threshold: f64) -> usize {
        self.bins.partition_point(|b| b.interval <= threshold)
    }

    /// Threshold that caches exactly the first `k` bins.
    fn threshold_of(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.bins[k - 1].interval
        }
    }

    /// Lowest `k` satisfying a predicate that is monotone in `k`.
    fn first_bins(&self, pred: impl Fn(usize) -> bool) -> usize {
        let (mut lo, mut hi) = (0usize, self.bins.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if pred(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    /// |S(T)|, blocks with interval at most `threshold`.
    pub fn blocks_within(&self, threshold: f64) -> u64 {
        self.cum_count[self.bins_within(threshold)]
    }

    /// DRAM bytes needed to hold S(T).
    pub fn cached_bytes(&self, threshold: f64) -> f64 {
        self.blocks_within(threshold) as f64 * self.block_size as f64
    }

    /// Cached and uncached byte throughput at `threshold`.
    pub fn psi_split(&self, threshold: f64) -> (f64, f64) {
        let k = self.bins_within(threshold);
        let l = self.block_size as f64;
        let cached = self.cum_rate[k];
        (l * cached, l * (self.total_rate() - cached))
    }

    /// Host-DRAM traffic: cached hits once, misses twice (DMA in, processor read).
    pub fn dram_bw_demand(&self, threshold: f64) -> f64 {
        let (c, d) = self.psi_split(threshold);
        c + 2.0 * d
    }

    /// Smallest threshold whose DRAM traffic fits `dram_bandwidth`.
    pub fn threshold_t_b(&self, dram_bandwidth: f64) -> Result<f64> {
        if !(dram_bandwidth >= self.total_throughput()) {
            return Err(ModelError::infeasible(
                "dram_bandwidth",
                format!(
                    "{:.4e} B/s cannot serve the workload's {:.4e} B/s even fully cached",
                    dram_bandwidth,
                    self.total_throughput()
                ),
            ));
        }
        let l = self.block_size as f64;
        let total = self.total_rate();
        let k = self.first_bins(|k| l * (2.0 * total - self.cum_rate[k]) <= dram_bandwidth);
        Ok(self.threshold_of(k))
    }

    /// Smallest threshold whose miss traffic fits the aggregate SSD bandwidth.
    pub fn threshold_t_s(&self, ssd_bandwidth: f64) -> Result<f64> {
        if !(ssd_bandwidth >= 0.0) {
            return Err(ModelError::domain("ssd_bandwidth", "must be non-negative"));
        }
        let l = self.block_size as f64;
        let total = self.total_rate();
        let k = self.first_bins(|k| l * (total - self.cum_rate[k]) <= ssd_bandwidth);
        Ok(self.threshold_of(k))
    }

    /// Largest threshold whose cached set fits `dram_capacity` bytes.
    pub fn threshold_t_c(&self, dram_capacity: f64) -> Result<f64> {
        if !(dram_capacity >= 0.0) {
            return Err(ModelError::domain("dram_capacity", "must be non-negative"));
        }
        let slots = (dram_capacity / self.block_size as f64).floor();
        let k = self.first_bins(|k| self.cum_count[k + 1] as f64 > slots);
        Ok(self.threshold_of(k))
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["interval_s", "block_count"]).unwrap();
        for b in &self.bins {
            w.write_record([format!("{:e}", b.interval), b.count.to_string()]).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn from_csv(block_size: u64, text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = r.headers().map_err(|e| ModelError::config("profile", e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["interval_s", "block_count"] {
            return Err(ModelError::config("profile", "header must be `interval_s,block_count`"));
        }
        let mut bins = Vec::new();
        for (i, rec) in r.deserialize::<(f64, u64)>().enumerate() {
            let (interval, count) =
                rec.map_err(|e| ModelError::config(format!("profile.row{}", i + 1), e.to_string()))?;
            bins.push(Bin { interval, count });
        }
        Self::from_bins(block_size, bins)
    }
}
