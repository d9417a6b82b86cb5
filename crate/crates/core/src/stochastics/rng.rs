//! Random-access variate streams.
//!
//! Each replication owns a stream keyed by `(master_seed, replication)`. Within
//! a stream every vertex has a fixed block of weight slots and every edge one
//! uniform slot, all addressable directly. A configuration is therefore a pure
//! function of `(master_seed, replication)`: samplers may touch vertices and
//! edges in any order (eagerly, or lazily during a search) and still agree bit
//! for bit, and replications can run on any thread in any order.
//!
//! Slot values come from the SplitMix64 output function applied to a Weyl
//! sequence, i.e. SplitMix64 evaluated at an arbitrary counter.

use rand::RngCore;

use crate::graph::{EdgeId, VertexId};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const WEIGHT_DOMAIN: u64 = 0x5745_4947_4854_5321;
const EDGE_DOMAIN: u64 = 0x4544_4745_5354_4154;
const AUX_DOMAIN: u64 = 0x4155_5849_4C49_4152;

/// Slots reserved per vertex for weight sampling. No law draws more than two.
pub const WEIGHT_SLOTS_PER_VERTEX: u64 = 8;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Maps 64 random bits to the open interval (0, 1): midpoints of a 2^-52 lattice.
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicationStream {
    weight_key: u64,
    edge_key: u64,
    aux_key: u64,
}

impl ReplicationStream {
    pub fn new(master_seed: u64, replication: u64) -> Self {
        let key = mix64(mix64(master_seed) ^ mix64(replication.wrapping_mul(GOLDEN).wrapping_add(1)));
        Self {
            weight_key: mix64(key ^ WEIGHT_DOMAIN),
            edge_key: mix64(key ^ EDGE_DOMAIN),
            aux_key: mix64(key ^ AUX_DOMAIN),
        }
    }

    /// The uniform that decides edge `e`. An edge with opening probability `q`
    /// is open iff this value is below `q`.
    #[inline]
    pub fn edge_uniform(&self, e: EdgeId) -> f64 {
        open_unit(mix64(self.edge_key.wrapping_add((e as u64).wrapping_add(1).wrapping_mul(GOLDEN))))
    }

    /// Sequential generator over the weight slots of vertex `v`.
    #[inline]
    pub fn vertex_rng(&self, v: VertexId) -> SlotRng {
        let start = (v as u64).wrapping_mul(WEIGHT_SLOTS_PER_VERTEX);
        SlotRng { key: self.weight_key, counter: start, end: start + WEIGHT_SLOTS_PER_VERTEX }
    }

    /// Unbounded generator for anything outside the vertex/edge layout.
    pub fn aux_rng(&self) -> SlotRng {
        SlotRng { key: self.aux_key, counter: 0, end: u64::MAX }
    }
}

/// Sequential reader over a run of slots of one stream.
#[derive(Debug, Clone)]
pub struct SlotRng {
    key: u64,
    counter: u64,
    end: u64,
}

impl RngCore for SlotRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        debug_assert!(self.counter < self.end, "slot block exhausted");
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}
