//! Counter-based random numbers.
//!
//! Each draw is the Philox4x32-10 block cipher applied to the 128-bit
//! counter `(counter, stream_id)` under the 64-bit key `seed`. There is no
//! hidden state: the output is a pure function of the triple, so any
//! replicate can be regenerated in isolation and in any order.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

/// Philox4x32 with 10 rounds.
pub fn philox4x32_10(ctr: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut ctr = ctr;
    let mut key = key;
    for round in 0..10 {
        if round > 0 {
            key[0] = key[0].wrapping_add(PHILOX_W0);
            key[1] = key[1].wrapping_add(PHILOX_W1);
        }
        let p0 = u64::from(PHILOX_M0) * u64::from(ctr[0]);
        let p1 = u64::from(PHILOX_M1) * u64::from(ctr[2]);
        let (hi0, lo0) = ((p0 >> 32) as u32, p0 as u32);
        let (hi1, lo1) = ((p1 >> 32) as u32, p1 as u32);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

/// A position in a reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
    pub counter: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self {
            seed,
            stream_id,
            counter: 0,
        }
    }

    /// The 128 output bits at the current counter, without advancing.
    pub fn block(&self) -> [u64; 2] {
        let ctr = [
            self.counter as u32,
            (self.counter >> 32) as u32,
            self.stream_id as u32,
            (self.stream_id >> 32) as u32,
        ];
        let key = [self.seed as u32, (self.seed >> 32) as u32];
        let out = philox4x32_10(ctr, key);
        [
            u64::from(out[0]) | (u64::from(out[1]) << 32),
            u64::from(out[2]) | (u64::from(out[3]) << 32),
        ]
    }

    fn next_block(&mut self) -> [u64; 2] {
        let b = self.block();
        self.counter = self.counter.wrapping_add(1);
        b
    }

    /// Uniform on the open interval `(0, 1)`; consumes one counter value.
    pub fn next_uniform(&mut self) -> f64 {
        to_open_unit(self.next_block()[0])
    }

    /// Standard normal by the Box-Muller cosine branch on the two 64-bit
    /// halves of one block; consumes one counter value.
    pub fn next_standard_normal(&mut self) -> f64 {
        let [a, b] = self.next_block();
        let u1 = to_open_unit(a);
        let u2 = to_open_unit(b);
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}

/// Functional form of [`RngStream::next_uniform`]: the value and the advanced stream.
pub fn draw_uniform(stream: RngStream) -> (f64, RngStream) {
    let mut s = stream;
    let v = s.next_uniform();
    (v, s)
}

/// Functional form of [`RngStream::next_standard_normal`].
pub fn draw_standard_normal(stream: RngStream) -> (f64, RngStream) {
    let mut s = stream;
    let v = s.next_standard_normal();
    (v, s)
}

#[inline]
fn to_open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
