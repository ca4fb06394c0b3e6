//! Keyed counter-style random number streams.
//!
//! Every stochastic quantity in this crate is drawn from a generator that is
//! a pure function of a [`StreamKey`]. Keys are built by mixing words into a
//! 256-bit state, so a substream for (seed, n, replicate, observation, ...)
//! can be derived on any thread, in any order, and always yields the same
//! draws. This is what makes whole studies bit-reproducible under arbitrary
//! scheduling.
//!
//! The generator core is xoshiro256++ seeded through a SplitMix64-style
//! finalizer; normal variates use the polar method (no trig calls).

const LANE_SALTS: [u64; 4] = [
    0x9e37_79b9_7f4a_7c15,
    0xbf58_476d_1ce4_e5b9,
    0x94d0_49bb_1331_11eb,
    0xd6e8_feb8_6659_fd93,
];

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hierarchical key identifying one random substream.
///
/// `child` derives a new key by absorbing one word; absorption is not
/// commutative, so `(a, b)` and `(b, a)` name different streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    state: [u64; 4],
}

impl StreamKey {
    /// Root key for a study, from the user-visible master seed.
    pub fn root(seed: u64) -> Self {
        let mut state = [0u64; 4];
        for (lane, salt) in state.iter_mut().zip(LANE_SALTS) {
            *lane = splitmix(seed ^ salt);
        }
        StreamKey { state }
    }

    /// Derive the substream obtained by absorbing `word`.
    #[must_use]
    pub fn child(&self, word: u64) -> Self {
        let mut state = self.state;
        for (lane, salt) in state.iter_mut().zip(LANE_SALTS) {
            *lane = splitmix(*lane ^ splitmix(word ^ salt));
        }
        StreamKey { state }
    }

    /// Derive a substream from a textual tag (order-sensitive, like `child`).
    #[must_use]
    pub fn child_tag(&self, tag: &str) -> Self {
        // FNV-1a over the tag bytes keeps tags stable across builds.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &b in tag.as_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self.child(h)
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> StreamRng {
        let mut s = self.state;
        // xoshiro must not start from the all-zero state.
        if s == [0, 0, 0, 0] {
            s = LANE_SALTS;
        }
        StreamRng { s, spare: None }
    }
}

/// xoshiro256++ generator bound to one stream.
#[derive(Clone, Debug)]
pub struct StreamRng {
    s: [u64; 4],
    spare: Option<f64>,
}

impl StreamRng {
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw on [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (polar method, pairs cached).
    #[inline]
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let r2 = u * u + v * v;
            if r2 > 0.0 && r2 < 1.0 {
                let f = (-2.0 * r2.ln() / r2).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}
