/// Independent random streams used inside one repeat.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    Split = 1,
    Model = 2,
    NetInit = 3,
    Shuffle = 4,
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for `stage` of repeat `repeat_index`:
/// `splitmix64(splitmix64(master) ^ splitmix64(repeat_index << 8 | stage))`.
///
/// Depends only on its arguments, so repeats can run in any order or in
/// parallel without changing results.
pub fn derive_seed(master_seed: u64, repeat_index: u64, stage: Stage) -> u64 {
    splitmix64(splitmix64(master_seed) ^ splitmix64((repeat_index << 8) | stage as u64))
}
