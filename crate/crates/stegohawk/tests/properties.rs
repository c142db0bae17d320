//! Property tests for the spec-level invariants that hold across the
//! whole input space, not just the worked examples.

use proptest::collection::vec;
use proptest::prelude::*;

use stegohawk::audio::{
    deframe_payload, frame_payload, parse_wav, write_wav, AudioPayload, FRAME_HEADER_BYTES,
};
use stegohawk::bitstream::BitStream;
use stegohawk::image::{block_variance_map, candidate_positions, RasterImage, Slot};
use stegohawk::metrics::{mse, ssim};
use stegohawk::stego::{
    decode_plan, embed_bits, extract_bits, read_key, write_key, EmbeddingPlan, LsbDepth, StegoKey,
};

fn audio_strategy() -> impl Strategy<Value = AudioPayload> {
    (
        1u32..200_000,
        prop_oneof![Just(1u16), Just(2)],
        prop_oneof![Just(8u16), Just(16)],
        vec(any::<u8>(), 0..400),
    )
        .prop_map(|(rate, channels, bits, mut data)| {
            let align = channels as usize * bits as usize / 8;
            data.truncate(data.len() - data.len() % align);
            AudioPayload::new(rate, channels, bits, data).unwrap()
        })
}

fn image_strategy(max_side: u32) -> impl Strategy<Value = RasterImage> {
    (8..=max_side, 8..=max_side).prop_flat_map(|(w, h)| {
        vec(any::<u8>(), (w * h * 3) as usize)
            .prop_map(move |data| RasterImage::from_raw(w, h, data).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frame_round_trip(payload in audio_strategy()) {
        let bits = frame_payload(&payload).unwrap();
        prop_assert_eq!(bits.len(), (FRAME_HEADER_BYTES + payload.data().len()) * 8);
        prop_assert_eq!(deframe_payload(&bits).unwrap(), payload);
    }

    #[test]
    fn wav_round_trip(payload in audio_strategy()) {
        prop_assert_eq!(parse_wav(&write_wav(&payload)).unwrap(), payload);
    }

    #[test]
    fn corrupted_data_bit_is_always_detected(
        payload in audio_strategy(),
        flip_seed in any::<u64>(),
    ) {
        prop_assume!(!payload.data().is_empty());
        let bits = frame_payload(&payload).unwrap();
        let data_bits = payload.data().len() * 8;
        let flip = FRAME_HEADER_BYTES * 8 + (flip_seed as usize % data_bits);
        let corrupted: BitStream = bits
            .iter()
            .enumerate()
            .map(|(i, b)| if i == flip { !b } else { b })
            .collect();
        prop_assert!(deframe_payload(&corrupted).is_err());
    }

    #[test]
    fn candidate_selection_is_deterministic_and_monotone(
        img in image_strategy(24),
        f1 in 0.05f64..1.0,
        f2 in 0.05f64..1.0,
    ) {
        let (small, large) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let vmap = block_variance_map(&img, 8).unwrap();
        let a = candidate_positions(&vmap, &img, small).unwrap();
        let b = candidate_positions(&vmap, &img, small).unwrap();
        prop_assert_eq!(&a, &b);
        let bigger = candidate_positions(&vmap, &img, large).unwrap();
        prop_assert!(bigger.len() >= a.len());
        prop_assert_eq!(&bigger.slots()[..a.len()], a.slots());
        prop_assert!(bigger.len() <= img.value_count());
    }

    #[test]
    fn decoded_plans_stay_distinct_and_in_bounds(
        img in image_strategy(16),
        coords in vec(-10.0f64..3000.0, 1..80),
    ) {
        let vmap = block_variance_map(&img, 8).unwrap();
        let candidates = candidate_positions(&vmap, &img, 1.0).unwrap();
        prop_assume!(coords.len() <= candidates.len());
        let plan = decode_plan(&coords, &candidates, LsbDepth::One).unwrap();
        let mut seen = std::collections::HashSet::new();
        for slot in plan.slots() {
            prop_assert!(slot.pixel < img.pixel_count());
            prop_assert!(slot.channel < 3);
            prop_assert!(seen.insert((slot.pixel, slot.channel)));
        }
    }

    #[test]
    fn embed_extract_inverse_and_distortion_bound(
        img in image_strategy(16),
        payload in vec(any::<u8>(), 1..24),
        depth_two in any::<bool>(),
    ) {
        let depth = if depth_two { LsbDepth::Two } else { LsbDepth::One };
        let bits = BitStream::from_bytes(&payload);
        let vmap = block_variance_map(&img, 8).unwrap();
        let candidates = candidate_positions(&vmap, &img, 1.0).unwrap();
        let needed = bits.len().div_ceil(depth.bits() as usize);
        prop_assume!(needed <= candidates.len());
        let position: Vec<f64> = (0..needed).map(|i| i as f64).collect();
        let plan = decode_plan(&position, &candidates, depth).unwrap();

        let stego = embed_bits(&img, &plan, &bits).unwrap();
        prop_assert_eq!(extract_bits(&stego, &plan, bits.len()).unwrap(), bits);

        // Distortion bound: at most one change per used slot, each within
        // 2^depth - 1 intensity levels.
        let max_delta = (1i16 << depth.bits()) - 1;
        let changed = img
            .as_bytes()
            .iter()
            .zip(stego.as_bytes())
            .filter(|(a, b)| a != b)
            .count();
        prop_assert!(changed <= needed);
        for (a, b) in img.as_bytes().iter().zip(stego.as_bytes()) {
            prop_assert!((*a as i16 - *b as i16).abs() <= max_delta);
        }
        if depth == LsbDepth::One {
            let bound = needed as f64 / img.value_count() as f64;
            prop_assert!(mse(&img, &stego).unwrap() <= bound + 1e-12);
        }
    }

    #[test]
    fn ssim_symmetric_and_bounded(a in image_strategy(16), b_seed in any::<u64>()) {
        // Derive b from a with moderate perturbations so pairs are related.
        let mut b = a.clone();
        let mut state = b_seed;
        for pixel in 0..a.pixel_count() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            if state >> 60 == 0 {
                let channel = (state >> 32 & 3).min(2) as u8;
                let value = (state & 0xFF) as u8;
                b.set_value(pixel, channel, value);
            }
        }
        prop_assume!(a.width() == b.width() && a.height() == b.height());
        let forward = ssim(&a, &b).unwrap();
        let backward = ssim(&b, &a).unwrap();
        prop_assert_eq!(forward, backward);
        prop_assert!((-1.0..=1.0).contains(&forward));
        prop_assert_eq!(ssim(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn key_round_trip(
        width in 4u32..64,
        height in 4u32..64,
        depth_two in any::<bool>(),
        slot_seed in any::<u64>(),
        slot_count in 0usize..40,
    ) {
        let depth = if depth_two { LsbDepth::Two } else { LsbDepth::One };
        let pixel_count = width * height;
        prop_assume!(slot_count as u32 * 3 <= pixel_count * 3);
        // Distinct slots from a permutation-ish walk.
        let mut slots = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut state = slot_seed;
        while slots.len() < slot_count {
            state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            let pixel = (state % pixel_count as u64) as u32;
            let channel = ((state >> 40) as u8) % 3;
            if seen.insert((pixel, channel)) {
                slots.push(Slot { pixel, channel });
            }
        }
        let payload_bits = slot_count as u64 * depth.bits() as u64;
        let key = StegoKey::new(width, height, depth, payload_bits, slots).unwrap();
        prop_assert_eq!(read_key(&write_key(&key)).unwrap(), key);
    }

    #[test]
    fn plan_constructor_rejects_duplicates_only(
        pixels in vec(0u32..100, 1..30),
    ) {
        let slots: Vec<Slot> = pixels
            .iter()
            .map(|&pixel| Slot { pixel, channel: 0 })
            .collect();
        let mut unique = pixels.clone();
        unique.sort_unstable();
        unique.dedup();
        let has_duplicates = unique.len() != pixels.len();
        prop_assert_eq!(
            EmbeddingPlan::new(slots, LsbDepth::One).is_err(),
            has_duplicates
        );
    }
}
