//! Round-trip properties of the on-disk formats.

use proptest::prelude::*;

use egospeed_core::ingest::{
    decode_flo, encode_flo, read_kitti_flow_png, write_kitti_flow_png,
};
use egospeed_core::FlowField;

/// Random flow fields whose samples are exactly f32-representable, with a
/// sprinkling of invalid pixels.
fn arb_flow_field() -> impl Strategy<Value = FlowField> {
    (1usize..14, 1usize..14)
        .prop_flat_map(|(w, h)| {
            let n = w * h;
            (
                Just((w, h)),
                proptest::collection::vec(-1.0e6f32..1.0e6, n),
                proptest::collection::vec(-1.0e6f32..1.0e6, n),
                proptest::collection::vec(proptest::bool::weighted(0.85), n),
            )
        })
        .prop_map(|((w, h), u, v, valid)| {
            FlowField::new(
                w,
                h,
                u.into_iter().map(f64::from).collect(),
                v.into_iter().map(f64::from).collect(),
                valid,
            )
            .unwrap()
        })
}

proptest! {
    /// decode(encode(f)) restores the mask and the valid samples.
    #[test]
    fn flo_decode_inverts_encode(f in arb_flow_field()) {
        let bytes = encode_flo(&f);
        let g = decode_flo(&bytes, std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(g.width(), f.width());
        prop_assert_eq!(g.height(), f.height());
        prop_assert_eq!(g.valid(), f.valid());
        for i in 0..f.u().len() {
            if f.valid()[i] {
                prop_assert_eq!(g.u()[i], f.u()[i]);
                prop_assert_eq!(g.v()[i], f.v()[i]);
            }
        }
    }

    /// Re-encoding a decoded file reproduces it byte for byte.
    #[test]
    fn flo_files_round_trip_byte_identically(f in arb_flow_field()) {
        let original = encode_flo(&f);
        let reencoded = encode_flo(&decode_flo(&original, std::path::Path::new("mem")).unwrap());
        prop_assert_eq!(original, reencoded);
    }

    /// KITTI PNG decode inverts encode on the representable grid
    /// (multiples of 1/64 within +-512).
    #[test]
    fn kitti_png_is_exact_on_the_representable_grid(
        (w, h) in (1usize..10, 1usize..10),
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = w * h;
        let quantized = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 {
            rng.random_range(-32768i32..32767) as f64 / 64.0
        };
        let u: Vec<f64> = (0..n).map(|_| quantized(&mut rng)).collect();
        let v: Vec<f64> = (0..n).map(|_| quantized(&mut rng)).collect();
        let valid: Vec<bool> = (0..n).map(|_| rng.random_range(0..6) > 0).collect();
        let f = FlowField::new(w, h, u, v, valid).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.png");
        write_kitti_flow_png(&f, &path).unwrap();
        let g = read_kitti_flow_png(&path).unwrap();
        prop_assert_eq!(g.valid(), f.valid());
        prop_assert_eq!(g.u(), f.u());
        prop_assert_eq!(g.v(), f.v());
    }
}
