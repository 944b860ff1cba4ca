//! Round-trip property tests for the BIOREG1 container.

use bioreg_cli::raster::{RasterData, RasterFile, RasterKind};
use proptest::prelude::*;

fn kind_strategy() -> impl Strategy<Value = RasterKind> {
    prop_oneof![
        Just(RasterKind::Image),
        Just(RasterKind::Field),
        Just(RasterKind::Mask),
    ]
}

fn raster_strategy() -> impl Strategy<Value = RasterFile> {
    (
        kind_strategy(),
        1usize..12,
        1usize..12,
        1usize..4,
        0.05f64..5.0,
        0.05f64..5.0,
        any::<bool>(),
    )
        .prop_flat_map(|(kind, width, height, channels, sx, sy, use_f32)| {
            let n = width * height * channels;
            if use_f32 {
                prop::collection::vec(-1.0e6f32..1.0e6, n)
                    .prop_map(move |values| {
                        RasterFile::new(
                            kind,
                            width,
                            height,
                            channels,
                            (sx, sy),
                            RasterData::F32(values),
                        )
                        .unwrap()
                    })
                    .boxed()
            } else {
                prop::collection::vec(any::<u8>(), n)
                    .prop_map(move |values| {
                        RasterFile::new(
                            kind,
                            width,
                            height,
                            channels,
                            (sx, sy),
                            RasterData::U8(values),
                        )
                        .unwrap()
                    })
                    .boxed()
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// serialize -> parse recovers the value exactly, and re-serializing the
    /// parsed value reproduces the original bytes bit-for-bit.
    #[test]
    fn serialize_parse_serialize_is_bit_identical(file in raster_strategy()) {
        let bytes = file.serialize();
        let parsed = RasterFile::parse(&bytes).unwrap();
        prop_assert_eq!(parsed.kind, file.kind);
        prop_assert_eq!(parsed.width, file.width);
        prop_assert_eq!(parsed.height, file.height);
        prop_assert_eq!(parsed.channels, file.channels);
        prop_assert_eq!(parsed.spacing, file.spacing);
        prop_assert_eq!(&parsed.data, &file.data);
        prop_assert_eq!(parsed.serialize(), bytes);
    }

    /// Truncating the payload by one element always fails parsing.
    #[test]
    fn truncated_payload_is_rejected(file in raster_strategy()) {
        let bytes = file.serialize();
        let cut = match file.data {
            RasterData::F32(_) => 4,
            RasterData::U8(_) => 1,
        };
        let truncated = &bytes[..bytes.len() - cut];
        prop_assert!(RasterFile::parse(truncated).is_err());
    }
}
