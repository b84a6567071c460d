use hwmark::codec::{embed, extract, WatermarkKey};
use hwmark::ga::crossover::{cx, er, ox, pmx};
use hwmark::ga::mutation::mutate_slice;
use hwmark::ga::{apply_permutation, Permutation};
use hwmark::hadamard::{sylvester, Block};
use hwmark::image::convert_encoding;
use hwmark::metrics::nc;
use hwmark::rng::stream_rng;
use hwmark::{BinaryWatermark, Encoding, GrayImage, MutationKind};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn is_permutation(v: &[u32]) -> bool {
    let mut sorted = v.to_vec();
    sorted.sort_unstable();
    sorted.iter().enumerate().all(|(i, &x)| x as usize == i)
}

fn shuffled(n: usize, seed: u64) -> Vec<u32> {
    let mut v: Vec<u32> = (0..n as u32).collect();
    v.shuffle(&mut stream_rng(seed, 0));
    v
}

fn block8() -> impl Strategy<Value = Block> {
    prop::collection::vec(-512.0f64..512.0, 64).prop_map(|v| Block::from_vec(8, v).unwrap())
}

fn watermark(side: usize) -> impl Strategy<Value = BinaryWatermark> {
    prop::collection::vec(0u8..=1, side * side)
        .prop_filter("needs a white pixel", |b| b.contains(&1))
        .prop_map(move |b| BinaryWatermark::new(side, b).unwrap())
}

proptest! {
    #[test]
    fn transform_round_trips(a in block8()) {
        let h = sylvester(8).unwrap();
        prop_assert!(h.inverse(&h.forward(&a).unwrap()).unwrap().max_abs_diff(&a) < 1e-9);
    }

    #[test]
    fn transform_is_linear(a in block8(), b in block8(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let h = sylvester(8).unwrap();
        let mix = Block::from_fn(8, |r, c| x * a.get(r, c) + y * b.get(r, c));
        let (fa, fb, fm) = (h.forward(&a).unwrap(), h.forward(&b).unwrap(), h.forward(&mix).unwrap());
        let expect = Block::from_fn(8, |r, c| x * fa.get(r, c) + y * fb.get(r, c));
        prop_assert!(fm.max_abs_diff(&expect) < 1e-8);
    }

    #[test]
    fn crossovers_yield_permutations(n in 2usize..40, s1 in any::<u64>(), s2 in any::<u64>(), cut in any::<(usize, usize)>()) {
        let (p1, p2) = (shuffled(n, s1), shuffled(n, s2));
        let (i, j) = ((cut.0 % n).min(cut.1 % n), (cut.0 % n).max(cut.1 % n));
        prop_assert!(is_permutation(&ox(&p1, &p2, i, j)));
        prop_assert!(is_permutation(&pmx(&p1, &p2, i, j)));
        let (c1, c2) = cx(&p1, &p2);
        prop_assert!(is_permutation(&c1) && is_permutation(&c2));
        prop_assert!(is_permutation(&er(&p1, &p2, &mut stream_rng(s1 ^ s2, 0))));
    }

    #[test]
    fn mutations_yield_permutations(n in 2usize..60, seed in any::<u64>(), kind in 0usize..4) {
        let mut v = shuffled(n, seed);
        mutate_slice(MutationKind::ALL[kind], &mut v, &mut stream_rng(seed, 1));
        prop_assert!(is_permutation(&v));
    }

    #[test]
    fn byte_real_byte_is_identity(px in prop::collection::vec(any::<u8>(), 16)) {
        let img = GrayImage::from_bytes(4, 4, px).unwrap();
        let back = convert_encoding(&convert_encoding(&img, Encoding::Real), Encoding::Byte);
        prop_assert_eq!(back, img);
    }

    #[test]
    fn nc_is_symmetric_and_bounded(a in watermark(5), b in watermark(5)) {
        let (ab, ba) = (nc(&a, &b).unwrap(), nc(&b, &a).unwrap());
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(nc(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn permutation_inverse_undoes(w in watermark(6), seed in any::<u64>()) {
        let perm = Permutation::new(shuffled(36, seed)).unwrap();
        let scrambled = apply_permutation(&w, &perm).unwrap();
        prop_assert_eq!(scrambled.white_count(), w.white_count());
        prop_assert_eq!(apply_permutation(&scrambled, &perm.inverse()).unwrap(), w);
    }

    #[test]
    fn key_json_round_trips(seed in any::<u64>(), b in 0.0f64..10.0, with_perm in any::<bool>()) {
        let mut key = WatermarkKey::for_sizes(64, 8).unwrap();
        key.params.b = b;
        if with_perm {
            key = key.with_perm(Permutation::new(shuffled(64, seed)).unwrap(), Some(seed)).unwrap();
        }
        prop_assert_eq!(WatermarkKey::from_json(&key.to_json()).unwrap(), key);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn embed_extract_round_trip(w in watermark(8), px in prop::collection::vec(40u8..=215, 64 * 64)) {
        let cover = GrayImage::from_bytes(64, 64, px).unwrap();
        let key = WatermarkKey::for_sizes(64, 8).unwrap();
        let marked = embed(&cover, &w, &key).unwrap();
        prop_assert_eq!(extract(&marked, &key).unwrap(), w);
    }
}
