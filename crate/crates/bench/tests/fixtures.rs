use annulus_bench::{spherical_sample, SIZES};

#[test]
fn fixture_is_deterministic_and_sized() {
    let a = spherical_sample(SIZES[0], 1).unwrap();
    let b = spherical_sample(SIZES[0], 1).unwrap();
    assert_eq!(a.data.n(), SIZES[0]);
    assert_eq!(a.data.dim(), 2);
    assert_eq!(a.data.responses(), b.data.responses());
}

#[test]
fn sizes_are_increasing() {
    assert!(SIZES.windows(2).all(|w| w[0] < w[1]));
}
