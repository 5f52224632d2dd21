mod common;

use common::{balanced, bits, random_field, rng};
use portwave::spaces::trace::TraceScope;
use portwave::spaces::{DeviceBuffer, DEVICE_MASK};
use portwave::{Error, HostSpace, MemorySpace, Scalar, SimDeviceSpace};
use proptest::prelude::*;

fn round_trip<M: MemorySpace, T: Scalar>(host: &[T]) -> Vec<T> {
    let n = host.len();
    let mut buf = M::allocate::<T>(n).unwrap();
    M::copy_from_host(&mut buf, host, n).unwrap();
    let mut back = vec![T::zero(); n];
    M::copy_to_host(&mut back, &buf, n).unwrap();
    M::release(buf);
    back
}

#[test]
fn round_trips_at_assorted_lengths() {
    balanced(|| {
        let mut r = rng(1);
        for n in [0, 1, 7, 4096, 1_000_000] {
            let h64 = random_field::<f64>(&mut r, n);
            let h32 = random_field::<f32>(&mut r, n);
            assert_eq!(
                bits(&round_trip::<HostSpace, _>(&h64)),
                bits(&h64),
                "host f64 n={n}"
            );
            assert_eq!(
                bits(&round_trip::<SimDeviceSpace, _>(&h64)),
                bits(&h64),
                "device f64 n={n}"
            );
            assert_eq!(
                bits(&round_trip::<HostSpace, _>(&h32)),
                bits(&h32),
                "host f32 n={n}"
            );
            assert_eq!(
                bits(&round_trip::<SimDeviceSpace, _>(&h32)),
                bits(&h32),
                "device f32 n={n}"
            );
        }
    });
}

#[test]
fn device_bytes_are_masked() {
    balanced(|| {
        let host: Vec<f64> = (0..64).map(|k| k as f64 * 1.25 - 7.0).collect();
        let mut buf = SimDeviceSpace::allocate::<f64>(64).unwrap();
        SimDeviceSpace::copy_from_host(&mut buf, &host, 64).unwrap();
        let raw = SimDeviceSpace::raw_bytes(&buf).unwrap();
        let plain: Vec<u8> = host.iter().flat_map(|v| v.to_le_bytes()).collect();
        assert_eq!(raw.len(), plain.len());
        for (r, p) in raw.iter().zip(&plain) {
            assert_eq!(*r, p ^ DEVICE_MASK);
            assert_ne!(r, p);
        }
        // a host reinterpretation of the stored bytes is not the data
        let naive: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        assert_ne!(bits(&naive), bits(&host));
    });
}

#[test]
fn fresh_device_allocation_is_registered_and_masked() {
    balanced(|| {
        let buf = SimDeviceSpace::allocate::<f32>(64).unwrap();
        assert_eq!(SimDeviceSpace::registered_bytes(buf.id()), Some(256));
        let id = buf.id();
        drop(buf);
        assert_eq!(SimDeviceSpace::registered_bytes(id), None);

        let z = SimDeviceSpace::allocate_zeroed::<f32>(16).unwrap();
        assert!(SimDeviceSpace::raw_bytes(&z)
            .unwrap()
            .iter()
            .all(|b| *b == DEVICE_MASK));
        let mut back = vec![1.0f32; 16];
        SimDeviceSpace::copy_to_host(&mut back, &z, 16).unwrap();
        assert_eq!(back, vec![0.0; 16]);
    });
}

#[test]
fn forged_handles_are_rejected() {
    balanced(|| {
        let forged = DeviceBuffer::<f64>::forged(0xDEAD_BEEF_0000, 4);
        let mut host = vec![0.0; 4];
        assert!(matches!(
            SimDeviceSpace::copy_to_host(&mut host, &forged, 4),
            Err(Error::InvalidHandle { .. })
        ));
        let mut real = SimDeviceSpace::allocate::<f64>(4).unwrap();
        assert!(matches!(
            SimDeviceSpace::copy(&mut real, &forged, 4),
            Err(Error::InvalidHandle { .. })
        ));
        let mut forged_dst = DeviceBuffer::<f64>::forged(0xDEAD_BEEF_0001, 4);
        assert!(matches!(
            SimDeviceSpace::copy_from_host(&mut forged_dst, &host, 4),
            Err(Error::InvalidHandle { .. })
        ));
    });
}

#[test]
fn copies_check_capacity() {
    balanced(|| {
        let mut small = HostSpace::allocate::<f64>(3).unwrap();
        assert!(matches!(
            HostSpace::copy_from_host(&mut small, &[1.0; 5], 5),
            Err(Error::Bounds(_))
        ));
        let mut dev = SimDeviceSpace::allocate::<f64>(3).unwrap();
        assert!(matches!(
            SimDeviceSpace::copy_from_host(&mut dev, &[1.0; 2], 3),
            Err(Error::Bounds(_))
        ));
    });
}

#[test]
fn allocate_release_balance() {
    let scope = TraceScope::begin();
    let a = HostSpace::allocate::<f64>(100).unwrap();
    let b = SimDeviceSpace::allocate::<f32>(100).unwrap();
    let e = HostSpace::allocate::<f32>(0).unwrap();
    assert_eq!(scope.live_allocations(), 3);
    assert_eq!(scope.delta().live_bytes, 800 + 400);
    HostSpace::release(a);
    SimDeviceSpace::release(b);
    HostSpace::release(e);
    assert_eq!(scope.live_allocations(), 0);
    assert_eq!(scope.delta().live_bytes, 0);
}

#[test]
fn copy_counters() {
    let scope = TraceScope::begin();
    let mut d = SimDeviceSpace::allocate::<f64>(8).unwrap();
    let mut e = SimDeviceSpace::allocate::<f64>(8).unwrap();
    SimDeviceSpace::copy_from_host(&mut d, &[2.0; 8], 8).unwrap();
    SimDeviceSpace::copy(&mut e, &d, 8).unwrap();
    let mut h = [0.0; 8];
    SimDeviceSpace::copy_to_host(&mut h, &e, 8).unwrap();
    let c = scope.delta();
    assert_eq!(
        (c.copies_from_host, c.copies_within, c.copies_to_host),
        (1, 1, 1)
    );
    assert_eq!(h, [2.0; 8]);
}

proptest! {
    #[test]
    fn host_copies_are_equivalent(data in prop::collection::vec(-1e6f64..1e6, 0..300)) {
        balanced(|| {
            let n = data.len();
            let mut via_from_host = HostSpace::allocate::<f64>(n).unwrap();
            HostSpace::copy_from_host(&mut via_from_host, &data, n).unwrap();
            let mut via_copy = HostSpace::allocate::<f64>(n).unwrap();
            HostSpace::copy(&mut via_copy, &via_from_host, n).unwrap();
            let mut via_to_host = vec![0.0; n];
            HostSpace::copy_to_host(&mut via_to_host, &via_copy, n).unwrap();
            assert_eq!(bits(via_from_host.as_slice()), bits(&data));
            assert_eq!(bits(via_copy.as_slice()), bits(&data));
            assert_eq!(bits(&via_to_host), bits(&data));
        });
    }

    #[test]
    fn device_round_trip(data in prop::collection::vec(any::<f32>(), 0..300)) {
        let back = balanced(|| round_trip::<SimDeviceSpace, f32>(&data));
        prop_assert_eq!(bits(&back), bits(&data));
    }
}
