mod common;

use common::*;
use portwave::kernels::Stencil;
use portwave::simulator::{check_cfl, Call, Precision, SimConfig, SourceWavelet, WaveSimulator};
use portwave::spaces::trace::TraceScope;
use portwave::{Backend, Error, Scalar, Serial, SimDevice, SimDeviceSpace, Threaded};

fn config(nz: usize, nx: usize, nt: usize, order: u32) -> SimConfig {
    SimConfig {
        nz,
        nx,
        dh: 10.0,
        dt: 0.002,
        nt,
        src_iz: nz / 2,
        src_ix: nx / 2,
        src_freq: 25.0,
        src_delay: 0.04,
        stencil_order: order,
        snapshot_every: 0,
        precision: Precision::F32,
    }
}

fn layered_velocity(nz: usize, nx: usize) -> Vec<f64> {
    (0..nz * nx)
        .map(|k| if k / nx < nz / 2 { 1500.0 } else { 2500.0 })
        .collect()
}

fn final_p<E: Backend, T: Scalar>(cfg: &SimConfig, v: &[f64]) -> Vec<T> {
    let v: Vec<T> = v.iter().map(|&x| T::from_f64(x)).collect();
    WaveSimulator::<E, T>::new(cfg, &v)
        .unwrap()
        .run()
        .unwrap()
        .final_p
}

fn reference_run<T: Scalar>(cfg: &SimConfig, v: &[f64], wavelet: &[T]) -> Vec<T> {
    let n = cfg.nz * cfg.nx;
    let mut r = RefStepper {
        nz: cfg.nz,
        nx: cfg.nx,
        dh: T::from_f64(cfg.dh),
        dt: T::from_f64(cfg.dt),
        coefficients: Stencil::of_order(cfg.stencil_order)
            .unwrap()
            .coefficients()
            .to_vec(),
        src: (cfg.src_iz, cfg.src_ix),
        v: v.iter().map(|&x| T::from_f64(x)).collect(),
        p: vec![T::zero(); n],
        pold: vec![T::zero(); n],
    };
    for &w in &wavelet[..cfg.nt] {
        r.step(w);
    }
    r.p
}

fn check_against_reference<E: Backend, T: Scalar>(order: u32) {
    let cfg = config(21, 26, 60, order);
    let v = layered_velocity(21, 26);
    let vt: Vec<T> = v.iter().map(|&x| T::from_f64(x)).collect();
    let mut sim = WaveSimulator::<E, T>::new(&cfg, &vt).unwrap();
    let wavelet = sim.wavelet().to_vec();
    let got = sim.run().unwrap().final_p;
    assert_eq!(
        bits(&got),
        bits(&reference_run(&cfg, &v, &wavelet)),
        "{} {}",
        E::NAME,
        T::NAME
    );
}

#[test]
fn matches_reference_stepper() {
    balanced(|| {
        for order in [2, 4] {
            check_against_reference::<Serial, f32>(order);
            check_against_reference::<Threaded, f64>(order);
            check_against_reference::<SimDevice, f32>(order);
            check_against_reference::<SimDevice, f64>(order);
        }
    });
}

#[test]
fn first_step_from_rest() {
    balanced(|| {
        let cfg = SimConfig {
            src_delay: 0.0,
            ..config(7, 7, 1, 2)
        };
        let mut sim = WaveSimulator::<SimDevice, f64>::new(&cfg, &[1500.0; 49]).unwrap();
        sim.step(0).unwrap();
        let p = sim.pressure_to_host().unwrap();
        let w = sim.wavelet()[0];
        assert_eq!(w, 1.0);
        // after the source P holds w at the centre, so pxx = pzz = -2w/dh²
        // there and w/dh² at the four neighbours
        let dt2v2 = (0.002f64 * 0.002) * (1500.0 * 1500.0);
        assert_eq!(
            p[3 * 7 + 3],
            2.0 * w + dt2v2 * (-2.0 * w / 100.0 - 2.0 * w / 100.0)
        );
        assert_eq!(p[3 * 7 + 4], dt2v2 * (w / 100.0));
        assert_eq!(p[2 * 7 + 3], dt2v2 * (w / 100.0));
        assert_eq!(p[2 * 7 + 2], 0.0);
    });
}

#[test]
fn call_order() {
    balanced(|| {
        let mut sim =
            WaveSimulator::<Serial, f32>::new(&config(9, 9, 2, 2), &[2000.0; 81]).unwrap();
        sim.enable_call_log();
        sim.step(0).unwrap();
        assert_eq!(
            sim.call_log().unwrap(),
            [
                Call::AddSource,
                Call::FdPzz,
                Call::FdPxx,
                Call::FdTime,
                Call::Swap,
                Call::Swap
            ]
        );
        sim.step(1).unwrap();
        assert_eq!(sim.call_log().unwrap().len(), 12);
        assert!(matches!(sim.step(2), Err(Error::Argument(_))));
    });
}

#[test]
fn silent_source_stays_at_rest() {
    balanced(|| {
        let mut sim =
            WaveSimulator::<Threaded, f64>::new(&config(12, 10, 50, 4), &[1800.0; 120]).unwrap();
        sim.set_wavelet(SourceWavelet::silent(50)).unwrap();
        assert!(sim.run().unwrap().final_p.iter().all(|v| *v == 0.0));
    });
}

#[test]
fn zero_steps_and_snapshot_count() {
    balanced(|| {
        let empty = WaveSimulator::<Serial, f32>::new(&config(8, 8, 0, 2), &[1500.0; 64])
            .unwrap()
            .run()
            .unwrap();
        assert!(empty.snapshots.is_empty());
        assert!(empty.final_p.iter().all(|v| *v == 0.0));

        let cfg = SimConfig {
            snapshot_every: 100,
            ..config(16, 16, 500, 2)
        };
        let res = WaveSimulator::<SimDevice, f32>::new(&cfg, &[1500.0; 256])
            .unwrap()
            .run()
            .unwrap();
        assert_eq!(res.snapshots.len(), 5);
        assert_eq!(
            res.snapshots.iter().map(|s| s.step).collect::<Vec<_>>(),
            [100, 200, 300, 400, 500]
        );
        assert_eq!(bits(&res.snapshots[4].data), bits(&res.final_p));
        assert!((res.snapshots[0].time - 0.2).abs() < 1e-12);
    });
}

#[test]
fn deterministic_and_backend_independent() {
    balanced(|| {
        let cfg = config(64, 64, 300, 2);
        let v = layered_velocity(64, 64);
        let serial = final_p::<Serial, f32>(&cfg, &v);
        assert_eq!(bits(&serial), bits(&final_p::<Serial, f32>(&cfg, &v)));
        assert_eq!(bits(&serial), bits(&final_p::<Threaded, f32>(&cfg, &v)));
        assert_eq!(bits(&serial), bits(&final_p::<SimDevice, f32>(&cfg, &v)));
        assert!(serial.iter().any(|x| *x != 0.0));
    });
}

#[test]
fn mirror_symmetric_wavefield() {
    balanced(|| {
        for order in [2, 4] {
            let (nz, nx) = (41, 41);
            let p = final_p::<Threaded, f64>(&config(nz, nx, 150, order), &vec![2000.0; nz * nx]);
            for i in 0..nz {
                for j in 0..nx {
                    let a = p[i * nx + j].to_bits();
                    assert_eq!(a, p[i * nx + nx - 1 - j].to_bits(), "x mirror ({i},{j})");
                    assert_eq!(a, p[(nz - 1 - i) * nx + j].to_bits(), "z mirror ({i},{j})");
                }
            }
        }
    });
}

#[test]
fn velocity_upload_is_a_single_copy() {
    let scope = TraceScope::begin();
    {
        let sim = WaveSimulator::<SimDevice, f32>::new(
            &config(101, 101, 10, 2),
            &vec![1500.0; 101 * 101],
        )
        .unwrap();
        let c = scope.delta();
        assert_eq!(c.copies_from_host, 1);
        assert_eq!(c.copies_to_host + c.copies_within, 0);
        assert_eq!(c.allocations, 6);
        assert!(sim.velocity_to_host().unwrap().iter().all(|v| *v == 1500.0));
    }
    assert_eq!(scope.live_allocations(), 0);
}

#[test]
fn device_state_is_never_plain() {
    balanced(|| {
        let cfg = config(16, 16, 40, 2);
        let mut sim = WaveSimulator::<SimDevice, f32>::new(&cfg, &[1500.0; 256]).unwrap();
        for n in 0..40 {
            sim.step(n).unwrap();
        }
        let logical = sim.pressure_to_host().unwrap();
        let raw = SimDeviceSpace::raw_bytes(sim.state().p.buffer()).unwrap();
        let plain: Vec<u8> = logical.iter().flat_map(|v| v.to_le_bytes()).collect();
        assert!(raw
            .iter()
            .zip(&plain)
            .all(|(r, p)| *r == p ^ portwave::spaces::DEVICE_MASK));
    });
}

#[test]
fn creation_errors() {
    balanced(|| {
        let mut v = vec![1500.0f32; 64];
        v[10] = 0.0;
        assert!(matches!(
            WaveSimulator::<Serial, f32>::new(&config(8, 8, 1, 2), &v),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            WaveSimulator::<Serial, f32>::new(&config(8, 8, 1, 2), &[1500.0; 63]),
            Err(Error::Argument(_))
        ));
        let fast = SimConfig {
            dt: 0.01,
            ..config(8, 8, 1, 2)
        };
        match WaveSimulator::<SimDevice, f32>::new(&fast, &[1500.0; 64]) {
            Err(Error::Stability { ratio, .. }) => assert!((ratio - 1.5).abs() < 1e-12),
            other => panic!("expected stability error, got {other:?}"),
        }
        let cfl = check_cfl(&fast, 1500.0);
        assert!(!cfl.passed);
        assert!(WaveSimulator::<SimDevice, f32>::new_unchecked(&fast, &[1500.0; 64]).is_ok());
    });
}
