use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use rdg_ffi::*;

const UTEST1: &str = "\
grid.n1 = 16
grid.n2 = 16
params.k1 = 1
params.k2 = 1
params.k3 = 1
time.tau = 0.01
time.t_end = 1
ic.preset = utest1
";

fn last_error() -> String {
    unsafe { CStr::from_ptr(rdg_last_error_message()) }.to_string_lossy().into_owned()
}

fn from_config(text: &str) -> (RdgStatus, *mut RdgSimulation) {
    let c = CString::new(text).unwrap();
    let mut sim = ptr::null_mut();
    let status = unsafe { rdg_simulation_from_config(c.as_ptr(), &mut sim) };
    (status, sim)
}

#[test]
fn config_simulation_steps_and_dissipates() {
    let (status, sim) = from_config(UTEST1);
    assert_eq!(status, RdgStatus::Ok);
    unsafe {
        let mut e0 = RdgEnergy::default();
        assert_eq!(rdg_simulation_energy(sim, &mut e0), RdgStatus::Ok);
        let mut prev = e0.total;
        for _ in 0..5 {
            let mut info = RdgStepInfo::default();
            assert_eq!(rdg_simulation_step(sim, 0.0, &mut info), RdgStatus::Ok);
            assert_eq!(info.tau, 0.01);
            assert!(info.energy.total <= prev);
            assert!(info.linf_length_err < 1e-9);
            prev = info.energy.total;
        }
        let mut t = 0.0;
        assert_eq!(rdg_simulation_time(sim, &mut t), RdgStatus::Ok);
        assert!((t - 0.05).abs() < 1e-15);
        let mut err = 1.0;
        assert_eq!(rdg_simulation_length_error(sim, &mut err), RdgStatus::Ok);
        assert!(err < 1e-9);
        rdg_simulation_free(sim);
    }
}

#[test]
fn field_round_trip_and_validation() {
    let grid = RdgGridSpec {
        dims: [8, 8, 8],
        lengths: [std::f64::consts::TAU; 3],
        origin: [0.0; 3],
    };
    let method = RdgMethod {
        kind: RdgKind::MeanValue,
        gauss_points: 2,
        eps0: 0.0,
    };
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(rdg_simulation_new(&grid, 1.0, 2.0, 3.0, &method, &mut sim), RdgStatus::Ok);
        let mut n = 0;
        assert_eq!(rdg_simulation_point_count(sim, &mut n), RdgStatus::Ok);
        assert_eq!(n, 512);
        let mut buf = vec![0.0; 3 * n];
        assert_eq!(rdg_simulation_get_field(sim, buf.as_mut_ptr(), buf.len()), RdgStatus::Ok);
        assert!(buf[..2 * n].iter().all(|&v| v == 0.0) && buf[2 * n..].iter().all(|&v| v == 1.0));

        let twisted: Vec<f64> = (0..3 * n)
            .map(|i| {
                let z = std::f64::consts::TAU * ((i % n) / 64) as f64 / 8.0;
                [z.cos(), z.sin(), 0.0][i / n]
            })
            .collect();
        assert_eq!(rdg_simulation_set_field(sim, twisted.as_ptr(), twisted.len()), RdgStatus::Ok);
        let mut back = vec![0.0; 3 * n];
        rdg_simulation_get_field(sim, back.as_mut_ptr(), back.len());
        assert_eq!(back, twisted);
        let mut e = RdgEnergy::default();
        rdg_simulation_energy(sim, &mut e);
        assert!((e.total - 2.0 * 0.5 * 248.05021344239853).abs() < 1e-9 * e.total);

        assert_eq!(rdg_simulation_set_field(sim, twisted.as_ptr(), 7), RdgStatus::InvalidArgument);
        assert!(last_error().contains("expected 1536"));
        let mut bad = twisted.clone();
        bad[3] = f64::NAN;
        assert_eq!(rdg_simulation_set_field(sim, bad.as_ptr(), bad.len()), RdgStatus::InvalidArgument);
        assert_eq!(rdg_simulation_step(sim, 0.0, ptr::null_mut()), RdgStatus::InvalidArgument);
        assert_eq!(rdg_simulation_step(sim, 0.01, ptr::null_mut()), RdgStatus::Ok);
        assert!(last_error().is_empty());
        rdg_simulation_free(sim);
    }
}

#[test]
fn errors_are_reported() {
    let (status, sim) = from_config(&UTEST1.replace("params.k1 = 1", "params.k1 = -2"));
    assert_eq!(status, RdgStatus::Config);
    assert!(sim.is_null());
    assert!(last_error().starts_with("params.k1"));

    unsafe {
        assert_eq!(rdg_simulation_from_config(ptr::null(), ptr::null_mut()), RdgStatus::NullPointer);
        let mut t = 0.0;
        assert_eq!(rdg_simulation_time(ptr::null(), &mut t), RdgStatus::NullPointer);
        assert_eq!(rdg_verify_dg(8, 1, 1, 2.0, 3.0, 4.0, ptr::null_mut()), RdgStatus::NullPointer);
        rdg_simulation_free(ptr::null_mut());
        let grid = RdgGridSpec {
            dims: [8, 8, 8],
            lengths: [1.0; 3],
            origin: [0.0; 3],
        };
        let method = RdgMethod {
            kind: RdgKind::Gonzalez,
            gauss_points: 0,
            eps0: -1.0,
        };
        let mut sim = ptr::null_mut();
        assert_eq!(rdg_simulation_new(&grid, 1.0, 1.0, 1.0, &method, &mut sim), RdgStatus::InvalidArgument);
        assert!(last_error().contains("eps0"));
    }
}

#[test]
fn verify_dg_identity() {
    let mut worst = 1.0;
    assert_eq!(unsafe { rdg_verify_dg(8, 2, 42, 2.0, 3.0, 4.0, &mut worst) }, RdgStatus::Ok);
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/rdg.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "rdg_simulation_from_config",
        "rdg_simulation_new",
        "rdg_simulation_free",
        "rdg_simulation_step",
        "rdg_simulation_energy",
        "rdg_verify_dg",
        "rdg_last_error_message",
        "typedef struct RdgSimulation RdgSimulation",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile_dir();
    let src = dir.join("check.c");
    std::fs::write(
        &src,
        "#include \"rdg.h\"\nint main(void) { RdgSimulation *s = 0; rdg_simulation_free(s); return RDG_STATUS_OK; }\n",
    )
    .unwrap();
    match Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
    {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(e) => eprintln!("no C compiler available, header compile check not run: {e}"),
    }
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("rdg-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
