use std::ffi::{c_char, CStr, CString};
use std::ptr;

use wstate_ffi::*;

fn last_error() -> String {
    let len = ws_last_error_length();
    let mut buf = vec![0 as c_char; len];
    assert_eq!(unsafe { ws_last_error_message(buf.as_mut_ptr(), len) }, WsStatus::Ok);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(ws_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn params_round_trip_and_errors() {
    let p = ws_params_new();
    let chi = CString::new("chi").unwrap();
    let mut v = 0.0;
    unsafe {
        assert_eq!(ws_params_get(p, chi.as_ptr(), &mut v), WsStatus::Ok);
        assert_eq!(v, -0.11);
        assert_eq!(ws_params_set(p, chi.as_ptr(), -0.5), WsStatus::Ok);
        ws_params_get(p, chi.as_ptr(), &mut v);
        assert_eq!(v, -0.5);

        let bogus = CString::new("chii").unwrap();
        assert_eq!(ws_params_set(p, bogus.as_ptr(), 1.0), WsStatus::InvalidArgument);
        assert!(last_error().contains("chii"));

        let eta = CString::new("eta").unwrap();
        ws_params_set(p, eta.as_ptr(), 3.0);
        assert_eq!(ws_params_validate(p), WsStatus::Config);
        assert!(last_error().contains("eta"));

        assert_eq!(ws_params_get(ptr::null(), chi.as_ptr(), &mut v), WsStatus::NullPointer);
        ws_params_free(p);
        ws_params_free(ptr::null_mut());
    }
}

#[test]
fn plateaus_and_separation() {
    let p = ws_params_new();
    let mut out = [0.0; 4];
    unsafe {
        assert_eq!(ws_outcome_plateaus(p, out.as_mut_ptr()), WsStatus::Ok);
        let mut s = 0.0;
        assert_eq!(ws_outcome_separation(p, -0.11, &mut s), WsStatus::Ok);
        assert!((s - (out[2] - out[3]).abs()).abs() < 1e-9);
        ws_params_free(p);
    }
    assert!((out[2] + 1.68).abs() < 5e-3);
    assert!((out[3] + 3.68).abs() < 5e-3);
}

#[test]
fn states_and_fidelity() {
    let w = CString::new("w_minus").unwrap();
    let mut s = ptr::null_mut();
    let mut f = 0.0;
    unsafe {
        assert_eq!(ws_state_new_named(w.as_ptr(), &mut s), WsStatus::Ok);
        assert_eq!(ws_state_fidelity(s, w.as_ptr(), &mut f), WsStatus::Ok);
        assert!((f - 1.0).abs() < 1e-12);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(ws_state_element(s, 1, 2, &mut re, &mut im), WsStatus::Ok);
        assert!((re - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(ws_state_element(s, 8, 0, &mut re, &mut im), WsStatus::InvalidArgument);
        ws_state_free(s);
        let bad = CString::new("w_middle").unwrap();
        assert_eq!(ws_state_new_named(bad.as_ptr(), &mut s), WsStatus::InvalidArgument);
    }
}

#[test]
fn trajectory_buffers() {
    let p = ws_params_new();
    let init = CString::new("ground").unwrap();
    let mut t = ptr::null_mut();
    unsafe {
        let st = ws_trajectory_run(p, init.as_ptr(), WsEngine::Polaron, WsControl::SignPositive, 2.0, 5, 100, &mut t);
        assert_eq!(st, WsStatus::Ok);
        let n = ws_trajectory_len(t);
        assert_eq!(n, 20);
        let mut times = vec![0.0; n];
        let mut fid = vec![0.0; n];
        assert_eq!(ws_trajectory_times(t, times.as_mut_ptr(), n), WsStatus::Ok);
        assert_eq!(ws_trajectory_fidelity(t, fid.as_mut_ptr(), n), WsStatus::Ok);
        assert!((times[n - 1] - 2.0).abs() < 1e-12);
        assert!(fid.iter().all(|f| (0.0..=1.0 + 1e-9).contains(f)));
        assert_eq!(ws_trajectory_outcome(t, fid.as_mut_ptr(), n - 1), WsStatus::BufferTooSmall);

        let mut s = ptr::null_mut();
        assert_eq!(ws_trajectory_final_state(t, &mut s), WsStatus::Ok);
        let w = CString::new("w_minus").unwrap();
        let mut f = 0.0;
        ws_state_fidelity(s, w.as_ptr(), &mut f);
        assert!((f - fid[n - 1]).abs() < 1e-12);
        ws_state_free(s);
        ws_trajectory_free(t);

        let st = ws_trajectory_run(p, init.as_ptr(), WsEngine::Polaron, WsControl::None, 1.0, 5, 300, &mut t);
        assert_eq!(st, WsStatus::InvalidArgument);
        assert!(last_error().contains("stride"));
        assert_eq!(ws_trajectory_len(ptr::null()), 0);
        ws_params_free(p);
    }
}

#[test]
fn experiment_from_toml() {
    let dir = tempfile::tempdir().unwrap();
    let toml = format!(
        "scenario = \"feedback\"\nn_trajectories = 2\nt_final = 0.5\nstride = 100\ninitial_states = [\"ground\"]\noutput_path = {:?}\n",
        dir.path().to_str().unwrap()
    );
    let c = CString::new(toml).unwrap();
    unsafe {
        assert_eq!(ws_experiment_run_toml(c.as_ptr(), 1, 42), WsStatus::Ok);
    }
    let text = std::fs::read_to_string(dir.path().join("fidelity_ground.csv")).unwrap();
    assert!(text.starts_with("time_per_kappa,mean_fidelity,stderr,n_effective\n"));
    let prov = std::fs::read_to_string(dir.path().join("provenance.toml")).unwrap();
    assert!(prov.contains("master_seed = 42"));

    let bad = CString::new("n_trajectories = 0").unwrap();
    unsafe {
        assert_eq!(ws_experiment_run_toml(bad.as_ptr(), 0, 0), WsStatus::Config);
    }
    let missing = CString::new("/nonexistent/config.toml").unwrap();
    unsafe {
        assert_eq!(ws_experiment_run_file(missing.as_ptr()), WsStatus::Io);
    }
    assert!(last_error().contains("/nonexistent/config.toml"));
}
