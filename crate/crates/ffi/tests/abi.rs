use std::ffi::CStr;
use std::ptr;

use lagerstrom_ffi::*;

fn last_error() -> String {
    let p = lg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(lg_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn special_functions_and_errors() {
    let mut x = 0.0;
    assert_eq!(unsafe { lg_exp_integral(1.0, 1.0, &mut x) }, LgStatus::Ok);
    assert!((x - 0.219_383_934_395_520_3).abs() < 1e-14);
    assert!(lg_last_error_message().is_null());
    assert_eq!(unsafe { lg_integral_of_e(2.0, 1.0, &mut x) }, LgStatus::Ok);
    let expected = lagerstrom::specfun::integral_of_e(2.0, 1.0).unwrap();
    assert_eq!(x, expected);

    assert_eq!(unsafe { lg_exp_integral(1.0, -1.0, &mut x) }, LgStatus::Domain);
    assert!(last_error().contains("domain"));
    assert_eq!(
        unsafe { lg_exp_integral(1.0, 1.0, ptr::null_mut()) },
        LgStatus::NullPointer
    );
    assert_eq!(unsafe { lg_c_asym(4, 0, 0.01, 3, &mut x) }, LgStatus::Unsupported);
    assert_eq!(unsafe { lg_c_asym(3, 0, 0.01, 3, &mut x) }, LgStatus::Ok);
    assert!((x - 1.070_559_1).abs() < 1e-6);
}

#[test]
fn shooting_and_integral_equation_agree() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(lg_model_new_constant_k(3.0, 0.0, 0.1, &mut model), LgStatus::Ok);

        let mut shot = ptr::null_mut();
        assert_eq!(lg_shoot(model, 1e-8, &mut shot), LgStatus::Ok);
        let len = lg_shoot_len(shot);
        assert!(len > 10);
        let mut u = vec![0.0; len];
        assert_eq!(
            lg_shoot_column(shot, LgShootColumn::U, u.as_mut_ptr(), len),
            LgStatus::Ok
        );
        assert!(u.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(
            lg_shoot_column(shot, LgShootColumn::R, u.as_mut_ptr(), len - 1),
            LgStatus::BufferTooSmall
        );
        let mut c_shoot = 0.0;
        assert_eq!(lg_shoot_big_c(shot, &mut c_shoot), LgStatus::Ok);

        let mut c_ie = 0.0;
        let mut prof = ptr::null_mut();
        assert_eq!(lg_solve_c(model, &mut c_ie, &mut prof), LgStatus::Ok);
        assert!((c_shoot - c_ie).abs() <= 1e-6 * c_ie, "{c_shoot} vs {c_ie}");
        let n = lg_rescaled_len(prof);
        let mut rho = vec![0.0; n];
        assert_eq!(
            lg_rescaled_column(prof, LgRescaledColumn::Rho, rho.as_mut_ptr(), n),
            LgStatus::Ok
        );
        assert!((rho[0] - 0.1).abs() < 1e-12);

        lg_rescaled_free(prof);
        lg_shoot_free(shot);
        lg_model_free(model);
        lg_model_free(ptr::null_mut());
    }
}

#[test]
fn tabulated_model_matches_constant_k() {
    let u: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
    let f = vec![1.0; u.len()];
    unsafe {
        let mut table = ptr::null_mut();
        assert_eq!(
            lg_model_new_table(2.0, 0.05, u.as_ptr(), f.as_ptr(), u.len(), &mut table),
            LgStatus::Ok
        );
        let mut constant = ptr::null_mut();
        assert_eq!(lg_model_new_constant_k(2.0, 1.0, 0.05, &mut constant), LgStatus::Ok);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(lg_solve_c(table, &mut a, ptr::null_mut()), LgStatus::Ok);
        assert_eq!(lg_solve_c(constant, &mut b, ptr::null_mut()), LgStatus::Ok);
        assert!((a - b).abs() <= 1e-9 * b);
        lg_model_free(table);
        lg_model_free(constant);

        let bad = vec![-1.0; u.len()];
        let mut out = ptr::null_mut();
        assert_eq!(
            lg_model_new_table(2.0, 0.05, u.as_ptr(), bad.as_ptr(), u.len(), &mut out),
            LgStatus::Domain
        );
        assert!(out.is_null());
    }
}

#[test]
fn n_below_two_is_rejected_by_integral_equation() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(lg_model_new_constant_k(1.5, 0.0, 0.1, &mut model), LgStatus::Ok);
        let mut c = 0.0;
        assert_eq!(lg_solve_c(model, &mut c, ptr::null_mut()), LgStatus::Unsupported);
        assert!(!last_error().is_empty());
        lg_model_free(model);
    }
}

#[test]
fn last_error_is_thread_local() {
    let mut x = 0.0;
    assert_eq!(unsafe { lg_exp_integral(1.0, -1.0, &mut x) }, LgStatus::Domain);
    std::thread::spawn(|| assert!(lg_last_error_message().is_null()))
        .join()
        .unwrap();
    assert!(!lg_last_error_message().is_null());
}
