use std::ffi::CStr;
use std::ptr;

use vgarrote::generators::{example1, gen_instance};
use vgarrote::{fit, Dataset, FitOptions};
use vgarrote_ffi::*;

fn row_major(d: &Dataset) -> Vec<f64> {
    d.x().transpose().as_slice().to_vec()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(vg_last_error()) }.to_string_lossy().into_owned()
}

fn fitted(seed: u64) -> (*mut VgModel, vgarrote::generators::GeneratedInstance) {
    let inst = gen_instance(&example1(seed)).unwrap();
    let (xt, xv) = (row_major(&inst.train), row_major(&inst.val));
    let mut model = ptr::null_mut();
    let status = unsafe {
        vg_fit(
            xt.as_ptr(),
            inst.train.y().as_ptr(),
            inst.train.p(),
            xv.as_ptr(),
            inst.val.y().as_ptr(),
            inst.val.p(),
            inst.train.n(),
            ptr::null(),
            &mut model,
        )
    };
    assert_eq!(status, VgStatus::Ok, "{}", last_error());
    assert!(!model.is_null());
    (model, inst)
}

#[test]
fn fit_and_predict_match_library() {
    let (model, inst) = fitted(4);
    let direct = fit(&inst.train, &inst.val, &FitOptions::default()).unwrap();

    let mut n = 0usize;
    assert_eq!(unsafe { vg_model_num_features(model, &mut n) }, VgStatus::Ok);
    assert_eq!(n, 100);

    let mut v = vec![0.0; n];
    assert_eq!(unsafe { vg_model_vector(model, VgVector::Coefficients, v.as_mut_ptr(), n) }, VgStatus::Ok);
    assert_eq!(v.as_slice(), direct.best.v().as_slice());

    let xs = row_major(&inst.test);
    let mut pred = vec![0.0; inst.test.p()];
    let status = unsafe { vg_predict(model, xs.as_ptr(), inst.test.p(), n, pred.as_mut_ptr()) };
    assert_eq!(status, VgStatus::Ok);
    assert_eq!(pred.as_slice(), direct.predict(inst.test.x()).unwrap().as_slice());

    let mut summary = VgModelSummary::default();
    assert_eq!(unsafe { vg_model_summary(model, &mut summary) }, VgStatus::Ok);
    assert_eq!(summary.gamma, direct.best.gamma);
    assert_eq!(summary.nonzero, direct.best.nonzero());
    assert!(last_error().is_empty());
    unsafe { vg_model_free(model) };
}

#[test]
fn errors_are_reported() {
    let (model, _) = fitted(5);
    let mut small = [0.0; 3];
    let status = unsafe { vg_model_vector(model, VgVector::Inclusion, small.as_mut_ptr(), small.len()) };
    assert_eq!(status, VgStatus::BufferTooSmall);
    assert!(last_error().contains("need 100"));

    let x = [0.0; 10];
    let mut out = [0.0; 2];
    assert_eq!(unsafe { vg_predict(model, x.as_ptr(), 2, 5, out.as_mut_ptr()) }, VgStatus::InvalidData);
    assert_eq!(unsafe { vg_predict(ptr::null(), x.as_ptr(), 2, 5, out.as_mut_ptr()) }, VgStatus::NullPointer);
    unsafe { vg_model_free(model) };
    unsafe { vg_model_free(ptr::null_mut()) };

    let mut handle = ptr::null_mut();
    let y = [1.0, f64::NAN];
    let xs = [1.0, 2.0];
    let status = unsafe { vg_fit(xs.as_ptr(), y.as_ptr(), 2, xs.as_ptr(), y.as_ptr(), 2, 1, ptr::null(), &mut handle) };
    assert_eq!(status, VgStatus::InvalidData);
    assert!(handle.is_null());
    assert!(!last_error().is_empty());

    let mut opts = vg_fit_options_default();
    opts.tol = -1.0;
    let y = [1.0, 2.0, 3.0];
    let xs = [1.0, 0.0, 3.0];
    let status = unsafe { vg_fit(xs.as_ptr(), y.as_ptr(), 3, xs.as_ptr(), y.as_ptr(), 3, 1, &opts, &mut handle) };
    assert_eq!(status, VgStatus::InvalidArgument);
    let status = unsafe { vg_fit(ptr::null(), y.as_ptr(), 3, xs.as_ptr(), y.as_ptr(), 3, 1, ptr::null(), &mut handle) };
    assert_eq!(status, VgStatus::NullPointer);
}

#[test]
fn phase_quantities() {
    assert!((vg_rho_star(100, 0.0) - 0.04 * (51.0_f64.sqrt() - 1.0)).abs() < 1e-15);
    assert!((vg_gamma_star(200, 0.0) + 20.0).abs() < 1e-12);
    let (mut lo, mut hi) = (0.0, 0.0);
    assert_eq!(unsafe { vg_bistable_gamma_range(0.5, 100, 0.0, &mut lo, &mut hi) }, VgStatus::Ok);
    assert!(lo < hi && hi < 0.0);
    assert_eq!(unsafe { vg_bistable_gamma_range(0.1, 100, 0.0, &mut lo, &mut hi) }, VgStatus::InvalidArgument);
    assert!(last_error().contains("rho*"));
}
