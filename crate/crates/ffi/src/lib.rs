//! C ABI over `swig-core`.
//!
//! Objects cross the boundary as opaque handles released by their `_free`
//! function. Every fallible call returns a [`SwigStatus`]; on failure the
//! message is available from [`swig_last_error`] on the same thread. Strings
//! returned through `char **` are owned by the caller and released with
//! [`swig_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use swig_core::cli::{parse_separation, parse_treatment};
use swig_core::identify::{identify, Identification};
use swig_core::oracle::{Coupling, DiscreteScm};
use swig_core::query::CounterfactualQuery;
use swig_core::swig::build_swig;
use swig_core::verify::{random_models, verify, VerifyOutcome};
use swig_core::{Admg, Error, Guards};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwigStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Graph = 4,
    Query = 5,
    Model = 6,
    Guard = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwigFormat {
    Text = 0,
    Machine = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwigCoupling {
    Independent = 0,
    Comonotone = 1,
}

/// Acyclic directed mixed graph.
pub struct SwigGraph(Admg);

/// Discrete structural model.
pub struct SwigModel(DiscreteScm);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SwigStatus {
    match e {
        Error::Parse { .. } => SwigStatus::Parse,
        Error::Cycle(_)
        | Error::UnknownVertex(_)
        | Error::Duplicate(_)
        | Error::SelfLoop(_)
        | Error::BidirectedWithHidden(..)
        | Error::HiddenVertex(_)
        | Error::Graph(_) => SwigStatus::Graph,
        Error::Guard { .. } => SwigStatus::Guard,
        Error::Model(_) | Error::Positivity(_) => SwigStatus::Model,
        Error::Query(_)
        | Error::Separation(_)
        | Error::Intervention(_)
        | Error::Context(_)
        | Error::Estimand(_) => SwigStatus::Query,
    }
}

struct Fail(SwigStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guarded(f: impl FnOnce() -> Result<(), Fail>) -> SwigStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SwigStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            SwigStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(SwigStatus::NullPointer, format!("null pointer: {what}"))
}

unsafe fn cstr<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SwigStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(SwigStatus::Query, "output contains NUL".into()))?;
    put(out, c.into_raw(), "out")
}

/// Message of the last failed call on this thread; empty after success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn swig_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned through a `char **` out parameter.
#[no_mangle]
pub unsafe extern "C" fn swig_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a graph in the text format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swig_graph_parse(text: *const c_char, out: *mut *mut SwigGraph) -> SwigStatus {
    guarded(|| {
        let g = Admg::parse(cstr(text, "text")?)?;
        put(out, Box::into_raw(Box::new(SwigGraph(g))), "out")
    })
}

/// # Safety
/// `g` must be null or a handle from this library, released once.
#[no_mangle]
pub unsafe extern "C" fn swig_graph_free(g: *mut SwigGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Canonical text of the graph.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swig_graph_render(g: *const SwigGraph, out: *mut *mut c_char) -> SwigStatus {
    guarded(|| put_string(out, handle(g, "graph")?.0.render()))
}

/// Number of declared vertices, hidden ones included.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swig_graph_vertex_count(g: *const SwigGraph, out: *mut usize) -> SwigStatus {
    guarded(|| put(out, handle(g, "graph")?.0.len(), "out"))
}

/// Latent projection onto the observed vertices, as a new handle.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swig_graph_project(g: *const SwigGraph, out: *mut *mut SwigGraph) -> SwigStatus {
    guarded(|| {
        let p = handle(g, "graph")?.0.observed_projection();
        put(out, Box::into_raw(Box::new(SwigGraph(p))), "out")
    })
}

/// Separation in the SWIG of `treatment` (`"A=a,M=1"`, may be empty) for a
/// query such as `"Y(a) _||_ A | C"`.
///
/// # Safety
/// Strings must be NUL-terminated; `g` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn swig_separated(
    g: *const SwigGraph,
    treatment: *const c_char,
    query: *const c_char,
    out: *mut bool,
) -> SwigStatus {
    guarded(|| {
        let g = &handle(g, "graph")?.0;
        let sw = build_swig(g, &parse_treatment(g, cstr(treatment, "treatment")?)?, None)?;
        let q = parse_separation(&sw, g, cstr(query, "query")?)?;
        put(out, sw.separated(&q)?.verdict.separated, "out")
    })
}

/// Identifies a counterfactual query. On success `identified` tells whether
/// `out` holds an estimand or a hedge witness.
///
/// # Safety
/// `query` must be NUL-terminated; `g` live; `identified` and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn swig_identify(
    g: *const SwigGraph,
    query: *const c_char,
    format: SwigFormat,
    identified: *mut bool,
    out: *mut *mut c_char,
) -> SwigStatus {
    guarded(|| {
        let g = &handle(g, "graph")?.0;
        let q = CounterfactualQuery::parse(cstr(query, "query")?, g)?;
        let (ok, s) = match identify(g, &q)? {
            Identification::Identified(e) => (
                true,
                match format {
                    SwigFormat::Text => e.to_string(),
                    SwigFormat::Machine => e.render_machine(),
                },
            ),
            Identification::NotIdentified(h) => {
                let names = |s: &swig_core::VSet| s.iter().map(|&v| g.name(v)).collect::<Vec<_>>().join(" ");
                let s = match format {
                    SwigFormat::Text => h.render(g),
                    SwigFormat::Machine => format!(
                        "(witness (inner {}) (outer {}) (district {}))",
                        names(&h.inner),
                        names(&h.outer),
                        names(&h.district)
                    ),
                };
                (false, s)
            }
        };
        if identified.is_null() {
            return Err(null("identified"));
        }
        put_string(out, s)?;
        identified.write(ok);
        Ok(())
    })
}

/// Parses a structural model in the text format.
///
/// # Safety
/// `text` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn swig_model_parse(text: *const c_char, out: *mut *mut SwigModel) -> SwigStatus {
    guarded(|| {
        let m = DiscreteScm::parse(cstr(text, "text")?)?;
        put(out, Box::into_raw(Box::new(SwigModel(m))), "out")
    })
}

/// Random model on the canonical DAG of `g`, seeded.
///
/// # Safety
/// `g` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn swig_model_random(g: *const SwigGraph, seed: u64, out: *mut *mut SwigModel) -> SwigStatus {
    guarded(|| {
        let g = &handle(g, "graph")?.0;
        let m = random_models(g, 1, seed)?.remove(0);
        put(out, Box::into_raw(Box::new(SwigModel(m))), "out")
    })
}

/// # Safety
/// `m` must be null or a handle from this library, released once.
#[no_mangle]
pub unsafe extern "C" fn swig_model_free(m: *mut SwigModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Text of the model, parseable by [`swig_model_parse`].
///
/// # Safety
/// `m` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn swig_model_render(m: *const SwigModel, out: *mut *mut c_char) -> SwigStatus {
    guarded(|| put_string(out, handle(m, "model")?.0.render()))
}

/// Identifies `query` and compares the estimand with the exact oracle of
/// each model. `identified` is false when the query has a hedge, in which
/// case `max_abs_error` is left untouched.
///
/// # Safety
/// `models` must point to `n_models` live handles; other pointers as above.
#[no_mangle]
pub unsafe extern "C" fn swig_verify(
    g: *const SwigGraph,
    query: *const c_char,
    models: *const *const SwigModel,
    n_models: usize,
    coupling: SwigCoupling,
    identified: *mut bool,
    max_abs_error: *mut f64,
) -> SwigStatus {
    guarded(|| {
        let g = &handle(g, "graph")?.0;
        let q = CounterfactualQuery::parse(cstr(query, "query")?, g)?;
        if models.is_null() && n_models > 0 {
            return Err(null("models"));
        }
        let mut scms = Vec::with_capacity(n_models);
        for i in 0..n_models {
            scms.push(handle(*models.add(i), "model")?.0.clone());
        }
        if identified.is_null() || max_abs_error.is_null() {
            return Err(null("out"));
        }
        let c = match coupling {
            SwigCoupling::Independent => Coupling::Independent,
            SwigCoupling::Comonotone => Coupling::Comonotone,
        };
        match verify(g, &q, &scms, c, &Guards::default())? {
            VerifyOutcome::Verified(r) => {
                identified.write(true);
                max_abs_error.write(r.max_abs_error);
            }
            VerifyOutcome::NotIdentified(_) => identified.write(false),
        }
        Ok(())
    })
}

/// Version string of the library; static, not to be freed.
#[no_mangle]
pub extern "C" fn swig_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses_group_errors() {
        assert_eq!(status_of(&Error::Parse { line: 1, msg: String::new() }), SwigStatus::Parse);
        assert_eq!(status_of(&Error::Cycle("A".into())), SwigStatus::Graph);
        assert_eq!(status_of(&Error::Query(String::new())), SwigStatus::Query);
        assert_eq!(
            status_of(&Error::Guard { what: "x", size: 2, limit: 1 }),
            SwigStatus::Guard
        );
        assert_eq!(status_of(&Error::Positivity("p(a)".into())), SwigStatus::Model);
    }

    #[test]
    fn panics_become_a_status() {
        let s = guarded(|| panic!("boom"));
        assert_eq!(s, SwigStatus::Panic);
        let msg = unsafe { CStr::from_ptr(swig_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }
}
