#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use polar_recover::complement::{Complement, HorizonSpec};
use polar_recover::polar::PolarSpace;

/// Built spaces are shared between the tests of one binary.
pub fn space(desc: &str) -> Arc<PolarSpace> {
    static CACHE: OnceLock<Mutex<HashMap<String, Arc<PolarSpace>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(ps) = cache.lock().unwrap().get(desc) {
        return ps.clone();
    }
    let ps = Arc::new(PolarSpace::from_descriptor(desc).unwrap());
    cache.lock().unwrap().insert(desc.to_string(), ps.clone());
    ps
}

pub fn complement(desc: &str, horizon: &str) -> Complement {
    let ps = space(desc);
    let spec: HorizonSpec = horizon.parse().unwrap();
    let w = spec.resolve(&ps).unwrap();
    Complement::build(ps, w).unwrap()
}

/// First point other than `a` that is (or is not) collinear with `a`.
pub fn partner(ps: &PolarSpace, a: usize, collinear: bool) -> usize {
    let s = ps.structure();
    (0..s.n_points()).find(|&b| b != a && s.collinear(a, b) == collinear).unwrap()
}
