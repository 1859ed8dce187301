//! Shared generators and the brute-force two-interface oracle.
#![allow(dead_code)]

use iface::classify::Thresholds;
use iface::linalg::Quad2;
use iface::symplectic::{random_local, random_spec_of, Class, Interface, StandardSpec};
use iface::Component;
use rand::Rng;
use std::f64::consts::PI;

pub fn th() -> Thresholds {
    Thresholds::default()
}

pub const ACTIVE: [Class; 5] = [Class::Bs, Class::Tms, Class::Stms, Class::Qndi, Class::Sqndi];

/// Standard gate of `class` dressed with random local controls.
pub fn dressed_component<R: Rng>(rng: &mut R, id: &str, spec: StandardSpec, max_ln: f64) -> Component {
    let t = random_local(rng, max_ln).interface() * spec.matrix() * random_local(rng, max_ln).interface();
    Component::new(id, t, &th()).expect("dressed standard gates classify")
}

pub fn random_component<R: Rng>(rng: &mut R, id: &str, class: Class, max_ln: f64) -> Component {
    let spec = random_spec_of(rng, class);
    dressed_component(rng, id, spec, max_ln)
}

pub fn random_active<R: Rng>(rng: &mut R, id: &str, max_ln: f64) -> Component {
    let class = ACTIVE[rng.gen_range(0..ACTIVE.len())];
    random_component(rng, id, class, max_ln)
}

/// `Ū_b · [R₁(φ₁) S₁(γ) R₁(ε) ⊕ R₂(φ₂)] · Ū_a` with `x = (ln γ, φ₁, ε, φ₂)`.
pub fn configuration(a: &Interface, b: &Interface, x: [f64; 4]) -> Interface {
    let m1 = Quad2::rotation(x[1]) * Quad2::squeeze(x[0].exp()) * Quad2::rotation(x[2]);
    *b * Interface::local(m1, Quad2::rotation(x[3])) * *a
}

/// Distance of a cascade from the Identity class (‖T²¹‖) or the SWAP class (‖T²²‖).
pub fn class_distance(t: &Interface, target: Class) -> f64 {
    match target {
        Class::Identity => t.t21().max_abs(),
        Class::Swap => t.t22().max_abs(),
        _ => panic!("oracle covers Identity and SWAP only"),
    }
}

fn nelder_mead(f: &dyn Fn([f64; 4]) -> f64, start: [f64; 4], step: f64, iters: usize) -> ([f64; 4], f64) {
    let mut pts: Vec<([f64; 4], f64)> = (0..5)
        .map(|k| {
            let mut p = start;
            if k > 0 {
                p[k - 1] += step;
            }
            (p, f(p))
        })
        .collect();
    for _ in 0..iters {
        pts.sort_by(|x, y| x.1.total_cmp(&y.1));
        let mut c = [0.0; 4];
        for (p, _) in &pts[..4] {
            for i in 0..4 {
                c[i] += p[i] / 4.0;
            }
        }
        let along = |t: f64| {
            let mut p = [0.0; 4];
            for i in 0..4 {
                p[i] = c[i] + t * (pts[4].0[i] - c[i]);
            }
            p
        };
        let r = along(-1.0);
        let fr = f(r);
        if fr < pts[0].1 {
            let e = along(-2.0);
            let fe = f(e);
            pts[4] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < pts[3].1 {
            pts[4] = (r, fr);
        } else {
            let k = along(0.5);
            let fk = f(k);
            if fk < pts[4].1 {
                pts[4] = (k, fk);
            } else {
                let best = pts[0].0;
                for p in pts.iter_mut().skip(1) {
                    for i in 0..4 {
                        p.0[i] = best[i] + 0.5 * (p.0[i] - best[i]);
                    }
                    p.1 = f(p.0);
                }
            }
        }
    }
    pts.sort_by(|x, y| x.1.total_cmp(&y.1));
    pts[0]
}

/// Minimum class distance over a 50×50×50 grid in (ln γ, φ₁, φ₂) times 8 values of ε,
/// refined by Nelder–Mead from the best grid points.
pub fn grid_floor(a: &StandardSpec, b: &StandardSpec, target: Class) -> f64 {
    let (ma, mb) = (a.matrix(), b.matrix());
    let f = |x: [f64; 4]| class_distance(&configuration(&ma, &mb, x), target);
    let n = 50;
    let mut best: Vec<([f64; 4], f64)> = Vec::new();
    for i in 0..n {
        let lg = -3.0 + 6.0 * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let p1 = 2.0 * PI * j as f64 / n as f64;
            for k in 0..n {
                let p2 = 2.0 * PI * k as f64 / n as f64;
                for e in 0..8 {
                    let x = [lg, p1, PI * e as f64 / 8.0, p2];
                    let v = f(x);
                    if best.len() < 12 || v < best[best.len() - 1].1 {
                        best.push((x, v));
                        best.sort_by(|p, q| p.1.total_cmp(&q.1));
                        best.truncate(12);
                    }
                }
            }
        }
    }
    best.iter()
        .map(|(x, _)| nelder_mead(&f, *x, 0.1, 1500).1)
        .fold(f64::INFINITY, f64::min)
}
