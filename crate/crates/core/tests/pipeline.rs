//! End-to-end checks through the public API: mesh, forms, DtN operator,
//! spectrum, semigroup and Robin solves working together.

use dtnlab::assembly::{interpolate, Forms};
use dtnlab::dtn::{build_dtn, build_dtn_with, harmonic_extension, weak_normal_derivative, DtnMode};
use dtnlab::mesh::io::{mesh_from_str, mesh_to_string};
use dtnlab::mesh::{build_domain, bundled, DomainSpec, Mesh};
use dtnlab::robin::{robin_boundary_defect, robin_solve};
use dtnlab::semigroup::SpectralSemigroup;
use dtnlab::spectral::{steklov_spectrum, steklov_spectrum_with, EigenOptions};
use dtnlab::{Real, DD};
use proptest::prelude::*;

fn setup<T: Real>(spec: &DomainSpec, h: f64) -> (Mesh<T>, Forms<T>) {
    let mesh = build_domain(spec, h).unwrap();
    let forms = Forms::new(&mesh).unwrap();
    (mesh, forms)
}

#[test]
fn bundled_meshes_round_trip_through_text() {
    for d in bundled() {
        let m: Mesh<f64> = build_domain(&d.spec, d.h).unwrap();
        let text = mesh_to_string(&m);
        let back: Mesh<f64> = mesh_from_str(&text).unwrap();
        assert_eq!(mesh_to_string(&back), text, "{}", d.name);
        assert_eq!(back.vertices, m.vertices, "{}", d.name);
        assert_eq!(back.triangles, m.triangles, "{}", d.name);
    }
}

#[test]
fn double_double_agrees_with_f64_on_a_short_comb() {
    let spec = DomainSpec::Comb { teeth: 4 };
    let (m64, f64_forms) = setup::<f64>(&spec, 0.125);
    let (mdd, dd_forms) = setup::<DD>(&spec, 0.125);
    let a = steklov_spectrum(&build_dtn(&m64, &f64_forms.k, &f64_forms.b).unwrap(), 6).unwrap();
    let op = build_dtn_with(&mdd, &dd_forms.k, &dd_forms.b, DtnMode::ApplyOnly).unwrap();
    let b = steklov_spectrum(&op, 6).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues).skip(1) {
        assert!((x - y).abs() <= 1e-8 * x, "{x} vs {y}");
    }
}

#[test]
fn dense_and_iterative_routes_agree_on_the_tooth() {
    let (mesh, forms) = setup::<f64>(&DomainSpec::Tooth { a: 0.5 }, 0.03125);
    let op = build_dtn(&mesh, &forms.k, &forms.b).unwrap();
    let d = steklov_spectrum_with(&op, 10, &EigenOptions::dense()).unwrap();
    let i = steklov_spectrum_with(&op, 10, &EigenOptions::iterative()).unwrap();
    for (x, y) in d.eigenvalues.iter().zip(&i.eigenvalues) {
        assert!((x - y).abs() <= 1e-8 * x.max(1.0), "{x} vs {y}");
    }
}

#[test]
fn evolved_field_conserves_boundary_mass_and_relaxes() {
    let (mesh, forms) = setup::<f64>(&DomainSpec::Tooth { a: 1.0 }, 0.125);
    let op = build_dtn(&mesh, &forms.k, &forms.b).unwrap();
    let sg = SpectralSemigroup::new(&op, steklov_spectrum(&op, op.dim()).unwrap()).unwrap();
    let phi: Vec<f64> = op.boundary.iter().map(|&i| mesh.vertices[i].x * mesh.vertices[i].y).collect();
    let p = sg.equilibrium();
    let mean = p.mean(&phi);
    let mut last = f64::INFINITY;
    for t in [0.0, 0.5, 2.0, 8.0] {
        let u = sg.evolve(t, &phi).unwrap();
        assert!((p.mean(&u) - mean).abs() < 1e-12);
        let gap: Vec<f64> = u.iter().map(|x| x - mean).collect();
        let g = sg.b_norm(&gap);
        assert!(g <= last);
        last = g;
    }
}

#[test]
fn robin_solution_satisfies_its_boundary_condition() {
    let (mesh, forms) = setup::<f64>(&DomainSpec::unit_square(), 0.0625);
    let f = interpolate(&mesh, |x, y| 1.0 + x * y);
    for beta in [0.5, 2.0, 10.0] {
        let s = robin_solve(&forms.k, &forms.m, &forms.b, beta, &f, None).unwrap();
        let src = s.effective_source(&f);
        let defect = robin_boundary_defect(&mesh, &forms, beta, &s.u, &src).unwrap();
        assert!(defect < 1e-10, "beta {beta}: {defect}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // Green's identity for the harmonic extension: the weak normal
    // derivative of the extension of φ is B⁻¹Sφ.
    #[test]
    fn weak_normal_derivative_of_extension_is_dtn(seed in 0u64..1000, a in 0.25f64..1.0) {
        let (mesh, forms) = setup::<f64>(&DomainSpec::Tooth { a }, a / 8.0);
        let op = build_dtn(&mesh, &forms.k, &forms.b).unwrap();
        let phi: Vec<f64> = (0..op.dim())
            .map(|i| ((i as u64 * 2654435761 + seed) % 1000) as f64 / 500.0 - 1.0)
            .collect();
        let u = harmonic_extension(&mesh, &forms.k, &phi).unwrap();
        let psi = weak_normal_derivative(&mesh, &forms.k, &forms.m, &forms.b, &u, &vec![0.0; u.len()]).unwrap();
        let d = op.apply(&phi);
        let scale = d.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for (x, y) in psi.iter().zip(&d) {
            prop_assert!((x - y).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn rectangle_spectrum_scales_inversely_with_size(s in 0.5f64..2.0) {
        let base = DomainSpec::Rectangle { width: 1.0, height: 0.5 };
        let scaled = DomainSpec::Rectangle { width: s, height: 0.5 * s };
        let (m1, f1) = setup::<f64>(&base, 0.125);
        let (m2, f2) = setup::<f64>(&scaled, 0.125 * s);
        let a = steklov_spectrum(&build_dtn(&m1, &f1.k, &f1.b).unwrap(), 5).unwrap();
        let b = steklov_spectrum(&build_dtn(&m2, &f2.k, &f2.b).unwrap(), 5).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues).skip(1) {
            prop_assert!((x / s - y).abs() <= 1e-9 * x, "{} vs {}", x / s, y);
        }
    }
}
