use singquad::experiments::{cmd_solve_radiation, radiation_error, sphere_source, MeshSource, RadiationStudy};
use singquad::geometry::{generate_sphere_mesh, write_mesh};
use singquad::nystrom::{assemble, AssemblyConfig, Formulation};
use singquad::{Error, QuadConfig, Variant};

#[test]
fn sphere_errors_decrease_with_refinement() {
    let study = RadiationStudy {
        levels: 1,
        quad: QuadConfig::new(Variant::PresentA, 4, 3).with_m(2.5),
        ..RadiationStudy::default()
    };
    let rows = cmd_solve_radiation(&study).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0].elements, rows[0].unknowns), (20, 120));
    assert_eq!((rows[1].elements, rows[1].unknowns), (80, 480));
    assert!(rows[1].l2_error < 0.25 * rows[0].l2_error, "{rows:?}");
    assert!(rows.iter().all(|r| r.assembly_seconds > 0.0 && r.solve_seconds >= 0.0));
}

#[test]
fn mesh_file_runs_like_the_builtin_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sphere.qmesh");
    write_mesh(&generate_sphere_mesh(0), &path).unwrap();
    let study = RadiationStudy {
        mesh: MeshSource::File(path),
        ..RadiationStudy::default()
    };
    let rows = cmd_solve_radiation(&study).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].l2_error < 5e-2);
}

#[test]
fn cbie_and_burton_miller_agree_away_from_resonance() {
    let mesh = generate_sphere_mesh(0);
    let quad = QuadConfig::new(Variant::PresentA, 4, 3).with_m(2.5);
    let bm = radiation_error(
        &mesh,
        0,
        sphere_source(),
        1.0,
        &AssemblyConfig::new(Formulation::BurtonMiller, quad),
    )
    .unwrap();
    let cbie = radiation_error(
        &mesh,
        0,
        sphere_source(),
        1.0,
        &AssemblyConfig::new(Formulation::Cbie, quad),
    )
    .unwrap();
    assert!(bm.l2_error < 3e-2 && cbie.l2_error < 3e-2, "{bm:?} {cbie:?}");
}

#[test]
fn burton_miller_rejects_zero_wavenumber() {
    let err = assemble(&generate_sphere_mesh(0), 0.0, &AssemblyConfig::default()).unwrap_err();
    assert!(matches!(err, Error::Parameter(_)));
}
