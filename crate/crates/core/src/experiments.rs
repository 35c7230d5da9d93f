//! Studies behind the command-line driver: convergence of the singular
//! integrals on the cylinder element, the aspect-ratio search, the sphere
//! radiation problem and the self-test.
//!
//! Every study returns typed rows; [`to_csv`] renders them with the fixed
//! headers below.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::Polynomial;
use crate::error::{Error, Result};
use crate::expansion::{subtraction_residual, ExpansionTerms, LocalGeometry};
use crate::geometry::{
    generate_sphere_mesh, make_cylinder_element, random_curved_element, read_mesh, shape_derivatives, shape_functions,
    CurvedElement, SurfaceMesh, Vec3, NODE_COORDS,
};
use crate::kernels::{green, layer_kernels, KernelSpec, LayerOperator};
use crate::nystrom::{
    l2_surface_error, nystrom_nodes, solve_neumann_radiation, AssemblyConfig, CorrectionBasis, Formulation,
    ManufacturedSolution,
};
use crate::polar_frame::{a_of_theta, decompose_triangle, sigmoid, AngularMap, ConformalMap};
use crate::quadrature::{monomial_triangle_integral, GaussLegendre, TriangleRule};
use crate::singular_quad::{
    build_frame, frame_expansion_terms, i2_analytic, i2_numeric, integrate_singular, reference_value, QuadConfig,
    Variant, COMMON_M,
};

/// Field points of the convergence studies, in intrinsic coordinates.
pub const FIELD_POINTS: [(&str, [f64; 2]); 4] = [
    ("a", [0.3, 0.3]),
    ("b", [0.1, 0.8]),
    ("c", [0.45, 0.45]),
    ("d", [0.64, 0.31]),
];

/// Relative error the aspect-ratio search aims for.
pub const TARGET_ERROR: f64 = 1e-8;

/// Largest angular point count tried by the aspect-ratio search.
pub const N_CAP: usize = 256;

pub fn field_point(label: &str) -> Result<[f64; 2]> {
    let label = label.trim().trim_start_matches('(').trim_end_matches(')');
    FIELD_POINTS
        .iter()
        .find(|(l, _)| l.eq_ignore_ascii_case(label))
        .map(|(_, xi)| *xi)
        .ok_or_else(|| Error::Parameter(format!("unknown field point `{label}` (expected a, b, c or d)")))
}

/// Density integrated in the element studies.
pub fn study_basis() -> Polynomial {
    Polynomial::monomial(0, 2)
}

/// Manufactured source used with the built-in sphere.
pub fn sphere_source() -> Vec3 {
    Vec3::new(0.2, 0.1, -0.15)
}

fn rel_error(value: Complex64, reference: Complex64) -> f64 {
    (value - reference).norm() / reference.norm()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec {
    pub name: String,
    /// Axial stretch of the cylinder element. Convergence uses exactly one.
    pub s: Vec<f64>,
    pub field_points: Vec<String>,
    pub kernels: Vec<LayerOperator>,
    pub variants: Vec<Variant>,
    pub n_sweep: Vec<usize>,
    pub n_radial: usize,
    pub k: f64,
    pub m: Option<f64>,
    pub out: Option<PathBuf>,
}

impl StudySpec {
    pub fn convergence() -> Self {
        StudySpec {
            name: "convergence".into(),
            s: vec![0.5],
            field_points: FIELD_POINTS.iter().map(|(l, _)| l.to_string()).collect(),
            kernels: vec![LayerOperator::Single, LayerOperator::Hyper],
            variants: vec![Variant::Guiggiani, Variant::GuiSig, Variant::Present, Variant::PresentA],
            n_sweep: vec![4, 6, 8, 10, 12, 14, 16, 20],
            n_radial: 6,
            k: 0.0,
            m: None,
            out: None,
        }
    }

    pub fn aspect() -> Self {
        StudySpec {
            name: "aspect".into(),
            s: vec![0.5, 1.5, 2.0, 4.0, 10.0],
            field_points: vec!["a".into()],
            variants: vec![Variant::Guiggiani, Variant::Present, Variant::PresentA],
            n_sweep: Vec::new(),
            ..StudySpec::convergence()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.s.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Parameter("element stretch s must be positive".into()));
        }
        if self.kernels.is_empty() || self.variants.is_empty() || self.field_points.is_empty() {
            return Err(Error::Parameter(
                "study needs at least one kernel, variant and field point".into(),
            ));
        }
        if self.n_sweep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("n sweep must be strictly increasing".into()));
        }
        if self.n_sweep.first() == Some(&0) || self.n_radial == 0 {
            return Err(Error::Parameter("point counts must be positive".into()));
        }
        if !self.k.is_finite() || self.k < 0.0 {
            return Err(Error::Parameter(format!("wavenumber {} must be non-negative", self.k)));
        }
        for p in &self.field_points {
            field_point(p)?;
        }
        Ok(())
    }

    fn quad(&self, variant: Variant, n: usize) -> QuadConfig {
        let q = QuadConfig::new(variant, n, self.n_radial);
        match self.m {
            Some(m) => q.with_m(m),
            None => q,
        }
    }
}

/// One CSV row.
pub trait CsvRecord {
    const HEADER: &'static str;
    fn record(&self) -> String;
}

pub fn to_csv<R: CsvRecord>(rows: &[R]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(R::HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.record());
        out.push('\n');
    }
    out
}

/// Writes `text` to `path`, or to stdout without one.
pub fn write_output(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub variant: Variant,
    pub kernel: LayerOperator,
    pub field_point: String,
    pub n_angular: usize,
    pub rel_error: f64,
}

impl CsvRecord for ConvergenceRow {
    const HEADER: &'static str = "variant,kernel,field_point,n_angular,rel_error";
    fn record(&self) -> String {
        format!(
            "{},{},{},{},{:.6e}",
            self.variant, self.kernel, self.field_point, self.n_angular, self.rel_error
        )
    }
}

/// Relative error against [`reference_value`] for every variant, kernel,
/// field point and angular count, in that nesting order.
pub fn cmd_convergence(study: &StudySpec) -> Result<Vec<ConvergenceRow>> {
    study.validate()?;
    if study.s.len() != 1 || study.n_sweep.is_empty() {
        return Err(Error::Parameter(
            "convergence takes one s value and a non-empty n sweep".into(),
        ));
    }
    let element = make_cylinder_element(study.s[0]);
    let basis = study_basis();
    let refs: Vec<((LayerOperator, String), Complex64)> = study
        .kernels
        .iter()
        .flat_map(|&op| study.field_points.iter().map(move |p| (op, p.clone())))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(op, p)| {
            let r = reference_value(&element, field_point(&p)?, KernelSpec::new(op, study.k), &basis)?;
            Ok(((op, p), r))
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for &variant in &study.variants {
        for &kernel in &study.kernels {
            for p in &study.field_points {
                for &n in &study.n_sweep {
                    cells.push((variant, kernel, p.clone(), n));
                }
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(variant, kernel, p, n)| {
            let reference = refs.iter().find(|(key, _)| key.0 == kernel && key.1 == p).map(|x| x.1);
            let reference = reference.expect("reference computed for every kernel and point");
            let spec = KernelSpec::new(kernel, study.k);
            let r = integrate_singular(&element, field_point(&p)?, spec, &basis, &study.quad(variant, n))?;
            Ok(ConvergenceRow {
                variant,
                kernel,
                field_point: p,
                n_angular: n,
                rel_error: rel_error(r.value, reference),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AspectRow {
    pub s: f64,
    pub variant: Variant,
    pub kernel: LayerOperator,
    /// `None` when [`N_CAP`] points were not enough.
    pub n_needed: Option<usize>,
}

impl CsvRecord for AspectRow {
    const HEADER: &'static str = "s,variant,kernel,n_needed";
    fn record(&self) -> String {
        let n = match self.n_needed {
            Some(n) => n.to_string(),
            None => format!(">{N_CAP}"),
        };
        format!("{},{},{},{}", self.s, self.variant, self.kernel, n)
    }
}

/// Smallest `n` in `1..=cap` with `error(n) <= target`: doubling until the
/// target is met, then bisection between the last failure and the first
/// success.
pub fn minimal_points<F>(mut error: F, target: f64, cap: usize) -> Result<Option<usize>>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut lo = 0;
    let mut hi = 1;
    loop {
        if error(hi)? <= target {
            break;
        }
        if hi >= cap {
            return Ok(None);
        }
        lo = hi;
        hi = (2 * hi).min(cap);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if error(mid)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Minimal angular count for [`TARGET_ERROR`] for every stretch, variant and
/// kernel at the study's single field point.
pub fn cmd_aspect_ratio(study: &StudySpec) -> Result<Vec<AspectRow>> {
    study.validate()?;
    if study.field_points.len() != 1 {
        return Err(Error::Parameter("aspect study takes exactly one field point".into()));
    }
    let xi_s = field_point(&study.field_points[0])?;
    let basis = study_basis();
    let mut cells = Vec::new();
    for &s in &study.s {
        for &variant in &study.variants {
            for &kernel in &study.kernels {
                cells.push((s, variant, kernel));
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(s, variant, kernel)| {
            let element = make_cylinder_element(s);
            let spec = KernelSpec::new(kernel, study.k);
            let reference = reference_value(&element, xi_s, spec, &basis)?;
            let n_needed = minimal_points(
                |n| {
                    let r = integrate_singular(&element, xi_s, spec, &basis, &study.quad(variant, n))?;
                    Ok(rel_error(r.value, reference))
                },
                TARGET_ERROR,
                N_CAP,
            )?;
            Ok(AspectRow {
                s,
                variant,
                kernel,
                n_needed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    /// Refined icosahedron projected to the unit sphere, levels `0..=levels`.
    Sphere,
    /// A single mesh file; the source sits at the mean of its nodes.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiationStudy {
    pub mesh: MeshSource,
    pub k: f64,
    pub levels: u32,
    pub formulation: Formulation,
    pub quad: QuadConfig,
}

impl Default for RadiationStudy {
    fn default() -> Self {
        RadiationStudy {
            mesh: MeshSource::Sphere,
            k: 2.5,
            levels: 2,
            formulation: Formulation::BurtonMiller,
            quad: QuadConfig::new(Variant::Present, 4, 3).with_m(COMMON_M),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiationRow {
    pub level: u32,
    pub elements: usize,
    pub unknowns: usize,
    pub l2_error: f64,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
}

impl CsvRecord for RadiationRow {
    const HEADER: &'static str = "level,elements,unknowns,l2_error,assembly_seconds,solve_seconds";
    fn record(&self) -> String {
        format!(
            "{},{},{},{:.6e},{:.3},{:.3}",
            self.level, self.elements, self.unknowns, self.l2_error, self.assembly_seconds, self.solve_seconds
        )
    }
}

/// Manufactured exterior Neumann problem on one mesh.
pub fn radiation_error(
    mesh: &SurfaceMesh,
    level: u32,
    source: Vec3,
    k: f64,
    cfg: &AssemblyConfig,
) -> Result<RadiationRow> {
    let exact = ManufacturedSolution::new(source, k);
    let nodes = nystrom_nodes(mesh)?;
    let (u_exact, q) = exact.boundary_data(&nodes)?;
    let sol = solve_neumann_radiation(mesh, k, &q, cfg)?;
    Ok(RadiationRow {
        level,
        elements: mesh.elements().len(),
        unknowns: nodes.len(),
        l2_error: l2_surface_error(&sol.u, &u_exact, &sol.nodes)?,
        assembly_seconds: sol.assembly_seconds,
        solve_seconds: sol.solve_seconds,
    })
}

pub fn cmd_solve_radiation(study: &RadiationStudy) -> Result<Vec<RadiationRow>> {
    study.quad.validate()?;
    let cfg = AssemblyConfig::new(study.formulation, study.quad);
    match &study.mesh {
        MeshSource::Sphere => (0..=study.levels)
            .map(|level| radiation_error(&generate_sphere_mesh(level), level, sphere_source(), study.k, &cfg))
            .collect(),
        MeshSource::File(path) => {
            let mesh = read_mesh(path)?;
            let source = mesh.nodes().iter().sum::<Vec3>() / mesh.nodes().len() as f64;
            Ok(vec![radiation_error(&mesh, 0, source, study.k, &cfg)?])
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub module: &'static str,
    pub group: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelfTestReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            let tag = if o.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{tag} [{}] {}: {}", o.module, o.group, o.detail);
        }
        let failed = self.failures().count();
        let _ = writeln!(out, "{} groups, {} failed", self.outcomes.len(), failed);
        out
    }
}

type Check = Box<dyn Fn() -> std::result::Result<String, String> + Sync>;

/// Invariant suites of all modules with the library's Gauss rules.
pub fn cmd_selftest() -> SelfTestReport {
    let rules = [1, 2, 3, 4, 6, 8, 12, 16, 32, 64].map(GaussLegendre::new).to_vec();
    selftest_with_rules(rules)
}

/// As [`cmd_selftest`], with the quadrature group run against `rules`.
pub fn selftest_with_rules(rules: Vec<GaussLegendre>) -> SelfTestReport {
    let checks: Vec<(&'static str, &'static str, Check)> = vec![
        (
            "quadrature",
            "gauss-legendre exactness",
            Box::new(move || {
                for r in &rules {
                    r.check_exactness(1e-13)?;
                }
                Ok(format!("{} rules exact to degree 2n-1", rules.len()))
            }),
        ),
        ("quadrature", "triangle rules", Box::new(check_triangle_rules)),
        ("geometry", "shape functions", Box::new(check_shape_functions)),
        ("geometry", "sphere mesh", Box::new(check_sphere_mesh)),
        ("kernels", "reciprocity", Box::new(check_kernel_reciprocity)),
        ("polar_frame", "conformal isotropy", Box::new(check_conformality)),
        (
            "polar_frame",
            "sub-triangle decomposition",
            Box::new(check_decomposition),
        ),
        ("polar_frame", "sigmoid map", Box::new(check_sigmoid)),
        ("expansion", "subtraction regularity", Box::new(check_subtraction)),
        (
            "singular_quad",
            "closed-form line integral",
            Box::new(check_line_integral),
        ),
        ("singular_quad", "oracle agreement", Box::new(check_oracle_agreement)),
        ("singular_quad", "basis linearity", Box::new(check_linearity)),
        ("nystrom_bem", "local correction exactness", Box::new(check_correction)),
        ("nystrom_bem", "manufactured solve", Box::new(check_manufactured_solve)),
    ];
    let outcomes = checks
        .par_iter()
        .map(|(module, group, check)| {
            let (passed, detail) = match check() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome {
                module,
                group,
                passed,
                detail,
            }
        })
        .collect();
    SelfTestReport { outcomes }
}

fn lib<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn check_triangle_rules() -> std::result::Result<String, String> {
    for rule in [TriangleRule::six_point(), TriangleRule::collapsed_gauss(4)] {
        for p in 0..=4u32 {
            for q in 0..=(4 - p) {
                let approx: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x[0].powi(p as i32) * x[1].powi(q as i32))
                    .sum();
                let exact = monomial_triangle_integral(p, q);
                if (approx - exact).abs() > 1e-15 {
                    return Err(format!("{}-point rule misses xi1^{p} xi2^{q}", rule.len()));
                }
            }
        }
    }
    Ok("6-point and collapsed 4x4 rules exact to degree 4".into())
}

fn check_shape_functions() -> std::result::Result<String, String> {
    for (i, xi) in NODE_COORDS.iter().enumerate() {
        let n = shape_functions(*xi);
        for (j, v) in n.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            if (v - want).abs() > 1e-14 {
                return Err(format!("N{j} at node {i} is {v}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let a: f64 = rng.gen();
        let xi = [a * rng.gen::<f64>(), (1.0 - a) * rng.gen::<f64>()];
        let sum: f64 = shape_functions(xi).iter().sum();
        let dsum = shape_derivatives(xi)
            .iter()
            .fold([0.0, 0.0], |s, d| [s[0] + d[0], s[1] + d[1]]);
        if (sum - 1.0).abs() > 1e-14 || dsum[0].abs() > 1e-13 || dsum[1].abs() > 1e-13 {
            return Err(format!("partition of unity broken at {xi:?}"));
        }
    }
    Ok("Kronecker property and partition of unity on 200 points".into())
}

fn check_sphere_mesh() -> std::result::Result<String, String> {
    let mesh = generate_sphere_mesh(1);
    lib(mesh.validate())?;
    if let Some(p) = mesh.nodes().iter().find(|p| (p.norm() - 1.0).abs() > 1e-14) {
        return Err(format!("node {p:?} off the unit sphere"));
    }
    let mut area = 0.0;
    for e in mesh.curved_elements() {
        let c = e.map_to_physical([1.0 / 3.0, 1.0 / 3.0]);
        if lib(e.unit_normal([1.0 / 3.0, 1.0 / 3.0]))?.dot(&c) <= 0.0 {
            return Err("inward normal".into());
        }
        area += e.area();
    }
    let rel = (area / (4.0 * std::f64::consts::PI) - 1.0).abs();
    if rel > 2e-3 {
        return Err(format!("surface area off by {rel:.2e}"));
    }
    Ok(format!("level 1: outward normals, area within {rel:.1e}"))
}

fn check_kernel_reciprocity() -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let unit = |rng: &mut ChaCha8Rng| {
        Vec3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5).normalize()
    };
    for _ in 0..100 {
        let x = unit(&mut rng);
        let y = 2.0 * unit(&mut rng);
        let (nx, ny) = (unit(&mut rng), unit(&mut rng));
        let k = 3.0 * rng.gen::<f64>();
        let g = lib(green(&x, &y, k))? - lib(green(&y, &x, k))?;
        let fwd = layer_kernels(&(y - x), &nx, &ny, k);
        let back = layer_kernels(&(x - y), &ny, &nx, k);
        let tol = 1e-13 * fwd.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let gaps = [
            g.norm(),
            (fwd[0] - back[0]).norm(),
            (fwd[1] - back[2]).norm(),
            (fwd[3] - back[3]).norm(),
        ];
        if gaps.iter().any(|&d| d > tol) {
            return Err(format!("symmetry gaps {gaps:?}"));
        }
    }
    Ok("G, D/M and H symmetric under swapping x and y on 100 pairs".into())
}

fn check_conformality() -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let u1 = Vec3::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let u2 = Vec3::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        if u1.cross(&u2).norm() < 1e-3 * u1.norm() * u2.norm() {
            continue;
        }
        let map = lib(ConformalMap::build(&u1, &u2))?;
        let (v1, v2) = map.transformed_columns(&u1, &u2);
        let a: Vec<f64> = (0..64).map(|i| a_of_theta(&v1, &v2, i as f64 * 0.1)).collect();
        let max = a.iter().cloned().fold(f64::MIN, f64::max);
        let min = a.iter().cloned().fold(f64::MAX, f64::min);
        worst = worst.max(max / min - 1.0);
    }
    if worst > 1e-12 {
        return Err(format!("A varies by {worst:.2e}"));
    }
    Ok(format!("A constant to {worst:.1e} on 200 tangent pairs"))
}

fn check_decomposition() -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let verts = [
            [0.0, 0.0],
            [1.0, 0.0],
            [rng.gen_range(-1.0..2.0), rng.gen_range(0.2..3.0)],
        ];
        let (a, b) = (rng.gen_range(0.05..0.9), rng.gen::<f64>());
        let (s, t) = (a * (1.0 - b) * 0.95 + 0.02, a * b * 0.95 + 0.02);
        let p = [verts[1][0] * s + verts[2][0] * t, verts[1][1] * s + verts[2][1] * t];
        let subs = lib(decompose_triangle(&verts, p))?;
        let total: f64 = subs.iter().map(|s| s.area()).sum();
        let exact = 0.5 * verts[2][1];
        let span: f64 = subs.iter().map(|s| s.span()).sum();
        if (total - exact).abs() > 1e-13 * exact || (span - 2.0 * std::f64::consts::PI).abs() > 1e-12 {
            return Err(format!("sub-triangles cover {total} of {exact}, angle {span}"));
        }
    }
    Ok("areas and angles of 200 decompositions add up".into())
}

fn check_sigmoid() -> std::result::Result<String, String> {
    for m in [1.0, 2.0, 2.5, 3.0, 5.0] {
        if sigmoid(0.0, m).abs() > 1e-15 || (sigmoid(1.0, m) - 1.0).abs() > 1e-15 {
            return Err(format!("endpoints not fixed for m={m}"));
        }
        let mut prev = 0.0;
        for i in 1..=100 {
            let w = i as f64 / 100.0;
            let v = sigmoid(w, m);
            if v <= prev || (sigmoid(1.0 - w, m) + v - 1.0).abs() > 1e-14 {
                return Err(format!("not monotone or not symmetric at w={w}, m={m}"));
            }
            prev = v;
        }
    }
    Ok("fixed endpoints, monotone, symmetric for 5 exponents".into())
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn random_interior_point(rng: &mut ChaCha8Rng) -> [f64; 2] {
    loop {
        let xi = [rng.gen_range(0.05..0.9), rng.gen_range(0.05..0.9)];
        if xi[0] + xi[1] < 0.95 {
            return xi;
        }
    }
}

fn check_subtraction() -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rhos: Vec<f64> = (0..=12).map(|i| 1e-5 * 10f64.powf(i as f64 / 4.0)).collect();
    let basis = Polynomial::new(vec![(1.0, 0, 0), (0.5, 1, 0), (-0.7, 1, 1)]);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let e = random_curved_element(&mut rng);
        let xi_s = random_interior_point(&mut rng);
        let frame = lib(build_frame(&e, xi_s, true))?;
        let sub = frame.subs[rng.gen_range(0..3)];
        let g = lib(LocalGeometry::new(&e, xi_s, frame.local_matrix(&sub)))?;
        let terms = ExpansionTerms::new(g, LayerOperator::Hyper, &basis, xi_s);
        let theta = sub.theta_lo + rng.gen_range(0.1..0.9) * sub.span();
        let res: Vec<f64> = rhos
            .iter()
            .map(|&r| lib(subtraction_residual(&e, xi_s, &terms, &basis, 1.0, r, theta)))
            .collect::<std::result::Result<_, _>>()?;
        let slope = loglog_slope(&rhos, &res);
        worst = worst.max((slope - 2.0).abs());
    }
    if worst > 0.1 {
        return Err(format!("residual slope off 2 by {worst:.3}"));
    }
    Ok(format!(
        "hypersingular residual slope 2 within {worst:.3} on 10 elements"
    ))
}

fn check_line_integral() -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let e = random_curved_element(&mut rng);
        let xi_s = random_interior_point(&mut rng);
        let basis = &Polynomial::quadratic_monomials()[rng.gen_range(0..6)];
        let frame = lib(build_frame(&e, xi_s, true))?;
        let terms = lib(frame_expansion_terms(&e, &frame, LayerOperator::Hyper, basis))?;
        let a = lib(i2_analytic(&frame, &terms))?;
        let n = lib(i2_numeric(&frame, &terms, AngularMap::Sigmoid { m: 2.0 }, 64))?;
        worst = worst.max((a - n).abs() / a.abs());
    }
    if worst > 1e-12 {
        return Err(format!("closed form and quadrature differ by {worst:.2e}"));
    }
    Ok(format!("closed form matches 64-point quadrature to {worst:.1e}"))
}

fn check_oracle_agreement() -> std::result::Result<String, String> {
    let e = make_cylinder_element(0.5);
    let basis = study_basis();
    let mut worst: f64 = 0.0;
    for (_, xi_s) in FIELD_POINTS {
        for op in LayerOperator::ALL {
            let spec = KernelSpec::laplace(op);
            let reference = lib(reference_value(&e, xi_s, spec, &basis))?;
            let r = lib(integrate_singular(
                &e,
                xi_s,
                spec,
                &basis,
                &QuadConfig::new(Variant::PresentA, 16, 6),
            ))?;
            worst = worst.max(rel_error(r.value, reference));
        }
    }
    if worst > 1e-8 {
        return Err(format!("16x6 rule off the oracle by {worst:.2e}"));
    }
    Ok(format!(
        "16x6 rule within {worst:.1e} of the oracle, 4 Laplace kernels x 4 points"
    ))
}

fn check_linearity() -> std::result::Result<String, String> {
    let e = make_cylinder_element(1.5);
    let xi_s = [0.2, 0.5];
    let (p, q) = (Polynomial::monomial(1, 1), Polynomial::monomial(0, 2));
    let mix = p.combine(0.7, &q, -1.3);
    let cfg = QuadConfig::new(Variant::Present, 10, 5);
    for op in LayerOperator::ALL {
        let spec = KernelSpec::new(op, 1.5);
        let i = |b: &Polynomial| lib(integrate_singular(&e, xi_s, spec, b, &cfg)).map(|r| r.value);
        let lhs = i(&mix)?;
        let rhs = i(&p)? * 0.7 - i(&q)? * 1.3;
        if (lhs - rhs).norm() > 1e-13 * lhs.norm().max(rhs.norm()) {
            return Err(format!("{op}: {lhs} vs {rhs}"));
        }
    }
    Ok("integrals linear in the density for all kernels".into())
}

fn check_correction() -> std::result::Result<String, String> {
    let cb = lib(CorrectionBasis::new())?;
    let e: CurvedElement = make_cylinder_element(2.0);
    let fine = TriangleRule::collapsed_gauss(12);
    let moments: [Complex64; 6] = std::array::from_fn(|b| {
        fine.points
            .iter()
            .zip(&fine.weights)
            .map(|(x, w)| w * cb.bases[b].value(*x) * e.jacobian_norm(*x))
            .sum::<f64>()
            .into()
    });
    let w = cb.weights(&moments);
    let mut worst: f64 = 0.0;
    for (b, mb) in moments.iter().enumerate() {
        let got: Complex64 = (0..6).map(|j| w[j] * cb.bases[b].value(cb.points[j])).sum();
        worst = worst.max((got - mb).norm() / mb.norm());
    }
    if worst > 1e-13 {
        return Err(format!("corrected weights miss a moment by {worst:.2e}"));
    }
    Ok(format!("monomials up to degree 2 reproduced to {worst:.1e}"))
}

fn check_manufactured_solve() -> std::result::Result<String, String> {
    let cfg = AssemblyConfig::default();
    let row = lib(radiation_error(&generate_sphere_mesh(0), 0, sphere_source(), 2.5, &cfg))?;
    if row.l2_error > 5e-2 {
        return Err(format!("level-0 sphere error {:.2e}", row.l2_error));
    }
    Ok(format!("level-0 sphere, k=2.5: L2 error {:.2e}", row.l2_error))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_points_by_label() {
        assert_eq!(field_point("b").unwrap(), [0.1, 0.8]);
        assert_eq!(field_point("(D)").unwrap(), [0.64, 0.31]);
        assert!(field_point("e").is_err());
    }

    #[test]
    fn minimal_points_finds_first_success() {
        for threshold in [1, 2, 3, 7, 16, 17, 100, 256] {
            let mut calls = 0;
            let n = minimal_points(
                |n| {
                    calls += 1;
                    Ok(if n >= threshold { 1e-9 } else { 1.0 })
                },
                1e-8,
                256,
            )
            .unwrap();
            assert_eq!(n, Some(threshold));
            assert!(calls <= 20);
        }
        assert_eq!(minimal_points(|_| Ok(1.0), 1e-8, 256).unwrap(), None);
        assert_eq!(minimal_points(|_| Ok(1.0), 1e-8, 100).unwrap(), None);
    }

    #[test]
    fn study_validation() {
        let mut s = StudySpec::convergence();
        s.validate().unwrap();
        s.n_sweep = vec![4, 4];
        assert!(s.validate().is_err());
        s.n_sweep = vec![8, 4];
        assert!(s.validate().is_err());
        let mut s = StudySpec::convergence();
        s.field_points.push("x".into());
        assert!(s.validate().is_err());
        let mut s = StudySpec::aspect();
        s.s.push(-1.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn convergence_row_count_and_csv() {
        let mut s = StudySpec::convergence();
        s.variants = vec![Variant::Present, Variant::Guiggiani];
        s.n_sweep = vec![4, 8];
        s.field_points = vec!["a".into(), "b".into()];
        let rows = cmd_convergence(&s).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2 * 2);
        let csv = to_csv(&rows);
        assert!(csv.starts_with("variant,kernel,field_point,n_angular,rel_error\n"));
        assert_eq!(csv.lines().count(), rows.len() + 1);
        assert!(csv.lines().nth(1).unwrap().starts_with("present,single,a,4,"));
        assert_eq!(cmd_convergence(&s).unwrap(), rows);
    }

    #[test]
    fn aspect_row_formats_cap() {
        let row = AspectRow {
            s: 10.0,
            variant: Variant::Guiggiani,
            kernel: LayerOperator::Hyper,
            n_needed: None,
        };
        assert_eq!(row.record(), "10,guiggiani,hyper,>256");
    }

    #[test]
    fn corrupted_rule_fails_selftest_with_label() {
        let g = GaussLegendre::new(6);
        let mut w = g.weights().to_vec();
        w[2] += 1e-9;
        let report = selftest_with_rules(vec![GaussLegendre::from_tables(g.nodes().to_vec(), w)]);
        assert!(!report.passed());
        let failed: Vec<_> = report.failures().collect();
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].module, "quadrature");
        assert!(report.render().contains("FAIL [quadrature]"));
    }

    #[test]
    fn selftest_passes() {
        let report = cmd_selftest();
        assert!(report.passed(), "{}", report.render());
        assert!(report.outcomes.len() >= 10);
    }

    #[test]
    fn missing_mesh_file_is_reported_with_path() {
        let study = RadiationStudy {
            mesh: MeshSource::File("/nonexistent/body.qmesh".into()),
            ..RadiationStudy::default()
        };
        let err = cmd_solve_radiation(&study).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/body.qmesh"));
    }
}
