use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::correction::CorrectionBasis;
use super::near::{nearly_singular_integral, NearConfig};
use super::nodes::{nystrom_nodes, NystromNode};
use crate::error::{Error, Result};
use crate::geometry::{CurvedElement, SurfaceMesh};
use crate::kernels::{layer_kernels, LayerOperator, WaveContext};
use crate::singular_quad::{integrate_singular_batch, QuadConfig, Variant, COMMON_M};

/// Elements whose centroid lies within this multiple of the larger of the
/// two element diameters are integrated with corrected weights.
pub const NEAR_FIELD_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    /// `(1/2 - D + alpha H) u = (-S + alpha (1/2 + M)) q`.
    BurtonMiller,
    /// `(1/2 - D) u = -S q`.
    Cbie,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::BurtonMiller => "burton-miller",
            Formulation::Cbie => "cbie",
        }
    }
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "burton-miller" | "bm" | "chbie" => Ok(Formulation::BurtonMiller),
            "cbie" => Ok(Formulation::Cbie),
            other => Err(Error::Parameter(format!("unknown formulation `{other}`"))),
        }
    }
}

/// `identity I + single S + double D + adjoint M + hyper H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorCombination {
    pub identity: Complex64,
    pub layers: [Complex64; 4],
}

impl OperatorCombination {
    pub fn for_formulation(formulation: Formulation, wave: &WaveContext) -> (Self, Self) {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let half = Complex64::new(0.5, 0.0);
        let alpha = match formulation {
            Formulation::BurtonMiller => wave.alpha,
            Formulation::Cbie => zero,
        };
        (
            OperatorCombination {
                identity: half,
                layers: [zero, -one, zero, alpha],
            },
            OperatorCombination {
                identity: alpha * 0.5,
                layers: [-one, zero, alpha, zero],
            },
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyConfig {
    pub formulation: Formulation,
    pub quad: QuadConfig,
    pub near_factor: f64,
    pub near: NearConfig,
}

impl AssemblyConfig {
    pub fn new(formulation: Formulation, quad: QuadConfig) -> Self {
        AssemblyConfig {
            formulation,
            quad,
            near_factor: NEAR_FIELD_FACTOR,
            near: NearConfig::default(),
        }
    }
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig::new(
            Formulation::BurtonMiller,
            QuadConfig::new(Variant::Present, 4, 3).with_m(COMMON_M),
        )
    }
}

#[derive(Debug, Clone)]
pub struct BemSystem {
    pub nodes: Vec<NystromNode>,
    pub matrix: DMatrix<Complex64>,
    /// Maps Neumann data at the nodes to the right-hand side.
    pub rhs_operator: DMatrix<Complex64>,
    pub wave: WaveContext,
    pub formulation: Formulation,
    /// Near-field integrals that hit the subdivision depth cap.
    pub capped_integrals: usize,
    pub assembly_seconds: f64,
}

impl BemSystem {
    pub fn dimension(&self) -> usize {
        self.nodes.len()
    }

    pub fn rhs(&self, q: &DVector<Complex64>) -> DVector<Complex64> {
        &self.rhs_operator * q
    }

    pub fn solve(&self, q: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let b = self.rhs(q);
        self.matrix.clone().lu().solve(&b).ok_or(Error::SingularMatrix)
    }
}

/// Corrected and plain interactions of one target node with the whole mesh,
/// per layer operator: `rows[op][node]`.
struct RowContext<'a> {
    nodes: &'a [NystromNode],
    elements: &'a [CurvedElement],
    centroids: Vec<crate::geometry::Vec3>,
    diameters: Vec<f64>,
    correction: CorrectionBasis,
    k: f64,
    cfg: &'a AssemblyConfig,
}

impl RowContext<'_> {
    fn is_near(&self, target: &NystromNode, e: usize) -> bool {
        if e == target.element {
            return true;
        }
        let reach = self.cfg.near_factor * self.diameters[e].max(self.diameters[target.element]);
        (self.centroids[e] - target.point).norm() <= reach
    }

    fn row(&self, i: usize) -> Result<([Vec<Complex64>; 4], bool)> {
        let target = &self.nodes[i];
        let n = self.nodes.len();
        let mut rows: [Vec<Complex64>; 4] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n]);
        let mut capped = false;
        for (e, element) in self.elements.iter().enumerate() {
            let base = 6 * e;
            if !self.is_near(target, e) {
                for j in base..base + 6 {
                    let src = &self.nodes[j];
                    let kv = layer_kernels(&(src.point - target.point), &target.normal, &src.normal, self.k);
                    for (row, v) in rows.iter_mut().zip(kv) {
                        row[j] = v * src.weight;
                    }
                }
                continue;
            }
            let moments: Vec<[Complex64; 6]> = if e == target.element {
                let res = integrate_singular_batch(
                    element,
                    target.xi,
                    self.k,
                    &LayerOperator::ALL,
                    &self.correction.bases,
                    &self.cfg.quad,
                )?;
                res.iter().map(|r| std::array::from_fn(|b| r[b].value)).collect()
            } else {
                let res = nearly_singular_integral(
                    &target.point,
                    &target.normal,
                    element,
                    self.k,
                    &LayerOperator::ALL,
                    &self.correction.bases,
                    &self.cfg.near,
                )?;
                capped |= res.depth_capped;
                (0..4).map(|o| std::array::from_fn(|b| res.values[o * 6 + b])).collect()
            };
            for op in 0..4 {
                let w = self.correction.weights(&moments[op]);
                rows[op][base..base + 6].copy_from_slice(&w);
            }
        }
        Ok((rows, capped))
    }
}

fn context<'a>(
    nodes: &'a [NystromNode],
    elements: &'a [CurvedElement],
    k: f64,
    cfg: &'a AssemblyConfig,
) -> Result<RowContext<'a>> {
    Ok(RowContext {
        nodes,
        elements,
        centroids: elements.iter().map(|e| e.centroid()).collect(),
        diameters: elements.iter().map(|e| e.diameter()).collect(),
        correction: CorrectionBasis::new()?,
        k,
        cfg,
    })
}

/// Rows of the four layer operators `[S, D, M, H]` for the given targets.
pub fn operator_rows(
    mesh: &SurfaceMesh,
    k: f64,
    cfg: &AssemblyConfig,
    targets: &[usize],
) -> Result<Vec<[Vec<Complex64>; 4]>> {
    let nodes = nystrom_nodes(mesh)?;
    let elements: Vec<CurvedElement> = mesh.curved_elements().collect();
    let ctx = context(&nodes, &elements, k, cfg)?;
    targets.iter().map(|&i| ctx.row(i).map(|r| r.0)).collect()
}

/// Dense system for the given formulation. Rows are assembled in parallel.
pub fn assemble(mesh: &SurfaceMesh, k: f64, cfg: &AssemblyConfig) -> Result<BemSystem> {
    if cfg.formulation == Formulation::BurtonMiller && k <= 0.0 {
        return Err(Error::Parameter(format!(
            "Burton-Miller needs a positive wavenumber, got {k}"
        )));
    }
    if k < 0.0 {
        return Err(Error::Parameter(format!("negative wavenumber {k}")));
    }
    cfg.quad.validate()?;
    let start = Instant::now();
    let wave = WaveContext::new(k);
    let nodes = nystrom_nodes(mesh)?;
    let elements: Vec<CurvedElement> = mesh.curved_elements().collect();
    let ctx = context(&nodes, &elements, k, cfg)?;
    let (lhs, rhs) = OperatorCombination::for_formulation(cfg.formulation, &wave);
    let n = nodes.len();
    let rows: Vec<(Vec<Complex64>, Vec<Complex64>, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (ops, capped) = ctx.row(i)?;
            let combine = |c: &OperatorCombination| {
                let mut row: Vec<Complex64> = (0..n).map(|j| (0..4).map(|o| c.layers[o] * ops[o][j]).sum()).collect();
                row[i] += c.identity;
                row
            };
            Ok((combine(&lhs), combine(&rhs), capped))
        })
        .collect::<Result<_>>()?;
    let mut matrix = DMatrix::zeros(n, n);
    let mut rhs_operator = DMatrix::zeros(n, n);
    let mut capped_integrals = 0;
    for (i, (a, b, capped)) in rows.into_iter().enumerate() {
        for j in 0..n {
            matrix[(i, j)] = a[j];
            rhs_operator[(i, j)] = b[j];
        }
        capped_integrals += capped as usize;
    }
    Ok(BemSystem {
        nodes,
        matrix,
        rhs_operator,
        wave,
        formulation: cfg.formulation,
        capped_integrals,
        assembly_seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn assemble_burton_miller(mesh: &SurfaceMesh, k: f64, cfg: &AssemblyConfig) -> Result<BemSystem> {
    assemble(
        mesh,
        k,
        &AssemblyConfig {
            formulation: Formulation::BurtonMiller,
            ..*cfg
        },
    )
}

pub fn assemble_cbie(mesh: &SurfaceMesh, k: f64, cfg: &AssemblyConfig) -> Result<BemSystem> {
    assemble(
        mesh,
        k,
        &AssemblyConfig {
            formulation: Formulation::Cbie,
            ..*cfg
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_sphere_mesh;

    #[test]
    fn dimensions_and_finite_diagonal() {
        let mesh = generate_sphere_mesh(0);
        let sys = assemble_burton_miller(&mesh, 1.0, &AssemblyConfig::default()).unwrap();
        assert_eq!(sys.dimension(), 120);
        assert_eq!(sys.matrix.nrows(), 120);
        assert!(sys.matrix.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        assert_eq!(sys.capped_integrals, 0);
    }

    #[test]
    fn burton_miller_rejects_zero_wavenumber() {
        let mesh = generate_sphere_mesh(0);
        assert!(matches!(
            assemble_burton_miller(&mesh, 0.0, &AssemblyConfig::default()),
            Err(Error::Parameter(_))
        ));
        assert!(assemble_cbie(&mesh, 0.0, &AssemblyConfig::default()).is_ok());
    }

    #[test]
    fn double_layer_rows_sum_to_minus_half() {
        let mesh = generate_sphere_mesh(2);
        let rows = operator_rows(&mesh, 0.0, &AssemblyConfig::default(), &[0, 7, 100, 1000]).unwrap();
        for r in rows {
            let sum: Complex64 = r[1].iter().sum();
            assert!((sum.re + 0.5).abs() < 0.025, "{sum}");
        }
    }

    #[test]
    fn combination_coefficients() {
        let wave = WaveContext::new(2.0);
        let (lhs, rhs) = OperatorCombination::for_formulation(Formulation::BurtonMiller, &wave);
        assert_eq!(lhs.layers[3], Complex64::new(0.0, 0.5));
        assert_eq!(rhs.identity, Complex64::new(0.0, 0.25));
        let (lhs, rhs) = OperatorCombination::for_formulation(Formulation::Cbie, &wave);
        assert_eq!(lhs.layers[3], Complex64::new(0.0, 0.0));
        assert_eq!(rhs.layers[2], Complex64::new(0.0, 0.0));
    }
}
