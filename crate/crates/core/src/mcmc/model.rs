use crate::error::{Error, Result};
use crate::graph::AreaGraph;
use crate::kernels::envelope::{EnvelopeCholesky, SparsePattern};
use crate::panel::{Cell, Covariates, DirectTable, ModelSpec, PanelIndex, ParameterState, Variant};

/// Data, design and precision layouts shared read-only by every chain.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    index: PanelIndex,
    cells: Vec<Cell>,
    observed: Vec<usize>,
    graph: Option<AreaGraph>,
    covariate_names: Vec<String>,
    /// Row-major `N × (p+1)` design with a leading intercept column.
    design: Vec<f64>,
    n_coef: usize,
    /// Dense `XᵀX`, row-major.
    xtx: Vec<f64>,
    svc: Vec<Vec<f64>>,
    /// `Σ_t x̃²_{k,j,t}` per space-varying term and area.
    svc_sq: Vec<Vec<f64>>,
    eta0_layout: EnvelopeCholesky,
    eta_s_layout: Option<EnvelopeCholesky>,
}

impl Model {
    pub fn new(table: DirectTable, covariates: Covariates, graph: Option<AreaGraph>, spec: ModelSpec) -> Result<Self> {
        let index = table.index();
        let (n, j, t) = (index.len(), index.n_areas(), index.n_times());
        let p = covariates.len();
        spec.validate(p)?;
        if let Some(bad) = covariates.columns.iter().position(|c| c.len() != n) {
            return Err(Error::InvalidSpec(format!(
                "covariate '{}' has {} values, panel has {n} cells",
                covariates.names[bad],
                covariates.columns[bad].len()
            )));
        }
        if let Some(g) = &graph {
            if g.n_areas() != j {
                return Err(Error::InvalidSpec(format!(
                    "adjacency has {} areas, panel has {j}",
                    g.n_areas()
                )));
            }
        } else if spec.variant.is_spatial() {
            return Err(Error::InvalidSpec(format!("{} needs an adjacency graph", spec.variant.as_str())));
        }

        let n_coef = p + 1;
        let mut design = vec![0.0; n * n_coef];
        for i in 0..n {
            design[i * n_coef] = 1.0;
            for (k, col) in covariates.columns.iter().enumerate() {
                design[i * n_coef + k + 1] = col[i];
            }
        }
        let mut xtx = vec![0.0; n_coef * n_coef];
        for row in design.chunks_exact(n_coef) {
            for a in 0..n_coef {
                for b in 0..n_coef {
                    xtx[a * n_coef + b] += row[a] * row[b];
                }
            }
        }
        let svc: Vec<Vec<f64>> = spec.svc.iter().map(|&k| covariates.columns[k].clone()).collect();
        let svc_sq = svc
            .iter()
            .map(|col| (0..j).map(|a| col[index.area_range(a)].iter().map(|x| x * x).sum()).collect())
            .collect();

        let spatial = if spec.variant.is_spatial() { graph.as_ref() } else { None };
        let eta0_layout = EnvelopeCholesky::new(&eta0_pattern(spatial, j, t));
        let eta_s_layout = match (spec.variant, &graph) {
            (Variant::Full, Some(g)) => Some(EnvelopeCholesky::new(&SparsePattern::from_edges(j, g.edges()))),
            _ => None,
        };

        let observed = table.observed();
        Ok(Self {
            spec,
            index,
            cells: table.cells().to_vec(),
            observed,
            graph,
            covariate_names: covariates.names,
            design,
            n_coef,
            xtx,
            svc,
            svc_sq,
            eta0_layout,
            eta_s_layout,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn variant(&self) -> Variant {
        self.spec.variant
    }

    pub fn index(&self) -> PanelIndex {
        self.index
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Flat positions of OBSERVED cells, ascending.
    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    pub fn graph(&self) -> Option<&AreaGraph> {
        self.graph.as_ref()
    }

    pub(crate) fn spatial_graph(&self) -> &AreaGraph {
        self.graph.as_ref().expect("spatial variants carry a graph")
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    /// Number of fixed-effect covariates `p` (intercept excluded).
    pub fn p(&self) -> usize {
        self.n_coef - 1
    }

    pub fn q(&self) -> usize {
        self.svc.len()
    }

    pub fn design_row(&self, i: usize) -> &[f64] {
        &self.design[i * self.n_coef..(i + 1) * self.n_coef]
    }

    /// Entry `(a, b)` of `XᵀX`.
    pub fn xtx(&self, a: usize, b: usize) -> f64 {
        self.xtx[a * self.n_coef + b]
    }

    pub fn svc_column(&self, k: usize) -> &[f64] {
        &self.svc[k]
    }

    pub fn svc_square_sums(&self, k: usize) -> &[f64] {
        &self.svc_sq[k]
    }

    pub(crate) fn eta0_layout(&self) -> &EnvelopeCholesky {
        &self.eta0_layout
    }

    pub(crate) fn eta_s_layout(&self) -> Option<&EnvelopeCholesky> {
        self.eta_s_layout.as_ref()
    }

    pub fn fixed_effect(&self, beta: &[f64], i: usize) -> f64 {
        self.design_row(i).iter().zip(beta).map(|(x, b)| x * b).sum()
    }

    /// `Σ_k x̃_{k,i} η^s_{k,j(i)}`, optionally leaving out one term.
    pub fn svc_effect(&self, eta_s: &[Vec<f64>], i: usize, skip: Option<usize>) -> f64 {
        let area = i / self.index.n_times();
        (0..self.svc.len())
            .filter(|&k| Some(k) != skip)
            .map(|k| self.svc[k][i] * eta_s[k][area])
            .sum()
    }

    /// `η0 + Xβ + X̃Zη^s`, the conditional mean of every `μ_i`.
    pub fn linear_predictor(&self, state: &ParameterState) -> Vec<f64> {
        (0..self.index.len())
            .map(|i| state.eta0[i] + self.fixed_effect(&state.beta, i) + self.svc_effect(&state.eta_s, i, None))
            .collect()
    }
}

/// Off-diagonal pattern of `(D − ρW) ⊗ A^{-1}`, or of `I ⊗ A^{-1}` without a graph.
fn eta0_pattern(graph: Option<&AreaGraph>, n_areas: usize, t: usize) -> SparsePattern {
    let mut edges = Vec::new();
    let mut push_block = |a: usize, b: usize| {
        for s in 0..t {
            for r in s.saturating_sub(1)..(s + 2).min(t) {
                if a != b || r > s {
                    edges.push((a * t + s, b * t + r));
                }
            }
        }
    };
    for a in 0..n_areas {
        push_block(a, a);
    }
    if let Some(g) = graph {
        for (a, b) in g.edges() {
            push_block(a, b);
        }
    }
    SparsePattern::from_edges(n_areas * t, edges)
}
