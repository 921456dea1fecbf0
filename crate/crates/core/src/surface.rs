//! Discrete radial graphs: per-node geometry of a grid function.

use crate::geometry::{GeometryFields, RoundMetric, REFERENCE_RADIUS};
use crate::grid::{GridError, GridFunction, GridResult, GridSpec, Stencils};
use crate::scalar::Real;

/// Stencils plus the round metric at every node of one grid.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    stencils: Stencils,
    rounds: Vec<RoundMetric<T>>,
    reference: T,
}

impl<T: Real> Discretization<T> {
    pub fn new(spec: GridSpec) -> GridResult<Self> {
        let stencils = Stencils::new(spec)?;
        let rounds = (0..spec.node_count()).map(|i| spec.chart_point::<T>(i).round_metric()).collect();
        Ok(Self { stencils, rounds, reference: T::lit(REFERENCE_RADIUS) })
    }

    pub fn spec(&self) -> &GridSpec {
        self.stencils.spec()
    }

    pub fn stencils(&self) -> &Stencils {
        &self.stencils
    }

    pub fn round(&self, node: usize) -> &RoundMetric<T> {
        &self.rounds[node]
    }

    /// Reference radius of the `u`-substitution.
    pub fn reference(&self) -> T {
        self.reference
    }

    /// Geometry at every node. Fails on the first node whose jet is invalid.
    pub fn fields(&self, u: &GridFunction<T>) -> GridResult<Vec<GeometryFields<T>>> {
        let jets = self.stencils.covariant_jet(u, self.reference)?;
        jets.iter()
            .zip(&self.rounds)
            .enumerate()
            .map(|(node, (jet, round))| {
                GeometryFields::evaluate(jet, round).map_err(|source| GridError::Geometry { node, source })
            })
            .collect()
    }

    /// Radii `r(x)` of a grid function of `u`.
    pub fn radii(&self, u: &GridFunction<T>) -> GridResult<Vec<T>> {
        u.values()
            .iter()
            .enumerate()
            .map(|(node, &ui)| {
                crate::geometry::r_from_u(ui, self.reference).map_err(|source| GridError::Geometry { node, source })
            })
            .collect()
    }

    /// Grid function of `u` for the radii `r`.
    pub fn from_radii(&self, r: &[T]) -> GridResult<GridFunction<T>> {
        let values = r
            .iter()
            .enumerate()
            .map(|(node, &ri)| {
                crate::geometry::u_from_r(ri, self.reference).map_err(|source| GridError::Geometry { node, source })
            })
            .collect::<GridResult<Vec<T>>>()?;
        GridFunction::new(*self.spec(), values)
    }

    /// Samples `r(θ, φ)` and converts to `u`.
    pub fn from_radius_fn(&self, r: impl Fn(T, T) -> T) -> GridResult<GridFunction<T>> {
        let spec = *self.spec();
        let radii: Vec<T> = (0..spec.node_count())
            .map(|i| r(spec.theta(i / spec.n_phi), spec.phi(i % spec.n_phi)))
            .collect();
        self.from_radii(&radii)
    }
}
