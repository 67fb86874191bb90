#pragma once

#include <vector>

#include "ergmfg/torus.hpp"

namespace ergmfg {

/// Probability measure stored as a nonnegative density on the grid nodes;
/// the mass of node k is density[k] * h^d. Construction validates the
/// invariants (density >= 0, total mass 1 within 1e-10); it never silently
/// renormalizes. Use `normalized` for explicit ingestion.
class GridMeasure {
public:
    GridMeasure(const TorusGrid& grid, std::vector<double> density);
    static GridMeasure uniform(const TorusGrid& grid);
    /// All mass in a single cell.
    static GridMeasure point_mass(const TorusGrid& grid, std::size_t node);
    /// Clamp-free explicit renormalization of a nonnegative raw density.
    static GridMeasure normalized(const TorusGrid& grid, std::vector<double> raw);

    const TorusGrid& grid() const { return grid_; }
    const std::vector<double>& density() const { return density_; }
    double operator[](std::size_t k) const { return density_[k]; }
    double at(int i) const { return density_[grid_.index(i)]; }
    double at(int i, int j) const { return density_[grid_.index(i, j)]; }

    double mass() const;
    double sup_density() const;
    /// Density values as a field (e.g. to convolve with a kernel).
    GridField as_field() const { return GridField(grid_, density_); }

private:
    TorusGrid grid_;
    std::vector<double> density_;
};

/// Snapshots of a measure along a strictly increasing time grid.
class MeasurePath {
public:
    MeasurePath(std::vector<double> times, std::vector<GridMeasure> measures);

    const std::vector<double>& times() const { return times_; }
    const std::vector<GridMeasure>& measures() const { return measures_; }
    const GridMeasure& at(std::size_t k) const { return measures_[k]; }
    std::size_t size() const { return times_.size(); }
    const TorusGrid& grid() const { return measures_.front().grid(); }

private:
    std::vector<double> times_;
    std::vector<GridMeasure> measures_;
};

/// Monge-Wasserstein distance d1 on the torus.
/// d = 1: exact circular-transport value from cumulative sums; the
/// minimizing shift is a (weighted) median of the CDF difference.
/// d = 2: routed to the transport LP when the grid is small enough.
double wasserstein1(const GridMeasure& mu, const GridMeasure& nu);

/// Primal optimal-transport program with torus-geodesic costs, solved
/// exactly by successive shortest paths on the support atoms. Serves as
/// the oracle for wasserstein1; limited to n^dim <= 4096 nodes.
double wasserstein1_lp(const GridMeasure& mu, const GridMeasure& nu);

/// Integral of f against mu: sum f * density * h^d.
double pairing(const GridField& f, const GridMeasure& mu);

/// Trapezoid-in-time average of the densities over [t_a, t_b],
/// renormalized to unit mass.
GridMeasure time_average(const MeasurePath& path, double t_a, double t_b);

} // namespace ergmfg
