#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "ergmfg/errors.hpp"

namespace ergmfg {

/// Uniform periodic grid on the flat torus [0,1)^d, d in {1,2}.
/// Node (i) or (i,j) sits at coordinate i*h (and j*h), h = 1/n.
/// All index arithmetic is modulo n per axis.
class TorusGrid {
public:
    TorusGrid(int dim, int n);

    int dim() const { return dim_; }
    int n() const { return n_; }
    double h() const { return h_; }
    /// Quadrature weight of one node, h^dim.
    double cell_volume() const { return cell_volume_; }
    /// Total node count n^dim.
    std::size_t size() const { return size_; }

    int wrap(int i) const {
        i %= n_;
        return i < 0 ? i + n_ : i;
    }
    std::size_t index(int i) const { return static_cast<std::size_t>(wrap(i)); }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(wrap(i)) * n_ + wrap(j);
    }
    double coord(int i) const { return wrap(i) * h_; }

    /// Signed wrapped displacement in (-1/2, 1/2].
    double wrap_displacement(double dx) const;
    /// Geodesic distance between two points of the torus.
    double distance(const std::array<double, 2>& a, const std::array<double, 2>& b) const;

    bool operator==(const TorusGrid& other) const {
        return dim_ == other.dim_ && n_ == other.n_;
    }
    bool operator!=(const TorusGrid& other) const { return !(*this == other); }

private:
    int dim_;
    int n_;
    double h_;
    double cell_volume_;
    std::size_t size_;
};

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where);

/// Scalar field sampled at the grid nodes. Immutable by convention after
/// construction; operations return new fields.
class GridField {
public:
    explicit GridField(const TorusGrid& grid, double fill = 0.0);
    GridField(const TorusGrid& grid, std::vector<double> values);
    /// Sample a function of the node coordinate (1D: y is ignored).
    static GridField sample(const TorusGrid& grid,
                            const std::function<double(double, double)>& f);

    const TorusGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }

    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    double at(int i) const { return values_[grid_.index(i)]; }
    double at(int i, int j) const { return values_[grid_.index(i, j)]; }

    void check_finite(const char* where) const;

private:
    TorusGrid grid_;
    std::vector<double> values_;
};

/// d-component vector field at the grid nodes, stored per component.
class VectorField {
public:
    explicit VectorField(const TorusGrid& grid, double fill = 0.0);

    const TorusGrid& grid() const { return grid_; }
    double comp(int axis, std::size_t k) const { return comps_[axis][k]; }
    double& comp(int axis, std::size_t k) { return comps_[axis][k]; }
    const std::vector<double>& component(int axis) const { return comps_[axis]; }
    std::vector<double>& component(int axis) { return comps_[axis]; }

    /// Max Euclidean norm over nodes.
    double sup_norm() const;

private:
    TorusGrid grid_;
    std::vector<std::vector<double>> comps_;
};

/// Smooth even bump kernel discretized on the grid:
///   eta(x) = exp(-1/(1-|x/radius|^2))  for |x| < radius, 0 outside,
/// sampled at the nodes and renormalized so the discrete integral is 1.
class MollifierKernel {
public:
    MollifierKernel(const TorusGrid& grid, double radius);

    const TorusGrid& grid() const { return grid_; }
    double radius() const { return radius_; }
    /// Node weights as a periodic field centered at node 0.
    const GridField& weights() const { return weights_; }
    /// Discrete L2 norm squared: sum w_k^2 h^d.
    double l2_norm_sq() const { return l2_norm_sq_; }
    double sup() const { return sup_; }
    /// Max adjacent difference quotient of the weights (discrete Lipschitz
    /// constant of x -> xi(x) on the grid).
    double lipschitz() const { return lipschitz_; }
    /// Discrete L1 norms of the first/second difference tables, used for
    /// C2 bounds of convolved fields.
    double grad_l1() const { return grad_l1_; }
    double second_diff_l1() const { return second_diff_l1_; }

private:
    TorusGrid grid_;
    double radius_;
    GridField weights_;
    double l2_norm_sq_;
    double sup_;
    double lipschitz_;
    double grad_l1_;
    double second_diff_l1_;
};

enum class GradientMode { central, forward, backward };

/// Periodic discrete convolution with quadrature weight h^d:
///   (f * k)(x_i) = sum_j f(x_j) k(x_i - x_j) h^d.
/// Direct circular sum for n <= 256 per axis, FFT-based above.
GridField convolve(const GridField& f, const MollifierKernel& k);

/// Periodic finite-difference gradient.
VectorField gradient(const GridField& f, GradientMode mode = GradientMode::central);

/// Periodic multilinear interpolation at an arbitrary point (wrapped into
/// [0,1)^d). Exact at nodes; the result never leaves [min f, max f].
double interpolate(const GridField& f, const std::array<double, 2>& x);
double interpolate(const GridField& f, double x);

struct FieldStats {
    double sup_norm;
    double mean;
    /// sup|f| + sup|grad f| + sup|second differences|/h^2 (axis + mixed).
    double discrete_c2_norm;
};

FieldStats norms_and_means(const GridField& f);

double field_mean(const GridField& f);
double field_sup_norm(const GridField& f);
double field_min(const GridField& f);
double field_max(const GridField& f);
/// Discrete integral: sum f h^d.
double field_integral(const GridField& f);

} // namespace ergmfg
