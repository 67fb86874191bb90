#include "ergmfg/torus.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fftw3.h>

namespace ergmfg {

namespace {
constexpr int kDirectConvolutionMaxN = 256;
// The FFTW planner is not thread safe; plan creation/destruction is locked.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

TorusGrid::TorusGrid(int dim, int n) : dim_(dim), n_(n) {
    if (dim != 1 && dim != 2)
        throw InvariantError("TorusGrid: dim must be 1 or 2, got " + std::to_string(dim));
    if (n < 8)
        throw InvariantError("TorusGrid: n must be >= 8, got " + std::to_string(n));
    h_ = 1.0 / n_;
    size_ = 1;
    cell_volume_ = 1.0;
    for (int a = 0; a < dim_; ++a) {
        size_ *= static_cast<std::size_t>(n_);
        cell_volume_ *= h_;
    }
}

double TorusGrid::wrap_displacement(double dx) const {
    dx -= std::floor(dx);
    if (dx > 0.5)
        dx -= 1.0;
    return dx;
}

double TorusGrid::distance(const std::array<double, 2>& a, const std::array<double, 2>& b) const {
    double s = 0.0;
    for (int ax = 0; ax < dim_; ++ax) {
        double d = wrap_displacement(a[ax] - b[ax]);
        s += d * d;
    }
    return std::sqrt(s);
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where) {
    if (a != b)
        throw DimensionError(std::string(where) + ": grid mismatch (dim " +
                             std::to_string(a.dim()) + "x n " + std::to_string(a.n()) +
                             " vs dim " + std::to_string(b.dim()) + " x n " +
                             std::to_string(b.n()) + ")");
}

GridField::GridField(const TorusGrid& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

GridField::GridField(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw InvariantError("GridField: expected " + std::to_string(grid_.size()) +
                             " values, got " + std::to_string(values_.size()));
    check_finite("GridField");
}

GridField GridField::sample(const TorusGrid& grid,
                            const std::function<double(double, double)>& f) {
    GridField out(grid);
    if (grid.dim() == 1) {
        for (int i = 0; i < grid.n(); ++i)
            out[grid.index(i)] = f(grid.coord(i), 0.0);
    } else {
        for (int i = 0; i < grid.n(); ++i)
            for (int j = 0; j < grid.n(); ++j)
                out[grid.index(i, j)] = f(grid.coord(i), grid.coord(j));
    }
    out.check_finite("GridField::sample");
    return out;
}

void GridField::check_finite(const char* where) const {
    for (double v : values_)
        if (!std::isfinite(v))
            throw InvariantError(std::string(where) + ": non-finite value");
}

VectorField::VectorField(const TorusGrid& grid, double fill)
    : grid_(grid), comps_(grid.dim(), std::vector<double>(grid.size(), fill)) {}

double VectorField::sup_norm() const {
    double s = 0.0;
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        double q = 0.0;
        for (int a = 0; a < grid_.dim(); ++a)
            q += comps_[a][k] * comps_[a][k];
        s = std::max(s, q);
    }
    return std::sqrt(s);
}

MollifierKernel::MollifierKernel(const TorusGrid& grid, double radius)
    : grid_(grid), radius_(radius), weights_(grid) {
    if (!(radius > 0.0 && radius < 0.5))
        throw InvariantError("MollifierKernel: radius must be in (0, 1/2), got " +
                             std::to_string(radius));
    auto bump = [&](double r2) {
        // r2 = |x/radius|^2
        return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
    };
    const int n = grid.n();
    double sum = 0.0;
    if (grid.dim() == 1) {
        for (int i = 0; i < n; ++i) {
            double x = grid.wrap_displacement(grid.coord(i));
            double w = bump((x / radius) * (x / radius));
            weights_[grid.index(i)] = w;
            sum += w;
        }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double x = grid.wrap_displacement(grid.coord(i));
                double y = grid.wrap_displacement(grid.coord(j));
                double w = bump((x * x + y * y) / (radius * radius));
                weights_[grid.index(i, j)] = w;
                sum += w;
            }
    }
    if (sum <= 0.0)
        throw InvariantError("MollifierKernel: radius too small for the grid (empty support)");
    // Renormalize to unit discrete mass: sum w h^d = 1 exactly.
    const double scale = 1.0 / (sum * grid.cell_volume());
    for (double& w : weights_.mutable_values())
        w *= scale;

    l2_norm_sq_ = 0.0;
    sup_ = 0.0;
    for (double w : weights_.values()) {
        l2_norm_sq_ += w * w * grid.cell_volume();
        sup_ = std::max(sup_, w);
    }
    VectorField g = gradient(weights_, GradientMode::forward);
    lipschitz_ = 0.0;
    for (int a = 0; a < grid.dim(); ++a)
        for (double v : g.component(a))
            lipschitz_ = std::max(lipschitz_, std::abs(v));
    VectorField gc = gradient(weights_, GradientMode::central);
    grad_l1_ = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double q = 0.0;
        for (int a = 0; a < grid.dim(); ++a)
            q += gc.comp(a, k) * gc.comp(a, k);
        grad_l1_ += std::sqrt(q) * grid.cell_volume();
    }
    // Max over the same second-difference stencils used by norms_and_means.
    const double h = grid.h();
    second_diff_l1_ = 0.0;
    double acc_axis0 = 0.0, acc_axis1 = 0.0, acc_mixed = 0.0;
    if (grid.dim() == 1) {
        for (int i = 0; i < n; ++i)
            acc_axis0 += std::abs(weights_.at(i + 1) - 2.0 * weights_.at(i) + weights_.at(i - 1)) /
                         (h * h) * grid.cell_volume();
        second_diff_l1_ = acc_axis0;
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                acc_axis0 += std::abs(weights_.at(i + 1, j) - 2.0 * weights_.at(i, j) +
                                      weights_.at(i - 1, j)) / (h * h) * grid.cell_volume();
                acc_axis1 += std::abs(weights_.at(i, j + 1) - 2.0 * weights_.at(i, j) +
                                      weights_.at(i, j - 1)) / (h * h) * grid.cell_volume();
                acc_mixed += std::abs(weights_.at(i + 1, j + 1) - weights_.at(i + 1, j) -
                                      weights_.at(i, j + 1) + weights_.at(i, j)) /
                             (h * h) * grid.cell_volume();
            }
        second_diff_l1_ = std::max({acc_axis0, acc_axis1, acc_mixed});
    }
}

namespace {

GridField convolve_direct(const GridField& f, const GridField& w) {
    const TorusGrid& g = f.grid();
    GridField out(g);
    const double vol = g.cell_volume();
    const int n = g.n();
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j)
                s += f.at(j) * w.at(i - j);
            out[g.index(i)] = s * vol;
        }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int p = 0; p < n; ++p)
                    for (int q = 0; q < n; ++q)
                        s += f.at(p, q) * w.at(i - p, j - q);
                out[g.index(i, j)] = s * vol;
            }
    }
    return out;
}

GridField convolve_fft(const GridField& f, const GridField& w) {
    const TorusGrid& g = f.grid();
    const int n = g.n();
    const int rank = g.dim();
    const std::size_t real_sz = g.size();
    const std::size_t cplx_sz =
        (rank == 1) ? static_cast<std::size_t>(n / 2 + 1)
                    : static_cast<std::size_t>(n) * (n / 2 + 1);

    std::vector<double> fr(f.values()), wr(w.values()), outr(real_sz);
    std::vector<fftw_complex> fc(cplx_sz), wc(cplx_sz);

    fftw_plan pf, pw, pb;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        if (rank == 1) {
            pf = fftw_plan_dft_r2c_1d(n, fr.data(), fc.data(), FFTW_ESTIMATE);
            pw = fftw_plan_dft_r2c_1d(n, wr.data(), wc.data(), FFTW_ESTIMATE);
            pb = fftw_plan_dft_c2r_1d(n, fc.data(), outr.data(), FFTW_ESTIMATE);
        } else {
            pf = fftw_plan_dft_r2c_2d(n, n, fr.data(), fc.data(), FFTW_ESTIMATE);
            pw = fftw_plan_dft_r2c_2d(n, n, wr.data(), wc.data(), FFTW_ESTIMATE);
            pb = fftw_plan_dft_c2r_2d(n, n, fc.data(), outr.data(), FFTW_ESTIMATE);
        }
    }
    fftw_execute(pf);
    fftw_execute(pw);
    const double scale = g.cell_volume() / static_cast<double>(real_sz);
    for (std::size_t k = 0; k < cplx_sz; ++k) {
        const double re = fc[k][0] * wc[k][0] - fc[k][1] * wc[k][1];
        const double im = fc[k][0] * wc[k][1] + fc[k][1] * wc[k][0];
        fc[k][0] = re * scale;
        fc[k][1] = im * scale;
    }
    fftw_execute(pb);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(pf);
        fftw_destroy_plan(pw);
        fftw_destroy_plan(pb);
    }
    return GridField(g, std::move(outr));
}

} // namespace

GridField convolve(const GridField& f, const MollifierKernel& k) {
    require_same_grid(f.grid(), k.grid(), "convolve");
    if (f.grid().n() <= kDirectConvolutionMaxN)
        return convolve_direct(f, k.weights());
    return convolve_fft(f, k.weights());
}

VectorField gradient(const GridField& f, GradientMode mode) {
    const TorusGrid& g = f.grid();
    VectorField out(g);
    const double h = g.h();
    const int n = g.n();
    auto diff = [&](double fm, double f0, double fp) {
        switch (mode) {
        case GradientMode::central: return (fp - fm) / (2.0 * h);
        case GradientMode::forward: return (fp - f0) / h;
        default: return (f0 - fm) / h;
        }
    };
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i)
            out.comp(0, g.index(i)) = diff(f.at(i - 1), f.at(i), f.at(i + 1));
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const std::size_t k = g.index(i, j);
                out.comp(0, k) = diff(f.at(i - 1, j), f.at(i, j), f.at(i + 1, j));
                out.comp(1, k) = diff(f.at(i, j - 1), f.at(i, j), f.at(i, j + 1));
            }
    }
    return out;
}

double interpolate(const GridField& f, double x) {
    return interpolate(f, std::array<double, 2>{x, 0.0});
}

double interpolate(const GridField& f, const std::array<double, 2>& x) {
    const TorusGrid& g = f.grid();
    const int n = g.n();
    auto split = [&](double c, int& i0, double& frac) {
        c -= std::floor(c); // wrap into [0,1)
        double s = c * n;
        i0 = static_cast<int>(std::floor(s));
        frac = s - i0;
        if (i0 >= n) { // guard against c*n == n from rounding
            i0 = 0;
            frac = 0.0;
        }
    };
    if (g.dim() == 1) {
        int i0;
        double fr;
        split(x[0], i0, fr);
        return (1.0 - fr) * f.at(i0) + fr * f.at(i0 + 1);
    }
    int i0, j0;
    double fx, fy;
    split(x[0], i0, fx);
    split(x[1], j0, fy);
    return (1.0 - fx) * ((1.0 - fy) * f.at(i0, j0) + fy * f.at(i0, j0 + 1)) +
           fx * ((1.0 - fy) * f.at(i0 + 1, j0) + fy * f.at(i0 + 1, j0 + 1));
}

double field_mean(const GridField& f) {
    double s = 0.0;
    for (double v : f.values())
        s += v;
    return s / static_cast<double>(f.grid().size());
}

double field_integral(const GridField& f) {
    double s = 0.0;
    for (double v : f.values())
        s += v;
    return s * f.grid().cell_volume();
}

double field_sup_norm(const GridField& f) {
    double s = 0.0;
    for (double v : f.values())
        s = std::max(s, std::abs(v));
    return s;
}

double field_min(const GridField& f) {
    double s = f.values().front();
    for (double v : f.values())
        s = std::min(s, v);
    return s;
}

double field_max(const GridField& f) {
    double s = f.values().front();
    for (double v : f.values())
        s = std::max(s, v);
    return s;
}

FieldStats norms_and_means(const GridField& f) {
    FieldStats st{};
    st.sup_norm = field_sup_norm(f);
    st.mean = field_mean(f);
    VectorField g = gradient(f, GradientMode::central);
    double grad_sup = 0.0;
    for (std::size_t k = 0; k < f.grid().size(); ++k) {
        double q = 0.0;
        for (int a = 0; a < f.grid().dim(); ++a)
            q += g.comp(a, k) * g.comp(a, k);
        grad_sup = std::max(grad_sup, std::sqrt(q));
    }
    const double h = f.grid().h();
    const int n = f.grid().n();
    double d2 = 0.0;
    if (f.grid().dim() == 1) {
        for (int i = 0; i < n; ++i)
            d2 = std::max(d2, std::abs(f.at(i + 1) - 2.0 * f.at(i) + f.at(i - 1)) / (h * h));
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                d2 = std::max(d2, std::abs(f.at(i + 1, j) - 2.0 * f.at(i, j) + f.at(i - 1, j)) / (h * h));
                d2 = std::max(d2, std::abs(f.at(i, j + 1) - 2.0 * f.at(i, j) + f.at(i, j - 1)) / (h * h));
                d2 = std::max(d2, std::abs(f.at(i + 1, j + 1) - f.at(i + 1, j) - f.at(i, j + 1) + f.at(i, j)) / (h * h));
            }
    }
    st.discrete_c2_norm = st.sup_norm + grad_sup + d2;
    return st;
}

} // namespace ergmfg
