#include "ergmfg/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ergmfg {

HamiltonianSpec::HamiltonianSpec(GridField potential_, GridField stiffness_, double c_bar_)
    : potential(std::move(potential_)), stiffness(std::move(stiffness_)), c_bar(c_bar_) {
    require_same_grid(potential.grid(), stiffness.grid(), "HamiltonianSpec");
    if (!(c_bar >= 1.0))
        throw InvariantError("HamiltonianSpec: C_bar must be >= 1, got " + std::to_string(c_bar));
    for (double a : stiffness.values())
        if (!(a >= 1.0 / c_bar - 1e-12 && a <= c_bar + 1e-12))
            throw InvariantError("HamiltonianSpec: stiffness value " + std::to_string(a) +
                                 " outside [1/C_bar, C_bar] = [" + std::to_string(1.0 / c_bar) +
                                 ", " + std::to_string(c_bar) + "]");
}

HamiltonianSpec HamiltonianSpec::quadratic(GridField potential, double c_bar) {
    GridField a(potential.grid(), 1.0);
    return HamiltonianSpec(std::move(potential), std::move(a), c_bar);
}

bool HamiltonianSpec::is_unit_stiffness() const {
    for (double a : stiffness.values())
        if (std::abs(a - 1.0) > 1e-14)
            return false;
    return true;
}

double hamiltonian_eval(const HamiltonianSpec& spec, std::size_t node,
                        const std::array<double, 2>& p) {
    double p2 = 0.0;
    for (int a = 0; a < spec.potential.grid().dim(); ++a)
        p2 += p[a] * p[a];
    return 0.5 * spec.stiffness[node] * p2 - spec.potential[node];
}

std::array<double, 2> d_p_hamiltonian(const HamiltonianSpec& spec, std::size_t node,
                                      const std::array<double, 2>& p) {
    std::array<double, 2> out{0.0, 0.0};
    for (int a = 0; a < spec.potential.grid().dim(); ++a)
        out[a] = spec.stiffness[node] * p[a];
    return out;
}

double lagrangian_eval(const HamiltonianSpec& spec, std::size_t node,
                       const std::array<double, 2>& v) {
    double v2 = 0.0;
    for (int a = 0; a < spec.potential.grid().dim(); ++a)
        v2 += v[a] * v[a];
    return 0.5 * v2 / spec.stiffness[node] + spec.potential[node];
}

double legendre_oracle(const HamiltonianSpec& spec, std::size_t node,
                       const std::array<double, 2>& v, double p_box, double dp) {
    const int dim = spec.potential.grid().dim();
    const int m = static_cast<int>(std::ceil(p_box / dp));
    double best = -1e300;
    std::array<int, 2> argbest{0, 0};
    std::array<double, 2> p{0.0, 0.0};
    if (dim == 1) {
        for (int i = -m; i <= m; ++i) {
            p[0] = i * dp;
            const double val = p[0] * v[0] - hamiltonian_eval(spec, node, p);
            if (val > best) {
                best = val;
                argbest[0] = i;
            }
        }
    } else {
        for (int i = -m; i <= m; ++i)
            for (int j = -m; j <= m; ++j) {
                p[0] = i * dp;
                p[1] = j * dp;
                const double val = p[0] * v[0] + p[1] * v[1] - hamiltonian_eval(spec, node, p);
                if (val > best) {
                    best = val;
                    argbest = {i, j};
                }
            }
    }
    for (int a = 0; a < dim; ++a)
        if (std::abs(argbest[a]) == m)
            throw InvariantError("legendre_oracle: maximizer on the p-grid boundary; box too small");
    return best;
}

LagrangianView::LagrangianView(const HamiltonianSpec& spec, double v_max_hint)
    : inverse_stiffness(spec.potential.grid()), potential(spec.potential) {
    for (std::size_t k = 0; k < spec.stiffness.grid().size(); ++k)
        inverse_stiffness[k] = 1.0 / spec.stiffness[k];
    const double osc = field_max(spec.potential) - field_min(spec.potential);
    v_max = v_max_hint > 0.0 ? v_max_hint : spec.c_bar * (2.0 * std::sqrt(osc + 1.0) + 1.0);
}

CouplingSpec::CouplingSpec(CouplingFamily family, MollifierKernel kernel, double kappa,
                           double sigma, GridField g, GridField w, double c)
    : family_(family), kernel_(std::move(kernel)), kappa_(kappa), sigma_(sigma),
      g_(std::move(g)), w_(std::move(w)), c_(c) {}

CouplingSpec CouplingSpec::linear(MollifierKernel kernel, double kappa, GridField g,
                                  std::optional<double> c) {
    require_same_grid(kernel.grid(), g.grid(), "CouplingSpec::linear");
    if (!(kappa > 0.0))
        throw InvariantError("CouplingSpec: kappa must be > 0, got " + std::to_string(kappa));
    const double c_auto = std::min(kappa, 1.0 / kappa);
    const double c_eff = c.value_or(c_auto);
    if (!(c_eff > 0.0 && c_eff <= 1.0))
        throw InvariantError("CouplingSpec: c must lie in (0, 1]");
    if (kappa < c_eff - 1e-12 || kappa > 1.0 / c_eff + 1e-12)
        throw InvariantError("CouplingSpec: kappa must lie in [c, 1/c]");
    GridField w(kernel.grid(), 0.0);
    return CouplingSpec(CouplingFamily::linear, std::move(kernel), kappa, 0.0, std::move(g),
                        std::move(w), c_eff);
}

CouplingSpec CouplingSpec::smooth_sine(MollifierKernel kernel, double sigma, GridField w,
                                       std::optional<double> c) {
    require_same_grid(kernel.grid(), w.grid(), "CouplingSpec::smooth_sine");
    if (std::abs(sigma) > 0.5 + 1e-12)
        throw InvariantError("CouplingSpec: |sigma| must be <= 1/2");
    const double w_sup = field_sup_norm(w);
    const double s = 0.5 * std::abs(sigma) * w_sup;
    if (s > 0.5 + 1e-12)
        throw InvariantError("CouplingSpec: |sigma| sup|w| must be <= 1 so dFbar/dz stays in [1/2, 3/2]");
    const double c_auto = 1.0 - s; // dFbar/dz in [1-s, 1+s] and 1-s <= 1/(1+s)
    const double c_eff = c.value_or(c_auto);
    if (!(c_eff > 0.0 && c_eff <= c_auto + 1e-12))
        throw InvariantError("CouplingSpec: c must lie in (0, " + std::to_string(c_auto) + "]");
    GridField g(kernel.grid(), 0.0);
    return CouplingSpec(CouplingFamily::smooth_sine, std::move(kernel), 0.0, sigma, std::move(g),
                        std::move(w), c_eff);
}

CouplingSpec CouplingSpec::zero(MollifierKernel kernel) {
    GridField g(kernel.grid(), 0.0);
    GridField w(kernel.grid(), 0.0);
    return CouplingSpec(CouplingFamily::zero, std::move(kernel), 0.0, 0.0, std::move(g),
                        std::move(w), 1.0);
}

double CouplingSpec::fbar(std::size_t node, double z) const {
    switch (family_) {
    case CouplingFamily::linear: return kappa_ * z + g_[node];
    case CouplingFamily::smooth_sine: return z + 0.5 * sigma_ * std::sin(z) * w_[node];
    default: return 0.0;
    }
}

double CouplingSpec::dfbar_dz(std::size_t node, double z) const {
    switch (family_) {
    case CouplingFamily::linear: return kappa_;
    case CouplingFamily::smooth_sine: return 1.0 + 0.5 * sigma_ * std::cos(z) * w_[node];
    default: return 0.0;
    }
}

double CouplingSpec::coercivity_constant() const {
    if (is_zero())
        throw InvariantError("coercivity_constant: undefined for the zero coupling");
    return c_ * c_ * c_ / kernel_.l2_norm_sq();
}

double CouplingSpec::lipschitz_constant() const {
    if (is_zero())
        return 0.0;
    return kernel_.lipschitz() / c_;
}

double CouplingSpec::sup_bound() const {
    if (is_zero())
        return 0.0;
    // z = (m*xi)(x) ranges in [0, sup xi] for probability m.
    const double zmax = kernel_.sup();
    if (family_ == CouplingFamily::linear)
        return kappa_ * zmax + field_sup_norm(g_);
    return zmax + 0.5 * std::abs(sigma_) * field_sup_norm(w_);
}

double CouplingSpec::c2_bound() const {
    if (is_zero())
        return 0.0;
    // Spatial derivatives hit only the outer kernel: D(xi*G) = (D xi)*G.
    return sup_bound() * (1.0 + kernel_.grad_l1() + kernel_.second_diff_l1());
}

GridField coupling_eval(const CouplingSpec& spec, const GridMeasure& m) {
    require_same_grid(spec.grid(), m.grid(), "coupling_eval");
    if (spec.is_zero())
        return GridField(m.grid(), 0.0);
    GridField inner = convolve(m.as_field(), spec.kernel());
    GridField mapped(m.grid());
    for (std::size_t k = 0; k < m.grid().size(); ++k)
        mapped[k] = spec.fbar(k, inner[k]);
    return convolve(mapped, spec.kernel());
}

CoercivityReport coercivity_check(const CouplingSpec& spec, const GridMeasure& m1,
                                  const GridMeasure& m2) {
    require_same_grid(m1.grid(), m2.grid(), "coercivity_check");
    GridField f1 = coupling_eval(spec, m1);
    GridField f2 = coupling_eval(spec, m2);
    const TorusGrid& g = m1.grid();
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double df = f1[k] - f2[k];
        lhs += df * (m1[k] - m2[k]);
        rhs += df * df;
    }
    lhs *= g.cell_volume();
    rhs *= g.cell_volume();
    CoercivityReport rep{};
    rep.lhs = lhs;
    rep.rhs_l2sq = rhs;
    rep.ratio = rhs > 1e-300 ? lhs / rhs : std::numeric_limits<double>::infinity();
    const double cbar = spec.is_zero() ? 0.0 : spec.coercivity_constant();
    rep.passes = lhs >= cbar * rhs - 1e-10;
    return rep;
}

} // namespace ergmfg
