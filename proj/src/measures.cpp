#include "ergmfg/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

namespace ergmfg {

namespace {
constexpr double kMassTolerance = 1e-10;
constexpr std::size_t kLpMaxNodes = 4096;
} // namespace

GridMeasure::GridMeasure(const TorusGrid& grid, std::vector<double> density)
    : grid_(grid), density_(std::move(density)) {
    if (density_.size() != grid_.size())
        throw InvariantError("GridMeasure: expected " + std::to_string(grid_.size()) +
                             " density values, got " + std::to_string(density_.size()));
    double total = 0.0;
    for (double d : density_) {
        if (!std::isfinite(d))
            throw InvariantError("GridMeasure: non-finite density");
        if (d < 0.0)
            throw InvariantError("GridMeasure: negative density " + std::to_string(d));
        total += d;
    }
    total *= grid_.cell_volume();
    if (std::abs(total - 1.0) > kMassTolerance)
        throw InvariantError("GridMeasure: mass " + std::to_string(total) +
                             " deviates from 1 beyond 1e-10");
}

GridMeasure GridMeasure::uniform(const TorusGrid& grid) {
    return GridMeasure(grid, std::vector<double>(grid.size(), 1.0));
}

GridMeasure GridMeasure::point_mass(const TorusGrid& grid, std::size_t node) {
    std::vector<double> d(grid.size(), 0.0);
    d.at(node) = 1.0 / grid.cell_volume();
    return GridMeasure(grid, std::move(d));
}

GridMeasure GridMeasure::normalized(const TorusGrid& grid, std::vector<double> raw) {
    if (raw.size() != grid.size())
        throw InvariantError("GridMeasure::normalized: size mismatch");
    double total = 0.0;
    for (double d : raw) {
        if (!std::isfinite(d) || d < 0.0)
            throw InvariantError("GridMeasure::normalized: density must be finite and >= 0");
        total += d;
    }
    total *= grid.cell_volume();
    if (total <= 0.0)
        throw InvariantError("GridMeasure::normalized: zero total mass");
    for (double& d : raw)
        d /= total;
    return GridMeasure(grid, std::move(raw));
}

double GridMeasure::mass() const {
    double s = 0.0;
    for (double d : density_)
        s += d;
    return s * grid_.cell_volume();
}

double GridMeasure::sup_density() const {
    return *std::max_element(density_.begin(), density_.end());
}

MeasurePath::MeasurePath(std::vector<double> times, std::vector<GridMeasure> measures)
    : times_(std::move(times)), measures_(std::move(measures)) {
    if (times_.empty() || times_.size() != measures_.size())
        throw InvariantError("MeasurePath: times and measures must match and be nonempty");
    for (std::size_t k = 0; k + 1 < times_.size(); ++k)
        if (!(times_[k] < times_[k + 1]))
            throw InvariantError("MeasurePath: times must be strictly increasing");
    for (const auto& m : measures_)
        require_same_grid(m.grid(), measures_.front().grid(), "MeasurePath");
}

double pairing(const GridField& f, const GridMeasure& mu) {
    require_same_grid(f.grid(), mu.grid(), "pairing");
    double s = 0.0;
    for (std::size_t k = 0; k < f.grid().size(); ++k)
        s += f[k] * mu[k];
    return s * f.grid().cell_volume();
}

namespace {

double wasserstein1_circle(const GridMeasure& mu, const GridMeasure& nu) {
    const TorusGrid& g = mu.grid();
    const int n = g.n();
    // Cumulative mass difference per cell; G[i] = sum_{j<=i} (mu_j - nu_j) h.
    std::vector<double> G(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += (mu.at(i) - nu.at(i)) * g.h();
        G[i] = acc;
    }
    // Cells have equal width, so the optimal shift is the plain median.
    std::vector<double> sorted(G);
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    const double s = sorted[n / 2];
    double w = 0.0;
    for (double gi : G)
        w += std::abs(gi - s);
    return w * g.h();
}

// Exact min-cost transport between the positive and negative parts of
// mu - nu (common mass cancels at no cost for a metric ground cost).
// Successive shortest augmenting paths on the bipartite residual graph,
// shortest paths by label-correcting search (backward arcs are negative
// but the residual graph of a min-cost flow has no negative cycles).
// Each augmentation saturates at least one atom, so it terminates.
double transport_lp(const GridMeasure& mu, const GridMeasure& nu) {
    const TorusGrid& g = mu.grid();
    struct Atom {
        std::array<double, 2> x;
        double mass;
    };
    std::vector<Atom> sup, dem;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double r = (mu[k] - nu[k]) * g.cell_volume();
        std::array<double, 2> x{};
        if (g.dim() == 1) {
            x = {g.coord(static_cast<int>(k)), 0.0};
        } else {
            x = {g.coord(static_cast<int>(k) / g.n()), g.coord(static_cast<int>(k) % g.n())};
        }
        if (r > 1e-15)
            sup.push_back({x, r});
        else if (r < -1e-15)
            dem.push_back({x, -r});
    }
    const std::size_t ns = sup.size(), nd = dem.size();
    if (ns == 0 || nd == 0)
        return 0.0;

    std::vector<double> cost(ns * nd);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nd; ++j)
            cost[i * nd + j] = g.distance(sup[i].x, dem[j].x);

    std::vector<double> flow(ns * nd, 0.0);
    std::vector<double> rem_s(ns), rem_d(nd);
    for (std::size_t i = 0; i < ns; ++i)
        rem_s[i] = sup[i].mass;
    for (std::size_t j = 0; j < nd; ++j)
        rem_d[j] = dem[j].mass;

    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t nv = ns + nd;
    double remaining = std::accumulate(rem_s.begin(), rem_s.end(), 0.0);
    while (remaining > 1e-15) {
        std::vector<double> dist(nv, inf);
        std::vector<int> prev(nv, -1);
        std::vector<char> queued(nv, 0);
        std::queue<std::size_t> q;
        for (std::size_t i = 0; i < ns; ++i)
            if (rem_s[i] > 1e-15) {
                dist[i] = 0.0;
                q.push(i);
                queued[i] = 1;
            }
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            queued[u] = 0;
            if (u < ns) {
                for (std::size_t j = 0; j < nd; ++j) {
                    const double nd_dist = dist[u] + cost[u * nd + j];
                    if (nd_dist < dist[ns + j] - 1e-15) {
                        dist[ns + j] = nd_dist;
                        prev[ns + j] = static_cast<int>(u);
                        if (!queued[ns + j]) {
                            q.push(ns + j);
                            queued[ns + j] = 1;
                        }
                    }
                }
            } else {
                const std::size_t j = u - ns;
                for (std::size_t i = 0; i < ns; ++i)
                    if (flow[i * nd + j] > 1e-15) {
                        const double ns_dist = dist[u] - cost[i * nd + j];
                        if (ns_dist < dist[i] - 1e-15) {
                            dist[i] = ns_dist;
                            prev[i] = static_cast<int>(u);
                            if (!queued[i]) {
                                q.push(i);
                                queued[i] = 1;
                            }
                        }
                    }
            }
        }
        // Closest demand with remaining capacity.
        std::size_t tgt = nv;
        double best = inf;
        for (std::size_t j = 0; j < nd; ++j)
            if (rem_d[j] > 1e-15 && dist[ns + j] < best) {
                best = dist[ns + j];
                tgt = ns + j;
            }
        if (tgt == nv)
            throw Error("wasserstein1_lp: no augmenting path (unbalanced marginals?)");
        // Bottleneck along the path, then augment.
        double push = rem_d[tgt - ns];
        for (std::size_t v = tgt; prev[v] != -1;) {
            const std::size_t u = static_cast<std::size_t>(prev[v]);
            if (v < ns)
                push = std::min(push, flow[v * nd + (u - ns)]);
            v = u;
            if (prev[v] == -1)
                push = std::min(push, rem_s[v]);
        }
        for (std::size_t v = tgt; prev[v] != -1;) {
            const std::size_t u = static_cast<std::size_t>(prev[v]);
            if (v >= ns)
                flow[u * nd + (v - ns)] += push;
            else
                flow[v * nd + (u - ns)] -= push;
            v = u;
            if (prev[v] == -1)
                rem_s[v] -= push;
        }
        rem_d[tgt - ns] -= push;
        remaining -= push;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nd; ++j)
            total += flow[i * nd + j] * cost[i * nd + j];
    return total;
}

} // namespace

double wasserstein1_lp(const GridMeasure& mu, const GridMeasure& nu) {
    require_same_grid(mu.grid(), nu.grid(), "wasserstein1_lp");
    if (mu.grid().size() > kLpMaxNodes)
        throw Error("wasserstein1_lp is an oracle only: grid has " +
                    std::to_string(mu.grid().size()) + " nodes, limit " +
                    std::to_string(kLpMaxNodes));
    return transport_lp(mu, nu);
}

double wasserstein1(const GridMeasure& mu, const GridMeasure& nu) {
    require_same_grid(mu.grid(), nu.grid(), "wasserstein1");
    if (mu.grid().dim() == 1)
        return wasserstein1_circle(mu, nu);
    if (mu.grid().size() > kLpMaxNodes)
        throw Error("wasserstein1: 2D grids with n^2 > 4096 nodes are not supported "
                    "(transport LP too large)");
    return transport_lp(mu, nu);
}

GridMeasure time_average(const MeasurePath& path, double t_a, double t_b) {
    if (!(t_a < t_b))
        throw InvariantError("time_average: window must satisfy t_a < t_b");
    const auto& t = path.times();
    if (t_a < t.front() - 1e-12 || t_b > t.back() + 1e-12)
        throw InvariantError("time_average: window outside the path's time range");
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < t.size(); ++k)
        if (t[k] >= t_a - 1e-12 && t[k] <= t_b + 1e-12)
            idx.push_back(k);
    if (idx.empty())
        throw InvariantError("time_average: empty window (no snapshots in [t_a, t_b])");
    const TorusGrid& g = path.grid();
    std::vector<double> acc(g.size(), 0.0);
    if (idx.size() == 1) {
        acc = path.at(idx.front()).density();
    } else {
        for (std::size_t q = 0; q < idx.size(); ++q) {
            double wgt = 0.0;
            if (q > 0)
                wgt += 0.5 * (t[idx[q]] - t[idx[q - 1]]);
            if (q + 1 < idx.size())
                wgt += 0.5 * (t[idx[q + 1]] - t[idx[q]]);
            const auto& d = path.at(idx[q]).density();
            for (std::size_t k = 0; k < acc.size(); ++k)
                acc[k] += wgt * d[k];
        }
    }
    return GridMeasure::normalized(g, std::move(acc));
}

} // namespace ergmfg
