#include "ergmfg/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ergmfg {

GridField FourierSpec::render(const TorusGrid& grid) const {
    const double two_pi = 2.0 * M_PI;
    return GridField::sample(grid, [&](double x, double y) {
        double v = constant;
        for (const Term& t : terms)
            v += t.amplitude *
                 std::cos(two_pi * (t.kx * x + (grid.dim() == 2 ? t.ky * y : 0.0)) + t.phase);
        return v;
    });
}

namespace {

// Minimal sectioned key = value reader (TOML-compatible for the subset
// this suite uses: numbers, strings, booleans, flat and nested arrays).
struct Value {
    enum class Kind { number, string, boolean, array } kind;
    double num = 0.0;
    std::string str;
    bool boolean = false;
    std::vector<Value> arr;
};

class Parser {
public:
    Parser(const std::string& text, const std::string& origin) : origin_(origin) {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        std::string section;
        while (std::getline(in, line)) {
            ++lineno;
            strip_comment(line);
            const std::string trimmed = trim(line);
            if (trimmed.empty())
                continue;
            if (trimmed.front() == '[') {
                if (trimmed.back() != ']')
                    fail(lineno, "malformed section header");
                section = trim(trimmed.substr(1, trimmed.size() - 2));
                if (section.empty())
                    fail(lineno, "empty section name");
                continue;
            }
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                fail(lineno, "expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string vtext = trim(trimmed.substr(eq + 1));
            if (key.empty() || vtext.empty())
                fail(lineno, "expected key = value");
            std::size_t pos = 0;
            Value v = parse_value(vtext, pos, lineno);
            if (pos != vtext.size())
                fail(lineno, "trailing characters after value");
            const std::string path = section.empty() ? key : section + "." + key;
            if (entries_.count(path))
                fail(lineno, "duplicate key '" + path + "'");
            entries_[path] = std::move(v);
        }
    }

    std::optional<Value> take(const std::string& path) {
        auto it = entries_.find(path);
        if (it == entries_.end())
            return std::nullopt;
        Value v = std::move(it->second);
        entries_.erase(it);
        return v;
    }

    void reject_unknown() const {
        if (!entries_.empty())
            throw ConfigError(origin_ + ": unknown key '" + entries_.begin()->first + "'",
                              entries_.begin()->first);
    }

private:
    static void strip_comment(std::string& line) {
        bool in_str = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"')
                in_str = !in_str;
            else if (line[i] == '#' && !in_str) {
                line.erase(i);
                return;
            }
        }
    }
    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
            ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
            --e;
        return s.substr(b, e - b);
    }
    [[noreturn]] void fail(int lineno, const std::string& msg) const {
        throw ConfigError(origin_ + ":" + std::to_string(lineno) + ": " + msg);
    }
    Value parse_value(const std::string& s, std::size_t& pos, int lineno) const {
        skip_ws(s, pos);
        if (pos >= s.size())
            fail(lineno, "missing value");
        Value v;
        const char c = s[pos];
        if (c == '"') {
            v.kind = Value::Kind::string;
            ++pos;
            while (pos < s.size() && s[pos] != '"')
                v.str += s[pos++];
            if (pos >= s.size())
                fail(lineno, "unterminated string");
            ++pos;
        } else if (c == '[') {
            v.kind = Value::Kind::array;
            ++pos;
            skip_ws(s, pos);
            while (pos < s.size() && s[pos] != ']') {
                v.arr.push_back(parse_value(s, pos, lineno));
                skip_ws(s, pos);
                if (pos < s.size() && s[pos] == ',') {
                    ++pos;
                    skip_ws(s, pos);
                }
            }
            if (pos >= s.size())
                fail(lineno, "unterminated array");
            ++pos;
        } else if (s.compare(pos, 4, "true") == 0) {
            v.kind = Value::Kind::boolean;
            v.boolean = true;
            pos += 4;
        } else if (s.compare(pos, 5, "false") == 0) {
            v.kind = Value::Kind::boolean;
            v.boolean = false;
            pos += 5;
        } else {
            v.kind = Value::Kind::number;
            std::size_t end = pos;
            while (end < s.size() && !std::isspace(static_cast<unsigned char>(s[end])) &&
                   s[end] != ',' && s[end] != ']')
                ++end;
            try {
                std::size_t used = 0;
                v.num = std::stod(s.substr(pos, end - pos), &used);
                if (used != end - pos)
                    throw std::invalid_argument("");
            } catch (...) {
                fail(lineno, "malformed number '" + s.substr(pos, end - pos) + "'");
            }
            pos = end;
        }
        skip_ws(s, pos);
        return v;
    }
    static void skip_ws(const std::string& s, std::size_t& pos) {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
            ++pos;
    }

    std::string origin_;
    std::map<std::string, Value> entries_;
};

double want_number(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::number)
        throw ConfigError("key '" + key + "' must be a number", key);
    return v.num;
}

int want_int(const Value& v, const std::string& key) {
    const double d = want_number(v, key);
    if (std::abs(d - std::round(d)) > 1e-9)
        throw ConfigError("key '" + key + "' must be an integer", key);
    return static_cast<int>(std::llround(d));
}

std::string want_string(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::string)
        throw ConfigError("key '" + key + "' must be a string", key);
    return v.str;
}

FourierSpec::Term want_term(const Value& v, const std::string& key, int dim) {
    if (v.kind != Value::Kind::array)
        throw ConfigError("key '" + key + "' must contain arrays [A, k..., phi]", key);
    const std::size_t expected = dim == 1 ? 3 : 4;
    if (v.arr.size() != expected)
        throw ConfigError("key '" + key + "' terms must have " + std::to_string(expected) +
                              " entries [A, k" + (dim == 2 ? ", k2" : "") + ", phi]",
                          key);
    FourierSpec::Term t{};
    t.amplitude = want_number(v.arr[0], key);
    t.kx = want_int(v.arr[1], key);
    t.ky = dim == 2 ? want_int(v.arr[2], key) : 0;
    t.phase = want_number(v.arr.back(), key);
    return t;
}

void read_fourier(Parser& p, const std::string& base, int dim, FourierSpec& out) {
    if (auto v = p.take(base + "_const"))
        out.constant = want_number(*v, base + "_const");
    if (auto v = p.take(base)) {
        if (v->kind != Value::Kind::array)
            throw ConfigError("key '" + base + "' must be an array of terms", base);
        for (const Value& term : v->arr)
            out.terms.push_back(want_term(term, base, dim));
    }
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    Parser p(text, origin);
    RunConfig cfg;

    if (auto v = p.take("grid.dim"))
        cfg.dim = want_int(*v, "grid.dim");
    if (cfg.dim != 1 && cfg.dim != 2)
        throw ConfigError("grid.dim must be 1 or 2", "grid.dim");
    if (auto v = p.take("grid.n"))
        cfg.n = want_int(*v, "grid.n");
    if (cfg.n < 8)
        throw ConfigError("grid.n must be >= 8", "grid.n");

    if (auto v = p.take("time.T"))
        cfg.T = want_number(*v, "time.T");
    if (!(cfg.T > 0.0))
        throw ConfigError("time.T must be > 0", "time.T");
    if (auto v = p.take("time.dt"))
        cfg.dt = want_number(*v, "time.dt");
    if (!(cfg.dt > 0.0 && cfg.dt <= cfg.T))
        throw ConfigError("time.dt must lie in (0, T]", "time.dt");
    if (auto v = p.take("time.T_list")) {
        if (v->kind != Value::Kind::array)
            throw ConfigError("time.T_list must be an array", "time.T_list");
        for (const Value& t : v->arr)
            cfg.T_list.push_back(want_number(t, "time.T_list"));
        for (std::size_t k = 0; k + 1 < cfg.T_list.size(); ++k)
            if (!(cfg.T_list[k] < cfg.T_list[k + 1]))
                throw ConfigError("time.T_list must be strictly increasing", "time.T_list");
        if (!cfg.T_list.empty() && !(cfg.T_list.front() > 0.0))
            throw ConfigError("time.T_list entries must be > 0", "time.T_list");
    }

    read_fourier(p, "hamiltonian.V", cfg.dim, cfg.V);
    read_fourier(p, "hamiltonian.a", cfg.dim, cfg.a);
    if (auto v = p.take("hamiltonian.C_bar"))
        cfg.C_bar = want_number(*v, "hamiltonian.C_bar");
    if (!(cfg.C_bar >= 1.0))
        throw ConfigError("hamiltonian.C_bar must be >= 1", "hamiltonian.C_bar");

    if (auto v = p.take("coupling.family"))
        cfg.coupling_family = want_string(*v, "coupling.family");
    if (cfg.coupling_family != "linear" && cfg.coupling_family != "smooth" &&
        cfg.coupling_family != "zero")
        throw ConfigError("coupling.family must be one of linear|smooth|zero", "coupling.family");
    if (auto v = p.take("coupling.kappa"))
        cfg.kappa = want_number(*v, "coupling.kappa");
    if (!(cfg.kappa > 0.0))
        throw ConfigError("coupling.kappa must be > 0", "coupling.kappa");
    if (auto v = p.take("coupling.sigma"))
        cfg.sigma = want_number(*v, "coupling.sigma");
    if (std::abs(cfg.sigma) > 0.5)
        throw ConfigError("coupling.sigma must satisfy |sigma| <= 1/2", "coupling.sigma");
    if (auto v = p.take("coupling.c")) {
        const double c = want_number(*v, "coupling.c");
        if (!(c > 0.0))
            throw ConfigError("coupling.c must be > 0 (omit the key to derive it)", "coupling.c");
        if (c > 1.0)
            throw ConfigError("coupling.c must be <= 1", "coupling.c");
        cfg.c = c;
    }
    if (auto v = p.take("coupling.kernel_radius"))
        cfg.kernel_radius = want_number(*v, "coupling.kernel_radius");
    if (!(cfg.kernel_radius > 0.0 && cfg.kernel_radius < 0.5))
        throw ConfigError("coupling.kernel_radius: radius must be in (0, 1/2)",
                          "coupling.kernel_radius");
    read_fourier(p, "coupling.g", cfg.dim, cfg.g);
    read_fourier(p, "coupling.w", cfg.dim, cfg.w);

    read_fourier(p, "data.m0", cfg.dim, cfg.m0);
    if (cfg.m0.empty())
        cfg.m0.constant = 1.0;
    read_fourier(p, "data.u_f", cfg.dim, cfg.u_f);

    auto positive = [&](const char* key, double& slot) {
        if (auto v = p.take(key))
            slot = want_number(*v, key);
        if (!(slot > 0.0))
            throw ConfigError(std::string(key) + " must be > 0", key);
    };
    positive("solver.tol_fp", cfg.tol_fp);
    positive("solver.tol_lambda", cfg.tol_lambda);
    positive("solver.tol_outer", cfg.tol_outer);
    positive("solver.dt_erg", cfg.dt_erg);
    positive("solver.t_avg", cfg.t_avg);
    if (auto v = p.take("solver.max_iter"))
        cfg.max_iter = want_int(*v, "solver.max_iter");
    if (cfg.max_iter < 1)
        throw ConfigError("solver.max_iter must be >= 1", "solver.max_iter");
    if (auto v = p.take("solver.max_outer"))
        cfg.max_outer = want_int(*v, "solver.max_outer");
    if (cfg.max_outer < 1)
        throw ConfigError("solver.max_outer must be >= 1", "solver.max_outer");
    if (auto v = p.take("solver.cesaro_window"))
        cfg.cesaro_window = want_int(*v, "solver.cesaro_window");
    if (cfg.cesaro_window < 1)
        throw ConfigError("solver.cesaro_window must be >= 1", "solver.cesaro_window");
    if (auto v = p.take("solver.damping"))
        cfg.damping = want_string(*v, "solver.damping");
    if (cfg.damping != "fictitious_play" && cfg.damping != "fixed")
        throw ConfigError("solver.damping must be fictitious_play|fixed", "solver.damping");
    if (auto v = p.take("solver.theta"))
        cfg.theta = want_number(*v, "solver.theta");
    if (!(cfg.theta > 0.0 && cfg.theta <= 1.0))
        throw ConfigError("solver.theta must lie in (0, 1]", "solver.theta");
    if (auto v = p.take("solver.theta_erg"))
        cfg.theta_erg = want_number(*v, "solver.theta_erg");
    if (!(cfg.theta_erg > 0.0 && cfg.theta_erg <= 1.0))
        throw ConfigError("solver.theta_erg must lie in (0, 1]", "solver.theta_erg");
    if (auto v = p.take("solver.scheme"))
        cfg.scheme = want_string(*v, "solver.scheme");
    if (cfg.scheme != "upwind_fv" && cfg.scheme != "sl_pushforward")
        throw ConfigError("solver.scheme must be upwind_fv|sl_pushforward", "solver.scheme");
    if (auto v = p.take("solver.cfl_safety"))
        cfg.cfl_safety = want_number(*v, "solver.cfl_safety");
    if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0))
        throw ConfigError("solver.cfl_safety must lie in (0, 1]", "solver.cfl_safety");

    if (auto v = p.take("seed")) {
        const double s = want_number(*v, "seed");
        if (s < 0 || std::abs(s - std::round(s)) > 1e-9)
            throw ConfigError("seed must be a nonnegative integer", "seed");
        cfg.seed = static_cast<std::uint64_t>(std::llround(s));
    }
    if (auto v = p.take("output_dir"))
        cfg.output_dir = want_string(*v, "output_dir");

    p.reject_unknown();

    // FNV-1a 64 of the raw text; echoed into every output file.
    std::uint64_t hsh = 1469598103934665603ull;
    for (unsigned char ch : text) {
        hsh ^= ch;
        hsh *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hsh));
    cfg.config_hash = buf;
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("config file not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

TorusGrid RunConfig::build_grid() const { return TorusGrid(dim, n); }

HamiltonianSpec RunConfig::build_hamiltonian() const {
    TorusGrid grid = build_grid();
    GridField V_field = V.render(grid);
    FourierSpec a_spec = a;
    if (a_spec.empty())
        a_spec.constant = 1.0;
    GridField a_field = a_spec.render(grid);
    return HamiltonianSpec(std::move(V_field), std::move(a_field), C_bar);
}

CouplingSpec RunConfig::build_coupling() const { return build_coupling_with_radius(kernel_radius); }

CouplingSpec RunConfig::build_coupling_with_radius(double radius) const {
    TorusGrid grid = build_grid();
    MollifierKernel kernel(grid, radius);
    if (coupling_family == "linear")
        return CouplingSpec::linear(std::move(kernel), kappa, g.render(grid), c);
    if (coupling_family == "smooth")
        return CouplingSpec::smooth_sine(std::move(kernel), sigma, w.render(grid), c);
    return CouplingSpec::zero(std::move(kernel));
}

GridMeasure RunConfig::build_m0() const {
    TorusGrid grid = build_grid();
    GridField d = m0.render(grid);
    for (double v : d.values())
        if (v < 0.0)
            throw ConfigError("data.m0 renders a negative density; adjust the Fourier terms",
                              "data.m0");
    return GridMeasure::normalized(grid, d.values());
}

GridField RunConfig::build_u_f() const { return u_f.render(build_grid()); }

MFGProblem RunConfig::build_problem() const { return build_problem_with_horizon(T); }

MFGProblem RunConfig::build_problem_with_horizon(double horizon) const {
    const int steps = std::max(1, static_cast<int>(std::lround(horizon / dt)));
    MFGProblem p(build_hamiltonian(), build_coupling(), build_m0(), build_u_f(),
                 TimeGrid(horizon, steps));
    p.scheme = build_scheme();
    return p;
}

ErgodicConfig RunConfig::build_ergodic_config() const {
    ErgodicConfig cfg;
    cfg.dt_erg = dt_erg;
    cfg.tol_lambda = tol_lambda;
    cfg.cesaro_window = cesaro_window;
    cfg.t_avg = t_avg;
    cfg.theta_erg = theta_erg;
    cfg.tol_outer = tol_outer;
    cfg.max_outer = max_outer;
    cfg.scheme = build_scheme();
    return cfg;
}

DampingRule RunConfig::build_damping() const {
    DampingRule rule;
    rule.mode = damping == "fixed" ? DampingMode::fixed : DampingMode::fictitious_play;
    rule.theta = theta;
    return rule;
}

TransportScheme RunConfig::build_scheme() const {
    TransportScheme s;
    s.mode = scheme == "sl_pushforward" ? TransportMode::sl_pushforward : TransportMode::upwind_fv;
    s.cfl_safety = cfl_safety;
    return s;
}

} // namespace ergmfg
