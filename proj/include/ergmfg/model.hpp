#pragma once

#include <array>
#include <optional>

#include "ergmfg/measures.hpp"
#include "ergmfg/torus.hpp"

namespace ergmfg {

/// Quadratic-family Hamiltonian H(x,p) = a(x)|p|^2/2 - V(x) with
/// stiffness a(x) in [1/C_bar, C_bar]. Even in p, so the optimal control
/// -D_pH(x,Du) equals D_pH(x,-Du) and the semi-Lagrangian argmin doubles
/// as the transport drift.
struct HamiltonianSpec {
    HamiltonianSpec(GridField potential, GridField stiffness, double c_bar);
    /// a == 1 everywhere (the quadratic case of the closed-form oracle).
    static HamiltonianSpec quadratic(GridField potential, double c_bar = 1.0);

    GridField potential; // V
    GridField stiffness; // a
    double c_bar;        // C_bar, 1/C_bar <= a <= C_bar

    bool is_unit_stiffness() const;
};

double hamiltonian_eval(const HamiltonianSpec& spec, std::size_t node,
                        const std::array<double, 2>& p);
std::array<double, 2> d_p_hamiltonian(const HamiltonianSpec& spec, std::size_t node,
                                      const std::array<double, 2>& p);
/// Fenchel conjugate: L(x,v) = |v|^2/(2 a(x)) + V(x).
double lagrangian_eval(const HamiltonianSpec& spec, std::size_t node,
                       const std::array<double, 2>& v);

/// Brute-force sup_p <p,v> - H(x,p) over a p-grid box [-p_box, p_box]^d
/// with step dp. Errors if the maximizer sits on the box boundary.
double legendre_oracle(const HamiltonianSpec& spec, std::size_t node,
                       const std::array<double, 2>& v, double p_box, double dp);

/// Lagrangian-side view of a HamiltonianSpec: closed-form running cost and
/// a velocity box large enough for the backward solver.
struct LagrangianView {
    explicit LagrangianView(const HamiltonianSpec& spec, double v_max_hint = 0.0);
    GridField inverse_stiffness; // 1/a
    GridField potential;         // V
    double v_max;                // velocity box half-width
};

enum class CouplingFamily {
    linear,      // Fbar(x,z) = kappa z + g(x)
    smooth_sine, // Fbar(x,z) = z + (sigma/2) sin(z) w(x)
    zero,        // Fbar == 0; decoupled runs and diagnostics only
};

/// Nonlocal smoothing coupling F(x,m) = (Fbar(., (m*xi)(.)) * xi)(x) with a
/// mollifier kernel xi and a strictly increasing inner map Fbar whose
/// z-slope lies in [c, 1/c]. The derived weak-coercivity constant is
/// c_bar = c^3 / |xi|_{L2}^2 (discrete norm).
class CouplingSpec {
public:
    static CouplingSpec linear(MollifierKernel kernel, double kappa, GridField g,
                               std::optional<double> c = std::nullopt);
    static CouplingSpec smooth_sine(MollifierKernel kernel, double sigma, GridField w,
                                    std::optional<double> c = std::nullopt);
    static CouplingSpec zero(MollifierKernel kernel);

    CouplingFamily family() const { return family_; }
    const MollifierKernel& kernel() const { return kernel_; }
    const TorusGrid& grid() const { return kernel_.grid(); }
    double kappa() const { return kappa_; }
    double sigma() const { return sigma_; }
    const GridField& g() const { return g_; }
    const GridField& w() const { return w_; }
    /// The slope constant c of the inner map.
    double c() const { return c_; }
    bool is_zero() const { return family_ == CouplingFamily::zero; }

    double fbar(std::size_t node, double z) const;
    double dfbar_dz(std::size_t node, double z) const;

    /// c_bar = c^3 / |xi|_2^2.
    double coercivity_constant() const;
    /// K with |F(.,m1)-F(.,m2)|_inf <= K d1(m1,m2).
    double lipschitz_constant() const;
    /// Bound on the discrete C2 norm of F(.,m), uniform over probability m.
    double c2_bound() const;
    /// Bound on |F(.,m)|_inf, uniform over probability m.
    double sup_bound() const;

private:
    CouplingSpec(CouplingFamily family, MollifierKernel kernel, double kappa, double sigma,
                 GridField g, GridField w, double c);
    CouplingFamily family_;
    MollifierKernel kernel_;
    double kappa_;
    double sigma_;
    GridField g_;
    GridField w_;
    double c_;
};

/// F(.,m) = xi * Fbar(., xi * m).
GridField coupling_eval(const CouplingSpec& spec, const GridMeasure& m);

struct CoercivityReport {
    double lhs;      // integral of (F(m1)-F(m2)) d(m1-m2)
    double rhs_l2sq; // |F(m1)-F(m2)|_{L2}^2
    double ratio;    // lhs / rhs (inf when rhs ~ 0)
    bool passes;     // lhs >= c_bar rhs - 1e-10
};

CoercivityReport coercivity_check(const CouplingSpec& spec, const GridMeasure& m1,
                                  const GridMeasure& m2);

} // namespace ergmfg
