#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "atmo/state.hpp"

namespace atmo {

/// Value, first and second derivative of a 1D profile.
using Jet = std::array<double, 3>;
using Profile = std::function<Jet(double)>;

namespace profiles {
Profile one();
/// sin^2(pi x / L): vanishes with its slope at 0 and L.
Profile bump(double L);
/// d/dx of bump(L).
Profile bump_slope(double L);
/// sin(pi x / L).
Profile sine(double L);
/// cos(pi z / 2h): zero slope at the ground, zero at the top.
Profile quarter_cosine(double h);
/// h kappa(z/h) with kappa(s) = s - 3 s^3 + 2 s^4: zero at both ends,
/// zero slope at the top, zero curvature at the ground.
Profile overturn(double h);
/// d/dz of overturn(h).
Profile overturn_slope(double h);
/// (h - z)^2.
Profile top_square(double h);
}  // namespace profiles

/// Sum of products coef * X(x1) Y(x2) Z(x3).
class SeparableField {
public:
    struct Term {
        double coef;
        Profile x, y, z;
    };

    SeparableField() = default;
    SeparableField& add(double coef, Profile x, Profile y, Profile z);

    bool empty() const { return terms_.empty(); }
    double value(const Vec3& p) const;
    Vec3 gradient(const Vec3& p) const;
    Mat3 hessian(const Vec3& p) const;
    double laplacian(const Vec3& p, const Vec3& nu) const;
    SeparableField scaled(double a) const;

private:
    std::vector<Term> terms_;
};

/// eta(t) = ((T_end - t) / T_end)^2 before T_end and 0 after.
struct TimeFactor {
    double t_end = 1.0;
    double value(double t) const;
    double derivative(double t) const;
    double integral(double a, double b) const;
};

/// Space-time test pair (u~, C~)(x, t) = eta(t) (phi(x), chi(x)).
struct TestFunction {
    std::string name;
    std::array<SeparableField, 3> u;
    SeparableField c;
    TimeFactor eta;

    TestFunction scaled(double a) const;
};

/// Streamfunction, overturning and concentration tests vanishing for
/// t >= T - spacing.
std::vector<TestFunction> standard_test_family(const Grid& grid, double T, double spacing);

/// Throws std::invalid_argument if the velocity part is not divergence
/// free, u~ or C~ does not vanish on Gamma_A, or eta(T) != 0.
void validate_test_function(const TestFunction& f, const Grid& grid, double T);

/// Every term of the two integral identities for one test function.
/// LHS terms: u_time, u_visc, u_adv, u_coriolis, u_eps_beta, u_eps2 and
/// c_time, c_adv, c_diff. RHS terms: u_init, u_traction, u_forcing and
/// c_init, c_source, c_forcing.
struct WeakTerms {
    std::string name;
    double u_time = 0.0, u_visc = 0.0, u_adv = 0.0, u_coriolis = 0.0, u_eps_beta = 0.0,
           u_eps2 = 0.0;
    double u_init = 0.0, u_traction = 0.0, u_forcing = 0.0;
    double c_time = 0.0, c_adv = 0.0, c_diff = 0.0;
    double c_init = 0.0, c_source = 0.0, c_forcing = 0.0;

    double defect_u() const;
    double defect_c() const;
    double residual_u() const;
    double residual_c() const;
};

/// Streaming evaluator of the weak identities: feed states in time order
/// starting at t = 0; time integrals are trapezoidal between fed states
/// except the source and traction terms, which use the exact integral of
/// eta. Gradient pairings use the scheme's discrete link differences (with
/// its boundary ghosts) against analytic test gradients at link midpoints;
/// nonlinear and Coriolis terms are evaluated at cell centres.
class WeakResidual {
public:
    WeakResidual(SolverMode mode, std::vector<TestFunction> family, const StepInputs& in,
                 const Grid& grid);
    ~WeakResidual();
    WeakResidual(const WeakResidual&) = delete;
    WeakResidual& operator=(const WeakResidual&) = delete;

    void add(const SimState& s);
    std::vector<WeakTerms> finish() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::vector<WeakTerms> weak_residual(std::span<const SimState> history, SolverMode mode,
                                     std::vector<TestFunction> family, const StepInputs& in,
                                     const Grid& grid);

}  // namespace atmo
