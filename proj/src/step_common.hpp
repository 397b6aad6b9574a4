#pragma once

#include <cstdio>
#include <string>

#include "atmo/state.hpp"

namespace atmo::detail {

/// Forcing rates at t (zero fields when no forcing is set).
struct ForcingRates {
    StaggeredVelocity du;
    ScalarField dc;
};
ForcingRates forcing_rates(const StepInputs& in, double t, const Grid& grid);

/// u + dt (Delta_nu u - (u.grad)u + f) with the mode's boundary conditions;
/// u3 is left untouched in hydrostatic mode.
StaggeredVelocity momentum_predictor(const SimState& s, const StepInputs& in, double dt,
                                     const Grid& grid, SolverMode mode, const ForcingRates& f);

/// C + dt (-u.grad C + div(M grad C) + S(t) + g) with the old velocity.
ScalarField concentration_update(const SimState& s, const StepInputs& in, double dt,
                                 const Grid& grid, const ForcingRates& f);

void check_step(const SimState& s, const StepInputs& in, double dt, const Grid& grid);
void check_finite(const SimState& s);

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

}  // namespace atmo::detail
