#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "atmo/field.hpp"
#include "atmo/grid.hpp"
#include "atmo/linear_solvers.hpp"
#include "atmo/operators.hpp"
#include "atmo/params.hpp"
#include "atmo/sources.hpp"

namespace atmo {

/// Solver state at one time level. `p` is the rescaled 3D pressure of the
/// anisotropic system; the hydrostatic system stores its surface pressure
/// in `ps` and leaves `p` empty.
struct SimState {
    double t = 0.0;
    long step = 0;
    StaggeredVelocity u;
    ScalarField p;
    Array2 ps;
    ScalarField C;
    SolveStats last_solve;
};

SimState zero_state(const Grid& grid, SolverMode mode);

/// Extra right-hand sides (rates) added at time t to the momentum and
/// concentration tendencies; used for manufactured solutions.
using Forcing = std::function<void(double t, StaggeredVelocity& du, ScalarField& dc)>;

/// Everything a step needs besides the state.
struct StepInputs {
    PhysParams params;
    DiffusionTensor M;
    BoundaryForcing theta;
    const PollutionSource* source = nullptr;
    AdvectionScheme advection = AdvectionScheme::upwind1;
    double tol = 1e-8;
    int max_iter = 1000;
    Forcing forcing;
};

/// NaN, CFL violation or solver failure during time stepping.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

}  // namespace atmo
