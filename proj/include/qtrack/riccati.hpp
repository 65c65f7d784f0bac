#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qtrack/model.hpp"

namespace qtrack {

enum class Direction { forward, backward };

struct VarianceCurve {
  std::vector<double> t;  // seconds, uniform grid
  std::vector<double> v;  // conditional variance per grid point
  Direction direction = Direction::forward;
};

// Conditional-variance dynamics. The forward equation
//   dV/dt = -gm V + gm (n_th + 1/2) + gqba - 4 gmeas V^2
// has roots (v_steady, -v_e_steady); the backward equation flips the damping
// sign and has roots (v_e_steady, -v_steady). Both relax at rate 2*alpha, so
// with u(t) = u0 exp(-2 alpha t):
//   V(t)   = v_steady   + (v_steady + v_e_steady) u/(1-u),  u0 = (v0-Vs)/(v0+VEs)
//   V_E(s) = v_e_steady + (v_steady + v_e_steady) u/(1-u),  u0 = (v0-VEs)/(v0+Vs)

/// Closed-form V(t) for an arbitrary initial variance v0 >= 1/2.
double v_analytic(const DerivedRates& p, double v0, double t);

/// Closed-form V_E as a function of time-before-final-condition.
double v_e_backward(const DerivedRates& p, double vE_final, double t_before_end);

/// Fixed-step RK4 integration of the variance ODE on the given uniform grid,
/// substepped so that h*(8 gmeas v0 + gm) <= 1e-3. Test oracle for the closed
/// forms; independent of v_analytic / v_e_backward.
VarianceCurve v_ode_oracle(const DerivedRates& p, double v0,
                           std::span<const double> t_grid,
                           Direction direction = Direction::forward);

/// Pointwise schedules on a uniform grid of n samples spaced dt, as consumed
/// by the filters. Forward: V(t_k) from V(0) = v0. Backward: V_E(t_k) with
/// the final condition vE_final at t_{n-1}.
std::vector<double> forward_schedule(const DerivedRates& p, double v0,
                                     std::size_t n, double dt);
std::vector<double> backward_schedule(const DerivedRates& p, double vE_final,
                                      std::size_t n, double dt);

/// Step-averaged schedules: element k is the exact average of V (resp. V_E)
/// over [t_k, t_{k+1}]. Using the average rather than the left endpoint as
/// the filter gain keeps the discrete recursion faithful through the initial
/// collapse, where V changes by a sizable factor within one step.
std::vector<double> forward_gain_schedule(const DerivedRates& p, double v0,
                                          std::size_t n, double dt);
std::vector<double> backward_gain_schedule(const DerivedRates& p, double vE_final,
                                           std::size_t n, double dt);

/// Time to reach |V - v_steady| < tol*v_steady from v0 (same for either
/// direction by symmetry of the relaxation rate).
double steady_state_time(const DerivedRates& p, double v0, double tol = 1e-3);

void write_csv(const VarianceCurve& curve, const std::string& path);

}  // namespace qtrack
