#pragma once

#include "qtrack/model.hpp"

// Reference parameter set used across the suites: the membrane-in-cavity
// configuration with backaction-dominated decoherence.
inline qtrack::ModelParams reference_params() {
  qtrack::ModelParams p;
  p.omega_m = qtrack::hz_to_rad(1.138e6);
  p.gamma_m = qtrack::hz_to_rad(130.0);
  p.n_th = 2.0;
  p.gamma_qba = qtrack::hz_to_rad(2540.0);
  p.gamma_meas = qtrack::hz_to_rad(1880.0);
  p.eta_det = 0.74;
  return p;
}
