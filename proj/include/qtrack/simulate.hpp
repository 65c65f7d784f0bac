#pragma once

#include <cstdint>

#include "qtrack/model.hpp"
#include "qtrack/record.hpp"

namespace qtrack {

/// Euler-Maruyama integration of the quadrature pair
///   dx = -(gamma_m/2) x dt + sqrt(diffusion) dB
/// per channel with independent noise, initialized from the stationary
/// Gaussian of variance v_bath. The ensemble of these trajectories is the
/// classical equivalent of the unconditional oscillator state.
TruthTrajectory simulate_truth(const ModelParams& p, double dt, std::size_t n,
                               std::uint64_t seed, std::uint64_t segment = 0);

/// i_k = sqrt(4 gamma_meas) x_k + w_k/dt with independent Gaussian w_k of
/// variance dt per channel.
MeasurementRecord measure(const TruthTrajectory& truth, const ModelParams& p,
                          std::uint64_t seed, std::uint64_t segment = 0);

/// Carrier-rate photocurrent
///   I(t) = sqrt(8 gamma_meas) [X cos(omega_m t) + Y sin(omega_m t)] + noise
/// with unit PSD background at rate fs. The sqrt(2) relative to the baseband
/// channels compensates the noise-bandwidth split of IQ demodulation, so the
/// demod pipeline recovers records statistically equivalent to measure().
/// Truth samples are zero-order held onto the carrier grid.
CarrierRecord synthesize_carrier(const TruthTrajectory& truth, const ModelParams& p,
                                 double fs, std::uint64_t seed,
                                 std::uint64_t segment = 0);

}  // namespace qtrack
