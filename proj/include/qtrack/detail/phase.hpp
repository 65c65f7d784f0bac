#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace qtrack::detail {

// cos/sin of omega * j * dt for j = 0, 1, ... Tabulated when the period is an
// integer number of samples (exact, fast); otherwise evaluated per sample.
class CarrierPhase {
 public:
  CarrierPhase(double omega, double dt) : omega_(omega), dt_(dt) {
    const double samples_per_cycle = 6.283185307179586476925286766559 / (omega * dt);
    const auto cycle = static_cast<std::size_t>(std::llround(samples_per_cycle));
    if (cycle >= 2 && std::abs(samples_per_cycle - static_cast<double>(cycle)) < 1e-12) {
      cos_.resize(cycle);
      sin_.resize(cycle);
      for (std::size_t j = 0; j < cycle; ++j) {
        const double ph =
            6.283185307179586476925286766559 * static_cast<double>(j) / static_cast<double>(cycle);
        cos_[j] = std::cos(ph);
        sin_[j] = std::sin(ph);
      }
    }
  }

  void at(std::size_t j, double& c, double& s) const {
    if (!cos_.empty()) {
      const std::size_t ph = j % cos_.size();
      c = cos_[ph];
      s = sin_[ph];
    } else {
      const double wt = omega_ * static_cast<double>(j) * dt_;
      c = std::cos(wt);
      s = std::sin(wt);
    }
  }

 private:
  double omega_;
  double dt_;
  std::vector<double> cos_, sin_;
};

}  // namespace qtrack::detail
