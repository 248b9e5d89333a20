#pragma once
#include <memory>

#include "photonnet/types.hpp"

namespace photonnet {

/// Discretization of a positive angular-frequency interval.
///
/// Integrals over the interval become weighted sums, and the continuum
/// delta function becomes delta_ij / weight_i, so the discrete ladder
/// commutator is [a(omega_i), a'(omega_j)] = delta_ij / weight_i.
class FrequencyGrid {
public:
  enum class Scheme { Uniform, Trapezoid };

  /// Midpoint rule: node i at omega_min + (i + 1/2) * d, weight d.
  static FrequencyGrid uniform(double omega_min, double omega_max, int bins);

  /// Trapezoid rule on endpoint nodes; requires bins >= 2.
  static FrequencyGrid trapezoid(double omega_min, double omega_max, int bins);

  double omegaMin() const { return omega_min_; }
  double omegaMax() const { return omega_max_; }
  int bins() const { return bins_; }
  Scheme scheme() const { return scheme_; }
  const VecXd &frequencies() const { return freq_; }
  const VecXd &weights() const { return weight_; }
  double frequency(int i) const { return freq_(i); }
  double weight(int i) const { return weight_(i); }

  bool sameAs(const FrequencyGrid &other) const;

private:
  FrequencyGrid() = default;
  double omega_min_ = 0.0;
  double omega_max_ = 0.0;
  int bins_ = 0;
  Scheme scheme_ = Scheme::Uniform;
  VecXd freq_;
  VecXd weight_;
};

using GridPtr = std::shared_ptr<const FrequencyGrid>;

GridPtr makeUniformGrid(double omega_min, double omega_max, int bins);
GridPtr makeTrapezoidGrid(double omega_min, double omega_max, int bins);

}  // namespace photonnet
