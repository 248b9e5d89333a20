#include "photonnet/grid.hpp"

namespace photonnet {

namespace {
void checkBounds(double lo, double hi, int bins, int min_bins) {
  if (!(lo > 0.0))
    throw ValidationError("grid: omega_min must be positive");
  if (!(hi > lo))
    throw ValidationError("grid: omega_max must exceed omega_min");
  if (bins < min_bins)
    throw ValidationError("grid: bins must be >= " + std::to_string(min_bins));
}
}  // namespace

FrequencyGrid FrequencyGrid::uniform(double omega_min, double omega_max,
                                     int bins) {
  checkBounds(omega_min, omega_max, bins, 1);
  FrequencyGrid g;
  g.omega_min_ = omega_min;
  g.omega_max_ = omega_max;
  g.bins_ = bins;
  g.scheme_ = Scheme::Uniform;
  const double d = (omega_max - omega_min) / bins;
  g.freq_.resize(bins);
  g.weight_.resize(bins);
  for (int i = 0; i < bins; ++i) {
    g.freq_(i) = omega_min + (i + 0.5) * d;
    g.weight_(i) = d;
  }
  return g;
}

FrequencyGrid FrequencyGrid::trapezoid(double omega_min, double omega_max,
                                       int bins) {
  checkBounds(omega_min, omega_max, bins, 2);
  FrequencyGrid g;
  g.omega_min_ = omega_min;
  g.omega_max_ = omega_max;
  g.bins_ = bins;
  g.scheme_ = Scheme::Trapezoid;
  const double h = (omega_max - omega_min) / (bins - 1);
  g.freq_.resize(bins);
  g.weight_.resize(bins);
  for (int i = 0; i < bins; ++i) {
    g.freq_(i) = omega_min + i * h;
    g.weight_(i) = (i == 0 || i == bins - 1) ? 0.5 * h : h;
  }
  return g;
}

bool FrequencyGrid::sameAs(const FrequencyGrid &other) const {
  return omega_min_ == other.omega_min_ && omega_max_ == other.omega_max_ &&
         bins_ == other.bins_ && scheme_ == other.scheme_;
}

GridPtr makeUniformGrid(double omega_min, double omega_max, int bins) {
  return std::make_shared<FrequencyGrid>(
      FrequencyGrid::uniform(omega_min, omega_max, bins));
}

GridPtr makeTrapezoidGrid(double omega_min, double omega_max, int bins) {
  return std::make_shared<FrequencyGrid>(
      FrequencyGrid::trapezoid(omega_min, omega_max, bins));
}

}  // namespace photonnet
