#pragma once
#include <unordered_map>
#include <vector>

#include "photonnet/amplitude.hpp"
#include "photonnet/modes.hpp"

namespace photonnet {

/// One creation monomial acting on the vacuum: coeff times the product over
/// slots s of a'_{mode[s]}(omega_s), integrated against amplitude(omega_0,
/// ..., omega_{n-1}). Slot s always reads amplitude argument s.
struct MonomialTerm {
  Complex coeff{1.0, 0.0};
  std::vector<int> modes;
  SpectralAmplitude amplitude;
};

/// Canonical form: slots sorted by mode index (stable), amplitude arguments
/// relabeled along.
MonomialTerm canonicalizedTerm(MonomialTerm t);

int photonCount(const MonomialTerm &t, int mode);
int photonCount(const MonomialTerm &t);

/// Finite superposition of creation monomials over a shared grid and
/// registry. Terms are kept canonical and merged on construction.
class StateVector {
public:
  static StateVector make(GridPtr grid, RegistryPtr registry,
                          std::vector<MonomialTerm> terms);
  static StateVector vacuum(GridPtr grid, RegistryPtr registry);

  const GridPtr &grid() const { return grid_; }
  const RegistryPtr &registry() const { return registry_; }
  const std::vector<MonomialTerm> &terms() const { return terms_; }
  bool isZero() const { return terms_.empty(); }

  StateVector scaled(Complex c) const;
  StateVector plus(const StateVector &other) const;

  /// Largest total slot count over terms.
  int maxPhotonCount() const;

  json toJson() const;
  static StateVector fromJson(const json &j, const std::string &path);

private:
  StateVector(GridPtr grid, RegistryPtr registry, std::vector<MonomialTerm> terms)
      : grid_(std::move(grid)), registry_(std::move(registry)),
        terms_(std::move(terms)) {}
  GridPtr grid_;
  RegistryPtr registry_;
  std::vector<MonomialTerm> terms_;
};

/// Rewrites creation operators mode by mode:
///   a'_x(omega) -> sum_k coeff_k(omega) a'_{y_k}(omega).
struct SubstitutionTarget {
  int out_mode = 0;
  std::shared_ptr<const VecXc> coeff;
};
using SubstitutionRule = std::unordered_map<int, std::vector<SubstitutionTarget>>;

/// Applies the rule slot by slot; modes without a rule pass through
/// unchanged. Exact for product payloads (pointwise 1-D multiplies).
StateVector applySubstitution(const StateVector &psi, const SubstitutionRule &rule);

}  // namespace photonnet
