#pragma once
#include <unordered_map>

#include "photonnet/state.hpp"

namespace photonnet {

struct ContractionOptions {
  /// Pairwise mode overlaps; null means orthonormal modes.
  const ModeOverlap *overlap = nullptr;
  /// Cap on pairing enumerations per coupled slot group.
  double bijection_budget = 1.0e6;
  /// Cap on grid cells swept per dense contraction.
  double dense_cell_budget = 1.0e6;
  int permanent_enum_max = 5;
  int permanent_ryser_max = 12;
};

/// Reusable contraction state: options plus a cache of chain/cycle component
/// values keyed by factor storage identity. A context must not outlive the
/// states whose terms it has contracted.
class ContractionContext {
public:
  ContractionContext() = default;
  explicit ContractionContext(ContractionOptions o) : opts(o) {}
  ContractionOptions opts;
  std::unordered_map<std::string, Complex> component_cache;
};

/// Vacuum expectation of one bra term against one ket term (coefficients
/// excluded): sum over slot pairings of the overlap factors times the grid
/// contraction of conj(bra amplitude) with the ket amplitude.
Complex contractTerms(const MonomialTerm &bra, const MonomialTerm &ket,
                      const FrequencyGrid &grid, ContractionContext &ctx);

/// <bra|ket>; conjugate-linear in bra. States must share grid and registry.
Complex innerProduct(const StateVector &bra, const StateVector &ket,
                     ContractionContext *ctx = nullptr);

/// <psi|psi>; validated real and clamped nonnegative.
double normSquared(const StateVector &psi, ContractionContext *ctx = nullptr);

/// Matrix of contractTerms values, rows = bra terms, cols = ket terms.
MatXc termGram(const StateVector &bra, const StateVector &ket,
               ContractionContext &ctx);

/// <bra| Q |ket> for Q = sum over modes x in scope of
/// int int K(w, w') x'(w) x(w'), passing KW = K * diag(weights).
Complex quadraticFormCrossKW(const StateVector &bra, const StateVector &ket,
                             const std::vector<int> &scope, const MatXc &kw,
                             ContractionContext *ctx = nullptr);

/// <psi| Q |psi> with the plain kernel K; KW is formed internally.
Complex quadraticFormExpectation(const StateVector &psi,
                                 const std::vector<int> &scope, const MatXc &k,
                                 ContractionContext *ctx = nullptr);

/// <psi| H |psi> in joules, H = sum over all modes of int hbar w a'(w) a(w).
/// Exact in grid arithmetic: the integrand weight is the node frequency.
double energyExpectation(const StateVector &psi, ContractionContext *ctx = nullptr);

/// Throws ContractError unless |<psi|psi> - 1| <= tol.
void requireNormalized(const StateVector &psi, double tol = 1e-6,
                       ContractionContext *ctx = nullptr);

}  // namespace photonnet
