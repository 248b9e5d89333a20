#pragma once
#include <variant>

#include "photonnet/detection.hpp"

namespace photonnet {

/// One dyad weight |ket><bra|. Weights are real and nonnegative; phases
/// belong in the state coefficients.
struct DensityTerm {
  double weight = 0.0;
  StateVector ket;
  StateVector bra;
};

/// Finite mixture / dyad sum over a shared grid and registry.
class DensityOp {
public:
  static DensityOp fromTerms(GridPtr grid, RegistryPtr registry,
                             std::vector<DensityTerm> terms);
  static DensityOp pure(const StateVector &psi);
  static DensityOp
  mixture(const std::vector<std::pair<double, StateVector>> &parts);

  const GridPtr &grid() const { return grid_; }
  const RegistryPtr &registry() const { return registry_; }
  const std::vector<DensityTerm> &terms() const { return terms_; }

  /// Largest total photon count over the kets and bras.
  int maxPhotonCount() const;

private:
  DensityOp(GridPtr grid, RegistryPtr registry, std::vector<DensityTerm> t)
      : grid_(std::move(grid)), registry_(std::move(registry)),
        terms_(std::move(t)) {}
  GridPtr grid_;
  RegistryPtr registry_;
  std::vector<DensityTerm> terms_;
};

/// Tr rho = sum_i w_i <bra_i|ket_i>.
Complex traceOf(const DensityOp &rho, ContractionContext *ctx = nullptr);

struct IdentityObservable {};
struct ProjectorObservable {
  std::vector<int> scope;
  int n = 0;
};
struct NumberObservable {
  std::vector<int> scope;
};
/// Two-point kernel observable sum over scope of int int K(w,w') a'(w) a(w').
struct QuadraticObservable {
  std::vector<int> scope;
  MatXc kernel;
};
struct OutcomeObservable {
  OutcomeSpec spec;
};
using Observable =
    std::variant<IdentityObservable, ProjectorObservable, NumberObservable,
                 QuadraticObservable, OutcomeObservable>;

/// Tr(rho M) through Tr(|k><b| M) = <b| M |k>, term by term.
Complex traceExpectation(const DensityOp &rho, const Observable &obs,
                         ContractionContext *ctx = nullptr);

/// Traces out every mode not in `keep`. Traced slots contract pairwise
/// between ket and bra amplitudes (counts must match mode by mode, summed
/// over slot bijections); each surviving joint kernel is then refactored
/// into dyads through an SVD, dropping singular values below 1e-14 of the
/// largest. Modes may only be traced out when they are orthogonal to
/// everything kept, which the optional overlap is checked against.
DensityOp partialTrace(const DensityOp &rho, const std::vector<int> &keep,
                       const ModeOverlap *overlap = nullptr);

/// Single photon in `mode` with shape f, decayed for a time t at per-bin
/// rate gamma >= 0: the surviving branch keeps amplitude
/// f(w) exp(-gamma(w) t) exp(i w t), and the lost weight moves to vacuum,
/// so the trace stays exactly 1.
DensityOp decayedSinglePhotonDensity(GridPtr grid, RegistryPtr registry,
                                     int mode, const VecXc &f,
                                     const VecXd &gamma, double t);

/// Tr(sqrt(rho1) sqrt(rho2)), computed in a dense occupation basis
/// (eigendecomposition with negative eigenvalues clamped to zero).
double fidelityOverlap(const DensityOp &rho1, const DensityOp &rho2);

} // namespace photonnet
