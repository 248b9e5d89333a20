#pragma once
#include "photonnet/contraction.hpp"

namespace photonnet {

/// Avalanche photodiode watching a set of modes. Detection is
/// frequency-flat: given n photons across the scope, the click probability
/// is 1 - (1 - p_dark)(1 - eta_det)^n.
struct ApdModel {
  std::vector<int> scope;
  double eta_det = 1.0;
  double p_dark = 0.0;
};

double prDetectGivenN(const ApdModel &apd, int n);

/// Keeps the terms carrying exactly n photons across the scope modes.
/// Idempotent; the projectors over n partition every state.
StateVector projectorApply(const StateVector &psi,
                           const std::vector<int> &scope, int n);

/// sum_n n |P_n psi|^2 over the scope. Input must be normalized (1e-6).
double numberExpectation(const StateVector &psi, const std::vector<int> &scope,
                         ContractionContext *ctx = nullptr);

/// Same quantity through the two-point kernel route: the quadratic form of
/// the flat kernel K = diag(1/w), one number operator per scope mode.
double numberExpectationQuadratic(const StateVector &psi,
                                  const std::vector<int> &scope,
                                  ContractionContext *ctx = nullptr);

/// No-click operator: scales each term by (1 - p_dark)(1 - eta_det)^k with
/// k the term's photon count across the scope. Frequency-flat response, so
/// amplitudes are untouched and applications for different diodes commute
/// bit for bit.
StateVector applyNoDetect(const StateVector &psi, const ApdModel &apd);

/// A joint outcome: the diodes in `silent` stay quiet while every diode in
/// `fired` clicks. Scopes must be pairwise disjoint.
struct OutcomeSpec {
  std::vector<ApdModel> silent;
  std::vector<ApdModel> fired;
};

/// <bra| M |ket> for the outcome operator M = prod(silent M0) prod(fired
/// (1 - M0)), evaluated per term pair so the alternating subset sum never
/// cancels catastrophically. No normalization or range check.
Complex outcomeBilinear(const StateVector &bra, const StateVector &ket,
                        const OutcomeSpec &spec, ContractionContext &ctx);

/// Joint click/no-click probability for a normalized state. Values within
/// 1e-10 outside [0, 1] are clamped; anything further is an error.
double outcomeProbability(const StateVector &psi, const OutcomeSpec &spec,
                          ContractionContext *ctx = nullptr);

/// All 2^D joint outcomes; bit d of the row index means diode d fired.
/// Shares one Gram pass across the whole table; rows sum to 1.
std::vector<double> outcomeTable(const StateVector &psi,
                                 const std::vector<ApdModel> &diodes,
                                 ContractionContext *ctx = nullptr);

/// Spectrally filtered single-photon tap: project onto a'_g(mode)|0>.
struct FilterTap {
  int mode = 0;
  VecXc g; // normalized filter shape
};

/// |<prod_j a'_{g_j}(mode_j) vacuum | psi>|^2; taps on distinct modes.
double filteredDetectorProbability(const StateVector &psi,
                                   const std::vector<FilterTap> &taps,
                                   ContractionContext *ctx = nullptr);

/// Probabilities for a family of orthonormal filters on one mode.
std::vector<double>
filteredOutcomeDistribution(const StateVector &psi, int mode,
                            const std::vector<VecXc> &family,
                            ContractionContext *ctx = nullptr);

/// Detection gate of duration T centered at t_gate, watching position x.
struct GateWindow {
  double t_gate = 0.0;
  double duration = 0.0;
  double position = 0.0;
  VecXd k;                              // per-bin wavenumber; empty if x = 0
  Direction direction = Direction::Plus; // propagation toward the detector
};

/// Two-point kernel of the time-gated photon-number response,
///   K(w, w') = exp(i [(w - w') t_gate -+ (k(w) - k(w')) x])
///              * sin((w - w') T / 2) / (pi (w - w')),
/// diagonal T / (2 pi). Hermitian; approaches the flat number kernel as T
/// grows past the inverse bandwidth.
MatXc gatedQuadraticKernel(const FrequencyGrid &grid, const GateWindow &gate);

/// First-order click probability p_dark + (1 - p_dark) eta_det <Q> with Q
/// the number operator over the scope, or the gated kernel when given.
/// Valid for weak illumination; not clamped.
double linearizedDetectProbability(const StateVector &psi, const ApdModel &apd,
                                   const MatXc *kernel = nullptr,
                                   ContractionContext *ctx = nullptr);

/// One photon-number sector of a state: its weight |C_n|^2 and the click
/// probability conditioned on that sector.
struct PhotonBlock {
  int n = 0;
  double weight = 0.0;
  double conditional = 0.0;
};

/// Splits psi by photon count over the diode scope. Because the response is
/// frequency-flat, Pr(click) = sum_n weight_n * conditional_n with no cross
/// terms between sectors.
std::vector<PhotonBlock>
noCrossTermsDecomposition(const StateVector &psi, const ApdModel &apd,
                          ContractionContext *ctx = nullptr);

} // namespace photonnet
