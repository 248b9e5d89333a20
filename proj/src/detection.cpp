#include "photonnet/detection.hpp"

#include <cmath>
#include <set>

namespace photonnet {

namespace {

void validateApd(const ApdModel &apd, const StateVector &psi,
                 const char *what) {
  if (apd.scope.empty())
    throw ValidationError(std::string(what) + ": empty detector scope");
  std::set<int> seen;
  for (int m : apd.scope) {
    if (m < 0 || m >= psi.registry()->size())
      throw ValidationError(std::string(what) +
                            ": scope mode index out of range");
    if (!seen.insert(m).second)
      throw ValidationError(std::string(what) + ": repeated scope mode");
  }
  if (!(apd.eta_det >= 0.0 && apd.eta_det <= 1.0))
    throw ValidationError(std::string(what) + ": eta_det must lie in [0, 1]");
  if (!(apd.p_dark >= 0.0 && apd.p_dark <= 1.0))
    throw ValidationError(std::string(what) + ": p_dark must lie in [0, 1]");
}

void requireDisjointScopes(const std::vector<const ApdModel *> &diodes,
                           const char *what) {
  std::set<int> seen;
  for (const ApdModel *apd : diodes)
    for (int m : apd->scope)
      if (!seen.insert(m).second)
        throw ValidationError(std::string(what) +
                              ": detector scopes overlap on mode " +
                              std::to_string(m));
}

int scopeCount(const MonomialTerm &t, const std::vector<int> &scope) {
  int n = 0;
  for (int m : scope)
    n += photonCount(t, m);
  return n;
}

/// No-click factor of one diode on one ket term.
double quietFactor(const ApdModel &apd, int n) {
  return (1.0 - apd.p_dark) * std::pow(1.0 - apd.eta_det, n);
}

double clampProbability(double p, const char *what) {
  if (p < -1e-10 || p > 1.0 + 1e-10)
    throw ContractError(std::string(what) +
                        ": probability out of range by more than 1e-10 (" +
                        std::to_string(p) + ")");
  return std::min(1.0, std::max(0.0, p));
}

} // namespace

double prDetectGivenN(const ApdModel &apd, int n) {
  if (n < 0)
    throw ValidationError("prDetectGivenN: negative photon number");
  return 1.0 - (1.0 - apd.p_dark) * std::pow(1.0 - apd.eta_det, n);
}

StateVector projectorApply(const StateVector &psi,
                           const std::vector<int> &scope, int n) {
  std::vector<MonomialTerm> kept;
  for (const MonomialTerm &t : psi.terms())
    if (scopeCount(t, scope) == n)
      kept.push_back(t);
  return StateVector::make(psi.grid(), psi.registry(), std::move(kept));
}

double numberExpectation(const StateVector &psi, const std::vector<int> &scope,
                         ContractionContext *ctx) {
  ContractionContext local;
  ContractionContext &c = ctx != nullptr ? *ctx : local;
  requireNormalized(psi, 1e-6, &c);
  double total = 0.0;
  for (int n = 1; n <= psi.maxPhotonCount(); ++n) {
    StateVector block = projectorApply(psi, scope, n);
    if (block.isZero())
      continue;
    total += n * normSquared(block, &c);
  }
  return total;
}

double numberExpectationQuadratic(const StateVector &psi,
                                  const std::vector<int> &scope,
                                  ContractionContext *ctx) {
  const int bins = psi.grid()->bins();
  MatXc kw = MatXc::Identity(bins, bins); // K = diag(1/w) times the weights
  Complex q = quadraticFormCrossKW(psi, psi, scope, kw, ctx);
  return q.real();
}

StateVector applyNoDetect(const StateVector &psi, const ApdModel &apd) {
  validateApd(apd, psi, "applyNoDetect");
  std::vector<MonomialTerm> terms = psi.terms();
  for (MonomialTerm &t : terms)
    t.coeff *= quietFactor(apd, scopeCount(t, apd.scope));
  return StateVector::make(psi.grid(), psi.registry(), std::move(terms));
}

Complex outcomeBilinear(const StateVector &bra, const StateVector &ket,
                        const OutcomeSpec &spec, ContractionContext &ctx) {
  std::vector<const ApdModel *> all;
  for (const ApdModel &apd : spec.silent) {
    validateApd(apd, ket, "outcome");
    all.push_back(&apd);
  }
  for (const ApdModel &apd : spec.fired) {
    validateApd(apd, ket, "outcome");
    all.push_back(&apd);
  }
  requireDisjointScopes(all, "outcome");

  MatXc g = termGram(bra, ket, ctx);
  // The alternating sum over fired subsets collapses per ket term:
  // sum_{X subset fired} (-1)^|X| prod_X quiet = prod_fired (1 - quiet).
  // Where the Gram entry is nonzero the bra counts agree, so evaluating
  // the factors on the ket term alone is exact.
  Complex total(0.0, 0.0);
  for (std::size_t tj = 0; tj < ket.terms().size(); ++tj) {
    const MonomialTerm &t = ket.terms()[tj];
    double factor = 1.0;
    for (const ApdModel &apd : spec.silent)
      factor *= quietFactor(apd, scopeCount(t, apd.scope));
    for (const ApdModel &apd : spec.fired)
      factor *= 1.0 - quietFactor(apd, scopeCount(t, apd.scope));
    if (factor == 0.0)
      continue;
    for (std::size_t si = 0; si < bra.terms().size(); ++si) {
      Complex gij = g(Eigen::Index(si), Eigen::Index(tj));
      if (gij == Complex(0.0, 0.0))
        continue;
      total += std::conj(bra.terms()[si].coeff) * t.coeff * factor * gij;
    }
  }
  return total;
}

double outcomeProbability(const StateVector &psi, const OutcomeSpec &spec,
                          ContractionContext *ctx) {
  ContractionContext local;
  ContractionContext &c = ctx != nullptr ? *ctx : local;
  requireNormalized(psi, 1e-6, &c);
  Complex p = outcomeBilinear(psi, psi, spec, c);
  if (std::abs(p.imag()) > 1e-10)
    throw ContractError("outcomeProbability: non-real expectation");
  return clampProbability(p.real(), "outcomeProbability");
}

std::vector<double> outcomeTable(const StateVector &psi,
                                 const std::vector<ApdModel> &diodes,
                                 ContractionContext *ctx) {
  if (diodes.empty())
    throw ValidationError("outcomeTable: no detectors");
  if (diodes.size() > 20)
    throw ValidationError("outcomeTable: too many detectors for a full table");
  std::vector<const ApdModel *> all;
  for (const ApdModel &apd : diodes) {
    validateApd(apd, psi, "outcomeTable");
    all.push_back(&apd);
  }
  requireDisjointScopes(all, "outcomeTable");

  ContractionContext local;
  ContractionContext &c = ctx != nullptr ? *ctx : local;
  requireNormalized(psi, 1e-6, &c);
  MatXc g = termGram(psi, psi, c);

  const std::size_t nterms = psi.terms().size();
  const std::size_t ndet = diodes.size();
  std::vector<double> quiet(nterms * ndet);
  for (std::size_t tj = 0; tj < nterms; ++tj)
    for (std::size_t d = 0; d < ndet; ++d)
      quiet[tj * ndet + d] =
          quietFactor(diodes[d], scopeCount(psi.terms()[tj], diodes[d].scope));

  std::vector<double> table(std::size_t(1) << ndet, 0.0);
  for (std::size_t pattern = 0; pattern < table.size(); ++pattern) {
    Complex total(0.0, 0.0);
    for (std::size_t tj = 0; tj < nterms; ++tj) {
      double factor = 1.0;
      for (std::size_t d = 0; d < ndet; ++d) {
        double q = quiet[tj * ndet + d];
        factor *= (pattern >> d) & 1 ? 1.0 - q : q;
      }
      if (factor == 0.0)
        continue;
      for (std::size_t si = 0; si < nterms; ++si) {
        Complex gij = g(Eigen::Index(si), Eigen::Index(tj));
        if (gij == Complex(0.0, 0.0))
          continue;
        total += std::conj(psi.terms()[si].coeff) * psi.terms()[tj].coeff *
                 factor * gij;
      }
    }
    if (std::abs(total.imag()) > 1e-10)
      throw ContractError("outcomeTable: non-real expectation");
    table[pattern] = clampProbability(total.real(), "outcomeTable");
  }
  return table;
}

double filteredDetectorProbability(const StateVector &psi,
                                   const std::vector<FilterTap> &taps,
                                   ContractionContext *ctx) {
  if (taps.empty())
    throw ValidationError("filteredDetectorProbability: no filter taps");
  std::set<int> seen;
  std::vector<int> modes;
  std::vector<VecXc> factors;
  for (const FilterTap &tap : taps) {
    if (tap.mode < 0 || tap.mode >= psi.registry()->size())
      throw ValidationError(
          "filteredDetectorProbability: mode index out of range");
    if (!seen.insert(tap.mode).second)
      throw ValidationError(
          "filteredDetectorProbability: taps must sit on distinct modes");
    double n2 =
        (psi.grid()->weights().array() * tap.g.array().abs2()).sum();
    if (std::abs(n2 - 1.0) > 1e-9)
      throw ValidationError(
          "filteredDetectorProbability: filter shape is not normalized");
    modes.push_back(tap.mode);
    factors.push_back(tap.g);
  }
  MonomialTerm t{Complex(1.0, 0.0), std::move(modes),
                 SpectralAmplitude::factored(psi.grid(), std::move(factors))};
  StateVector filter =
      StateVector::make(psi.grid(), psi.registry(), {std::move(t)});
  Complex overlap = innerProduct(filter, psi, ctx);
  return std::norm(overlap);
}

std::vector<double>
filteredOutcomeDistribution(const StateVector &psi, int mode,
                            const std::vector<VecXc> &family,
                            ContractionContext *ctx) {
  if (family.size() < 2)
    throw ValidationError(
        "filteredOutcomeDistribution: need at least two outcomes");
  const VecXd &w = psi.grid()->weights();
  for (std::size_t i = 0; i < family.size(); ++i)
    for (std::size_t j = i; j < family.size(); ++j) {
      Complex ip = (family[i].conjugate().array() * family[j].array() *
                    w.array().cast<Complex>())
                       .sum();
      double want = i == j ? 1.0 : 0.0;
      if (std::abs(ip - want) > 1e-9)
        throw ValidationError(
            "filteredOutcomeDistribution: filter family is not orthonormal");
    }
  std::vector<double> out(family.size());
  for (std::size_t j = 0; j < family.size(); ++j)
    out[j] = filteredDetectorProbability(psi, {{mode, family[j]}}, ctx);
  return out;
}

MatXc gatedQuadraticKernel(const FrequencyGrid &grid, const GateWindow &gate) {
  if (!(gate.duration > 0.0))
    throw ValidationError("gatedQuadraticKernel: gate duration must be > 0");
  const int bins = grid.bins();
  const bool with_position = gate.k.size() != 0;
  if (with_position) {
    if (gate.k.size() != bins)
      throw ValidationError(
          "gatedQuadraticKernel: k length must match the grid");
    for (int b = 1; b < bins; ++b)
      if (!(gate.k[b] > gate.k[b - 1]))
        throw ValidationError(
            "gatedQuadraticKernel: k(omega) must be strictly increasing");
  } else if (gate.position != 0.0) {
    throw ValidationError(
        "gatedQuadraticKernel: nonzero position needs k(omega)");
  }
  const double s = gate.direction == Direction::Plus ? -1.0 : 1.0;
  MatXc k(bins, bins);
  for (int i = 0; i < bins; ++i) {
    k(i, i) = gate.duration / (2.0 * M_PI);
    for (int j = i + 1; j < bins; ++j) {
      double d = grid.frequency(i) - grid.frequency(j);
      double arg = d * gate.t_gate;
      if (with_position)
        arg += s * (gate.k[i] - gate.k[j]) * gate.position;
      Complex v = std::exp(Complex(0.0, arg)) *
                  (std::sin(d * gate.duration / 2.0) / (M_PI * d));
      k(i, j) = v;
      k(j, i) = std::conj(v);
    }
  }
  return k;
}

double linearizedDetectProbability(const StateVector &psi, const ApdModel &apd,
                                   const MatXc *kernel,
                                   ContractionContext *ctx) {
  validateApd(apd, psi, "linearizedDetectProbability");
  double q;
  if (kernel == nullptr) {
    q = numberExpectationQuadratic(psi, apd.scope, ctx);
  } else {
    Complex v = quadraticFormExpectation(psi, apd.scope, *kernel, ctx);
    q = v.real();
  }
  return apd.p_dark + (1.0 - apd.p_dark) * apd.eta_det * q;
}

std::vector<PhotonBlock>
noCrossTermsDecomposition(const StateVector &psi, const ApdModel &apd,
                          ContractionContext *ctx) {
  validateApd(apd, psi, "noCrossTermsDecomposition");
  ContractionContext local;
  ContractionContext &c = ctx != nullptr ? *ctx : local;
  requireNormalized(psi, 1e-6, &c);
  std::vector<PhotonBlock> blocks;
  for (int n = 0; n <= psi.maxPhotonCount(); ++n) {
    StateVector block = projectorApply(psi, apd.scope, n);
    if (block.isZero())
      continue;
    double weight = normSquared(block, &c);
    if (weight == 0.0)
      continue;
    blocks.push_back({n, weight, prDetectGivenN(apd, n)});
  }
  return blocks;
}

} // namespace photonnet
