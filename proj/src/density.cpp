#include "photonnet/density.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/SVD>

namespace photonnet {

namespace {

void requireSameFrame(const DensityOp &rho, const StateVector &psi,
                      const char *what) {
  if (!psi.grid()->sameAs(*rho.grid()) ||
      !psi.registry()->sameAs(*rho.registry()))
    throw ValidationError(std::string(what) +
                          ": density term frame does not match the operator");
}

} // namespace

DensityOp DensityOp::fromTerms(GridPtr grid, RegistryPtr registry,
                               std::vector<DensityTerm> terms) {
  if (!grid || !registry)
    throw ValidationError("DensityOp: missing grid or registry");
  DensityOp rho(std::move(grid), std::move(registry), std::move(terms));
  for (const DensityTerm &t : rho.terms_) {
    if (!(t.weight >= 0.0))
      throw ValidationError("DensityOp: weights must be nonnegative");
    requireSameFrame(rho, t.ket, "DensityOp");
    requireSameFrame(rho, t.bra, "DensityOp");
  }
  return rho;
}

DensityOp DensityOp::pure(const StateVector &psi) {
  return fromTerms(psi.grid(), psi.registry(), {{1.0, psi, psi}});
}

DensityOp
DensityOp::mixture(const std::vector<std::pair<double, StateVector>> &parts) {
  if (parts.empty())
    throw ValidationError("DensityOp: empty mixture");
  std::vector<DensityTerm> terms;
  terms.reserve(parts.size());
  for (const auto &[w, psi] : parts)
    terms.push_back({w, psi, psi});
  return fromTerms(parts.front().second.grid(),
                   parts.front().second.registry(), std::move(terms));
}

int DensityOp::maxPhotonCount() const {
  int n = 0;
  for (const DensityTerm &t : terms_)
    n = std::max({n, t.ket.maxPhotonCount(), t.bra.maxPhotonCount()});
  return n;
}

Complex traceOf(const DensityOp &rho, ContractionContext *ctx) {
  ContractionContext local;
  ContractionContext &c = ctx != nullptr ? *ctx : local;
  Complex total(0.0, 0.0);
  for (const DensityTerm &t : rho.terms())
    total += t.weight * innerProduct(t.bra, t.ket, &c);
  return total;
}

Complex traceExpectation(const DensityOp &rho, const Observable &obs,
                         ContractionContext *ctx) {
  ContractionContext local;
  ContractionContext &c = ctx != nullptr ? *ctx : local;
  Complex total(0.0, 0.0);
  for (const DensityTerm &t : rho.terms()) {
    Complex v = std::visit(
        [&](const auto &o) -> Complex {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, IdentityObservable>) {
            return innerProduct(t.bra, t.ket, &c);
          } else if constexpr (std::is_same_v<T, ProjectorObservable>) {
            return innerProduct(t.bra, projectorApply(t.ket, o.scope, o.n),
                                &c);
          } else if constexpr (std::is_same_v<T, NumberObservable>) {
            const int bins = rho.grid()->bins();
            return quadraticFormCrossKW(t.bra, t.ket, o.scope,
                                        MatXc::Identity(bins, bins), &c);
          } else if constexpr (std::is_same_v<T, QuadraticObservable>) {
            MatXc kw = o.kernel *
                       rho.grid()->weights().cast<Complex>().asDiagonal();
            return quadraticFormCrossKW(t.bra, t.ket, o.scope, kw, &c);
          } else {
            static_assert(std::is_same_v<T, OutcomeObservable>);
            return outcomeBilinear(t.bra, t.ket, o.spec, c);
          }
        },
        obs);
    total += t.weight * v;
  }
  return total;
}

namespace {

struct SlotSplit {
  std::vector<int> kept_pos;          // slot positions staying
  std::vector<int> kept_modes;        // their modes, canonical order
  std::map<int, std::vector<int>> traced; // mode -> slot positions leaving
};

SlotSplit splitSlots(const MonomialTerm &t, const std::set<int> &keep) {
  SlotSplit s;
  for (std::size_t p = 0; p < t.modes.size(); ++p) {
    if (keep.count(t.modes[p])) {
      s.kept_pos.push_back(int(p));
      s.kept_modes.push_back(t.modes[p]);
    } else {
      s.traced[t.modes[p]].push_back(int(p));
    }
  }
  return s;
}

std::int64_t intPow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i)
    r *= base;
  return r;
}

void decodeTuple(std::int64_t flat, int bins, std::vector<int> &idx) {
  for (int a = int(idx.size()) - 1; a >= 0; --a) {
    idx[std::size_t(a)] = int(flat % bins);
    flat /= bins;
  }
}

} // namespace

DensityOp partialTrace(const DensityOp &rho, const std::vector<int> &keep,
                       const ModeOverlap *overlap) {
  const int nmodes = rho.registry()->size();
  std::set<int> keep_set;
  for (int m : keep) {
    if (m < 0 || m >= nmodes)
      throw ValidationError("partialTrace: kept mode index out of range");
    if (!keep_set.insert(m).second)
      throw ValidationError("partialTrace: repeated kept mode");
  }
  if (overlap != nullptr) {
    // Tracing a mode uses delta contractions, so it must be orthogonal to
    // every other mode it could pair with.
    for (int i = 0; i < nmodes; ++i)
      for (int j = 0; j < nmodes; ++j) {
        if (keep_set.count(i) && keep_set.count(j))
          continue;
        Complex want(i == j ? 1.0 : 0.0, 0.0);
        if (std::abs(overlap->kappa(i, j) - want) > 0.0)
          throw ValidationError("partialTrace: traced modes are not "
                                "orthogonal to the rest");
      }
  }

  const FrequencyGrid &grid = *rho.grid();
  const int bins = grid.bins();
  const VecXd &w = grid.weights();

  // Joint kernels over (kept ket args | kept bra args), grouped by the two
  // kept mode lists; every term pair and slot bijection accumulates here.
  std::map<std::pair<std::vector<int>, std::vector<int>>, MatXc> groups;

  for (const DensityTerm &dt : rho.terms()) {
    for (const MonomialTerm &kt : dt.ket.terms()) {
      SlotSplit ks = splitSlots(kt, keep_set);
      for (const MonomialTerm &bt : dt.bra.terms()) {
        SlotSplit bs = splitSlots(bt, keep_set);
        if (ks.traced.size() != bs.traced.size())
          continue;
        bool match = true;
        double bijections = 1.0;
        for (const auto &[mode, pos] : ks.traced) {
          auto it = bs.traced.find(mode);
          if (it == bs.traced.end() || it->second.size() != pos.size()) {
            match = false;
            break;
          }
          for (std::size_t f = 2; f <= pos.size(); ++f)
            bijections *= double(f);
        }
        if (!match)
          continue;
        if (bijections > 1.0e6)
          throw ContractError("partialTrace: bijection count exceeds budget");

        const int kk = int(ks.kept_pos.size());
        const int kb = int(bs.kept_pos.size());
        int traced_pairs = 0;
        for (const auto &[mode, pos] : ks.traced)
          traced_pairs += int(pos.size());
        double cells = std::pow(double(bins), kk + kb + traced_pairs);
        if (cells > 1.0e6)
          throw ContractError("partialTrace: grid sweep exceeds budget");

        const std::int64_t rows = intPow(bins, kk);
        const std::int64_t cols = intPow(bins, kb);
        auto key = std::make_pair(ks.kept_modes, bs.kept_modes);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted)
          it->second = MatXc::Zero(rows, cols);
        MatXc &m = it->second;
        if (m.rows() != rows || m.cols() != cols)
          throw ContractError("partialTrace: inconsistent group shape");

        const Complex scale =
            dt.weight * kt.coeff * std::conj(bt.coeff);

        // Bijections: one permutation odometer per traced mode.
        std::vector<const std::vector<int> *> ket_pos, bra_base;
        for (const auto &[mode, pos] : ks.traced) {
          ket_pos.push_back(&pos);
          bra_base.push_back(&bs.traced.at(mode));
        }
        std::vector<std::vector<int>> bra_perm;
        for (const auto *b : bra_base)
          bra_perm.push_back(*b); // already sorted ascending
        std::vector<int> ket_idx(kt.modes.size());
        std::vector<int> bra_idx(bt.modes.size());
        std::vector<int> kk_tuple(static_cast<std::size_t>(kk));
        std::vector<int> kb_tuple(static_cast<std::size_t>(kb));
        std::vector<int> z(static_cast<std::size_t>(traced_pairs));

        bool more = true;
        while (more) {
          // Flattened traced pairing for this bijection.
          std::vector<std::pair<int, int>> pairs;
          for (std::size_t g = 0; g < ket_pos.size(); ++g)
            for (std::size_t q = 0; q < ket_pos[g]->size(); ++q)
              pairs.emplace_back((*ket_pos[g])[q], bra_perm[g][q]);

          for (std::int64_t r = 0; r < rows; ++r) {
            decodeTuple(r, bins, kk_tuple);
            for (int a = 0; a < kk; ++a)
              ket_idx[std::size_t(ks.kept_pos[std::size_t(a)])] =
                  kk_tuple[std::size_t(a)];
            for (std::int64_t col = 0; col < cols; ++col) {
              decodeTuple(col, bins, kb_tuple);
              for (int a = 0; a < kb; ++a)
                bra_idx[std::size_t(bs.kept_pos[std::size_t(a)])] =
                    kb_tuple[std::size_t(a)];
              Complex cell(0.0, 0.0);
              std::fill(z.begin(), z.end(), 0);
              bool zmore = true;
              while (zmore) {
                double wz = 1.0;
                for (std::size_t n = 0; n < pairs.size(); ++n) {
                  ket_idx[std::size_t(pairs[n].first)] = z[n];
                  bra_idx[std::size_t(pairs[n].second)] = z[n];
                  wz *= w[z[n]];
                }
                cell += wz * kt.amplitude.evalAt(ket_idx) *
                        std::conj(bt.amplitude.evalAt(bra_idx));
                zmore = false;
                for (std::size_t n = z.size(); n-- > 0;) {
                  if (++z[n] < bins) {
                    zmore = true;
                    break;
                  }
                  z[n] = 0;
                }
              }
              m(r, col) += scale * cell;
            }
          }

          // Advance: next permutation of some group, earlier ones reset.
          more = false;
          for (std::size_t g = 0; g < bra_perm.size(); ++g) {
            if (std::next_permutation(bra_perm[g].begin(),
                                      bra_perm[g].end())) {
              more = true;
              break;
            }
          }
        }
      }
    }
  }

  std::vector<DensityTerm> out;
  for (auto &[key, m] : groups) {
    Eigen::JacobiSVD<MatXc> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto &sigma = svd.singularValues();
    if (sigma.size() == 0 || sigma(0) <= 0.0)
      continue;
    const int kk = int(key.first.size());
    const int kb = int(key.second.size());
    for (Eigen::Index r = 0; r < sigma.size(); ++r) {
      if (sigma(r) < 1e-14 * sigma(0))
        break;
      MonomialTerm ket_term{
          Complex(1.0, 0.0), key.first,
          SpectralAmplitude::dense(rho.grid(), kk, svd.matrixU().col(r))};
      MonomialTerm bra_term{
          Complex(1.0, 0.0), key.second,
          SpectralAmplitude::dense(rho.grid(), kb, svd.matrixV().col(r))};
      out.push_back(
          {sigma(r),
           StateVector::make(rho.grid(), rho.registry(), {std::move(ket_term)}),
           StateVector::make(rho.grid(), rho.registry(),
                             {std::move(bra_term)})});
    }
  }
  return DensityOp::fromTerms(rho.grid(), rho.registry(), std::move(out));
}

DensityOp decayedSinglePhotonDensity(GridPtr grid, RegistryPtr registry,
                                     int mode, const VecXc &f,
                                     const VecXd &gamma, double t) {
  if (!registry || mode < 0 || mode >= registry->size())
    throw ValidationError("decayedSinglePhotonDensity: bad mode index");
  if (f.size() != grid->bins() || gamma.size() != grid->bins())
    throw ValidationError(
        "decayedSinglePhotonDensity: vector lengths must match the grid");
  if (!(t >= 0.0))
    throw ValidationError("decayedSinglePhotonDensity: time must be >= 0");
  if ((gamma.array() < 0.0).any())
    throw ValidationError(
        "decayedSinglePhotonDensity: decay rates must be >= 0");
  const VecXd &w = grid->weights();
  if (std::abs((w.array() * f.array().abs2()).sum() - 1.0) > 1e-9)
    throw ValidationError("decayedSinglePhotonDensity: f is not normalized");

  VecXc g(grid->bins());
  for (int b = 0; b < grid->bins(); ++b)
    g[b] = f[b] * std::exp(Complex(-gamma[b] * t, grid->frequency(b) * t));
  double survival = (w.array() * g.array().abs2()).sum();

  std::vector<DensityTerm> terms;
  if (survival > 1e-300) {
    MonomialTerm mt{Complex(1.0, 0.0),
                    {mode},
                    SpectralAmplitude::vector1(grid, g / std::sqrt(survival))};
    StateVector surv = StateVector::make(grid, registry, {std::move(mt)});
    terms.push_back({survival, surv, surv});
  }
  // survival can round a hair past 1 for a freshly normalized f
  StateVector vac = StateVector::vacuum(grid, registry);
  terms.push_back({std::max(0.0, 1.0 - survival), vac, vac});
  return DensityOp::fromTerms(std::move(grid), std::move(registry),
                              std::move(terms));
}

} // namespace photonnet
