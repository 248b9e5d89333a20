#include "photonnet/sources.hpp"

#include <cmath>

#include "photonnet/contraction.hpp"

namespace photonnet {

namespace {

void requireMode(const RegistryPtr &registry, int mode, const char *what) {
  if (!registry || mode < 0 || mode >= registry->size())
    throw ValidationError(std::string(what) + ": mode index out of range");
}

void requireDistinct(std::initializer_list<int> modes, const char *what) {
  std::vector<int> v(modes);
  std::sort(v.begin(), v.end());
  if (std::adjacent_find(v.begin(), v.end()) != v.end())
    throw ValidationError(std::string(what) + ": modes must be distinct");
}

double gridNormSquared(const FrequencyGrid &grid, const VecXc &f) {
  if (f.size() != grid.bins())
    throw ValidationError("spectral vector length does not match the grid");
  return (grid.weights().array() * f.array().abs2()).sum();
}

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k)
    r *= k;
  return r;
}

double binomial(int n, int m) {
  double r = 1.0;
  for (int k = 1; k <= m; ++k)
    r = r * (n - m + k) / k;
  return r;
}

} // namespace

StateVector singlePhoton(GridPtr grid, RegistryPtr registry, int mode, VecXc f,
                         bool normalize) {
  requireMode(registry, mode, "singlePhoton");
  if (!normalize && std::abs(gridNormSquared(*grid, f) - 1.0) > 1e-9)
    throw ValidationError("singlePhoton: f is not normalized");
  MonomialTerm t{Complex(1.0, 0.0),
                 {mode},
                 SpectralAmplitude::vector1(grid, std::move(f), normalize)};
  return StateVector::make(std::move(grid), std::move(registry), {std::move(t)});
}

StateVector nPhotonSingleMode(GridPtr grid, RegistryPtr registry, int mode,
                              const SpectralAmplitude &h, int n) {
  requireMode(registry, mode, "nPhotonSingleMode");
  if (n < 0)
    throw ValidationError("nPhotonSingleMode: negative photon number");
  if (n == 0)
    return StateVector::vacuum(std::move(grid), std::move(registry));
  if (h.arity() != n)
    throw ValidationError("nPhotonSingleMode: amplitude arity must equal n");
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i)
    all[i] = i;
  double s = symmetrizedNormSquared(h, {all});
  if (std::abs(s - 1.0) > 1e-9)
    throw ValidationError(
        "nPhotonSingleMode: symmetrized amplitude is not normalized");
  MonomialTerm t{Complex(1.0 / std::sqrt(factorial(n)), 0.0),
                 std::vector<int>(std::size_t(n), mode), h};
  return StateVector::make(std::move(grid), std::move(registry), {std::move(t)});
}

CoherentState coherent(GridPtr grid, RegistryPtr registry, int mode, VecXc f,
                       Complex alpha, double cutoff_epsilon, bool normalize) {
  requireMode(registry, mode, "coherent");
  if (!(cutoff_epsilon > 0.0 && cutoff_epsilon < 1.0))
    throw ValidationError("coherent: cutoff_epsilon must lie in (0, 1)");
  double n2 = gridNormSquared(*grid, f);
  if (normalize) {
    if (n2 <= 0.0)
      throw ValidationError("coherent: zero pulse shape");
    f /= std::sqrt(n2);
  } else if (std::abs(n2 - 1.0) > 1e-9) {
    throw ValidationError("coherent: f is not normalized");
  }

  constexpr int kMaxPhotons = 60;
  const double lambda = std::norm(alpha);
  // Poisson mass, walked until the remaining tail is below the cutoff.
  double pmf = std::exp(-lambda);
  double cum = 0.0;
  int n_max = -1;
  for (int n = 0; n <= kMaxPhotons; ++n) {
    cum += pmf;
    if (1.0 - cum <= cutoff_epsilon) {
      n_max = n;
      break;
    }
    pmf *= lambda / (n + 1);
  }
  if (n_max < 0)
    throw ValidationError("coherent: cutoff too tight, photon number would "
                          "exceed 60; reduce |alpha| or loosen the cutoff");

  std::vector<MonomialTerm> terms;
  terms.reserve(std::size_t(n_max) + 1);
  Complex coeff = std::exp(-lambda / 2.0);
  for (int n = 0; n <= n_max; ++n) {
    terms.push_back({coeff, std::vector<int>(std::size_t(n), mode),
                     n == 0 ? SpectralAmplitude::scalarOne(grid)
                            : SpectralAmplitude::factoredPower(grid, f, n)});
    coeff *= alpha / double(n + 1);
  }
  CoherentState out{StateVector::make(std::move(grid), std::move(registry),
                                      std::move(terms)),
                    n_max, std::max(0.0, 1.0 - cum)};
  return out;
}

StateVector biPhoton(GridPtr grid, RegistryPtr registry,
                     const BiPhotonSpec &spec) {
  for (int m : spec.a_modes)
    requireMode(registry, m, "biPhoton");
  for (int m : spec.b_modes)
    requireMode(registry, m, "biPhoton");
  requireDistinct({spec.a_modes[0], spec.a_modes[1], spec.b_modes[0],
                   spec.b_modes[1]},
                  "biPhoton");
  if (spec.h.size() != 4)
    throw ValidationError("biPhoton: expected four pair amplitudes");
  if (std::abs(spec.c.squaredNorm() - 1.0) > 1e-9)
    throw ValidationError("biPhoton: coefficients must satisfy "
                          "sum |C_ij|^2 = 1");
  std::vector<MonomialTerm> terms;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const SpectralAmplitude &h = spec.h[std::size_t(2 * i + j)];
      if (h.arity() != 2)
        throw ValidationError("biPhoton: pair amplitudes must have arity 2");
      Complex c = spec.c(i, j);
      if (c == Complex(0.0, 0.0))
        continue;
      if (std::abs(h.l2NormSquared() - 1.0) > 1e-9)
        throw ValidationError("biPhoton: pair amplitude is not normalized");
      terms.push_back(
          {c,
           {spec.a_modes[std::size_t(i)], spec.b_modes[std::size_t(j)]},
           h});
    }
  return StateVector::make(std::move(grid), std::move(registry),
                           std::move(terms));
}

Eigen::Matrix2cd singletCoefficients() {
  Eigen::Matrix2cd c;
  c << 0.0, 1.0, -1.0, 0.0;
  return c / std::sqrt(2.0);
}

StateVector qkdPsiN(GridPtr grid, RegistryPtr registry, int a1, int a2,
                    int b1, int b2, const SpectralAmplitude &g, int n,
                    bool normalize) {
  requireMode(registry, a1, "qkdPsiN");
  requireMode(registry, a2, "qkdPsiN");
  requireMode(registry, b1, "qkdPsiN");
  requireMode(registry, b2, "qkdPsiN");
  requireDistinct({a1, a2, b1, b2}, "qkdPsiN");
  if (n < 0)
    throw ValidationError("qkdPsiN: negative pair count");
  if (n == 0)
    return StateVector::vacuum(std::move(grid), std::move(registry));

  std::vector<MonomialTerm> terms;
  if (g.arity() == 2) {
    // Identical pair amplitude for every factor: the 2^n expansion
    // collapses onto binomial coefficients.
    MatXc k(grid->bins(), grid->bins());
    for (int i = 0; i < grid->bins(); ++i)
      for (int j = 0; j < grid->bins(); ++j) {
        const int idx[2] = {i, j};
        k(i, j) = g.evalAt(idx);
      }
    for (int m = n; m >= 0; --m) {
      double sign = ((n - m) % 2 == 0) ? 1.0 : -1.0;
      std::vector<int> modes(std::size_t(2 * n));
      for (int j = 0; j < n; ++j) {
        modes[std::size_t(2 * j)] = j < m ? a1 : a2;
        modes[std::size_t(2 * j + 1)] = j < m ? b2 : b1;
      }
      terms.push_back({Complex(sign * binomial(n, m), 0.0), std::move(modes),
                       SpectralAmplitude::pairKernelProduct(
                           grid, std::vector<MatXc>(std::size_t(n), k))});
    }
  } else if (g.arity() == 2 * n) {
    // Joint amplitude: expand the operator power into all 2^n sign
    // choices, one term per subset.
    for (std::uint64_t subset = 0; subset < (std::uint64_t(1) << n);
         ++subset) {
      int ones = std::popcount(subset);
      std::vector<int> modes(std::size_t(2 * n));
      for (int j = 0; j < n; ++j) {
        bool first = (subset >> j) & 1;
        modes[std::size_t(2 * j)] = first ? a1 : a2;
        modes[std::size_t(2 * j + 1)] = first ? b2 : b1;
      }
      terms.push_back({Complex(((n - ones) % 2 == 0) ? 1.0 : -1.0, 0.0),
                       std::move(modes), g});
    }
  } else {
    throw ValidationError(
        "qkdPsiN: amplitude must have arity 2 (pair) or 2n (joint)");
  }

  StateVector psi = StateVector::make(grid, registry, std::move(terms));
  if (!normalize)
    return psi;
  double n2 = normSquared(psi);
  if (n2 <= 0.0)
    throw ValidationError("qkdPsiN: state has zero norm");
  return psi.scaled(Complex(1.0 / std::sqrt(n2), 0.0));
}

StateVector qkdSuperposition(GridPtr grid, RegistryPtr registry, int a1,
                             int a2, int b1, int b2,
                             const SpectralAmplitude &g, const VecXc &c) {
  if (c.size() == 0)
    throw ValidationError("qkdSuperposition: empty coefficient list");
  if (std::abs(c.squaredNorm() - 1.0) > 1e-9)
    throw ValidationError(
        "qkdSuperposition: coefficients must satisfy sum |c_n|^2 = 1");
  StateVector out = StateVector::vacuum(grid, registry).scaled(c[0]);
  for (int n = 1; n < c.size(); ++n) {
    if (c[n] == Complex(0.0, 0.0))
      continue;
    out = out.plus(
        qkdPsiN(grid, registry, a1, a2, b1, b2, g, n, true).scaled(c[n]));
  }
  return out;
}

StateVector generalMultiMode(GridPtr grid, RegistryPtr registry, int a1,
                             int a2, int b1, int b2,
                             const SpectralAmplitude &h, int j, int m, int k,
                             int n) {
  requireMode(registry, a1, "generalMultiMode");
  requireMode(registry, a2, "generalMultiMode");
  requireMode(registry, b1, "generalMultiMode");
  requireMode(registry, b2, "generalMultiMode");
  requireDistinct({a1, a2, b1, b2}, "generalMultiMode");
  if (m < 0 || n < 0 || j < 0 || j > m || k < 0 || k > n)
    throw ValidationError("generalMultiMode: need 0 <= j <= m, 0 <= k <= n");
  if (m + n == 0)
    return StateVector::vacuum(std::move(grid), std::move(registry));
  if (h.arity() != m + n)
    throw ValidationError("generalMultiMode: amplitude arity must be m + n");

  std::vector<std::vector<int>> groups;
  auto addGroup = [&groups](int lo, int hi) {
    if (hi <= lo)
      return;
    std::vector<int> g(std::size_t(hi - lo));
    for (int i = lo; i < hi; ++i)
      g[std::size_t(i - lo)] = i;
    groups.push_back(std::move(g));
  };
  addGroup(0, j);
  addGroup(j, m);
  addGroup(m, m + k);
  addGroup(m + k, m + n);
  if (std::abs(symmetrizedNormSquared(h, groups) - 1.0) > 1e-9)
    throw ValidationError("generalMultiMode: amplitude is not normalized "
                          "after per-group symmetrization");

  std::vector<int> modes;
  modes.reserve(std::size_t(m + n));
  modes.insert(modes.end(), std::size_t(j), a1);
  modes.insert(modes.end(), std::size_t(m - j), a2);
  modes.insert(modes.end(), std::size_t(k), b1);
  modes.insert(modes.end(), std::size_t(n - k), b2);
  MonomialTerm t{Complex(1.0 / std::sqrt(factorial(j) * factorial(m - j) *
                                         factorial(k) * factorial(n - k)),
                         0.0),
                 std::move(modes), h};
  return StateVector::make(std::move(grid), std::move(registry), {std::move(t)});
}

} // namespace photonnet
