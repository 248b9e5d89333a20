#include <doctest.h>

#include <random>

#include "photonnet/state.hpp"
#include "test_helpers.hpp"

using namespace photonnet;
using namespace testutil;

namespace {

/// Reference substitution: plain slot-by-slot Cartesian expansion, no
/// bundling of exchangeable slots. Kept deliberately naive.
StateVector substituteByEnumeration(const StateVector &psi,
                                    const SubstitutionRule &rule) {
  std::vector<MonomialTerm> out;
  for (const auto &term : psi.terms()) {
    std::vector<MonomialTerm> frontier{term};
    for (std::size_t s = 0; s < term.modes.size(); ++s) {
      auto it = rule.find(term.modes[s]);
      if (it == rule.end())
        continue;
      std::vector<MonomialTerm> next;
      for (const auto &cur : frontier) {
        for (const auto &target : it->second) {
          MonomialTerm branch = cur;
          branch.modes[s] = target.out_mode;
          branch.amplitude = branch.amplitude.argScaled(int(s), *target.coeff);
          next.push_back(std::move(branch));
        }
      }
      frontier = std::move(next);
    }
    for (auto &t : frontier)
      out.push_back(std::move(t));
  }
  return StateVector::make(psi.grid(), psi.registry(), std::move(out));
}

SubstitutionRule randomRule(std::mt19937_64 &rng, const FrequencyGrid &grid,
                            int n_in, int n_out) {
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> n_targets(1, 3);
  std::uniform_int_distribution<int> pick_out(0, n_out - 1);
  SubstitutionRule rule;
  for (int m = 0; m < n_in; ++m) {
    std::vector<SubstitutionTarget> targets;
    int k = n_targets(rng);
    for (int t = 0; t < k; ++t) {
      VecXc c(grid.bins());
      for (int i = 0; i < grid.bins(); ++i)
        c(i) = Complex(nd(rng), nd(rng)) * 0.5;
      targets.push_back({pick_out(rng), std::make_shared<const VecXc>(std::move(c))});
    }
    rule[m] = std::move(targets);
  }
  return rule;
}

} // namespace

TEST_CASE("canonicalization sorts slots by mode and relabels arguments") {
  auto grid = makeUniformGrid(1.0, 2.0, 3);
  std::mt19937_64 rng(3);
  VecXc f = randomShape(rng, *grid), g = randomShape(rng, *grid);
  MonomialTerm t{Complex(1, 0), {2, 0}, SpectralAmplitude::factored(grid, {f, g})};
  MonomialTerm c = canonicalizedTerm(t);
  CHECK(c.modes == std::vector<int>{0, 2});
  std::vector<int> idx{0, 0};
  do {
    // slot for mode 0 now reads argument 0, which must still carry g
    CHECK(std::abs(c.amplitude.evalAt(idx) - g(idx[0]) * f(idx[1])) < 1e-14);
  } while (detail::nextIndex(idx, 3));
}

TEST_CASE("photon counts per mode and total") {
  auto grid = makeUniformGrid(1.0, 2.0, 2);
  VecXc f = VecXc::Ones(2);
  MonomialTerm t{Complex(1, 0), {0, 1, 0}, SpectralAmplitude::factoredPower(grid, f, 3)};
  CHECK(photonCount(t, 0) == 2);
  CHECK(photonCount(t, 1) == 1);
  CHECK(photonCount(t, 5) == 0);
  CHECK(photonCount(t) == 3);

  MonomialTerm vac{Complex(1, 0), {}, SpectralAmplitude::scalarOne(grid)};
  CHECK(photonCount(vac) == 0);
}

TEST_CASE("make merges structurally identical terms") {
  auto grid = makeUniformGrid(1.0, 2.0, 4);
  auto reg = makeRegistry(2);
  std::mt19937_64 rng(5);
  VecXc f = randomShape(rng, *grid);
  auto amp = SpectralAmplitude::vector1(grid, f);
  StateVector psi = StateVector::make(
      grid, reg,
      {{Complex(0.25, 0), {0}, amp}, {Complex(0.5, 0), {0}, amp}});
  REQUIRE(psi.terms().size() == 1);
  CHECK(std::abs(psi.terms()[0].coeff - Complex(0.75, 0)) < 1e-15);

  // exact cancellation drops the term entirely
  StateVector zero = StateVector::make(
      grid, reg, {{Complex(1, 0), {0}, amp}, {Complex(-1, 0), {0}, amp}});
  CHECK(zero.isZero());
}

TEST_CASE("plus and scaled behave linearly") {
  auto grid = makeUniformGrid(1.0, 2.0, 4);
  auto reg = makeRegistry(2);
  std::mt19937_64 rng(7);
  StateVector a = randomState(rng, grid, reg, 2);
  StateVector b = randomState(rng, grid, reg, 2);
  Complex ab = innerProduct(a, b);
  double want = normSquared(a) + 2 * ab.real() + normSquared(b);
  CHECK(normSquared(a.plus(b)) == doctest::Approx(want).epsilon(1e-10));
  CHECK(normSquared(a.scaled(Complex(0, 2))) == doctest::Approx(4 * normSquared(a)).epsilon(1e-12));
}

TEST_CASE("vacuum is the empty monomial with unit coefficient") {
  auto grid = makeUniformGrid(1.0, 2.0, 4);
  auto reg = makeRegistry(1);
  StateVector v = StateVector::vacuum(grid, reg);
  REQUIRE(v.terms().size() == 1);
  CHECK(v.terms()[0].modes.empty());
  CHECK(v.maxPhotonCount() == 0);
  CHECK(normSquared(v) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("identity substitution leaves states unchanged") {
  auto grid = makeUniformGrid(1.0, 2.0, 4);
  auto reg = makeRegistry(3);
  std::mt19937_64 rng(11);
  StateVector psi = randomState(rng, grid, reg, 3);
  SubstitutionRule rule;
  for (int m = 0; m < 3; ++m)
    rule[m] = {{m, std::make_shared<const VecXc>(VecXc::Ones(4))}};
  StateVector out = applySubstitution(psi, rule);
  CHECK(stateDistance(out, psi) < 1e-9);
}

TEST_CASE("substitution matches slot-by-slot enumeration on random states") {
  auto grid = makeUniformGrid(1.0, 2.0, 3);
  auto reg = makeRegistry(4);
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 12; ++rep) {
    StateVector psi = randomState(rng, grid, reg, 4, 2);
    SubstitutionRule rule = randomRule(rng, *grid, 2, 4);
    StateVector fast = applySubstitution(psi, rule);
    StateVector slow = substituteByEnumeration(psi, rule);
    double scale = std::max(1.0, normSquared(slow));
    CHECK(stateDistance(fast, slow) < 1e-9 * scale);
  }
}

TEST_CASE("substitution of repeated identical slots matches enumeration") {
  // the multiset shortcut for exchangeable slots must agree with the
  // 2^n Cartesian walk it replaces
  auto grid = makeUniformGrid(1.0, 2.0, 3);
  auto reg = makeRegistry(3);
  std::mt19937_64 rng(17);
  VecXc f = randomShape(rng, *grid);
  for (int n = 1; n <= 6; ++n) {
    StateVector psi = StateVector::make(
        grid, reg,
        {{Complex(0.3, 0.1), std::vector<int>(std::size_t(n), 0),
          SpectralAmplitude::factoredPower(grid, f, n)}});
    SubstitutionRule rule = randomRule(rng, *grid, 1, 3);
    StateVector fast = applySubstitution(psi, rule);
    StateVector slow = substituteByEnumeration(psi, rule);
    double scale = std::max(1.0, normSquared(slow));
    CHECK(stateDistance(fast, slow) < 1e-9 * scale);
  }
}

TEST_CASE("exchangeable slots expand to one branch per target multiset") {
  auto grid = makeUniformGrid(1.0, 2.0, 3);
  auto reg = makeRegistry(3);
  std::mt19937_64 rng(19);
  VecXc f = randomShape(rng, *grid);
  const int n = 5;
  StateVector psi = StateVector::make(
      grid, reg,
      {{Complex(1, 0), std::vector<int>(std::size_t(n), 0),
        SpectralAmplitude::factoredPower(grid, f, n)}});
  SubstitutionRule rule;
  rule[0] = {{1, std::make_shared<const VecXc>(VecXc::Constant(3, 0.6))},
             {2, std::make_shared<const VecXc>(VecXc::Constant(3, 0.8))}};
  StateVector out = applySubstitution(psi, rule);
  // n + 1 occupation splits, not 2^n branches
  CHECK(out.terms().size() == std::size_t(n + 1));
  for (const auto &t : out.terms()) {
    int k = photonCount(t, 1);
    double binom = 1;
    for (int i = 0; i < k; ++i)
      binom = binom * double(n - i) / double(i + 1);
    double want = binom * std::pow(0.6, k) * std::pow(0.8, n - k);
    // coefficient times the constant per-slot factors
    double got = std::abs(t.coeff) * std::abs(t.amplitude.evalAt(std::vector<int>(n, 0))) /
                 std::abs(f(0) * f(0) * f(0) * f(0) * f(0));
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("substitution rejects no live targets by dropping the term") {
  auto grid = makeUniformGrid(1.0, 2.0, 2);
  auto reg = makeRegistry(2);
  VecXc f = VecXc::Ones(2) * 0.70710678118654752;
  StateVector psi = StateVector::make(
      grid, reg, {{Complex(1, 0), {0}, SpectralAmplitude::vector1(grid, f)}});
  SubstitutionRule rule;
  rule[0] = {{1, std::make_shared<const VecXc>(VecXc::Zero(2))}};
  StateVector out = applySubstitution(psi, rule);
  CHECK(out.isZero());
}

TEST_CASE("states round-trip through json") {
  auto grid = makeUniformGrid(1.0, 2.0, 3);
  auto reg = makeRegistry(3);
  std::mt19937_64 rng(23);
  StateVector psi = randomState(rng, grid, reg, 3);
  StateVector back = StateVector::fromJson(psi.toJson(), "state");
  CHECK(back.grid()->sameAs(*psi.grid()));
  CHECK(back.registry()->sameAs(*psi.registry()));
  // the rebuilt registry is a fresh object, so compare through the overlap
  double dist2 = normSquared(back) + normSquared(psi) -
                 2.0 * innerProduct(back, psi).real();
  CHECK(std::abs(dist2) < 1e-10);
}
