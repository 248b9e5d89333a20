#include <doctest.h>

#include <random>

#include "photonnet/detection.hpp"
#include "photonnet/oracle.hpp"
#include "photonnet/sources.hpp"
#include "test_helpers.hpp"

using namespace photonnet;
using namespace testutil;

TEST_CASE("single photon has unit norm and the shape's energy") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 8);
  auto reg = makeRegistry(2);
  std::mt19937_64 rng(3);
  VecXc f = randomShape(rng, *grid);
  StateVector psi = singlePhoton(grid, reg, 0, f);
  CHECK(normSquared(psi) == doctest::Approx(1.0).epsilon(1e-12));
  double wbar = meanFrequency(SpectralAmplitude::vector1(grid, f));
  CHECK(energyExpectation(psi) == doctest::Approx(constants::hbar * wbar).epsilon(1e-12));

  CHECK_THROWS_AS(singlePhoton(grid, reg, 0, 2.0 * f), ValidationError);
  CHECK(normSquared(singlePhoton(grid, reg, 0, 2.0 * f, true)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-mode single-photon superpositions stay normalized") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 6);
  auto reg = makeRegistry(2);
  std::mt19937_64 rng(5);
  VecXc f = randomShape(rng, *grid), g = randomShape(rng, *grid);
  Complex c1(0.6, 0.0), c2(0.0, 0.8);
  StateVector psi =
      singlePhoton(grid, reg, 0, f).scaled(c1).plus(singlePhoton(grid, reg, 1, g).scaled(c2));
  CHECK(normSquared(psi) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("n-photon single-mode states normalize with the factorial prefactor") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 6);
  auto reg = makeRegistry(1);
  std::mt19937_64 rng(7);
  VecXc f = randomShape(rng, *grid);
  double wbar = meanFrequency(SpectralAmplitude::vector1(grid, f));
  for (int n = 1; n <= 4; ++n) {
    auto h = SpectralAmplitude::factoredPower(grid, f, n);
    StateVector psi = nPhotonSingleMode(grid, reg, 0, h, n);
    CHECK(normSquared(psi) == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(energyExpectation(psi) ==
          doctest::Approx(n * constants::hbar * wbar).epsilon(1e-11));
  }
  // n = 1 reduces to the single-photon constructor
  StateVector a = nPhotonSingleMode(grid, reg, 0, SpectralAmplitude::vector1(grid, f), 1);
  CHECK(stateDistance(a, singlePhoton(grid, reg, 0, f)) < 1e-12);
}

TEST_CASE("coherent state truncation accounts for the Poisson tail") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 6);
  auto reg = makeRegistry(1);
  std::mt19937_64 rng(11);
  VecXc f = randomShape(rng, *grid);

  CoherentState vac = coherent(grid, reg, 0, f, Complex(0, 0));
  CHECK(stateDistance(vac.psi, StateVector::vacuum(grid, reg)) < 1e-15);
  CHECK(vac.tail == doctest::Approx(0.0));

  for (double a2 : {0.1, 1.0, 4.0}) {
    CoherentState c = coherent(grid, reg, 0, f, Complex(std::sqrt(a2), 0));
    CHECK(c.tail < 1e-11);
    CHECK(normSquared(c.psi) == doctest::Approx(1.0 - c.tail).epsilon(1e-10));
    CHECK(c.psi.maxPhotonCount() == c.n_max);
  }

  CHECK_THROWS_AS(coherent(grid, reg, 0, f, Complex(9.0, 0)), ValidationError);
}

TEST_CASE("coherent states are number-operator eigenstates in expectation") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 6);
  auto reg = makeRegistry(1);
  std::mt19937_64 rng(13);
  VecXc f = randomShape(rng, *grid);
  Complex alpha(1.1, -0.4);
  CoherentState c = coherent(grid, reg, 0, f, alpha);
  CHECK(numberExpectation(c.psi, {0}) ==
        doctest::Approx(std::norm(alpha)).epsilon(1e-9));
}

TEST_CASE("bi-photon states are normalized single-pair states") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 4);
  auto reg = makeRegistry(4); // a1 a2 b1 b2
  std::mt19937_64 rng(17);

  MatXc k(4, 4);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      k(i, j) = Complex(nd(rng), nd(rng));
  auto g = SpectralAmplitude::pairKernel(grid, k, true);

  BiPhotonSpec spec;
  spec.a_modes = {0, 1};
  spec.b_modes = {2, 3};
  spec.c = singletCoefficients();
  spec.h = {g, g, g, g};
  StateVector psi = biPhoton(grid, reg, spec);
  CHECK(normSquared(psi) == doctest::Approx(1.0).epsilon(1e-10));

  // exactly one photon on each fiber, in every term
  StateVector pa = projectorApply(psi, {0, 1}, 1);
  StateVector pb = projectorApply(pa, {2, 3}, 1);
  CHECK(stateDistance(pb, psi) < 1e-12);

  // zero-coefficient components need no amplitudes worth validating
  BiPhotonSpec diag;
  diag.a_modes = {0, 1};
  diag.b_modes = {2, 3};
  diag.c = MatXc::Zero(2, 2);
  diag.c(0, 0) = Complex(1, 0);
  diag.h = {g, g, g, g};
  CHECK(normSquared(biPhoton(grid, reg, diag)) == doctest::Approx(1.0).epsilon(1e-10));

  BiPhotonSpec bad = spec;
  bad.c *= 2.0;
  CHECK_THROWS_AS(biPhoton(grid, reg, bad), ValidationError);
}

TEST_CASE("joint filtered detection of a bi-photon integrates the kernel") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 4);
  auto reg = makeRegistry(4);
  std::mt19937_64 rng(19);
  MatXc k(4, 4);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      k(i, j) = Complex(nd(rng), nd(rng));
  auto h = SpectralAmplitude::pairKernel(grid, k, true);

  BiPhotonSpec spec;
  spec.a_modes = {0, 1};
  spec.b_modes = {2, 3};
  spec.c = MatXc::Zero(2, 2);
  spec.c(0, 0) = Complex(1, 0);
  spec.h = {h, h, h, h};
  StateVector psi = biPhoton(grid, reg, spec);

  VecXc f = randomShape(rng, *grid), g = randomShape(rng, *grid);
  double p = filteredDetectorProbability(psi, {{0, f}, {2, g}});
  Complex want = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      want += grid->weight(i) * grid->weight(j) * std::conj(f(i)) *
              std::conj(g(j)) * h.evalAt(std::vector<int>{i, j});
  CHECK(p == doctest::Approx(std::norm(want)).epsilon(1e-9));
}

TEST_CASE("one-pair entangled state matches the singlet bi-photon") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 4);
  auto reg = makeRegistry(4);
  std::mt19937_64 rng(23);
  MatXc k(4, 4);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      k(i, j) = Complex(nd(rng), nd(rng));
  auto g = SpectralAmplitude::pairKernel(grid, k, true);

  StateVector psi1 = qkdPsiN(grid, reg, 0, 1, 2, 3, g, 1, true);
  BiPhotonSpec spec;
  spec.a_modes = {0, 1};
  spec.b_modes = {2, 3};
  spec.c = singletCoefficients();
  spec.h = {g, g, g, g};
  StateVector singlet = biPhoton(grid, reg, spec);
  CHECK(stateDistance(psi1, singlet) < 1e-10);
}

TEST_CASE("two-pair expansion carries binomial coefficients") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 3);
  auto reg = makeRegistry(4);
  std::mt19937_64 rng(29);
  MatXc k(3, 3);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      k(i, j) = Complex(nd(rng), nd(rng));
  auto g = SpectralAmplitude::pairKernel(grid, k, true);

  StateVector psi2 = qkdPsiN(grid, reg, 0, 1, 2, 3, g, 2, false);

  // (x - y)^2 = x^2 - 2xy + y^2 with x = (g : a1' b2'), y = (g : a2' b1')
  MatXc km = k;
  auto gg = SpectralAmplitude::pairKernelProduct(grid, {km, km});
  StateVector expected = StateVector::make(
      grid, reg,
      {{Complex(1, 0), {0, 2, 0, 2}, gg},
       {Complex(-2, 0), {0, 2, 1, 3}, gg},
       {Complex(1, 0), {1, 3, 1, 3}, gg}});
  double scale = std::max(1.0, normSquared(expected));
  CHECK(stateDistance(psi2, expected) < 1e-9 * scale);
}

TEST_CASE("pair states live in pure photon-number blocks") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 3);
  auto reg = makeRegistry(4);
  std::mt19937_64 rng(31);
  MatXc k(3, 3);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      k(i, j) = Complex(nd(rng), nd(rng));
  auto g = SpectralAmplitude::pairKernel(grid, k, true);

  for (int n = 1; n <= 2; ++n) {
    StateVector psi = qkdPsiN(grid, reg, 0, 1, 2, 3, g, n, true);
    CHECK(normSquared(psi) == doctest::Approx(1.0).epsilon(1e-10));
    for (int j = 0; j <= n + 1; ++j) {
      StateVector block = projectorApply(psi, {0, 1}, j);
      if (j == n)
        CHECK(stateDistance(block, psi) < 1e-12);
      else
        CHECK(block.isZero());
    }
  }
}

TEST_CASE("two-pair norm matches the dense reference") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 2);
  auto reg = makeRegistry(4);
  std::mt19937_64 rng(37);
  VecXc u = randomShape(rng, *grid), v = randomShape(rng, *grid);
  MatXc k = u * v.transpose(); // separable two-frequency kernel
  auto g = SpectralAmplitude::pairKernel(grid, k, true);

  StateVector psi = qkdPsiN(grid, reg, 0, 1, 2, 3, g, 2, true);
  auto space = DenseFockSpace::build(grid, reg, {0, 1, 2, 3}, 4);
  VecXc coords = embedState(space, psi);
  CHECK(coords.squaredNorm() == doctest::Approx(normSquared(psi)).epsilon(1e-8));
  CHECK(coords.squaredNorm() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("pair superpositions are normalized across blocks") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 2);
  auto reg = makeRegistry(4);
  std::mt19937_64 rng(41);
  MatXc k(2, 2);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      k(i, j) = Complex(nd(rng), nd(rng));
  auto g = SpectralAmplitude::pairKernel(grid, k, true);

  VecXc c(3);
  c << Complex(0.5, 0), Complex(0, 0.5), Complex(std::sqrt(0.5), 0);
  StateVector psi = qkdSuperposition(grid, reg, 0, 1, 2, 3, g, c);
  CHECK(normSquared(psi) == doctest::Approx(1.0).epsilon(1e-9));

  // component weights follow |c_n|^2, vacuum included
  CHECK(normSquared(projectorApply(psi, {0, 1}, 0)) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(normSquared(projectorApply(psi, {0, 1}, 1)) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(normSquared(projectorApply(psi, {0, 1}, 2)) == doctest::Approx(0.5).epsilon(1e-9));

  VecXc bad(2);
  bad << Complex(1, 0), Complex(1, 0);
  CHECK_THROWS_AS(qkdSuperposition(grid, reg, 0, 1, 2, 3, g, bad), ValidationError);
}

TEST_CASE("general four-mode states reduce to the simpler constructors") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 2);
  auto reg = makeRegistry(4);
  std::mt19937_64 rng(43);
  MatXc k(2, 2);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      k(i, j) = Complex(nd(rng), nd(rng));
  auto h2 = SpectralAmplitude::pairKernel(grid, k, true);

  // m = n = 1, j = k = 1: one photon in a1, one in b1
  StateVector gm = generalMultiMode(grid, reg, 0, 1, 2, 3, h2, 1, 1, 1, 1);
  BiPhotonSpec spec;
  spec.a_modes = {0, 1};
  spec.b_modes = {2, 3};
  spec.c = MatXc::Zero(2, 2);
  spec.c(0, 0) = Complex(1, 0);
  spec.h = {h2, h2, h2, h2};
  CHECK(stateDistance(gm, biPhoton(grid, reg, spec)) < 1e-10);

  // only the a1 group populated: reduces to the n-photon constructor
  VecXc f = randomShape(rng, *grid);
  auto ff = SpectralAmplitude::factoredPower(grid, f, 2);
  StateVector only_a = generalMultiMode(grid, reg, 0, 1, 2, 3, ff, 2, 2, 0, 0);
  CHECK(stateDistance(only_a, nPhotonSingleMode(grid, reg, 0, ff, 2)) < 1e-10);
}

TEST_CASE("general four-mode norm matches the dense reference") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 2);
  auto reg = makeRegistry(4);
  std::mt19937_64 rng(47);
  // random symmetric 4-argument amplitude within the (a, b) groups
  VecXc data(16);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 16; ++i)
    data(i) = Complex(nd(rng), nd(rng));
  auto raw = SpectralAmplitude::dense(grid, 4, data);
  auto sym = symmetrize(raw, {{0, 1}, {2, 3}});
  double s2 = sym.l2NormSquared();
  auto h = sym.scaled(Complex(1.0 / std::sqrt(s2), 0));

  // two photons in a1 exercise the factorial prefactor, not just the norm
  StateVector psi = generalMultiMode(grid, reg, 0, 1, 2, 3, h, 2, 2, 1, 2);
  CHECK(normSquared(psi) == doctest::Approx(1.0).epsilon(1e-9));
  auto space = DenseFockSpace::build(grid, reg, {0, 1, 2, 3}, 4);
  VecXc coords = embedState(space, psi);
  CHECK(coords.squaredNorm() == doctest::Approx(1.0).epsilon(1e-8));
}
