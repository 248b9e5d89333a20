#include <doctest.h>

#include <random>

#include "photonnet/channels.hpp"
#include "photonnet/oracle.hpp"
#include "photonnet/sources.hpp"
#include "test_helpers.hpp"

using namespace photonnet;
using namespace testutil;

namespace {
double factorial(int n) {
  double r = 1;
  for (int i = 2; i <= n; ++i)
    r *= i;
  return r;
}
} // namespace

TEST_CASE("identity splice is invisible") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 4);
  auto reg = makeRegistry(4);
  std::mt19937_64 rng(3);
  StateVector psi = randomState(rng, grid, reg, 3);
  ScatterChannel ch = splice(grid, {0, 1, 2, 3}, {0, 1, 2, 3},
                             std::vector<MatXc>(4, MatXc::Identity(4, 4)));
  CHECK(stateDistance(applyChannel(psi, ch), psi) < 1e-10);
}

TEST_CASE("beam splitter splits a single photon by amplitude") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 6);
  auto reg = makeRegistry(3);
  std::mt19937_64 rng(5);
  VecXc f = randomShape(rng, *grid);
  StateVector in = singlePhoton(grid, reg, 0, f);

  for (double eta : {0.0, 0.35, 1.0}) {
    StateVector out = applyChannel(in, beamSplitter(grid, 0, 1, 2, eta));
    StateVector want = singlePhoton(grid, reg, 1, f).scaled(Complex(std::sqrt(eta), 0))
                           .plus(singlePhoton(grid, reg, 2, f)
                                     .scaled(Complex(std::sqrt(1 - eta), 0)));
    CHECK(stateDistance(out, want) < 1e-12);
    CHECK(normSquared(out) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(beamSplitter(grid, 0, 1, 2, 1.5), ValidationError);
}

TEST_CASE("beam splitter on two identical photons gives the binomial triple") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 4);
  auto reg = makeRegistry(3);
  std::mt19937_64 rng(7);
  VecXc f = randomShape(rng, *grid);
  auto ff = SpectralAmplitude::factoredPower(grid, f, 2);
  StateVector in = StateVector::make(
      grid, reg, {{Complex(1.0 / std::sqrt(2.0), 0), {0, 0}, ff}});
  StateVector out = applyChannel(in, beamSplitter(grid, 0, 1, 2, 0.5));
  REQUIRE(out.terms().size() == 3);
  // occupation splits (2,0), (1,1), (0,2) weigh 1 : 2 : 1 before contraction
  for (const auto &t : out.terms()) {
    int k = photonCount(t, 1);
    double mult = (k == 1) ? 2.0 : 1.0;
    double want = mult * std::pow(0.5, 1.0) / std::sqrt(2.0);
    double got = std::abs(t.coeff) * std::abs(t.amplitude.evalAt(std::vector<int>{0, 0})) /
                 std::norm(f(0));
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
  }
  CHECK(normSquared(out) == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("channels preserve norms of random states") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 4);
  auto reg = makeRegistry(4);
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 6; ++rep) {
    StateVector psi = randomState(rng, grid, reg, 3);
    std::vector<MatXc> blocks;
    for (int b = 0; b < grid->bins(); ++b)
      blocks.push_back(randomUnitary(rng, 4));
    ScatterChannel ch = makeChannel(grid, {0, 1, 2, 3}, {0, 1, 2, 3}, blocks);
    CHECK(normSquared(applyChannel(psi, ch)) ==
          doctest::Approx(normSquared(psi)).epsilon(1e-10));
  }
}

TEST_CASE("channels conserve photon number across their span") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 3);
  auto reg = makeRegistry(3);
  std::mt19937_64 rng(13);
  VecXc f = randomShape(rng, *grid);
  auto ff = SpectralAmplitude::factoredPower(grid, f, 3);
  StateVector in = StateVector::make(
      grid, reg, {{Complex(1.0 / std::sqrt(factorial(3)), 0), {0, 0, 0}, ff}});
  StateVector out = applyChannel(in, beamSplitter(grid, 0, 1, 2, 0.3));
  for (const auto &t : out.terms())
    CHECK(photonCount(t, 1) + photonCount(t, 2) == 3);
}

TEST_CASE("frequency-dependent two-port matches the dense reference") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 3);
  auto reg = makeRegistry(2);
  std::mt19937_64 rng(17);
  std::vector<MatXc> blocks;
  for (int b = 0; b < 3; ++b)
    blocks.push_back(randomUnitary(rng, 2));
  ScatterChannel ch = makeChannel(grid, {0, 1}, {0, 1}, blocks);

  VecXc f = randomShape(rng, *grid);
  StateVector in = singlePhoton(grid, reg, 0, f);
  StateVector out = applyChannel(in, ch);

  auto space = DenseFockSpace::build(grid, reg, {0, 1}, 2);
  MatXc u = denseChannelMatrix(space, ch);
  VecXc want = u * embedState(space, in);
  VecXc got = embedState(space, out);
  CHECK((want - got).norm() < 1e-10);

  // per-mode content of the image
  for (int m : {0, 1}) {
    double marg = 0;
    for (int b = 0; b < 3; ++b)
      marg += grid->weight(b) * std::norm(blocks[std::size_t(b)](m, 0) * f(b));
    CHECK(numberExpectation(out, {m}) == doctest::Approx(marg).epsilon(1e-10));
  }
}

TEST_CASE("polarization-decoupled splice never mixes the polarizations") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 3);
  auto reg = makeRegistry(4);
  std::mt19937_64 rng(19);
  // block diagonal in the (pol 1, pol 2) split: modes (0, 2) and (1, 3)
  MatXc u2a = randomUnitary(rng, 2), u2b = randomUnitary(rng, 2);
  MatXc u4 = MatXc::Zero(4, 4);
  u4.block(0, 0, 2, 2) = u2a;
  u4.block(2, 2, 2, 2) = u2b;
  ScatterChannel ch = splice(grid, {0, 2, 1, 3}, {0, 2, 1, 3},
                             std::vector<MatXc>(3, u4));

  VecXc f = randomShape(rng, *grid);
  StateVector in = singlePhoton(grid, reg, 0, f);
  StateVector out = applyChannel(in, ch);
  for (const auto &t : out.terms()) {
    CHECK(photonCount(t, 1) == 0);
    CHECK(photonCount(t, 3) == 0);
  }
}

TEST_CASE("polarization rotation special cases") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 4);
  auto reg = makeRegistry(2);
  std::mt19937_64 rng(23);
  VecXc f = randomShape(rng, *grid);
  StateVector in = singlePhoton(grid, reg, 0, f);

  StateVector same =
      applyChannel(in, polarizationRotation(grid, 0, 1, Complex(1, 0), Complex(0, 0)));
  CHECK(stateDistance(same, in) < 1e-12);

  // (u, v) = (0, 1) swaps the pair up to sign
  StateVector swapped =
      applyChannel(in, polarizationRotation(grid, 0, 1, Complex(0, 0), Complex(1, 0)));
  CHECK(std::abs(std::abs(innerProduct(singlePhoton(grid, reg, 1, f), swapped)) - 1.0) < 1e-12);

  CHECK_THROWS_AS(polarizationRotation(grid, 0, 1, Complex(1, 0), Complex(1, 0)),
                  ValidationError);
}

TEST_CASE("the same rotation on both pairs leaves the singlet invariant") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 3);
  auto reg = makeRegistry(4);
  std::mt19937_64 rng(29);
  MatXc k(3, 3);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      k(i, j) = Complex(nd(rng), nd(rng));
  auto g = SpectralAmplitude::pairKernel(grid, k, true);
  StateVector singlet = qkdPsiN(grid, reg, 0, 1, 2, 3, g, 1, true);

  std::uniform_real_distribution<double> ur(0.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    double th = 3.14159265358979 * ur(rng), ph = 6.2831853 * ur(rng);
    Complex u = std::cos(th), v = std::sin(th) * std::exp(Complex(0, ph));
    StateVector rotated = applyChannel(
        applyChannel(singlet, polarizationRotation(grid, 0, 1, u, v)),
        polarizationRotation(grid, 2, 3, u, v));
    CHECK(std::abs(innerProduct(singlet, rotated) - Complex(1, 0)) < 1e-10);
  }
}

TEST_CASE("loss channel splits amplitude into a sink mode") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 5);
  auto reg = makeRegistry(3);
  std::mt19937_64 rng(31);
  VecXc f = randomShape(rng, *grid);
  StateVector in = singlePhoton(grid, reg, 0, f);

  StateVector lossless =
      applyChannel(in, lossChannel(grid, 0, 1, 2, VecXc::Constant(5, 1.0)));
  CHECK(stateDistance(lossless, singlePhoton(grid, reg, 1, f)) < 1e-12);

  // frequency-flat loss: surviving fraction is |eta|^2
  double eta = 0.8;
  StateVector flat =
      applyChannel(in, lossChannel(grid, 0, 1, 2, VecXc::Constant(5, eta)));
  CHECK(normSquared(projectorApply(flat, {1}, 1)) == doctest::Approx(eta * eta).epsilon(1e-11));
  CHECK(normSquared(flat) == doctest::Approx(1.0).epsilon(1e-11));

  // frequency-dependent loss reweights the surviving spectrum
  VecXc etaw(5);
  for (int i = 0; i < 5; ++i)
    etaw(i) = Complex(0.2 + 0.15 * i, 0.1);
  StateVector shaped = applyChannel(in, lossChannel(grid, 0, 1, 2, etaw));
  double survived = 0;
  for (int i = 0; i < 5; ++i)
    survived += grid->weight(i) * std::norm(std::conj(etaw(i)) * f(i));
  CHECK(normSquared(projectorApply(shaped, {1}, 1)) ==
        doctest::Approx(survived).epsilon(1e-11));

  CHECK_THROWS_AS(lossChannel(grid, 0, 1, 2, VecXc::Constant(5, 1.2)), ValidationError);
}

TEST_CASE("coupler embedding two splitters equals composing them") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 3);
  auto reg = makeRegistry(8);
  std::mt19937_64 rng(37);
  double e1 = 0.3, e2 = 0.65;
  auto embed2 = [](double eta) {
    MatXc u(2, 2);
    double c = std::sqrt(eta), s = std::sqrt(1 - eta);
    u << c, -s, s, c;
    return u;
  };
  MatXc u8 = MatXc::Identity(8, 8);
  u8.block(0, 0, 2, 2) = embed2(e1);
  u8.block(2, 2, 2, 2) = embed2(e2);
  std::vector<int> ports{0, 1, 2, 3, 4, 5, 6, 7};
  ScatterChannel big = coupler(grid, ports, ports, std::vector<MatXc>(3, u8));

  VecXc f = randomShape(rng, *grid), g = randomShape(rng, *grid);
  StateVector in = StateVector::make(
      grid, reg,
      {{Complex(1, 0), {0, 2}, SpectralAmplitude::factored(grid, {f, g})}});
  StateVector via_coupler = applyChannel(in, big);
  StateVector via_two =
      applyChannel(applyChannel(in, beamSplitter(grid, 0, 0, 1, e1)),
                   beamSplitter(grid, 2, 2, 3, e2));
  CHECK(stateDistance(via_coupler, via_two) < 1e-11);
}

TEST_CASE("phase advance applies a direction-signed propagation phase") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 4);
  auto reg = std::make_shared<ModeRegistry>();
  reg->add({"fwd", "F0", 1, Direction::Plus});
  reg->add({"bwd", "F0", 1, Direction::Minus});
  std::mt19937_64 rng(41);
  VecXc f = randomShape(rng, *grid);
  VecXd kvec(4);
  for (int i = 0; i < 4; ++i)
    kvec(i) = 1.0e7 + i * 2.0e5; // strictly increasing
  double x = 3.5e-7;

  for (int m : {0, 1}) {
    StateVector in = singlePhoton(grid, std::shared_ptr<const ModeRegistry>(reg), m, f);
    StateVector out = applyChannel(in, phaseAdvance(grid, *reg, m, kvec, x));
    CHECK(normSquared(out) == doctest::Approx(1.0).epsilon(1e-12));
    double sign = (m == 0) ? 1.0 : -1.0;
    VecXc expect(4);
    for (int i = 0; i < 4; ++i)
      expect(i) = f(i) * std::exp(Complex(0, sign * kvec(i) * x));
    CHECK(stateDistance(out, singlePhoton(grid, reg, m, expect)) < 1e-12);
  }

  VecXd bad(4);
  bad << 2, 1, 3, 4;
  CHECK_THROWS_AS(phaseAdvance(grid, *reg, 0, bad, x), ValidationError);
}

TEST_CASE("channel construction rejects non-orthonormal columns") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 2);
  MatXc u(2, 2);
  u << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(makeFlatChannel(grid, {0, 1}, {0, 1}, u), ValidationError);
}

TEST_CASE("states already in an output mode are rejected") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 3);
  auto reg = makeRegistry(3);
  std::mt19937_64 rng(43);
  VecXc f = randomShape(rng, *grid);
  StateVector in = singlePhoton(grid, reg, 1, f);
  CHECK_THROWS_AS(applyChannel(in, beamSplitter(grid, 0, 1, 2, 0.5)),
                  ValidationError);
}

TEST_CASE("any channel carries coherent products to coherent products") {
  auto grid = makeUniformGrid(1.0e15, 2.0e15, 4);
  auto reg = makeRegistry(3);
  std::mt19937_64 rng(47);
  VecXc f = randomShape(rng, *grid);
  Complex alpha(1.1, 0.3);
  CoherentState in = coherent(grid, reg, 0, f, alpha);
  double eta = 0.42;
  StateVector out = applyChannel(in.psi, beamSplitter(grid, 0, 1, 2, eta));

  // the image must be the truncated product of two coherent states with
  // amplitudes alpha sqrt(eta) and alpha sqrt(1 - eta)
  Complex a1 = alpha * std::sqrt(eta), a2 = alpha * std::sqrt(1 - eta);
  std::vector<MonomialTerm> terms;
  for (int total = 0; total <= in.n_max; ++total) {
    for (int n = 0; n <= total; ++n) {
      int m = total - n;
      Complex coeff = std::exp(-std::norm(alpha) / 2.0) * std::pow(a1, n) *
                      std::pow(a2, m) / (factorial(n) * factorial(m));
      std::vector<int> modes;
      modes.insert(modes.end(), std::size_t(n), 1);
      modes.insert(modes.end(), std::size_t(m), 2);
      terms.push_back({coeff, std::move(modes),
                       total == 0 ? SpectralAmplitude::scalarOne(grid)
                                  : SpectralAmplitude::factoredPower(grid, f, total)});
    }
  }
  StateVector want = StateVector::make(grid, reg, std::move(terms));
  CHECK(stateDistance(out, want) < 1e-8);
}
