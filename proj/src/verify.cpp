#include "photonnet/verify.hpp"

#include <random>
#include <sstream>

#include <Eigen/QR>

#include "photonnet/sources.hpp"

namespace photonnet {

namespace {

using Rng = std::mt19937_64;

Complex randomUnit(Rng &rng) {
  std::normal_distribution<double> g;
  Complex z(g(rng), g(rng));
  double a = std::abs(z);
  return a > 0 ? z / a : Complex(1.0, 0.0);
}

VecXc randomVector(Rng &rng, int n) {
  std::normal_distribution<double> g;
  VecXc v(n);
  for (int i = 0; i < n; ++i)
    v[i] = Complex(g(rng), g(rng));
  return v;
}

MatXc randomUnitary(Rng &rng, int n) {
  std::normal_distribution<double> g;
  MatXc m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<MatXc> qr(m);
  MatXc q = qr.householderQ() * MatXc::Identity(n, n);
  // Fix the phase ambiguity so columns are reproducible across platforms.
  MatXc r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    Complex d = r(j, j);
    if (d != Complex(0.0, 0.0))
      q.col(j) *= d / std::abs(d);
  }
  return q;
}

SpectralAmplitude randomAmplitude(Rng &rng, const GridPtr &grid, int arity) {
  std::uniform_int_distribution<int> kind(0, 2);
  const int bins = grid->bins();
  switch (arity >= 2 ? kind(rng) : 2) {
  case 0: {
    std::int64_t cells = 1;
    for (int a = 0; a < arity; ++a)
      cells *= bins;
    return SpectralAmplitude::dense(grid, arity, randomVector(rng, int(cells)));
  }
  case 1:
    if (arity == 2) {
      MatXc k(bins, bins);
      for (int i = 0; i < bins; ++i)
        k.row(i) = randomVector(rng, bins).transpose();
      return SpectralAmplitude::pairKernel(grid, k);
    }
    [[fallthrough]];
  default: {
    std::vector<VecXc> factors;
    for (int a = 0; a < arity; ++a)
      factors.push_back(randomVector(rng, bins));
    return SpectralAmplitude::factored(grid, std::move(factors));
  }
  }
}

StateVector randomState(Rng &rng, const GridPtr &grid,
                        const RegistryPtr &registry,
                        const std::vector<int> &modes, int max_terms,
                        int max_photons) {
  std::uniform_int_distribution<int> nterms(1, max_terms);
  std::uniform_int_distribution<int> nphot(1, max_photons);
  std::uniform_int_distribution<std::size_t> pick(0, modes.size() - 1);
  std::vector<MonomialTerm> terms;
  int count = nterms(rng);
  for (int t = 0; t < count; ++t) {
    Complex coeff = randomUnit(rng);
    int n = nphot(rng);
    std::vector<int> slot_modes;
    for (int p = 0; p < n; ++p)
      slot_modes.push_back(modes[pick(rng)]);
    terms.push_back(
        {coeff, std::move(slot_modes), randomAmplitude(rng, grid, n)});
  }
  return StateVector::make(grid, registry, std::move(terms));
}

struct CaseCheck {
  double worst = 0.0;
  std::ostringstream log;
  bool ok = true;

  void expectNear(const char *what, double got, double want, double tol) {
    double err = std::abs(got - want);
    worst = std::max(worst, err);
    if (err > tol) {
      ok = false;
      log << what << ": engine " << got << " oracle " << want << " err "
          << err << "; ";
    }
  }
};

} // namespace

CrossValidationReport runOracleCrossValidation(std::uint64_t seed, int cases) {
  if (cases <= 0)
    throw ValidationError("runOracleCrossValidation: cases must be positive");
  CrossValidationReport report;
  Rng rng(seed);

  GridPtr grid = makeUniformGrid(0.8, 2.0, 2);
  auto registry = std::make_shared<ModeRegistry>();
  registry->add({"a1", "A", 1, Direction::Plus});
  registry->add({"a2", "A", 2, Direction::Plus});
  registry->add({"b1", "B", 1, Direction::Minus});
  const std::vector<int> all_modes{0, 1, 2};
  const int cutoff = 3;

  DenseFockSpace space =
      DenseFockSpace::build(grid, registry, all_modes, cutoff);

  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int c = 0; c < cases; ++c) {
    CaseCheck check;

    // Channel flavor: a per-bin random unitary over two or three modes, or
    // a beam splitter feeding modes 1 and 2 from mode 0.
    bool splitter = unit(rng) < 0.3;
    std::vector<int> state_modes = all_modes;
    ScatterChannel ch;
    if (splitter) {
      state_modes = {0};
      ch = beamSplitter(grid, 0, 1, 2, unit(rng));
    } else {
      std::vector<int> span =
          unit(rng) < 0.5 ? std::vector<int>{0, 1} : all_modes;
      std::vector<MatXc> blocks;
      for (int b = 0; b < grid->bins(); ++b)
        blocks.push_back(randomUnitary(rng, int(span.size())));
      ch = makeChannel(grid, span, span, std::move(blocks));
    }

    StateVector psi = randomState(rng, grid, registry, state_modes, 2, cutoff);
    double n2 = normSquared(psi);
    if (n2 < 1e-9) // cancellation made the draw useless; try a plain one
      psi = singlePhoton(grid, registry, state_modes[0],
                         randomVector(rng, grid->bins()), true);
    else
      psi = psi.scaled(Complex(1.0 / std::sqrt(n2), 0.0));

    VecXc v0 = embedState(space, psi);
    check.expectNear("input norm", normSquared(psi), v0.squaredNorm(), 1e-8);

    StateVector out = applyChannel(psi, ch);
    VecXc v_engine = embedState(space, out);
    VecXc v_oracle = denseChannelMatrix(space, ch) * v0;
    double image_err = (v_engine - v_oracle).norm();
    check.expectNear("channel image", image_err, 0.0, 1e-8);

    // One or two diodes on disjoint random scopes.
    std::vector<ApdModel> diodes;
    std::vector<int> pool = all_modes;
    std::shuffle(pool.begin(), pool.end(), rng);
    int ndet = unit(rng) < 0.5 ? 1 : 2;
    std::size_t next = 0;
    for (int d = 0; d < ndet; ++d) {
      ApdModel apd;
      int span = d + 1 == ndet ? (unit(rng) < 0.3 ? 2 : 1) : 1;
      for (int s = 0; s < span && next < pool.size(); ++s)
        apd.scope.push_back(pool[next++]);
      if (apd.scope.empty())
        break;
      apd.eta_det = unit(rng);
      apd.p_dark = 0.2 * unit(rng);
      diodes.push_back(std::move(apd));
    }

    std::vector<double> table = outcomeTable(out, diodes);
    for (std::size_t pattern = 0; pattern < table.size(); ++pattern) {
      VecXd diag = VecXd::Ones(space.dim());
      for (std::size_t d = 0; d < diodes.size(); ++d) {
        VecXd quiet = denseQuietDiagonal(space, diodes[d]);
        if ((pattern >> d) & 1)
          diag.array() *= 1.0 - quiet.array();
        else
          diag.array() *= quiet.array();
      }
      double want = (v_oracle.array().abs2() * diag.array()).sum();
      check.expectNear("outcome", table[pattern], want, 1e-8);
    }

    double n_engine = numberExpectation(out, {all_modes[0]});
    VecXd count = VecXd::Zero(space.dim());
    for (int i = 0; i < space.dim(); ++i)
      for (int b = 0; b < grid->bins(); ++b)
        count[i] += space.basis()[std::size_t(i)]
                                 [std::size_t(space.siteOf(all_modes[0], b))];
    check.expectNear("mode occupation", n_engine,
                     (v_oracle.array().abs2() * count.array()).sum(), 1e-8);

    ++report.cases;
    report.max_error = std::max(report.max_error, check.worst);
    if (!check.ok) {
      ++report.failures;
      std::ostringstream line;
      line << "case " << c << ": " << check.log.str();
      report.messages.push_back(line.str());
    }
  }
  return report;
}

} // namespace photonnet
