#include "photonnet/channels.hpp"

#include <cmath>
#include <set>

namespace photonnet {

namespace {

void requireModeList(const std::vector<int> &modes, const char *what) {
  std::set<int> seen;
  for (int m : modes) {
    if (m < 0)
      throw ValidationError(std::string(what) + ": negative mode index");
    if (!seen.insert(m).second)
      throw ValidationError(std::string(what) + ": repeated mode index");
  }
}

} // namespace

ScatterChannel makeChannel(GridPtr grid, std::vector<int> modes_in,
                           std::vector<int> modes_out, std::vector<MatXc> u) {
  if (!grid)
    throw ValidationError("makeChannel: missing grid");
  if (modes_in.empty())
    throw ValidationError("makeChannel: empty input mode list");
  requireModeList(modes_in, "makeChannel inputs");
  requireModeList(modes_out, "makeChannel outputs");
  const auto n_in = Eigen::Index(modes_in.size());
  const auto n_out = Eigen::Index(modes_out.size());
  if (n_out < n_in)
    throw ValidationError("makeChannel: fewer outputs than inputs");
  if (Eigen::Index(u.size()) != Eigen::Index(grid->bins()))
    throw ValidationError("makeChannel: need one block per grid bin");
  for (std::size_t b = 0; b < u.size(); ++b) {
    const MatXc &blk = u[b];
    if (blk.rows() != n_out || blk.cols() != n_in)
      throw ValidationError("makeChannel: block at bin " + std::to_string(b) +
                            " has the wrong shape");
    MatXc gram = blk.adjoint() * blk;
    double residual =
        (gram - MatXc::Identity(n_in, n_in)).cwiseAbs().maxCoeff();
    if (residual > 1e-10)
      throw ValidationError("makeChannel: columns at bin " +
                            std::to_string(b) +
                            " are not orthonormal (residual " +
                            std::to_string(residual) + ")");
  }
  return ScatterChannel{std::move(grid), std::move(modes_in),
                        std::move(modes_out), std::move(u)};
}

ScatterChannel makeFlatChannel(GridPtr grid, std::vector<int> modes_in,
                               std::vector<int> modes_out, const MatXc &u) {
  if (!grid)
    throw ValidationError("makeChannel: missing grid");
  std::vector<MatXc> per_bin(std::size_t(grid->bins()), u);
  return makeChannel(std::move(grid), std::move(modes_in),
                     std::move(modes_out), std::move(per_bin));
}

StateVector applyChannel(const StateVector &psi, const ScatterChannel &ch) {
  if (!psi.grid()->sameAs(*ch.grid))
    throw ValidationError("applyChannel: state and channel grids differ");

  std::set<int> inputs(ch.modes_in.begin(), ch.modes_in.end());
  std::set<int> outputs(ch.modes_out.begin(), ch.modes_out.end());
  for (const MonomialTerm &t : psi.terms())
    for (int m : t.modes)
      if (outputs.count(m) && !inputs.count(m))
        throw ValidationError(
            "applyChannel: state populates output mode " +
            std::to_string(m) +
            " which is not rewritten; it would alias the channel image");

  const int bins = ch.grid->bins();
  SubstitutionRule rule;
  for (std::size_t j = 0; j < ch.modes_in.size(); ++j) {
    std::vector<SubstitutionTarget> targets;
    for (std::size_t k = 0; k < ch.modes_out.size(); ++k) {
      VecXc coeff(bins);
      for (int b = 0; b < bins; ++b)
        coeff[b] = ch.u[std::size_t(b)](Eigen::Index(k), Eigen::Index(j));
      if (coeff.isZero(0.0))
        continue;
      targets.push_back({ch.modes_out[k],
                         std::make_shared<const VecXc>(std::move(coeff))});
    }
    rule.emplace(ch.modes_in[j], std::move(targets));
  }
  return applySubstitution(psi, rule);
}

ScatterChannel beamSplitter(GridPtr grid, int mode_in, int out1, int out2,
                            double eta_trans) {
  if (!(eta_trans >= 0.0 && eta_trans <= 1.0))
    throw ValidationError("beamSplitter: eta_trans must lie in [0, 1]");
  if (out1 == out2)
    throw ValidationError("beamSplitter: output modes must be distinct");
  MatXc u(2, 1);
  u << std::sqrt(eta_trans), std::sqrt(1.0 - eta_trans);
  return makeFlatChannel(std::move(grid), {mode_in}, {out1, out2}, u);
}

ScatterChannel polarizationRotation(GridPtr grid, int mode1, int mode2,
                                    Complex u, Complex v) {
  if (std::abs(std::norm(u) + std::norm(v) - 1.0) > 1e-10)
    throw ValidationError(
        "polarizationRotation: need |u|^2 + |v|^2 = 1");
  // Creation-side images of a_1 -> u a_1 + v a_2, a_2 -> -v* a_1 + u* a_2.
  MatXc blk(2, 2);
  blk << std::conj(u), -v, std::conj(v), u;
  return makeFlatChannel(std::move(grid), {mode1, mode2}, {mode1, mode2},
                         blk);
}

ScatterChannel splice(GridPtr grid, const std::vector<int> &modes_in,
                      const std::vector<int> &modes_out,
                      std::vector<MatXc> u) {
  if (modes_in.size() != 4 || modes_out.size() != 4)
    throw ValidationError("splice: expects four inputs and four outputs");
  return makeChannel(std::move(grid), modes_in, modes_out, std::move(u));
}

ScatterChannel coupler(GridPtr grid, const std::vector<int> &modes_in,
                       const std::vector<int> &modes_out,
                       std::vector<MatXc> u) {
  if (modes_in.size() != 8 || modes_out.size() != 8)
    throw ValidationError("coupler: expects eight inputs and eight outputs");
  return makeChannel(std::move(grid), modes_in, modes_out, std::move(u));
}

ScatterChannel lossChannel(GridPtr grid, int mode_in, int mode_out,
                           int mode_sink, const VecXc &eta_loss) {
  if (mode_out == mode_sink)
    throw ValidationError("lossChannel: output and sink must be distinct");
  if (eta_loss.size() != grid->bins())
    throw ValidationError("lossChannel: eta_loss length must match the grid");
  std::vector<MatXc> per_bin(std::size_t(grid->bins()));
  for (int b = 0; b < grid->bins(); ++b) {
    double mag2 = std::norm(eta_loss[b]);
    if (mag2 > 1.0 + 1e-12)
      throw ValidationError("lossChannel: |eta_loss| exceeds 1 at bin " +
                            std::to_string(b));
    MatXc col(2, 1);
    col << std::conj(eta_loss[b]), std::sqrt(std::max(0.0, 1.0 - mag2));
    per_bin[std::size_t(b)] = std::move(col);
  }
  return makeChannel(std::move(grid), {mode_in}, {mode_out, mode_sink},
                     std::move(per_bin));
}

ScatterChannel phaseAdvance(GridPtr grid, const ModeRegistry &registry,
                            int mode, const VecXd &k, double x) {
  if (mode < 0 || mode >= registry.size())
    throw ValidationError("phaseAdvance: mode index out of range");
  if (k.size() != grid->bins())
    throw ValidationError("phaseAdvance: k length must match the grid");
  for (int b = 1; b < k.size(); ++b)
    if (!(k[b] > k[b - 1]))
      throw ValidationError(
          "phaseAdvance: k(omega) must be strictly increasing");
  double s = registry.mode(mode).direction == Direction::Plus ? 1.0 : -1.0;
  std::vector<MatXc> per_bin(std::size_t(grid->bins()));
  for (int b = 0; b < grid->bins(); ++b) {
    MatXc one(1, 1);
    one(0, 0) = std::exp(Complex(0.0, s * k[b] * x));
    per_bin[std::size_t(b)] = std::move(one);
  }
  return makeChannel(std::move(grid), {mode}, {mode}, std::move(per_bin));
}

} // namespace photonnet
