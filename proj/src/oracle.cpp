#include "photonnet/oracle.hpp"

#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>

namespace photonnet {

namespace {

std::string occKey(const std::vector<int> &occ) {
  std::string k;
  k.reserve(occ.size());
  for (int n : occ)
    k.push_back(char(n));
  return k;
}

void enumerate(std::vector<std::vector<int>> &out, std::vector<int> &occ,
               int site, int remaining) {
  if (site == int(occ.size())) {
    out.push_back(occ);
    return;
  }
  for (int n = 0; n <= remaining; ++n) {
    occ[std::size_t(site)] = n;
    enumerate(out, occ, site + 1, remaining - n);
  }
  occ[std::size_t(site)] = 0;
}

} // namespace

DenseFockSpace DenseFockSpace::build(GridPtr grid, RegistryPtr registry,
                                     std::vector<int> modes, int cutoff,
                                     int max_dim) {
  if (!grid || !registry)
    throw ValidationError("DenseFockSpace: missing grid or registry");
  if (cutoff < 0)
    throw ValidationError("DenseFockSpace: negative cutoff");
  std::set<int> seen;
  for (int m : modes) {
    if (m < 0 || m >= registry->size())
      throw ValidationError("DenseFockSpace: mode index out of range");
    if (!seen.insert(m).second)
      throw ValidationError("DenseFockSpace: repeated mode");
  }
  std::sort(modes.begin(), modes.end());

  DenseFockSpace s;
  s.grid_ = std::move(grid);
  s.registry_ = registry;
  s.modes_ = std::move(modes);
  s.cutoff_ = cutoff;
  s.mode_slot_.assign(std::size_t(registry->size()), -1);
  for (std::size_t i = 0; i < s.modes_.size(); ++i)
    s.mode_slot_[std::size_t(s.modes_[i])] = int(i);

  const int sites = s.sites();
  // Basis size is sum_k C(k + sites - 1, k); bail out before enumerating
  // if that passes the cap.
  double dim = 0.0, level = 1.0;
  for (int k = 0; k <= cutoff; ++k) {
    dim += level;
    level = level * (k + sites) / (k + 1);
    if (dim > double(max_dim))
      throw ValidationError("DenseFockSpace: basis exceeds the dimension cap");
  }
  std::vector<int> occ(std::size_t(sites), 0);
  enumerate(s.basis_, occ, 0, cutoff);
  if (int(s.basis_.size()) > max_dim)
    throw ValidationError("DenseFockSpace: basis exceeds the dimension cap");
  for (std::size_t i = 0; i < s.basis_.size(); ++i)
    s.index_.emplace(occKey(s.basis_[i]), int(i));
  return s;
}

int DenseFockSpace::siteOf(int mode, int bin) const {
  if (mode < 0 || mode >= int(mode_slot_.size()) || mode_slot_[std::size_t(mode)] < 0)
    throw ValidationError("DenseFockSpace: mode is not spanned");
  if (bin < 0 || bin >= grid_->bins())
    throw ValidationError("DenseFockSpace: bin out of range");
  return mode_slot_[std::size_t(mode)] * grid_->bins() + bin;
}

int DenseFockSpace::indexOf(const std::vector<int> &occupation) const {
  auto it = index_.find(occKey(occupation));
  if (it == index_.end())
    throw ValidationError("DenseFockSpace: occupation outside the basis");
  return it->second;
}

VecXc embedState(const DenseFockSpace &space, const StateVector &psi) {
  if (!psi.grid()->sameAs(*space.grid()))
    throw ValidationError("embedState: grids differ");
  const FrequencyGrid &grid = *space.grid();
  const int bins = grid.bins();
  VecXc v = VecXc::Zero(space.dim());
  std::vector<int> occ(std::size_t(space.sites()));
  for (const MonomialTerm &t : psi.terms()) {
    const int n = int(t.modes.size());
    if (n > space.cutoff())
      throw ValidationError("embedState: term exceeds the photon cutoff");
    std::vector<int> sites(static_cast<std::size_t>(n));
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
      double root_w = 1.0;
      for (int j = 0; j < n; ++j) {
        sites[std::size_t(j)] = space.siteOf(t.modes[std::size_t(j)],
                                             idx[std::size_t(j)]);
        root_w *= std::sqrt(grid.weight(idx[std::size_t(j)]));
      }
      std::fill(occ.begin(), occ.end(), 0);
      for (int s : sites)
        ++occ[std::size_t(s)];
      double root_fact = 1.0;
      for (std::size_t s = 0; s < occ.size(); ++s)
        for (int k = 2; k <= occ[s]; ++k)
          root_fact *= std::sqrt(double(k));
      v[space.indexOf(occ)] += t.coeff * t.amplitude.evalAt(idx) * root_w *
                               root_fact;
      int a = n - 1;
      for (; a >= 0; --a) {
        if (++idx[std::size_t(a)] < bins)
          break;
        idx[std::size_t(a)] = 0;
      }
      if (a < 0)
        break;
      if (n == 0)
        break;
    }
  }
  return v;
}

MatXc denseCreation(const DenseFockSpace &space, int mode, int bin) {
  const int site = space.siteOf(mode, bin);
  const double root_w = std::sqrt(space.grid()->weight(bin));
  MatXc a = MatXc::Zero(space.dim(), space.dim());
  std::vector<int> occ;
  for (int col = 0; col < space.dim(); ++col) {
    occ = space.basis()[std::size_t(col)];
    int total = 0;
    for (int n : occ)
      total += n;
    if (total >= space.cutoff())
      continue;
    ++occ[std::size_t(site)];
    a(space.indexOf(occ), col) =
        std::sqrt(double(occ[std::size_t(site)])) / root_w;
  }
  return a;
}

double ladderCommutatorResidual(const DenseFockSpace &space) {
  // Restrict to columns two photons below the cutoff so both operator
  // orders stay inside the truncated space.
  std::vector<int> safe;
  for (int i = 0; i < space.dim(); ++i) {
    int total = 0;
    for (int n : space.basis()[std::size_t(i)])
      total += n;
    if (total <= space.cutoff() - 2)
      safe.push_back(i);
  }
  double worst = 0.0;
  const int bins = space.grid()->bins();
  for (int ma : space.modes())
    for (int ba = 0; ba < bins; ++ba) {
      MatXc ai = denseCreation(space, ma, ba).adjoint();
      for (int mb : space.modes())
        for (int bb = 0; bb < bins; ++bb) {
          MatXc ad = denseCreation(space, mb, bb);
          MatXc comm = ai * ad - ad * ai;
          double expect =
              (ma == mb && ba == bb) ? 1.0 / space.grid()->weight(ba) : 0.0;
          for (int i : safe)
            for (int j : safe) {
              Complex got = comm(i, j);
              Complex want(i == j ? expect : 0.0, 0.0);
              worst = std::max(worst, std::abs(got - want));
            }
        }
    }
  return worst;
}

MatXc denseChannelMatrix(const DenseFockSpace &space,
                         const ScatterChannel &ch) {
  if (!ch.grid->sameAs(*space.grid()))
    throw ValidationError("denseChannelMatrix: grids differ");
  const int bins = space.grid()->bins();
  const int dim = space.dim();

  // Unit-ladder creation images per spanned site. Substitution keeps the
  // bin, so sqrt(w) cancels and plain ladder matrices suffice.
  std::vector<MatXc> image(std::size_t(space.sites()));
  auto hat = [&](int site) {
    MatXc a = MatXc::Zero(dim, dim);
    std::vector<int> occ;
    for (int col = 0; col < dim; ++col) {
      occ = space.basis()[std::size_t(col)];
      int total = 0;
      for (int n : occ)
        total += n;
      if (total >= space.cutoff())
        continue;
      ++occ[std::size_t(site)];
      a(space.indexOf(occ), col) = std::sqrt(double(occ[std::size_t(site)]));
    }
    return a;
  };
  std::vector<int> in_pos(std::size_t(space.registry()->size()), -1);
  for (std::size_t j = 0; j < ch.modes_in.size(); ++j)
    in_pos[std::size_t(ch.modes_in[j])] = int(j);

  for (int m : space.modes())
    for (int b = 0; b < bins; ++b) {
      int site = space.siteOf(m, b);
      int j = in_pos[std::size_t(m)];
      if (j < 0) {
        image[std::size_t(site)] = hat(site);
        continue;
      }
      MatXc sum = MatXc::Zero(dim, dim);
      for (std::size_t k = 0; k < ch.modes_out.size(); ++k) {
        Complex u = ch.u[std::size_t(b)](Eigen::Index(k), Eigen::Index(j));
        if (u == Complex(0.0, 0.0))
          continue;
        sum += u * hat(space.siteOf(ch.modes_out[k], b));
      }
      image[std::size_t(site)] = std::move(sum);
    }

  MatXc out = MatXc::Zero(dim, dim);
  const int vac = space.indexOf(std::vector<int>(std::size_t(space.sites()), 0));
  for (int col = 0; col < dim; ++col) {
    VecXc v = VecXc::Zero(dim);
    v[vac] = 1.0;
    double norm_fact = 1.0;
    const std::vector<int> &occ = space.basis()[std::size_t(col)];
    for (std::size_t s = 0; s < occ.size(); ++s) {
      for (int k = 0; k < occ[s]; ++k)
        v = image[s] * v;
      for (int k = 2; k <= occ[s]; ++k)
        norm_fact *= std::sqrt(double(k));
    }
    out.col(col) = v / norm_fact;
  }
  return out;
}

VecXd denseQuietDiagonal(const DenseFockSpace &space, const ApdModel &apd) {
  const int bins = space.grid()->bins();
  VecXd d(space.dim());
  for (int i = 0; i < space.dim(); ++i) {
    int n = 0;
    for (int m : apd.scope)
      for (int b = 0; b < bins; ++b)
        n += space.basis()[std::size_t(i)][std::size_t(space.siteOf(m, b))];
    d[i] = (1.0 - apd.p_dark) * std::pow(1.0 - apd.eta_det, n);
  }
  return d;
}

VecXd densePovmDiagonal(const DenseFockSpace &space, const ApdModel &apd) {
  return VecXd::Ones(space.dim()) - denseQuietDiagonal(space, apd);
}

MatXc embedDensity(const DenseFockSpace &space, const DensityOp &rho) {
  MatXc m = MatXc::Zero(space.dim(), space.dim());
  for (const DensityTerm &t : rho.terms()) {
    VecXc k = embedState(space, t.ket);
    VecXc b = embedState(space, t.bra);
    m += t.weight * k * b.adjoint();
  }
  return m;
}

MatXc densePartialTrace(const DenseFockSpace &space, const MatXc &rho,
                        const DenseFockSpace &reduced) {
  if (rho.rows() != space.dim() || rho.cols() != space.dim())
    throw ValidationError("densePartialTrace: matrix does not fit the space");
  const int bins = space.grid()->bins();
  std::vector<int> kept_sites, traced_sites;
  std::set<int> kept_modes(reduced.modes().begin(), reduced.modes().end());
  for (int m : space.modes())
    for (int b = 0; b < bins; ++b) {
      if (kept_modes.count(m))
        kept_sites.push_back(space.siteOf(m, b));
      else
        traced_sites.push_back(space.siteOf(m, b));
    }

  // Precompute each full-basis state's reduced index and traced signature.
  std::vector<int> red_index(std::size_t(space.dim()));
  std::vector<std::string> traced_sig(std::size_t(space.dim()));
  std::vector<int> kocc(kept_sites.size());
  for (int i = 0; i < space.dim(); ++i) {
    const std::vector<int> &occ = space.basis()[std::size_t(i)];
    for (std::size_t s = 0; s < kept_sites.size(); ++s)
      kocc[s] = occ[std::size_t(kept_sites[s])];
    red_index[std::size_t(i)] = reduced.indexOf(kocc);
    std::string sig;
    for (int s : traced_sites)
      sig.push_back(char(occ[std::size_t(s)]));
    traced_sig[std::size_t(i)] = std::move(sig);
  }

  MatXc out = MatXc::Zero(reduced.dim(), reduced.dim());
  for (int i = 0; i < space.dim(); ++i)
    for (int j = 0; j < space.dim(); ++j)
      if (traced_sig[std::size_t(i)] == traced_sig[std::size_t(j)])
        out(red_index[std::size_t(i)], red_index[std::size_t(j)]) += rho(i, j);
  return out;
}

namespace {

MatXc matrixSqrt(const MatXc &m) {
  MatXc h = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<MatXc> es(h);
  VecXd lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

} // namespace

double fidelityOverlap(const DensityOp &rho1, const DensityOp &rho2) {
  if (!rho1.grid()->sameAs(*rho2.grid()) ||
      !rho1.registry()->sameAs(*rho2.registry()))
    throw ValidationError("fidelityOverlap: operators live on different frames");
  std::set<int> populated;
  auto scan = [&populated](const DensityOp &rho) {
    for (const DensityTerm &t : rho.terms()) {
      for (const MonomialTerm &mt : t.ket.terms())
        populated.insert(mt.modes.begin(), mt.modes.end());
      for (const MonomialTerm &mt : t.bra.terms())
        populated.insert(mt.modes.begin(), mt.modes.end());
    }
  };
  scan(rho1);
  scan(rho2);
  int cutoff = std::max(rho1.maxPhotonCount(), rho2.maxPhotonCount());
  DenseFockSpace space = DenseFockSpace::build(
      rho1.grid(), rho1.registry(),
      std::vector<int>(populated.begin(), populated.end()), cutoff);
  MatXc s1 = matrixSqrt(embedDensity(space, rho1));
  MatXc s2 = matrixSqrt(embedDensity(space, rho2));
  return (s1 * s2).trace().real();
}

} // namespace photonnet
