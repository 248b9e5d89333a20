#pragma once
#include <unordered_map>

#include "photonnet/channels.hpp"
#include "photonnet/density.hpp"

namespace photonnet {

/// Explicit occupation-number basis over (mode, bin) sites, capped at a
/// total photon cutoff. Everything here is brute force on purpose: states
/// become coordinate vectors, operators become matrices, and results can
/// be compared against the contraction engine with no shared code paths.
class DenseFockSpace {
public:
  /// Spans the given modes (sorted, distinct) on the grid. Throws when the
  /// basis would exceed max_dim states.
  static DenseFockSpace build(GridPtr grid, RegistryPtr registry,
                              std::vector<int> modes, int cutoff,
                              int max_dim = 20000);

  const GridPtr &grid() const { return grid_; }
  const RegistryPtr &registry() const { return registry_; }
  const std::vector<int> &modes() const { return modes_; }
  int cutoff() const { return cutoff_; }
  int sites() const { return int(modes_.size()) * grid_->bins(); }
  int dim() const { return int(basis_.size()); }
  const std::vector<std::vector<int>> &basis() const { return basis_; }

  /// Site of (mode, bin); the mode must be spanned.
  int siteOf(int mode, int bin) const;
  int indexOf(const std::vector<int> &occupation) const;

private:
  DenseFockSpace() = default;
  GridPtr grid_;
  RegistryPtr registry_;
  std::vector<int> modes_;
  std::vector<int> mode_slot_; // registry index -> spanned position or -1
  int cutoff_ = 0;
  std::vector<std::vector<int>> basis_;
  std::unordered_map<std::string, int> index_;
};

/// Coordinates of a state: sum over each term's grid tuples of
/// coeff * amplitude * prod sqrt(w) * prod sqrt(n_site!).
VecXc embedState(const DenseFockSpace &space, const StateVector &psi);

/// Matrix of a'(omega_bin) on the mode, i.e. the unit ladder over
/// sqrt(weight); satisfies [a, a'] = 1/w away from the cutoff boundary.
MatXc denseCreation(const DenseFockSpace &space, int mode, int bin);

/// Max deviation of [a_i, a_j'] from delta_ij / w_i over all site pairs,
/// measured on basis states far enough from the cutoff to see both orders.
double ladderCommutatorResidual(const DenseFockSpace &space);

/// Fock-space matrix of a scatter channel: every spanned input site's
/// creation operator is rewritten through the per-bin block and expanded
/// multinomially. Spanned modes must cover the channel's outputs.
MatXc denseChannelMatrix(const DenseFockSpace &space,
                         const ScatterChannel &ch);

/// Diagonal of the no-click operator (1 - p_dark)(1 - eta_det)^n_scope.
VecXd denseQuietDiagonal(const DenseFockSpace &space, const ApdModel &apd);

/// Diagonal of the click POVM element 1 - quiet.
VecXd densePovmDiagonal(const DenseFockSpace &space, const ApdModel &apd);

/// sum_w |embed ket><embed bra| as a dense matrix.
MatXc embedDensity(const DenseFockSpace &space, const DensityOp &rho);

/// Reduced matrix on a space spanning a subset of the modes: entries with
/// equal traced occupations accumulate.
MatXc densePartialTrace(const DenseFockSpace &space, const MatXc &rho,
                        const DenseFockSpace &reduced);

} // namespace photonnet
