#pragma once
#include "photonnet/state.hpp"

namespace photonnet {

/// Frequency-preserving linear-optical map. Per bin b, creation operators
/// rewrite as
///   a'_{in[j]}(omega_b) -> sum_k u[b](k, j) a'_{out[k]}(omega_b),
/// so column j of u[b] lists the images of input j. Columns must be
/// orthonormal per bin (residual <= 1e-10); n_out >= n_in, with the missing
/// columns understood as vacuum-fed ports that are never populated.
struct ScatterChannel {
  GridPtr grid;
  std::vector<int> modes_in;
  std::vector<int> modes_out;
  std::vector<MatXc> u; // one n_out x n_in block per bin
};

/// Validates shapes, mode indices and per-bin column orthonormality.
ScatterChannel makeChannel(GridPtr grid, std::vector<int> modes_in,
                           std::vector<int> modes_out, std::vector<MatXc> u);

/// Frequency-flat variant: the same block at every bin.
ScatterChannel makeFlatChannel(GridPtr grid, std::vector<int> modes_in,
                               std::vector<int> modes_out, const MatXc &u);

/// Rewrites the state through the channel. Modes outside modes_in pass
/// through unchanged; a state populating one of the output modes directly
/// is rejected, since the rewrite would alias it.
StateVector applyChannel(const StateVector &psi, const ScatterChannel &ch);

/// a'_in -> sqrt(eta) a'_out1 + sqrt(1 - eta) a'_out2. The second splitter
/// input is vacuum-fed and dropped.
ScatterChannel beamSplitter(GridPtr grid, int mode_in, int out1, int out2,
                            double eta_trans);

/// Polarization rotation on a mode pair, from the annihilation-side map
/// a_1 -> u a_1 + v a_2, a_2 -> -conj(v) a_1 + conj(u) a_2 with
/// |u|^2 + |v|^2 = 1. (0, 1) swaps the modes up to sign; applying the same
/// rotation to both halves of a polarization singlet leaves it invariant.
ScatterChannel polarizationRotation(GridPtr grid, int mode1, int mode2,
                                    Complex u, Complex v);

/// Four-port fiber junction: a unitary per-bin 4x4 block.
ScatterChannel splice(GridPtr grid, const std::vector<int> &modes_in,
                      const std::vector<int> &modes_out,
                      std::vector<MatXc> u);

/// Eight-port junction for two polarization-pair fibers.
ScatterChannel coupler(GridPtr grid, const std::vector<int> &modes_in,
                       const std::vector<int> &modes_out,
                       std::vector<MatXc> u);

/// Linear loss as a two-port isometry onto a sink mode:
///   a'_in(omega) -> conj(eta(omega)) a'_out(omega)
///                   + sqrt(1 - |eta(omega)|^2) a'_sink(omega),
/// the creation-side image of mixing the annihilator with a vacuum sink.
/// Requires |eta| <= 1 per bin.
ScatterChannel lossChannel(GridPtr grid, int mode_in, int mode_out,
                           int mode_sink, const VecXc &eta_loss);

/// Pure propagation phase a'(omega) -> exp(i s k(omega) x) a'(omega), with
/// s = +1/-1 the mode's propagation direction read from the registry.
/// k must be strictly increasing across bins.
ScatterChannel phaseAdvance(GridPtr grid, const ModeRegistry &registry,
                            int mode, const VecXd &k, double x);

} // namespace photonnet
