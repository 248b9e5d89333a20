#pragma once
#include <array>

#include "photonnet/state.hpp"

namespace photonnet {

/// Constructors for the standard input states. Every function returns a
/// unit-norm state (tolerance 1e-9 on the inputs it validates), except
/// qkdPsiN when called with normalize = false.

/// a'_f(mode) |0>. f must be normalized unless normalize is set.
StateVector singlePhoton(GridPtr grid, RegistryPtr registry, int mode,
                         VecXc f, bool normalize = false);

/// (n!)^{-1/2} (h : a'^n) |0> in a single mode. h has arity n and its
/// symmetrization over all arguments must have unit norm.
StateVector nPhotonSingleMode(GridPtr grid, RegistryPtr registry, int mode,
                              const SpectralAmplitude &h, int n);

struct CoherentState {
  StateVector psi;
  int n_max = 0;     // largest photon number kept
  double tail = 0.0; // Poisson mass dropped; normSquared(psi) = 1 - tail
};

/// exp(-|alpha|^2/2) exp(alpha a'_f) |0>, truncated where the Poisson tail
/// drops below cutoff_epsilon. The truncated state is not renormalized, so
/// the deficit stays visible to norm checks. Errors when |alpha|^2 needs
/// more than 60 photons to reach the cutoff.
CoherentState coherent(GridPtr grid, RegistryPtr registry, int mode, VecXc f,
                       Complex alpha, double cutoff_epsilon = 1e-12,
                       bool normalize = false);

/// sum_{ij} C_ij (h_ij : a'_{a_i} b'_{b_j}) |0> over two polarization pairs.
/// Requires sum |C_ij|^2 = 1 and each h_ij arity-2 with unit L2 norm.
struct BiPhotonSpec {
  std::array<int, 2> a_modes{};
  std::array<int, 2> b_modes{};
  Eigen::Matrix2cd c;
  std::vector<SpectralAmplitude> h; // four amplitudes, row-major in (i, j)
};
StateVector biPhoton(GridPtr grid, RegistryPtr registry,
                     const BiPhotonSpec &spec);

/// C = [[0, 1], [-1, 0]] / sqrt(2): the polarization singlet coefficients.
Eigen::Matrix2cd singletCoefficients();

/// (g : (a'_{a1} b'_{b2} - a'_{a2} b'_{b1})^n) |0>, the n-pair entangled
/// state. g is either an arity-2 pair amplitude (applied as an n-fold
/// product) or a dense arity-2n amplitude with arguments ordered
/// (omega_1, tilde_omega_1, ..., omega_n, tilde_omega_n); the dense form
/// expands into 2^n terms. With normalize the result is scaled to unit
/// norm, otherwise the raw expansion is returned.
StateVector qkdPsiN(GridPtr grid, RegistryPtr registry, int a1, int a2,
                    int b1, int b2, const SpectralAmplitude &g, int n,
                    bool normalize = true);

/// sum_n c[n] qkdPsiN(..., n, normalized). Distinct n live in orthogonal
/// photon-number sectors, so unit norm needs sum |c[n]|^2 = 1.
StateVector qkdSuperposition(GridPtr grid, RegistryPtr registry, int a1,
                             int a2, int b1, int b2,
                             const SpectralAmplitude &g, const VecXc &c);

/// General four-mode state with j photons in a1, m - j in a2, k in b1,
/// n - k in b2, joint amplitude h over m + n arguments ordered a-side
/// first. Prefactor 1/sqrt(j! (m-j)! k! (n-k)!); h must have unit norm
/// after symmetrization within each same-mode argument group.
StateVector generalMultiMode(GridPtr grid, RegistryPtr registry, int a1,
                             int a2, int b1, int b2,
                             const SpectralAmplitude &h, int j, int m, int k,
                             int n);

} // namespace photonnet
