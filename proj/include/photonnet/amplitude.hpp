#pragma once
#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "photonnet/grid.hpp"
#include "photonnet/json_io.hpp"
#include "photonnet/types.hpp"

namespace photonnet {

/// Single-argument factor f(omega_arg) of a product-form amplitude.
struct VectorFactor {
  int arg = 0;
  std::shared_ptr<const VecXc> values;
};

/// Two-argument factor K(omega_a, omega_b) of a product-form amplitude.
struct KernelFactor {
  int argA = 0;
  int argB = 0;
  std::shared_ptr<const MatXc> kernel;
};

/// Product of single-argument and two-argument factors; every argument of the
/// amplitude is covered by exactly one factor.
struct ProductPayload {
  std::vector<VectorFactor> vectors;
  std::vector<KernelFactor> kernels;
};

/// Fully tabulated amplitude, B^arity entries, argument 0 slowest.
struct DensePayload {
  VecXc data;
};

/// Joint spectral amplitude h(omega_1, ..., omega_n) on a frequency grid.
///
/// Stored unsymmetrized; the contraction engine performs the bosonic
/// symmetrization implicitly, so no payload ever holds n! copies.
class SpectralAmplitude {
public:
  /// Arity-0 amplitude with value 1 (vacuum terms, scalar coefficients).
  static SpectralAmplitude scalarOne(GridPtr grid);

  /// Arity-1 amplitude f(omega). With normalize, rescales to sum w |f|^2 = 1.
  static SpectralAmplitude vector1(GridPtr grid, VecXc f, bool normalize = false);

  /// Product of arity-1 factors, one per argument.
  static SpectralAmplitude factored(GridPtr grid, std::vector<VecXc> factors);

  /// Same factor repeated n times (shares storage across arguments).
  static SpectralAmplitude factoredPower(GridPtr grid, VecXc f, int n,
                                         bool normalize_factor = false);

  /// Arity-2 kernel K(omega_1, omega_2). With normalize, rescales to
  /// sum w w |K|^2 = 1; strictly diagonal kernels on multi-bin grids are
  /// rejected then, since their norm depends on the grid spacing.
  static SpectralAmplitude pairKernel(GridPtr grid, MatXc k, bool normalize = false);

  /// Product of arity-2 kernels; kernel j couples arguments (2j, 2j+1).
  static SpectralAmplitude pairKernelProduct(GridPtr grid, std::vector<MatXc> kernels);

  /// General product payload. Used internally; factor coverage is validated.
  static SpectralAmplitude product(GridPtr grid, int arity, ProductPayload p);

  /// Dense payload; data.size() must equal bins^arity and stay within cap.
  static SpectralAmplitude dense(GridPtr grid, int arity, VecXc data);

  static std::size_t denseCellCap() { return 1000000; }

  int arity() const { return arity_; }
  const GridPtr &grid() const { return grid_; }
  bool isDense() const { return std::holds_alternative<DensePayload>(payload_); }
  bool isProduct() const { return std::holds_alternative<ProductPayload>(payload_); }
  const DensePayload &densePayload() const { return std::get<DensePayload>(payload_); }
  const ProductPayload &productPayload() const { return std::get<ProductPayload>(payload_); }
  bool allVectorFactors() const;
  bool normalizedFlag() const { return normalized_; }

  /// Plain L2 norm: sum over the grid of prod(w) |h|^2, no symmetrization.
  double l2NormSquared() const;

  /// Value at a grid multi-index (size = arity).
  Complex evalAt(std::span<const int> idx) const;

  /// Dense copy; throws ContractError when bins^arity exceeds the cap.
  SpectralAmplitude densified() const;

  /// Argument relabeling: result(x_{map[0]}, ..., x_{map[n-1]}) = this(x_0, ...).
  /// map[old] = new must be a permutation of 0..n-1.
  SpectralAmplitude relabeledArgs(const std::vector<int> &old_to_new) const;

  /// Multiplies the amplitude by diag(omega -> d(omega)) along one argument.
  SpectralAmplitude argScaled(int arg, const VecXc &diag) const;

  /// Applies a linear map along one argument:
  ///   h'(.., omega, ..) = sum_{omega'} KW(omega, omega') h(.., omega', ..)
  /// where KW already includes the quadrature weight of omega'.
  SpectralAmplitude argTransformed(int arg, const MatXc &kw) const;

  SpectralAmplitude scaled(Complex factor) const;

  /// Structural equality for term merging: identical payload shape and
  /// bitwise-identical numeric data.
  bool structurallyEqual(const SpectralAmplitude &other) const;

  /// True when the payload is provably invariant under permutations of the
  /// listed arguments: each must carry a vector factor with identical
  /// values and no kernel may touch them. Dense payloads report false.
  bool argsExchangeable(const std::vector<int> &args) const;

  json toJson() const;
  static SpectralAmplitude fromJson(const json &j, GridPtr grid,
                                    const std::string &path);

private:
  SpectralAmplitude(GridPtr grid, int arity,
                    std::variant<DensePayload, ProductPayload> payload)
      : grid_(std::move(grid)), arity_(arity), payload_(std::move(payload)) {}

  GridPtr grid_;
  int arity_ = 0;
  std::variant<DensePayload, ProductPayload> payload_;
  bool normalized_ = false;
};

/// Grid inner product (g, f) = sum prod(w) conj(g) f over all arguments.
Complex inner(const SpectralAmplitude &g, const SpectralAmplitude &f);

/// Averages over argument permutations within each group (dense output).
SpectralAmplitude symmetrize(const SpectralAmplitude &h,
                             const std::vector<std::vector<int>> &groups);

/// Norm of the group-symmetrized amplitude: integral of |S h|^2.
double symmetrizedNormSquared(const SpectralAmplitude &h,
                              const std::vector<std::vector<int>> &groups);

/// Mean frequency of the fully symmetrized amplitude; requires the
/// symmetrized norm to be 1.
double meanFrequency(const SpectralAmplitude &h);

namespace detail {
/// Flat index helpers for dense payloads (argument 0 slowest).
inline std::int64_t denseSize(int bins, int arity) {
  std::int64_t s = 1;
  for (int i = 0; i < arity; ++i)
    s *= bins;
  return s;
}
/// Iterates multindices in flat order; idx must start at all zeros.
inline bool nextIndex(std::vector<int> &idx, int bins) {
  for (int k = static_cast<int>(idx.size()) - 1; k >= 0; --k) {
    if (++idx[k] < bins)
      return true;
    idx[k] = 0;
  }
  return false;
}

/// Identity-paired contraction of two product payloads (implemented with the
/// chain/cycle network evaluator of the contraction engine).
Complex contractProductsIdentity(const ProductPayload &bra, const ProductPayload &ket,
                                 int arity, const FrequencyGrid &grid);
}  // namespace detail

}  // namespace photonnet
