#pragma once
#include <algorithm>
#include <cstring>
#include <numeric>
#include <vector>

#include "photonnet/types.hpp"

namespace photonnet {

/// Matrix permanent by explicit enumeration over column permutations.
template <typename Scalar>
Scalar permanentEnumeration(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &m) {
  const int n = static_cast<int>(m.rows());
  if (n == 0)
    return Scalar(1);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Scalar total(0);
  do {
    Scalar p(1);
    for (int i = 0; i < n; ++i)
      p *= m(i, perm[i]);
    total += p;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

/// Ryser's formula with Gray-code subset updates, O(2^n n).
template <typename Scalar>
Scalar permanentRyser(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &m) {
  const int n = static_cast<int>(m.rows());
  if (n == 0)
    return Scalar(1);
  std::vector<Scalar> rowsum(static_cast<std::size_t>(n), Scalar(0));
  Scalar total(0);
  std::uint64_t prev = 0;
  const std::uint64_t count = std::uint64_t(1) << n;
  for (std::uint64_t k = 1; k < count; ++k) {
    const std::uint64_t gray = k ^ (k >> 1);
    const std::uint64_t changed = gray ^ prev;
    int j = 0;
    while (!((changed >> j) & 1))
      ++j;
    const bool added = (gray >> j) & 1;
    for (int i = 0; i < n; ++i)
      rowsum[static_cast<std::size_t>(i)] +=
          added ? m(i, j) : -m(i, j);
    prev = gray;
    Scalar p(1);
    for (int i = 0; i < n; ++i)
      p *= rowsum[static_cast<std::size_t>(i)];
    const int popcount = __builtin_popcountll(gray);
    if ((n - popcount) % 2 == 0)
      total += p;
    else
      total -= p;
  }
  return total;
}

namespace detail {
inline bool bitwiseEqualRows(const MatXc &m, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    if (std::memcmp(&m(a, j), &m(b, j), sizeof(Complex)) != 0)
      return false;
  return true;
}
inline bool bitwiseEqualCols(const MatXc &m, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (std::memcmp(&m(i, a), &m(i, b), sizeof(Complex)) != 0)
      return false;
  return true;
}
inline double factorialD(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k)
    f *= k;
  return f;
}
}  // namespace detail

/// Permanent with structure shortcuts. Matrices whose rows (or columns) are
/// all identical factor in closed form at any size; otherwise exact
/// enumeration is used up to `enum_max` rows and Ryser's method up to
/// `ryser_max`. Larger unstructured blocks are rejected.
inline Complex permanentStructured(const MatXc &m, int enum_max = 5,
                                   int ryser_max = 12) {
  const Eigen::Index n = m.rows();
  if (n != m.cols())
    throw ContractError("permanent: matrix must be square");
  if (n == 0)
    return Complex(1.0, 0.0);
  bool rows_uniform = true;
  for (Eigen::Index i = 1; i < n && rows_uniform; ++i)
    rows_uniform = detail::bitwiseEqualRows(m, 0, i);
  if (rows_uniform) {
    Complex p(1.0, 0.0);
    for (Eigen::Index j = 0; j < n; ++j)
      p *= m(0, j);
    return detail::factorialD(static_cast<int>(n)) * p;
  }
  bool cols_uniform = true;
  for (Eigen::Index j = 1; j < n && cols_uniform; ++j)
    cols_uniform = detail::bitwiseEqualCols(m, 0, j);
  if (cols_uniform) {
    Complex p(1.0, 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
      p *= m(i, 0);
    return detail::factorialD(static_cast<int>(n)) * p;
  }
  if (n <= enum_max)
    return permanentEnumeration<Complex>(m);
  if (n <= ryser_max)
    return permanentRyser<Complex>(m);
  throw ContractError("permanent: unstructured block of size " +
                      std::to_string(n) + " exceeds the cap of " +
                      std::to_string(ryser_max));
}

}  // namespace photonnet
