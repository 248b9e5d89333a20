#pragma once
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "photonnet/json_io.hpp"
#include "photonnet/types.hpp"

namespace photonnet {

enum class Direction { Plus, Minus };

inline const char *directionLabel(Direction d) {
  return d == Direction::Plus ? "+" : "-";
}

/// Field mode of a fiber network: a fiber, a polarization index (1 or 2),
/// and a propagation direction along the fiber axis.
struct Mode {
  std::string id;
  std::string fiber;
  int polarization = 1;
  Direction direction = Direction::Plus;
};

/// Registered modes of one experiment; (fiber, polarization, direction)
/// triples and ids are both unique.
class ModeRegistry {
public:
  int add(Mode m);
  int size() const { return static_cast<int>(modes_.size()); }
  const Mode &mode(int idx) const { return modes_.at(static_cast<std::size_t>(idx)); }
  std::optional<int> find(const std::string &id) const;
  int require(const std::string &id) const;
  bool sameAs(const ModeRegistry &other) const;

  json toJson() const;
  static std::shared_ptr<const ModeRegistry> fromJson(const json &j,
                                                      const std::string &path);

private:
  std::vector<Mode> modes_;
  std::unordered_map<std::string, int> by_id_;
};

using RegistryPtr = std::shared_ptr<const ModeRegistry>;

/// Pairwise overlaps kappa_xy = [x(omega), y'(omega')] / delta(omega-omega')
/// of possibly non-orthogonal modes; Hermitian, unit diagonal, positive
/// semidefinite. Supported by inner products only; channels and detection
/// require orthogonal mode sets.
class ModeOverlap {
public:
  static ModeOverlap identity(int n);
  static ModeOverlap fromMatrix(MatXc kappa);

  int size() const { return static_cast<int>(kappa_.rows()); }
  Complex kappa(int bra_mode, int ket_mode) const { return kappa_(bra_mode, ket_mode); }
  bool isIdentity() const { return identity_; }

  /// Connected-component label per mode over nonzero off-diagonal overlaps.
  const std::vector<int> &blockIds() const { return block_; }

private:
  ModeOverlap() = default;
  MatXc kappa_;
  bool identity_ = true;
  std::vector<int> block_;
};

}  // namespace photonnet
