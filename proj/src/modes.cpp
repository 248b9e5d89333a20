#include "photonnet/modes.hpp"

#include <functional>

#include <Eigen/Eigenvalues>

namespace photonnet {

int ModeRegistry::add(Mode m) {
  if (m.id.empty())
    throw ValidationError("mode: empty id");
  if (m.polarization != 1 && m.polarization != 2)
    throw ValidationError("mode \"" + m.id + "\": polarization must be 1 or 2");
  if (m.fiber.empty())
    throw ValidationError("mode \"" + m.id + "\": empty fiber");
  if (by_id_.count(m.id))
    throw ValidationError("mode \"" + m.id + "\": duplicate id");
  for (const Mode &e : modes_)
    if (e.fiber == m.fiber && e.polarization == m.polarization &&
        e.direction == m.direction)
      throw ValidationError("mode \"" + m.id +
                            "\": duplicate (fiber, polarization, direction) "
                            "triple with mode \"" +
                            e.id + "\"");
  const int idx = static_cast<int>(modes_.size());
  by_id_.emplace(m.id, idx);
  modes_.push_back(std::move(m));
  return idx;
}

std::optional<int> ModeRegistry::find(const std::string &id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end())
    return std::nullopt;
  return it->second;
}

int ModeRegistry::require(const std::string &id) const {
  auto idx = find(id);
  if (!idx)
    throw ValidationError("unknown mode \"" + id + "\"");
  return *idx;
}

bool ModeRegistry::sameAs(const ModeRegistry &other) const {
  if (modes_.size() != other.modes_.size()) return false;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const Mode &a = modes_[i], &b = other.modes_[i];
    if (a.id != b.id || a.fiber != b.fiber || a.polarization != b.polarization ||
        a.direction != b.direction)
      return false;
  }
  return true;
}

json ModeRegistry::toJson() const {
  json arr = json::array();
  for (const Mode &m : modes_) {
    json j;
    j["id"] = m.id;
    j["fiber"] = m.fiber;
    j["polarization"] = m.polarization;
    j["direction"] = directionLabel(m.direction);
    arr.push_back(std::move(j));
  }
  return arr;
}

std::shared_ptr<const ModeRegistry> ModeRegistry::fromJson(const json &j,
                                                           const std::string &path) {
  if (!j.is_array())
    throw ValidationError(path + ": expected array of modes");
  auto reg = std::make_shared<ModeRegistry>();
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string mp = path + "[" + std::to_string(i) + "]";
    const json &mj = j[i];
    rejectUnknownKeys(mj, {"id", "fiber", "polarization", "direction"}, mp);
    Mode m;
    m.id = requireString(mj, "id", mp);
    m.fiber = requireString(mj, "fiber", mp);
    m.polarization = requireInt(mj, "polarization", mp);
    const std::string dir = requireString(mj, "direction", mp);
    if (dir == "+")
      m.direction = Direction::Plus;
    else if (dir == "-")
      m.direction = Direction::Minus;
    else
      throw ValidationError(mp + ".direction: must be \"+\" or \"-\"");
    try {
      reg->add(std::move(m));
    } catch (const ValidationError &e) {
      throw ValidationError(mp + ": " + e.what());
    }
  }
  return reg;
}

ModeOverlap ModeOverlap::identity(int n) {
  ModeOverlap o;
  o.kappa_ = MatXc::Identity(n, n);
  o.identity_ = true;
  o.block_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    o.block_[static_cast<std::size_t>(i)] = i;
  return o;
}

ModeOverlap ModeOverlap::fromMatrix(MatXc kappa) {
  const int n = static_cast<int>(kappa.rows());
  if (kappa.cols() != n)
    throw ValidationError("mode overlap: matrix must be square");
  if ((kappa - kappa.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw ValidationError("mode overlap: matrix must be Hermitian");
  for (int i = 0; i < n; ++i)
    if (std::abs(kappa(i, i) - Complex(1.0, 0.0)) > 1e-12)
      throw ValidationError("mode overlap: diagonal must be 1");
  Eigen::SelfAdjointEigenSolver<MatXc> es(kappa);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw ValidationError("mode overlap: matrix must be positive semidefinite");

  ModeOverlap o;
  o.kappa_ = std::move(kappa);
  o.identity_ = true;
  for (int i = 0; i < n && o.identity_; ++i)
    for (int j = 0; j < n && o.identity_; ++j)
      if (i != j && o.kappa_(i, j) != Complex(0.0, 0.0))
        o.identity_ = false;

  // Union-find over nonzero off-diagonal couplings.
  std::vector<int> parent(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    parent[static_cast<std::size_t>(i)] = i;
  std::function<int(int)> findRoot = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (o.kappa_(i, j) != Complex(0.0, 0.0))
        parent[static_cast<std::size_t>(findRoot(i))] = findRoot(j);
  o.block_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    o.block_[static_cast<std::size_t>(i)] = findRoot(i);
  return o;
}

}  // namespace photonnet
