#include "photonnet/amplitude.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "photonnet/permanent.hpp"

namespace photonnet {

namespace {

void requireGrid(const GridPtr &g) {
  if (!g)
    throw ValidationError("amplitude: null grid");
}

std::int64_t checkedDenseSize(int bins, int arity) {
  const std::int64_t size = detail::denseSize(bins, arity);
  if (size > static_cast<std::int64_t>(SpectralAmplitude::denseCellCap()))
    throw ContractError("amplitude: dense payload of " + std::to_string(size) +
                        " cells exceeds the cap of " +
                        std::to_string(SpectralAmplitude::denseCellCap()));
  return size;
}

void canonicalizeProduct(ProductPayload &p) {
  for (auto &k : p.kernels) {
    if (k.argA > k.argB) {
      k.kernel = std::make_shared<const MatXc>(k.kernel->transpose());
      std::swap(k.argA, k.argB);
    }
  }
  std::sort(p.vectors.begin(), p.vectors.end(),
            [](const VectorFactor &a, const VectorFactor &b) { return a.arg < b.arg; });
  std::sort(p.kernels.begin(), p.kernels.end(),
            [](const KernelFactor &a, const KernelFactor &b) {
              return std::tie(a.argA, a.argB) < std::tie(b.argA, b.argB);
            });
}

void validateProduct(const ProductPayload &p, int arity, int bins) {
  std::vector<int> cover(static_cast<std::size_t>(arity), 0);
  auto touch = [&](int arg) {
    if (arg < 0 || arg >= arity)
      throw ValidationError("amplitude: factor argument out of range");
    cover[static_cast<std::size_t>(arg)]++;
  };
  for (const auto &v : p.vectors) {
    if (!v.values || v.values->size() != bins)
      throw ValidationError("amplitude: vector factor size must equal bins");
    touch(v.arg);
  }
  for (const auto &k : p.kernels) {
    if (!k.kernel || k.kernel->rows() != bins || k.kernel->cols() != bins)
      throw ValidationError("amplitude: kernel factor must be bins x bins");
    if (k.argA == k.argB)
      throw ValidationError("amplitude: kernel factor arguments must differ");
    touch(k.argA);
    touch(k.argB);
  }
  for (int a = 0; a < arity; ++a)
    if (cover[static_cast<std::size_t>(a)] != 1)
      throw ValidationError("amplitude: argument " + std::to_string(a) +
                            " must be covered by exactly one factor");
}

bool strictlyDiagonal(const MatXc &k) {
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j)
      if (i != j && k(i, j) != Complex(0.0, 0.0))
        return false;
  return true;
}

}  // namespace

SpectralAmplitude SpectralAmplitude::scalarOne(GridPtr grid) {
  requireGrid(grid);
  VecXc one(1);
  one(0) = Complex(1.0, 0.0);
  return dense(std::move(grid), 0, std::move(one));
}

SpectralAmplitude SpectralAmplitude::vector1(GridPtr grid, VecXc f, bool normalize) {
  requireGrid(grid);
  if (f.size() != grid->bins())
    throw ValidationError("amplitude: vector size must equal bins");
  SpectralAmplitude a(grid, 1, ProductPayload{});
  if (normalize) {
    double n2 = 0.0;
    for (int i = 0; i < grid->bins(); ++i)
      n2 += grid->weight(i) * std::norm(f(i));
    if (n2 <= 0.0)
      throw ValidationError("amplitude: cannot normalize a zero amplitude");
    f /= std::sqrt(n2);
    a.normalized_ = true;
  }
  ProductPayload p;
  p.vectors.push_back({0, std::make_shared<const VecXc>(std::move(f))});
  a.payload_ = std::move(p);
  return a;
}

SpectralAmplitude SpectralAmplitude::factored(GridPtr grid, std::vector<VecXc> factors) {
  requireGrid(grid);
  ProductPayload p;
  int arg = 0;
  for (auto &f : factors)
    p.vectors.push_back({arg++, std::make_shared<const VecXc>(std::move(f))});
  const int arity = arg;
  validateProduct(p, arity, grid->bins());
  return SpectralAmplitude(std::move(grid), arity, std::move(p));
}

SpectralAmplitude SpectralAmplitude::factoredPower(GridPtr grid, VecXc f, int n,
                                                   bool normalize_factor) {
  requireGrid(grid);
  if (n < 0)
    throw ValidationError("amplitude: negative power");
  if (normalize_factor) {
    double n2 = 0.0;
    for (int i = 0; i < grid->bins(); ++i)
      n2 += grid->weight(i) * std::norm(f(i));
    if (n2 <= 0.0)
      throw ValidationError("amplitude: cannot normalize a zero amplitude");
    f /= std::sqrt(n2);
  }
  if (n == 0)
    return scalarOne(std::move(grid));
  auto shared = std::make_shared<const VecXc>(std::move(f));
  ProductPayload p;
  for (int a = 0; a < n; ++a)
    p.vectors.push_back({a, shared});
  validateProduct(p, n, grid->bins());
  SpectralAmplitude amp(std::move(grid), n, std::move(p));
  amp.normalized_ = normalize_factor;
  return amp;
}

SpectralAmplitude SpectralAmplitude::pairKernel(GridPtr grid, MatXc k, bool normalize) {
  requireGrid(grid);
  if (k.rows() != grid->bins() || k.cols() != grid->bins())
    throw ValidationError("amplitude: kernel must be bins x bins");
  bool flagged = false;
  if (normalize) {
    if (grid->bins() >= 2 && strictlyDiagonal(k))
      throw ValidationError(
          "amplitude: refusing to normalize a strictly diagonal pair kernel; "
          "its norm depends on the grid spacing, not on physics");
    double n2 = 0.0;
    for (int i = 0; i < grid->bins(); ++i)
      for (int j = 0; j < grid->bins(); ++j)
        n2 += grid->weight(i) * grid->weight(j) * std::norm(k(i, j));
    if (n2 <= 0.0)
      throw ValidationError("amplitude: cannot normalize a zero kernel");
    k /= std::sqrt(n2);
    flagged = true;
  }
  ProductPayload p;
  p.kernels.push_back({0, 1, std::make_shared<const MatXc>(std::move(k))});
  SpectralAmplitude a(std::move(grid), 2, std::move(p));
  a.normalized_ = flagged;
  return a;
}

SpectralAmplitude SpectralAmplitude::pairKernelProduct(GridPtr grid,
                                                       std::vector<MatXc> kernels) {
  requireGrid(grid);
  ProductPayload p;
  int arg = 0;
  for (auto &k : kernels) {
    p.kernels.push_back({arg, arg + 1, std::make_shared<const MatXc>(std::move(k))});
    arg += 2;
  }
  validateProduct(p, arg, grid->bins());
  return SpectralAmplitude(std::move(grid), arg, std::move(p));
}

SpectralAmplitude SpectralAmplitude::product(GridPtr grid, int arity, ProductPayload p) {
  requireGrid(grid);
  validateProduct(p, arity, grid->bins());
  canonicalizeProduct(p);
  return SpectralAmplitude(std::move(grid), arity, std::move(p));
}

SpectralAmplitude SpectralAmplitude::dense(GridPtr grid, int arity, VecXc data) {
  requireGrid(grid);
  if (arity < 0)
    throw ValidationError("amplitude: negative arity");
  const std::int64_t size = checkedDenseSize(grid->bins(), arity);
  if (data.size() != size)
    throw ValidationError("amplitude: dense payload must hold bins^arity entries");
  return SpectralAmplitude(std::move(grid), arity, DensePayload{std::move(data)});
}

bool SpectralAmplitude::allVectorFactors() const {
  if (!isProduct())
    return false;
  return productPayload().kernels.empty();
}

double SpectralAmplitude::l2NormSquared() const {
  const auto &g = *grid_;
  if (isDense()) {
    const VecXc &d = densePayload().data;
    if (arity_ == 0)
      return std::norm(d(0));
    std::vector<int> idx(static_cast<std::size_t>(arity_), 0);
    double total = 0.0;
    std::int64_t flat = 0;
    do {
      double w = 1.0;
      for (int a = 0; a < arity_; ++a)
        w *= g.weight(idx[static_cast<std::size_t>(a)]);
      total += w * std::norm(d(flat));
      ++flat;
    } while (detail::nextIndex(idx, g.bins()));
    return total;
  }
  const auto &p = productPayload();
  double total = 1.0;
  for (const auto &v : p.vectors) {
    double s = 0.0;
    for (int i = 0; i < g.bins(); ++i)
      s += g.weight(i) * std::norm((*v.values)(i));
    total *= s;
  }
  for (const auto &k : p.kernels) {
    double s = 0.0;
    for (int i = 0; i < g.bins(); ++i)
      for (int j = 0; j < g.bins(); ++j)
        s += g.weight(i) * g.weight(j) * std::norm((*k.kernel)(i, j));
    total *= s;
  }
  return total;
}

Complex SpectralAmplitude::evalAt(std::span<const int> idx) const {
  if (static_cast<int>(idx.size()) != arity_)
    throw ContractError("amplitude: index arity mismatch");
  if (isDense()) {
    std::int64_t flat = 0;
    for (int a = 0; a < arity_; ++a)
      flat = flat * grid_->bins() + idx[static_cast<std::size_t>(a)];
    return densePayload().data(flat);
  }
  const auto &p = productPayload();
  Complex v(1.0, 0.0);
  for (const auto &f : p.vectors)
    v *= (*f.values)(idx[static_cast<std::size_t>(f.arg)]);
  for (const auto &k : p.kernels)
    v *= (*k.kernel)(idx[static_cast<std::size_t>(k.argA)],
                     idx[static_cast<std::size_t>(k.argB)]);
  return v;
}

SpectralAmplitude SpectralAmplitude::densified() const {
  if (isDense())
    return *this;
  const std::int64_t size = checkedDenseSize(grid_->bins(), arity_);
  VecXc data(size);
  if (arity_ == 0) {
    data(0) = evalAt({});
    return dense(grid_, 0, std::move(data));
  }
  std::vector<int> idx(static_cast<std::size_t>(arity_), 0);
  std::int64_t flat = 0;
  do {
    data(flat++) = evalAt(idx);
  } while (detail::nextIndex(idx, grid_->bins()));
  return dense(grid_, arity_, std::move(data));
}

SpectralAmplitude SpectralAmplitude::relabeledArgs(const std::vector<int> &old_to_new) const {
  if (static_cast<int>(old_to_new.size()) != arity_)
    throw ContractError("amplitude: relabel map arity mismatch");
  if (isProduct()) {
    ProductPayload p = productPayload();
    for (auto &v : p.vectors)
      v.arg = old_to_new[static_cast<std::size_t>(v.arg)];
    for (auto &k : p.kernels) {
      k.argA = old_to_new[static_cast<std::size_t>(k.argA)];
      k.argB = old_to_new[static_cast<std::size_t>(k.argB)];
    }
    canonicalizeProduct(p);
    SpectralAmplitude out(grid_, arity_, std::move(p));
    out.normalized_ = normalized_;
    return out;
  }
  const VecXc &src = densePayload().data;
  VecXc dst(src.size());
  if (arity_ == 0) {
    dst = src;
  } else {
    const int bins = grid_->bins();
    std::vector<int> idx(static_cast<std::size_t>(arity_), 0);
    std::vector<int> nidx(static_cast<std::size_t>(arity_), 0);
    std::int64_t flat = 0;
    do {
      for (int a = 0; a < arity_; ++a)
        nidx[static_cast<std::size_t>(old_to_new[static_cast<std::size_t>(a)])] =
            idx[static_cast<std::size_t>(a)];
      std::int64_t nflat = 0;
      for (int a = 0; a < arity_; ++a)
        nflat = nflat * bins + nidx[static_cast<std::size_t>(a)];
      dst(nflat) = src(flat);
      ++flat;
    } while (detail::nextIndex(idx, bins));
  }
  SpectralAmplitude out(grid_, arity_, DensePayload{std::move(dst)});
  out.normalized_ = normalized_;
  return out;
}

SpectralAmplitude SpectralAmplitude::argScaled(int arg, const VecXc &diag) const {
  if (arg < 0 || arg >= arity_)
    throw ContractError("amplitude: argScaled argument out of range");
  if (diag.size() != grid_->bins())
    throw ContractError("amplitude: argScaled diagonal size mismatch");
  if (isProduct()) {
    ProductPayload p = productPayload();
    for (auto &v : p.vectors)
      if (v.arg == arg) {
        v.values = std::make_shared<const VecXc>(diag.cwiseProduct(*v.values));
        return SpectralAmplitude(grid_, arity_, std::move(p));
      }
    for (auto &k : p.kernels) {
      if (k.argA == arg) {
        k.kernel = std::make_shared<const MatXc>(diag.asDiagonal() * (*k.kernel));
        return SpectralAmplitude(grid_, arity_, std::move(p));
      }
      if (k.argB == arg) {
        k.kernel = std::make_shared<const MatXc>((*k.kernel) * diag.asDiagonal());
        return SpectralAmplitude(grid_, arity_, std::move(p));
      }
    }
    throw ContractError("amplitude: argScaled found no covering factor");
  }
  VecXc data = densePayload().data;
  const int bins = grid_->bins();
  std::vector<int> idx(static_cast<std::size_t>(arity_), 0);
  std::int64_t flat = 0;
  do {
    data(flat) *= diag(idx[static_cast<std::size_t>(arg)]);
    ++flat;
  } while (detail::nextIndex(idx, bins));
  return SpectralAmplitude(grid_, arity_, DensePayload{std::move(data)});
}

SpectralAmplitude SpectralAmplitude::argTransformed(int arg, const MatXc &kw) const {
  if (arg < 0 || arg >= arity_)
    throw ContractError("amplitude: argTransformed argument out of range");
  const int bins = grid_->bins();
  if (kw.rows() != bins || kw.cols() != bins)
    throw ContractError("amplitude: argTransformed kernel size mismatch");
  if (isProduct()) {
    ProductPayload p = productPayload();
    for (auto &v : p.vectors)
      if (v.arg == arg) {
        v.values = std::make_shared<const VecXc>(kw * (*v.values));
        return SpectralAmplitude(grid_, arity_, std::move(p));
      }
    for (auto &k : p.kernels) {
      if (k.argA == arg) {
        k.kernel = std::make_shared<const MatXc>(kw * (*k.kernel));
        return SpectralAmplitude(grid_, arity_, std::move(p));
      }
      if (k.argB == arg) {
        k.kernel = std::make_shared<const MatXc>((*k.kernel) * kw.transpose());
        return SpectralAmplitude(grid_, arity_, std::move(p));
      }
    }
    throw ContractError("amplitude: argTransformed found no covering factor");
  }
  const VecXc &src = densePayload().data;
  VecXc dst = VecXc::Zero(src.size());
  // Strides: arg varies with step bins^(arity-1-arg).
  std::int64_t stride = 1;
  for (int a = arity_ - 1; a > arg; --a)
    stride *= bins;
  const std::int64_t block = stride * bins;
  for (std::int64_t base = 0; base < src.size(); base += block) {
    for (std::int64_t off = 0; off < stride; ++off) {
      for (int i = 0; i < bins; ++i) {
        Complex acc(0.0, 0.0);
        for (int j = 0; j < bins; ++j)
          acc += kw(i, j) * src(base + j * stride + off);
        dst(base + i * stride + off) = acc;
      }
    }
  }
  return SpectralAmplitude(grid_, arity_, DensePayload{std::move(dst)});
}

SpectralAmplitude SpectralAmplitude::scaled(Complex factor) const {
  if (isDense()) {
    VecXc data = densePayload().data * factor;
    return SpectralAmplitude(grid_, arity_, DensePayload{std::move(data)});
  }
  ProductPayload p = productPayload();
  if (!p.vectors.empty()) {
    p.vectors[0].values = std::make_shared<const VecXc>(factor * (*p.vectors[0].values));
  } else if (!p.kernels.empty()) {
    p.kernels[0].kernel = std::make_shared<const MatXc>(factor * (*p.kernels[0].kernel));
  } else {
    throw ContractError("amplitude: cannot scale an empty product");
  }
  return SpectralAmplitude(grid_, arity_, std::move(p));
}

namespace {
bool bitwiseEqual(const VecXc &a, const VecXc &b) {
  return a.size() == b.size() &&
         (a.size() == 0 ||
          std::memcmp(a.data(), b.data(), sizeof(Complex) * a.size()) == 0);
}
bool bitwiseEqual(const MatXc &a, const MatXc &b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 ||
          std::memcmp(a.data(), b.data(), sizeof(Complex) * a.size()) == 0);
}
}  // namespace

bool SpectralAmplitude::structurallyEqual(const SpectralAmplitude &other) const {
  if (arity_ != other.arity_ || !grid_->sameAs(*other.grid_))
    return false;
  if (isDense() != other.isDense())
    return false;
  if (isDense())
    return bitwiseEqual(densePayload().data, other.densePayload().data);
  const auto &a = productPayload();
  const auto &b = other.productPayload();
  if (a.vectors.size() != b.vectors.size() || a.kernels.size() != b.kernels.size())
    return false;
  for (std::size_t i = 0; i < a.vectors.size(); ++i) {
    if (a.vectors[i].arg != b.vectors[i].arg)
      return false;
    if (a.vectors[i].values != b.vectors[i].values &&
        !bitwiseEqual(*a.vectors[i].values, *b.vectors[i].values))
      return false;
  }
  for (std::size_t i = 0; i < a.kernels.size(); ++i) {
    if (a.kernels[i].argA != b.kernels[i].argA || a.kernels[i].argB != b.kernels[i].argB)
      return false;
    if (a.kernels[i].kernel != b.kernels[i].kernel &&
        !bitwiseEqual(*a.kernels[i].kernel, *b.kernels[i].kernel))
      return false;
  }
  return true;
}

bool SpectralAmplitude::argsExchangeable(const std::vector<int> &args) const {
  if (args.size() < 2)
    return true;
  if (isDense())
    return false;
  const auto &p = productPayload();
  for (const auto &k : p.kernels)
    for (int a : args)
      if (k.argA == a || k.argB == a)
        return false;
  const VecXc *reference = nullptr;
  for (int a : args) {
    const VecXc *found = nullptr;
    for (const auto &v : p.vectors)
      if (v.arg == a) {
        found = v.values.get();
        break;
      }
    if (!found)
      return false;
    if (reference && found != reference && !bitwiseEqual(*reference, *found))
      return false;
    if (!reference)
      reference = found;
  }
  return true;
}

json SpectralAmplitude::toJson() const {
  json j;
  j["arity"] = arity_;
  json payload;
  if (isDense()) {
    payload["kind"] = "dense";
    payload["data"] = vectorToJson(densePayload().data);
  } else {
    const auto &p = productPayload();
    const bool plain_factored =
        p.kernels.empty() && static_cast<int>(p.vectors.size()) == arity_;
    const bool plain_pair =
        arity_ == 2 && p.vectors.empty() && p.kernels.size() == 1;
    if (plain_factored) {
      payload["kind"] = "factored";
      json data = json::array();
      for (const auto &v : p.vectors)
        data.push_back(vectorToJson(*v.values));
      payload["data"] = std::move(data);
    } else if (plain_pair) {
      payload["kind"] = "pair_kernel";
      payload["data"] = matrixToJson(*p.kernels[0].kernel);
    } else {
      payload["kind"] = "product";
      json vecs = json::array();
      for (const auto &v : p.vectors) {
        json f;
        f["arg"] = v.arg;
        f["values"] = vectorToJson(*v.values);
        vecs.push_back(std::move(f));
      }
      json kers = json::array();
      for (const auto &k : p.kernels) {
        json f;
        f["arg_a"] = k.argA;
        f["arg_b"] = k.argB;
        f["kernel"] = matrixToJson(*k.kernel);
        kers.push_back(std::move(f));
      }
      payload["vectors"] = std::move(vecs);
      payload["kernels"] = std::move(kers);
    }
  }
  j["payload"] = std::move(payload);
  if (normalized_)
    j["normalized"] = true;
  return j;
}

SpectralAmplitude SpectralAmplitude::fromJson(const json &j, GridPtr grid,
                                              const std::string &path) {
  rejectUnknownKeys(j, {"arity", "payload", "normalized"}, path);
  const int arity = requireInt(j, "arity", path);
  const json &payload = requireKey(j, "payload", path);
  const std::string kind = requireString(payload, "kind", path + ".payload");
  SpectralAmplitude out = [&]() -> SpectralAmplitude {
    if (kind == "dense") {
      rejectUnknownKeys(payload, {"kind", "data"}, path + ".payload");
      VecXc data = vectorFromJson(requireKey(payload, "data", path + ".payload"),
                                  path + ".payload.data");
      return dense(grid, arity, std::move(data));
    }
    if (kind == "factored") {
      rejectUnknownKeys(payload, {"kind", "data"}, path + ".payload");
      const json &data = requireKey(payload, "data", path + ".payload");
      if (!data.is_array() || static_cast<int>(data.size()) != arity)
        throw ValidationError(path + ".payload.data: expected one factor per argument");
      std::vector<VecXc> factors;
      for (std::size_t i = 0; i < data.size(); ++i)
        factors.push_back(vectorFromJson(data[i], path + ".payload.data[" +
                                                      std::to_string(i) + "]"));
      return factored(grid, std::move(factors));
    }
    if (kind == "pair_kernel") {
      rejectUnknownKeys(payload, {"kind", "data"}, path + ".payload");
      if (arity != 2)
        throw ValidationError(path + ": pair_kernel payload requires arity 2");
      MatXc k = matrixFromJson(requireKey(payload, "data", path + ".payload"),
                               path + ".payload.data");
      return pairKernel(grid, std::move(k));
    }
    if (kind == "product") {
      rejectUnknownKeys(payload, {"kind", "vectors", "kernels"}, path + ".payload");
      ProductPayload p;
      if (payload.contains("vectors")) {
        const json &vecs = payload["vectors"];
        for (std::size_t i = 0; i < vecs.size(); ++i) {
          const std::string vp = path + ".payload.vectors[" + std::to_string(i) + "]";
          rejectUnknownKeys(vecs[i], {"arg", "values"}, vp);
          VectorFactor f;
          f.arg = requireInt(vecs[i], "arg", vp);
          f.values = std::make_shared<const VecXc>(
              vectorFromJson(requireKey(vecs[i], "values", vp), vp + ".values"));
          p.vectors.push_back(std::move(f));
        }
      }
      if (payload.contains("kernels")) {
        const json &kers = payload["kernels"];
        for (std::size_t i = 0; i < kers.size(); ++i) {
          const std::string kp = path + ".payload.kernels[" + std::to_string(i) + "]";
          rejectUnknownKeys(kers[i], {"arg_a", "arg_b", "kernel"}, kp);
          KernelFactor f;
          f.argA = requireInt(kers[i], "arg_a", kp);
          f.argB = requireInt(kers[i], "arg_b", kp);
          f.kernel = std::make_shared<const MatXc>(
              matrixFromJson(requireKey(kers[i], "kernel", kp), kp + ".kernel"));
          p.kernels.push_back(std::move(f));
        }
      }
      return product(grid, arity, std::move(p));
    }
    throw ValidationError(path + ".payload.kind: unknown kind \"" + kind + "\"");
  }();
  if (j.contains("normalized") && j["normalized"].is_boolean() &&
      j["normalized"].get<bool>())
    out.normalized_ = true;
  return out;
}

SpectralAmplitude symmetrize(const SpectralAmplitude &h,
                             const std::vector<std::vector<int>> &groups) {
  const int n = h.arity();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  double perm_count = 1.0;
  for (const auto &g : groups) {
    for (int a : g) {
      if (a < 0 || a >= n)
        throw ValidationError("symmetrize: group index out of range");
      if (seen[static_cast<std::size_t>(a)])
        throw ValidationError("symmetrize: groups must be disjoint");
      seen[static_cast<std::size_t>(a)] = true;
    }
    double f = 1.0;
    for (std::size_t k = 2; k <= g.size(); ++k)
      f *= static_cast<double>(k);
    perm_count *= f;
  }
  SpectralAmplitude d = h.densified();
  if (perm_count * static_cast<double>(d.densePayload().data.size()) > 2e8)
    throw ContractError("symmetrize: permutation sweep too large");

  // Enumerate composite permutations group by group.
  std::vector<std::vector<std::vector<int>>> group_perms;
  for (const auto &g : groups) {
    std::vector<int> p(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      p[i] = static_cast<int>(i);
    std::vector<std::vector<int>> perms;
    std::sort(p.begin(), p.end());
    do {
      perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    group_perms.push_back(std::move(perms));
  }

  const VecXc &src = d.densePayload().data;
  VecXc dst = VecXc::Zero(src.size());
  std::vector<std::size_t> pick(groups.size(), 0);
  std::vector<int> arg_map(static_cast<std::size_t>(n));
  const int bins = h.grid()->bins();
  long total_perms = 0;
  while (true) {
    for (int a = 0; a < n; ++a)
      arg_map[static_cast<std::size_t>(a)] = a;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      const auto &g = groups[gi];
      const auto &p = group_perms[gi][pick[gi]];
      for (std::size_t k = 0; k < g.size(); ++k)
        arg_map[static_cast<std::size_t>(g[k])] = g[p[k]];
    }
    // dst(idx) += src(idx composed with arg_map)
    if (n == 0) {
      dst(0) += src(0);
    } else {
      std::vector<int> idx(static_cast<std::size_t>(n), 0);
      std::int64_t flat = 0;
      do {
        std::int64_t sflat = 0;
        for (int a = 0; a < n; ++a)
          sflat = sflat * bins + idx[static_cast<std::size_t>(
                                     arg_map[static_cast<std::size_t>(a)])];
        dst(flat) += src(sflat);
        ++flat;
      } while (detail::nextIndex(idx, bins));
    }
    ++total_perms;
    // advance pick
    std::size_t gi = 0;
    for (; gi < groups.size(); ++gi) {
      if (++pick[gi] < group_perms[gi].size())
        break;
      pick[gi] = 0;
    }
    if (gi == groups.size())
      break;
  }
  dst /= static_cast<double>(total_perms);
  return SpectralAmplitude::dense(h.grid(), n, std::move(dst));
}

double symmetrizedNormSquared(const SpectralAmplitude &h,
                              const std::vector<std::vector<int>> &groups) {
  if (h.isProduct() && h.allVectorFactors()) {
    // integral of conj(h) S h = prod over groups of perm(G)/k! times the
    // self-inners of ungrouped arguments, with G the pairwise factor Gram.
    const auto &p = h.productPayload();
    const auto &g = *h.grid();
    std::vector<const VecXc *> by_arg(static_cast<std::size_t>(h.arity()), nullptr);
    for (const auto &v : p.vectors)
      by_arg[static_cast<std::size_t>(v.arg)] = v.values.get();
    auto inner1 = [&](const VecXc &a, const VecXc &b) {
      Complex s(0.0, 0.0);
      for (int i = 0; i < g.bins(); ++i)
        s += g.weight(i) * std::conj(a(i)) * b(i);
      return s;
    };
    std::vector<bool> grouped(static_cast<std::size_t>(h.arity()), false);
    double total = 1.0;
    Complex ctotal(1.0, 0.0);
    for (const auto &grp : groups) {
      const int k = static_cast<int>(grp.size());
      MatXc gram(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          gram(i, j) = inner1(*by_arg[static_cast<std::size_t>(grp[static_cast<std::size_t>(i)])],
                              *by_arg[static_cast<std::size_t>(grp[static_cast<std::size_t>(j)])]);
      double kfact = 1.0;
      for (int t = 2; t <= k; ++t)
        kfact *= t;
      ctotal *= permanentStructured(gram) / kfact;
      for (int i : grp)
        grouped[static_cast<std::size_t>(i)] = true;
    }
    for (int a = 0; a < h.arity(); ++a)
      if (!grouped[static_cast<std::size_t>(a)])
        ctotal *= inner1(*by_arg[static_cast<std::size_t>(a)],
                         *by_arg[static_cast<std::size_t>(a)]);
    total = ctotal.real();
    return total;
  }
  SpectralAmplitude s = symmetrize(h, groups);
  return s.l2NormSquared();
}

double meanFrequency(const SpectralAmplitude &h) {
  const int n = h.arity();
  if (n == 0)
    throw ValidationError("meanFrequency: undefined for arity 0");
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a)
    all[static_cast<std::size_t>(a)] = a;
  SpectralAmplitude s = n == 1 ? h.densified() : symmetrize(h, {all});
  const double norm2 = s.l2NormSquared();
  if (std::abs(norm2 - 1.0) > 1e-6)
    throw ContractError("meanFrequency: amplitude is not normalized "
                        "(symmetrized norm^2 = " +
                        std::to_string(norm2) + ")");
  const auto &g = *h.grid();
  const VecXc &d = s.densePayload().data;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  double total = 0.0;
  std::int64_t flat = 0;
  do {
    double w = 1.0;
    for (int a = 0; a < n; ++a)
      w *= g.weight(idx[static_cast<std::size_t>(a)]);
    total += g.frequency(idx[0]) * w * std::norm(d(flat));
    ++flat;
  } while (detail::nextIndex(idx, g.bins()));
  return total;
}

Complex inner(const SpectralAmplitude &g, const SpectralAmplitude &f) {
  if (g.arity() != f.arity())
    throw ValidationError("inner: arity mismatch");
  if (!g.grid()->sameAs(*f.grid()))
    throw ValidationError("inner: grid mismatch");
  const int n = g.arity();
  if (n == 0)
    return std::conj(g.evalAt({})) * f.evalAt({});
  if (g.isProduct() && f.isProduct())
    return detail::contractProductsIdentity(g.productPayload(), f.productPayload(),
                                            n, *g.grid());
  const auto &grid = *g.grid();
  if (static_cast<double>(detail::denseSize(grid.bins(), n)) >
      static_cast<double>(SpectralAmplitude::denseCellCap()))
    throw ContractError("inner: dense contraction exceeds the cell cap");
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Complex total(0.0, 0.0);
  do {
    double w = 1.0;
    for (int a = 0; a < n; ++a)
      w *= grid.weight(idx[static_cast<std::size_t>(a)]);
    total += w * std::conj(g.evalAt(idx)) * f.evalAt(idx);
  } while (detail::nextIndex(idx, grid.bins()));
  return total;
}

}  // namespace photonnet
