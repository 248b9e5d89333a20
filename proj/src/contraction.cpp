#include "photonnet/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <numeric>

#include "photonnet/permanent.hpp"

namespace photonnet {
namespace {

Complex inner1(const VecXc &a, const VecXc &b, const VecXd &w) {
  Complex s(0.0, 0.0);
  for (Eigen::Index i = 0; i < w.size(); ++i)
    s += w(i) * std::conj(a(i)) * b(i);
  return s;
}

/// Which factor of a product payload covers a given argument.
struct FactorRef {
  bool is_vector = false;
  int index = -1;
  bool at_arg_a = false;
};

struct ProductIndex {
  const ProductPayload *payload = nullptr;
  std::vector<FactorRef> by_arg;
};

ProductIndex indexProduct(const ProductPayload &payload, int arity) {
  ProductIndex pi;
  pi.payload = &payload;
  pi.by_arg.assign(static_cast<std::size_t>(arity), FactorRef{});
  for (std::size_t i = 0; i < pi.payload->vectors.size(); ++i)
    pi.by_arg[static_cast<std::size_t>(pi.payload->vectors[i].arg)] =
        FactorRef{true, static_cast<int>(i), false};
  for (std::size_t i = 0; i < pi.payload->kernels.size(); ++i) {
    const KernelFactor &k = pi.payload->kernels[i];
    pi.by_arg[static_cast<std::size_t>(k.argA)] =
        FactorRef{false, static_cast<int>(i), true};
    pi.by_arg[static_cast<std::size_t>(k.argB)] =
        FactorRef{false, static_cast<int>(i), false};
  }
  return pi;
}

/// One traversal element of a chain or cycle component. Bra-side factors
/// enter conjugated; from_a records the argument the walk arrives through.
struct Step {
  bool is_kernel = false;
  bool bra_side = false;
  bool from_a = false;
  const VecXc *vec = nullptr;
  const MatXc *ker = nullptr;
};

void appendStepKey(std::string &key, const Step &s) {
  const void *p = s.is_kernel ? static_cast<const void *>(s.ker)
                              : static_cast<const void *>(s.vec);
  auto u = reinterpret_cast<std::uintptr_t>(p);
  char buf[sizeof(u) + 1];
  std::memcpy(buf, &u, sizeof(u));
  buf[sizeof(u)] = static_cast<char>((s.is_kernel ? 4 : 0) |
                                     (s.bra_side ? 1 : 0) | (s.from_a ? 2 : 0));
  key.append(buf, sizeof(buf));
}

/// A chain reads the same from either end once kernel orientations flip.
std::string chainKey(const std::vector<Step> &steps) {
  std::string fwd;
  for (const Step &s : steps) appendStepKey(fwd, s);
  std::string rev;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    Step r = *it;
    if (r.is_kernel) r.from_a = !r.from_a;
    appendStepKey(rev, r);
  }
  return std::min(fwd, rev);
}

/// Cycles are invariant under rotation and reversal; key on the least
/// traversal so equivalent components share a cache slot.
std::string cycleKey(const std::vector<Step> &steps) {
  const std::size_t n = steps.size();
  std::string best;
  for (int dir = 0; dir < 2; ++dir) {
    for (std::size_t rot = 0; rot < n; ++rot) {
      std::string key;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = dir == 0 ? (rot + i) % n : (rot + n - i) % n;
        Step s = steps[j];
        if (dir == 1) s.from_a = !s.from_a;
        appendStepKey(key, s);
      }
      if (best.empty() || key < best) best = std::move(key);
    }
  }
  return best;
}

/// Matrix mapping the arrival-side frequency to the far-side frequency.
MatXc orientedKernel(const Step &s) {
  const MatXc &k = *s.ker;
  if (s.from_a) return s.bra_side ? MatXc(k.conjugate()) : k;
  return s.bra_side ? MatXc(k.adjoint()) : MatXc(k.transpose());
}

Complex evalChain(const std::vector<Step> &steps, const VecXd &w,
                  const VecXc &wc) {
  const Step &s0 = steps.front();
  VecXc acc = s0.bra_side ? VecXc(s0.vec->conjugate()) : *s0.vec;
  for (std::size_t i = 1; i + 1 < steps.size(); ++i) {
    VecXc t = acc.cwiseProduct(wc);
    acc = orientedKernel(steps[i]).transpose() * t;
  }
  const Step &se = steps.back();
  VecXc end = se.bra_side ? VecXc(se.vec->conjugate()) : *se.vec;
  Complex s(0.0, 0.0);
  for (Eigen::Index i = 0; i < w.size(); ++i) s += acc(i) * w(i) * end(i);
  return s;
}

Complex evalCycle(const std::vector<Step> &steps, const VecXc &wc) {
  MatXc acc = MatXc(wc.asDiagonal()) * orientedKernel(steps[0]);
  for (std::size_t i = 1; i < steps.size(); ++i)
    acc = acc * MatXc(wc.asDiagonal()) * orientedKernel(steps[i]);
  return acc.trace();
}

/// Paired slots of one bijection, with arg-to-node lookups per side.
struct Network {
  std::vector<std::pair<int, int>> nodes;  // (bra arg, ket arg)
  const ProductIndex *bra = nullptr;
  const ProductIndex *ket = nullptr;
  std::vector<int> bra_arg_node;
  std::vector<int> ket_arg_node;

  const FactorRef &sideRef(int node, bool bra_side) const {
    const ProductIndex &pi = bra_side ? *bra : *ket;
    int arg = bra_side ? nodes[static_cast<std::size_t>(node)].first
                       : nodes[static_cast<std::size_t>(node)].second;
    return pi.by_arg[static_cast<std::size_t>(arg)];
  }

  Step makeStep(int node, bool bra_side) const {
    const ProductIndex &pi = bra_side ? *bra : *ket;
    const FactorRef &r = sideRef(node, bra_side);
    Step s;
    s.bra_side = bra_side;
    if (r.is_vector) {
      s.is_kernel = false;
      s.vec = pi.payload->vectors[static_cast<std::size_t>(r.index)].values.get();
    } else {
      s.is_kernel = true;
      s.from_a = r.at_arg_a;
      s.ker = pi.payload->kernels[static_cast<std::size_t>(r.index)].kernel.get();
    }
    return s;
  }

  int otherNode(int node, bool bra_side) const {
    const ProductIndex &pi = bra_side ? *bra : *ket;
    const FactorRef &r = sideRef(node, bra_side);
    const KernelFactor &k = pi.payload->kernels[static_cast<std::size_t>(r.index)];
    int other_arg = r.at_arg_a ? k.argB : k.argA;
    const std::vector<int> &lut = bra_side ? bra_arg_node : ket_arg_node;
    return lut[static_cast<std::size_t>(other_arg)];
  }
};

Complex evalNetwork(Network &net, const FrequencyGrid &grid, const VecXc &wc,
                    ContractionContext &ctx) {
  const std::size_t m = net.nodes.size();
  net.bra_arg_node.assign(net.bra->by_arg.size(), -1);
  net.ket_arg_node.assign(net.ket->by_arg.size(), -1);
  for (std::size_t p = 0; p < m; ++p) {
    net.bra_arg_node[static_cast<std::size_t>(net.nodes[p].first)] =
        static_cast<int>(p);
    net.ket_arg_node[static_cast<std::size_t>(net.nodes[p].second)] =
        static_cast<int>(p);
  }

  std::vector<char> visited(m, 0);
  Complex total(1.0, 0.0);
  std::vector<Step> steps;

  auto lookup = [&](const std::string &key, const std::vector<Step> &st,
                    bool cycle) {
    auto it = ctx.component_cache.find(key);
    if (it != ctx.component_cache.end()) return it->second;
    Complex v = cycle ? evalCycle(st, wc) : evalChain(st, grid.weights(), wc);
    ctx.component_cache.emplace(key, v);
    return v;
  };

  // Chains first: every component with a vector endpoint starts at one.
  for (std::size_t p = 0; p < m; ++p) {
    if (visited[p]) continue;
    bool bra_vec = net.sideRef(static_cast<int>(p), true).is_vector;
    bool ket_vec = net.sideRef(static_cast<int>(p), false).is_vector;
    if (!bra_vec && !ket_vec) continue;
    bool start_side = bra_vec;
    steps.clear();
    steps.push_back(net.makeStep(static_cast<int>(p), start_side));
    int cur = static_cast<int>(p);
    bool side = !start_side;
    visited[p] = 1;
    for (;;) {
      const FactorRef &r = net.sideRef(cur, side);
      steps.push_back(net.makeStep(cur, side));
      if (r.is_vector) break;
      cur = net.otherNode(cur, side);
      visited[static_cast<std::size_t>(cur)] = 1;
      side = !side;
    }
    total *= lookup(chainKey(steps), steps, false);
    if (total == Complex(0.0, 0.0)) return total;
  }

  // Remaining components are cycles of kernels, alternating sides.
  for (std::size_t p = 0; p < m; ++p) {
    if (visited[p]) continue;
    steps.clear();
    int cur = static_cast<int>(p);
    bool side = true;
    do {
      steps.push_back(net.makeStep(cur, side));
      visited[static_cast<std::size_t>(cur)] = 1;
      cur = net.otherNode(cur, side);
      side = !side;
    } while (cur != static_cast<int>(p) || !side);
    total *= lookup(cycleKey(steps), steps, true);
    if (total == Complex(0.0, 0.0)) return total;
  }
  return total;
}

Complex denseSweep(const std::vector<std::pair<int, int>> &nodes,
                   const SpectralAmplitude &bra, const SpectralAmplitude &ket,
                   const FrequencyGrid &grid, double cell_budget) {
  const std::size_t m = nodes.size();
  const int bins = grid.bins();
  double cells = std::pow(static_cast<double>(bins), static_cast<double>(m));
  if (cells > cell_budget)
    throw ContractError("dense contraction over " + std::to_string(m) +
                        " slots exceeds the cell budget");
  std::vector<int> tuple(m, 0);
  std::vector<int> bra_idx(static_cast<std::size_t>(bra.arity()), 0);
  std::vector<int> ket_idx(static_cast<std::size_t>(ket.arity()), 0);
  Complex total(0.0, 0.0);
  for (;;) {
    double w = 1.0;
    for (std::size_t p = 0; p < m; ++p) {
      w *= grid.weight(tuple[p]);
      bra_idx[static_cast<std::size_t>(nodes[p].first)] = tuple[p];
      ket_idx[static_cast<std::size_t>(nodes[p].second)] = tuple[p];
    }
    total += w * std::conj(bra.evalAt(bra_idx)) * ket.evalAt(ket_idx);
    std::size_t p = m;
    while (p > 0) {
      --p;
      if (++tuple[p] < bins) break;
      tuple[p] = 0;
      if (p == 0) return total;
    }
    if (m == 0) return total;
  }
}

int findRoot(std::vector<int> &parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] =
        parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

void unionRoots(std::vector<int> &parent, int a, int b) {
  int ra = findRoot(parent, a), rb = findRoot(parent, b);
  if (ra != rb) parent[static_cast<std::size_t>(ra)] = rb;
}

double factorialApprox(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

Complex contractTerms(const MonomialTerm &bra, const MonomialTerm &ket,
                      const FrequencyGrid &grid, ContractionContext &ctx) {
  const int nb = static_cast<int>(bra.modes.size());
  const int nk = static_cast<int>(ket.modes.size());
  if (nb != nk) return Complex(0.0, 0.0);
  if (nb == 0)
    return std::conj(bra.amplitude.evalAt({})) * ket.amplitude.evalAt({});

  const ModeOverlap *overlap = ctx.opts.overlap;
  const bool trivial_overlap = overlap == nullptr || overlap->isIdentity();

  auto blockOf = [&](int mode) {
    return trivial_overlap ? mode : overlap->blockIds()[static_cast<std::size_t>(mode)];
  };
  auto kappa = [&](int bra_mode, int ket_mode) -> Complex {
    if (trivial_overlap)
      return bra_mode == ket_mode ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
    return overlap->kappa(bra_mode, ket_mode);
  };

  // Slots grouped by overlap block; photon counts must match per block.
  std::map<int, std::pair<std::vector<int>, std::vector<int>>> blocks;
  for (int s = 0; s < nb; ++s)
    blocks[blockOf(bra.modes[static_cast<std::size_t>(s)])].first.push_back(s);
  for (int t = 0; t < nk; ++t)
    blocks[blockOf(ket.modes[static_cast<std::size_t>(t)])].second.push_back(t);
  for (const auto &kv : blocks)
    if (kv.second.first.size() != kv.second.second.size())
      return Complex(0.0, 0.0);

  // Kernel factors and dense payloads couple blocks into joint groups.
  std::vector<int> block_ids;
  block_ids.reserve(blocks.size());
  for (const auto &kv : blocks) block_ids.push_back(kv.first);
  std::vector<int> parent(block_ids.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto dsuIndex = [&](int block_id) {
    return static_cast<int>(std::lower_bound(block_ids.begin(), block_ids.end(),
                                             block_id) -
                            block_ids.begin());
  };

  const bool any_dense = bra.amplitude.isDense() || ket.amplitude.isDense();
  if (any_dense) {
    for (std::size_t i = 1; i < block_ids.size(); ++i)
      unionRoots(parent, 0, static_cast<int>(i));
  } else {
    auto coupleKernels = [&](const ProductPayload &pp,
                             const std::vector<int> &modes) {
      for (const KernelFactor &k : pp.kernels)
        unionRoots(parent,
                   dsuIndex(blockOf(modes[static_cast<std::size_t>(k.argA)])),
                   dsuIndex(blockOf(modes[static_cast<std::size_t>(k.argB)])));
    };
    coupleKernels(bra.amplitude.productPayload(), bra.modes);
    coupleKernels(ket.amplitude.productPayload(), ket.modes);
  }

  std::map<int, std::vector<int>> groups;  // dsu root -> block ids
  for (std::size_t i = 0; i < block_ids.size(); ++i)
    groups[findRoot(parent, static_cast<int>(i))].push_back(block_ids[i]);

  ProductIndex bra_pi, ket_pi;
  if (!any_dense) {
    bra_pi = indexProduct(bra.amplitude.productPayload(), nb);
    ket_pi = indexProduct(ket.amplitude.productPayload(), nk);
  }
  VecXc wc = grid.weights().cast<Complex>();

  Complex result(1.0, 0.0);
  for (const auto &group : groups) {
    std::vector<const std::pair<std::vector<int>, std::vector<int>> *> parts;
    for (int bid : group.second) parts.push_back(&blocks.at(bid));

    bool all_vector = !any_dense;
    if (all_vector) {
      for (const auto *part : parts) {
        for (int s : part->first)
          all_vector = all_vector &&
                       bra_pi.by_arg[static_cast<std::size_t>(s)].is_vector;
        for (int t : part->second)
          all_vector = all_vector &&
                       ket_pi.by_arg[static_cast<std::size_t>(t)].is_vector;
      }
    }

    if (all_vector) {
      // One block per group here, so the permanent covers it exactly.
      const auto &bra_slots = parts[0]->first;
      const auto &ket_slots = parts[0]->second;
      const int n = static_cast<int>(bra_slots.size());
      MatXc m(n, n);
      for (int i = 0; i < n; ++i) {
        const int s = bra_slots[static_cast<std::size_t>(i)];
        const VecXc &vb =
            *bra_pi.payload->vectors[static_cast<std::size_t>(
                 bra_pi.by_arg[static_cast<std::size_t>(s)].index)]
                 .values;
        for (int j = 0; j < n; ++j) {
          const int t = ket_slots[static_cast<std::size_t>(j)];
          const VecXc &vk =
              *ket_pi.payload->vectors[static_cast<std::size_t>(
                   ket_pi.by_arg[static_cast<std::size_t>(t)].index)]
                   .values;
          Complex kap = kappa(bra.modes[static_cast<std::size_t>(s)],
                              ket.modes[static_cast<std::size_t>(t)]);
          m(i, j) = kap == Complex(0.0, 0.0)
                        ? Complex(0.0, 0.0)
                        : kap * inner1(vb, vk, grid.weights());
        }
      }
      result *= permanentStructured(m, ctx.opts.permanent_enum_max,
                                    ctx.opts.permanent_ryser_max);
      if (result == Complex(0.0, 0.0)) return result;
      continue;
    }

    // Coupled group: enumerate slot pairings block by block.
    double pairings = 1.0;
    for (const auto *part : parts)
      pairings *= factorialApprox(static_cast<int>(part->first.size()));
    if (pairings > ctx.opts.bijection_budget)
      throw ContractError("pairing enumeration over " +
                          std::to_string(static_cast<long long>(pairings)) +
                          " permutations exceeds the budget");

    std::vector<std::vector<int>> perms;
    perms.reserve(parts.size());
    for (const auto *part : parts) {
      std::vector<int> p = part->second;
      std::sort(p.begin(), p.end());
      perms.push_back(std::move(p));
    }

    Network net;
    net.bra = &bra_pi;
    net.ket = &ket_pi;

    Complex group_sum(0.0, 0.0);
    for (;;) {
      net.nodes.clear();
      Complex kap_prod(1.0, 0.0);
      for (std::size_t b = 0; b < parts.size(); ++b) {
        const auto &bra_slots = parts[b]->first;
        const auto &ket_slots = perms[b];
        for (std::size_t i = 0; i < bra_slots.size(); ++i) {
          const int s = bra_slots[i];
          const int t = ket_slots[i];
          kap_prod *= kappa(bra.modes[static_cast<std::size_t>(s)],
                            ket.modes[static_cast<std::size_t>(t)]);
          net.nodes.emplace_back(s, t);
        }
      }
      if (kap_prod != Complex(0.0, 0.0)) {
        Complex v = any_dense
                        ? denseSweep(net.nodes, bra.amplitude, ket.amplitude,
                                     grid, ctx.opts.dense_cell_budget)
                        : evalNetwork(net, grid, wc, ctx);
        group_sum += kap_prod * v;
      }
      bool advanced = false;
      for (auto &p : perms) {
        if (std::next_permutation(p.begin(), p.end())) {
          advanced = true;
          break;
        }
      }
      if (!advanced) break;
    }
    result *= group_sum;
    if (result == Complex(0.0, 0.0)) return result;
  }
  return result;
}

namespace detail {

Complex contractProductsIdentity(const ProductPayload &bra,
                                 const ProductPayload &ket, int arity,
                                 const FrequencyGrid &grid) {
  ContractionContext ctx;
  ProductIndex bra_pi = indexProduct(bra, arity);
  ProductIndex ket_pi = indexProduct(ket, arity);
  Network net;
  net.bra = &bra_pi;
  net.ket = &ket_pi;
  for (int p = 0; p < arity; ++p) net.nodes.emplace_back(p, p);
  VecXc wc = grid.weights().cast<Complex>();
  return evalNetwork(net, grid, wc, ctx);
}

}  // namespace detail

static void requireCompatible(const StateVector &bra, const StateVector &ket) {
  if (!bra.grid()->sameAs(*ket.grid()))
    throw ValidationError("inner product requires matching frequency grids");
  if (bra.registry().get() != ket.registry().get() &&
      !bra.registry()->sameAs(*ket.registry()))
    throw ValidationError("inner product requires matching mode registries");
}

Complex innerProduct(const StateVector &bra, const StateVector &ket,
                     ContractionContext *ctx) {
  requireCompatible(bra, ket);
  ContractionContext local;
  ContractionContext &c = ctx != nullptr ? *ctx : local;
  Complex total(0.0, 0.0);
  for (const MonomialTerm &s : bra.terms())
    for (const MonomialTerm &t : ket.terms())
      total += std::conj(s.coeff) * t.coeff *
               contractTerms(s, t, *bra.grid(), c);
  return total;
}

double normSquared(const StateVector &psi, ContractionContext *ctx) {
  ContractionContext local;
  ContractionContext &c = ctx != nullptr ? *ctx : local;
  Complex total(0.0, 0.0);
  double mass = 0.0;
  for (const MonomialTerm &s : psi.terms())
    for (const MonomialTerm &t : psi.terms()) {
      Complex v = std::conj(s.coeff) * t.coeff *
                  contractTerms(s, t, *psi.grid(), c);
      total += v;
      mass += std::abs(v);
    }
  const double tol = 1e-10 * std::max(1.0, mass);
  if (std::abs(total.imag()) > tol)
    throw ContractError("state norm has a non-real part beyond tolerance");
  double re = total.real();
  if (re < 0.0) {
    if (re < -tol)
      throw ContractError("state norm is negative beyond tolerance");
    re = 0.0;
  }
  return re;
}

MatXc termGram(const StateVector &bra, const StateVector &ket,
               ContractionContext &ctx) {
  requireCompatible(bra, ket);
  const auto rows = static_cast<Eigen::Index>(bra.terms().size());
  const auto cols = static_cast<Eigen::Index>(ket.terms().size());
  MatXc g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      g(i, j) = contractTerms(bra.terms()[static_cast<std::size_t>(i)],
                              ket.terms()[static_cast<std::size_t>(j)],
                              *bra.grid(), ctx);
  return g;
}

Complex quadraticFormCrossKW(const StateVector &bra, const StateVector &ket,
                             const std::vector<int> &scope, const MatXc &kw,
                             ContractionContext *ctx) {
  requireCompatible(bra, ket);
  const int bins = bra.grid()->bins();
  if (kw.rows() != bins || kw.cols() != bins)
    throw ValidationError("quadratic kernel size must match the grid");
  ContractionContext local;
  ContractionContext &c = ctx != nullptr ? *ctx : local;

  bool diagonal = true;
  for (Eigen::Index i = 0; i < kw.rows() && diagonal; ++i)
    for (Eigen::Index j = 0; j < kw.cols(); ++j)
      if (i != j && kw(i, j) != Complex(0.0, 0.0)) {
        diagonal = false;
        break;
      }
  VecXc diag = kw.diagonal();

  std::vector<char> in_scope;
  for (int m : scope) {
    if (m < 0) throw ValidationError("scope modes must be nonnegative");
    if (static_cast<std::size_t>(m) >= in_scope.size())
      in_scope.resize(static_cast<std::size_t>(m) + 1, 0);
    in_scope[static_cast<std::size_t>(m)] = 1;
  }
  auto scoped = [&](int m) {
    return static_cast<std::size_t>(m) < in_scope.size() &&
           in_scope[static_cast<std::size_t>(m)] != 0;
  };

  Complex total(0.0, 0.0);
  for (const MonomialTerm &t : ket.terms()) {
    for (std::size_t j = 0; j < t.modes.size(); ++j) {
      if (!scoped(t.modes[j])) continue;
      MonomialTerm moved = t;
      moved.amplitude = diagonal
                            ? t.amplitude.argScaled(static_cast<int>(j), diag)
                            : t.amplitude.argTransformed(static_cast<int>(j), kw);
      for (const MonomialTerm &s : bra.terms())
        total += std::conj(s.coeff) * t.coeff *
                 contractTerms(s, moved, *bra.grid(), c);
    }
  }
  return total;
}

Complex quadraticFormExpectation(const StateVector &psi,
                                 const std::vector<int> &scope, const MatXc &k,
                                 ContractionContext *ctx) {
  MatXc kw = k * psi.grid()->weights().cast<Complex>().asDiagonal();
  return quadraticFormCrossKW(psi, psi, scope, kw, ctx);
}

double energyExpectation(const StateVector &psi, ContractionContext *ctx) {
  const FrequencyGrid &g = *psi.grid();
  MatXc kw = MatXc::Zero(g.bins(), g.bins());
  for (int i = 0; i < g.bins(); ++i) kw(i, i) = Complex(g.frequency(i), 0.0);
  std::vector<int> scope;
  for (int m = 0; m < static_cast<int>(psi.registry()->size()); ++m)
    scope.push_back(m);
  Complex q = quadraticFormCrossKW(psi, psi, scope, kw, ctx);
  return constants::hbar * q.real();
}

void requireNormalized(const StateVector &psi, double tol,
                       ContractionContext *ctx) {
  double n2 = normSquared(psi, ctx);
  if (std::abs(n2 - 1.0) > tol)
    throw ContractError("state is not normalized: <psi|psi> = " +
                        std::to_string(n2));
}

}  // namespace photonnet
