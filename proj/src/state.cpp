#include "photonnet/state.hpp"

#include <algorithm>
#include <map>
#include <cmath>
#include <numeric>

namespace photonnet {

MonomialTerm canonicalizedTerm(MonomialTerm t) {
  const int n = static_cast<int>(t.modes.size());
  if (t.amplitude.arity() != n)
    throw ValidationError("term: slot count must equal amplitude arity");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return t.modes[static_cast<std::size_t>(a)] < t.modes[static_cast<std::size_t>(b)];
  });
  bool sorted = true;
  for (int k = 0; k < n && sorted; ++k)
    sorted = order[static_cast<std::size_t>(k)] == k;
  if (sorted)
    return t;
  std::vector<int> old_to_new(static_cast<std::size_t>(n));
  std::vector<int> new_modes(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    old_to_new[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = k;
    new_modes[static_cast<std::size_t>(k)] =
        t.modes[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
  }
  MonomialTerm out{t.coeff, std::move(new_modes), t.amplitude.relabeledArgs(old_to_new)};
  return out;
}

int photonCount(const MonomialTerm &t, int mode) {
  int c = 0;
  for (int m : t.modes)
    if (m == mode)
      ++c;
  return c;
}

int photonCount(const MonomialTerm &t) { return static_cast<int>(t.modes.size()); }

StateVector StateVector::make(GridPtr grid, RegistryPtr registry,
                              std::vector<MonomialTerm> terms) {
  if (!grid)
    throw ValidationError("state: null grid");
  if (!registry)
    throw ValidationError("state: null registry");
  std::vector<MonomialTerm> canon;
  canon.reserve(terms.size());
  for (auto &t : terms) {
    for (int m : t.modes)
      if (m < 0 || m >= registry->size())
        throw ValidationError("state: slot mode index out of range");
    if (!t.amplitude.grid()->sameAs(*grid))
      throw ValidationError("state: term amplitude grid mismatch");
    canon.push_back(canonicalizedTerm(std::move(t)));
  }
  // Merge structurally identical terms; a merged coefficient that cancels to
  // below 1e-14 of the contributions' magnitude is dropped as zero.
  std::vector<MonomialTerm> merged;
  std::vector<double> contribution;
  for (auto &t : canon) {
    bool found = false;
    for (std::size_t i = 0; i < merged.size(); ++i) {
      if (merged[i].modes == t.modes &&
          merged[i].amplitude.structurallyEqual(t.amplitude)) {
        merged[i].coeff += t.coeff;
        contribution[i] += std::abs(t.coeff);
        found = true;
        break;
      }
    }
    if (!found) {
      contribution.push_back(std::abs(t.coeff));
      merged.push_back(std::move(t));
    }
  }
  std::vector<MonomialTerm> kept;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const double mag = std::abs(merged[i].coeff);
    if (mag == 0.0)
      continue;
    if (mag < 1e-14 * contribution[i])
      continue;
    kept.push_back(std::move(merged[i]));
  }
  return StateVector(std::move(grid), std::move(registry), std::move(kept));
}

StateVector StateVector::vacuum(GridPtr grid, RegistryPtr registry) {
  MonomialTerm t{Complex(1.0, 0.0), {}, SpectralAmplitude::scalarOne(grid)};
  std::vector<MonomialTerm> terms;
  terms.push_back(std::move(t));
  return make(std::move(grid), std::move(registry), std::move(terms));
}

StateVector StateVector::scaled(Complex c) const {
  std::vector<MonomialTerm> terms = terms_;
  for (auto &t : terms)
    t.coeff *= c;
  return StateVector::make(grid_, registry_, std::move(terms));
}

StateVector StateVector::plus(const StateVector &other) const {
  if (!grid_->sameAs(*other.grid_))
    throw ValidationError("state: grid mismatch in sum");
  if (registry_ != other.registry_)
    throw ValidationError("state: registry mismatch in sum");
  std::vector<MonomialTerm> terms = terms_;
  terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
  return StateVector::make(grid_, registry_, std::move(terms));
}

int StateVector::maxPhotonCount() const {
  int m = 0;
  for (const auto &t : terms_)
    m = std::max(m, photonCount(t));
  return m;
}

json StateVector::toJson() const {
  json j;
  j["grid"] = gridToJson(*grid_);
  j["modes"] = registry_->toJson();
  json terms = json::array();
  for (const auto &t : terms_) {
    json tj;
    tj["coeff"] = complexToJson(t.coeff);
    json slots = json::array();
    for (int m : t.modes)
      slots.push_back(registry_->mode(m).id);
    tj["slots"] = std::move(slots);
    tj["amplitude"] = t.amplitude.toJson();
    terms.push_back(std::move(tj));
  }
  j["terms"] = std::move(terms);
  return j;
}

StateVector StateVector::fromJson(const json &j, const std::string &path) {
  rejectUnknownKeys(j, {"grid", "modes", "terms"}, path);
  GridPtr grid = gridFromJson(requireKey(j, "grid", path), path + ".grid");
  RegistryPtr registry =
      ModeRegistry::fromJson(requireKey(j, "modes", path), path + ".modes");
  const json &terms = requireKey(j, "terms", path);
  if (!terms.is_array())
    throw ValidationError(path + ".terms: expected array");
  std::vector<MonomialTerm> out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string tp = path + ".terms[" + std::to_string(i) + "]";
    const json &tj = terms[i];
    rejectUnknownKeys(tj, {"coeff", "slots", "amplitude"}, tp);
    MonomialTerm t{complexFromJson(requireKey(tj, "coeff", tp), tp + ".coeff"),
                   {},
                   SpectralAmplitude::fromJson(requireKey(tj, "amplitude", tp),
                                               grid, tp + ".amplitude")};
    const json &slots = requireKey(tj, "slots", tp);
    if (!slots.is_array())
      throw ValidationError(tp + ".slots: expected array");
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (!slots[s].is_string())
        throw ValidationError(tp + ".slots: expected mode id strings");
      t.modes.push_back(registry->require(slots[s].get<std::string>()));
    }
    out.push_back(std::move(t));
  }
  return make(std::move(grid), std::move(registry), std::move(out));
}

namespace {

// Active slots sharing one input mode; when the amplitude is symmetric in
// them, every assignment of the same target multiset canonicalizes to one
// term, so the expansion walks multisets and counts the assignments
// instead. That keeps high-occupation factored terms (coherent states
// through a splitter) at n + 1 branches rather than 2^n.
struct SlotBundle {
  std::vector<int> slots;
};

double assignmentCount(int left, int take) {
  double c = 1.0;
  for (int i = 1; i <= take; ++i)
    c = c * static_cast<double>(left - take + i) / static_cast<double>(i);
  return c;
}

void expandFrom(const SubstitutionRule &rule,
                const std::vector<SlotBundle> &bundles, std::size_t bi,
                MonomialTerm cur, std::vector<MonomialTerm> &out);

// Distributes the bundle's remaining slots over targets[j..]; slots within
// a bundle are interchangeable, so only the counts matter.
void assignTargets(const SubstitutionRule &rule,
                   const std::vector<SlotBundle> &bundles, std::size_t bi,
                   const std::vector<const SubstitutionTarget *> &live,
                   std::size_t j, std::size_t next, int left,
                   MonomialTerm cur, std::vector<MonomialTerm> &out) {
  const SlotBundle &b = bundles[bi];
  const bool last = j + 1 == live.size();
  const int lo = last ? left : 0;
  for (int take = lo; take <= left; ++take) {
    MonomialTerm branch = cur;
    branch.coeff *= assignmentCount(left, take);
    for (int i = 0; i < take; ++i) {
      const int slot = b.slots[next + static_cast<std::size_t>(i)];
      branch.modes[static_cast<std::size_t>(slot)] = live[j]->out_mode;
      branch.amplitude = branch.amplitude.argScaled(slot, *live[j]->coeff);
    }
    if (last)
      expandFrom(rule, bundles, bi + 1, std::move(branch), out);
    else
      assignTargets(rule, bundles, bi, live, j + 1,
                    next + static_cast<std::size_t>(take), left - take,
                    std::move(branch), out);
  }
}

void expandFrom(const SubstitutionRule &rule,
                const std::vector<SlotBundle> &bundles, std::size_t bi,
                MonomialTerm cur, std::vector<MonomialTerm> &out) {
  if (bi == bundles.size()) {
    out.push_back(std::move(cur));
    return;
  }
  const SlotBundle &b = bundles[bi];
  const auto &targets =
      rule.at(cur.modes[static_cast<std::size_t>(b.slots[0])]);
  std::vector<const SubstitutionTarget *> live;
  for (const auto &tg : targets)
    if (!tg.coeff->isZero(0.0))
      live.push_back(&tg);
  if (live.empty())
    return; // the input mode maps to the zero operator
  assignTargets(rule, bundles, bi, live, 0, 0,
                static_cast<int>(b.slots.size()), std::move(cur), out);
}

void expandTerm(const MonomialTerm &t, const SubstitutionRule &rule,
                std::vector<MonomialTerm> &out) {
  // Group slots to rewrite by input mode; everything else passes through.
  std::map<int, std::vector<int>> groups;
  for (int s = 0; s < static_cast<int>(t.modes.size()); ++s)
    if (rule.count(t.modes[static_cast<std::size_t>(s)]))
      groups[t.modes[static_cast<std::size_t>(s)]].push_back(s);
  if (groups.empty()) {
    out.push_back(t);
    return;
  }
  std::vector<SlotBundle> bundles;
  for (auto &[mode, slots] : groups) {
    if (slots.size() > 1 && t.amplitude.argsExchangeable(slots)) {
      bundles.push_back({std::move(slots)});
    } else {
      for (int s : slots)
        bundles.push_back({{s}});
    }
  }
  expandFrom(rule, bundles, 0, t, out);
}

}  // namespace

StateVector applySubstitution(const StateVector &psi, const SubstitutionRule &rule) {
  for (const auto &[mode, targets] : rule) {
    if (mode < 0 || mode >= psi.registry()->size())
      throw ValidationError("substitution: unknown input mode index " +
                            std::to_string(mode));
    for (const auto &tg : targets) {
      if (tg.out_mode < 0 || tg.out_mode >= psi.registry()->size())
        throw ValidationError("substitution: unknown output mode index " +
                              std::to_string(tg.out_mode));
      if (!tg.coeff || tg.coeff->size() != psi.grid()->bins())
        throw ValidationError("substitution: coefficient size must equal bins");
    }
  }
  std::vector<MonomialTerm> out;
  for (const auto &t : psi.terms())
    expandTerm(t, rule, out);
  return StateVector::make(psi.grid(), psi.registry(), std::move(out));
}

}  // namespace photonnet
