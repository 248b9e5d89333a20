#include "photonnet/netspec.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <thread>

#include "photonnet/channels.hpp"
#include "photonnet/detection.hpp"
#include "photonnet/sources.hpp"

namespace photonnet {

namespace {

bool isIdent(const std::string &s) {
  if (s.empty())
    return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_')
    return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
      return false;
  return true;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int declaredMode(const ModeRegistry &reg, const std::string &id,
                 const std::string &path) {
  if (auto idx = reg.find(id))
    return *idx;
  throw ValidationError(path + ": undeclared mode \"" + id + "\"");
}

std::vector<std::string> stringArray(const json &v, const std::string &path,
                                     int exact_size) {
  if (!v.is_array())
    throw ValidationError(path + ": expected array of strings");
  if (exact_size >= 0 && static_cast<int>(v.size()) != exact_size)
    throw ValidationError(path + ": expected exactly " +
                          std::to_string(exact_size) + " entries");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string())
      throw ValidationError(path + "[" + std::to_string(i) +
                            "]: expected string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

double finiteNumber(const json &v, const std::string &path) {
  if (!v.is_number())
    throw ValidationError(path + ": expected number");
  const double x = v.get<double>();
  if (!std::isfinite(x))
    throw ValidationError(path + ": expected finite number");
  return x;
}

double optionalUnitInterval(const json &obj, const char *key,
                            const std::string &path, double fallback) {
  if (!obj.contains(key))
    return fallback;
  const double x = finiteNumber(obj[key], path + "." + key);
  if (x < 0.0 || x > 1.0)
    throw ValidationError(path + "." + key + ": must lie in [0, 1]");
  return x;
}

VecXc shapeFromJson(const json &v, const FrequencyGrid &grid,
                    const std::string &path) {
  VecXc f = vectorFromJson(v, path);
  if (f.size() != grid.bins())
    throw ValidationError(path + ": expected one entry per grid bin (" +
                          std::to_string(grid.bins()) + ")");
  double n2 = 0.0;
  for (int b = 0; b < grid.bins(); ++b)
    n2 += grid.weight(b) * std::norm(f(b));
  if (!(n2 > 0.0))
    throw ValidationError(path + ": shape has zero norm");
  return f;
}

void requireDistinctIds(const std::vector<std::string> &ids,
                        const std::string &path) {
  std::set<std::string> seen;
  for (const std::string &id : ids)
    if (!seen.insert(id).second)
      throw ValidationError(path + ": repeated mode \"" + id + "\"");
}

std::array<std::string, 2> modePair(const json &obj, const char *key,
                                    const ModeRegistry &reg,
                                    const std::string &path) {
  const std::string kp = path + "." + key;
  auto v = stringArray(requireKey(obj, key, path), kp, 2);
  declaredMode(reg, v[0], kp + "[0]");
  declaredMode(reg, v[1], kp + "[1]");
  return {v[0], v[1]};
}

SpectralAmplitude amplitudeField(const json &obj, const char *key,
                                 GridPtr grid, const std::string &path) {
  const std::string ap = path + "." + key;
  SpectralAmplitude h =
      SpectralAmplitude::fromJson(requireKey(obj, key, path), grid, ap);
  if (!(h.l2NormSquared() > 0.0))
    throw ValidationError(ap + ": amplitude has zero norm");
  return h;
}

SourceSpec parseSource(const json &sj, GridPtr grid, const ModeRegistry &reg) {
  const std::string path = "source";
  if (!sj.is_object())
    throw ValidationError(path + ": expected object");
  SourceSpec s;
  s.kind = requireString(sj, "kind", path);

  if (s.kind == "single_photon" || s.kind == "n_photon" ||
      s.kind == "coherent") {
    if (s.kind == "single_photon")
      rejectUnknownKeys(sj, {"kind", "mode", "shape"}, path);
    else if (s.kind == "n_photon")
      rejectUnknownKeys(sj, {"kind", "mode", "shape", "photons"}, path);
    else
      rejectUnknownKeys(sj, {"kind", "mode", "shape", "alpha",
                             "cutoff_epsilon"}, path);
    s.mode = requireString(sj, "mode", path);
    declaredMode(reg, s.mode, path + ".mode");
    s.shape = shapeFromJson(requireKey(sj, "shape", path), *grid,
                            path + ".shape");
    if (s.kind == "n_photon") {
      s.photons = requireInt(sj, "photons", path);
      if (s.photons < 1 || s.photons > 20)
        throw ValidationError(path + ".photons: expected 1 to 20");
    }
    if (s.kind == "coherent") {
      s.alpha = complexFromJson(requireKey(sj, "alpha", path), path + ".alpha");
      if (sj.contains("cutoff_epsilon")) {
        s.cutoff_epsilon =
            finiteNumber(sj["cutoff_epsilon"], path + ".cutoff_epsilon");
        if (!(s.cutoff_epsilon > 0.0) || s.cutoff_epsilon > 1e-9)
          throw ValidationError(path + ".cutoff_epsilon: must lie in "
                                "(0, 1e-9]");
      }
    }
    return s;
  }

  // Two-fiber kinds share the polarization-pair mode layout.
  auto pairModes = [&]() {
    s.a_modes = modePair(sj, "a_modes", reg, path);
    s.b_modes = modePair(sj, "b_modes", reg, path);
    requireDistinctIds({s.a_modes[0], s.a_modes[1], s.b_modes[0],
                        s.b_modes[1]},
                       path);
  };

  if (s.kind == "bi_photon") {
    rejectUnknownKeys(sj, {"kind", "a_modes", "b_modes", "coefficients",
                           "amplitudes"}, path);
    pairModes();
    s.coefficients = matrixFromJson(requireKey(sj, "coefficients", path),
                                    path + ".coefficients");
    if (s.coefficients.rows() != 2 || s.coefficients.cols() != 2)
      throw ValidationError(path + ".coefficients: expected a 2x2 matrix");
    if (!(s.coefficients.squaredNorm() > 0.0))
      throw ValidationError(path + ".coefficients: all coefficients vanish");
    const json &av = requireKey(sj, "amplitudes", path);
    if (!av.is_array() || av.size() != 4)
      throw ValidationError(path + ".amplitudes: expected 4 pair amplitudes "
                            "(row-major over a_i, b_j)");
    for (std::size_t i = 0; i < 4; ++i) {
      const std::string ap = path + ".amplitudes[" + std::to_string(i) + "]";
      SpectralAmplitude h = SpectralAmplitude::fromJson(av[i], grid, ap);
      if (h.arity() != 2)
        throw ValidationError(ap + ": expected arity 2");
      const Complex c = s.coefficients(static_cast<Eigen::Index>(i / 2),
                                       static_cast<Eigen::Index>(i % 2));
      if (c != Complex(0.0, 0.0) && !(h.l2NormSquared() > 0.0))
        throw ValidationError(ap + ": amplitude has zero norm");
      s.amplitudes.push_back(std::move(h));
    }
    return s;
  }

  if (s.kind == "qkd_singlet") {
    rejectUnknownKeys(sj, {"kind", "a_modes", "b_modes", "pair_amplitude",
                           "pairs"}, path);
    pairModes();
    if (sj.contains("pairs")) {
      s.pairs = requireInt(sj, "pairs", path);
      if (s.pairs < 1 || s.pairs > 6)
        throw ValidationError(path + ".pairs: expected 1 to 6");
    }
    s.amplitudes.push_back(amplitudeField(sj, "pair_amplitude", grid, path));
    const int arity = s.amplitudes[0].arity();
    if (arity != 2 && arity != 2 * s.pairs)
      throw ValidationError(path + ".pair_amplitude: expected arity 2 or " +
                            std::to_string(2 * s.pairs));
    return s;
  }

  if (s.kind == "qkd_superposition") {
    rejectUnknownKeys(sj, {"kind", "a_modes", "b_modes", "pair_amplitude",
                           "weights", "energy_scale"}, path);
    pairModes();
    s.amplitudes.push_back(amplitudeField(sj, "pair_amplitude", grid, path));
    if (s.amplitudes[0].arity() != 2)
      throw ValidationError(path + ".pair_amplitude: expected arity 2");
    s.weights = vectorFromJson(requireKey(sj, "weights", path),
                               path + ".weights");
    if (s.weights.size() < 1 || s.weights.size() > 7)
      throw ValidationError(path + ".weights: expected 1 to 7 entries "
                            "(c_0 .. c_6)");
    if (!(s.weights.squaredNorm() > 0.0))
      throw ValidationError(path + ".weights: all weights vanish");
    if (sj.contains("energy_scale"))
      s.energy_scale = finiteNumber(sj["energy_scale"],
                                    path + ".energy_scale");
    return s;
  }

  if (s.kind == "general_multi_mode") {
    rejectUnknownKeys(sj, {"kind", "a_modes", "b_modes", "amplitude",
                           "a1_photons", "a_photons", "b1_photons",
                           "b_photons"}, path);
    pairModes();
    s.a1_photons = requireInt(sj, "a1_photons", path);
    s.a_photons = requireInt(sj, "a_photons", path);
    s.b1_photons = requireInt(sj, "b1_photons", path);
    s.b_photons = requireInt(sj, "b_photons", path);
    if (s.a_photons < 0 || s.b_photons < 0 ||
        s.a_photons + s.b_photons < 1)
      throw ValidationError(path + ": a_photons + b_photons must be >= 1");
    if (s.a1_photons < 0 || s.a1_photons > s.a_photons)
      throw ValidationError(path + ".a1_photons: expected 0 to a_photons");
    if (s.b1_photons < 0 || s.b1_photons > s.b_photons)
      throw ValidationError(path + ".b1_photons: expected 0 to b_photons");
    s.amplitudes.push_back(amplitudeField(sj, "amplitude", grid, path));
    if (s.amplitudes[0].arity() != s.a_photons + s.b_photons)
      throw ValidationError(path + ".amplitude: expected arity " +
                            std::to_string(s.a_photons + s.b_photons));
    return s;
  }

  throw ValidationError(path + ".kind: unknown source kind \"" + s.kind +
                        "\"");
}

std::vector<MatXc> blocksField(const json &cj, const std::string &path,
                               int bins, int n_out, int n_in) {
  const bool single = cj.contains("matrix");
  const bool per_bin = cj.contains("matrices");
  if (single == per_bin)
    throw ValidationError(path + ": provide exactly one of \"matrix\", "
                          "\"matrices\"");
  std::vector<MatXc> blocks;
  if (single) {
    blocks.push_back(matrixFromJson(cj["matrix"], path + ".matrix"));
  } else {
    const json &mm = cj["matrices"];
    if (!mm.is_array() || static_cast<int>(mm.size()) != bins)
      throw ValidationError(path + ".matrices: expected one matrix per grid "
                            "bin (" + std::to_string(bins) + ")");
    for (std::size_t b = 0; b < mm.size(); ++b)
      blocks.push_back(matrixFromJson(mm[b], path + ".matrices[" +
                                              std::to_string(b) + "]"));
  }
  double residual = 0.0;
  for (const MatXc &u : blocks) {
    if (u.rows() != n_out || u.cols() != n_in)
      throw ValidationError(path + ": expected " + std::to_string(n_out) +
                            "x" + std::to_string(n_in) + " matrix blocks");
    const MatXc gram = u.adjoint() * u;
    residual = std::max(residual,
                        (gram - MatXc::Identity(n_in, n_in))
                            .cwiseAbs()
                            .maxCoeff());
  }
  if (residual > 1e-10)
    throw ValidationError(path + ": matrix columns are not orthonormal "
                          "(residual " + fmt17(residual) + ")");
  return blocks;
}

ChannelSpec parseChannel(const json &cj, GridPtr grid,
                         const ModeRegistry &reg, const std::string &path) {
  if (!cj.is_object())
    throw ValidationError(path + ": expected object");
  ChannelSpec c;
  c.kind = requireString(cj, "kind", path);

  if (c.kind == "beam_splitter") {
    rejectUnknownKeys(cj, {"kind", "input", "outputs", "eta_trans"}, path);
    c.inputs = {requireString(cj, "input", path)};
    declaredMode(reg, c.inputs[0], path + ".input");
    c.outputs = stringArray(requireKey(cj, "outputs", path),
                            path + ".outputs", 2);
    for (std::size_t i = 0; i < 2; ++i)
      declaredMode(reg, c.outputs[i],
                   path + ".outputs[" + std::to_string(i) + "]");
    requireDistinctIds(c.outputs, path + ".outputs");
    c.eta_trans = finiteNumber(requireKey(cj, "eta_trans", path),
                               path + ".eta_trans");
    if (c.eta_trans < 0.0 || c.eta_trans > 1.0)
      throw ValidationError(path + ".eta_trans: must lie in [0, 1]");
    return c;
  }

  if (c.kind == "pol_rotation") {
    rejectUnknownKeys(cj, {"kind", "modes", "u", "v"}, path);
    c.inputs = stringArray(requireKey(cj, "modes", path), path + ".modes", 2);
    for (std::size_t i = 0; i < 2; ++i)
      declaredMode(reg, c.inputs[i],
                   path + ".modes[" + std::to_string(i) + "]");
    requireDistinctIds(c.inputs, path + ".modes");
    c.outputs = c.inputs;
    c.u = complexFromJson(requireKey(cj, "u", path), path + ".u");
    c.v = complexFromJson(requireKey(cj, "v", path), path + ".v");
    const double residual = std::abs(std::norm(c.u) + std::norm(c.v) - 1.0);
    if (residual > 1e-10)
      throw ValidationError(path + ": |u|^2 + |v|^2 must be 1 (residual " +
                            fmt17(residual) + ")");
    return c;
  }

  if (c.kind == "loss") {
    rejectUnknownKeys(cj, {"kind", "input", "output", "sink", "eta_loss"},
                      path);
    c.inputs = {requireString(cj, "input", path)};
    declaredMode(reg, c.inputs[0], path + ".input");
    c.outputs = {requireString(cj, "output", path),
                 requireString(cj, "sink", path)};
    declaredMode(reg, c.outputs[0], path + ".output");
    declaredMode(reg, c.outputs[1], path + ".sink");
    requireDistinctIds(c.outputs, path);
    const json &ej = requireKey(cj, "eta_loss", path);
    if (ej.is_number()) {
      const double e = finiteNumber(ej, path + ".eta_loss");
      if (e < 0.0 || e > 1.0)
        throw ValidationError(path + ".eta_loss: scalar must lie in [0, 1]");
      c.eta_loss = VecXc::Constant(1, Complex(e, 0.0));
    } else {
      c.eta_loss = vectorFromJson(ej, path + ".eta_loss");
      if (c.eta_loss.size() != grid->bins())
        throw ValidationError(path + ".eta_loss: expected a scalar or one "
                              "entry per grid bin (" +
                              std::to_string(grid->bins()) + ")");
      for (Eigen::Index b = 0; b < c.eta_loss.size(); ++b)
        if (std::abs(c.eta_loss(b)) > 1.0 + 1e-12)
          throw ValidationError(path + ".eta_loss[" + std::to_string(b) +
                                "]: magnitude exceeds 1");
    }
    return c;
  }

  if (c.kind == "splice" || c.kind == "coupler" ||
      c.kind == "custom_unitary") {
    rejectUnknownKeys(cj, {"kind", "inputs", "outputs", "matrix", "matrices"},
                      path);
    const int fixed = c.kind == "splice" ? 4 : c.kind == "coupler" ? 8 : -1;
    c.inputs = stringArray(requireKey(cj, "inputs", path), path + ".inputs",
                           fixed);
    c.outputs = stringArray(requireKey(cj, "outputs", path),
                            path + ".outputs", fixed);
    if (c.inputs.empty())
      throw ValidationError(path + ".inputs: expected at least one mode");
    if (c.outputs.size() < c.inputs.size())
      throw ValidationError(path + ".outputs: expected at least as many "
                            "modes as inputs");
    for (std::size_t i = 0; i < c.inputs.size(); ++i)
      declaredMode(reg, c.inputs[i],
                   path + ".inputs[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < c.outputs.size(); ++i)
      declaredMode(reg, c.outputs[i],
                   path + ".outputs[" + std::to_string(i) + "]");
    requireDistinctIds(c.inputs, path + ".inputs");
    requireDistinctIds(c.outputs, path + ".outputs");
    c.blocks = blocksField(cj, path, grid->bins(),
                           static_cast<int>(c.outputs.size()),
                           static_cast<int>(c.inputs.size()));
    return c;
  }

  throw ValidationError(path + ".kind: unknown channel kind \"" + c.kind +
                        "\"");
}

DetectorSpec parseDetector(const json &dj, const ModeRegistry &reg,
                           const std::string &path) {
  if (!dj.is_object())
    throw ValidationError(path + ": expected object");
  rejectUnknownKeys(dj, {"id", "scope", "eta_det", "p_dark"}, path);
  DetectorSpec d;
  d.id = requireString(dj, "id", path);
  if (!isIdent(d.id))
    throw ValidationError(path + ".id: expected an identifier "
                          "([A-Za-z_][A-Za-z0-9_]*)");
  d.scope = stringArray(requireKey(dj, "scope", path), path + ".scope", -1);
  if (d.scope.empty())
    throw ValidationError(path + ".scope: expected at least one mode");
  for (std::size_t i = 0; i < d.scope.size(); ++i)
    declaredMode(reg, d.scope[i], path + ".scope[" + std::to_string(i) + "]");
  requireDistinctIds(d.scope, path + ".scope");
  d.eta_det = optionalUnitInterval(dj, "eta_det", path, 1.0);
  d.p_dark = optionalUnitInterval(dj, "p_dark", path, 0.0);
  return d;
}

enum class SweepKind {
  SourceAlpha,
  SourceEnergyScale,
  DetectorEta,
  DetectorDark,
  ChannelEtaTrans,
  ChannelEtaLoss,
};

struct SweepTarget {
  SweepKind kind;
  std::size_t index = 0; // detector or channel position
};

std::vector<std::string> splitPath(const std::string &s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

SweepTarget resolveSweepTarget(const Experiment &e, const std::string &p) {
  const std::string path = "sweep.parameter";
  const auto parts = splitPath(p);
  if (parts.size() == 2 && parts[0] == "source") {
    if (parts[1] == "alpha") {
      if (e.source.kind != "coherent")
        throw ValidationError(path + ": source.alpha requires a coherent "
                              "source");
      return {SweepKind::SourceAlpha};
    }
    if (parts[1] == "energy_scale") {
      if (e.source.kind != "qkd_superposition")
        throw ValidationError(path + ": source.energy_scale requires a "
                              "qkd_superposition source");
      return {SweepKind::SourceEnergyScale};
    }
  } else if (parts.size() == 3 && parts[0] == "detectors") {
    for (std::size_t i = 0; i < e.detectors.size(); ++i)
      if (e.detectors[i].id == parts[1]) {
        if (parts[2] == "eta_det")
          return {SweepKind::DetectorEta, i};
        if (parts[2] == "p_dark")
          return {SweepKind::DetectorDark, i};
        throw ValidationError(path + ": detector field must be eta_det or "
                              "p_dark");
      }
    throw ValidationError(path + ": unknown detector \"" + parts[1] + "\"");
  } else if (parts.size() == 3 && parts[0] == "channels") {
    std::size_t idx = 0;
    bool digits = !parts[1].empty();
    for (char c : parts[1])
      if (!std::isdigit(static_cast<unsigned char>(c)))
        digits = false;
    if (digits)
      idx = static_cast<std::size_t>(std::stoul(parts[1]));
    if (!digits || idx >= e.channels.size())
      throw ValidationError(path + ": channel index \"" + parts[1] +
                            "\" out of range");
    if (parts[2] == "eta_trans") {
      if (e.channels[idx].kind != "beam_splitter")
        throw ValidationError(path + ": eta_trans requires a beam_splitter "
                              "channel");
      return {SweepKind::ChannelEtaTrans, idx};
    }
    if (parts[2] == "eta_loss") {
      if (e.channels[idx].kind != "loss")
        throw ValidationError(path + ": eta_loss requires a loss channel");
      return {SweepKind::ChannelEtaLoss, idx};
    }
    throw ValidationError(path + ": channel field must be eta_trans or "
                          "eta_loss");
  }
  throw ValidationError(path + ": unsupported parameter \"" + p + "\"");
}

bool sweepNeedsUnitInterval(SweepKind k) {
  return k != SweepKind::SourceAlpha && k != SweepKind::SourceEnergyScale;
}

void applySweep(Experiment &e, const SweepTarget &t, double v) {
  switch (t.kind) {
  case SweepKind::SourceAlpha:
    e.source.alpha = Complex(v, 0.0);
    break;
  case SweepKind::SourceEnergyScale:
    e.source.energy_scale = v;
    break;
  case SweepKind::DetectorEta:
    e.detectors[t.index].eta_det = v;
    break;
  case SweepKind::DetectorDark:
    e.detectors[t.index].p_dark = v;
    break;
  case SweepKind::ChannelEtaTrans:
    e.channels[t.index].eta_trans = v;
    break;
  case SweepKind::ChannelEtaLoss:
    e.channels[t.index].eta_loss = VecXc::Constant(1, Complex(v, 0.0));
    break;
  }
}

SweepSpec parseSweep(const json &sj, const Experiment &e) {
  const std::string path = "sweep";
  if (!sj.is_object())
    throw ValidationError(path + ": expected object");
  rejectUnknownKeys(sj, {"parameter", "values"}, path);
  SweepSpec s;
  s.parameter = requireString(sj, "parameter", path);
  const SweepTarget target = resolveSweepTarget(e, s.parameter);
  const json &vals = requireKey(sj, "values", path);
  if (!vals.is_array() || vals.empty())
    throw ValidationError(path + ".values: expected non-empty array");
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const std::string vp = path + ".values[" + std::to_string(i) + "]";
    const double v = finiteNumber(vals[i], vp);
    if (sweepNeedsUnitInterval(target.kind) && (v < 0.0 || v > 1.0))
      throw ValidationError(vp + ": must lie in [0, 1]");
    s.values.push_back(v);
  }
  return s;
}

const char *const kOutputKinds[] = {"outcome_table", "marginals",
                                    "number_expectations"};

std::vector<std::string> parseOutputs(const json &oj,
                                      const Experiment &e) {
  const std::string path = "outputs";
  if (!oj.is_array() || oj.empty())
    throw ValidationError(path + ": expected non-empty array");
  std::vector<std::string> outputs;
  for (std::size_t i = 0; i < oj.size(); ++i) {
    const std::string op = path + "[" + std::to_string(i) + "]";
    if (!oj[i].is_string())
      throw ValidationError(op + ": expected string");
    const std::string o = oj[i].get<std::string>();
    if (std::find(std::begin(kOutputKinds), std::end(kOutputKinds), o) ==
        std::end(kOutputKinds))
      throw ValidationError(op + ": must be outcome_table, marginals or "
                            "number_expectations");
    if (std::find(outputs.begin(), outputs.end(), o) != outputs.end())
      throw ValidationError(op + ": repeated output \"" + o + "\"");
    outputs.push_back(o);
  }
  if (std::find(outputs.begin(), outputs.end(), "outcome_table") !=
          outputs.end() &&
      e.detectors.size() > 20)
    throw ValidationError(path + ": outcome_table supports at most 20 "
                          "detectors");
  return outputs;
}

json sourceToJson(const SourceSpec &s) {
  json j;
  j["kind"] = s.kind;
  if (s.kind == "single_photon" || s.kind == "n_photon" ||
      s.kind == "coherent") {
    j["mode"] = s.mode;
    j["shape"] = vectorToJson(s.shape);
    if (s.kind == "n_photon")
      j["photons"] = s.photons;
    if (s.kind == "coherent") {
      j["alpha"] = complexToJson(s.alpha);
      j["cutoff_epsilon"] = s.cutoff_epsilon;
    }
    return j;
  }
  j["a_modes"] = json::array({s.a_modes[0], s.a_modes[1]});
  j["b_modes"] = json::array({s.b_modes[0], s.b_modes[1]});
  if (s.kind == "bi_photon") {
    j["coefficients"] = matrixToJson(s.coefficients);
    json av = json::array();
    for (const SpectralAmplitude &h : s.amplitudes)
      av.push_back(h.toJson());
    j["amplitudes"] = std::move(av);
  } else if (s.kind == "qkd_singlet") {
    j["pair_amplitude"] = s.amplitudes[0].toJson();
    j["pairs"] = s.pairs;
  } else if (s.kind == "qkd_superposition") {
    j["pair_amplitude"] = s.amplitudes[0].toJson();
    j["weights"] = vectorToJson(s.weights);
    j["energy_scale"] = s.energy_scale;
  } else {
    j["amplitude"] = s.amplitudes[0].toJson();
    j["a1_photons"] = s.a1_photons;
    j["a_photons"] = s.a_photons;
    j["b1_photons"] = s.b1_photons;
    j["b_photons"] = s.b_photons;
  }
  return j;
}

json channelToJson(const ChannelSpec &c) {
  json j;
  j["kind"] = c.kind;
  if (c.kind == "beam_splitter") {
    j["input"] = c.inputs[0];
    j["outputs"] = json::array({c.outputs[0], c.outputs[1]});
    j["eta_trans"] = c.eta_trans;
  } else if (c.kind == "pol_rotation") {
    j["modes"] = json::array({c.inputs[0], c.inputs[1]});
    j["u"] = complexToJson(c.u);
    j["v"] = complexToJson(c.v);
  } else if (c.kind == "loss") {
    j["input"] = c.inputs[0];
    j["output"] = c.outputs[0];
    j["sink"] = c.outputs[1];
    if (c.eta_loss.size() == 1 && c.eta_loss(0).imag() == 0.0)
      j["eta_loss"] = c.eta_loss(0).real();
    else
      j["eta_loss"] = vectorToJson(c.eta_loss);
  } else {
    json ins = json::array(), outs = json::array();
    for (const std::string &m : c.inputs)
      ins.push_back(m);
    for (const std::string &m : c.outputs)
      outs.push_back(m);
    j["inputs"] = std::move(ins);
    j["outputs"] = std::move(outs);
    if (c.blocks.size() == 1) {
      j["matrix"] = matrixToJson(c.blocks[0]);
    } else {
      json mm = json::array();
      for (const MatXc &u : c.blocks)
        mm.push_back(matrixToJson(u));
      j["matrices"] = std::move(mm);
    }
  }
  return j;
}

StateVector buildSource(const GridPtr &grid, const RegistryPtr &reg,
                        const SourceSpec &s) {
  auto m = [&](const std::string &id) { return reg->require(id); };
  if (s.kind == "single_photon")
    return singlePhoton(grid, reg, m(s.mode), s.shape, true);
  if (s.kind == "n_photon")
    return nPhotonSingleMode(grid, reg, m(s.mode),
                             SpectralAmplitude::factoredPower(
                                 grid, s.shape, s.photons, true),
                             s.photons);
  if (s.kind == "coherent")
    return coherent(grid, reg, m(s.mode), s.shape, s.alpha, s.cutoff_epsilon,
                    true)
        .psi;
  if (s.kind == "bi_photon") {
    BiPhotonSpec spec;
    spec.a_modes = {m(s.a_modes[0]), m(s.a_modes[1])};
    spec.b_modes = {m(s.b_modes[0]), m(s.b_modes[1])};
    spec.c = s.coefficients / std::sqrt(s.coefficients.squaredNorm());
    for (const SpectralAmplitude &h : s.amplitudes) {
      const double n2 = h.l2NormSquared();
      spec.h.push_back(n2 > 0.0 ? h.scaled(1.0 / std::sqrt(n2)) : h);
    }
    return biPhoton(grid, reg, spec);
  }
  if (s.kind == "qkd_singlet")
    return qkdPsiN(grid, reg, m(s.a_modes[0]), m(s.a_modes[1]),
                   m(s.b_modes[0]), m(s.b_modes[1]), s.amplitudes[0],
                   s.pairs, true);
  if (s.kind == "qkd_superposition") {
    VecXc c = s.weights;
    for (Eigen::Index n = 0; n < c.size(); ++n)
      c(n) *= std::pow(s.energy_scale, static_cast<double>(n));
    const double n2 = c.squaredNorm();
    if (!(n2 > 0.0))
      throw ValidationError("source: superposition weights vanish after "
                            "energy scaling");
    c /= std::sqrt(n2);
    return qkdSuperposition(grid, reg, m(s.a_modes[0]), m(s.a_modes[1]),
                            m(s.b_modes[0]), m(s.b_modes[1]),
                            s.amplitudes[0], c);
  }
  if (s.kind == "general_multi_mode") {
    std::vector<std::vector<int>> groups;
    const int ranges[4][2] = {
        {0, s.a1_photons},
        {s.a1_photons, s.a_photons},
        {s.a_photons, s.a_photons + s.b1_photons},
        {s.a_photons + s.b1_photons, s.a_photons + s.b_photons}};
    for (const auto &r : ranges) {
      std::vector<int> g;
      for (int a = r[0]; a < r[1]; ++a)
        g.push_back(a);
      if (!g.empty())
        groups.push_back(std::move(g));
    }
    const double s2 = symmetrizedNormSquared(s.amplitudes[0], groups);
    if (!(s2 > 0.0))
      throw ValidationError("source.amplitude: symmetrized amplitude has "
                            "zero norm");
    return generalMultiMode(grid, reg, m(s.a_modes[0]), m(s.a_modes[1]),
                            m(s.b_modes[0]), m(s.b_modes[1]),
                            s.amplitudes[0].scaled(1.0 / std::sqrt(s2)),
                            s.a1_photons, s.a_photons, s.b1_photons,
                            s.b_photons);
  }
  throw ValidationError("source.kind: unknown source kind \"" + s.kind +
                        "\"");
}

ScatterChannel buildChannel(const GridPtr &grid, const RegistryPtr &reg,
                            const ChannelSpec &c) {
  auto m = [&](const std::string &id) { return reg->require(id); };
  auto mlist = [&](const std::vector<std::string> &ids) {
    std::vector<int> out;
    for (const std::string &id : ids)
      out.push_back(m(id));
    return out;
  };
  if (c.kind == "beam_splitter")
    return beamSplitter(grid, m(c.inputs[0]), m(c.outputs[0]),
                        m(c.outputs[1]), c.eta_trans);
  if (c.kind == "pol_rotation")
    return polarizationRotation(grid, m(c.inputs[0]), m(c.inputs[1]), c.u,
                                c.v);
  if (c.kind == "loss") {
    const VecXc eta = c.eta_loss.size() == 1
                          ? VecXc::Constant(grid->bins(), c.eta_loss(0))
                          : c.eta_loss;
    return lossChannel(grid, m(c.inputs[0]), m(c.outputs[0]),
                       m(c.outputs[1]), eta);
  }
  std::vector<MatXc> blocks = c.blocks;
  if (blocks.size() == 1 && grid->bins() > 1)
    blocks.assign(static_cast<std::size_t>(grid->bins()), c.blocks[0]);
  if (c.kind == "splice")
    return splice(grid, mlist(c.inputs), mlist(c.outputs), std::move(blocks));
  if (c.kind == "coupler")
    return coupler(grid, mlist(c.inputs), mlist(c.outputs),
                   std::move(blocks));
  return makeChannel(grid, mlist(c.inputs), mlist(c.outputs),
                     std::move(blocks));
}

std::vector<std::string> resultColumns(const Experiment &e) {
  std::vector<std::string> cols;
  const std::size_t n_det = e.detectors.size();
  for (const std::string &out : e.outputs) {
    if (out == "outcome_table") {
      for (std::size_t p = 0; p < (std::size_t(1) << n_det); ++p) {
        std::string name = "p";
        for (std::size_t d = 0; d < n_det; ++d)
          name += "_" + e.detectors[d].id + (((p >> d) & 1) ? "1" : "0");
        cols.push_back(std::move(name));
      }
    } else if (out == "marginals") {
      for (const DetectorSpec &d : e.detectors)
        cols.push_back("click_" + d.id);
    } else {
      for (const DetectorSpec &d : e.detectors)
        cols.push_back("n_" + d.id);
    }
  }
  return cols;
}

std::vector<double> evalPoint(const Experiment &e) {
  StateVector psi = buildSource(e.grid, e.modes, e.source);
  for (std::size_t i = 0; i < e.channels.size(); ++i) {
    const std::string ctx = "channels[" + std::to_string(i) + "]: ";
    try {
      psi = applyChannel(psi, buildChannel(e.grid, e.modes, e.channels[i]));
    } catch (const ValidationError &err) {
      throw ValidationError(ctx + err.what());
    } catch (const ContractError &err) {
      throw ContractError(ctx + err.what());
    }
  }
  std::vector<ApdModel> diodes;
  for (const DetectorSpec &d : e.detectors) {
    ApdModel apd;
    for (const std::string &id : d.scope)
      apd.scope.push_back(e.modes->require(id));
    apd.eta_det = d.eta_det;
    apd.p_dark = d.p_dark;
    diodes.push_back(std::move(apd));
  }
  std::vector<double> row;
  for (const std::string &out : e.outputs) {
    if (out == "outcome_table") {
      const std::vector<double> table = outcomeTable(psi, diodes);
      row.insert(row.end(), table.begin(), table.end());
    } else if (out == "marginals") {
      for (const ApdModel &apd : diodes) {
        OutcomeSpec spec;
        spec.silent = {apd};
        row.push_back(1.0 - outcomeProbability(psi, spec));
      }
    } else {
      for (const ApdModel &apd : diodes)
        row.push_back(numberExpectation(psi, apd.scope));
    }
  }
  return row;
}

int resolveThreads(std::size_t points) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0)
    hw = 1;
  long want = static_cast<long>(hw);
  if (const char *s = std::getenv("PHOTONNET_THREADS")) {
    char *end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0' || v < 1)
      throw ValidationError("PHOTONNET_THREADS: expected a positive integer");
    want = v;
  }
  return static_cast<int>(
      std::min<long>(want, static_cast<long>(points)));
}

} // namespace

Experiment parseExperiment(const json &j) {
  const std::string path = "experiment";
  if (!j.is_object())
    throw ValidationError(path + ": expected object");
  rejectUnknownKeys(j, {"schema_version", "grid", "modes", "source",
                        "channels", "detectors", "outputs", "sweep"},
                    path);
  const int version = requireInt(j, "schema_version", path);
  if (version != 1)
    throw ValidationError(path + ".schema_version: expected 1, got " +
                          std::to_string(version));
  Experiment e;
  e.grid = gridFromJson(requireKey(j, "grid", path), "grid");
  e.modes = ModeRegistry::fromJson(requireKey(j, "modes", path), "modes");
  if (e.modes->size() == 0)
    throw ValidationError("modes: at least one mode is required");
  e.source = parseSource(requireKey(j, "source", path), e.grid, *e.modes);

  const json &cj = requireKey(j, "channels", path);
  if (!cj.is_array())
    throw ValidationError("channels: expected array");
  for (std::size_t i = 0; i < cj.size(); ++i)
    e.channels.push_back(parseChannel(
        cj[i], e.grid, *e.modes, "channels[" + std::to_string(i) + "]"));

  const json &dj = requireKey(j, "detectors", path);
  if (!dj.is_array() || dj.empty())
    throw ValidationError("detectors: expected non-empty array");
  std::set<std::string> det_ids;
  std::set<std::string> scoped_modes;
  for (std::size_t i = 0; i < dj.size(); ++i) {
    const std::string dp = "detectors[" + std::to_string(i) + "]";
    DetectorSpec d = parseDetector(dj[i], *e.modes, dp);
    if (!det_ids.insert(d.id).second)
      throw ValidationError(dp + ".id: repeated detector id \"" + d.id +
                            "\"");
    for (const std::string &mid : d.scope)
      if (!scoped_modes.insert(mid).second)
        throw ValidationError(dp + ".scope: mode \"" + mid +
                              "\" already watched by another detector");
    e.detectors.push_back(std::move(d));
  }

  e.outputs = parseOutputs(requireKey(j, "outputs", path), e);
  if (j.contains("sweep"))
    e.sweep = parseSweep(j["sweep"], e);
  return e;
}

Experiment parseExperimentText(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error &err) {
    throw ValidationError(std::string("experiment: invalid JSON: ") +
                          err.what());
  }
  return parseExperiment(j);
}

json experimentToJson(const Experiment &e) {
  json j;
  j["schema_version"] = 1;
  j["grid"] = gridToJson(*e.grid);
  j["modes"] = e.modes->toJson();
  j["source"] = sourceToJson(e.source);
  json cj = json::array();
  for (const ChannelSpec &c : e.channels)
    cj.push_back(channelToJson(c));
  j["channels"] = std::move(cj);
  json dj = json::array();
  for (const DetectorSpec &d : e.detectors) {
    json dd;
    dd["id"] = d.id;
    dd["scope"] = d.scope;
    dd["eta_det"] = d.eta_det;
    dd["p_dark"] = d.p_dark;
    dj.push_back(std::move(dd));
  }
  j["detectors"] = std::move(dj);
  j["outputs"] = e.outputs;
  if (e.sweep) {
    json sj;
    sj["parameter"] = e.sweep->parameter;
    sj["values"] = e.sweep->values;
    j["sweep"] = std::move(sj);
  }
  return j;
}

RunResult runExperiment(const Experiment &e) {
  RunResult r;
  r.columns = resultColumns(e);
  if (e.sweep) {
    r.sweep_parameter = e.sweep->parameter;
    r.sweep_values = e.sweep->values;
  } else {
    r.sweep_values = {0.0};
  }
  const std::size_t points = r.sweep_values.size();
  r.rows.resize(points);

  SweepTarget target{SweepKind::SourceAlpha};
  if (e.sweep)
    target = resolveSweepTarget(e, e.sweep->parameter);

  auto evalOne = [&](std::size_t i) {
    try {
      Experiment pt = e;
      pt.sweep.reset();
      if (e.sweep)
        applySweep(pt, target, r.sweep_values[i]);
      r.rows[i] = evalPoint(pt);
    } catch (const ValidationError &err) {
      if (!e.sweep)
        throw;
      throw ValidationError("sweep point " + std::to_string(i) + " (" +
                            e.sweep->parameter + " = " +
                            fmt17(r.sweep_values[i]) + "): " + err.what());
    } catch (const ContractError &err) {
      if (!e.sweep)
        throw;
      throw ContractError("sweep point " + std::to_string(i) + " (" +
                          e.sweep->parameter + " = " +
                          fmt17(r.sweep_values[i]) + "): " + err.what());
    }
  };

  const int threads = resolveThreads(points);
  if (threads <= 1) {
    for (std::size_t i = 0; i < points; ++i)
      evalOne(i);
    return r;
  }

  // Points are independent; rows land at fixed indices, so the assembled
  // table does not depend on scheduling. On failure the lowest failing
  // index is rethrown for a deterministic message.
  std::vector<std::exception_ptr> errors(points);
  std::atomic<std::size_t> next{0};
  auto body = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points)
        return;
      try {
        evalOne(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back(body);
  for (std::thread &t : pool)
    t.join();
  for (std::size_t i = 0; i < points; ++i)
    if (errors[i])
      std::rethrow_exception(errors[i]);
  return r;
}

std::string resultToCsv(const RunResult &r) {
  std::string out =
      r.sweep_parameter.empty() ? "point" : r.sweep_parameter;
  for (const std::string &c : r.columns) {
    out += ',';
    out += c;
  }
  out += '\n';
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    out += fmt17(r.sweep_values[i]);
    for (double v : r.rows[i]) {
      out += ',';
      out += fmt17(v);
    }
    out += '\n';
  }
  return out;
}

json resultToJson(const RunResult &r) {
  json j;
  j["sweep_parameter"] =
      r.sweep_parameter.empty() ? json(nullptr) : json(r.sweep_parameter);
  j["columns"] = r.columns;
  json pts = json::array();
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    json p;
    p["value"] = r.sweep_values[i];
    json res;
    for (std::size_t c = 0; c < r.columns.size(); ++c)
      res[r.columns[c]] = r.rows[i][c];
    p["results"] = std::move(res);
    pts.push_back(std::move(p));
  }
  j["points"] = std::move(pts);
  return j;
}

const char *experimentSchemaText() {
  return R"(Experiment file reference (schema_version 1)
=============================================

Strict JSON, no comments; unknown fields are rejected. Complex numbers are
written [re, im] (a plain number means a real value); complex vectors are
arrays of those, matrices arrays of rows.

Top level
  schema_version   integer, must be 1
  grid             frequency discretization
  modes            array of mode declarations
  source           input state constructor
  channels         ordered array of network elements (may be empty)
  detectors        non-empty array of APD detectors
  outputs          non-empty array drawn from: outcome_table, marginals,
                   number_expectations (order chooses column order)
  sweep            optional parameter sweep

grid
  omega_min, omega_max   positive interval bounds (rad/s)
  bins                   number of nodes
  scheme                 "uniform" (midpoint, default) or "trapezoid"

modes[] -- field mode of the fiber network
  id             unique name, referenced everywhere else
  fiber          fiber label; (fiber, polarization, direction) is unique
  polarization   1 or 2
  direction      "+" or "-" along the fiber axis

source -- dispatch on "kind"; shapes carry one entry per grid bin and are
normalized internally, so only the profile matters
  single_photon        mode, shape
  n_photon             mode, shape, photons (1..20)
  coherent             mode, shape, alpha (complex),
                       cutoff_epsilon (optional, (0, 1e-9], default 1e-12;
                       Poisson truncation budget)
  bi_photon            a_modes [2], b_modes [2], coefficients (2x2 over
                       (a_i, b_j), normalized internally), amplitudes
                       (4 arity-2 spectral amplitudes, row-major)
  qkd_singlet          a_modes, b_modes, pair_amplitude, pairs (1..6);
                       the n-pair polarization-entangled state
  qkd_superposition    a_modes, b_modes, pair_amplitude (arity 2),
                       weights (c_0..c_N, N <= 6), energy_scale (optional,
                       default 1: c_n -> c_n * s^n, renormalized)
  general_multi_mode   a_modes, b_modes, amplitude (arity a_photons +
                       b_photons, a-side arguments first), a1_photons,
                       a_photons, b1_photons, b_photons

Spectral amplitudes are written as {"arity": n, "payload": {...}} with
payload kinds: dense (flat row-major data), factored (one vector per
argument), pair_kernel (arity-2 matrix K(omega_1, omega_2)), product
(vectors plus pair kernels by argument index).

channels[] -- dispatch on "kind"; applied to the state in array order
  beam_splitter    input, outputs [transmitted, reflected], eta_trans in
                   [0, 1]: a'_in -> sqrt(eta) a'_out1 + sqrt(1-eta) a'_out2
  pol_rotation     modes [2], u, v with |u|^2 + |v|^2 = 1 (SU(2) on the
                   polarization pair)
  loss             input, output, sink, eta_loss (scalar in [0, 1] or one
                   complex entry per bin, |eta| <= 1); the lost fraction
                   lands in the sink mode
  splice           inputs [4], outputs [4], matrix | matrices
  coupler          inputs [8], outputs [8], matrix | matrices
  custom_unitary   inputs [n_in], outputs [n_out >= n_in], matrix |
                   matrices; columns must be orthonormal (residual above
                   1e-10 is rejected and reported)
  For matrix kinds: "matrix" is one block used at every bin, "matrices"
  lists one block per bin; block (k, j) maps input j to output k.

detectors[] -- APDs with flat response; scopes must not overlap
  id        identifier, names the result columns
  scope     non-empty array of mode ids watched together
  eta_det   detection efficiency in [0, 1], default 1
  p_dark    dark-count probability in [0, 1], default 0
  Click probability given n photons in scope: 1 - (1-p_dark)(1-eta_det)^n.

sweep
  parameter   one of: source.alpha, source.energy_scale,
              detectors.<id>.eta_det, detectors.<id>.p_dark,
              channels.<index>.eta_trans, channels.<index>.eta_loss
  values      non-empty array of numbers (eta/p values must lie in [0, 1])
  Points are evaluated independently (PHOTONNET_THREADS bounds the worker
  count) and assembled in declared order.

Outputs
  outcome_table          2^D joint click/no-click probabilities; column
                         p_<id1><0|1>_<id2><0|1>... lists each detector with
                         1 = clicked
  marginals              click_<id>: per-detector click probability
  number_expectations    n_<id>: photon number expectation over the scope

Result formats: CSV (--out csv, default) has a header row and one row per
sweep point, first column the swept parameter (or "point"); numbers use
%.17g so identical experiments give byte-identical files. JSON (--out json)
mirrors the same table.
)";
}

} // namespace photonnet
