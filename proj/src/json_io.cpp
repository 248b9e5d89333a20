#include "photonnet/json_io.hpp"

namespace photonnet {

json complexToJson(const Complex &z) { return json::array({z.real(), z.imag()}); }

Complex complexFromJson(const json &j, const std::string &path) {
  if (j.is_number())
    return Complex(j.get<double>(), 0.0);
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ValidationError(path + ": expected complex number as [re, im]");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

json vectorToJson(const VecXc &v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back(complexToJson(v(i)));
  return a;
}

VecXc vectorFromJson(const json &j, const std::string &path) {
  if (!j.is_array())
    throw ValidationError(path + ": expected array");
  VecXc v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) =
        complexFromJson(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

json matrixToJson(const MatXc &m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(complexToJson(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatXc matrixFromJson(const json &j, const std::string &path) {
  if (!j.is_array() || j.empty())
    throw ValidationError(path + ": expected non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  MatXc m;
  for (std::size_t r = 0; r < rows; ++r) {
    const json &row = j[r];
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!row.is_array())
      throw ValidationError(rp + ": expected array row");
    if (r == 0) {
      cols = row.size();
      if (cols == 0)
        throw ValidationError(rp + ": empty row");
      m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (row.size() != cols) {
      throw ValidationError(rp + ": ragged matrix rows");
    }
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          complexFromJson(row[c], rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

json gridToJson(const FrequencyGrid &g) {
  json j;
  j["omega_min"] = g.omegaMin();
  j["omega_max"] = g.omegaMax();
  j["bins"] = g.bins();
  j["scheme"] =
      g.scheme() == FrequencyGrid::Scheme::Uniform ? "uniform" : "trapezoid";
  return j;
}

GridPtr gridFromJson(const json &j, const std::string &path) {
  if (!j.is_object())
    throw ValidationError(path + ": expected object");
  rejectUnknownKeys(j, {"omega_min", "omega_max", "bins", "scheme"}, path);
  const double lo = requireNumber(j, "omega_min", path);
  const double hi = requireNumber(j, "omega_max", path);
  const int bins = requireInt(j, "bins", path);
  std::string scheme = "uniform";
  if (j.contains("scheme")) {
    if (!j["scheme"].is_string())
      throw ValidationError(path + ".scheme: expected string");
    scheme = j["scheme"].get<std::string>();
  }
  try {
    if (scheme == "uniform")
      return makeUniformGrid(lo, hi, bins);
    if (scheme == "trapezoid")
      return makeTrapezoidGrid(lo, hi, bins);
  } catch (const ValidationError &e) {
    throw ValidationError(path + ": " + e.what());
  }
  throw ValidationError(path + ".scheme: must be \"uniform\" or \"trapezoid\"");
}

void rejectUnknownKeys(const json &obj, std::initializer_list<const char *> allowed,
                       const std::string &path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char *k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ValidationError(path + ": unknown field \"" + it.key() + "\"");
  }
}

const json &requireKey(const json &obj, const char *key, const std::string &path) {
  if (!obj.is_object() || !obj.contains(key))
    throw ValidationError(path + ": missing required field \"" + key + "\"");
  return obj.at(key);
}

double requireNumber(const json &obj, const char *key, const std::string &path) {
  const json &v = requireKey(obj, key, path);
  if (!v.is_number())
    throw ValidationError(path + "." + key + ": expected number");
  return v.get<double>();
}

int requireInt(const json &obj, const char *key, const std::string &path) {
  const json &v = requireKey(obj, key, path);
  if (!v.is_number_integer())
    throw ValidationError(path + "." + key + ": expected integer");
  return v.get<int>();
}

std::string requireString(const json &obj, const char *key, const std::string &path) {
  const json &v = requireKey(obj, key, path);
  if (!v.is_string())
    throw ValidationError(path + "." + key + ": expected string");
  return v.get<std::string>();
}

}  // namespace photonnet
