#pragma once
#include <nlohmann/json.hpp>

#include "photonnet/grid.hpp"
#include "photonnet/types.hpp"

namespace photonnet {

using json = nlohmann::ordered_json;

// Complex numbers are serialized as [re, im]; vectors as arrays of those;
// matrices as arrays of rows.

json complexToJson(const Complex &z);
Complex complexFromJson(const json &j, const std::string &path);

json vectorToJson(const VecXc &v);
VecXc vectorFromJson(const json &j, const std::string &path);

json matrixToJson(const MatXc &m);
MatXc matrixFromJson(const json &j, const std::string &path);

json gridToJson(const FrequencyGrid &g);
GridPtr gridFromJson(const json &j, const std::string &path);

/// Strict-object helper: rejects keys outside `allowed`, reporting the path.
void rejectUnknownKeys(const json &obj, std::initializer_list<const char *> allowed,
                       const std::string &path);

/// Fetches a required key or throws ValidationError naming the path.
const json &requireKey(const json &obj, const char *key, const std::string &path);

double requireNumber(const json &obj, const char *key, const std::string &path);
int requireInt(const json &obj, const char *key, const std::string &path);
std::string requireString(const json &obj, const char *key, const std::string &path);

}  // namespace photonnet
