#pragma once

#include <string>

#include "json.hpp"
#include "mhtest/distribution.hpp"

namespace mhtest {

// Distribution documents look like
//   {"x_size": 2, "y_size": 2, "p": [[0.5, 0.125], [0.125, 0.25]]}
// with one inner array per x. Parse failures and invariant violations throw
// InvalidArgument whose message names the offending line, row or cell.
JointDistribution parse_distribution(const std::string& text);
JointDistribution parse_distribution(const nlohmann::json& doc);
inline JointDistribution parse_distribution(const char* text) {
  return parse_distribution(std::string(text));
}
JointDistribution load_distribution(const std::string& path);

nlohmann::json to_json(const JointDistribution& d);
nlohmann::json table_to_json(const Table& t);

}  // namespace mhtest
