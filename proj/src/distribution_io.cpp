#include "mhtest/distribution_io.hpp"

#include <fstream>
#include <sstream>

#include "mhtest/errors.hpp"

namespace mhtest {

namespace {

int require_size(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw InvalidArgument(std::string("missing field \"") + key + "\"");
  const auto& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw InvalidArgument(std::string("field \"") + key + "\" must be a positive integer");
  }
  return v.get<int>();
}

}  // namespace

JointDistribution parse_distribution(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InvalidArgument("distribution document must be a JSON object");
  const int xs = require_size(doc, "x_size");
  const int ys = require_size(doc, "y_size");
  if (!doc.contains("p") || !doc.at("p").is_array()) {
    throw InvalidArgument("field \"p\" must be an array of rows");
  }
  const auto& rows = doc.at("p");
  if (rows.size() != static_cast<std::size_t>(xs)) {
    std::ostringstream os;
    os << "field \"p\" has " << rows.size() << " rows, x_size is " << xs;
    throw InvalidArgument(os.str());
  }
  Table p(xs, ys);
  for (int x = 0; x < xs; ++x) {
    const auto& row = rows.at(static_cast<std::size_t>(x));
    if (!row.is_array() || row.size() != static_cast<std::size_t>(ys)) {
      std::ostringstream os;
      os << "row " << x << " of \"p\" must be an array of " << ys << " numbers";
      throw InvalidArgument(os.str());
    }
    for (int y = 0; y < ys; ++y) {
      const auto& cell = row.at(static_cast<std::size_t>(y));
      if (!cell.is_number()) {
        std::ostringstream os;
        os << "row " << x << ", column " << y << " of \"p\" is not a number";
        throw InvalidArgument(os.str());
      }
      p(x, y) = cell.get<double>();
    }
  }
  return JointDistribution(std::move(p));
}

JointDistribution parse_distribution(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports "... at line L, column C: ..." in what().
    throw InvalidArgument(std::string("malformed distribution document: ") + e.what());
  }
  return parse_distribution(doc);
}

JointDistribution load_distribution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open distribution file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_distribution(buf.str());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

nlohmann::json table_to_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index x = 0; x < t.rows(); ++x) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index y = 0; y < t.cols(); ++y) row.push_back(t(x, y));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const JointDistribution& d) {
  return {{"x_size", d.x_size()}, {"y_size", d.y_size()}, {"p", table_to_json(d.table())}};
}

}  // namespace mhtest
