#include "sns/network_io.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "sns/error.hpp"

namespace sns {
namespace detail {

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const nlohmann::json& rows, int n, const char* name) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != n) {
    throw InvalidParameter(std::string("params json: ") + name +
                           " must have n rows");
  }
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n) {
      throw InvalidParameter(std::string("params json: ") + name +
                             " must have n columns");
    }
    for (int j = 0; j < n; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

Vector vector_from(const nlohmann::json& arr, int n, const char* name) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != n) {
    throw InvalidParameter(std::string("params json: ") + name +
                           " must have length n");
  }
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = arr[i].get<double>();
  return v;
}

}  // namespace

nlohmann::json params_json(const NetworkParams& p) {
  nlohmann::json doc;
  doc["n"] = p.n;
  doc["dt"] = p.dt;
  doc["e_lo"] = p.e_lo;
  doc["e_hi"] = p.e_hi;
  doc["tau"] = std::vector<double>(p.tau.data(), p.tau.data() + p.tau.size());
  doc["b"] = std::vector<double>(p.b.data(), p.b.data() + p.b.size());
  doc["W"] = matrix_json(p.W);
  doc["V"] = matrix_json(p.V);
  auto mask = nlohmann::json::array();
  for (int i = 0; i < p.n; ++i) {
    auto row = nlohmann::json::array();
    for (int j = 0; j < p.n; ++j) row.push_back(static_cast<bool>(p.mask(i, j)));
    mask.push_back(std::move(row));
  }
  doc["mask"] = std::move(mask);
  doc["clamped"] = p.clamped;
  return doc;
}

NetworkParams params_from(const nlohmann::json& doc) {
  try {
    const int n = doc.at("n").get<int>();
    if (n < 0) throw InvalidParameter("params json: negative n");
    NetworkParams p = NetworkParams::zeros(n, doc.at("dt").get<double>(),
                                           doc.at("e_lo").get<double>(),
                                           doc.at("e_hi").get<double>());
    p.tau = vector_from(doc.at("tau"), n, "tau");
    p.b = vector_from(doc.at("b"), n, "b");
    p.W = matrix_from(doc.at("W"), n, "W");
    p.V = matrix_from(doc.at("V"), n, "V");
    const auto& mask = doc.at("mask");
    if (!mask.is_array() || static_cast<int>(mask.size()) != n) {
      throw InvalidParameter("params json: mask must have n rows");
    }
    for (int i = 0; i < n; ++i) {
      if (!mask[i].is_array() || static_cast<int>(mask[i].size()) != n) {
        throw InvalidParameter("params json: mask must have n columns");
      }
      for (int j = 0; j < n; ++j) p.mask(i, j) = mask[i][j].get<bool>();
    }
    p.clamped = doc.at("clamped").get<std::vector<int>>();
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("params json: ") + e.what());
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParameter("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing", path.string());
  out << text;
  if (!out) throw IoError("write failed", path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

std::string params_to_json(const NetworkParams& params, int indent) {
  return detail::params_json(params).dump(indent);
}

NetworkParams params_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParameter(std::string("params json: ") + e.what());
  }
  return detail::params_from(doc);
}

void save_params(const NetworkParams& params, const std::filesystem::path& path) {
  detail::write_text_file(path, params_to_json(params) + "\n");
}

NetworkParams load_params(const std::filesystem::path& path) {
  return detail::params_from(detail::read_json_file(path));
}

}  // namespace sns
