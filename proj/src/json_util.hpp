#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "litlvm/core.hpp"
#include "litlvm/errors.hpp"

namespace litlvm::detail {

using json = nlohmann::json;

// Error type is a template argument so config files report ConfigError and
// model files DataError.
template <class E>
void require_object(const json& j, std::string_view where) {
  if (!j.is_object()) throw E(std::string(where) + " must be a JSON object");
}

template <class E>
void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view where) {
  require_object<E>(j, where);
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || item.key() == a;
    if (!known) throw E("unknown key '" + item.key() + "' in " + std::string(where));
  }
}

template <class E>
const json& member(const json& j, const char* key, std::string_view where) {
  const auto it = j.find(key);
  if (it == j.end()) throw E("missing key '" + std::string(key) + "' in " + std::string(where));
  return *it;
}

template <class T, class E>
T as(const json& j, std::string_view what) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw E(std::string(what) + ": " + e.what());
  }
}

template <class T, class E>
T value_or(const json& j, const char* key, T fallback, std::string_view where) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  return as<T, E>(*it, std::string(where) + "." + key);
}

inline json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline json to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

template <class E>
Vector vector_from(const json& j, std::string_view what) {
  const auto values = as<std::vector<double>, E>(j, what);
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// Rows of equal length; `cols` fixes the width when there are no rows.
template <class E>
Matrix matrix_from(const json& j, std::string_view what, Eigen::Index cols = 0) {
  const auto rows = as<std::vector<std::vector<double>>, E>(j, what);
  if (!rows.empty()) cols = static_cast<Eigen::Index>(rows.front().size());
  Matrix out(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != cols) {
      throw E(std::string(what) + ": ragged rows");
    }
    for (Eigen::Index k = 0; k < cols; ++k) out(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
  }
  return out;
}

// FNV-1a, for short stable content hashes.
inline std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return out;
}

}  // namespace litlvm::detail
