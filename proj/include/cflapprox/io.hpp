// Copyright 2026 The cflapprox Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON files for instances and integral solutions.
//
// Instance:
//   {"facilities": [{"open_cost": 1.5, "capacity": 3}, ...],
//    "n_clients": 4,
//    "metric": [[...], ...]}
// with the metric indexed facilities first, then clients.
//
// Solution:
//   {"open": [true, false, ...], "assign": [0, 0, 2, ...], "cost": 7.25}
//
// Loading checks shape only. Metric properties are Validate()'s job.

#ifndef CFLAPPROX_IO_HPP_
#define CFLAPPROX_IO_HPP_

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cflapprox/common.hpp"
#include "cflapprox/instance.hpp"
#include "json.hpp"

namespace cflapprox::io {

using Json = nlohmann::json;

namespace internal {

inline int LineOf(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
}

inline const Json& Field(const Json& obj, const char* key,
                         const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(where + ": missing field \"" + key + "\"");
  }
  return *it;
}

inline double Number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

inline long long Integer(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
  return v.get<long long>();
}

}  // namespace internal

// Parses JSON text. `source` names the input in error messages.
inline Json ParseJson(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // e.byte is one past the offending character.
    const int line = internal::LineOf(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(source + ":" + std::to_string(line) + ": " + e.what());
  }
}

inline std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << text;
  if (!out.flush()) throw ParseError(path + ": write failed");
}

inline Json InstanceToJson(const Instance& inst) {
  Json j;
  Json fac = Json::array();
  for (const Facility& f : inst.facilities()) {
    fac.push_back({{"open_cost", f.open_cost}, {"capacity", f.capacity}});
  }
  j["facilities"] = std::move(fac);
  j["n_clients"] = inst.num_clients();
  Json metric = Json::array();
  for (int a = 0; a < inst.num_nodes(); ++a) {
    Json row = Json::array();
    for (int b = 0; b < inst.num_nodes(); ++b) row.push_back(inst.distance(a, b));
    metric.push_back(std::move(row));
  }
  j["metric"] = std::move(metric);
  return j;
}

inline Instance InstanceFromJson(const Json& j, const std::string& source) {
  using internal::Field;
  if (!j.is_object()) throw ParseError(source + ": expected a JSON object");
  const Json& fac = Field(j, "facilities", source);
  if (!fac.is_array()) throw ParseError(source + ": facilities must be an array");
  std::vector<Facility> facilities;
  for (std::size_t i = 0; i < fac.size(); ++i) {
    const std::string where = source + ": facilities[" + std::to_string(i) + "]";
    if (!fac[i].is_object()) throw ParseError(where + ": expected an object");
    Facility f;
    f.open_cost = internal::Number(Field(fac[i], "open_cost", where),
                                   where + ".open_cost");
    f.capacity = static_cast<int>(internal::Integer(
        Field(fac[i], "capacity", where), where + ".capacity"));
    facilities.push_back(f);
  }
  const long long nd =
      internal::Integer(Field(j, "n_clients", source), source + ": n_clients");
  if (nd < 0) throw ParseError(source + ": n_clients is negative");
  const Json& metric = Field(j, "metric", source);
  const std::size_t n = facilities.size() + static_cast<std::size_t>(nd);
  if (!metric.is_array() || metric.size() != n) {
    throw ParseError(source + ": metric must have " + std::to_string(n) +
                     " rows");
  }
  Matrix<double> m(static_cast<int>(n), static_cast<int>(n));
  for (std::size_t a = 0; a < n; ++a) {
    const std::string where = source + ": metric[" + std::to_string(a) + "]";
    if (!metric[a].is_array() || metric[a].size() != n) {
      throw ParseError(where + ": expected " + std::to_string(n) + " entries");
    }
    for (std::size_t b = 0; b < n; ++b) {
      m(static_cast<int>(a), static_cast<int>(b)) = internal::Number(
          metric[a][b], where + "[" + std::to_string(b) + "]");
    }
  }
  return Instance(std::move(facilities), static_cast<int>(nd), std::move(m));
}

inline Instance ParseInstance(const std::string& text,
                              const std::string& source = "<string>") {
  return InstanceFromJson(ParseJson(text, source), source);
}

inline Instance LoadInstance(const std::string& path) {
  return ParseInstance(ReadFile(path), path);
}

inline void SaveInstance(const std::string& path, const Instance& inst) {
  WriteFile(path, InstanceToJson(inst).dump(1) + "\n");
}

inline Json SolutionToJson(const IntegralSolution& s, double cost) {
  Json open = Json::array();
  for (bool b : s.open) open.push_back(b);
  return {{"open", std::move(open)}, {"assign", s.assign}, {"cost", cost}};
}

inline IntegralSolution SolutionFromJson(const Json& j,
                                         const std::string& source) {
  using internal::Field;
  if (!j.is_object()) throw ParseError(source + ": expected a JSON object");
  IntegralSolution s;
  const Json& open = Field(j, "open", source);
  const Json& assign = Field(j, "assign", source);
  if (!open.is_array() || !assign.is_array()) {
    throw ParseError(source + ": open and assign must be arrays");
  }
  for (std::size_t i = 0; i < open.size(); ++i) {
    if (open[i].is_boolean()) {
      s.open.push_back(open[i].get<bool>());
    } else if (open[i].is_number_integer()) {
      s.open.push_back(open[i].get<long long>() != 0);
    } else {
      throw ParseError(source + ": open[" + std::to_string(i) +
                       "]: expected a boolean");
    }
  }
  for (std::size_t k = 0; k < assign.size(); ++k) {
    s.assign.push_back(static_cast<int>(internal::Integer(
        assign[k], source + ": assign[" + std::to_string(k) + "]")));
  }
  return s;
}

inline IntegralSolution LoadSolution(const std::string& path) {
  return SolutionFromJson(ParseJson(ReadFile(path), path), path);
}

inline void SaveSolution(const std::string& path, const IntegralSolution& s,
                         double cost) {
  WriteFile(path, SolutionToJson(s, cost).dump(1) + "\n");
}

}  // namespace cflapprox::io

#endif  // CFLAPPROX_IO_HPP_
