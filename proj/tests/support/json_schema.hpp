// Copyright 2026 The CoMRAT Authors
//
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

#pragma once

// Validator for the subset of JSON Schema used by schema/report.schema.json:
// type, properties, required, additionalProperties (bool), items, enum,
// const, minimum, maximum, minItems, pattern.

#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

namespace comrat::testing {

inline bool json_type_matches(const nlohmann::json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "integer") return v.is_number_integer() || (v.is_number_float() && v.get<double>() == static_cast<long long>(v.get<double>()));
  if (type == "number") return v.is_number();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  return false;
}

inline void validate_json(const nlohmann::json& schema, const nlohmann::json& v, const std::string& path,
                          std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    bool ok = false;
    if (schema["type"].is_array()) {
      for (const auto& t : schema["type"]) ok = ok || json_type_matches(v, t.get<std::string>());
    } else {
      ok = json_type_matches(v, schema["type"].get<std::string>());
    }
    if (!ok) {
      errors.push_back(path + ": type mismatch, expected " + schema["type"].dump());
      return;
    }
  }
  if (schema.contains("const") && v != schema["const"]) errors.push_back(path + ": const mismatch");
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == v;
    if (!found) errors.push_back(path + ": value not in enum");
  }
  if (v.is_number()) {
    if (schema.contains("minimum") && v.get<double>() < schema["minimum"].get<double>()) {
      errors.push_back(path + ": below minimum");
    }
    if (schema.contains("maximum") && v.get<double>() > schema["maximum"].get<double>()) {
      errors.push_back(path + ": above maximum");
    }
  }
  if (v.is_string() && schema.contains("pattern")) {
    if (!std::regex_search(v.get<std::string>(), std::regex(schema["pattern"].get<std::string>()))) {
      errors.push_back(path + ": does not match pattern");
    }
  }
  if (v.is_object()) {
    if (schema.contains("required")) {
      for (const auto& r : schema["required"]) {
        if (!v.contains(r.get<std::string>())) errors.push_back(path + ": missing required " + r.get<std::string>());
      }
    }
    const auto props = schema.value("properties", nlohmann::json::object());
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (props.contains(it.key())) {
        validate_json(props[it.key()], it.value(), path + "/" + it.key(), errors);
      } else if (schema.contains("additionalProperties") && schema["additionalProperties"] == false) {
        errors.push_back(path + ": unexpected property " + it.key());
      }
    }
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>()) {
      errors.push_back(path + ": too few items");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        validate_json(schema["items"], v[i], path + "/" + std::to_string(i), errors);
      }
    }
  }
}

inline std::vector<std::string> validate_json(const nlohmann::json& schema, const nlohmann::json& v) {
  std::vector<std::string> errors;
  validate_json(schema, v, "", errors);
  return errors;
}

/// Tag-balance and attribute-quoting check; enough to reject truncated or
/// mis-escaped SVG output.
inline bool xml_well_formed(const std::string& xml, std::string* why = nullptr) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg + " at offset " + std::to_string(i);
    return false;
  };
  bool saw_root = false;
  while (i < xml.size()) {
    if (xml[i] == '&') {
      const auto semi = xml.find(';', i);
      if (semi == std::string::npos || semi - i > 8) return fail("bare ampersand");
      i = semi + 1;
      continue;
    }
    if (xml[i] != '<') {
      ++i;
      continue;
    }
    if (xml.compare(i, 5, "<?xml") == 0) {
      const auto end = xml.find("?>", i);
      if (end == std::string::npos) return fail("unterminated declaration");
      i = end + 2;
      continue;
    }
    const auto end = xml.find('>', i);
    if (end == std::string::npos) return fail("unterminated tag");
    std::string tag = xml.substr(i + 1, end - i - 1);
    if (tag.find('<') != std::string::npos) return fail("'<' inside tag");
    std::size_t quotes = 0;
    for (char c : tag) quotes += c == '"';
    if (quotes % 2) return fail("unbalanced attribute quotes");
    if (!tag.empty() && tag[0] == '/') {
      const auto name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return fail("mismatched closing tag " + name);
      stack.pop_back();
    } else if (!tag.empty() && tag.back() == '/') {
      if (stack.empty() && saw_root) return fail("content after root");
    } else {
      const auto name = tag.substr(0, tag.find_first_of(" \t\n"));
      if (stack.empty() && saw_root) return fail("second root element");
      saw_root = true;
      stack.push_back(name);
    }
    i = end + 1;
  }
  if (!stack.empty()) return fail("unclosed element " + stack.back());
  return saw_root;
}

}  // namespace comrat::testing
