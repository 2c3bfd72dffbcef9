// Copyright 2026 The Tilecheck Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// A deliberately small JSON-schema checker covering exactly the keywords
// docs/violation.schema.json uses: type, enum, oneOf, $ref into
// #/definitions, required, properties, additionalProperties:false, items,
// and minimum. Independent of the report writer, so it can call out shape
// drift the writer itself would never notice.

#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace testutil {

class SchemaWalker {
 public:
  explicit SchemaWalker(const nlohmann::json& schema) : root_(schema) {}

  // Returns human-readable mismatches; empty means the instance conforms.
  std::vector<std::string> validate(const nlohmann::json& instance) {
    errors_.clear();
    walk(root_, instance, "$");
    return errors_;
  }

 private:
  using json = nlohmann::json;

  void fail(const std::string& path, const std::string& what) {
    errors_.push_back(path + ": " + what);
  }

  const json& deref(const json& schema) {
    if (schema.contains("$ref")) {
      std::string ref = schema["$ref"].get<std::string>();
      const std::string prefix = "#/definitions/";
      if (ref.rfind(prefix, 0) == 0) {
        return root_["definitions"][ref.substr(prefix.size())];
      }
    }
    return schema;
  }

  static bool type_matches(const std::string& type, const json& v) {
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "integer") return v.is_number_integer();
    if (type == "number") return v.is_number();
    if (type == "boolean") return v.is_boolean();
    if (type == "null") return v.is_null();
    return false;
  }

  void walk(const json& schema_in, const json& v, const std::string& path) {
    const json& schema = deref(schema_in);

    if (schema.contains("oneOf")) {
      int matches = 0;
      for (const json& alt : schema["oneOf"]) {
        SchemaWalker sub(root_);
        sub.walk(sub.deref(alt), v, path);
        if (sub.errors_.empty()) ++matches;
      }
      if (matches != 1) {
        fail(path, "matches " + std::to_string(matches) +
                       " oneOf alternatives instead of exactly one");
      }
      return;
    }

    if (schema.contains("enum")) {
      bool hit = false;
      for (const json& allowed : schema["enum"]) hit = hit || allowed == v;
      if (!hit) fail(path, "value " + v.dump() + " not in enum");
      return;
    }

    if (schema.contains("type")) {
      std::string type = schema["type"].get<std::string>();
      if (!type_matches(type, v)) {
        fail(path, "expected " + type + ", got " + std::string(v.type_name()));
        return;
      }
    }

    if (schema.contains("minimum") && v.is_number()) {
      if (v.get<double>() < schema["minimum"].get<double>()) {
        fail(path, "value " + v.dump() + " below minimum");
      }
    }

    if (v.is_object()) {
      if (schema.contains("required")) {
        for (const json& key : schema["required"]) {
          if (!v.contains(key.get<std::string>())) {
            fail(path, "missing required key '" + key.get<std::string>() + "'");
          }
        }
      }
      const json* props =
          schema.contains("properties") ? &schema["properties"] : nullptr;
      bool sealed = schema.contains("additionalProperties") &&
                    schema["additionalProperties"].is_boolean() &&
                    !schema["additionalProperties"].get<bool>();
      for (const auto& [key, val] : v.items()) {
        if (props != nullptr && props->contains(key)) {
          walk((*props)[key], val, path + "." + key);
        } else if (sealed) {
          fail(path, "unexpected key '" + key + "'");
        }
      }
    }

    if (v.is_array() && schema.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        walk(schema["items"], v[i], path + "[" + std::to_string(i) + "]");
      }
    }
  }

  const json& root_;
  std::vector<std::string> errors_;
};

}  // namespace testutil
