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

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#ifndef TILECHECK_FIXTURE_DIR
#define TILECHECK_FIXTURE_DIR "fixtures"
#endif

namespace testutil {

inline std::string fixture_path(const std::string& name) {
  return std::string(TILECHECK_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string read_fixture(const std::string& name) {
  return read_file(fixture_path(name));
}

// The constant bindings every test binds a fixture with, so expected
// values stay comparable across suites.
inline std::map<std::string, std::int64_t> fixture_bindings(
    const std::string& name) {
  if (name == "flash_attn.tk") {
    return {{"sq", 128}, {"hq", 8},   {"hkv", 1},
            {"d", 128},  {"gqa", 8},  {"threads", 512}};
  }
  if (name == "gemm_staged.tk") {
    return {{"m", 64}, {"n", 64}, {"k", 64}, {"threads", 128}};
  }
  if (name == "select_guard.tk") return {{"n", 100}, {"threads", 128}};
  if (name == "pipeline_reuse.tk") return {{"n", 4}, {"threads", 64}};
  if (name == "two_writers.tk") return {{"threads", 64}};
  if (name == "copy_shared.tk") return {{"threads", 64}};
  if (name == "single_mfma.tk") return {{"threads", 64}};
  throw std::runtime_error("no standard bindings for " + name);
}

// Replaces exactly one occurrence; throws if the needle is missing so a
// drifted fixture cannot silently turn a mutation test into a no-op.
inline std::string mutate(std::string src, const std::string& from,
                          const std::string& to) {
  std::size_t at = src.find(from);
  if (at == std::string::npos) {
    throw std::runtime_error("mutation target not found: " + from);
  }
  src.replace(at, from.size(), to);
  return src;
}

}  // namespace testutil
