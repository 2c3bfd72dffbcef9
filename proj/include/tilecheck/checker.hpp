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
#include <string>
#include <vector>

#include "tilecheck/ir.hpp"
#include "tilecheck/tags.hpp"

namespace tilecheck {

struct CheckOptions {
  // Worker threads; blocks are partitioned across them. Any value produces
  // byte-identical reports.
  int workers = 1;
  // Violations retained per assert statement (the earliest in block, thread,
  // loop-iteration, point order); the full count is still reported.
  int max_violations = 16;
  // Cap on blocks * threads * instances; larger launches are refused rather
  // than churned through.
  std::int64_t domain_cap = std::int64_t{1} << 26;
};

// A tag with its content materialized, valid independent of any table.
struct TagValue {
  enum { kBot, kTop, kTuple } kind = kBot;
  std::vector<std::int64_t> tuple;

  std::string str() const;
  bool operator==(const TagValue&) const = default;
};

// A program point: a statement instance identified for reporting.
struct SitePoint {
  int stmt = -1;
  std::vector<std::int64_t> instance;
  int line = 0;

  bool operator==(const SitePoint&) const = default;
};

// One failing comparison, fully materialized.
struct Violation {
  std::int64_t gtid = 0;  // (by * grid_x + bx) * threads + tid
  SitePoint point;        // the assert instance
  std::vector<std::int64_t> qpoint;
  std::vector<std::int64_t> left_coord, right_coord;
  TagValue left_tag, right_tag;
  std::vector<SitePoint> left_writers, right_writers;
};

struct AssertResult {
  int id = 0;
  int line = 0;
  std::string comparison;  // e.g. "tag(b[e]) != tag(a[e])"
  std::int64_t checked = 0;
  std::int64_t violations = 0;  // total, not just the retained ones
  std::vector<Violation> shown;
};

struct Report {
  bool pass = true;
  std::int64_t checked = 0;
  std::vector<AssertResult> assertions;

  // Stable renderings; field order and formatting are part of the tool's
  // contract (see docs/formats.md and docs/violation.schema.json).
  std::string json() const;
  std::string text() const;
};

// True when this comparison holds: equality needs both sides bottom or the
// same tuple (an unknown side can never be shown equal); inequality needs
// two known, different values.
bool tags_conform(ast::CmpOp op, Tag left, Tag right);

// Runs the dataflow over every block of the launch and collects the report.
// Throws kCap when the domain exceeds opts.domain_cap.
Report check(const ir::Program& prog, const CheckOptions& opts = {});

}  // namespace tilecheck
