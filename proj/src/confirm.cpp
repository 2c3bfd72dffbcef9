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

#include "tilecheck/confirm.hpp"

#include <set>
#include <tuple>
#include <utility>

#include "tilecheck/diag.hpp"

namespace tilecheck {

namespace {

TagValue materialize(const TagTable& table, Tag tag) {
  TagValue v;
  if (tag == kTagBottom) {
    v.kind = TagValue::kBot;
  } else if (tag == kTagTop) {
    v.kind = TagValue::kTop;
  } else {
    v.kind = TagValue::kTuple;
    v.tuple = table.tuple(tag);
  }
  return v;
}

}  // namespace

std::vector<Confirmation> confirm_violations(
    const ir::Program& prog,
    const std::map<std::string, interp::TensorValue>& inputs,
    const Report& report) {
  // Reported points name (statement, loop iteration); recover the code index.
  std::map<std::pair<int, std::vector<std::int64_t>>, std::int32_t> site_ci;
  for (std::size_t i = 0; i < prog.code.size(); ++i) {
    const ir::Instance& inst = prog.code[i];
    if (inst.kind == ir::Instance::Kind::kAssert) {
      site_ci[{inst.stmt, inst.instance}] = static_cast<std::int32_t>(i);
    }
  }

  struct Want {
    std::size_t out_index;
    std::int32_t ci;
    std::int64_t thread;
    const Violation* v;
  };
  std::map<std::int64_t, std::vector<Want>> by_block;
  std::size_t n = 0;
  for (const AssertResult& a : report.assertions) {
    for (const Violation& v : a.shown) {
      auto it = site_ci.find({v.point.stmt, v.point.instance});
      if (it == site_ci.end()) {
        throw Error(ErrorKind::kInternal,
                    "reported violation does not name an assert instance");
      }
      const std::int64_t block = v.gtid / prog.threads;
      const std::int64_t thread = v.gtid % prog.threads;
      by_block[block].push_back({n++, it->second, thread, &v});
    }
  }

  std::vector<Confirmation> out(n);
  for (const auto& [block, wants] : by_block) {
    std::set<std::pair<std::int32_t, std::int64_t>> keys;
    for (const Want& w : wants) keys.insert({w.ci, w.thread});

    interp::DynOptions opts;
    opts.captures = true;
    opts.store_log = false;
    opts.only_block = block;
    opts.capture_filter = [&keys](std::int32_t ci, std::int64_t t) {
      return keys.count({ci, t}) != 0;
    };
    interp::DynamicRunResult r = interp::run_with_tags(prog, inputs, opts);

    std::map<std::tuple<std::int32_t, std::int64_t, std::vector<std::int64_t>>,
             const interp::AssertCapture*>
        caps;
    for (const interp::AssertCapture& c : r.log.captures) {
      caps[{c.code_index, c.thread, c.qpoint}] = &c;
    }

    for (const Want& w : wants) {
      auto it = caps.find({w.ci, w.thread, w.v->qpoint});
      if (it == caps.end()) {
        throw Error(ErrorKind::kInternal,
                    "no executed comparison matches the reported violation");
      }
      const interp::AssertCapture& c = *it->second;
      Confirmation& conf = out[w.out_index];
      conf.dynamic_left = materialize(r.tags, c.left_tag);
      conf.dynamic_right = materialize(r.tags, c.right_tag);
      conf.tag_mismatch =
          !tags_conform(prog.code[w.ci].assert_op, c.left_tag, c.right_tag);
      const bool left_top = w.v->left_tag.kind == TagValue::kTop;
      const bool right_top = w.v->right_tag.kind == TagValue::kTop;
      conf.unstable_operand = (left_top && c.left_unstable) ||
                              (right_top && c.right_unstable);
      conf.phase_hazard = (left_top || right_top) && c.phase_hazard;
      conf.confirmed =
          conf.tag_mismatch || conf.unstable_operand || conf.phase_hazard;
    }
  }
  return out;
}

}  // namespace tilecheck
