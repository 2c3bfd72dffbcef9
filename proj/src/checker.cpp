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

#include "tilecheck/checker.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <utility>

#include "json.hpp"
#include "tilecheck/ast.hpp"
#include "tilecheck/diag.hpp"
#include "tilecheck/engine.hpp"

namespace tilecheck {
namespace {

using nlohmann::ordered_json;

const char* cmp_str(ast::CmpOp op) {
  switch (op) {
    case ast::CmpOp::kLt: return "<";
    case ast::CmpOp::kLe: return "<=";
    case ast::CmpOp::kGt: return ">";
    case ast::CmpOp::kGe: return ">=";
    case ast::CmpOp::kEq: return "==";
    case ast::CmpOp::kNe: return "!=";
  }
  return "?";
}

// Violations are reported in block-then-thread-then-iteration order; the
// assert's own statement is fixed per list, so the key below is total.
bool violation_less(const Violation& a, const Violation& b) {
  if (a.gtid != b.gtid) return a.gtid < b.gtid;
  if (a.point.instance != b.point.instance) {
    return a.point.instance < b.point.instance;
  }
  return a.qpoint < b.qpoint;
}

SitePoint site_point(const ir::Program& prog, std::int32_t code_index) {
  const ir::Instance& inst = prog.code[static_cast<std::size_t>(code_index)];
  return {inst.stmt, inst.instance, inst.line};
}

// Per-worker accumulation; violations hold materialized tuples and sites, so
// nothing here depends on the worker's private intern tables.
struct WorkerState {
  std::vector<std::int64_t> checked, violations;  // per assert id
  std::vector<std::vector<Violation>> kept;       // bounded max-heaps
  std::exception_ptr error;

  explicit WorkerState(std::size_t asserts)
      : checked(asserts, 0), violations(asserts, 0), kept(asserts) {}
};

void run_worker(const ir::Program& prog, const CheckOptions& opts,
                int worker, int stride, WorkerState& out) {
  TagTable tags;
  ProvTable prov;
  const std::int64_t block_count = prog.blocks();

  auto materialize_tag = [&](Tag t) -> TagValue {
    if (t == kTagBottom) return {TagValue::kBot, {}};
    if (t == kTagTop) return {TagValue::kTop, {}};
    return {TagValue::kTuple, tags.tuple(t)};
  };
  auto materialize_sites = [&](Prov p) {
    std::vector<SitePoint> out_sites;
    for (std::int32_t s : prov.sites(p)) out_sites.push_back(site_point(prog, s));
    return out_sites;
  };

  for (std::int64_t block = worker; block < block_count; block += stride) {
    const std::int64_t bx = block % prog.grid_x;
    const std::int64_t by = block / prog.grid_x;
    analyze_block(prog, bx, by, tags, prov, [&](const Capture& c) {
      const ir::Instance& inst =
          prog.code[static_cast<std::size_t>(c.code_index)];
      const std::size_t id = static_cast<std::size_t>(inst.assert_id);
      ++out.checked[id];
      if (tags_conform(inst.assert_op, c.left_tag, c.right_tag)) return;
      ++out.violations[id];

      std::vector<Violation>& heap = out.kept[id];
      const std::size_t cap = static_cast<std::size_t>(
          opts.max_violations < 0 ? 0 : opts.max_violations);
      if (cap == 0) return;

      Violation v;
      v.gtid = block * prog.threads + c.thread;
      v.point = site_point(prog, c.code_index);
      v.qpoint = c.qpoint;
      v.left_coord = c.left_coord;
      v.right_coord = c.right_coord;
      // Skip the expensive materialization when this point already sorts
      // after everything the bounded heap would keep.
      if (heap.size() == cap && !violation_less(v, heap.front())) return;
      v.left_tag = materialize_tag(c.left_tag);
      v.right_tag = materialize_tag(c.right_tag);
      v.left_writers = materialize_sites(c.left_writers);
      v.right_writers = materialize_sites(c.right_writers);
      heap.push_back(std::move(v));
      std::push_heap(heap.begin(), heap.end(), violation_less);
      if (heap.size() > cap) {
        std::pop_heap(heap.begin(), heap.end(), violation_less);
        heap.pop_back();
      }
    });
  }
}

ordered_json tag_json(const TagValue& t) {
  if (t.kind == TagValue::kBot) return "bot";
  if (t.kind == TagValue::kTop) return "top";
  return t.tuple;
}

ordered_json point_json(const SitePoint& p) {
  return {{"stmt", p.stmt}, {"instance", p.instance}, {"line", p.line}};
}

}  // namespace

std::string TagValue::str() const {
  if (kind == kBot) return "bot";
  if (kind == kTop) return "top";
  std::string out = "(";
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(tuple[i]);
  }
  return out + ")";
}

bool tags_conform(ast::CmpOp op, Tag left, Tag right) {
  if (op == ast::CmpOp::kEq) {
    // Top can never be shown equal to anything, including itself.
    return left == right && left != kTagTop;
  }
  return left != kTagTop && right != kTagTop && left != right;
}

Report check(const ir::Program& prog, const CheckOptions& opts) {
  const std::int64_t domain = prog.blocks() * prog.threads *
                              static_cast<std::int64_t>(prog.code.size());
  if (domain > opts.domain_cap) {
    throw Error(ErrorKind::kCap,
                "launch domain of " + std::to_string(domain) +
                    " block-thread-statements exceeds the cap of " +
                    std::to_string(opts.domain_cap));
  }

  const std::size_t asserts = static_cast<std::size_t>(prog.num_asserts);
  int workers = opts.workers < 1 ? 1 : opts.workers;
  if (workers > prog.blocks()) workers = static_cast<int>(prog.blocks());
  if (workers < 1) workers = 1;

  std::vector<WorkerState> states;
  states.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) states.emplace_back(asserts);

  if (workers == 1) {
    run_worker(prog, opts, 0, 1, states[0]);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          run_worker(prog, opts, w, workers, states[static_cast<std::size_t>(w)]);
        } catch (...) {
          states[static_cast<std::size_t>(w)].error = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const WorkerState& s : states) {
      if (s.error) std::rethrow_exception(s.error);
    }
  }

  // Metadata for each assert statement that produced instances.
  std::vector<const ir::Instance*> meta(asserts, nullptr);
  for (const ir::Instance& inst : prog.code) {
    if (inst.kind != ir::Instance::Kind::kAssert) continue;
    const ir::Instance*& slot = meta[static_cast<std::size_t>(inst.assert_id)];
    if (slot == nullptr) slot = &inst;
  }

  Report report;
  for (std::size_t id = 0; id < asserts; ++id) {
    if (meta[id] == nullptr) continue;
    AssertResult res;
    res.id = static_cast<int>(id);
    res.line = meta[id]->line;
    res.comparison = ast::print(meta[id]->assert_left) + " " +
                     cmp_str(meta[id]->assert_op) + " " +
                     ast::print(meta[id]->assert_right);
    for (const WorkerState& s : states) {
      res.checked += s.checked[id];
      res.violations += s.violations[id];
      res.shown.insert(res.shown.end(), s.kept[id].begin(), s.kept[id].end());
    }
    std::sort(res.shown.begin(), res.shown.end(), violation_less);
    const std::size_t cap = static_cast<std::size_t>(
        opts.max_violations < 0 ? 0 : opts.max_violations);
    if (res.shown.size() > cap) res.shown.resize(cap);
    report.checked += res.checked;
    if (res.violations > 0) report.pass = false;
    report.assertions.push_back(std::move(res));
  }
  return report;
}

std::string Report::json() const {
  ordered_json j;
  j["status"] = pass ? "pass" : "fail";
  j["checked"] = checked;
  j["assertions"] = ordered_json::array();
  for (const AssertResult& a : assertions) {
    ordered_json ja;
    ja["id"] = a.id;
    ja["line"] = a.line;
    ja["comparison"] = a.comparison;
    ja["checked"] = a.checked;
    ja["violations"] = a.violations;
    ja["shown"] = ordered_json::array();
    for (const Violation& v : a.shown) {
      ordered_json jv;
      jv["assertion_id"] = a.id;
      jv["point"] = point_json(v.point);
      jv["thread"] = v.gtid;
      jv["left"] = {{"coord", v.left_coord}, {"tag", tag_json(v.left_tag)}};
      jv["right"] = {{"coord", v.right_coord}, {"tag", tag_json(v.right_tag)}};
      jv["writers"] = ordered_json::object();
      jv["writers"]["left"] = ordered_json::array();
      for (const SitePoint& p : v.left_writers) {
        jv["writers"]["left"].push_back(point_json(p));
      }
      jv["writers"]["right"] = ordered_json::array();
      for (const SitePoint& p : v.right_writers) {
        jv["writers"]["right"].push_back(point_json(p));
      }
      ja["shown"].push_back(std::move(jv));
    }
    j["assertions"].push_back(std::move(ja));
  }
  return j.dump(2) + "\n";
}

namespace {

std::string int_list(const std::vector<std::int64_t>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(v[i]);
  }
  return out + "]";
}

std::string writers_str(const std::vector<SitePoint>& sites) {
  if (sites.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (i > 0) out += ", ";
    out += "line " + std::to_string(sites[i].line) + " " +
           int_list(sites[i].instance);
  }
  return out;
}

}  // namespace

std::string Report::text() const {
  std::string out = "status: ";
  out += pass ? "pass" : "fail";
  out += "\nchecked: " + std::to_string(checked) + "\n";
  for (const AssertResult& a : assertions) {
    out += "assert #" + std::to_string(a.id) + " line " +
           std::to_string(a.line) + ": " + a.comparison + "\n";
    out += "  checked: " + std::to_string(a.checked) +
           ", violations: " + std::to_string(a.violations);
    if (a.violations > static_cast<std::int64_t>(a.shown.size())) {
      out += ", showing first " + std::to_string(a.shown.size());
    }
    out += "\n";
    for (const Violation& v : a.shown) {
      out += "  thread " + std::to_string(v.gtid) + " instance " +
             int_list(v.point.instance) + " point " + int_list(v.qpoint) +
             "\n";
      out += "    left  " + int_list(v.left_coord) + " = " +
             v.left_tag.str() + "  (writers: " + writers_str(v.left_writers) +
             ")\n";
      out += "    right " + int_list(v.right_coord) + " = " +
             v.right_tag.str() + "  (writers: " +
             writers_str(v.right_writers) + ")\n";
    }
  }
  return out;
}

}  // namespace tilecheck
