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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "schema_walker.hpp"
#include "testutil.hpp"
#include "tilecheck/checker.hpp"
#include "tilecheck/diag.hpp"
#include "tilecheck/lower.hpp"
#include "tilecheck/parser.hpp"

namespace tilecheck {
namespace {

ir::Program compile(const std::string& src,
                    const std::map<std::string, std::int64_t>& consts) {
  ir::Program prog = lower(tilecheck::bind(parse(src), consts));
  check_safety(prog);
  return prog;
}

ir::Program compile_fixture(const std::string& name) {
  return compile(testutil::read_fixture(name),
                 testutil::fixture_bindings(name));
}

Report check_fixture(const std::string& name, const CheckOptions& opts = {}) {
  return check(compile_fixture(name), opts);
}

// Lines of the paired-operand asserts in the two large fixtures.
constexpr int kQkAssertLine = 71;   // attention: Q/K fragments
constexpr int kPvAssertLine = 107;  // attention: P/V fragments
constexpr int kGemmAssertLine = 33;

const AssertResult& result_at_line(const Report& r, int line) {
  for (const AssertResult& a : r.assertions) {
    if (a.line == line) return a;
  }
  throw std::runtime_error("no assert at line " + std::to_string(line));
}

// Applies one source mutation and reports whether the conformity check
// fails, requiring violations at the given assert line.
bool mutant_fails(const std::string& fixture, const std::string& from,
                  const std::string& to, int expect_line) {
  std::string src = testutil::mutate(testutil::read_fixture(fixture), from, to);
  Report r = check(compile(src, testutil::fixture_bindings(fixture)),
                   {.workers = 4, .max_violations = 1});
  return !r.pass && result_at_line(r, expect_line).violations > 0;
}

TEST_SUITE_BEGIN("conformity_checker");

TEST_CASE("equality needs equal known tags; inequality two distinct ones") {
  TagTable t;
  Tag p = t.intern({1, 2});
  Tag q = t.intern({1, 3});
  using ast::CmpOp;
  CHECK(tags_conform(CmpOp::kEq, kTagBottom, kTagBottom));
  CHECK(tags_conform(CmpOp::kEq, p, p));
  CHECK_FALSE(tags_conform(CmpOp::kEq, p, q));
  CHECK_FALSE(tags_conform(CmpOp::kEq, kTagBottom, p));
  CHECK_FALSE(tags_conform(CmpOp::kEq, p, kTagBottom));
  CHECK_FALSE(tags_conform(CmpOp::kEq, kTagTop, kTagTop));
  CHECK_FALSE(tags_conform(CmpOp::kEq, kTagTop, p));

  CHECK(tags_conform(CmpOp::kNe, p, q));
  CHECK(tags_conform(CmpOp::kNe, kTagBottom, p));
  CHECK_FALSE(tags_conform(CmpOp::kNe, p, p));
  CHECK_FALSE(tags_conform(CmpOp::kNe, kTagBottom, kTagBottom));
  CHECK_FALSE(tags_conform(CmpOp::kNe, kTagTop, p));
  CHECK_FALSE(tags_conform(CmpOp::kNe, p, kTagTop));
}

TEST_CASE("a clean pass renders to the frozen report bytes") {
  Report r = check_fixture("copy_shared.tk");
  CHECK(r.pass);
  const std::string expected = R"json({
  "status": "pass",
  "checked": 64,
  "assertions": [
    {
      "id": 0,
      "line": 14,
      "comparison": "tag(r[e]) == tag(r[e])",
      "checked": 64,
      "violations": 0,
      "shown": []
    }
  ]
}
)json";
  CHECK(r.json() == expected);
  CHECK(r.text() ==
        "status: pass\n"
        "checked: 64\n"
        "assert #0 line 14: tag(r[e]) == tag(r[e])\n"
        "  checked: 64, violations: 0\n");
}

TEST_CASE("conforming fixtures pass over their full launch domains") {
  Report pipeline = check_fixture("pipeline_reuse.tk");
  CHECK(pipeline.pass);
  CHECK(pipeline.checked == 4 * 64);

  Report mfma = check_fixture("single_mfma.tk");
  CHECK(mfma.pass);
  CHECK(mfma.checked == 64 * 4);

  Report gemm = check_fixture("gemm_staged.tk");
  CHECK(gemm.pass);
  CHECK(gemm.checked == 8 * 128 * 8);
  REQUIRE(gemm.assertions.size() == 1);
  CHECK(gemm.assertions[0].comparison == "tag(tAb[e]) == tag(tBb[e])");

  // Full 8-block grid; both assert statements, every thread, every element.
  Report flash = check_fixture("flash_attn.tk", {.workers = 4});
  CHECK(flash.pass);
  CHECK(flash.checked == 8 * 64 * 512 * 8);
  REQUIRE(flash.assertions.size() == 2);
  CHECK(flash.assertions[0].line == kQkAssertLine);
  CHECK(flash.assertions[1].line == kPvAssertLine);
  CHECK(flash.assertions[0].checked == flash.assertions[1].checked);
}

TEST_CASE("a poisoned select fails every thread with ordered violations") {
  Report r = check_fixture("select_guard.tk");
  CHECK_FALSE(r.pass);
  CHECK(r.checked == 2 * 128);
  REQUIRE(r.assertions.size() == 2);

  const AssertResult& clean = r.assertions[0];
  CHECK(clean.violations == 0);
  CHECK(clean.checked == 128);

  const AssertResult& bad = r.assertions[1];
  CHECK(bad.line == 17);
  CHECK(bad.comparison == "tag(b[e]) == tag(a[e])");
  CHECK(bad.checked == 128);
  CHECK(bad.violations == 128);
  REQUIRE(bad.shown.size() == 16);  // default retention
  for (std::size_t i = 0; i < bad.shown.size(); ++i) {
    const Violation& v = bad.shown[i];
    CHECK(v.gtid == static_cast<std::int64_t>(i));  // earliest threads first
    CHECK(v.qpoint == std::vector<std::int64_t>{0});
    CHECK(v.left_tag.kind == TagValue::kTop);
    REQUIRE(v.right_tag.kind == TagValue::kTuple);
    CHECK(v.right_tag.tuple ==
          std::vector<std::int64_t>{static_cast<std::int64_t>(i), 0});
    // The mixed select stored b at line 15; a was loaded at line 13.
    REQUIRE(v.left_writers.size() == 1);
    CHECK(v.left_writers[0].line == 15);
    REQUIRE(v.right_writers.size() == 1);
    CHECK(v.right_writers[0].line == 13);
  }
}

TEST_CASE("an unsignaled rewrite reports both stores behind the top tag") {
  Report r = check_fixture("two_writers.tk");
  CHECK_FALSE(r.pass);
  const AssertResult& distinct = r.assertions[0];
  CHECK(distinct.comparison == "tag(a[e]) != tag(b[e])");
  CHECK(distinct.violations == 0);

  const AssertResult& merged = r.assertions[1];
  CHECK(merged.violations == 64);
  REQUIRE(!merged.shown.empty());
  const Violation& v = merged.shown[0];
  CHECK(v.gtid == 0);
  CHECK(v.left_tag.kind == TagValue::kTop);
  REQUIRE(v.left_writers.size() == 2);
  CHECK(v.left_writers[0].line == 16);
  CHECK(v.left_writers[1].line == 25);
}

TEST_CASE("failing reports render to the frozen text shape") {
  Report r = check_fixture("two_writers.tk", {.max_violations = 1});
  CHECK(r.text() ==
        "status: fail\n"
        "checked: 128\n"
        "assert #0 line 22: tag(a[e]) != tag(b[e])\n"
        "  checked: 64, violations: 0\n"
        "assert #1 line 28: tag(c[e]) == tag(c[e])\n"
        "  checked: 64, violations: 64, showing first 1\n"
        "  thread 0 instance [] point [0]\n"
        "    left  [0] = top  (writers: line 16 [], line 25 [])\n"
        "    right [0] = top  (writers: line 16 [], line 25 [])\n");
}

TEST_CASE("reports conform to the published schema") {
  nlohmann::json schema = nlohmann::json::parse(
      testutil::read_file(std::string(TILECHECK_FIXTURE_DIR) +
                          "/../docs/violation.schema.json"));
  testutil::SchemaWalker walker(schema);
  for (const char* name :
       {"copy_shared.tk", "select_guard.tk", "two_writers.tk"}) {
    nlohmann::json report = nlohmann::json::parse(check_fixture(name).json());
    std::vector<std::string> errors = walker.validate(report);
    for (const std::string& e : errors) {
      FAIL_CHECK(name << ": " << e);
    }
    CHECK(errors.empty());
  }

  // The walker is not a rubber stamp: broken documents must be called out.
  nlohmann::json broken = nlohmann::json::parse(
      R"({"status": "maybe", "checked": -1, "assertions": [{}], "extra": 0})");
  CHECK(walker.validate(broken).size() >= 4);
  nlohmann::json bad_tag = nlohmann::json::parse(check_fixture("select_guard.tk").json());
  bad_tag["assertions"][1]["shown"][0]["left"]["tag"] = "sideways";
  CHECK_FALSE(walker.validate(bad_tag).empty());
}

TEST_CASE("the report is byte-identical for every worker count") {
  for (const char* name :
       {"select_guard.tk", "two_writers.tk", "gemm_staged.tk"}) {
    std::string base = check_fixture(name, {.workers = 1}).json();
    for (int workers : {2, 3, 8}) {
      CHECK(check_fixture(name, {.workers = workers}).json() == base);
    }
  }
  std::string flash1 = check_fixture("flash_attn.tk", {.workers = 1}).json();
  std::string flash4 = check_fixture("flash_attn.tk", {.workers = 4}).json();
  CHECK(flash1 == flash4);
}

TEST_CASE("retention caps trim the shown list but never the counts") {
  Report five = check_fixture("select_guard.tk", {.max_violations = 5});
  CHECK(five.assertions[1].violations == 128);
  REQUIRE(five.assertions[1].shown.size() == 5);
  for (std::int64_t i = 0; i < 5; ++i) {
    CHECK(five.assertions[1].shown[static_cast<std::size_t>(i)].gtid == i);
  }
  Report none = check_fixture("select_guard.tk", {.max_violations = 0});
  CHECK(none.assertions[1].violations == 128);
  CHECK(none.assertions[1].shown.empty());
  CHECK_FALSE(none.pass);
}

TEST_CASE("oversized launch domains are refused, not churned through") {
  ir::Program prog = compile_fixture("flash_attn.tk");
  try {
    check(prog, {.domain_cap = 1000});
    FAIL("expected a capacity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kCap);
    CHECK(std::string(e.what()).find("exceeds the cap") != std::string::npos);
  }
}

TEST_CASE("attention mutants are caught statically") {
  // Broken V-transpose warp permutation: two warps collide on one slot.
  CHECK(mutant_fails("flash_attn.tk", "(wid & 2) * 2", "(wid & 1) * 2",
                     kPvAssertLine));
  // K staging writes the two 8-byte words of each group swapped.
  CHECK(mutant_fails("flash_attn.tk", "sK[tid / 8, tid % 8, j % 2, j / 2]",
                     "sK[tid / 8, tid % 8, j / 2, j % 2]", kQkAssertLine));
  // K fragment row picked from the wrong half of the shared tile.
  CHECK(mutant_fails("flash_attn.tk", "sKr[(j / 8) * 32 + wtid % 32",
                     "sKr[(j / 8) * 32 + wtid % 16", kQkAssertLine));
  // Q fragment index slipped by one k-step.
  CHECK(mutant_fails("flash_attn.tk", "rQv[j % 8]", "rQv[(j + 1) % 8]",
                     kQkAssertLine));
  // Missing end-of-iteration barrier: the next iteration restages V while
  // this iteration's second matmul is still reading it. (The post-staging
  // barrier on the K side is not observable through tags: K's row tag wraps
  // modulo 32, so every iteration restages sK with identical tags.)
  CHECK(mutant_fails("flash_attn.tk",
                     "rO[j / 4])\n        syncthreads()",
                     "rO[j / 4])\n        schedule_barrier()",
                     kPvAssertLine));
  // Q staging assembles the d-chunks of each row in the wrong order.
  CHECK(mutant_fails("flash_attn.tk",
                     "(u / 2) * 4 + (u % 2) * 2 + wtid / 32",
                     "(u / 2) * 4 + (u % 2) + wtid / 32 * 2", kQkAssertLine));
  // The probability tile's declared row map misplaces the upper slot rows.
  CHECK(mutant_fails("flash_attn.tk", "(y / 4) * 8", "(y / 4) * 4",
                     kPvAssertLine));
  // V fragment picks its 16-byte halves in swapped order.
  CHECK(mutant_fails(
      "flash_attn.tk",
      "sVr[(j / 4) * 32 + wtid % 32, (j % 4) / 2, ((j % 4) % 2) * 2 + wtid / 32]",
      "sVr[(j / 4) * 32 + wtid % 32, (j % 4) % 2, ((j % 4) / 2) * 2 + wtid / 32]",
      kPvAssertLine));
  // V staging loads rows rotated within each warp's 4-row chunk.
  CHECK(mutant_fails("flash_attn.tk", "j * 32 + wid * 4 + u",
                     "j * 32 + wid * 4 + (u + 1) % 4", kPvAssertLine));
}

TEST_CASE("gemm mutants are caught statically") {
  // B staging rows land interleaved across the two warp halves.
  CHECK(mutant_fails("gemm_staged.tk", "B[kt * 16 + (tid / 64) * 8 + i",
                     "B[kt * 16 + (tid / 64) * 4 + i", kGemmAssertLine));
  // A staging swaps which 8-byte chunk goes to which shared slot.
  CHECK(mutant_fails("gemm_staged.tk", "gA[tid / 2, kt * 4 + j * 2 + tid % 2]",
                     "gA[tid / 2, kt * 4 + j + tid % 2 * 2]",
                     kGemmAssertLine));
  // B fragment reads its column rotated by one lane.
  CHECK(mutant_fails("gemm_staged.tk", "sBr[nb * 32 + wtid % 32",
                     "sBr[nb * 32 + (wtid + 1) % 32", kGemmAssertLine));
}

TEST_SUITE_END();

}  // namespace
}  // namespace tilecheck
