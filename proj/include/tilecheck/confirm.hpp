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

#include <map>
#include <string>
#include <vector>

#include "tilecheck/checker.hpp"
#include "tilecheck/interp.hpp"

namespace tilecheck {

// The executed-run verdict for one reported violation.
struct Confirmation {
  bool confirmed = false;

  // Why. A violation is confirmed when the concrete run reproduces it:
  // either the executed tags themselves fail the comparison, or a side the
  // analysis lost track of is concretely order-dependent — its bytes belong
  // to a buffer stamped with two distinct identities since its last reset,
  // or its barrier phase read shared bytes that the same phase re-stamped.
  bool tag_mismatch = false;
  bool unstable_operand = false;
  bool phase_hazard = false;

  // The tags the run actually produced at the failing comparison.
  TagValue dynamic_left, dynamic_right;
};

// Re-executes the failing comparisons of a report concretely, one block per
// distinct failing block, and returns one entry per shown violation in
// report order. A violation left unconfirmed is not exonerated — the
// path-insensitive dataflow can lose a selector the execution resolves —
// but every confirmed one comes with concrete evidence.
std::vector<Confirmation> confirm_violations(
    const ir::Program& prog,
    const std::map<std::string, interp::TensorValue>& inputs,
    const Report& report);

}  // namespace tilecheck
