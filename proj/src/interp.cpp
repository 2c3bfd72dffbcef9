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

#include "tilecheck/interp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <span>

#include "tilecheck/diag.hpp"

namespace tilecheck::interp {

namespace {

using ast::Expr;
using ast::ExprPtr;
using ir::Decl;
using ir::Instance;
using ir::Program;
using ir::Space;

constexpr std::size_t kMaxRank = 8;

[[noreturn]] void safety_error(const std::string& msg) {
  throw Error(ErrorKind::kSafety, msg);
}

[[noreturn]] void internal_error(const std::string& msg) {
  throw Error(ErrorKind::kInternal, msg);
}

std::int64_t load_le(const std::uint8_t* p, int w) {
  std::uint64_t v = 0;
  for (int k = 0; k < w; ++k) {
    v |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  }
  return static_cast<std::int64_t>(v);
}

void store_le(std::uint8_t* p, int w, std::int64_t v) {
  std::uint64_t u = static_cast<std::uint64_t>(v);
  for (int k = 0; k < w; ++k) {
    p[k] = static_cast<std::uint8_t>(u >> (8 * k));
  }
}

// A value in flight: float or integer, plus (on tracked runs) the merged tag
// and instability of everything it loaded.
struct Val {
  bool flt = false;
  float f = 0.0f;
  std::int64_t i = 0;
  Tag tag = kTagBottom;
  bool unstable = false;

  float as_f() const { return flt ? f : static_cast<float>(i); }
};

Val decode(Dtype dt, const std::uint8_t* p) {
  Val v;
  switch (dt) {
    case Dtype::kFP32: {
      float f;
      std::memcpy(&f, p, 4);
      v.flt = true;
      v.f = f;
      return v;
    }
    case Dtype::kBF16: {
      std::uint16_t bits =
          static_cast<std::uint16_t>(p[0] | (static_cast<unsigned>(p[1]) << 8));
      v.flt = true;
      v.f = bf16_to_float(bits);
      return v;
    }
    case Dtype::kFP8:
      v.flt = true;
      v.f = fp8_to_float(p[0]);
      return v;
    case Dtype::kI32: {
      std::int32_t x;
      std::memcpy(&x, p, 4);
      v.i = x;
      return v;
    }
    case Dtype::kU8:
    case Dtype::kU16:
    case Dtype::kU32:
    case Dtype::kU64:
      // u64 comes back with its top bit reinterpreted as a sign; the opaque
      // word families only ever round-trip through raw moves, so arithmetic
      // on a full 64-bit value is the caller's (unsupported) problem.
      v.i = load_le(p, dtype_bytes(dt));
      return v;
    case Dtype::kU128:
    case Dtype::kU256:
      break;
  }
  internal_error("wide opaque element in a value expression");
}

void encode(Dtype dt, const Val& v, std::uint8_t* p) {
  switch (dt) {
    case Dtype::kFP32: {
      float f = v.as_f();
      std::memcpy(p, &f, 4);
      return;
    }
    case Dtype::kBF16: {
      std::uint16_t bits = bf16_from_float(v.as_f());
      p[0] = static_cast<std::uint8_t>(bits);
      p[1] = static_cast<std::uint8_t>(bits >> 8);
      return;
    }
    case Dtype::kFP8:
      p[0] = fp8_from_float(v.as_f());
      return;
    case Dtype::kI32:
    case Dtype::kU8:
    case Dtype::kU16:
    case Dtype::kU32:
    case Dtype::kU64:
      if (v.flt) internal_error("float value stored to an integer element");
      store_le(p, dtype_bytes(dt), v.i);
      return;
    case Dtype::kU128:
    case Dtype::kU256:
      break;
  }
  internal_error("wide opaque element as a store target");
}

// Iterates all coordinate points of `counts` with the last position fastest,
// binding nothing when any count is zero.
template <typename Fn>
void for_each_point(const std::vector<std::int64_t>& counts, Fn&& fn) {
  for (std::int64_t c : counts) {
    if (c <= 0) return;
  }
  std::vector<std::int64_t> point(counts.size(), 0);
  for (;;) {
    fn(point);
    std::size_t i = counts.size();
    while (i > 0) {
      --i;
      if (++point[i] < counts[i]) break;
      point[i] = 0;
      if (i == 0) return;
    }
    if (counts.empty()) return;
  }
}

struct ByteTag {
  Tag tag = kTagBottom;
  bool uns = false;
};

// Executes one block. Statements run in program order; within each statement
// every thread executes in ascending id before the next statement starts, so
// a warp-collective accumulation can gather lane fragments that were staged
// earlier in the same barrier phase.
class BlockRun {
 public:
  BlockRun(const Program& prog,
           const std::vector<std::vector<std::uint8_t>*>& globals,
           std::int64_t bx, std::int64_t by, CostCounters& cost, TagTable* tags,
           DynamicTagLog* log, const DynOptions* opts)
      : prog_(prog),
        glob_(globals),
        cost_(cost),
        tags_(tags),
        log_(log),
        opts_(opts),
        threads_(prog.threads) {
    ctx_.bx = bx;
    ctx_.by = by;
    ctx_.extra = &extra_;
    block_ = by * prog.grid_x + bx;
    const std::size_t n = prog.decls.size();
    reg_.resize(n);
    shm_.resize(n);
    if (tracked()) {
      reg_tag_.resize(n);
      reg_uns_.resize(n);
      shm_tag_.resize(n);
      shm_merged_.resize(n);
      shm_entry_.resize(n);
      shm_read_.resize(n);
      global_tag_.resize(n);
    }
    for (const Decl& d : prog.decls) {
      if (d.root != d.id) continue;
      const std::size_t bytes = static_cast<std::size_t>(d.bytes());
      if (d.space == Space::kRegister) {
        const std::size_t lanes = static_cast<std::size_t>(threads_) * bytes;
        reg_[d.id].assign(lanes, 0);
        if (tracked()) {
          reg_tag_[d.id].assign(lanes, kTagBottom);
          reg_uns_[d.id].assign(lanes, 0);
        }
      } else if (d.space == Space::kShared) {
        shm_[d.id].assign(bytes, 0);
        if (tracked()) {
          shm_tag_[d.id].assign(bytes, kTagBottom);
          shm_merged_[d.id].assign(bytes, kTagBottom);
          shm_entry_[d.id].assign(bytes, kTagBottom);
          shm_read_[d.id].assign(bytes, 0);
          shared_roots_.push_back(d.id);
        }
      }
    }
  }

  void run() {
    cost_.statement_instances += static_cast<std::int64_t>(prog_.code.size());
    const std::vector<Instance>& code = prog_.code;
    for (std::size_t i = 0; i < code.size(); ++i) {
      const Instance& inst = code[i];
      exec(inst, static_cast<std::int32_t>(i));
      if (inst.kind == Instance::Kind::kSync) {
        cost_.barriers += 1;
        if (tracked()) end_phase();
      }
    }
    if (tracked()) end_phase();
  }

 private:
  bool tracked() const { return tags_ != nullptr; }

  // ---- phase bookkeeping ----------------------------------------------------

  // Closes the current barrier phase: a read-flagged shared byte whose tag
  // concretely changed between phase entry and phase end (both sides being
  // real tuples) is evidence of a read and a re-stamp racing in the same
  // phase, and stamps every capture of the phase.
  void end_phase() {
    bool hazard = false;
    for (int root : shared_roots_) {
      const std::vector<char>& read = shm_read_[root];
      const std::vector<Tag>& cur = shm_tag_[root];
      const std::vector<Tag>& entry = shm_entry_[root];
      for (std::size_t b = 0; b < read.size(); ++b) {
        if (read[b] != 0 && entry[b] != cur[b] && entry[b] != kTagBottom &&
            cur[b] != kTagBottom) {
          hazard = true;
          break;
        }
      }
      if (hazard) break;
    }
    if (log_ != nullptr) {
      for (std::size_t c = phase_cap_start_; c < log_->captures.size(); ++c) {
        log_->captures[c].phase_hazard = hazard;
      }
      phase_cap_start_ = log_->captures.size();
    }
    for (int root : shared_roots_) {
      std::fill(shm_read_[root].begin(), shm_read_[root].end(), 0);
      shm_entry_[root] = shm_tag_[root];
    }
  }

  // ---- byte access ----------------------------------------------------------

  std::size_t lane(const Decl& root, std::int64_t byte) const {
    return static_cast<std::size_t>(ctx_.tid * root.bytes() + byte);
  }

  std::uint8_t* byte_ptr(const Decl& root, std::int64_t byte) {
    switch (root.space) {
      case Space::kRegister:
        return &reg_[root.id][lane(root, byte)];
      case Space::kShared:
        return &shm_[root.id][static_cast<std::size_t>(byte)];
      case Space::kGlobal:
        return &(*glob_[root.id])[static_cast<std::size_t>(byte)];
    }
    internal_error("bad storage space");
  }

  ByteTag read_byte_tag(const Decl& root, std::int64_t byte) {
    switch (root.space) {
      case Space::kRegister: {
        const std::size_t i = lane(root, byte);
        return {reg_tag_[root.id][i], reg_uns_[root.id][i] != 0};
      }
      case Space::kShared: {
        const std::size_t b = static_cast<std::size_t>(byte);
        shm_read_[root.id][b] = 1;
        // A byte is unstable once its buffer saw two distinct tuples since
        // the last reset: its content depends on who stored last.
        return {shm_tag_[root.id][b], shm_merged_[root.id][b] == kTagTop};
      }
      case Space::kGlobal:
        return {global_byte_tag(root, byte), false};
    }
    internal_error("bad storage space");
  }

  void write_byte_tag(const Decl& root, std::int64_t byte, Tag tag, bool uns,
                      std::int32_t ci) {
    switch (root.space) {
      case Space::kRegister: {
        const std::size_t i = lane(root, byte);
        reg_tag_[root.id][i] = tag;
        reg_uns_[root.id][i] = uns ? 1 : 0;
        break;
      }
      case Space::kShared: {
        const std::size_t b = static_cast<std::size_t>(byte);
        // Shadow merge over the buffer's lifetime: the identity of every
        // store since the last reset, with unstable inputs counting as top.
        shm_merged_[root.id][b] = TagTable::merge(shm_merged_[root.id][b],
                                                  uns ? kTagTop : tag);
        shm_tag_[root.id][b] = tag;
        break;
      }
      case Space::kGlobal:
        break;  // tensor tags are declared, stores are not tracked
    }
    log_record(TagRecord::Op::kStore, ci, root, byte, tag);
  }

  void log_record(TagRecord::Op op, std::int32_t ci, const Decl& root,
                  std::int64_t byte, Tag tag) {
    if (log_ == nullptr || !opts_->store_log) return;
    if (static_cast<std::int64_t>(log_->records.size()) >=
        opts_->max_records) {
      log_->truncated = true;
      return;
    }
    TagRecord r;
    r.op = op;
    r.code_index = ci;
    r.block = block_;
    r.thread = ctx_.tid;
    r.root = root.id;
    r.offset = root.space == Space::kRegister
                   ? static_cast<std::int64_t>(lane(root, byte))
                   : byte;
    r.tag = tag;
    log_->records.push_back(r);
  }

  void transfer_byte(const Decl& sroot, std::int64_t sbyte, const Decl& droot,
                     std::int64_t dbyte, std::int32_t ci) {
    *byte_ptr(droot, dbyte) = *byte_ptr(sroot, sbyte);
    if (tracked()) {
      ByteTag v = read_byte_tag(sroot, sbyte);
      write_byte_tag(droot, dbyte, v.tag, v.uns, ci);
    }
  }

  // Tag of one byte of a tagged tensor: the tag function applied to the
  // coordinates of the element the byte belongs to (memoized per element).
  Tag global_byte_tag(const Decl& root, std::int64_t byte) {
    const std::optional<ir::TagFn>& fn = prog_.tag_fns[root.id];
    if (!fn.has_value()) return kTagBottom;
    const std::int64_t elem = byte / dtype_bytes(root.dtype);
    std::vector<Tag>& cache = global_tag_[root.id];
    if (cache.empty()) {
      cache.assign(static_cast<std::size_t>(root.layout.size()), Tag{-1});
    }
    Tag& slot = cache[static_cast<std::size_t>(elem)];
    if (slot >= 0) return slot;

    const std::size_t rank = root.layout.rank();
    std::array<std::int64_t, kMaxRank> coord{};
    std::int64_t rem = elem;
    for (std::size_t i = rank; i > 0; --i) {
      const std::int64_t extent = root.layout.extent(i - 1);
      coord[i - 1] = rem % extent;
      rem /= extent;
    }
    slot = eval_tag_fn(*fn, std::span(coord.data(), rank));
    return slot;
  }

  Tag eval_tag_fn(const ir::TagFn& fn, std::span<const std::int64_t> coord) {
    for (std::size_t i = 0; i < fn.coord_vars.size(); ++i) {
      extra_[fn.coord_vars[i]] = coord[i];
    }
    tuple_buf_.clear();
    for (const ExprPtr& v : fn.values) {
      tuple_buf_.push_back(ir::eval_index(v, ctx_));
    }
    for (const std::string& c : fn.coord_vars) extra_.erase(c);
    return tags_->intern(tuple_buf_);
  }

  // Linear element offset, bounds-checking every given index against its dim
  // extent. Fewer indices than dims selects the trailing contiguous slice,
  // whose element count comes back via `slice_elems`.
  std::int64_t element_checked(const Decl& d,
                               const std::vector<ExprPtr>& indices,
                               std::int64_t* slice_elems = nullptr) {
    const std::size_t rank = d.layout.rank();
    if (rank > kMaxRank) internal_error("layout rank exceeds executor limit");
    std::array<std::int64_t, kMaxRank> coord{};
    const std::size_t given = indices.size();
    for (std::size_t i = 0; i < given; ++i) {
      const std::int64_t v = ir::eval_index(indices[i], ctx_);
      const std::int64_t extent = d.layout.extent(i);
      if (v < 0 || v >= extent) {
        safety_error("index " + std::to_string(v) + " out of bounds for dim " +
                     std::to_string(i) + " of '" + d.name + "' (extent " +
                     std::to_string(extent) + ")");
      }
      coord[i] = v;
    }
    if (slice_elems != nullptr) {
      std::int64_t elems = 1;
      for (std::size_t i = given; i < rank; ++i) elems *= d.layout.extent(i);
      *slice_elems = elems;
    }
    return d.layout.eval(std::span(coord.data(), rank));
  }

  void count_access(Space space, std::int64_t bytes) {
    if (space == Space::kGlobal) {
      cost_.global_bytes += bytes;
    } else if (space == Space::kShared) {
      cost_.shared_bytes += bytes;
    }
  }

  // Loads one element as a value, counting the access and folding the tags
  // and instability of its bytes on tracked runs.
  Val load_element(const Decl& d, std::int64_t elem) {
    const Decl& root = prog_.decls[d.root];
    const std::int64_t w = dtype_bytes(d.dtype);
    const std::int64_t base = elem * w;
    count_access(root.space, w);
    std::uint8_t buf[8];
    if (w > 8) internal_error("wide opaque element in a value expression");
    for (std::int64_t k = 0; k < w; ++k) buf[k] = *byte_ptr(root, base + k);
    Val v = decode(d.dtype, buf);
    if (tracked()) {
      for (std::int64_t k = 0; k < w; ++k) {
        ByteTag b = read_byte_tag(root, base + k);
        v.tag = TagTable::merge(v.tag, b.tag);
        v.unstable = v.unstable || b.uns;
      }
    }
    return v;
  }

  void store_element(const Decl& d, std::int64_t elem, const Val& v,
                     std::int32_t ci) {
    const Decl& root = prog_.decls[d.root];
    const std::int64_t w = dtype_bytes(d.dtype);
    const std::int64_t base = elem * w;
    std::uint8_t buf[8];
    if (w > 8) internal_error("wide opaque element as a value store target");
    encode(d.dtype, v, buf);
    count_access(root.space, w);
    for (std::int64_t k = 0; k < w; ++k) {
      *byte_ptr(root, base + k) = buf[k];
      if (tracked()) write_byte_tag(root, base + k, v.tag, v.unstable, ci);
    }
  }

  // ---- value evaluation -------------------------------------------------------

  Val eval_value(const ExprPtr& e, std::int32_t ci) {
    switch (e->kind) {
      case Expr::Kind::kIntLit: {
        Val v;
        v.i = e->int_val;
        return v;
      }
      case Expr::Kind::kFloatLit: {
        Val v;
        v.flt = true;
        v.f = static_cast<float>(e->float_val);
        return v;
      }
      case Expr::Kind::kVar: {
        Val v;
        v.i = ir::eval_index(e, ctx_);
        return v;
      }
      case Expr::Kind::kSubscript: {
        const Decl& d = prog_.decls[prog_.decl_by_name.at(e->name)];
        return load_element(d, element_checked(d, e->args));
      }
      case Expr::Kind::kBin:
        return eval_bin(e, ci);
      case Expr::Kind::kCmp: {
        Val a = eval_value(e->args[0], ci);
        Val b = eval_value(e->args[1], ci);
        bool r = false;
        if (a.flt || b.flt) {
          const float x = a.as_f(), y = b.as_f();
          switch (e->cmp) {
            case ast::CmpOp::kLt: r = x < y; break;
            case ast::CmpOp::kLe: r = x <= y; break;
            case ast::CmpOp::kGt: r = x > y; break;
            case ast::CmpOp::kGe: r = x >= y; break;
            case ast::CmpOp::kEq: r = x == y; break;
            case ast::CmpOp::kNe: r = x != y; break;
          }
        } else {
          const std::int64_t x = a.i, y = b.i;
          switch (e->cmp) {
            case ast::CmpOp::kLt: r = x < y; break;
            case ast::CmpOp::kLe: r = x <= y; break;
            case ast::CmpOp::kGt: r = x > y; break;
            case ast::CmpOp::kGe: r = x >= y; break;
            case ast::CmpOp::kEq: r = x == y; break;
            case ast::CmpOp::kNe: r = x != y; break;
          }
        }
        Val out;
        out.i = r ? 1 : 0;
        out.tag = TagTable::merge(a.tag, b.tag);
        out.unstable = a.unstable || b.unstable;
        return out;
      }
      case Expr::Kind::kCond: {
        // The condition is a pure index expression; only the taken arm runs,
        // so the value's tag is the taken arm's tag (the static engine, being
        // path-insensitive, merges both).
        const std::int64_t c = ir::eval_index(e->args[0], ctx_);
        return eval_value(c != 0 ? e->args[1] : e->args[2], ci);
      }
      case Expr::Kind::kCall: {
        Val a = eval_value(e->args[0], ci);
        Val out;
        out.flt = true;
        out.tag = a.tag;
        out.unstable = a.unstable;
        if (e->name == "exp") {
          out.f = static_cast<float>(
              std::exp(static_cast<double>(a.as_f())));
          return out;
        }
        Val b = eval_value(e->args[1], ci);
        out.tag = TagTable::merge(a.tag, b.tag);
        out.unstable = a.unstable || b.unstable;
        if (e->name == "max") {
          out.f = std::fmax(a.as_f(), b.as_f());
        } else if (e->name == "min") {
          out.f = std::fmin(a.as_f(), b.as_f());
        } else {
          internal_error("unknown function '" + e->name + "'");
        }
        return out;
      }
      case Expr::Kind::kTagOf:
        break;
    }
    internal_error("bad value expression");
  }

  Val eval_bin(const ExprPtr& e, std::int32_t ci) {
    Val a = eval_value(e->args[0], ci);
    Val b = eval_value(e->args[1], ci);
    Val out;
    out.tag = TagTable::merge(a.tag, b.tag);
    out.unstable = a.unstable || b.unstable;
    if (a.flt || b.flt) {
      out.flt = true;
      const float x = a.as_f(), y = b.as_f();
      switch (e->bin) {
        case ast::BinOp::kAdd: out.f = x + y; return out;
        case ast::BinOp::kSub: out.f = x - y; return out;
        case ast::BinOp::kMul: out.f = x * y; return out;
        case ast::BinOp::kDiv: out.f = x / y; return out;  // IEEE: /0 is inf
        case ast::BinOp::kMod:
        case ast::BinOp::kAnd:
        case ast::BinOp::kOr:
        case ast::BinOp::kXor:
        case ast::BinOp::kShl:
        case ast::BinOp::kShr:
          safety_error("operator requires integer operands");
      }
      safety_error("bad operator");
    }
    const std::int64_t x = a.i, y = b.i;
    switch (e->bin) {
      case ast::BinOp::kAdd: out.i = x + y; return out;
      case ast::BinOp::kSub: out.i = x - y; return out;
      case ast::BinOp::kMul: out.i = x * y; return out;
      case ast::BinOp::kDiv:
        if (y == 0) safety_error("division by zero in a value expression");
        out.i = x / y;
        return out;
      case ast::BinOp::kMod:
        if (y == 0) safety_error("modulo by zero in a value expression");
        out.i = x % y;
        return out;
      case ast::BinOp::kAnd: out.i = x & y; return out;
      case ast::BinOp::kOr: out.i = x | y; return out;
      case ast::BinOp::kXor: out.i = x ^ y; return out;
      case ast::BinOp::kShl:
        if (y < 0 || y > 62) safety_error("shift amount out of range");
        out.i = x << y;
        return out;
      case ast::BinOp::kShr:
        if (y < 0 || y > 62) safety_error("shift amount out of range");
        out.i = x >> y;
        return out;
    }
    safety_error("bad operator");
  }

  // ---- instances --------------------------------------------------------------

  void exec(const Instance& inst, std::int32_t ci) {
    switch (inst.kind) {
      case Instance::Kind::kSync:
        return;
      case Instance::Kind::kLocalInit:
        exec_init(inst);
        return;
      case Instance::Kind::kTagReset:
        if (tracked()) exec_tag_reset(inst);
        return;
      case Instance::Kind::kCopy:
        exec_copy(inst, ci);
        return;
      case Instance::Kind::kConcat:
        exec_concat(inst, ci);
        return;
      case Instance::Kind::kMatmul:
        exec_matmul(inst, ci);
        return;
      case Instance::Kind::kRetag:
        if (tracked()) exec_retag(inst, ci);
        return;
      case Instance::Kind::kAssert:
        if (tracked()) exec_assert(inst, ci);
        return;
    }
  }

  bool any_thread_passes(const Instance& inst) {
    if (inst.guards.empty()) return true;
    for (std::int64_t t = 0; t < threads_; ++t) {
      ctx_.tid = t;
      if (ir::guards_hold(inst, ctx_)) return true;
    }
    return false;
  }

  // Allocation: zero the bytes and restore bottom tags. Zero-fill is free in
  // the cost model (it models an allocation, not traffic).
  void exec_init(const Instance& inst) {
    const Decl& target = prog_.decls[inst.dst.decl];
    const Decl& root = prog_.decls[target.root];
    const std::size_t bytes = static_cast<std::size_t>(root.bytes());
    if (root.space == Space::kShared) {
      if (!any_thread_passes(inst)) return;
      std::fill(shm_[root.id].begin(), shm_[root.id].end(), 0);
      if (tracked()) reset_shared_tags(root.id);
      return;
    }
    for (std::int64_t t = 0; t < threads_; ++t) {
      ctx_.tid = t;
      if (!ir::guards_hold(inst, ctx_)) continue;
      const std::size_t lo = static_cast<std::size_t>(t) * bytes;
      std::fill(reg_[root.id].begin() + lo,
                reg_[root.id].begin() + lo + bytes, 0);
      if (tracked()) {
        std::fill(reg_tag_[root.id].begin() + lo,
                  reg_tag_[root.id].begin() + lo + bytes, kTagBottom);
        std::fill(reg_uns_[root.id].begin() + lo,
                  reg_uns_[root.id].begin() + lo + bytes, 0);
      }
    }
  }

  void exec_tag_reset(const Instance& inst) {
    const Decl& target = prog_.decls[inst.dst.decl];
    const Decl& root = prog_.decls[target.root];
    const std::size_t bytes = static_cast<std::size_t>(root.bytes());
    if (root.space == Space::kShared) {
      if (any_thread_passes(inst)) reset_shared_tags(root.id);
      return;
    }
    for (std::int64_t t = 0; t < threads_; ++t) {
      ctx_.tid = t;
      if (!ir::guards_hold(inst, ctx_)) continue;
      const std::size_t lo = static_cast<std::size_t>(t) * bytes;
      std::fill(reg_tag_[root.id].begin() + lo,
                reg_tag_[root.id].begin() + lo + bytes, kTagBottom);
      std::fill(reg_uns_[root.id].begin() + lo,
                reg_uns_[root.id].begin() + lo + bytes, 0);
    }
  }

  void reset_shared_tags(int id) {
    std::fill(shm_tag_[id].begin(), shm_tag_[id].end(), kTagBottom);
    std::fill(shm_merged_[id].begin(), shm_merged_[id].end(), kTagBottom);
  }

  void exec_copy(const Instance& inst, std::int32_t ci) {
    const Decl& dst = prog_.decls[inst.dst.decl];
    const Decl& droot = prog_.decls[dst.root];
    const std::int64_t w = dtype_bytes(dst.dtype);

    // Same raw-move rule as the tag engine: a bare same-type load moves the
    // element's bytes one by one; any other right-hand side folds to a value.
    const Decl* src = nullptr;
    if (inst.value->kind == Expr::Kind::kSubscript) {
      const Decl& cand = prog_.decls[prog_.decl_by_name.at(inst.value->name)];
      if (cand.dtype == dst.dtype) src = &cand;
    }

    for (std::int64_t t = 0; t < threads_; ++t) {
      ctx_.tid = t;
      if (!ir::guards_hold(inst, ctx_)) continue;
      const std::int64_t delem = element_checked(dst, inst.dst.indices);
      if (src != nullptr) {
        const Decl& sroot = prog_.decls[src->root];
        const std::int64_t sbase = element_checked(*src, inst.value->args) * w;
        count_access(sroot.space, w);
        count_access(droot.space, w);
        for (std::int64_t k = 0; k < w; ++k) {
          transfer_byte(sroot, sbase + k, droot, delem * w + k, ci);
        }
      } else {
        Val v = eval_value(inst.value, ci);
        store_element(dst, delem, v, ci);
      }
    }
  }

  void exec_concat(const Instance& inst, std::int32_t ci) {
    const Decl& dst = prog_.decls[inst.dst.decl];
    const Decl& droot = prog_.decls[dst.root];
    const std::int64_t w = dtype_bytes(dst.dtype);
    const std::int64_t part = w / 4;  // half of each source word

    for (std::int64_t t = 0; t < threads_; ++t) {
      ctx_.tid = t;
      if (!ir::guards_hold(inst, ctx_)) continue;
      const std::int64_t base = element_checked(dst, inst.dst.indices) * w;
      count_access(droot.space, w);
      for (std::size_t i = 0; i < inst.sources.size(); ++i) {
        const Decl& src = prog_.decl_of(inst.sources[i]);
        const Decl& sroot = prog_.decls[src.root];
        const std::int64_t sw = dtype_bytes(src.dtype);
        const std::int64_t sbase =
            element_checked(src, inst.sources[i].indices) * sw +
            (inst.concat_hi ? sw / 2 : 0);
        count_access(sroot.space, part);
        for (std::int64_t k = 0; k < part; ++k) {
          transfer_byte(sroot, sbase + k, droot,
                        base + static_cast<std::int64_t>(i) * part + k, ci);
        }
      }
    }
  }

  // Executes the intrinsic descriptor literally: for each lane group, gather
  // the A and B tiles through the per-lane fragment maps, then give every
  // accumulator slot its k products in ascending order, all in fp32. One
  // fragment pass covers a_slots contraction columns; longer fragments run
  // several passes back to back. Accumulator tags are left untouched: the
  // step consumes fragments and proves nothing about its own output.
  void exec_matmul(const Instance& inst, std::int32_t ci) {
    const intrinsics::Mfma& mm = prog_.mfma;
    const Decl& dc = prog_.decl_of(inst.dst);
    const Decl& da = prog_.decl_of(inst.sources[0]);
    const Decl& db = prog_.decl_of(inst.sources[1]);
    const std::int64_t lanes = mm.lanes;
    const std::int64_t groups = threads_ / lanes;

    mat_a_.assign(static_cast<std::size_t>(mm.m) * mm.k, 0.0f);
    mat_b_.assign(static_cast<std::size_t>(mm.k) * mm.n, 0.0f);
    base_a_.resize(static_cast<std::size_t>(lanes));
    base_b_.resize(static_cast<std::size_t>(lanes));
    base_c_.resize(static_cast<std::size_t>(lanes));

    for (std::int64_t g = 0; g < groups; ++g) {
      // The step is collective: its guard must agree across the lane group.
      int decided = -1;
      for (std::int64_t l = 0; l < lanes; ++l) {
        ctx_.tid = g * lanes + l;
        const int pass = ir::guards_hold(inst, ctx_) ? 1 : 0;
        if (decided < 0) {
          decided = pass;
        } else if (decided != pass) {
          safety_error("matmul guard diverges within a lane group (line " +
                       std::to_string(inst.line) + ")");
        }
      }
      if (decided == 0) continue;

      std::int64_t a_elems = 0, b_elems = 0, c_elems = 0;
      for (std::int64_t l = 0; l < lanes; ++l) {
        ctx_.tid = g * lanes + l;
        base_a_[l] = element_checked(da, inst.sources[0].indices, &a_elems);
        base_b_[l] = element_checked(db, inst.sources[1].indices, &b_elems);
        base_c_[l] = element_checked(dc, inst.dst.indices, &c_elems);
      }
      if (a_elems != b_elems || c_elems != mm.c_slots ||
          a_elems % mm.a_slots != 0) {
        internal_error("fragment slices do not match the step descriptor");
      }
      const std::int64_t steps = a_elems / mm.a_slots;

      for (std::int64_t s = 0; s < steps; ++s) {
        for (std::int64_t l = 0; l < lanes; ++l) {
          ctx_.tid = g * lanes + l;
          for (int slot = 0; slot < mm.a_slots; ++slot) {
            const std::array<int, 2> rc = mm.a_coord(static_cast<int>(l), slot);
            mat_a_[static_cast<std::size_t>(rc[0]) * mm.k + rc[1]] =
                read_fragment(da, base_a_[l] + s * mm.a_slots + slot, ci);
          }
          for (int slot = 0; slot < mm.b_slots; ++slot) {
            const std::array<int, 2> rc = mm.b_coord(static_cast<int>(l), slot);
            mat_b_[static_cast<std::size_t>(rc[0]) * mm.n + rc[1]] =
                read_fragment(db, base_b_[l] + s * mm.b_slots + slot, ci);
          }
        }
        for (std::int64_t l = 0; l < lanes; ++l) {
          ctx_.tid = g * lanes + l;
          for (int slot = 0; slot < mm.c_slots; ++slot) {
            const std::array<int, 2> rc = mm.c_coord(static_cast<int>(l), slot);
            const std::int64_t elem = base_c_[l] + slot;
            float acc = read_acc(dc, elem);
            for (int kk = 0; kk < mm.k; ++kk) {
              acc += mat_a_[static_cast<std::size_t>(rc[0]) * mm.k + kk] *
                     mat_b_[static_cast<std::size_t>(kk) * mm.n + rc[1]];
            }
            write_acc(dc, elem, acc);
          }
        }
      }
    }
  }

  float read_fragment(const Decl& d, std::int64_t elem, std::int32_t ci) {
    const Decl& root = prog_.decls[d.root];
    const std::int64_t w = dtype_bytes(d.dtype);
    std::uint8_t buf[8];
    for (std::int64_t k = 0; k < w; ++k) {
      buf[k] = *byte_ptr(root, elem * w + k);
    }
    if (tracked() && log_ != nullptr && opts_->store_log) {
      for (std::int64_t k = 0; k < w; ++k) {
        log_record(TagRecord::Op::kRead, ci, root, elem * w + k,
                   read_byte_tag(root, elem * w + k).tag);
      }
    }
    return decode(d.dtype, buf).as_f();
  }

  float read_acc(const Decl& d, std::int64_t elem) {
    const Decl& root = prog_.decls[d.root];
    const std::int64_t w = dtype_bytes(d.dtype);
    std::uint8_t buf[8];
    for (std::int64_t k = 0; k < w; ++k) {
      buf[k] = *byte_ptr(root, elem * w + k);
    }
    return decode(d.dtype, buf).as_f();
  }

  void write_acc(const Decl& d, std::int64_t elem, float v) {
    const Decl& root = prog_.decls[d.root];
    const std::int64_t w = dtype_bytes(d.dtype);
    std::uint8_t buf[8];
    Val val;
    val.flt = true;
    val.f = v;
    encode(d.dtype, val, buf);
    for (std::int64_t k = 0; k < w; ++k) {
      *byte_ptr(root, elem * w + k) = buf[k];
    }
  }

  void exec_retag(const Instance& inst, std::int32_t ci) {
    const Decl& target = prog_.decls[inst.dst.decl];
    const Decl& root = prog_.decls[target.root];
    const ir::TagFn& fn = *inst.retag;
    const std::int64_t w = dtype_bytes(target.dtype);

    std::vector<std::int64_t> extents;
    for (std::size_t i = 0; i < target.layout.rank(); ++i) {
      extents.push_back(target.layout.extent(i));
    }
    for (std::int64_t t = 0; t < threads_; ++t) {
      ctx_.tid = t;
      if (!ir::guards_hold(inst, ctx_)) continue;
      for_each_point(extents, [&](const std::vector<std::int64_t>& coord) {
        const Tag tag = eval_tag_fn(fn, coord);
        const std::int64_t base = target.layout.eval(coord) * w;
        // Strong re-stamp: the buffer's store history restarts at this tag,
        // and any accumulated instability is vouched away.
        for (std::int64_t k = 0; k < w; ++k) {
          if (root.space == Space::kRegister) {
            const std::size_t i = lane(root, base + k);
            reg_tag_[root.id][i] = tag;
            reg_uns_[root.id][i] = 0;
          } else {
            const std::size_t b = static_cast<std::size_t>(base + k);
            shm_tag_[root.id][b] = tag;
            shm_merged_[root.id][b] = tag;
          }
          log_record(TagRecord::Op::kRetag, ci, root, base + k, tag);
        }
      });
    }
  }

  void exec_assert(const Instance& inst, std::int32_t ci) {
    const bool want_cap = log_ != nullptr && opts_->captures;
    for (std::int64_t t = 0; t < threads_; ++t) {
      ctx_.tid = t;
      if (!ir::guards_hold(inst, ctx_)) continue;
      for_each_point(
          inst.quant_counts, [&](const std::vector<std::int64_t>& point) {
            for (std::size_t i = 0; i < point.size(); ++i) {
              extra_[inst.quant_vars[i]] = point[i];
            }
            AssertCapture c;
            c.code_index = ci;
            c.block = block_;
            c.thread = t;
            c.qpoint = point;
            read_side(inst.assert_left, ci, c.left_coord, c.left_tag,
                      c.left_byte_tags, c.left_unstable);
            read_side(inst.assert_right, ci, c.right_coord, c.right_tag,
                      c.right_byte_tags, c.right_unstable);
            if (want_cap && (!opts_->capture_filter ||
                             opts_->capture_filter(ci, t))) {
              log_->captures.push_back(std::move(c));
            }
            for (const std::string& q : inst.quant_vars) extra_.erase(q);
          });
    }
  }

  void read_side(const ExprPtr& ref, std::int32_t ci,
                 std::vector<std::int64_t>& coord, Tag& tag,
                 std::vector<Tag>& byte_tags, bool& unstable) {
    const Decl& d = prog_.decls[prog_.decl_by_name.at(ref->name)];
    for (std::size_t i = 0; i < ref->args.size(); ++i) {
      const std::int64_t v = ir::eval_index(ref->args[i], ctx_);
      const std::int64_t extent = d.layout.extent(i);
      if (v < 0 || v >= extent) {
        safety_error("index " + std::to_string(v) + " out of bounds for dim " +
                     std::to_string(i) + " of '" + d.name + "' (extent " +
                     std::to_string(extent) + ")");
      }
      coord.push_back(v);
    }
    const std::int64_t elem = d.layout.eval(coord);
    const Decl& root = prog_.decls[d.root];
    const std::int64_t w = dtype_bytes(d.dtype);
    tag = kTagBottom;
    unstable = false;
    const bool want_rec = log_ != nullptr && opts_->store_log;
    for (std::int64_t k = 0; k < w; ++k) {
      const ByteTag b = read_byte_tag(root, elem * w + k);
      byte_tags.push_back(b.tag);
      tag = TagTable::merge(tag, b.tag);
      unstable = unstable || b.uns;
      if (want_rec) {
        log_record(TagRecord::Op::kRead, ci, root, elem * w + k, b.tag);
      }
    }
  }

  const Program& prog_;
  const std::vector<std::vector<std::uint8_t>*>& glob_;
  CostCounters& cost_;
  TagTable* tags_;
  DynamicTagLog* log_;
  const DynOptions* opts_;
  const std::int64_t threads_;
  std::int64_t block_ = 0;

  ir::EvalCtx ctx_;
  std::map<std::string, std::int64_t> extra_;
  std::vector<std::int64_t> tuple_buf_;

  // Concrete bytes, by root decl id. Register roots hold one lane per
  // thread (tid * root_bytes + byte); shared roots one span per block.
  std::vector<std::vector<std::uint8_t>> reg_, shm_;

  // Dynamic tag state (tracked runs only).
  std::vector<std::vector<Tag>> reg_tag_, shm_tag_;
  std::vector<std::vector<std::uint8_t>> reg_uns_;
  std::vector<std::vector<Tag>> shm_merged_;  // store-history shadow merge
  std::vector<std::vector<Tag>> shm_entry_;   // tags at phase entry
  std::vector<std::vector<char>> shm_read_;   // read since phase entry
  std::vector<int> shared_roots_;
  std::vector<std::vector<Tag>> global_tag_;  // per-element declared tags
  std::size_t phase_cap_start_ = 0;

  // Matmul scratch, reused across lane groups.
  std::vector<float> mat_a_, mat_b_;
  std::vector<std::int64_t> base_a_, base_b_, base_c_;
};

std::map<std::string, TensorValue> prepare_globals(
    const Program& prog, const std::map<std::string, TensorValue>& inputs) {
  for (const auto& [name, value] : inputs) {
    auto it = prog.decl_by_name.find(name);
    if (it == prog.decl_by_name.end() ||
        prog.decls[static_cast<std::size_t>(it->second)].space !=
            Space::kGlobal) {
      throw Error(ErrorKind::kConfig, "unknown input tensor '" + name + "'");
    }
  }
  std::map<std::string, TensorValue> store;
  for (const Decl& d : prog.decls) {
    if (d.root != d.id || d.space != Space::kGlobal) continue;
    std::vector<std::int64_t> want;
    for (std::size_t i = 0; i < d.layout.rank(); ++i) {
      want.push_back(d.layout.extent(i));
    }
    auto it = inputs.find(d.name);
    if (it == inputs.end()) {
      if (!d.is_out) {
        throw Error(ErrorKind::kConfig,
                    "missing input tensor '" + d.name + "'");
      }
      store.emplace(d.name, TensorValue::zeros(d.dtype, std::move(want)));
      continue;
    }
    const TensorValue& v = it->second;
    if (v.dtype != d.dtype) {
      throw Error(ErrorKind::kConfig,
                  std::string("tensor '") + d.name + "' element type is " +
                      dtype_name(v.dtype) + ", kernel expects " +
                      dtype_name(d.dtype));
    }
    if (v.shape != want) {
      throw Error(ErrorKind::kConfig,
                  "tensor '" + d.name + "' shape does not match the kernel");
    }
    const std::size_t need = static_cast<std::size_t>(v.elems()) *
                             static_cast<std::size_t>(dtype_bytes(d.dtype));
    if (v.bytes.size() != need) {
      throw Error(ErrorKind::kConfig,
                  "tensor '" + d.name + "' carries " +
                      std::to_string(v.bytes.size()) + " bytes, expected " +
                      std::to_string(need));
    }
    store.emplace(d.name, v);
  }
  return store;
}

std::vector<std::vector<std::uint8_t>*> global_spans(
    const Program& prog, std::map<std::string, TensorValue>& store) {
  std::vector<std::vector<std::uint8_t>*> spans(prog.decls.size(), nullptr);
  for (const Decl& d : prog.decls) {
    if (d.root == d.id && d.space == Space::kGlobal) {
      spans[static_cast<std::size_t>(d.id)] = &store.at(d.name).bytes;
    }
  }
  return spans;
}

void move_outputs(const Program& prog, std::map<std::string, TensorValue>& store,
                  std::map<std::string, TensorValue>& outputs) {
  for (const Decl& d : prog.decls) {
    if (d.root == d.id && d.space == Space::kGlobal && d.is_out) {
      outputs.emplace(d.name, std::move(store.at(d.name)));
    }
  }
}

}  // namespace

TensorValue TensorValue::zeros(Dtype dtype, std::vector<std::int64_t> shape) {
  TensorValue v;
  v.dtype = dtype;
  v.shape = std::move(shape);
  v.bytes.assign(static_cast<std::size_t>(v.elems()) *
                     static_cast<std::size_t>(dtype_bytes(dtype)),
                 0);
  return v;
}

std::int64_t TensorValue::elems() const {
  std::int64_t n = 1;
  for (std::int64_t e : shape) n *= e;
  return n;
}

double TensorValue::get(std::int64_t elem) const {
  const std::size_t off = static_cast<std::size_t>(elem) *
                          static_cast<std::size_t>(dtype_bytes(dtype));
  switch (dtype) {
    case Dtype::kFP32: {
      float f;
      std::memcpy(&f, bytes.data() + off, 4);
      return f;
    }
    case Dtype::kBF16: {
      std::uint16_t b = static_cast<std::uint16_t>(
          bytes[off] | (static_cast<unsigned>(bytes[off + 1]) << 8));
      return bf16_to_float(b);
    }
    case Dtype::kFP8:
      return fp8_to_float(bytes[off]);
    case Dtype::kI32: {
      std::int32_t x;
      std::memcpy(&x, bytes.data() + off, 4);
      return x;
    }
    default:
      throw Error(ErrorKind::kConfig,
                  std::string("no scalar accessor for element type ") +
                      dtype_name(dtype));
  }
}

void TensorValue::set(std::int64_t elem, double v) {
  const std::size_t off = static_cast<std::size_t>(elem) *
                          static_cast<std::size_t>(dtype_bytes(dtype));
  switch (dtype) {
    case Dtype::kFP32: {
      const float f = static_cast<float>(v);
      std::memcpy(bytes.data() + off, &f, 4);
      return;
    }
    case Dtype::kBF16: {
      const std::uint16_t b = bf16_from_float(static_cast<float>(v));
      bytes[off] = static_cast<std::uint8_t>(b);
      bytes[off + 1] = static_cast<std::uint8_t>(b >> 8);
      return;
    }
    case Dtype::kFP8:
      bytes[off] = fp8_from_float(static_cast<float>(v));
      return;
    case Dtype::kI32: {
      const std::int32_t x = static_cast<std::int32_t>(v);
      std::memcpy(bytes.data() + off, &x, 4);
      return;
    }
    default:
      throw Error(ErrorKind::kConfig,
                  std::string("no scalar accessor for element type ") +
                      dtype_name(dtype));
  }
}

RunResult run(const ir::Program& prog,
              const std::map<std::string, TensorValue>& inputs) {
  std::map<std::string, TensorValue> store = prepare_globals(prog, inputs);
  std::vector<std::vector<std::uint8_t>*> spans = global_spans(prog, store);
  RunResult out;
  for (std::int64_t b = 0; b < prog.blocks(); ++b) {
    BlockRun block(prog, spans, b % prog.grid_x, b / prog.grid_x, out.cost,
                   nullptr, nullptr, nullptr);
    block.run();
  }
  move_outputs(prog, store, out.outputs);
  return out;
}

DynamicRunResult run_with_tags(const ir::Program& prog,
                               const std::map<std::string, TensorValue>& inputs,
                               const DynOptions& opts) {
  std::map<std::string, TensorValue> store = prepare_globals(prog, inputs);
  std::vector<std::vector<std::uint8_t>*> spans = global_spans(prog, store);
  DynamicRunResult out;
  for (std::int64_t b = 0; b < prog.blocks(); ++b) {
    if (opts.only_block >= 0 && b != opts.only_block) continue;
    BlockRun block(prog, spans, b % prog.grid_x, b / prog.grid_x, out.cost,
                   &out.tags, &out.log, &opts);
    block.run();
  }
  move_outputs(prog, store, out.outputs);
  return out;
}

}  // namespace tilecheck::interp
