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

#include "tilecheck/engine.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>

#include "tilecheck/diag.hpp"
#include "tilecheck/dtype.hpp"

namespace tilecheck {
namespace {

using ast::Expr;
using ast::ExprPtr;
using ir::Decl;
using ir::EvalCtx;
using ir::Instance;
using ir::Program;
using ir::Space;

// A phase that keeps reading bytes it also writes converges in a couple of
// passes (the tag lattice has height two and site sets are capped); hitting
// this bound means the dataflow itself is broken.
constexpr int kMaxPhaseIters = 100;

struct TP {
  Tag tag = kTagBottom;
  Prov prov = kProvEmpty;
};

// Tag and provenance of every byte of one root allocation. Register roots
// hold threads * bytes entries (one lane per thread); shared roots hold one
// entry per byte.
struct ByteStore {
  std::vector<Tag> tag;
  std::vector<Prov> prov;

  void reset(std::size_t n) {
    tag.assign(n, kTagBottom);
    prov.assign(n, kProvEmpty);
  }
  void reset_range(std::size_t lo, std::size_t n) {
    std::fill(tag.begin() + lo, tag.begin() + lo + n, kTagBottom);
    std::fill(prov.begin() + lo, prov.begin() + lo + n, kProvEmpty);
  }
  bool operator==(const ByteStore&) const = default;
};

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

class BlockAnalysis {
 public:
  BlockAnalysis(const Program& prog, std::int64_t bx, std::int64_t by,
                TagTable& tags, ProvTable& prov,
                const std::function<void(const Capture&)>& on_capture,
                bool capture_bytes)
      : prog_(prog),
        tags_(tags),
        prov_(prov),
        on_capture_(on_capture),
        capture_bytes_(capture_bytes),
        threads_(prog.threads) {
    ctx_.bx = bx;
    ctx_.by = by;
    ctx_.extra = &extra_;
    const std::size_t n = prog.decls.size();
    reg_.resize(n);
    shm_.resize(n);
    shm_read_.resize(n);
    global_tag_.resize(n);
    for (const Decl& d : prog.decls) {
      if (d.root != d.id) continue;
      std::size_t bytes = static_cast<std::size_t>(d.bytes());
      if (d.space == Space::kRegister) {
        reg_[d.id].reset(static_cast<std::size_t>(threads_) * bytes);
      } else if (d.space == Space::kShared) {
        shm_[d.id].reset(bytes);
        shm_read_[d.id].assign(bytes, 0);
        shared_roots_.push_back(d.id);
      }
    }
  }

  void run() {
    const std::vector<Instance>& code = prog_.code;
    std::size_t pos = 0;
    while (pos < code.size()) {
      std::size_t end = pos;
      while (end < code.size() && code[end].kind != Instance::Kind::kSync) {
        ++end;
      }
      if (end < code.size()) ++end;  // the barrier closes its phase
      run_phase(pos, end);
      pos = end;
    }
  }

 private:
  // ---- phase fixpoint -------------------------------------------------------

  void run_phase(std::size_t begin, std::size_t end) {
    shm_entry_ = shm_;
    shm_prev_ = shm_;
    std::vector<ByteStore> reg_snapshot = reg_;
    for (int iter = 0;; ++iter) {
      if (iter == kMaxPhaseIters) {
        throw Error(ErrorKind::kInternal,
                    "tag dataflow did not converge within " +
                        std::to_string(kMaxPhaseIters) + " passes");
      }
      if (iter > 0) {
        reg_ = reg_snapshot;
        shm_ = shm_entry_;
      }
      captures_.clear();
      for (int root : shared_roots_) {
        std::fill(shm_read_[root].begin(), shm_read_[root].end(), 0);
      }
      for (std::size_t i = begin; i < end; ++i) {
        exec(prog_.code[i], static_cast<std::int32_t>(i));
      }
      bool stable = true;
      for (int root : shared_roots_) {
        const std::vector<char>& read = shm_read_[root];
        const ByteStore& now = shm_[root];
        const ByteStore& seen = shm_prev_[root];
        for (std::size_t b = 0; b < read.size() && stable; ++b) {
          if (read[b] != 0 &&
              (now.tag[b] != seen.tag[b] || now.prov[b] != seen.prov[b])) {
            stable = false;
          }
        }
        if (!stable) break;
      }
      if (stable) break;
      shm_prev_ = shm_;
    }
    for (const Capture& c : captures_) on_capture_(c);
  }

  // ---- byte access ----------------------------------------------------------

  std::size_t lane(const Decl& root, std::int64_t byte) const {
    return static_cast<std::size_t>(ctx_.tid * root.bytes() + byte);
  }

  TP read_byte(const Decl& root, std::int64_t byte, std::int32_t site) {
    switch (root.space) {
      case Space::kRegister: {
        const ByteStore& s = reg_[root.id];
        std::size_t i = lane(root, byte);
        return {s.tag[i], s.prov[i]};
      }
      case Space::kShared: {
        std::size_t b = static_cast<std::size_t>(byte);
        shm_read_[root.id][b] = 1;
        const ByteStore& entry = shm_entry_[root.id];
        const ByteStore& prev = shm_prev_[root.id];
        return {TagTable::merge(entry.tag[b], prev.tag[b]),
                prov_.unite(entry.prov[b], prev.prov[b])};
      }
      case Space::kGlobal:
        return {global_byte_tag(root, byte), prog_.tag_fns[root.id].has_value()
                                                 ? prov_.of_site(site)
                                                 : kProvEmpty};
    }
    return {};
  }

  void write_byte(const Decl& root, std::int64_t byte, TP v, Prov stamped) {
    switch (root.space) {
      case Space::kRegister: {
        ByteStore& s = reg_[root.id];
        std::size_t i = lane(root, byte);
        s.tag[i] = v.tag;
        s.prov[i] = v.prov;
        return;
      }
      case Space::kShared: {
        ByteStore& s = shm_[root.id];
        std::size_t b = static_cast<std::size_t>(byte);
        s.tag[b] = TagTable::merge(s.tag[b], v.tag);
        s.prov[b] = prov_.unite(s.prov[b], stamped);
        return;
      }
      case Space::kGlobal:
        return;  // store targets are not tracked; tensor tags are declared
    }
  }

  // Tag of one byte of a tagged global tensor: the tag function applied to
  // the coordinates of the element the byte belongs to (memoized per
  // element). Untagged tensors read as bottom.
  Tag global_byte_tag(const Decl& root, std::int64_t byte) {
    const std::optional<ir::TagFn>& fn = prog_.tag_fns[root.id];
    if (!fn.has_value()) return kTagBottom;
    std::int64_t elem = byte / dtype_bytes(root.dtype);
    std::vector<Tag>& cache = global_tag_[root.id];
    if (cache.empty()) {
      cache.assign(static_cast<std::size_t>(root.layout.size()), Tag{-1});
    }
    Tag& slot = cache[static_cast<std::size_t>(elem)];
    if (slot >= 0) return slot;

    // Tensors are row-major contiguous, so delinearize last dim fastest.
    const std::size_t rank = root.layout.rank();
    std::array<std::int64_t, 8> coord{};
    std::int64_t rem = elem;
    for (std::size_t i = rank; i > 0; --i) {
      std::int64_t extent = root.layout.extent(i - 1);
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
    return tags_.intern(tuple_buf_);
  }

  // Linear element offset of a full-rank access, relative to the decl's
  // root (views alias their root's whole byte span from offset zero).
  std::int64_t element_of(const Decl& d, const std::vector<ExprPtr>& indices) {
    std::array<std::int64_t, 8> coord{};
    for (std::size_t i = 0; i < indices.size(); ++i) {
      coord[i] = ir::eval_index(indices[i], ctx_);
    }
    return d.layout.eval(std::span(coord.data(), indices.size()));
  }

  // Folds the tag and provenance of one element's bytes.
  TP fold_element(const Decl& d, std::int64_t elem, std::int32_t site) {
    const Decl& root = prog_.decls[d.root];
    std::int64_t w = dtype_bytes(d.dtype);
    TP out;
    for (std::int64_t k = 0; k < w; ++k) {
      TP b = read_byte(root, elem * w + k, site);
      out.tag = TagTable::merge(out.tag, b.tag);
      out.prov = prov_.unite(out.prov, b.prov);
    }
    return out;
  }

  // ---- value folding --------------------------------------------------------

  // Tag and provenance of a right-hand side: loads fold the bytes they read,
  // literals and index leaves are bottom, every operator merges its inputs,
  // and a select merges both arms (the analysis is path-insensitive in data).
  TP value_tp(const ExprPtr& e, std::int32_t site) {
    switch (e->kind) {
      case Expr::Kind::kIntLit:
      case Expr::Kind::kFloatLit:
      case Expr::Kind::kVar:
        return {};
      case Expr::Kind::kSubscript: {
        const Decl& d = prog_.decls[prog_.decl_by_name.at(e->name)];
        return fold_element(d, element_of(d, e->args), site);
      }
      case Expr::Kind::kCond: {
        TP a = value_tp(e->args[1], site);
        TP b = value_tp(e->args[2], site);
        return {TagTable::merge(a.tag, b.tag), prov_.unite(a.prov, b.prov)};
      }
      case Expr::Kind::kBin:
      case Expr::Kind::kCmp:
      case Expr::Kind::kCall: {
        TP out;
        for (const ExprPtr& a : e->args) {
          TP v = value_tp(a, site);
          out.tag = TagTable::merge(out.tag, v.tag);
          out.prov = prov_.unite(out.prov, v.prov);
        }
        return out;
      }
      case Expr::Kind::kTagOf:
        break;
    }
    throw Error(ErrorKind::kInternal, "bad value expression");
  }

  // ---- instances ------------------------------------------------------------

  void exec(const Instance& inst, std::int32_t ci) {
    switch (inst.kind) {
      case Instance::Kind::kSync:
      case Instance::Kind::kMatmul:  // consumes fragments, moves no tags
        return;
      case Instance::Kind::kLocalInit:
      case Instance::Kind::kTagReset:
        exec_reset(inst);
        return;
      case Instance::Kind::kCopy:
        exec_copy(inst, ci);
        return;
      case Instance::Kind::kConcat:
        exec_concat(inst, ci);
        return;
      case Instance::Kind::kRetag:
        exec_retag(inst);
        return;
      case Instance::Kind::kAssert:
        exec_assert(inst, ci);
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

  void exec_reset(const Instance& inst) {
    const Decl& target = prog_.decls[inst.dst.decl];
    const Decl& root = prog_.decls[target.root];
    std::size_t bytes = static_cast<std::size_t>(root.bytes());
    if (root.space == Space::kShared) {
      if (any_thread_passes(inst)) shm_[root.id].reset_range(0, bytes);
      return;
    }
    for (std::int64_t t = 0; t < threads_; ++t) {
      ctx_.tid = t;
      if (!ir::guards_hold(inst, ctx_)) continue;
      reg_[root.id].reset_range(static_cast<std::size_t>(t) * bytes, bytes);
    }
  }

  void exec_copy(const Instance& inst, std::int32_t ci) {
    const Decl& dst = prog_.decls[inst.dst.decl];
    const Decl& dst_root = prog_.decls[dst.root];
    const std::int64_t w = dtype_bytes(dst.dtype);

    // A bare same-width load is a raw move: bytes keep their own tags. Any
    // other right-hand side folds to one value stamped across the element.
    const Decl* src = nullptr;
    if (inst.value->kind == Expr::Kind::kSubscript) {
      const Decl& cand = prog_.decls[prog_.decl_by_name.at(inst.value->name)];
      if (cand.dtype == dst.dtype) src = &cand;
    }

    for (std::int64_t t = 0; t < threads_; ++t) {
      ctx_.tid = t;
      if (!ir::guards_hold(inst, ctx_)) continue;
      std::int64_t base = element_of(dst, inst.dst.indices) * w;
      if (src != nullptr) {
        const Decl& src_root = prog_.decls[src->root];
        std::int64_t sbase = element_of(*src, inst.value->args) * w;
        for (std::int64_t k = 0; k < w; ++k) {
          TP v = read_byte(src_root, sbase + k, ci);
          write_byte(dst_root, base + k, v, prov_.add(v.prov, ci));
        }
      } else {
        TP v = value_tp(inst.value, ci);
        Prov stamped = prov_.add(v.prov, ci);
        for (std::int64_t k = 0; k < w; ++k) {
          write_byte(dst_root, base + k, v, stamped);
        }
      }
    }
  }

  void exec_concat(const Instance& inst, std::int32_t ci) {
    const Decl& dst = prog_.decls[inst.dst.decl];
    const Decl& dst_root = prog_.decls[dst.root];
    const std::int64_t w = dtype_bytes(dst.dtype);
    const std::int64_t part = w / 4;  // half of each source word

    for (std::int64_t t = 0; t < threads_; ++t) {
      ctx_.tid = t;
      if (!ir::guards_hold(inst, ctx_)) continue;
      std::int64_t base = element_of(dst, inst.dst.indices) * w;
      for (std::size_t i = 0; i < inst.sources.size(); ++i) {
        const Decl& src = prog_.decl_of(inst.sources[i]);
        const Decl& src_root = prog_.decls[src.root];
        std::int64_t sw = dtype_bytes(src.dtype);
        std::int64_t sbase = element_of(src, inst.sources[i].indices) * sw +
                             (inst.concat_hi ? sw / 2 : 0);
        for (std::int64_t k = 0; k < part; ++k) {
          TP v = read_byte(src_root, sbase + k, ci);
          write_byte(dst_root, base + static_cast<std::int64_t>(i) * part + k,
                     v, prov_.add(v.prov, ci));
        }
      }
    }
  }

  void exec_retag(const Instance& inst) {
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
        Tag tag = eval_tag_fn(fn, coord);
        std::int64_t base = target.layout.eval(coord) * w;
        // Strong tag re-stamp; the bytes' store sites are unchanged.
        for (std::int64_t k = 0; k < w; ++k) {
          if (root.space == Space::kRegister) {
            reg_[root.id].tag[lane(root, base + k)] = tag;
          } else {
            shm_[root.id].tag[static_cast<std::size_t>(base + k)] = tag;
          }
        }
      });
    }
  }

  void exec_assert(const Instance& inst, std::int32_t ci) {
    for (std::int64_t t = 0; t < threads_; ++t) {
      ctx_.tid = t;
      if (!ir::guards_hold(inst, ctx_)) continue;
      for_each_point(inst.quant_counts,
                     [&](const std::vector<std::int64_t>& point) {
                       for (std::size_t i = 0; i < point.size(); ++i) {
                         extra_[inst.quant_vars[i]] = point[i];
                       }
                       Capture c;
                       c.code_index = ci;
                       c.thread = t;
                       c.qpoint = point;
                       read_side(inst.assert_left, ci, c.left_coord,
                                 c.left_tag, c.left_writers,
                                 c.left_byte_tags);
                       read_side(inst.assert_right, ci, c.right_coord,
                                 c.right_tag, c.right_writers,
                                 c.right_byte_tags);
                       captures_.push_back(std::move(c));
                       for (const std::string& q : inst.quant_vars) {
                         extra_.erase(q);
                       }
                     });
    }
  }

  void read_side(const ExprPtr& ref, std::int32_t ci,
                 std::vector<std::int64_t>& coord, Tag& tag, Prov& writers,
                 std::vector<Tag>& byte_tags) {
    const Decl& d = prog_.decls[prog_.decl_by_name.at(ref->name)];
    for (const ExprPtr& ix : ref->args) {
      coord.push_back(ir::eval_index(ix, ctx_));
    }
    std::int64_t elem = d.layout.eval(coord);
    if (capture_bytes_) {
      const Decl& root = prog_.decls[d.root];
      std::int64_t w = dtype_bytes(d.dtype);
      TP out;
      for (std::int64_t k = 0; k < w; ++k) {
        TP b = read_byte(root, elem * w + k, ci);
        byte_tags.push_back(b.tag);
        out.tag = TagTable::merge(out.tag, b.tag);
        out.prov = prov_.unite(out.prov, b.prov);
      }
      tag = out.tag;
      writers = out.prov;
      return;
    }
    TP v = fold_element(d, elem, ci);
    tag = v.tag;
    writers = v.prov;
  }

  const Program& prog_;
  TagTable& tags_;
  ProvTable& prov_;
  const std::function<void(const Capture&)>& on_capture_;
  const bool capture_bytes_;
  const std::int64_t threads_;

  EvalCtx ctx_;
  std::map<std::string, std::int64_t> extra_;
  std::vector<std::int64_t> tuple_buf_;

  std::vector<ByteStore> reg_, shm_;        // live state, by root decl id
  std::vector<ByteStore> shm_entry_, shm_prev_;  // phase-entry / last-pass
  std::vector<std::vector<char>> shm_read_;
  std::vector<int> shared_roots_;
  std::vector<std::vector<Tag>> global_tag_;
  std::vector<Capture> captures_;
};

}  // namespace

void analyze_block(const Program& prog, std::int64_t bx, std::int64_t by,
                   TagTable& tags, ProvTable& prov,
                   const std::function<void(const Capture&)>& on_capture,
                   bool capture_bytes) {
  BlockAnalysis(prog, bx, by, tags, prov, on_capture, capture_bytes).run();
}

}  // namespace tilecheck
