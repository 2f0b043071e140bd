#pragma once

// Random and exhaustive code corpora plus a reference semantics that shares
// nothing with the library evaluator.

#include <random>
#include <vector>

#include "omegaforge/borel.hpp"
#include "omegaforge/evaluator.hpp"

namespace testgen {

using namespace omegaforge;
using Rng = std::mt19937_64;

inline std::uint64_t pick(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

inline Word random_word(Rng& rng, std::size_t max_len, std::uint64_t k = 2) {
  Word w(pick(rng, 0, max_len));
  for (auto& x : w) x = pick(rng, 0, k - 1);
  return w;
}

inline UPWord random_up(Rng& rng, std::size_t max_u = 4, std::size_t max_v = 4, std::uint64_t k = 2) {
  Word u = random_word(rng, max_u, k);
  Word v(pick(rng, 1, max_v));
  for (auto& x : v) x = pick(rng, 0, k - 1);
  return UPWord(Alphabet{k}, u, v);
}

// Concrete finite-list code of exactly the given rank over k^omega.
inline CodePtr random_code(Rng& rng, int r, std::size_t depth, std::uint64_t k = 2, bool atoms = false) {
  SpaceDesc s = SpaceDesc::seq(k);
  if (r == 1) {
    std::vector<Leaf> leaves;
    std::size_t n = pick(rng, 0, 3);
    for (std::size_t i = 0; i < n; ++i) {
      Leaf l{Atom::prefix(s, {random_word(rng, depth, k)})};
      if (atoms && pick(rng, 0, 2) == 0) l.push_back(Atom::prefix(s, {random_word(rng, depth, k)}).negate());
      leaves.push_back(std::move(l));
    }
    return make_basic(s, Family::of_leaves(std::move(leaves)));
  }
  std::vector<CodePtr> kids{random_code(rng, r - 1, depth, k, atoms)};
  std::size_t extra = pick(rng, 0, 2);
  for (std::size_t i = 0; i < extra; ++i) kids.push_back(random_code(rng, static_cast<int>(pick(rng, 1, r - 1)), depth, k, atoms));
  std::shuffle(kids.begin(), kids.end(), rng);
  return make_unioncompl(s, Family::of_codes(std::move(kids)));
}

// All codes of rank <= 2 over 2^omega with at most two children and
// cylinders of depth <= 2.
inline std::vector<CodePtr> exhaustive_corpus() {
  SpaceDesc s = SpaceDesc::cantor();
  std::vector<Word> words;
  for (std::size_t n = 0; n <= 2; ++n)
    for (auto& w : all_words(Alphabet{2}, n)) words.push_back(w);
  std::vector<CodePtr> r1;
  r1.push_back(empty_code(s));
  for (auto& a : words) r1.push_back(cylinders_code(s, {a}));
  for (auto& a : words)
    for (auto& b : words) r1.push_back(cylinders_code(s, {a, b}));
  std::vector<CodePtr> out = r1;
  out.push_back(make_unioncompl(s, Family{}));
  for (auto& a : r1) out.push_back(make_unioncompl(s, Family::of_codes({a})));
  for (std::size_t i = 0; i < r1.size(); i += 2)
    for (std::size_t j = 0; j < r1.size(); j += 3) out.push_back(make_unioncompl(s, Family::of_codes({r1[i], r1[j]})));
  return out;
}

// Membership of w·0^omega, read straight off the syntax of a concrete
// finite-list code on a single sequence factor.
inline bool ref_member(const Code& c, const Word& w) {
  auto letter = [&](std::size_t p) -> Letter { return p < w.size() ? w[p] : 0; };
  if (c.kind == Code::Kind::UnionCompl) {
    for (auto& p : c.family.parts)
      if (!ref_member(*p.code, w)) return true;
    return false;
  }
  for (auto& p : c.family.parts) {
    bool all = true;
    for (auto& a : p.leaf) {
      Word pre = a.pats[0].instantiate(Env{});
      bool in = !a.empty;
      for (std::size_t i = 0; i < pre.size() && in; ++i)
        if (pre[i] != kAny && pre[i] != letter(i)) in = false;
      if (in == a.negated) all = false;
    }
    if (all) return true;
  }
  return false;
}

inline std::vector<Word> ref_set(const Code& c, std::size_t d, std::uint64_t k = 2) {
  std::vector<Word> out;
  for (auto& w : all_words(Alphabet{k}, d))
    if (ref_member(c, w)) out.push_back(w);
  return out;
}

inline ProductPoint pt(const UPWord& w) { return ProductPoint{w}; }

inline UPWord word_point(const Word& w, std::uint64_t k = 2) { return UPWord(Alphabet{k}, w, {0}); }

// Random schema codes over 2^omega, rank <= r, for exactness sweeps. Counts
// may mention any enclosing schema variable.
inline Affine random_count(Rng& rng, const std::vector<std::string>& vars) {
  Affine cnt = Affine::constant(pick(rng, 0, 2));
  for (auto& v : vars)
    if (pick(rng, 0, 1)) cnt = cnt + Affine::var(v, pick(rng, 1, 2));
  if (cnt == Affine::constant(0)) cnt = Affine::constant(1);
  return cnt;
}

inline Pattern random_template(Rng& rng, const std::vector<std::string>& vars) {
  Pattern p;
  std::size_t segs = pick(rng, 1, 3);
  for (std::size_t i = 0; i < segs; ++i) {
    Word blk = random_word(rng, 2);
    if (blk.empty()) blk.push_back(pick(rng, 0, 1));
    if (pick(rng, 0, 3) == 0) blk[0] = kAny;
    p.segs.push_back({blk, pick(rng, 0, 2) ? random_count(rng, vars) : Affine::constant(1)});
  }
  p.normalize();
  return p;
}

inline CodePtr random_schema_code(Rng& rng, int r, int* counter, std::vector<std::string> vars = {}) {
  SpaceDesc s = SpaceDesc::cantor();
  std::string var = "v" + std::to_string((*counter)++);
  auto bound = [&]() -> std::optional<Affine> {
    switch (pick(rng, 0, 3)) {
      case 0: return Affine::constant(pick(rng, 1, 6));
      case 1: return vars.empty() ? std::nullopt : std::optional<Affine>(Affine::var(vars.back()));
      default: return std::nullopt;
    }
  };
  if (r == 1) {
    Family f;
    auto b = bound();
    vars.push_back(var);
    Atom a = Atom::full(s);
    a.pats[0] = random_template(rng, vars);
    if (pick(rng, 0, 4) == 0) a = a.negate();
    f.parts.push_back(Part::schema(var, b, Family::of_leaves({{a}})));
    if (pick(rng, 0, 1)) f.parts.push_back(Part::of_leaf({Atom::prefix(s, {random_word(rng, 3)})}));
    return make_basic(s, std::move(f));
  }
  Family f;
  if (pick(rng, 0, 1)) {
    auto b = bound();
    auto inner = vars;
    inner.push_back(var);
    f.parts.push_back(Part::schema(var, b, Family::of_codes({random_schema_code(rng, r - 1, counter, inner)})));
  } else {
    f.parts.push_back(Part::of_code(random_schema_code(rng, r - 1, counter, vars)));
  }
  if (pick(rng, 0, 1)) f.parts.push_back(Part::of_code(random_code(rng, 1, 3)));
  return make_unioncompl(s, std::move(f));
}

}  // namespace testgen
