#include <array>
#include <mutex>
#include <set>

#include "omegaforge/borel.hpp"
#include "omegaforge/evaluator.hpp"

namespace omegaforge {

Word lenlex_word(std::uint64_t k) {
  std::uint64_t len = 0;
  while (len < 63 && (std::uint64_t{2} << len) - 1 <= k) ++len;
  std::uint64_t val = k + 1 - (std::uint64_t{1} << len);
  Word w(len);
  for (std::uint64_t i = 0; i < len; ++i) w[i] = (val >> (len - 1 - i)) & 1;
  return w;
}

namespace {

SpaceDesc pair_space() { return SpaceDesc::product(SpaceDesc::cantor(), SpaceDesc::cantor()); }

// Index of the word t in length-lex order of 2^{<omega}: 2^|t| - 1 + value(t).
// Along a branch delta the indices of its prefixes obey k' = 2k + 1 + delta(L).
class UniversalBase : public SpecialFamily {
 public:
  std::string name() const override { return "universal-base"; }
  json params() const override { return json::object(); }
  int member_rank() const override { return 1; }

  std::optional<Part> element(std::uint64_t m) const override {
    SpaceDesc s = pair_space();
    Atom a = Atom::full(s);
    a.pats[0].segs = {{{kAny}, Affine::constant(m)}, {{0}, Affine::constant(1)}};
    a.pats[0].normalize();
    a.pats[1] = Pattern::literal(lenlex_word(m));
    return Part::of_leaf({a});
  }

  // Some prefix of delta has an index k with beta(k) = 0.
  bool exact_exists(const ProductPoint& x) const override {
    const UPWord& beta = std::get<UPWord>(x[0]);
    const UPWord& delta = std::get<UPWord>(x[1]);
    const std::uint64_t Ub = beta.transient().size(), Vb = beta.period().size();
    const std::uint64_t Ud = delta.transient().size(), Vd = delta.period().size();
    std::uint64_t k = 0;  // exact while below Ub, afterwards (k - Ub) mod Vb
    bool big = false;
    std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
    for (std::uint64_t L = 0;; ++L) {
      Letter b = big ? beta.period()[k] : beta.at(k);
      if (b == 0) return true;
      if (big && L >= Ud) {
        std::uint64_t phase = (L - Ud) % Vd;
        if (!seen.insert({k, phase}).second) return false;
      }
      std::uint64_t d = delta.at(L);
      if (big) {
        // k' - Ub = 2(k_abs - Ub) + Ub + 1 + d
        k = (2 * k + Ub + 1 + d) % Vb;
      } else {
        k = 2 * k + 1 + d;
        if (k >= Ub) {
          big = true;
          k = (k - Ub) % Vb;
        }
      }
    }
  }
};

CodePtr universal_cached(int n);

LinearMap slice_map(std::uint64_t m) {
  SpaceDesc s = pair_space();
  return LinearMap{s, s, {{0, std::uint64_t{2} << m, (std::uint64_t{1} << m) - 1}, {1, 1, 0}}};
}

class UniversalStep : public SpecialFamily {
 public:
  explicit UniversalStep(int n) : n_(n) {}
  std::string name() const override { return "universal-step"; }
  json params() const override { return {{"n", n_}}; }
  int member_rank() const override { return n_ - 1; }

  std::optional<Part> element(std::uint64_t m) const override {
    if (m >= 61) return std::nullopt;
    return Part::of_code(make_mapped(universal_cached(n_ - 1), slice_map(m)));
  }

  // Some slice (beta)_m has [(beta)_m, delta] outside the previous level.
  // Once 2^m - 1 passes the transient, the slice only depends on 2^m mod V.
  bool exact_exists(const ProductPoint& x) const override {
    const UPWord& beta = std::get<UPWord>(x[0]);
    const Code& prev = *universal_cached(n_ - 1);
    const std::uint64_t U = beta.transient().size(), V = beta.period().size();
    std::uint64_t m = 0;
    for (; m < 62 && (std::uint64_t{1} << m) - 1 < U; ++m)
      if (!eval_exact_up(prev, {slice(beta, m), x[1]})) return true;
    std::uint64_t r = m < 62 ? (std::uint64_t{1} << m) % V : 0;
    if (m >= 62) return false;  // unreachable for realistic transients
    std::set<std::uint64_t> seen;
    while (seen.insert(r).second) {
      // (beta)_m(j) = beta(2^m (2j+1) - 1), a position past the transient
      Word v(V);
      for (std::uint64_t j = 0; j < V; ++j) v[j] = beta.period()[((r * (2 * j + 1)) % V + V - 1 + V - U % V) % V];
      if (!eval_exact_up(prev, {UPWord(beta.alphabet(), {}, v), x[1]})) return true;
      r = (2 * r) % V;
    }
    return false;
  }

 private:
  int n_;
};

CodePtr build_universal(int n) {
  if (n == 1) {
    Family f;
    f.parts.push_back(Part::of_special(std::make_shared<UniversalBase>()));
    return make_basic(pair_space(), std::move(f));
  }
  Family f;
  f.parts.push_back(Part::of_special(std::make_shared<UniversalStep>(n)));
  return make_unioncompl(pair_space(), std::move(f));
}

CodePtr universal_cached(int n) {
  static std::mutex mu;
  static std::vector<CodePtr> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() <= static_cast<std::size_t>(n)) cache.resize(n + 1);
  if (!cache[n]) cache[n] = build_universal(n);
  return cache[n];
}

}  // namespace

std::shared_ptr<const SpecialFamily> special_from_json(const json& j) {
  std::string name = j.value("name", "");
  if (name == "universal-base") return std::make_shared<UniversalBase>();
  if (name == "universal-step") {
    int n = j.value("n", 0);
    if (n < 2 || n > max_rank()) throw RankTooLarge("universal step of rank " + std::to_string(n));
    return std::make_shared<UniversalStep>(n);
  }
  throw UnknownName("special family \"" + name + "\"");
}

CodePtr universal_code(int n) {
  if (n < 1 || n > max_rank())
    throw RankTooLarge("rank " + std::to_string(n) + " outside [1, " + std::to_string(max_rank()) + "]");
  return universal_cached(n);
}

UPWord diagonal_point(const UPWord& beta) {
  auto twice = [](const Word& w) {
    Word r;
    for (Letter x : w) {
      r.push_back(x);
      r.push_back(x);
    }
    return r;
  };
  return UPWord(beta.alphabet(), twice(beta.transient()), twice(beta.period()));
}

CodePtr diagonal_set(int n) {
  SpaceDesc c = SpaceDesc::cantor();
  LinearMap psi{c, pair_space(), {{0, 2, 0}, {0, 2, 1}}};
  return substitute_code(universal_code(n), psi);
}

}  // namespace omegaforge
