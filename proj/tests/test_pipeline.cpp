#include <doctest.h>

#include <random>

#include "gen.hpp"
#include "omegaforge/errors.hpp"
#include "omegaforge/pipeline.hpp"

using namespace omegaforge;
using namespace testgen;

namespace {

const Alphabet A2{2};
const Alphabet A4{4};

CodePtr full_b() { return complement_code(empty_code(SpaceDesc::cantor())); }
CodePtr empty_b() { return complement_code(full_code(SpaceDesc::cantor())); }

UPWord random_gamma(Rng& rng) {
  // Mostly block-shaped words so that the mu side is exercised.
  if (pick(rng, 0, 2) == 0) return random_up(rng, 4, 6, 4);
  Word u(pick(rng, 0, 2), kRun), v;
  std::size_t blocks = pick(rng, 1, 3);
  for (std::size_t i = 0; i < blocks; ++i) {
    v.push_back(static_cast<Letter>(pick(rng, 0, 1)));
    v.insert(v.end(), pick(rng, 0, 1) ? 4 : 0, kRun);
    v.push_back(kMark);
    v.insert(v.end(), pick(rng, 0, 5), kRun);
  }
  return UPWord(A4, u, v);
}

}  // namespace

TEST_CASE("run-length coding") {
  CHECK(run_length([](std::uint64_t k) { return k % 3; }, 7) == Word{1, 0, 1, 0, 0, 1, 1});
  auto [w, z] = run_length_decode(Word{1, 0, 1, 0, 0});
  CHECK(w == Word{0, 1});
  CHECK(z == 2);
}

TEST_CASE("derived trees") {
  // Identity on P_infinity: the diagonal, checked on all pairs up to length 6.
  Construction pinf = construct(p_infinity_code(), "pi");
  CHECK(pinf.ambient == Ambient::Identity);
  CHECK(pinf.rtree->kind() == TransitionTree::Kind::Diagonal);
  for (std::size_t l = 0; l <= 6; ++l)
    for (auto& t : all_words(A2, l))
      for (auto& s : all_words(A2, l)) REQUIRE(pinf.rtree->contains(t, s) == (t == s));

  // Base-case embedding of 2^omega: pairs (run-length of s, s).
  Construction full = construct(full_b(), "pi");
  CHECK(full.rtree->kind() == TransitionTree::Kind::Custom);
  for (std::size_t l = 0; l <= 6; ++l)
    for (auto& t : all_words(A2, l))
      for (auto& s : all_words(A2, l)) {
        bool want = false;
        // some delta in 2^omega extending s with run-length code extending t
        Word code;
        for (Letter x : s) {
          code.insert(code.end(), x, 0);
          code.push_back(1);
        }
        want = Word(code.begin(), code.begin() + static_cast<long>(l)) == t;
        REQUIRE(full.rtree->contains(t, s) == want);
      }

  Construction none = construct(empty_b(), "sigma");
  CHECK(none.rtree->kind() == TransitionTree::Kind::Empty);
  CHECK(none.rtree->contains({}, {}));
  CHECK_FALSE(none.rtree->contains({0}, {0}));
}

TEST_CASE("construction examples") {
  Construction pinf = construct(p_infinity_code(), "pi");
  CHECK(pinf.intended_class() == "Pi^0_2");
  CHECK(!pinf.dict.enumerate(12).empty());
  // pi words present: some dictionary word is not a mu word
  bool has_pi = false;
  for (auto& w : pinf.dict.enumerate(12)) has_pi = has_pi || !mu_member(w).any();
  CHECK(has_pi);

  Construction full = construct(full_b(), "pi");
  for (auto& a : enumerate_up(A2, 3, 3)) CHECK(en_member(0, a, full.bctx));

  Construction none = construct(empty_b(), "sigma");
  for (auto& a : enumerate_up(A2, 2, 2)) CHECK_FALSE(en_member(0, a, none.bctx));

  for (auto& a : enumerate_up(A2, 3, 3)) {
    bool in = std::count(a.period().begin(), a.period().end(), 1) > 0;
    REQUIRE(en_member(0, a, pinf.bctx) == in);
  }
  CHECK_THROWS_AS(construct(p_infinity_code(), "delta"), ParseError);
  CHECK_THROWS_AS(construct(cylinders_code(SpaceDesc::cantor(), {{0}}), "pi"), NotPiForm);
}

TEST_CASE("construction json round trip") {
  Construction c = construct(p_infinity_code(), "pi");
  json j = c.to_json();
  Construction d = construction_from_json(j);
  CHECK(d.to_json() == j);
  CHECK(j["rtree"]["kind"] == "diagonal");
}

TEST_CASE("partition examples") {
  Construction pinf = construct(p_infinity_code(), "pi");
  Budget b;
  // a pure mu-block repetition
  UPWord mu_rep(A4, {}, {0, kMark});
  auto r = partition_check(pinf, mu_rep, b);
  CHECK(r.decomposition.kind == Decomposition::Kind::MuCandidate);
  CHECK_FALSE(r.contradiction());
  CHECK(r.rhs != Truth3::Unknown);

  // K tail over a point of B
  auto k = partition_check_k(pinf, 0, UPWord::parse("|01", A2), b);
  CHECK(k.decomposition.kind == Decomposition::Kind::Triple);
  CHECK(k.decomposition.t.empty());
  CHECK(k.decomposition.s == 0);
  CHECK(k.rhs == Truth3::True);
  CHECK(k.lhs == Truth3::True);

  // a word outside the block shape: both sides false
  auto bad = partition_check(pinf, UPWord(A4, {}, {kMark, kMark}), b);
  CHECK(bad.shape_violation);
  CHECK(bad.lhs == Truth3::False);
  CHECK(bad.rhs == Truth3::False);
}

TEST_CASE("partition identity has no definite contradiction") {
  Rng rng(300);
  Budget b;
  std::vector<Construction> cs{construct(empty_b(), "sigma"), construct(full_b(), "pi"),
                               construct(p_infinity_code(), "pi")};
  std::size_t definite = 0;
  for (int i = 0; i < 300; ++i) {
    UPWord g = random_gamma(rng);
    for (auto& c : cs) {
      auto r = partition_check(c, g, b);
      REQUIRE_MESSAGE(!r.contradiction(), r.to_json().dump());
      definite += r.lhs != Truth3::Unknown && r.rhs != Truth3::Unknown;
    }
  }
  CHECK(definite > 600);
  for (auto& c : cs)
    for (auto& a : enumerate_up(A2, 2, 2))
      for (std::uint64_t n : {0, 1, 4}) {
        auto r = partition_check_k(c, n, a, b);
        REQUIRE_MESSAGE(!r.contradiction(), r.to_json().dump());
      }
}
