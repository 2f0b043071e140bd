#include <doctest.h>

#include "gen.hpp"

using namespace omegaforge;
using namespace testgen;

namespace {

const SpaceDesc C2 = SpaceDesc::cantor();
const SpaceDesc C22 = SpaceDesc::product(C2, C2);

Word w(const char* s) { return word_from_string(s, Alphabet{2}); }
UPWord up(const char* s) { return UPWord::parse(s, Alphabet{2}); }

std::vector<Word> words(std::initializer_list<const char*> l) {
  std::vector<Word> r;
  for (auto s : l) r.push_back(w(s));
  return r;
}

CodePtr cyl(std::initializer_list<const char*> l) { return cylinders_code(C2, words(l)); }

bool exact(const CodePtr& c, const UPWord& x) { return eval_exact_up(*c, {x}); }

}  // namespace

TEST_CASE("rank") {
  CHECK(rank(*cyl({"0"})) == 1);
  CHECK(rank(*make_unioncompl(C2, Family::of_codes({cyl({"0"}), cyl({"1"})}))) == 2);
  auto r2 = make_unioncompl(C2, Family::of_codes({cyl({"1"})}));
  CHECK(rank(*make_unioncompl(C2, Family::of_codes({cyl({"0"}), r2}))) == 3);
  CHECK(rank(*p_infinity_code()) == 3);
  for (int r = 1; r <= 4; ++r) {
    CHECK(rank(*empty_of_rank(C2, r)) == r);
    CHECK(rank(*full_of_rank(C2, r)) == r);
    CHECK(brute_cylinders(*empty_of_rank(C2, r), 2).empty());
    CHECK(brute_cylinders(*full_of_rank(C2, r), 2).size() == 4);
  }
}

TEST_CASE("complement") {
  CHECK(brute_cylinders(*complement_code(empty_code(C2)), 2).size() == 4);
  CHECK(brute_cylinders(*complement_code(cyl({"0"})), 1) == words({"1"}));
  CHECK(brute_cylinders(*complement_code(cyl({"0"})), 2) == words({"10", "11"}));
  for (auto& c : exhaustive_corpus()) {
    CHECK(rank(*complement_code(c)) == rank(*c) + 1);
    CHECK(brute_cylinders(*complement_code(complement_code(c)), 3) == ref_set(*c, 3));
  }
}

TEST_CASE("sections") {
  CodePtr full = full_code(C22);
  CHECK(brute_cylinders(*section_code(full, {up("|01")}), 2).size() == 4);
  CodePtr c = make_basic(C22, Family::of_leaves({{Atom::prefix(C22, {w("0"), w("1")})}}));
  CodePtr at0 = section_code(c, {up("|0")});
  CHECK(canonical_dump(*at0) == canonical_dump(*cyl({"1"})));
  CodePtr at1 = section_code(c, {up("|1")});
  CHECK(brute_cylinders(*at1, 2).empty());
  CHECK(rank(*at1) == 1);

  // negated atoms and higher ranks, against exact evaluation of the product
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    std::vector<Leaf> leaves;
    for (int i = 0; i < 3; ++i) {
      Atom a = Atom::prefix(C22, {random_word(rng, 2), random_word(rng, 2)});
      if (pick(rng, 0, 2) == 0) a = a.negate();
      leaves.push_back({a});
    }
    CodePtr b = make_basic(C22, Family::of_leaves(leaves));
    CodePtr u = pick(rng, 0, 1) ? complement_code(b) : b;
    UPWord x = random_up(rng, 2, 2);
    CodePtr s = section_code(u, {x});
    CHECK(rank(*s) == rank(*u));
    for (auto& y : enumerate_up(Alphabet{2}, 2, 2)) REQUIRE(exact(s, y) == eval_exact_up(*u, {x, y}));
  }
  CHECK_THROWS_AS(section_code(c, {up("|0"), up("|0")}), SpaceMismatch);
  CHECK_THROWS_AS(section_code(c, {Component{std::uint64_t{3}}}), SpaceMismatch);
}

TEST_CASE("pullbacks") {
  Rng rng(11);
  LinearMap id = LinearMap::identity(C2);
  for (int t = 0; t < 100; ++t) {
    CodePtr c = random_code(rng, 1 + t % 3, 3);
    CHECK(brute_cylinders(*substitute_code(c, id), 3) == brute_cylinders(*c, 3));
  }
  // delta -> (delta)_0 reads positions 2j
  LinearMap proj{C2, C2, {{0, 2, 0}}};
  CodePtr p = substitute_code(cyl({"1"}), proj);
  CHECK(brute_cylinders(*p, 1) == words({"1"}));
  CHECK(rank(*p) == 1);
  CodePtr p2 = substitute_code(cyl({"10"}), proj);
  CHECK(brute_cylinders(*p2, 3) == words({"100", "110"}));

  SpaceDesc c4 = SpaceDesc::seq(4);
  GeneralMap widen{C2, c4, [](const Word& s) { return s; }};
  CodePtr over4 = make_basic(c4, Family::of_leaves({{Atom::prefix(c4, {{2}})}, {Atom::prefix(c4, {{0, 1}})}, {Atom::prefix(c4, {{1}}).negate()}}));
  CodePtr back = substitute_code(over4, widen);
  std::vector<Word> expect;
  for (auto& v : brute_cylinders(*over4, 2))
    if (v[0] < 2 && v[1] < 2) expect.push_back(v);
  CHECK(brute_cylinders(*back, 2) == expect);

  GeneralMap halting{C2, C2, [](const Word&) { return Word{}; }};
  CHECK_THROWS_AS(substitute_code(cyl({"1"}), halting), PullbackNotRepresentable);

  // templates pull back syntactically under arithmetic maps
  CodePtr pinf = p_infinity_code();
  LinearMap evens{C2, C2, {{0, 2, 1}}};
  CodePtr pulled = substitute_code(pinf, evens);
  CHECK(rank(*pulled) == 3);
  for (auto& x : enumerate_up(Alphabet{2}, 3, 4)) REQUIRE(exact(pulled, x) == exact(pinf, arith_subsequence(x, 2, 1)));
}

TEST_CASE("promote") {
  CodePtr p = promote_code(cyl({"0"}));
  CHECK(rank(*p) == 2);
  CHECK(brute_cylinders(*p, 2) == words({"00", "01"}));
  CodePtr u = complement_code(cyl({"0"}));
  CHECK(promote_code(u) == u);
  CodePtr e = promote_code(empty_code(C2));
  CHECK(rank(*e) == 2);
  CHECK(brute_cylinders(*e, 2).empty());
  for (auto& c : exhaustive_corpus()) CHECK(brute_cylinders(*promote_code(c), 4) == ref_set(*c, 4));
}

TEST_CASE("finite boolean combinations") {
  CodePtr a = cyl({"0"});
  CHECK(brute_cylinders(*bool_code(BoolOp::Union, {a, empty_code(C2)}), 2) == words({"00", "01"}));
  CodePtr i = bool_code(BoolOp::Intersect, {cyl({"0"}), cyl({"00", "01"})});
  CHECK(brute_cylinders(*i, 2) == words({"00", "01"}));
  CHECK(rank(*i) == 1);
  Rng rng(3);
  CodePtr r3 = random_code(rng, 3, 2);
  CHECK(rank(*bool_code(BoolOp::Union, {a, r3})) == 3);
  CHECK(rank(*bool_code(BoolOp::Intersect, {a, r3})) == 3);
  CHECK_THROWS_AS(bool_code(BoolOp::Union, {a, full_code(C22)}), SpaceMismatch);

  auto corpus = exhaustive_corpus();
  for (std::size_t x = 0; x < corpus.size(); x += 17)
    for (std::size_t y = 0; y < corpus.size(); y += 23) {
      auto sa = ref_set(*corpus[x], 3), sb = ref_set(*corpus[y], 3);
      std::vector<Word> un, in;
      std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(un));
      std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(in));
      CodePtr u = bool_code(BoolOp::Union, {corpus[x], corpus[y]});
      CodePtr n = bool_code(BoolOp::Intersect, {corpus[x], corpus[y]});
      REQUIRE(brute_cylinders(*u, 3) == un);
      REQUIRE(brute_cylinders(*n, 3) == in);
      int top = std::max(rank(*corpus[x]), rank(*corpus[y]));
      CHECK(rank(*u) == top);
      CHECK(rank(*n) == top);
    }
}

TEST_CASE("intersections of schema codes keep variables apart") {
  CodePtr pinf = p_infinity_code();
  CodePtr both = bool_code(BoolOp::Intersect, {pinf, substitute_code(pinf, LinearMap{C2, C2, {{0, 2, 0}}})});
  CHECK(rank(*both) == 3);
  for (auto& x : enumerate_up(Alphabet{2}, 2, 4))
    REQUIRE(exact(both, x) == (exact(pinf, x) && exact(pinf, arith_subsequence(x, 2, 0))));
}

TEST_CASE("projection along a Nat factor") {
  SpaceDesc nx = SpaceDesc::product(SpaceDesc{{Factor::nat()}}, C2);
  Atom any_n = Atom::full(nx);
  any_n.pats[0] = Pattern::literal(w("1"));
  CodePtr c = make_basic(nx, Family::of_leaves({{any_n}}));
  CHECK(canonical_dump(*exists_code(c)) == canonical_dump(*cyl({"1"})));

  Atom t = Atom::full(nx);
  t.nats[0] = Affine::var("i");
  t.pats[0] = Pattern::parse("0^i 1", Alphabet{2});
  Family f;
  f.parts.push_back(Part::schema("i", std::nullopt, Family::of_leaves({{t}})));
  CodePtr e = exists_code(make_basic(nx, f));
  CHECK_FALSE(exact(e, up("|0")));
  for (std::size_t k = 0; k <= 5; ++k) {
    Word pre(k, 0);
    pre.push_back(1);
    CHECK(exact(e, UPWord(Alphabet{2}, pre, {0})));
  }
  Atom none = Atom::none(nx);
  CHECK(brute_cylinders(*exists_code(make_basic(nx, Family::of_leaves({{none}}))), 2).empty());

  // rank-2 input with constant Nat constraints; check against fibres
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CodePtr> kids;
    for (int k = 0; k < 2; ++k) {
      std::vector<Leaf> leaves;
      for (int l = 0; l < 2; ++l) {
        Atom a = Atom::full(nx);
        a.pats[0] = Pattern::literal(random_word(rng, 2));
        if (pick(rng, 0, 1)) a.nats[0] = Affine::constant(pick(rng, 0, 2));
        leaves.push_back({a});
      }
      kids.push_back(make_basic(nx, Family::of_leaves(leaves)));
    }
    CodePtr u = make_unioncompl(nx, Family::of_codes(kids));
    CodePtr pr = exists_code(u);
    CHECK(rank(*pr) == 2);
    for (auto& x : enumerate_up(Alphabet{2}, 2, 2)) {
      bool any = false;
      for (std::uint64_t n = 0; n < 6; ++n) any = any || eval_exact_up(*u, {Component{n}, Component{x}});
      REQUIRE(exact(pr, x) == any);
    }
  }
  CHECK_THROWS_AS(exists_code(cyl({"0"})), SpaceMismatch);
}

TEST_CASE("countable unions") {
  CHECK(canonical_dump(*union_family_code(C2, Family::of_codes({cyl({"01"})}))) == canonical_dump(*cyl({"01"})));
  CodePtr two = union_family_code(C2, Family::of_codes({promote_code(cyl({"00"})), promote_code(cyl({"11"}))}));
  CHECK(rank(*two) == 2);
  CHECK(brute_cylinders(*two, 2) == words({"00", "11"}));

  Atom a = Atom::full(C2);
  a.pats[0] = Pattern::parse("0^i 1", Alphabet{2});
  Family members;
  members.parts.push_back(Part::schema("i", std::nullopt, Family::of_codes({promote_code(make_basic(C2, Family::of_leaves({{a}})))})));
  CodePtr u = union_family_code(C2, members);
  CHECK(rank(*u) == 2);
  CHECK(exact(u, up("0001|0")));
  CHECK_FALSE(exact(u, up("|0")));
}

TEST_CASE("integer-coded neighbourhoods") {
  for (std::uint64_t k = 0; k < 100000; ++k) {
    auto d1 = seq_decode(seq_decode(k).at(1));
    NbhdResult r = basic_nbhd(C2, k);
    REQUIRE(r.empty == (d1.at(1) == 0));
    if (!r.empty) {
      // independent: smallest l with (b+1) < a (l+1)
      BigNat a = d1.at(1), b = d1.at(2);
      std::uint64_t l = 0;
      while (!(b + 1 < a * (l + 1))) ++l;
      REQUIRE(r.mu == l);
      REQUIRE(r.letters.size() == l);
    }
  }
  BigNat k1 = nbhd_inner_index({1, 0}, 1, 1);
  NbhdResult om = basic_nbhd_inner(SpaceDesc::baire(), k1);
  CHECK(om.mu == 2);
  CHECK(om.letters == Word{1, 0});
  NbhdResult c = basic_nbhd_inner(C2, nbhd_inner_index({5, 0}, 1, 1));
  CHECK(c.letters == Word{1, 0});
  CHECK(basic_nbhd_inner(C2, nbhd_inner_index({1}, 0, 4)).empty);
  CHECK_THROWS_AS(basic_nbhd(C22, 1), SpaceMismatch);
}

TEST_CASE("disjoint pieces") {
  auto pieces = [](const CodePtr& c) {
    std::vector<std::vector<Word>> r;
    for (auto& p : disjointify(c).parts) r.push_back(brute_cylinders(*complement_code(p.code), 2));
    return r;
  };
  CHECK(pieces(cyl({"0", "1"})) == std::vector<std::vector<Word>>{words({"00", "01"}), words({"10", "11"})});
  CHECK(pieces(cyl({"0", "00"})) == std::vector<std::vector<Word>>{words({"00", "01"}), {}});
  CHECK(pieces(cyl({"1"})) == std::vector<std::vector<Word>>{words({"10", "11"})});

  auto check = [](const CodePtr& c, std::size_t d) {
    Family f = disjointify(c);
    std::vector<int> count(1u << d, 0);
    int xi = rank(*c);
    for (auto& p : f.parts) {
      REQUIRE(rank(*p.code) < std::max(2, xi));
      for (auto& v : brute_cylinders(*complement_code(p.code), d)) {
        std::size_t idx = 0;
        for (Letter x : v) idx = 2 * idx + x;
        ++count[idx];
      }
    }
    auto in = ref_set(*c, d);
    std::size_t pos = 0;
    for (auto& v : all_words(Alphabet{2}, d)) {
      std::size_t idx = 0;
      for (Letter x : v) idx = 2 * idx + x;
      bool member = pos < in.size() && in[pos] == v;
      if (member) ++pos;
      REQUIRE(count[idx] == (member ? 1 : 0));
    }
  };
  for (auto& c : exhaustive_corpus()) check(c, 4);
  Rng rng(13);
  for (int t = 0; t < 300; ++t) check(random_code(rng, 1 + t % 3, 3, 2, t % 2 == 1), 4);

  // one-leaf schema: pieces N_{0^i 1} minus earlier instances
  Atom a = Atom::full(C2);
  a.pats[0] = Pattern::parse("* 0^i 1", Alphabet{2});
  Family f;
  f.parts.push_back(Part::schema("i", std::nullopt, Family::of_leaves({{a}})));
  Family d = disjointify(make_basic(C2, f));
  for (auto& x : enumerate_up(Alphabet{2}, 3, 3)) {
    int hits = 0;
    for (std::uint64_t i = 0; i < 12; ++i) {
      auto el = element_at(d, Env{}, i);
      REQUIRE(el);
      Env env;
      for (auto& [v, val] : el->binds) env.push(v, val);
      if (!eval_exact_up(*el->leaf().code, {x}, env)) ++hits;
    }
    bool has_one = false;
    for (std::uint64_t p = 1; p < 14; ++p) has_one = has_one || x.at(p) == 1;
    CHECK(hits == (has_one ? 1 : 0));
  }
}

TEST_CASE("universal sets") {
  CodePtr u1 = universal_code(1);
  CHECK(rank(*u1) == 1);
  for (auto& d : enumerate_up(Alphabet{2}, 3, 3)) {
    CHECK(eval_exact_up(*u1, {up("|0"), d}));
    CHECK_FALSE(eval_exact_up(*u1, {up("|1"), d}));
    CHECK(eval_exact_up(*universal_code(2), {up("|1"), d}));
  }
  CHECK(rank(*universal_code(2)) == 2);
  CHECK(rank(*universal_code(4)) == 4);
  CHECK_THROWS_AS(universal_code(5), RankTooLarge);
  CHECK_THROWS_AS(universal_code(0), RankTooLarge);

  // beta = indicator of the indices of prefixes "1...": section is N_1
  Word ind(32, 1);
  for (std::uint64_t k = 0; k < 32; ++k) {
    Word s = lenlex_word(k);
    if (!s.empty() && s[0] == 1) ind[k] = 0;
  }
  UPWord beta(Alphabet{2}, ind, {1});
  for (auto& d : enumerate_up(Alphabet{2}, 3, 3)) CHECK(eval_exact_up(*u1, {beta, d}) == (d.at(0) == 1));

  // budgeted evaluation agrees wherever it commits
  Rng rng(17);
  for (int t = 0; t < 150; ++t) {
    int n = 1 + t % 3;
    UPWord b = random_up(rng, 3, 3), d = random_up(rng, 3, 3);
    Truth3 bud = eval_budgeted(*universal_code(n), {b, d}, Budget{64, 48});
    if (bud != Truth3::Unknown) REQUIRE((bud == Truth3::True) == eval_exact_up(*universal_code(n), {b, d}));
  }
}

TEST_CASE("diagonal") {
  CHECK(diagonal_point(up("|0")) == up("|0"));
  CHECK(diagonal_point(up("|01")) == up("|0011"));
  CHECK(eval_exact_up(*diagonal_set(1), {diagonal_point(up("|0"))}));
  Rng rng(19);
  for (int n = 1; n <= 3; ++n) {
    CHECK(rank(*diagonal_set(n)) == n);
    for (int t = 0; t < 100; ++t) {
      UPWord b = random_up(rng, 4, 4);
      REQUIRE(eval_exact_up(*diagonal_set(n), {diagonal_point(b)}) == eval_exact_up(*universal_code(n), {b, b}));
    }
  }
}

TEST_CASE("evaluation examples") {
  Budget b{8, 8};
  CHECK(eval(*cyl({"1"}), {up("1|0")}, b) == Truth3::True);
  CodePtr pinf = p_infinity_code();
  CHECK(eval(*pinf, {up("|01")}, b) == Truth3::True);
  CHECK(eval(*pinf, {up("1|0")}, b) == Truth3::False);
  CHECK(exact(pinf, up("|10")));
  CHECK_FALSE(exact(pinf, up("1|0")));
  CHECK(exact(full_code(C2), up("0110|1")));
  ProgramWord prog{Alphabet{2}, [](std::uint64_t n) { return Letter(n % 3 == 0); }, {}};
  CHECK_THROWS_AS(eval_exact_up(*pinf, {prog}), NotExactlyEvaluable);
  CHECK(eval(*cyl({"1"}), {prog}, b) == Truth3::True);
  CHECK(eval(*cyl({"0"}), {prog}, b) == Truth3::False);
  CHECK(eval(*cyl({"10"}), {prog}, Budget{1, 8}) == Truth3::Unknown);
  CHECK_THROWS_AS(eval(*cyl({"1"}), {up("|0"), up("|0")}, b), SpaceMismatch);

  CHECK(brute_cylinders(*empty_code(C2), 2).empty());
  CHECK(brute_cylinders(*cyl({"0"}), 2) == words({"00", "01"}));
  CHECK(brute_cylinders(*complement_code(cyl({"0"})), 2) == words({"10", "11"}));
  CHECK_THROWS_AS(brute_cylinders(*cyl({"010"}), 2), DepthTooSmall);
}

TEST_CASE("semantic oracle on random finite codes") {
  Rng rng(23);
  for (int t = 0; t < 500; ++t) {
    CodePtr c = random_code(rng, 1 + t % 3, 4, 2, true);
    auto ref = ref_set(*c, 4);
    REQUIRE(brute_cylinders(*c, 4) == ref);
    REQUIRE(brute_cylinders(*complement_code(c), 4).size() == 16 - ref.size());
    REQUIRE(brute_cylinders(*promote_code(c), 4) == ref);
    for (auto& v : all_words(Alphabet{2}, 4)) {
      bool in = std::binary_search(ref.begin(), ref.end(), v);
      REQUIRE(exact(c, word_point(v)) == in);
      Truth3 bud = eval_budgeted(*c, {word_point(v)}, Budget{4, 16});
      REQUIRE(bud == truth(in));
    }
  }
}

TEST_CASE("exact evaluation is total on schema codes and agrees with budgeted") {
  Rng rng(29);
  int counter = 0;
  int committed = 0;
  for (int t = 0; t < 500; ++t) {
    CodePtr c = random_schema_code(rng, 1 + t % 3, &counter);
    UPWord x = random_up(rng, 4, 4);
    bool e = exact(c, x);
    Truth3 b = eval_budgeted(*c, {x}, Budget{64, 64});
    if (b != Truth3::Unknown) {
      ++committed;
      REQUIRE((b == Truth3::True) == e);
    }
  }
  MESSAGE("committed budgeted answers: ", committed);
  CHECK(committed > 200);
}

TEST_CASE("budget monotonicity") {
  Rng rng(31);
  int counter = 0;
  for (int t = 0; t < 200; ++t) {
    CodePtr c = t % 2 ? random_schema_code(rng, 1 + t % 3, &counter) : random_code(rng, 1 + t % 3, 5);
    UPWord base = random_up(rng, 6, 5);
    ProgramWord x{Alphabet{2}, [base](std::uint64_t n) { return base.at(n); }, {}};
    std::uint64_t d = pick(rng, 1, 8), i = pick(rng, 1, 16);
    Truth3 small = eval(*c, {x}, Budget{d, i});
    for (Budget bb : {Budget{2 * d, i}, Budget{d, 2 * i}, Budget{2 * d, 2 * i}}) {
      Truth3 big = eval(*c, {x}, bb);
      if (small != Truth3::Unknown) REQUIRE(big == small);
    }
    if (small != Truth3::Unknown) REQUIRE((small == Truth3::True) == exact(c, base));
  }
}

TEST_CASE("json round trip") {
  Rng rng(37);
  int counter = 0;
  std::vector<CodePtr> codes{p_infinity_code(), universal_code(3), diagonal_set(2)};
  for (int t = 0; t < 100; ++t) codes.push_back(random_schema_code(rng, 1 + t % 3, &counter));
  for (int t = 0; t < 100; ++t) codes.push_back(random_code(rng, 1 + t % 3, 3, 3, true));
  for (auto& c : codes) {
    std::string a = canonical_dump(*c);
    CodePtr back = code_from_json(json::parse(a));
    REQUIRE(canonical_dump(*back) == a);
    REQUIRE(rank(*back) == rank(*c));
  }
  std::string text = R"({"family":{"finite":[{"prefix":["10"]},{"prefix":["0"]}]},"kind":"basic","space":["2"]})";
  CHECK(canonical_dump(*code_from_json(json::parse(text))) == text);
  CHECK_THROWS_AS(code_from_json(json::parse(R"({"space":["2"],"kind":"weird"})")), ParseError);
  CHECK_THROWS_AS(code_from_json(json::parse(R"({"space":["2"],"kind":"basic","family":{"finite":[{"prefix":["12"]}]}})")), ParseError);
}
