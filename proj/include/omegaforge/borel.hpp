#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "omegaforge/words.hpp"

namespace omegaforge {

using json = nlohmann::json;

enum class FactorKind { Finite, Baire, Nat };

struct Factor {
  FactorKind kind = FactorKind::Finite;
  std::uint64_t size = 2;

  static Factor finite(std::uint64_t k) { return {FactorKind::Finite, k}; }
  static Factor baire() { return {FactorKind::Baire, 0}; }
  static Factor nat() { return {FactorKind::Nat, 0}; }
  bool is_seq() const { return kind != FactorKind::Nat; }
  Alphabet alphabet() const { return Alphabet{kind == FactorKind::Finite ? size : 0}; }
  std::string to_string() const;
  bool operator==(const Factor&) const = default;
};

struct SpaceDesc {
  std::vector<Factor> factors;

  static SpaceDesc cantor() { return {{Factor::finite(2)}}; }
  static SpaceDesc seq(std::uint64_t k) { return {{Factor::finite(k)}}; }
  static SpaceDesc baire() { return {{Factor::baire()}}; }
  static SpaceDesc product(const SpaceDesc& a, const SpaceDesc& b);
  SpaceDesc drop_front(std::size_t n) const;
  std::string to_string() const;
  bool operator==(const SpaceDesc&) const = default;
};

void check_point(const SpaceDesc& s, const ProductPoint& x);

// Variable bindings for schema templates; later bindings shadow earlier ones.
class Env {
 public:
  void push(const std::string& v, std::uint64_t val) { vars_.emplace_back(v, val); }
  void pop() { vars_.pop_back(); }
  std::optional<std::uint64_t> get(const std::string& v) const;
  bool empty() const { return vars_.empty(); }
  const std::vector<std::pair<std::string, std::uint64_t>>& bindings() const { return vars_; }

 private:
  std::vector<std::pair<std::string, std::uint64_t>> vars_;
};

// c + sum coef * var, natural coefficients.
struct Affine {
  std::uint64_t c = 0;
  std::vector<std::pair<std::string, std::uint64_t>> terms;  // sorted by name

  static Affine constant(std::uint64_t n) { return Affine{n, {}}; }
  static Affine var(const std::string& v, std::uint64_t coef = 1);
  static Affine parse(const std::string& text);
  bool is_constant() const { return terms.empty(); }
  std::uint64_t eval(const Env& env) const;
  Affine substitute(const Env& env) const;
  Affine rename(const std::function<std::string(const std::string&)>& f) const;
  std::string to_string() const;
  Affine operator+(const Affine& o) const;
  bool operator==(const Affine&) const = default;
};

inline constexpr Letter kAny = ~Letter{0};

// A block of letters (kAny = wildcard) repeated `count` times.
struct Segment {
  Word block;
  Affine count;
  bool operator==(const Segment&) const = default;
};

// Pattern on one sequence factor: the concatenation of its segments.
struct Pattern {
  std::vector<Segment> segs;

  static Pattern literal(const Word& w);
  static Pattern parse(const std::string& text, Alphabet a);
  void normalize();
  bool concrete() const;
  bool trivial() const;  // no fixed letters at all
  Word instantiate(const Env& env) const;
  Pattern substitute(const Env& env) const;
  Pattern rename(const std::function<std::string(const std::string&)>& f) const;
  std::string to_string(Alphabet a) const;
  bool operator==(const Pattern&) const = default;
};

// Cylinder template. Slots follow the space factors: a pattern for sequence
// factors, an optional value for Nat factors. A negated atom denotes the
// complement of its cylinder.
struct Atom {
  bool negated = false;
  bool empty = false;
  std::vector<Pattern> pats;
  std::vector<std::optional<Affine>> nats;

  static Atom full(const SpaceDesc& s);
  static Atom none(const SpaceDesc& s);
  static Atom prefix(const SpaceDesc& s, const std::vector<Word>& words);
  Atom negate() const;
  bool concrete() const;
  bool trivial() const;  // cylinder is the whole space
  std::uint64_t depth(const Env& env) const;
};

// Conjunction of atoms; the empty conjunction is the whole space.
using Leaf = std::vector<Atom>;

struct Code;
using CodePtr = std::shared_ptr<const Code>;
struct Family;
using FamilyPtr = std::shared_ptr<const Family>;
class SpecialFamily;

struct Part {
  enum class Kind { Leaf, Schema, Special };
  Kind kind = Kind::Leaf;
  Leaf leaf;    // Leaf part of a basic family
  CodePtr code; // Leaf part of a union-complement family
  std::string var;
  std::optional<Affine> bound;
  FamilyPtr body;
  std::shared_ptr<const SpecialFamily> special;

  static Part of_leaf(Leaf l);
  static Part of_code(CodePtr c);
  static Part schema(std::string var, std::optional<Affine> bound, Family body);
  static Part of_special(std::shared_ptr<const SpecialFamily> s);
};

struct Family {
  std::vector<Part> parts;

  static Family of_leaves(std::vector<Leaf> leaves);
  static Family of_codes(std::vector<CodePtr> codes);
  bool all_leaf() const;
};

struct LinearMap {
  // Output factor k reads source factor src at a*p + b (Nat factors: copied).
  struct Out {
    std::size_t src = 0;
    std::uint64_t a = 1, b = 0;
  };
  SpaceDesc from, to;
  std::vector<Out> outs;

  ProductPoint apply(const ProductPoint& x) const;
  json to_json() const;
  static LinearMap from_json(const json& j);
  static LinearMap identity(const SpaceDesc& s);
};

// Monotone prefix procedure between single finite-alphabet factors.
struct GeneralMap {
  SpaceDesc from, to;
  std::function<Word(const Word&)> f;
  std::size_t max_depth = 20;
};

struct Code {
  enum class Kind { Basic, UnionCompl, Mapped, Fixed };
  Kind kind = Kind::Basic;
  SpaceDesc space;
  Family family;
  // Mapped: inner evaluated at map(x). Fixed: inner evaluated at fixed ++ x.
  CodePtr inner;
  std::shared_ptr<const LinearMap> map;
  ProductPoint fixed;
};

class SpecialFamily {
 public:
  virtual ~SpecialFamily() = default;
  virtual std::string name() const = 0;
  virtual json params() const = 0;
  virtual int member_rank() const = 0;
  // Element m; nullopt for indices that are holes.
  virtual std::optional<Part> element(std::uint64_t m) const = 0;
  // Basic: some element contains x. Union-complement: some element misses x.
  virtual bool exact_exists(const ProductPoint& x) const = 0;
};

CodePtr make_basic(SpaceDesc s, Family f);
CodePtr make_unioncompl(SpaceDesc s, Family f);
CodePtr make_mapped(CodePtr inner, LinearMap m);
CodePtr make_fixed(CodePtr inner, ProductPoint x);

CodePtr empty_code(const SpaceDesc& s);
CodePtr full_code(const SpaceDesc& s);
CodePtr empty_of_rank(const SpaceDesc& s, int r);
CodePtr full_of_rank(const SpaceDesc& s, int r);
CodePtr cylinders_code(const SpaceDesc& s, const std::vector<Word>& prefixes);
CodePtr p_infinity_code();

int max_rank();
int rank(const Code& c);
int schema_depth(const Code& c);
bool has_opaque(const Code& c);  // specials, mapped or fixed nodes inside

// Element enumeration in family order (finite parts first, then the infinite
// parts round-robin). Attempt indices that land on holes are skipped.
struct Element {
  const Part* part;
  std::vector<std::pair<std::string, std::uint64_t>> binds;
  std::optional<Part> owned;  // for special elements
  const Part& leaf() const { return owned ? *owned : *part; }
};
struct Enumeration {
  std::vector<Element> items;
  bool complete = false;
};
Enumeration enumerate(const Family& f, const Env& env, std::uint64_t attempts);
std::optional<Element> element_at(const Family& f, const Env& env, std::uint64_t i);
std::optional<std::uint64_t> family_size(const Family& f, const Env& env);

CodePtr instantiate(const CodePtr& c, const Env& env);
Leaf instantiate(const Leaf& l, const Env& env);

CodePtr complement_code(const CodePtr& c);
CodePtr section_code(const CodePtr& c, const ProductPoint& x);
CodePtr substitute_code(const CodePtr& c, const LinearMap& f);
CodePtr substitute_code(const CodePtr& c, const GeneralMap& f);
CodePtr promote_code(const CodePtr& c);
enum class BoolOp { Intersect, Union };
CodePtr bool_code(BoolOp op, const std::vector<CodePtr>& cs);
CodePtr exists_code(const CodePtr& c);
CodePtr union_family_code(const SpaceDesc& s, const Family& members);
Family disjointify(const CodePtr& c);

struct NbhdResult {
  bool empty = false;
  std::uint64_t mu = 0;
  Word letters;
};
NbhdResult basic_nbhd(const SpaceDesc& s, const BigNat& k);
// Same, given (k)_1 directly; k itself is astronomically large for most words.
NbhdResult basic_nbhd_inner(const SpaceDesc& s, const BigNat& k1);
std::uint64_t nbhd_mu(const BigNat& a, const BigNat& b);
// (k)_1 for the neighbourhood with letters, ((k)_1)_1 = a, ((k)_1)_2 = b.
BigNat nbhd_inner_index(const std::vector<std::uint64_t>& letters, std::uint64_t a, std::uint64_t b);

CodePtr universal_code(int n);
UPWord diagonal_point(const UPWord& beta);
CodePtr diagonal_set(int n);
// k-th word of 2^{<omega} in length-lex order.
Word lenlex_word(std::uint64_t k);

json to_json(const Code& c);
CodePtr code_from_json(const json& j);
std::string canonical_dump(const Code& c);

}  // namespace omegaforge
