#pragma once

#include <any>
#include <tuple>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "omegaforge/errors.hpp"

namespace omegaforge {

using Letter = std::uint64_t;
using Word = std::vector<Letter>;
using BigNat = boost::multiprecision::cpp_int;

// size 0 stands for the unbounded alphabet of omega^omega factors.
struct Alphabet {
  std::uint64_t size = 2;

  static Alphabet omega() { return Alphabet{0}; }
  bool bounded() const { return size != 0; }
  bool contains(Letter a) const { return !bounded() || a < size; }
  bool operator==(const Alphabet&) const = default;
};

std::string word_to_string(const Word& w, Alphabet a);
Word word_from_string(std::string_view text, Alphabet a);
bool is_prefix(const Word& s, const Word& t);

// u v^omega, kept canonical: primitive period, then shortest transient.
class UPWord {
 public:
  UPWord(Alphabet a, Word u, Word v);

  static UPWord parse(std::string_view text, Alphabet a);
  static UPWord constant(Alphabet a, Letter x) { return UPWord(a, {}, {x}); }

  Alphabet alphabet() const { return alpha_; }
  const Word& transient() const { return u_; }
  const Word& period() const { return v_; }
  Letter at(std::uint64_t n) const;
  Word prefix(std::uint64_t n) const;
  std::string to_string() const;

  bool operator==(const UPWord& o) const { return u_ == o.u_ && v_ == o.v_; }
  bool operator<(const UPWord& o) const {
    return std::tie(u_, v_) < std::tie(o.u_, o.v_);
  }

 private:
  Alphabet alpha_;
  Word u_, v_;
};

// Letters produced on demand. Equality is not decidable; compare prefixes.
struct ProgramWord {
  Alphabet alphabet;
  std::function<Letter(std::uint64_t)> gen;
  // Optional structural description, used by searches that can exploit it.
  std::any shape;

  Letter at(std::uint64_t n) const { return gen(n); }
  Word prefix(std::uint64_t n) const;
};

using OmegaWord = std::variant<UPWord, ProgramWord>;

Letter letter_at(const OmegaWord& w, std::uint64_t n);
Word prefix_of(const OmegaWord& w, std::uint64_t n);
Alphabet alphabet_of(const OmegaWord& w);
ProgramWord as_program(const OmegaWord& w);

using Component = std::variant<UPWord, ProgramWord, std::uint64_t>;
using ProductPoint = std::vector<Component>;

bool all_up(const ProductPoint& x);

// Goedel numbering of finite sequences by prime powers.
BigNat seq_encode(const std::vector<BigNat>& t);
BigNat seq_encode_small(const std::vector<std::uint64_t>& t);

struct SeqDecoded {
  bool is_seq = false;
  std::uint64_t length = 0;
  std::vector<BigNat> components;
  // (k)_i, zero outside the range or for non-codes.
  BigNat at(std::size_t i) const;
};
SeqDecoded seq_decode(const BigNat& k);
std::uint64_t nth_prime(std::size_t i);

std::uint64_t pair_encode(std::uint64_t i, std::uint64_t j);
std::pair<std::uint64_t, std::uint64_t> pair_decode(std::uint64_t n);

// result(p) = w(a p + b)
UPWord arith_subsequence(const UPWord& w, std::uint64_t a, std::uint64_t b);
ProgramWord arith_subsequence(const ProgramWord& w, std::uint64_t a, std::uint64_t b);

OmegaWord slice(const OmegaWord& g, std::uint64_t i);
UPWord slice(const UPWord& g, std::uint64_t i);
UPWord shift(const UPWord& a, const Word& s);
OmegaWord drop(const OmegaWord& w, std::uint64_t n);
UPWord prepend(const Word& s, const UPWord& a);

std::uint64_t lcm_u64(std::uint64_t a, std::uint64_t b);

// Canonical UP words with |u| <= max_u and 1 <= |v| <= max_v, each once.
std::vector<UPWord> enumerate_up(Alphabet a, std::size_t max_u, std::size_t max_v);

// All words of exactly length n over a bounded alphabet, in lex order.
std::vector<Word> all_words(Alphabet a, std::size_t n);

}  // namespace omegaforge
