#include "omegaforge/words.hpp"

#include <algorithm>
#include <numeric>
#include <mutex>
#include <set>
#include <sstream>

namespace omegaforge {

namespace {

bool short_letters(Alphabet a) { return a.bounded() && a.size <= 4; }

void check_letters(const Word& w, Alphabet a) {
  for (Letter x : w)
    if (!a.contains(x)) throw ParseError("letter " + std::to_string(x) + " outside alphabet");
}

// Length of the primitive root of v (failure function of KMP).
std::size_t primitive_period(const Word& v) {
  std::size_t n = v.size();
  std::vector<std::size_t> fail(n + 1, 0);
  for (std::size_t i = 1, k = 0; i < n; ++i) {
    while (k > 0 && v[i] != v[k]) k = fail[k];
    if (v[i] == v[k]) ++k;
    fail[i + 1] = k;
  }
  std::size_t p = n - fail[n];
  return n % p == 0 ? p : n;
}

}  // namespace

std::string word_to_string(const Word& w, Alphabet a) {
  std::string out;
  if (short_letters(a)) {
    for (Letter x : w) out.push_back(static_cast<char>('0' + x));
    return out;
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(w[i]);
  }
  return out;
}

Word word_from_string(std::string_view text, Alphabet a) {
  Word w;
  if (short_letters(a)) {
    for (char c : text) {
      if (c == ' ') continue;
      if (c < '0' || c > '9') throw ParseError(std::string("bad letter '") + c + "'");
      w.push_back(static_cast<Letter>(c - '0'));
    }
  } else {
    std::string cur;
    auto flush = [&] {
      if (cur.empty()) return;
      w.push_back(std::stoull(cur));
      cur.clear();
    };
    for (char c : text) {
      if (c == ',' || c == ' ') {
        flush();
      } else if (c >= '0' && c <= '9') {
        cur.push_back(c);
      } else {
        throw ParseError(std::string("bad token character '") + c + "'");
      }
    }
    flush();
  }
  check_letters(w, a);
  return w;
}

bool is_prefix(const Word& s, const Word& t) {
  return s.size() <= t.size() && std::equal(s.begin(), s.end(), t.begin());
}

UPWord::UPWord(Alphabet a, Word u, Word v) : alpha_(a), u_(std::move(u)), v_(std::move(v)) {
  if (v_.empty()) throw ParseError("empty period");
  check_letters(u_, a);
  check_letters(v_, a);
  v_.resize(primitive_period(v_));
  while (!u_.empty() && u_.back() == v_.back()) {
    u_.pop_back();
    std::rotate(v_.rbegin(), v_.rbegin() + 1, v_.rend());
  }
}

UPWord UPWord::parse(std::string_view text, Alphabet a) {
  auto bar = text.find('|');
  if (bar == std::string_view::npos) throw ParseError("expected \"u|v\", got \"" + std::string(text) + "\"");
  return UPWord(a, word_from_string(text.substr(0, bar), a), word_from_string(text.substr(bar + 1), a));
}

Letter UPWord::at(std::uint64_t n) const {
  if (n < u_.size()) return u_[n];
  return v_[(n - u_.size()) % v_.size()];
}

Word UPWord::prefix(std::uint64_t n) const {
  Word w(n);
  for (std::uint64_t i = 0; i < n; ++i) w[i] = at(i);
  return w;
}

std::string UPWord::to_string() const {
  return word_to_string(u_, alpha_) + "|" + word_to_string(v_, alpha_);
}

Word ProgramWord::prefix(std::uint64_t n) const {
  Word w(n);
  for (std::uint64_t i = 0; i < n; ++i) w[i] = gen(i);
  return w;
}

Letter letter_at(const OmegaWord& w, std::uint64_t n) {
  return std::visit([n](const auto& x) { return x.at(n); }, w);
}

Word prefix_of(const OmegaWord& w, std::uint64_t n) {
  return std::visit([n](const auto& x) { return x.prefix(n); }, w);
}

Alphabet alphabet_of(const OmegaWord& w) {
  if (auto* u = std::get_if<UPWord>(&w)) return u->alphabet();
  return std::get<ProgramWord>(w).alphabet;
}

ProgramWord as_program(const OmegaWord& w) {
  if (auto* p = std::get_if<ProgramWord>(&w)) return *p;
  UPWord u = std::get<UPWord>(w);
  return ProgramWord{u.alphabet(), [u](std::uint64_t n) { return u.at(n); }, {}};
}

bool all_up(const ProductPoint& x) {
  return std::none_of(x.begin(), x.end(),
                      [](const Component& c) { return std::holds_alternative<ProgramWord>(c); });
}

std::uint64_t nth_prime(std::size_t i) {
  static std::vector<std::uint64_t> primes{2};
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  for (std::uint64_t c = primes.back() + 1; primes.size() <= i; ++c) {
    bool is_p = true;
    for (std::uint64_t p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        is_p = false;
        break;
      }
    }
    if (is_p) primes.push_back(c);
  }
  return primes[i];
}

BigNat seq_encode(const std::vector<BigNat>& t) {
  BigNat k = 1;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > 4000000) throw std::overflow_error("seq_encode exponent too large");
    k *= boost::multiprecision::pow(BigNat(nth_prime(i)), t[i].convert_to<unsigned>() + 1);
  }
  return k;
}

BigNat seq_encode_small(const std::vector<std::uint64_t>& t) {
  std::vector<BigNat> b(t.begin(), t.end());
  return seq_encode(b);
}

BigNat SeqDecoded::at(std::size_t i) const {
  if (!is_seq || i >= components.size()) return 0;
  return components[i];
}

SeqDecoded seq_decode(const BigNat& k) {
  SeqDecoded out;
  if (k < 1) return out;
  BigNat rest = k;
  std::vector<BigNat> comps;
  for (std::size_t i = 0; rest > 1; ++i) {
    BigNat p = nth_prime(i);
    BigNat e = 0;
    while (rest % p == 0) {
      rest /= p;
      ++e;
    }
    if (e == 0) return out;
    comps.push_back(e - 1);
  }
  out.is_seq = true;
  out.length = comps.size();
  out.components = std::move(comps);
  return out;
}

std::uint64_t pair_encode(std::uint64_t i, std::uint64_t j) {
  if (i >= 63 || j > ((std::uint64_t{1} << (63 - i)) - 1) / 2)
    throw std::overflow_error("pair_encode out of range");
  return (std::uint64_t{1} << i) * (2 * j + 1) - 1;
}

std::pair<std::uint64_t, std::uint64_t> pair_decode(std::uint64_t n) {
  std::uint64_t m = n + 1;
  std::uint64_t i = 0;
  while (m % 2 == 0) {
    m /= 2;
    ++i;
  }
  return {i, (m - 1) / 2};
}

std::uint64_t lcm_u64(std::uint64_t a, std::uint64_t b) { return std::lcm(a, b); }

UPWord arith_subsequence(const UPWord& w, std::uint64_t a, std::uint64_t b) {
  if (a == 0) return UPWord::constant(w.alphabet(), w.at(b));
  std::uint64_t U = w.transient().size(), V = w.period().size();
  std::uint64_t j0 = b >= U ? 0 : (U - b + a - 1) / a;
  std::uint64_t per = V / std::gcd(a, V);
  Word u, v;
  for (std::uint64_t j = 0; j < j0; ++j) u.push_back(w.at(a * j + b));
  for (std::uint64_t j = j0; j < j0 + per; ++j) v.push_back(w.at(a * j + b));
  return UPWord(w.alphabet(), std::move(u), std::move(v));
}

ProgramWord arith_subsequence(const ProgramWord& w, std::uint64_t a, std::uint64_t b) {
  auto g = w.gen;
  return ProgramWord{w.alphabet, [g, a, b](std::uint64_t p) { return g(a * p + b); }, {}};
}

UPWord slice(const UPWord& g, std::uint64_t i) {
  if (i >= 62) throw std::overflow_error("slice index too large");
  return arith_subsequence(g, std::uint64_t{2} << i, (std::uint64_t{1} << i) - 1);
}

OmegaWord slice(const OmegaWord& g, std::uint64_t i) {
  if (auto* u = std::get_if<UPWord>(&g)) return slice(*u, i);
  if (i >= 62) throw std::overflow_error("slice index too large");
  return arith_subsequence(std::get<ProgramWord>(g), std::uint64_t{2} << i, (std::uint64_t{1} << i) - 1);
}

UPWord shift(const UPWord& a, const Word& s) {
  if (s != a.prefix(s.size())) throw NotAPrefix(word_to_string(s, a.alphabet()) + " is not a prefix of " + a.to_string());
  std::uint64_t n = s.size(), U = a.transient().size(), V = a.period().size();
  if (n <= U) return UPWord(a.alphabet(), Word(a.transient().begin() + n, a.transient().end()), a.period());
  Word v = a.period();
  std::rotate(v.begin(), v.begin() + (n - U) % V, v.end());
  return UPWord(a.alphabet(), {}, v);
}

OmegaWord drop(const OmegaWord& w, std::uint64_t n) {
  if (auto* u = std::get_if<UPWord>(&w)) return shift(*u, u->prefix(n));
  auto g = std::get<ProgramWord>(w).gen;
  return ProgramWord{alphabet_of(w), [g, n](std::uint64_t p) { return g(p + n); }, {}};
}

UPWord prepend(const Word& s, const UPWord& a) {
  Word u = s;
  u.insert(u.end(), a.transient().begin(), a.transient().end());
  return UPWord(a.alphabet(), u, a.period());
}

std::vector<Word> all_words(Alphabet a, std::size_t n) {
  std::vector<Word> out;
  Word w(n, 0);
  while (true) {
    out.push_back(w);
    std::size_t i = n;
    while (i > 0 && w[i - 1] + 1 == a.size) w[--i] = 0;
    if (i == 0) break;
    ++w[i - 1];
  }
  return out;
}

std::vector<UPWord> enumerate_up(Alphabet a, std::size_t max_u, std::size_t max_v) {
  std::set<UPWord> seen;
  std::vector<UPWord> out;
  for (std::size_t lu = 0; lu <= max_u; ++lu)
    for (std::size_t lv = 1; lv <= max_v; ++lv)
      for (const Word& u : all_words(a, lu))
        for (const Word& v : all_words(a, lv)) {
          UPWord w(a, u, v);
          if (seen.insert(w).second) out.push_back(w);
        }
  return out;
}

}  // namespace omegaforge
