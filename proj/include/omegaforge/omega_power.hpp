#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "omegaforge/borel.hpp"
#include "omegaforge/evaluator.hpp"
#include "omegaforge/words.hpp"

namespace omegaforge {

// Letters of the 4-letter construction alphabet.
inline constexpr Letter kRun = 2;
inline constexpr Letter kMark = 3;

// ---- pairs of equal-length binary words ----

// M_j = sum_{i<j} 4^{i+1}; index of the last pair of length j.
std::uint64_t m_bound(std::uint64_t j);
// j with M_j = n, if n is one of the M values.
std::optional<std::uint64_t> m_index(std::uint64_t n);

struct PairWords {
  Word t, s;  // first and second coordinate
  bool operator==(const PairWords&) const = default;
};
PairWords q_pair(std::uint64_t n);
std::uint64_t q_index(const Word& t, const Word& s);

// ---- transition trees ----

// Prefix-closed set of pairs (t, s) with |t| = |s|.
class TransitionTree {
 public:
  enum class Kind { Full, Diagonal, Empty, Custom };

  static TransitionTree full() { return TransitionTree(Kind::Full); }
  static TransitionTree diagonal() { return TransitionTree(Kind::Diagonal); }
  static TransitionTree empty() { return TransitionTree(Kind::Empty); }
  static TransitionTree custom(std::string label, std::function<bool(const Word&, const Word&)> pred);
  // Prefix closure of finitely many pairs.
  static TransitionTree from_pairs(const std::vector<PairWords>& pairs);
  static TransitionTree from_json(const json& j);

  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  bool contains(const Word& t, const Word& s) const;
  bool contains(std::uint64_t n) const;
  bool accepting(std::uint64_t n) const;  // Q_f: in the tree, t nonempty ending in 1
  json to_json() const;

  // Right congruence for the built-in kinds; nullopt means outside the tree.
  bool has_congruence() const { return kind_ != Kind::Custom; }
  std::optional<int> rclass(const Word& t, const Word& s) const;
  std::optional<int> rstep(int cls, Letter tb, Letter sb) const;

 private:
  explicit TransitionTree(Kind k) : kind_(k) {}
  Kind kind_;
  std::string label_;
  std::shared_ptr<const std::function<bool(const Word&, const Word&)>> pred_;
  std::shared_ptr<const std::vector<PairWords>> pairs_;
};

// n ->^m p
bool ts_edge(std::uint64_t n, Letter m, std::uint64_t p);
std::vector<std::uint64_t> ts_step(const TransitionTree& r, std::uint64_t n, Letter m);

struct Run {
  std::vector<std::uint64_t> states;  // starts at 0
  std::size_t hits = 0;               // accepting states visited after the start
};
std::vector<Run> ts_run(const TransitionTree& r, const UPWord& alpha, std::size_t depth);
std::string export_dot(const TransitionTree& r, std::size_t depth);

// ---- compact sets K_{N,j} ----

// gamma = head followed by alpha(i) 2^{M_{j+i+1}} 3 2^{M_{j+i+1}} for i = 0, 1, ...
struct KTail {
  Word head;
  std::uint64_t j = 0;
  OmegaWord alpha;
};

// Prefix form: w extends to an element of K_{N,j}.
bool k_member(std::uint64_t n, std::uint64_t j, const Word& w);
// Full membership of an ultimately periodic word: always false (block lengths grow).
bool k_member(std::uint64_t n, std::uint64_t j, const UPWord& w);

ProgramWord k_word(KTail shape);
ProgramWord phi_inv(std::uint64_t n, std::uint64_t j, const OmegaWord& alpha);
// Letters m_0 .. m_{count-1} of a K_{N,j} element, checked block by block.
Word phi(std::uint64_t n, std::uint64_t j, const OmegaWord& gamma, std::size_t count);

// ---- the shape 2^N (m 2^P 3 2^R)... ----

struct Block {
  Letter m = 0;
  std::uint64_t p = 0, r = 0;
  bool operator==(const Block&) const = default;
};
struct ShapeParse {
  std::uint64_t n = 0;
  std::vector<Block> blocks;
};
// Canonical parse of a finite word as 2^N then complete blocks m 2^P 3 2^R.
std::optional<ShapeParse> parse_shape(const Word& s);
Word render_shape(const ShapeParse& p);

struct MuMembership {
  bool mu0 = false, mu1 = false;
  bool any() const { return mu0 || mu1; }
};
MuMembership mu_member(const Word& s);
bool pi_member(const Word& s, const TransitionTree& r);

bool suitable(const Word& t, std::uint64_t s, std::uint64_t j);
// Prefix of length len of the set P_{t,S,j}: all words t 2^S then K_{0,j} letters.
std::vector<Word> p_prefixes(const Word& t, std::uint64_t s, std::uint64_t j, std::size_t len);

struct Decomposition {
  // Outside: P-shaped without defects but in no K_{N,j}; neither mu^infty nor
  // any P_{t,S,j}.
  enum class Kind { MuCandidate, Triple, Outside, Unknown };
  Kind kind = Kind::Unknown;
  Word t;
  std::uint64_t s = 0;
  std::uint64_t j_f = 0;  // value reported by F
  std::uint64_t j_p = 0;  // index with gamma in P_{t,S,j_p}; j_f = j_p + 1
  std::uint64_t n = 0;    // leading run of the K-part (N = S when t is empty)
};
Decomposition decompose(const OmegaWord& gamma, const Budget& b);
Decomposition decompose(const Word& prefix);

// ---- dictionaries ----

using Key = std::vector<std::int64_t>;

// Nondeterministic prefix automaton of a dictionary. Keys are finite
// summaries of the letters read in the current factor.
class PrefixAutomaton {
 public:
  virtual ~PrefixAutomaton() = default;
  virtual Key start() const = 0;
  virtual void step(const Key& k, Letter a, std::vector<Key>& out) const = 0;
  virtual bool accept(const Key& k) const = 0;
  // False only when no dictionary word through k ends using letters in avail.
  virtual bool completable(const Key& k, const std::vector<bool>& avail) const {
    (void)k;
    (void)avail;
    return true;
  }
  // Keys past the budget are not expanded and make the search incomplete.
  virtual bool oversized(const Key& k, std::uint64_t depth) const {
    (void)k;
    (void)depth;
    return false;
  }
};

struct Dict {
  std::string name;
  std::uint64_t alphabet = 2;
  std::function<bool(const Word&)> member;
  std::shared_ptr<const PrefixAutomaton> automaton;
  // Set when the dictionary carries the pi words of this tree.
  std::shared_ptr<const TransitionTree> rtree;
  bool has_mu = false;

  // Members of length <= max_len in length-lex order.
  std::vector<Word> enumerate(std::size_t max_len) const;
};

std::shared_ptr<const PrefixAutomaton> union_automaton(std::shared_ptr<const PrefixAutomaton> a,
                                                       std::shared_ptr<const PrefixAutomaton> b);
// Deterministic table automaton: trans[state][letter] = next or -1.
std::shared_ptr<const PrefixAutomaton> table_automaton(std::vector<std::vector<int>> trans, std::vector<bool> accepting);
std::shared_ptr<const PrefixAutomaton> trie_automaton(const std::vector<Word>& words, std::uint64_t alphabet);

Dict finite_dict(std::string name, std::uint64_t alphabet, std::vector<Word> words);
Dict mu_dict();
Dict pi_dict(const TransitionTree& r);
Dict build_dictionary(const TransitionTree& r);  // mu union pi

struct SearchStats {
  std::size_t nodes = 0;
  bool complete = true;
};

// Membership in D^infty. UP words: exact unless the node budget runs out.
// Program words: False when every decomposition dies within the budget,
// otherwise Unknown, except K-shaped words over a pi dictionary, which go
// through the block-level run search.
Truth3 omega_power_member(const Dict& d, const OmegaWord& w, const Budget& b, SearchStats* stats = nullptr);
// Prefix level: some factorisation into dictionary words plus an extendable rest.
Truth3 omega_power_member(const Dict& d, const Word& prefix, const Budget& b, SearchStats* stats = nullptr);

struct BlockSearch {
  Truth3 value = Truth3::Unknown;
  std::vector<Word> words;  // leading pi words of a witness decomposition
};
// pi^infty membership of an element of K_{N,j} with letters alpha, as a run
// of the transition system from q_N with infinitely many accepting states.
BlockSearch pi_block_search(const TransitionTree& r, std::uint64_t n, std::uint64_t j, const OmegaWord& alpha,
                            const Budget& b, std::size_t witness_blocks = 0);

// ---- E_N ----

// What en_member needs to know about B and the bijection onto it.
struct BContext {
  std::function<bool(const UPWord&)> in_b;
  // First n letters of f^{-1}(alpha), in coordinates of P_infty.
  std::function<Word(const UPWord&, std::size_t)> preimage_prefix;
};
bool en_member(std::uint64_t n, const UPWord& alpha, const BContext& ctx);

}  // namespace omegaforge
