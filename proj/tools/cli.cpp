#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "omegaforge/errors.hpp"
#include "omegaforge/kuratowski.hpp"
#include "omegaforge/pipeline.hpp"
#include "omegaforge/witnesses.hpp"

namespace omegaforge::cli {

namespace {

// Exit codes.
constexpr int kTrue = 0;
constexpr int kFalse = 1;
constexpr int kUsage = 2;
constexpr int kUnknown = 3;

int exit_for(Truth3 t) {
  switch (t) {
    case Truth3::True: return kTrue;
    case Truth3::False: return kFalse;
    case Truth3::Unknown: return kUnknown;
  }
  return kUnknown;
}

struct Config {
  int max_rank = 4;
  std::uint64_t depth = 64;
  std::uint64_t index_bound = 64;
  std::size_t u_max = 3, v_max = 3;
  std::size_t samples = 300;
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  static Config load(const std::string& path) {
    Config c;
    if (path.empty()) return c;
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read config " + path);
    json j = json::parse(in);
    c.max_rank = j.value("max_rank", c.max_rank);
    c.depth = j.value("depth", c.depth);
    c.index_bound = j.value("index_bound", c.index_bound);
    c.u_max = j.value("u_max", c.u_max);
    c.v_max = j.value("v_max", c.v_max);
    c.samples = j.value("samples", c.samples);
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    if (c.max_rank < 1 || c.depth < 1 || c.index_bound < 1 || c.v_max < 1 || c.samples < 1 || c.workers < 1)
      throw ParseError("config bounds must be at least 1");
    return c;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// A code file, or builtin:p_infinity / builtin:full / builtin:empty.
CodePtr load_code(const std::string& spec) {
  if (spec == "builtin:p_infinity") return p_infinity_code();
  if (spec == "builtin:full") return complement_code(empty_code(SpaceDesc::cantor()));
  if (spec == "builtin:empty") return complement_code(full_code(SpaceDesc::cantor()));
  if (spec.rfind("builtin:", 0) == 0) throw UnknownName("builtin code '" + spec.substr(8) + "'");
  return code_from_json(json::parse(read_file(spec)));
}

std::shared_ptr<const TransitionTree> load_tree(const std::string& spec) {
  if (spec == "full") return std::make_shared<const TransitionTree>(TransitionTree::full());
  if (spec == "diagonal") return std::make_shared<const TransitionTree>(TransitionTree::diagonal());
  if (spec == "empty") return std::make_shared<const TransitionTree>(TransitionTree::empty());
  json j = json::parse(read_file(spec));
  // A construction file carries its tree implicitly through the source code.
  if (j.contains("source")) return construction_from_json(j).rtree;
  return std::make_shared<const TransitionTree>(TransitionTree::from_json(j));
}

Dict builtin_dict(const std::string& name) {
  if (name == "mu") return mu_dict();
  if (name == "pi-full") return pi_dict(TransitionTree::full());
  if (name == "pi-diagonal") return pi_dict(TransitionTree::diagonal());
  if (name == "mu+pi-full") return build_dictionary(TransitionTree::full());
  if (name == "mu+pi-diagonal") return build_dictionary(TransitionTree::diagonal());
  if (name == "a2") return a2_dict();
  return gallery(name).dict;
}

Dict file_dict(const std::string& path, std::uint64_t alphabet) {
  std::vector<Word> words;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    words.push_back(word_from_string(line, Alphabet{alphabet}));
  }
  return finite_dict(path, alphabet, std::move(words));
}

Component parse_component(const Factor& f, const std::string& text) {
  if (f.kind == FactorKind::Nat) return static_cast<std::uint64_t>(std::stoull(text));
  return UPWord::parse(text, f.alphabet());
}

std::pair<std::size_t, std::size_t> parse_sweep(const std::string& text, std::size_t u, std::size_t v) {
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("sweep item '" + item + "' is not key=value");
    std::string key = item.substr(0, eq);
    std::size_t val = std::stoull(item.substr(eq + 1));
    if (key == "u_max") {
      u = val;
    } else if (key == "v_max") {
      v = val;
    } else {
      throw ParseError("unknown sweep key '" + key + "'");
    }
  }
  if (v < 1) throw ParseError("v_max must be at least 1");
  return {u, v};
}

// Runs job(i) for i < n on `workers` threads; results land in index order.
template <class R, class F>
std::vector<R> sharded(std::size_t n, std::size_t workers, F job) {
  std::vector<R> out(n);
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::vector<std::thread> ts;
  std::vector<std::exception_ptr> errs(workers);
  for (std::size_t w = 0; w < workers; ++w)
    ts.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) out[i] = job(i);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  for (auto& t : ts) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<Construction> standard_constructions(const Budget& b) {
  return {construct(load_code("builtin:empty"), "sigma", b), construct(load_code("builtin:full"), "pi", b),
          construct(load_code("builtin:p_infinity"), "pi", b)};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Borel codes, omega-powers and their witnesses", "omega-forge"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  std::string config_path;
  int max_rank_flag = 0;
  app.add_option("--config", config_path, "JSON file with max_rank, depth, index_bound, u_max, v_max, samples, seed, workers");
  app.add_option("--max-rank", max_rank_flag, "Largest code rank (OMEGA_FORGE_MAX_RANK takes precedence)")->check(CLI::PositiveNumber);

  // Flag targets; zero means "take it from the config".
  std::uint64_t depth = 0, index = 0;
  std::string code, target, outpath, mode = "roundtrip", rtree, dict_path, builtin, name, report;
  std::vector<std::string> points;
  std::string word, point, sweep_spec, construction, task;
  bool exact = false, list = false, search = false, grammar = false;
  std::string check_word, check_omega;
  std::size_t max_len = 8, dot_depth = 3, samples = 0, workers = 0;
  std::uint64_t alphabet = 4, seed = 0;

  auto budget_opts = [&](CLI::App* s) {
    s->add_option("--depth,--budget", depth, "Prefix letters inspected")->check(CLI::PositiveNumber);
    s->add_option("--index", index, "Family indices explored")->check(CLI::PositiveNumber);
  };

  auto* eval_cmd = app.add_subcommand("eval-code", "Evaluate a Borel code at an ultimately periodic point");
  eval_cmd->add_option("--code", code, "Code JSON file or builtin:NAME")->required();
  eval_cmd->add_option("--point", points, "One \"u|v\" per sequence factor, a number per Nat factor")->required();
  eval_cmd->add_flag("--exact", exact, "Exact evaluation");
  budget_opts(eval_cmd);

  auto* kur_cmd = app.add_subcommand("kuratowski", "Closed set, bijection f and inverse g for a complement-form code");
  kur_cmd->add_option("--code", code, "Code JSON file or builtin:NAME")->required();
  kur_cmd->add_option("--point", point, "\"u|v\" over 2 (g, roundtrip) or comma-separated over omega (f)")->required();
  kur_cmd->add_option("--mode", mode, "g, f or roundtrip")->check(CLI::IsMember({"g", "f", "roundtrip"}));
  budget_opts(kur_cmd);

  auto* dict_cmd = app.add_subcommand("build-dict", "List the dictionary mu + pi for a transition tree");
  dict_cmd->add_option("--rtree", rtree, "full, diagonal, empty, a tree JSON or a construction JSON")->required();
  dict_cmd->add_option("--max-len", max_len, "Longest word listed");
  dict_cmd->add_option("--out", outpath, "Write the words here, one per line");

  auto* mem_cmd = app.add_subcommand("member", "Decide membership in the omega-power of a dictionary");
  auto* dict_opt = mem_cmd->add_option("--dict", dict_path, "File with one word per line");
  auto* builtin_opt = mem_cmd->add_option("--builtin", builtin, "mu, pi-full, pi-diagonal, mu+pi-full, mu+pi-diagonal, a2 or a gallery name");
  dict_opt->excludes(builtin_opt);
  mem_cmd->add_option("--alphabet", alphabet, "Alphabet size of a --dict file")->check(CLI::PositiveNumber);
  mem_cmd->add_option("--word", word, "\"u|v\"")->required();
  budget_opts(mem_cmd);

  auto* gal_cmd = app.add_subcommand("gallery", "Dictionaries with known omega-powers");
  gal_cmd->add_flag("--list", list, "List the entries with their claims");
  gal_cmd->add_option("--name", name, "Entry name");
  gal_cmd->add_option("--word", word, "\"u|v\" over 2");
  gal_cmd->add_flag("--search", search, "Also run the generic omega-power search");
  budget_opts(gal_cmd);

  auto* thm_cmd = app.add_subcommand("thm2", "The erasing map and the one-counter dictionary A");
  thm_cmd->add_option("--check-word", check_word, "Finite word over 3: membership in A");
  thm_cmd->add_option("--check-omega", check_omega, "\"u|v\" over 3: membership in the omega-power of A");
  thm_cmd->add_flag("--export-grammar", grammar, "Print the one-counter machines as JSON");

  auto* con_cmd = app.add_subcommand("construct", "Build the dictionary for a complement-form code");
  con_cmd->add_option("--code", code, "Code JSON file or builtin:NAME")->required();
  con_cmd->add_option("--target", target, "sigma or pi")->required()->check(CLI::IsMember({"sigma", "pi"}));
  con_cmd->add_option("--out", outpath, "Write the construction JSON here");
  budget_opts(con_cmd);

  auto* chk_cmd = app.add_subcommand("check", "Check the partition identity of a construction");
  chk_cmd->add_option("--construction", construction, "Construction JSON")->required();
  chk_cmd->add_option("--sweep", sweep_spec, "Bounds \"u_max=U,v_max=V\" on the sampled words");
  chk_cmd->add_option("--report", report, "Write the report JSON here");
  budget_opts(chk_cmd);

  auto* dot_cmd = app.add_subcommand("export-dot", "Transition system slice in DOT");
  dot_cmd->add_option("--rtree", rtree, "full, diagonal, empty, a tree JSON or a construction JSON")->required();
  dot_cmd->add_option("--depth", dot_depth, "Pair length bound (at most 8)");

  auto* swp_cmd = app.add_subcommand("sweep", "Batch cross-checks, sharded over workers");
  swp_cmd->add_option("--task", task, "gallery, thm2, partition or erase")->required()->check(CLI::IsMember({"gallery", "thm2", "partition", "erase"}));
  swp_cmd->add_option("--sweep", sweep_spec, "Bounds \"u_max=U,v_max=V\"");
  swp_cmd->add_option("--samples", samples, "Random samples (partition, erase)")->check(CLI::PositiveNumber);
  swp_cmd->add_option("--seed", seed, "Random seed");
  swp_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  swp_cmd->add_option("--report", report, "Write the report JSON here");
  budget_opts(swp_cmd);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code_ = app.exit(e, out, err);
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return 0;
    (void)code_;
    return kUsage;
  }

  try {
    Config cfg = Config::load(config_path);
    if (max_rank_flag) cfg.max_rank = max_rank_flag;
    if (!std::getenv("OMEGA_FORGE_MAX_RANK") && (max_rank_flag || !config_path.empty()))
      setenv("OMEGA_FORGE_MAX_RANK", std::to_string(cfg.max_rank).c_str(), 1);
    Budget b{depth ? depth : cfg.depth, index ? index : cfg.index_bound};

    if (eval_cmd->parsed()) {
      CodePtr c = load_code(code);
      if (points.size() != c->space.factors.size())
        throw ParseError("expected " + std::to_string(c->space.factors.size()) + " --point values for " + c->space.to_string());
      ProductPoint x;
      for (std::size_t i = 0; i < points.size(); ++i) x.push_back(parse_component(c->space.factors[i], points[i]));
      Truth3 t = exact ? truth(eval_exact_up(*c, x)) : eval_budgeted(*c, x, b);
      out << to_string(t) << "\n";
      return exit_for(t);
    }

    if (kur_cmd->parsed()) {
      PresentationPtr p = Presentation::present(load_code(code));
      json r{{"mode", mode}, {"point", point}, {"rank", p->rank()}, {"base", p->base()}};
      if (mode == "f") {
        UPWord d = UPWord::parse(point, Alphabet::omega());
        try {
          r["output"] = word_to_string(p->f_apply(OmegaWord(d), b), Alphabet{2});
          r["in_c"] = true;
        } catch (const NotInC& e) {
          r["in_c"] = false;
          r["reason"] = e.what();
          out << dump(r);
          return kFalse;
        }
        out << dump(r);
        return kTrue;
      }
      UPWord a = UPWord::parse(point, Alphabet{2});
      if (!p->in_b(a)) {
        r["in_b"] = false;
        out << dump(r);
        return kFalse;
      }
      r["in_b"] = true;
      ProgramWord d = p->g_apply(a, b);
      Word dp = d.prefix(b.depth);
      r["delta"] = json(std::vector<std::uint64_t>(dp.begin(), dp.end()));
      if (!p->base()) {
        json h = json::array();
        for (std::uint64_t i = 0; i < 8; ++i) h.push_back(p->h(a, i, b));
        r["h"] = h;
      }
      if (mode == "g") {
        out << dump(r);
        return kTrue;
      }
      Word back = p->f_apply(OmegaWord(d), b);
      bool agree = back == a.prefix(back.size());
      r["f_of_g"] = word_to_string(back, Alphabet{2});
      r["agree"] = agree;
      out << dump(r);
      return agree ? kTrue : kFalse;
    }

    if (dict_cmd->parsed()) {
      Dict d = build_dictionary(*load_tree(rtree));
      std::string text;
      auto words = d.enumerate(max_len);
      for (auto& w : words) text += word_to_string(w, Alphabet{4}) + "\n";
      if (outpath.empty()) {
        out << text;
      } else {
        write_file(outpath, text);
        out << dump({{"words", words.size()}, {"out", outpath}, {"max_len", max_len}});
      }
      return kTrue;
    }

    if (mem_cmd->parsed()) {
      if (dict_path.empty() && builtin.empty()) throw ParseError("member needs --dict or --builtin");
      Dict d = dict_path.empty() ? builtin_dict(builtin) : file_dict(dict_path, alphabet);
      UPWord w = UPWord::parse(word, Alphabet{d.alphabet});
      Truth3 t = omega_power_member(d, OmegaWord(w), b);
      out << to_string(t) << "\n";
      return exit_for(t);
    }

    if (gal_cmd->parsed()) {
      if (list) {
        json j = json::array();
        for (auto& n : gallery_names()) j.push_back({{"name", n}, {"claim", gallery(n).claim}});
        out << dump(j);
        return kTrue;
      }
      if (name.empty() || word.empty()) throw ParseError("gallery needs --list, or --name and --word");
      GalleryEntry g = gallery(name);
      UPWord a = UPWord::parse(word, Alphabet{2});
      bool v = g.exact_decider(a);
      if (search) {
        Truth3 s = omega_power_member(g.dict, OmegaWord(a), b);
        out << dump({{"name", name}, {"word", a.to_string()}, {"decider", v}, {"search", to_string(s)}});
      } else {
        out << (v ? "true" : "false") << "\n";
      }
      return v ? kTrue : kFalse;
    }

    if (thm_cmd->parsed()) {
      if (grammar) {
        out << dump({{"E", counter_e().to_json()}, {"A", counter_a().to_json()}});
        return kTrue;
      }
      if (!check_word.empty() || (thm_cmd->count("--check-word") && check_omega.empty())) {
        bool v = a2_member(word_from_string(check_word, Alphabet{3}));
        out << (v ? "true" : "false") << "\n";
        return v ? kTrue : kFalse;
      }
      if (!check_omega.empty()) {
        bool v = a2_omega_member(UPWord::parse(check_omega, Alphabet{3}));
        out << (v ? "true" : "false") << "\n";
        return v ? kTrue : kFalse;
      }
      throw ParseError("thm2 needs --check-word, --check-omega or --export-grammar");
    }

    if (con_cmd->parsed()) {
      Construction c = construct(load_code(code), target, b);
      json j = c.to_json();
      if (outpath.empty()) {
        out << dump(j);
      } else {
        write_file(outpath, dump(j));
        out << dump({{"out", outpath}, {"rtree", j["rtree"]}, {"intended_class", j["intended_class"]}});
      }
      return kTrue;
    }

    if (chk_cmd->parsed()) {
      json cj = json::parse(read_file(construction));
      Construction c = construction_from_json(cj);
      auto [um, vm] = parse_sweep(sweep_spec, cfg.u_max, cfg.v_max);
      std::vector<PartitionReport> rs;
      for (auto& g : enumerate_up(Alphabet{4}, um, vm)) rs.push_back(partition_check(c, g, b));
      for (auto& a : enumerate_up(Alphabet{2}, um, vm))
        for (std::uint64_t n : {0, 1, 4}) rs.push_back(partition_check_k(c, n, a, b));
      std::size_t definite = 0, unknown = 0;
      json bad = json::array();
      for (auto& r : rs) {
        if (r.lhs != Truth3::Unknown && r.rhs != Truth3::Unknown) {
          ++definite;
        } else {
          ++unknown;
        }
        if (r.contradiction()) bad.push_back(r.to_json());
      }
      json rep{{"construction", cj.value("intended_class", "")},
               {"rtree", cj.value("rtree", json::object())},
               {"u_max", um},
               {"v_max", vm},
               {"budget", {{"depth", b.depth}, {"index_bound", b.index_bound}}},
               {"checked", rs.size()},
               {"definite", definite},
               {"unknown", unknown},
               {"contradictions", bad}};
      if (report.empty()) {
        out << dump(rep);
      } else {
        write_file(report, dump(rep));
        out << dump({{"report", report}, {"checked", rs.size()}, {"contradictions", bad.size()}});
      }
      return bad.empty() ? kTrue : kFalse;
    }

    if (dot_cmd->parsed()) {
      out << export_dot(*load_tree(rtree), dot_depth);
      return kTrue;
    }

    if (swp_cmd->parsed()) {
      auto [um, vm] = parse_sweep(sweep_spec, cfg.u_max, cfg.v_max);
      std::size_t nsamples = samples ? samples : cfg.samples;
      std::uint64_t s = seed ? seed : cfg.seed;
      std::size_t nw = workers ? workers : cfg.workers;
      json rep{{"task", task}, {"seed", s}, {"budget", {{"depth", b.depth}, {"index_bound", b.index_bound}}}};
      std::size_t definite = 0, unknown = 0;
      json bad = json::array();

      if (task == "gallery" || task == "thm2") {
        rep["u_max"] = um;
        rep["v_max"] = vm;
        std::vector<std::pair<std::string, UPWord>> items;
        if (task == "gallery") {
          auto pts = enumerate_up(Alphabet{2}, um, vm);
          for (auto& n : gallery_names())
            for (auto& a : pts) items.emplace_back(n, a);
        } else {
          for (auto& a : enumerate_up(Alphabet{3}, um, vm)) items.emplace_back("A2", a);
        }
        std::vector<GalleryEntry> entries;
        for (auto& n : gallery_names()) entries.push_back(gallery(n));
        Dict a2 = a2_dict();
        auto res = sharded<std::pair<Truth3, bool>>(items.size(), nw, [&](std::size_t i) {
          auto& [n, a] = items[i];
          if (n == "A2") return std::make_pair(omega_power_member(a2, OmegaWord(a), b), a2_omega_member(a));
          const GalleryEntry& g = *std::find_if(entries.begin(), entries.end(), [&](const GalleryEntry& e) { return e.name == n; });
          return std::make_pair(omega_power_member(g.dict, OmegaWord(a), b), g.exact_decider(a));
        });
        for (std::size_t i = 0; i < items.size(); ++i) {
          auto [t, v] = res[i];
          if (t == Truth3::Unknown) {
            ++unknown;
            continue;
          }
          ++definite;
          if ((t == Truth3::True) != v)
            bad.push_back({{"entry", items[i].first}, {"word", items[i].second.to_string()}, {"search", to_string(t)}, {"decider", v}});
        }
      } else if (task == "partition") {
        rep["samples"] = nsamples;
        auto cs = standard_constructions(b);
        std::mt19937_64 rng(s);
        std::vector<UPWord> gs;
        for (std::size_t i = 0; i < nsamples; ++i) {
          Word u(rng() % 4), v(1 + rng() % 6);
          for (auto& x : u) x = rng() % 4;
          for (auto& x : v) x = rng() % 4;
          gs.emplace_back(Alphabet{4}, u, v);
        }
        auto res = sharded<std::vector<PartitionReport>>(gs.size(), nw, [&](std::size_t i) {
          std::vector<PartitionReport> r;
          for (auto& c : cs) r.push_back(partition_check(c, gs[i], b));
          return r;
        });
        for (auto& rr : res)
          for (auto& r : rr) {
            if (r.lhs != Truth3::Unknown && r.rhs != Truth3::Unknown) {
              ++definite;
            } else {
              ++unknown;
            }
            if (r.contradiction()) bad.push_back(r.to_json());
          }
      } else {  // erase
        rep["samples"] = nsamples;
        std::mt19937_64 rng(s);
        std::vector<UPWord> as;
        while (as.size() < nsamples) {
          Word u(rng() % 5), v(1 + rng() % 5);
          for (auto& x : u) x = rng() % 3;
          for (auto& x : v) x = rng() % 3;
          UPWord a(Alphabet{3}, u, v);
          if (t_member(a)) as.push_back(a);
        }
        auto res = sharded<bool>(as.size(), nw, [&](std::size_t i) {
          const UPWord& a = as[i];
          Word want = erase_limit(a).prefix(16);
          std::size_t n0 = erase_stabilization(a, 16);
          for (std::size_t n = n0; n < n0 + 4 * a.period().size() + 32; ++n) {
            Word e = erase(a.prefix(n));
            if (e.size() < 16 || Word(e.begin(), e.begin() + 16) != want) return false;
          }
          return true;
        });
        for (std::size_t i = 0; i < as.size(); ++i) {
          ++definite;
          if (!res[i]) bad.push_back({{"word", as[i].to_string()}});
        }
      }
      rep["definite"] = definite;
      rep["unknown"] = unknown;
      rep["failures"] = bad;
      if (report.empty()) {
        out << dump(rep);
      } else {
        write_file(report, dump(rep));
        out << dump({{"report", report}, {"definite", definite}, {"failures", bad.size()}});
      }
      return bad.empty() ? kTrue : kFalse;
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnknownName& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    err << "error: bad JSON: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: bad number: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFalse;
  }
  return kUsage;
}

}  // namespace omegaforge::cli
