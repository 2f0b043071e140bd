#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "omegaforge/borel.hpp"

namespace {

struct Result {
  int rc;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int rc = omegaforge::cli::run(args, out, err);
  return {rc, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("omegaforge_cli_" + name)).string();
}

}  // namespace

TEST_CASE("help output matches the golden files") {
  for (std::string sub : {"eval-code", "kuratowski", "build-dict", "member", "gallery", "thm2", "construct", "check",
                          "export-dot", "sweep"}) {
    CAPTURE(sub);
    auto r = run({sub, "--help"});
    CHECK(r.rc == 0);
    CHECK(r.out == slurp(std::string(OMEGAFORGE_GOLDEN_DIR) + "/" + sub + ".help.txt"));
  }
  auto top = run({"--help"});
  CHECK(top.rc == 0);
  CHECK(top.out == slurp(std::string(OMEGAFORGE_GOLDEN_DIR) + "/omega-forge.help.txt"));
}

TEST_CASE("documented invocations") {
  auto g = run({"gallery", "--name", "pi1", "--word", "0|0"});
  CHECK(g.rc == 0);
  CHECK(g.out == "true\n");

  auto t = run({"thm2", "--check-omega", "1|0"});
  CHECK(t.rc == 1);
  CHECK(t.out == "false\n");

  std::string code = tmp("p_inf.json");
  {
    std::ofstream f(code);
    f << omegaforge::to_json(*omegaforge::p_infinity_code()).dump();
  }
  auto e = run({"eval-code", "--code", code, "--point", "|01", "--exact"});
  CHECK(e.rc == 0);
  CHECK(e.out == "true\n");
  auto e2 = run({"eval-code", "--code", code, "--point", "01|0", "--exact"});
  CHECK(e2.rc == 1);
  CHECK(e2.out == "false\n");
  auto u = run({"eval-code", "--code", code, "--point", "01|0"});
  CHECK(u.rc == 3);
  CHECK(u.out == "unknown\n");
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).rc == 2);
  CHECK(run({"no-such-command"}).rc == 2);
  CHECK(run({"gallery", "--name", "nope", "--word", "0|0"}).rc == 2);
  CHECK(run({"gallery", "--name", "pi1", "--word", "0|"}).rc == 2);
  CHECK(run({"member", "--word", "|0"}).rc == 2);
  CHECK(run({"construct", "--code", "builtin:p_infinity", "--target", "delta"}).rc == 2);
  CHECK(run({"eval-code", "--code", tmp("missing.json"), "--point", "|0"}).rc == 2);
  CHECK(run({"eval-code", "--code", "builtin:nothing", "--point", "|0"}).rc == 2);
}

TEST_CASE("kuratowski modes") {
  auto rt = run({"kuratowski", "--code", "builtin:p_infinity", "--point", "|10", "--budget", "40"});
  CHECK(rt.rc == 0);
  auto j = omegaforge::json::parse(rt.out);
  CHECK(j["agree"] == true);
  CHECK(j["h"][0] == 0);
  CHECK(j["h"][1] == 1);

  auto out = run({"kuratowski", "--code", "builtin:p_infinity", "--point", "1|0", "--mode", "g"});
  CHECK(out.rc == 1);
  CHECK(omegaforge::json::parse(out.out)["in_b"] == false);

  auto f = run({"kuratowski", "--code", "builtin:full", "--point", "|1", "--mode", "f", "--budget", "8"});
  CHECK(f.rc == 0);
  CHECK(omegaforge::json::parse(f.out)["output"] == "11111111");
  auto nc = run({"kuratowski", "--code", "builtin:full", "--point", "2|0", "--mode", "f", "--budget", "8"});
  CHECK(nc.rc == 1);
  CHECK(omegaforge::json::parse(nc.out)["in_c"] == false);
}

TEST_CASE("dictionary and membership commands") {
  auto d = run({"build-dict", "--rtree", "diagonal", "--max-len", "4"});
  CHECK(d.rc == 0);
  CHECK(d.out.find("0303\n") != std::string::npos);

  std::string words = tmp("words.txt");
  {
    std::ofstream f(words);
    f << "# two words\n01\n1\n";
  }
  CHECK(run({"member", "--dict", words, "--alphabet", "2", "--word", "|011"}).rc == 0);
  CHECK(run({"member", "--dict", words, "--alphabet", "2", "--word", "|00"}).rc == 1);
  CHECK(run({"member", "--builtin", "a2", "--word", "|012"}).out == "true\n");
  CHECK(run({"thm2", "--check-word", "0121"}).rc == 0);
  auto g = omegaforge::json::parse(run({"thm2", "--export-grammar"}).out);
  CHECK(g.contains("E"));
  CHECK(g.contains("A"));
  auto list = omegaforge::json::parse(run({"gallery", "--list"}).out);
  CHECK(list.size() == 6);
  auto s = omegaforge::json::parse(run({"gallery", "--name", "sigma1", "--word", "|10", "--search"}).out);
  CHECK(s["search"] == (s["decider"] == true ? "true" : "false"));
}

TEST_CASE("construct, check and export-dot") {
  std::string c = tmp("construction.json");
  CHECK(run({"construct", "--code", "builtin:p_infinity", "--target", "pi", "--out", c}).rc == 0);
  auto chk = run({"check", "--construction", c, "--sweep", "u_max=2,v_max=2"});
  CHECK(chk.rc == 0);
  auto rep = omegaforge::json::parse(chk.out);
  CHECK(rep["contradictions"].empty());
  CHECK(rep["checked"].get<int>() > 0);
  auto dot = run({"export-dot", "--rtree", c, "--depth", "2"});
  CHECK(dot.rc == 0);
  CHECK(dot.out.rfind("digraph", 0) == 0);
  CHECK(run({"check", "--construction", c, "--sweep", "w_max=2"}).rc == 2);
}

TEST_CASE("sweep reports do not depend on the worker count") {
  for (std::string task : {"gallery", "partition", "erase"}) {
    CAPTURE(task);
    auto a = run({"sweep", "--task", task, "--seed", "11", "--samples", "40", "--workers", "1", "--sweep", "u_max=2,v_max=2"});
    auto b = run({"sweep", "--task", task, "--seed", "11", "--samples", "40", "--workers", "3", "--sweep", "u_max=2,v_max=2"});
    CHECK(a.rc == 0);
    CHECK(a.out == b.out);
  }
}
