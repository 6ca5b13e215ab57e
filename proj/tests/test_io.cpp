#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "ftb/error.hpp"
#include "ftb/io.hpp"

using namespace ftb;

TEST_CASE("format_float round-trips doubles exactly") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 0.001, -0.0, 12345.0}) {
    const std::string s = io::format_float(x);
    CHECK(std::stod(s) == x);
  }
  CHECK(io::format_float(0.1) == "0.10000000000000001");
  CHECK(io::format_float(0.5) == "0.5");
  CHECK(io::format_float(-3.0) == "-3");
}

TEST_CASE("key-value config parsing: comments, sections, quotes, lists") {
  const std::string text =
      "# a comment\n"
      "divergence = reverse_kl\n"
      "steps=2000   # trailing comment\n"
      "\n"
      "[env]\n"
      "d = 2\n"
      "h = 8\n"
      "r0 = 0.001\n"
      "\n"
      "[behavior]\n"
      "mode = \"eps_uniform\"\n"
      "eps = 0.5\n";
  const io::ConfigMap cfg = io::parse_config_text(text);
  CHECK(io::get_string(cfg, "divergence", "") == "reverse_kl");
  CHECK(io::get_int(cfg, "steps", 0) == 2000);
  CHECK(io::get_int(cfg, "env.d", 0) == 2);
  CHECK(io::get_int(cfg, "env.h", 0) == 8);
  CHECK(io::get_double(cfg, "env.r0", 0.0) == 0.001);
  CHECK(io::get_string(cfg, "behavior.mode", "") == "eps_uniform");
  CHECK(io::get_double(cfg, "behavior.eps", 0.0) == 0.5);
}

TEST_CASE("json config parsing flattens nested objects and arrays") {
  const std::string text = R"({
    "env": {"d": 2, "h": 64, "r0": 0.001},
    "divergences": ["reverse_kl", "forward_kl", "alpha:0.75"],
    "seeds": [1, 2, 3],
    "lr": 0.01,
    "normalization": "devgrad"
  })";
  const io::ConfigMap cfg = io::parse_config_text(text);
  CHECK(io::get_int(cfg, "env.h", 0) == 64);
  CHECK(io::get_double(cfg, "lr", 0.0) == 0.01);
  CHECK(io::get_string(cfg, "normalization", "") == "devgrad");
  const std::vector<std::string> divs =
      io::split_list(io::get_string(cfg, "divergences", ""));
  REQUIRE(divs.size() == 3);
  CHECK(divs[0] == "reverse_kl");
  CHECK(divs[2] == "alpha:0.75");
  CHECK(io::get_string(cfg, "seeds", "") == "1,2,3");
  CHECK_THROWS_AS(io::parse_config_text("{ not json"), config_error);
}

TEST_CASE("typed accessors fall back and reject unparseable values") {
  io::ConfigMap cfg;
  cfg["x"] = "1.5";
  cfg["n"] = "42";
  cfg["bad"] = "pear";
  CHECK(io::get_double(cfg, "x", 0.0) == 1.5);
  CHECK(io::get_double(cfg, "missing", -2.0) == -2.0);
  CHECK(io::get_int(cfg, "n", 0) == 42);
  CHECK(io::get_int(cfg, "missing", 7) == 7);
  CHECK(io::has_key(cfg, "x"));
  CHECK_FALSE(io::has_key(cfg, "missing"));
  CHECK_THROWS_AS(io::get_double(cfg, "bad", 0.0), config_error);
  CHECK_THROWS_AS(io::get_int(cfg, "bad", 0), config_error);
  CHECK_THROWS_AS(io::get_int(cfg, "x", 0), config_error);  // 1.5 is not integral
}

TEST_CASE("split_list trims fields and drops empties") {
  const std::vector<std::string> out = io::split_list(" a, b ,c,, d ");
  REQUIRE(out.size() == 4);
  CHECK(out[0] == "a");
  CHECK(out[1] == "b");
  CHECK(out[2] == "c");
  CHECK(out[3] == "d");
  CHECK(io::split_list("").empty());
  CHECK(io::split_list("solo").size() == 1);
}

TEST_CASE("sha1 and the git blob hash match known vectors") {
  CHECK(io::sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(io::sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
  CHECK(io::sha1_hex("The quick brown fox jumps over the lazy dog") ==
        "2fd4e1c67a2d28fced849ee1bb76e7391b93eb12");
  // A 64-byte message exercises the padding boundary.
  CHECK(io::sha1_hex(std::string(64, 'a')) ==
        "0098ba824b5c16427bd7a1122a5a442a25ec644d");
  CHECK(io::git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(io::git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("csv_join emits one line with a trailing newline") {
  CHECK(io::csv_join({"a", "b", "c"}) == "a,b,c\n");
  CHECK(io::csv_join({"solo"}) == "solo\n");
  CHECK(io::csv_join({"x", "", "z"}) == "x,,z\n");
}

TEST_CASE("file round trip and unreadable files") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "ftb_io_test";
  const std::filesystem::path file = dir / "nested" / "config.txt";
  const std::string content = "steps = 5\n";
  io::write_file(file.string(), content);
  CHECK(io::read_file(file.string()) == content);
  const io::ConfigMap cfg = io::load_config_file(file.string());
  CHECK(io::get_int(cfg, "steps", 0) == 5);
  CHECK_THROWS_AS(io::read_file((dir / "missing.txt").string()), config_error);
  std::filesystem::remove_all(dir);
}
