#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <charconv>
#include <cmath>
#include <random>

#include "fockblock/cli/commands.hpp"
#include "fockblock/cli/config.hpp"
#include "fockblock/cli/csv.hpp"
#include "fockblock/cli/hash.hpp"
#include "fockblock/cli/presets.hpp"
#include "fockblock/error.hpp"

using namespace fockblock;
using namespace fockblock::cli;
using cplx = std::complex<double>;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) return out;
    start = comma + 1;
  }
}

int error_line(const std::string& command, const std::string& text) {
  try {
    run_command(command, text, {});
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("config parsing") {
  const Config c = Config::parse("# top\n[model]\nU = 0.4  # Kerr\nLambda3 = 1-2i\n\n[sweep]\nvalues = 1, 2,3\n");
  CHECK(c.get_double("model", "U", 0) == 0.4);
  CHECK(c.get_complex("model", "Lambda3", 0) == cplx(1, -2));
  CHECK(c.get_list("sweep", "values") == std::vector<double>{1, 2, 3});
  CHECK(c.get_double("model", "kappa", 7) == 7);

  CHECK(parse_complex("2.5", 1) == cplx(2.5, 0));
  CHECK(parse_complex("-i", 1) == cplx(0, -1));
  CHECK(parse_complex("1e-3+2e+1i", 1) == cplx(1e-3, 20));
  CHECK(parse_complex("0.5j", 1) == cplx(0, 0.5));
  CHECK_THROWS_AS(parse_double("1.5x", 3), ConfigError);
  CHECK_THROWS_AS(parse_double("nan", 3), ConfigError);

  CHECK_THROWS_AS(Config::parse("[model\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[model]\njunk\n"), ConfigError);
}

TEST_CASE("unknown and duplicate keys carry line numbers") {
  CHECK(error_line("steady", "[model]\nLambda3 = 1\nU = 0.4\nkapa = 1\ndim = 10\n") == 4);
  CHECK(error_line("steady", "[model]\nLambda3 = 1\nU = 0.4\ndim = 10\n\n[time]\nt1 = 3\n") == 7);
  CHECK(error_line("steady", "[model]\nLambda3 = 1\nU = 0.4\nU = 0.5\ndim = 10\n") == 4);
  CHECK(error_line("steady", "[model]\nLambda3 = 1\nU = abc\ndim = 10\n") == 3);
  CHECK(error_line("steady", "[model]\nLambda3 = 1\nU = 0.4\ndim = 1\n") == 4);
  CHECK_THROWS_AS(run_command("nope", "", {}), InvalidArgument);
}

TEST_CASE("shortest round-trip doubles") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(format_double(std::nan("")) == "nan");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng) * std::pow(10.0, double(int(u(rng) * 30)));
    const std::string s = format_double(v);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
}

TEST_CASE("git blob hash") {
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("csv table") {
  CsvTable t({"a", "b"});
  t.add_row({"1", "2"});
  CHECK_THROWS_AS(t.add_row({"1"}), DimensionMismatch);
  CsvTable u({"p", "a", "b"});
  u.append(t, {"x"});
  CHECK(u.str() == "p,a,b\nx,1,2\n");
}

TEST_CASE("tune command") {
  const RunOutput out = run_command("tune", "[tune]\nrow = 2 0.4 1 1\nrow = 1 0 1 1\n", {});
  const auto rows = lines(out.files.at("tune.csv"));
  REQUIRE(rows.size() == 3);
  const auto first = cells(rows[1]);
  CHECK(first[0] == "2");
  CHECK(std::stod(first[6]) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(std::stod(first[8]) == doctest::Approx(23).epsilon(1e-14));
  CHECK(std::stod(first[9]) == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(std::stod(first[10]) == doctest::Approx(-2.5).epsilon(1e-14));
  CHECK(std::stod(first[12]) == doctest::Approx(-10).epsilon(1e-14));
  CHECK(first.back().empty());
  const auto second = cells(rows[2]);
  CHECK(second[0] == "3");
  CHECK(second.back() == "invalid_argument");
  CHECK(out.summary["results"]["errors"][0]["line"] == 3);

  const RunOutput empty = run_command("tune", "", {});
  CHECK(lines(empty.files.at("tune.csv")).size() == 1);
  CHECK_THROWS_AS(run_command("tune", "[tune]\nrow = 2 0.4 1\n", {}), ConfigError);
}

TEST_CASE("steady on pure loss") {
  const RunOutput out = run_command("steady", "[model]\nLambda3 = 0\nU = 0.4\nkappa = 1\ndim = 8\n", {});
  const auto rows = lines(out.files.at("steady.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(cells(rows[0])[0] == "n_mean");
  CHECK(cells(rows[1])[0] == "0");
  CHECK(out.checks_ok);
}

TEST_CASE("evolve csv columns and summary schema") {
  const std::string cfg =
      "[model]\nLambda3 = 2\nU = 0.4\ndelta_lambda1 = 0\ndim = 12\n[time]\nt1 = 1\nstride = 0.25\n";
  const RunOutput out = run_command("evolve", cfg, {});
  const auto rows = lines(out.files.at("evolve.csv"));
  CHECK(rows[0] == "t,n_mean,g2,P0,P1,P2,leak_top3");
  CHECK(rows.size() == 6);
  for (const char* key : {"command", "config_hash", "params", "results", "checks", "runtime_s"})
    CHECK(out.summary.contains(key));
  for (const char* key : {"trace_drift", "leakage", "converged"}) CHECK(out.summary["checks"].contains(key));
  CHECK(out.summary["config_hash"] == git_blob_hash(cfg));
  CHECK(out.checks_ok);
}

TEST_CASE("sweeps are ordered and independent of worker count") {
  const std::string cfg =
      "[model]\nLambda3 = 1\nU = 0.4\ndelta_lambda1 = 0\ndim = 12\n[time]\nt1 = 1\nstride = 0.5\n"
      "[sweep]\nparam = Lambda3\nvalues = 0.5, 1, 0.25, 2\n";
  const RunOutput one = run_command("evolve", cfg, {1, 0});
  const RunOutput four = run_command("evolve", cfg, {4, 0});
  CHECK(one.files == four.files);
  const auto rows = lines(one.files.at("evolve.csv"));
  CHECK(rows[0] == "sweep_param,sweep_value,t,n_mean,g2,P0,P1,P2,leak_top3");
  CHECK(cells(rows[1])[1] == "0.5");
  CHECK(cells(rows.back())[1] == "2");
  CHECK(cells(rows[1])[0] == "model.Lambda3");
  auto a = one.summary, b = four.summary;
  a.erase("runtime_s");
  b.erase("runtime_s");
  CHECK(a == b);
}

TEST_CASE("channel command uses the seed") {
  const std::string cfg = "[channel]\nalpha = 1\nsigma = 0.2\nsamples = 2000\ndim = 30\n";
  const RunOutput a = run_command("channel", cfg, {1, 5});
  const RunOutput b = run_command("channel", cfg, {1, 5});
  const RunOutput c = run_command("channel", cfg, {1, 6});
  CHECK(a.files == b.files);
  CHECK(a.files != c.files);
}

TEST_CASE("error json") {
  const ConfigError e("bad", 7);
  const auto j = error_json("steady", e);
  CHECK(j["error"]["code"] == "config_error");
  CHECK(j["error"]["line"] == 7);
  CHECK(j["command"] == "steady");
}

TEST_CASE("presets") {
  const Preset& f4 = find_preset("fig4");
  CHECK(f4.command == "evolve");
  const Config c4 = Config::parse(f4.config);
  CHECK(c4.get_double("model", "U", 0) == 0.075);
  CHECK(c4.get_complex("model", "delta_lambda1", 0) == cplx(0.01, 0));
  CHECK(c4.get_string("sweep", "param", "") == "Lambda3");
  CHECK(c4.get_list("sweep", "values") == std::vector<double>{0.125, 0.25, 0.5, 1, 2});

  const Config c3 = Config::parse(find_preset("fig3").config);
  CHECK(c3.get_double("model", "U", 0) == 0.4);
  CHECK(c3.get_complex("model", "Lambda3", 0) == cplx(2, 0));

  for (const char* name : {"fig3", "fig4", "fig6", "fig1c", "figS1"}) CHECK_NOTHROW(find_preset(name));
  CHECK_THROWS_AS(find_preset("fig9"), InvalidArgument);
}
