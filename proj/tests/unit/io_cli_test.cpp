#include <filesystem>
#include <random>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "labyrinth/ball_labyrinth.hpp"
#include "labyrinth/cli.hpp"
#include "labyrinth/convex_adapter.hpp"
#include "labyrinth/error.hpp"
#include "labyrinth/io.hpp"
#include "support/helpers.hpp"

using namespace lab;
namespace fs = std::filesystem;

namespace {

Labyrinth default_labyrinth(int dim = 2, int J = 3) {
  const auto sch = shell::make_schedule(0.5, J, shell::default_class_count(dim, 0.45), 1.05, 0.45);
  auto lab = shell::build_labyrinth(sch, dim, 1);
  lab.budget = 2.0;
  return lab;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("labyrinth_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("number format keeps 17 digits and the sign of zero") {
  CHECK(io::format_number(0.1) == "0.10000000000000001");
  CHECK(io::format_number(-0.0) == "-0.0");
  CHECK(io::format_number(0.0) == "0");
  CHECK(std::stod(io::format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("round trip is exact") {
  for (const Labyrinth& lab : {default_labyrinth(), default_labyrinth(3, 1)}) {
    const std::string text = io::save_labyrinth(lab);
    const Labyrinth back = io::load_labyrinth(text);
    REQUIRE(back.components.size() == lab.components.size());
    for (std::size_t i = 0; i < lab.components.size(); ++i) {
      CHECK(back.components[i].ball.center == lab.components[i].ball.center);
      CHECK(back.components[i].ball.normal == lab.components[i].ball.normal);
      CHECK(back.components[i].ball.radius == lab.components[i].ball.radius);
      CHECK(back.components[i].ball.level == lab.components[i].ball.level);
    }
    CHECK(back.schedule->s == lab.schedule->s);
    CHECK(io::save_labyrinth(back) == text);
  }
  Mat A(2, 2);
  A << 4, 1, 1, 2;
  const auto mapped = convex::pullback_labyrinth(default_labyrinth(2, 1), A);
  const std::string text = io::save_labyrinth(mapped);
  CHECK(io::save_labyrinth(io::load_labyrinth(text)) == text);
}

TEST_CASE("schema field names") {
  const std::string text = io::save_labyrinth(default_labyrinth(2, 1));
  for (const char* key : {"\"version\"", "\"dim\"", "\"domain\"", "\"schedule\"", "\"components\"", "\"center\"",
                          "\"normal\"", "\"radius\"", "\"level\"", "\"seed\""}) {
    CHECK(text.find(key) != std::string::npos);
  }
}

TEST_CASE("malformed files name the offending field") {
  const std::string text = io::save_labyrinth(default_labyrinth(2, 1));
  auto expect = [](const std::string& bad, const std::string& field) {
    try {
      (void)io::load_labyrinth(bad);
      FAIL("expected malformed-file");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kMalformedFile);
      INFO(e.what());
      CHECK(std::string(e.what()).find(field) != std::string::npos);
    }
  };
  expect(std::regex_replace(text, std::regex("\"radius\": [0-9.e-]+"), "\"radius\": -1",
                            std::regex_constants::format_first_only),
         "components[0].radius");
  expect(std::regex_replace(text, std::regex("\"version\": 1"), "\"version\": 7"), "version");
  expect(std::regex_replace(text, std::regex("\"dim\": 2"), "\"dim\": \"two\""), "dim");
  expect("{ not json", "not valid JSON");
}

TEST_CASE("svg and csv exports") {
  const auto lab = default_labyrinth();
  const std::string svg = io::export_svg(lab);
  CHECK(count(svg, "class=\"component\"") == lab.components.size());
  CHECK(svg.find("viewBox=\"-500 -500 1000 1000\"") != std::string::npos);
  // The unit circle touches the viewBox edge: its rightmost vertex sits at x = 500.
  CHECK(svg.find("points=\"500.000,0.000 ") != std::string::npos);
  const std::string csv = io::export_csv(lab);
  CHECK(count(csv, "\n") == lab.components.size() + 1);

  const auto lab3 = default_labyrinth(3, 1);
  CHECK_THROWS_AS(io::export_svg(lab3), Error);
  io::SvgOptions options;
  options.axes = std::pair{0, 2};
  CHECK(count(io::export_svg(lab3, options), "class=\"component\"") == lab3.components.size());
}

TEST_CASE("cli: generate, verify, export, report") {
  TempDir dir;
  const std::string file = dir / "lab.json";
  auto gen = run({"generate", "--dim", "2", "--domain", "ball", "--s0", "0.5", "--J", "3", "--M", "2", "--out", file});
  CHECK(gen.code == cli::kExitPass);
  CHECK(fs::exists(file));
  CHECK(fs::exists(dir / "lab.audit.json"));

  auto bad = run({"generate", "--t", "2", "--c", "0.3", "--out", dir / "x.json"});
  CHECK(bad.code == cli::kExitInput);
  CHECK(bad.err.find("t*c < 1/2") != std::string::npos);

  // J = 3 is far too few shells for M = 2: verification fails, with exit 2.
  auto ver = run({"verify", file, "--seeds", "1", "--nodes", "4000"});
  CHECK(ver.code == cli::kExitFailure);
  const std::string report = io::read_file(dir / "lab.report.json");
  CHECK(report.find("best_path") != std::string::npos);

  auto ok = run({"verify", file, "--M", "0.5", "--seeds", "1", "--nodes", "4000"});
  CHECK(ok.code == cli::kExitPass);

  auto exp = run({"export", file, "--svg", dir / "lab.svg", "--csv", dir / "lab.csv", "--path",
                  dir / "lab.report.json"});
  CHECK(exp.code == cli::kExitPass);
  CHECK(io::read_file(dir / "lab.svg").find("class=\"escape\"") != std::string::npos);

  CHECK(run({"report", file}).code == cli::kExitPass);
  CHECK(run({"frobnicate"}).code == cli::kExitInput);
}

TEST_CASE("cli: empty annulus budget contract") {
  TempDir dir;
  Labyrinth empty;
  empty.domain.type = DomainType::kAnnulus;
  empty.domain.inner = 0.5;
  empty.domain.outer = 1.0;
  io::write_file(dir / "empty.json", io::save_labyrinth(empty));
  CHECK(run({"verify", dir / "empty.json", "--M", "0.4", "--seeds", "1", "--nodes", "2000"}).code == cli::kExitPass);
  CHECK(run({"verify", dir / "empty.json", "--M", "0.6", "--seeds", "1", "--nodes", "2000"}).code ==
        cli::kExitFailure);
}

TEST_CASE("cli: corrupted files and missing axes exit 1") {
  TempDir dir;
  const std::string text = io::save_labyrinth(default_labyrinth(2, 1));
  io::write_file(dir / "bad.json", std::regex_replace(text, std::regex("\"radius\": [0-9.e-]+"), "\"radius\": -1",
                                                      std::regex_constants::format_first_only));
  const auto r = run({"verify", dir / "bad.json", "--M", "1"});
  CHECK(r.code == cli::kExitInput);
  CHECK(r.err.find("components[0].radius") != std::string::npos);

  io::write_file(dir / "d3.json", io::save_labyrinth(default_labyrinth(3, 1)));
  CHECK(run({"export", dir / "d3.json", "--svg", dir / "d3.svg"}).code == cli::kExitInput);
  CHECK(run({"export", dir / "d3.json", "--svg", dir / "d3.svg", "--axes", "0,2"}).code == cli::kExitPass);
}

TEST_CASE("cli: config file with flags winning") {
  TempDir dir;
  io::write_file(dir / "cfg.json", "{\"J\": 2, \"t\": 1.1, \"out\": \"" + (dir / "cfg_lab.json") + "\"}");
  CHECK(run({"generate", "--config", dir / "cfg.json", "--J", "1"}).code == cli::kExitPass);
  const auto lab = io::load_labyrinth(io::read_file(dir / "cfg_lab.json"));
  CHECK(lab.schedule->J == 1);
  CHECK(lab.schedule->t == 1.1);
}

TEST_CASE("cli: generate is deterministic") {
  TempDir dir;
  for (const char* name : {"a", "b"}) {
    REQUIRE(run({"generate", "--J", "2", "--seed", "9", "--out", dir / (std::string(name) + ".json")}).code ==
            cli::kExitPass);
  }
  CHECK(io::read_file(dir / "a.json") == io::read_file(dir / "b.json"));
  CHECK(io::read_file(dir / "a.audit.json") == io::read_file(dir / "b.audit.json"));
}
