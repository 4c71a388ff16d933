#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rotor/cli.hpp"
#include "rotor/lattice.hpp"
#include "rotor/ppm.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rotorwalk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = rotor::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const char* name) { return std::string(ROTOR_TEST_DATA) + "/" + name; }

std::string temp(const char* name) {
  return (std::filesystem::temp_directory_path() / (std::string("rotorwalk_test_") + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("verify dispatch") {
  auto r = cli({"verify", "--theorem", "1", "--chain", data("mixed.json"), "--horizon", "10000"});
  CHECK(r.code == 0);
  REQUIRE(r.out.rfind("t,lhs_num,lhs_den,rhs_num,rhs_den,ok,worst_ratio\n", 0) == 0);
  CHECK(r.out.find(",false,") == std::string::npos);
  CHECK(lines(r.out) == 10002);
  for (int th : {2, 3, 4, 11})
    CHECK(cli({"verify", "--theorem", std::to_string(th), "--chain", data("path4.json")}).code == 0);
  auto s = cli({"verify", "--theorem", "4", "--random", "5", "--orders", "2", "--seed", "9",
                "--horizon", "500"});
  CHECK(s.code == 0);
  CHECK(lines(s.out) == 11);
}

TEST_CASE("usage errors") {
  auto r = cli({"verify", "--theorem", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--chain") != std::string::npos);
  CHECK(cli({"run"}).code == 2);
  auto o = cli({"run", "--chain", data("path4.json"), "--order", "sideways"});
  CHECK(o.code == 2);
  CHECK(o.err.find("--order") != std::string::npos);
  auto v = cli({"run", "--chain", data("path4.json"), "--start", "9"});
  CHECK(v.code == 2);
  CHECK(v.err.find("--start") != std::string::npos);
  CHECK(cli({"verify", "--theorem", "5", "--chain", data("path4.json")}).code == 2);
  CHECK(cli({"solve", "--chain", data("nope.json")}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"z2", "--a", "1;2"}).code == 2);
  CHECK(cli({"stack", "--probs", "1/2,1/3"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("solve") {
  auto r = cli({"solve", "--chain", data("path4.json"), "--what", "h", "--b", "3", "--c", "0"});
  CHECK(r.code == 0);
  CHECK(r.out == "vertex,h\n0,0/1\n1,1/3\n2,2/3\n3,1/1\n");
  auto k = cli({"solve", "--chain", data("path4.json"), "--what", "k", "--b", "3"});
  CHECK(k.out == "vertex,k\n0,9/1\n1,8/1\n2,5/1\n3,0/1\n");
}

TEST_CASE("run output") {
  const auto snap = temp("snap.json");
  auto r = cli({"run", "--chain", data("path4.json"), "--steps", "4", "--snapshot", snap});
  CHECK(r.code == 0);
  // Each departure turns the rotor first, so the first exit from 1 goes right.
  CHECK(r.out == "t,x,rotor_at_x\n0,0,1\n1,1,2\n2,2,2\n3,3,1\n4,2,1\n");
  CHECK(slurp(snap) == "{\n  \"0\": 1,\n  \"1\": 1,\n  \"2\": 1,\n  \"3\": 1\n}\n");
}

TEST_CASE("z2 end to end") {
  const auto ppm = temp("z2.ppm");
  auto r = cli({"z2", "--a", "0,0", "--b", "1,1", "--c", "0,0", "--hits", "500", "--render", ppm});
  CHECK(r.code == 0);
  CHECK(lines(r.out) == 501);
  const auto img = rotor::parse_ppm(slurp(ppm));
  CHECK(img.width == img.height);
  CHECK(img.width % 2 == 0);
  CHECK(cli({"z2", "--hits", "50", "--max-steps", "10"}).code == 1);
}

TEST_CASE("transfinite") {
  auto r = cli({"transfinite", "--family", "line", "--n", "50"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("n,I_n,R_n,ratio\n", 0) == 0);
  CHECK(cli({"transfinite", "--family", "line", "--n", "2000", "--theorem", "8"}).code == 0);
  CHECK(cli({"transfinite", "--family", "drifted", "--n", "200", "--theorem", "6"}).code == 0);
  CHECK(cli({"transfinite", "--family", "drifted", "--n", "200", "--theorem", "7", "--b", "2"}).code == 0);
  // Two agreeing radii cannot be found below 8.
  auto u = cli({"transfinite", "--family", "z2-east", "--n", "3", "--d0", "4", "--dmax", "4"});
  CHECK(u.code == 3);
  const auto ppm = temp("east.ppm");
  CHECK(cli({"transfinite", "--family", "z2-east", "--n", "20", "--render", ppm, "--box", "6"}).code == 0);
  CHECK(rotor::parse_ppm(slurp(ppm)).width == 12);
  CHECK(cli({"transfinite", "--family", "line", "--render", ppm}).code == 2);
}

TEST_CASE("stack sequences") {
  auto r = cli({"stack", "--probs", "1/2,1/3,1/6", "--periods", "2"});
  CHECK(r.code == 0);
  CHECK(lines(r.out) == 2);
  CHECK(cli({"stack", "--chain", data("mixed.json"), "--a", "a", "--b", "b", "--c", "c"}).code == 0);
}

TEST_CASE("render matches the library") {
  auto r = cli({"render", "--config", "sectors", "--radius", "20"});
  CHECK(r.code == 0);
  CHECK(r.out == rotor::render_ppm(rotor::z2_initial_rotor, rotor::layer_box(20)));
  auto e = cli({"render", "--config", "east", "--radius", "3"});
  const auto img = rotor::parse_ppm(e.out);
  CHECK(img.residues == std::vector<std::uint32_t>(36, 0));
}

TEST_CASE("identical configurations give identical bytes") {
  const std::vector<std::string> run{"run", "--chain", data("mixed.json"), "--steps", "300",
                                     "--order", "shuffled", "--r0", "random", "--seed", "17"};
  CHECK(cli(run).out == cli(run).out);
  const std::vector<std::string> z2{"z2", "--hits", "100", "--render", temp("d.ppm")};
  const auto first = cli(z2);
  const auto img = slurp(temp("d.ppm"));
  const auto second = cli(z2);
  CHECK(first.out == second.out);
  CHECK(img == slurp(temp("d.ppm")));
}
