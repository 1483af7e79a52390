#include <doctest.h>

#include <sstream>

#include "votersim/error.hpp"
#include "votersim/io.hpp"

using namespace votersim;

TEST_CASE("kernel specs") {
  CHECK(kernel_from_spec("nn", 3).size() == 6);
  CHECK(kernel_from_spec("box:2", 2).size() == 24);
  CHECK_THROWS_AS(kernel_from_spec("box:x", 2), Error);
}

TEST_CASE("kernel files") {
  Kernel b = parse_kernel_file("dimension = 2\nbuilder = \"box:1\"\n");
  CHECK(b.size() == 8);
  Kernel a = parse_kernel_file(R"(
dimension = 1
[[atom]]
offset = [1]
weight = "1/3"
[[atom]]
offset = [-1]
weight = "1/3"
[[atom]]
offset = [2]
weight = "1/6"
[[atom]]
offset = [-2]
weight = "1/6"
)");
  CHECK(a.size() == 4);
  CHECK(validate(a) == Rational(2));
  CHECK_THROWS_AS(parse_kernel_file("builder = \"nn\"\n"), Error);
  CHECK_THROWS_AS(parse_kernel_file("dimension = 2\n[[atom]]\noffset = [1]\nweight = \"1\"\n"), Error);
}

TEST_CASE("snapshot csv") {
  Torus t(2, 4);
  Configuration c(t);
  c.set(0, true);
  std::vector<Snapshot> snaps{{0.5, c}};
  std::ostringstream out;
  write_snapshots_csv(out, snaps, 2);
  std::string s = out.str();
  CHECK(s.rfind("t,block_x1,block_x2,density\n", 0) == 0);
  CHECK(s.find("0.5,0,0,0.25\n") != std::string::npos);
  CHECK(std::count(s.begin(), s.end(), '\n') == 5);
}

TEST_CASE("binary snapshots round-trip") {
  Torus t(3, 6);
  Configuration c = Configuration::bernoulli(t, 0.4, 9);
  std::stringstream buf;
  write_snapshot_binary(buf, Snapshot{1.25, c});
  CHECK(buf.str().size() == 32 + c.words().size() * 8);
  CHECK(buf.str().substr(0, 4) == "VSNP");
  Snapshot back = read_snapshot_binary(buf);
  CHECK(back.t == 1.25);
  CHECK(back.config == c);

  std::stringstream bad("XXXX0000000000000000000000000000");
  CHECK_THROWS_AS(read_snapshot_binary(bad), Error);
}
