#include <set>

#include "chartkit/rng.hpp"
#include "chartkit/text.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace chartkit;

TEST_CASE("trim and blank") {
  CHECK(text::trim("  a b \n") == "a b");
  CHECK(text::trim(" \t\r\n").empty());
  CHECK(text::is_blank("\f\v "));
  CHECK_FALSE(text::is_blank(" x "));
  CHECK(text::to_lower_ascii("MiXeD \xC3\x89") == "mixed \xC3\x89");
}

TEST_CASE("utf8 decoding") {
  const std::vector<char32_t> cps = {U'a', 0xE9, 0x4E2D, 0x1F600};
  CHECK(text::decode_utf8(oracle::encode_utf8(cps)) == cps);
  const auto bad = text::decode_utf8("\xFF" "a\xC3");
  REQUIRE(bad.size() == 3);
  CHECK(bad[1] == U'a');
  CHECK(bad[0] != bad[2]);
  CHECK(bad[0] > 0x10FFFF);
}

TEST_CASE("token and line helpers") {
  CHECK(text::count_whitespace_tokens("") == 0);
  CHECK(text::count_whitespace_tokens("  one two\tthree\n") == 3);
  CHECK(text::split_lines("a\nb\r\nc") == std::vector<std::string>{"a", "b", "c"});
  CHECK(text::count_occurrences("aaaa", "aa") == 2);
  CHECK(text::count_occurrences("<t><t>", "<t>") == 2);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(text::fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(text::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(text::hex64(0xaf63dc4c8601ec8cull) == "af63dc4c8601ec8c");
  CHECK(text::hex64(1) == "0000000000000001");
}

TEST_CASE("rng engine matches the standard's reference output") {
  Rng rng(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next();
  CHECK(v == 9981545732273789042ull);
}

TEST_CASE("rng draws") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const auto k = a.below(7);
    CHECK(k == b.below(7));
    CHECK(k < 7);
  }
  std::set<std::size_t> seen;
  for (int i = 0; i < 200; ++i) seen.insert(a.below(5));
  CHECK(seen.size() == 5);

  double sum = 0.0;
  double sq = 0.0;
  Rng n(3);
  for (int i = 0; i < 20000; ++i) {
    const double x = n.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / 20000) < 0.05);
  CHECK(std::abs(sq / 20000 - 1.0) < 0.05);
}

TEST_CASE("rng streams are keyed and independent") {
  auto s1 = Rng::stream(1, 2, 3);
  auto s2 = Rng::stream(1, 2, 3);
  auto s3 = Rng::stream(1, 2, 4);
  auto s4 = Rng::stream(1, 3, 3);
  const auto x = s1.next();
  CHECK(x == s2.next());
  CHECK(x != s3.next());
  CHECK(x != s4.next());
}

TEST_CASE("file round trip") {
  const auto path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/chartkit_text_rt.txt";
  text::write_file(path, "line\none\n");
  CHECK(text::read_file(path) == "line\none\n");
  std::remove(path.c_str());
  CHECK_THROWS(text::read_file(path));
}
