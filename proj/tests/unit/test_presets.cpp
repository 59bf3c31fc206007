#include <catch_amalgamated.hpp>

#include "iiss/errors.hpp"
#include "iiss/presets.hpp"

using namespace iiss;

TEST_CASE("FNV-1a reference vectors", "[presets]") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("preset registry", "[presets]") {
  CHECK(preset_names() == std::vector<std::string>{"example-5.1", "example-5.2"});
  CHECK_THROWS_AS(get_preset("nope"), ConfigError);
  const auto& a = get_preset("example-5.1");
  const auto& b = get_preset("example-5.2");
  CHECK(a.hash.size() == 16);
  CHECK(a.hash == hex64(fnv1a64(a.canonical)));
  CHECK(a.hash != b.hash);
  CHECK(a.theta == 1.25);
  CHECK(b.theta == 0.8);
  CHECK(a.candidate.regime == Regime::Decay);
  CHECK(b.candidate.regime == Regime::Growth);
  CHECK_NOTHROW(a.system.validate());
  CHECK_NOTHROW(b.system.validate());
}
