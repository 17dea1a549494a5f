#include <doctest.h>

#include "support.hpp"

using namespace semflow;
using testing::error_of;

TEST_SUITE("provider") {

TEST_CASE("first matching rule answers") {
  MockProvider mock({{"alpha", "A", 3, 1, 0.5, false}, {"al", "B", 0, 0, 0.0, false}, {"", "default", 0, 0, 0.0, false}});
  auto r = mock.complete({"m", "xx alpha yy"});
  CHECK(r.text == "A");
  CHECK(r.input_tokens == 3);
  CHECK(r.latency_s == 0.5);
  CHECK(mock.complete({"m", "also"}).text == "B");
  CHECK(mock.complete({"n", "zzz"}).text == "default");
  CHECK(mock.call_counts() == std::map<std::string, std::int64_t>{{"m", 2}, {"n", 1}});
  mock.reset_counts();
  CHECK(mock.call_counts().empty());
  CHECK(mock.deterministic_clock());
}

TEST_CASE("a catch-all rule is mandatory") {
  CHECK(error_of([] { MockProvider({{"x", "y", 0, 0, 0.0, false}}); }) == ErrorCode::InvalidMockRules);
  CHECK(error_of([] { MockProvider(std::vector<MockRule>{}); }) == ErrorCode::InvalidMockRules);
  CHECK(error_of([] { MockProvider::from_json(json::object()); }) == ErrorCode::InvalidMockRules);
}

TEST_CASE("rules file format") {
  auto mock = MockProvider::from_json(json::parse(
      R"([{"match":"q","respond":"r","tokens":[10,2],"latency_s":1.5},{"match":"","respond":"d"}])"));
  REQUIRE(mock.rules().size() == 2);
  CHECK(mock.rules()[0].output_tokens == 2);
  CHECK(mock.rules()[0].latency_s == 1.5);
  auto fixture = MockProvider::load(testing::fixtures() / "mock_rules.json");
  CHECK(fixture.rules().back().match.empty());
}

TEST_CASE("unavailable rule simulates an outage") {
  MockProvider mock({{"down", "", 0, 0, 0.0, true}, {"", "ok", 0, 0, 0.0, false}});
  CHECK(error_of([&] { mock.complete({"m", "down"}); }) == ErrorCode::ProviderUnavailable);
  CHECK(mock.complete({"m", "up"}).text == "ok");
}

TEST_CASE("scripted provider replays outputs in order") {
  ScriptedProvider llm({"one", "two", "three"});
  CHECK(llm.complete({"agent", "p1"}).text == "one");
  llm.advance(1);
  CHECK(llm.consumed() == 2);
  CHECK(llm.complete({"agent", "p2"}).text == "three");
  CHECK(llm.prompts() == std::vector<std::string>{"p1", "p2"});
  CHECK(error_of([&] { llm.complete({"agent", "p3"}); }) == ErrorCode::ProviderUnavailable);
  CHECK(load_script(testing::fixtures() / "agent_script.json").size() == 13);
}

TEST_CASE("http provider config") {
  auto cfg = HttpProviderConfig::from_json(
      json::parse(R"({"endpoint":"http://127.0.0.1:9/v1/chat/completions","model_map":{"strong":"big-model"}})"));
  CHECK(cfg.model_map.at("strong") == "big-model");
  CHECK(cfg.api_key_env == "SEMFLOW_API_KEY");
  CHECK(error_of([] { HttpProvider(HttpProviderConfig{"no-scheme", {}, "K", 1.0}); }) == ErrorCode::ParseError);
}

TEST_CASE("http provider failures surface as ProviderUnavailable") {
  HttpProvider provider(HttpProviderConfig{"http://127.0.0.1:9/v1/chat/completions", {}, "SEMFLOW_TEST_NO_KEY", 1.0});
  CHECK(error_of([&] { provider.complete({"m", "hello"}); }) == ErrorCode::ProviderUnavailable);
}

}
