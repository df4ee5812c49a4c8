#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "helpers.hpp"
#include "process.hpp"
#include "sde/commands.hpp"
#include "sde/error.hpp"
#include "sde/sampler.hpp"

using nlohmann::json;

namespace {

// Local chat-completions stand-in. `status_for(n)` picks the status of the
// n-th request (0-based); 200 replies carry "```python\nprint(n)\n```".
class MockEndpoint {
 public:
  explicit MockEndpoint(std::function<int(int)> status_for) : status_for_(std::move(status_for)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = hits_++;
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = json::parse(req.body);
      res.status = status_for_(n);
      if (res.status == 200) {
        const json body{{"choices", json::array({{{"message", {{"role", "assistant"},
                                                               {"content", "Here:\n```python\nprint(" +
                                                                               std::to_string(n) + ")\n```\n"}}}}})}};
        res.set_content(body.dump(), "application/json");
      } else {
        res.set_content("{}", "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockEndpoint() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
  int hits() const { return hits_; }
  const std::string& last_auth() const { return last_auth_; }
  const json& last_body() const { return last_body_; }

 private:
  httplib::Server server_;
  std::function<int(int)> status_for_;
  std::atomic<int> hits_{0};
  std::string last_auth_;
  json last_body_;
  int port_ = 0;
  std::thread thread_;
};

sde::SamplerConfig config_for(const MockEndpoint& m, int k) {
  sde::SamplerConfig c;
  c.endpoint_url = m.url();
  c.k_samples = k;
  c.api_key_env_var = "SDE_TEST_API_KEY";
  c.backoff_ms = 1;
  c.request_timeout_ms = 5000;
  return c;
}

sde::Task task() {
  auto t = testing::function_task("t1", "solve", {});
  t.description = "add numbers";
  return t;
}

}  // namespace

TEST_CASE("strip_code_fences") {
  CHECK(sde::strip_code_fences("```python\nx = 1\n```") == "x = 1\n");
  CHECK(sde::strip_code_fences("text\n```\nx = 1\n```\nmore\n```\ny\n```") == "x = 1\n");
  CHECK(sde::strip_code_fences("x = 1  \n\n") == "x = 1\n");
  CHECK(sde::strip_code_fences("```cpp\nint main(){}\n") == "int main(){}\n");
  CHECK(sde::strip_code_fences("") == "");
  CHECK(sde::strip_code_fences("I cannot help with that.") == "I cannot help with that.\n");
}

TEST_CASE("render_prompt") {
  auto t = task();
  CHECK(sde::render_prompt("Write {entry_name} in {language}: {description}", t) ==
        "Write solve in python: add numbers");
  CHECK(sde::render_prompt("{description}{description}", t) == "add numbersadd numbers");
}

TEST_CASE("sampling ranks, fences and request shape") {
  MockEndpoint mock([](int) { return 200; });
  ::setenv("SDE_TEST_API_KEY", "secret", 1);
  auto cfg = config_for(mock, 4);
  const auto r = sde::sample_candidates(task(), cfg);
  REQUIRE(r.candidates.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(r.candidates[static_cast<std::size_t>(i)].rank == i + 1);
    CHECK(r.candidates[static_cast<std::size_t>(i)].task_id == "t1");
    CHECK(r.candidates[static_cast<std::size_t>(i)].source == "print(" + std::to_string(i) + ")\n");
  }
  CHECK(mock.hits() == 4);
  CHECK(mock.last_auth() == "Bearer secret");
  CHECK(mock.last_body()["model"] == "gpt-4o-mini");
  CHECK(mock.last_body()["temperature"] == 0.6);
  CHECK(mock.last_body()["messages"].back()["content"] == "add numbers");

  // the archive replays to the same candidates
  CHECK(sde::candidates_from_archive("t1", r.raw_responses) == r.candidates);
}

TEST_CASE("retries and failures") {
  ::setenv("SDE_TEST_API_KEY", "secret", 1);
  {
    MockEndpoint mock([](int) { return 500; });
    auto cfg = config_for(mock, 1);
    cfg.retry_limit = 2;
    try {
      sde::sample_candidates(task(), cfg);
      FAIL("expected HttpError");
    } catch (const sde::Error& e) {
      CHECK(e.kind() == sde::ErrorKind::HttpError);
    }
    CHECK(mock.hits() == 3);
  }
  {
    MockEndpoint mock([](int n) { return n < 2 ? 429 : 200; });
    auto cfg = config_for(mock, 2);
    cfg.retry_limit = 2;
    const auto r = sde::sample_candidates(task(), cfg);
    CHECK(r.candidates.size() == 2);
    CHECK(mock.hits() == 4);
  }
  {
    MockEndpoint mock([](int) { return 400; });
    auto cfg = config_for(mock, 3);
    CHECK_THROWS_AS(sde::sample_candidates(task(), cfg), sde::Error);
    CHECK(mock.hits() == 1);
  }
}

TEST_CASE("missing api key fails before any request") {
  MockEndpoint mock([](int) { return 200; });
  ::unsetenv("SDE_TEST_API_KEY");
  try {
    sde::sample_candidates(task(), config_for(mock, 2));
    FAIL("expected MissingApiKey");
  } catch (const sde::Error& e) {
    CHECK(e.kind() == sde::ErrorKind::MissingApiKey);
  }
  CHECK(mock.hits() == 0);
}

TEST_CASE("sampler config validation") {
  sde::SamplerConfig c;
  CHECK_NOTHROW(c.validate());
  c.k_samples = 0;
  CHECK_THROWS_AS(c.validate(), sde::Error);
  c.k_samples = 1;
  c.temperature = -0.1;
  CHECK_THROWS_AS(c.validate(), sde::Error);
}

TEST_CASE("cmd_sample writes a loadable corpus and an archive") {
  MockEndpoint mock([](int) { return 200; });
  ::setenv("SDE_TEST_API_KEY", "secret", 1);
  sde::detail::TempDir tmp;
  sde::Corpus in;
  auto t = task();
  t.seed_inputs = {sde::InputValue::args(json::array({1}))};
  in.tasks = {t};
  std::filesystem::create_directories(tmp.path() / "in");
  sde::write_corpus(in, tmp.path() / "in");

  sde::SampleOptions o;
  o.tasks_file = tmp.path() / "in" / "tasks.jsonl";
  o.out_dir = tmp.path() / "out";
  o.sampler = config_for(mock, 3);
  std::ostringstream log;
  REQUIRE(sde::cmd_sample(o, log) == sde::kExitOk);
  const auto corpus = sde::load_corpus(o.out_dir);
  REQUIRE(corpus.candidates.size() == 3);
  CHECK(corpus.candidates[2].rank == 3);
  const auto archived = json::parse(sde::read_text_file(o.out_dir / "archive" / "t1.json"));
  CHECK(archived["responses"].size() == 3);

  ::unsetenv("SDE_TEST_API_KEY");
  CHECK(sde::cmd_sample(o, log) == sde::kExitFatal);
}
