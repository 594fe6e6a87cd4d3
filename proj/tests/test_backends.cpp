#include "doctest.h"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <thread>

#include "idiomct/backends.hpp"

#ifdef IDIOMCT_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "json.hpp"

using namespace idiomct;
using namespace idiomct::backends;
namespace fs = std::filesystem;

namespace {

std::vector<prompts::Message> user_message(std::string content) {
    return {prompts::Message{prompts::Role::User, std::move(content)}};
}

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "idiomct_backends_test";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("fingerprints separate models, content, and temperature") {
    auto m1 = user_message("hello");
    auto m2 = user_message("hello!");
    CHECK(request_fingerprint("a", m1, 1.0) == request_fingerprint("a", m1, 1.0));
    CHECK(request_fingerprint("a", m1, 1.0) != request_fingerprint("b", m1, 1.0));
    CHECK(request_fingerprint("a", m1, 1.0) != request_fingerprint("a", m2, 1.0));
    CHECK(request_fingerprint("a", m1, 1.0) != request_fingerprint("a", m1, 0.7));

    // Role matters: [user, assistant] vs a single concatenated user message.
    std::vector<prompts::Message> two{{prompts::Role::User, "x"},
                                      {prompts::Role::Assistant, "y"}};
    std::vector<prompts::Message> one{{prompts::Role::User, "xy"}};
    CHECK(request_fingerprint("a", two, 1.0) != request_fingerprint("a", one, 1.0));

    CHECK(mt_fingerprint(MtEngine::Google, "t", Language::Chinese) !=
          mt_fingerprint(MtEngine::DeepL, "t", Language::Chinese));
    CHECK(mt_fingerprint(MtEngine::Google, "t", Language::Chinese) !=
          mt_fingerprint(MtEngine::Google, "t", Language::Japanese));
}

TEST_CASE("replay returns the stored response") {
    auto store = std::make_shared<ReplayStore>();
    BackendModels models;
    auto messages = user_message("prompt P");
    store->add(request_fingerprint(models.judge, messages, models.temperature),
               ReplayEntry{"4", {10, 1}});

    CostLedger ledger;
    ReplayBackend backend(store, models, &ledger);
    auto completion = backend.complete(messages, BackendRole::Judge);
    CHECK(completion.text == "4");
    CHECK(completion.usage.prompt_tokens == 10);
    CHECK(ledger.total_for(models.judge).prompt_tokens == 10);
}

TEST_CASE("five identical judge calls replay in recorded order") {
    auto store = std::make_shared<ReplayStore>();
    BackendModels models;
    auto messages = user_message("rate this");
    std::string fp = request_fingerprint(models.judge, messages, models.temperature);
    for (const char* response : {"4", "5", "4", "4", "4"}) {
        store->add(fp, ReplayEntry{response, {}});
    }
    ReplayBackend backend(store, models);
    std::vector<std::string> got;
    for (int i = 0; i < 5; ++i) got.push_back(backend.complete(messages, BackendRole::Judge).text);
    CHECK(got == std::vector<std::string>{"4", "5", "4", "4", "4"});

    // A sixth identical call has nothing recorded.
    CHECK_THROWS_AS(backend.complete(messages, BackendRole::Judge), ReplayMissError);
}

TEST_CASE("replay miss reports the fingerprint") {
    auto store = std::make_shared<ReplayStore>();
    ReplayBackend backend(store, BackendModels{});
    auto messages = user_message("never recorded");
    try {
        backend.complete(messages, BackendRole::Generator);
        FAIL("expected ReplayMissError");
    } catch (const ReplayMissError& e) {
        CHECK_FALSE(e.fingerprint().empty());
        CHECK(std::string(e.what()).find(e.fingerprint()) != std::string::npos);
    }
}

TEST_CASE("replay store save and load round trip") {
    auto dir = temp_dir();
    ReplayStore store;
    store.add("fp1", ReplayEntry{"first", {1, 2}});
    store.add("fp1", ReplayEntry{"second", {3, 4}});
    store.add("fp2", ReplayEntry{"other", {5, 6}});
    store.save(dir / "store.jsonl");

    auto loaded = ReplayStore::load(dir / "store.jsonl");
    CHECK(loaded.size() == 3);
    CHECK(loaded.next("fp1").response == "first");
    CHECK(loaded.next("fp1").response == "second");
    CHECK(loaded.next("fp2").usage.completion_tokens == 6);
    loaded.rewind();
    CHECK(loaded.next("fp1").response == "first");
}

TEST_CASE("concurrent replay readers consume each entry exactly once") {
    ReplayStore store;
    constexpr int kEntries = 96;
    for (int i = 0; i < kEntries; ++i) {
        store.add("shared", ReplayEntry{std::to_string(i), {}});
    }
    std::vector<std::thread> threads;
    std::mutex mutex;
    std::multiset<std::string> seen;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&] {
            for (int i = 0; i < kEntries / 8; ++i) {
                const auto& entry = store.next("shared");
                std::lock_guard lock(mutex);
                seen.insert(entry.response);
            }
        });
    }
    for (auto& t : threads) t.join();
    CHECK(seen.size() == kEntries);
    for (int i = 0; i < kEntries; ++i) {
        CHECK(seen.count(std::to_string(i)) == 1);
    }
}

TEST_CASE("record writer then replay round trip") {
    auto dir = temp_dir();
    auto path = dir / "recorded.jsonl";
    {
        RecordWriter writer(path);
        writer.record("fpA", ReplayEntry{"r0", {7, 8}});
        writer.record("fpA", ReplayEntry{"r1", {9, 10}});
        writer.record("fpB", ReplayEntry{"rB", {0, 0}});
    }
    auto store = ReplayStore::load(path);
    CHECK(store.size() == 3);
    CHECK(store.next("fpA").response == "r0");
    CHECK(store.next("fpA").response == "r1");
    CHECK(store.next("fpB").response == "rB");
}

TEST_CASE("live backend retries transient failures with backoff") {
    std::atomic<int> calls{0};
    httplib::Server server;
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        int n = ++calls;
        if (n <= 2) {
            res.status = 429;
            res.set_content("slow down", "text/plain");
            return;
        }
        nlohmann::json body{
            {"choices", {{{"message", {{"role", "assistant"}, {"content", "ok"}}}}}},
            {"usage", {{"prompt_tokens", 3}, {"completion_tokens", 1}}},
        };
        res.set_content(body.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("IDIOMCT_TEST_KEY", "test-key", 1);
    BackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.model = "test-model";
    cfg.max_retries = 5;
    cfg.backoff_start_ms = 1;
    cfg.backoff_cap_ms = 4;
    cfg.api_key_env = "IDIOMCT_TEST_KEY";

    CostLedger ledger;
    HttpChatBackend backend(cfg, cfg, EngineConfig{}, &ledger);
    auto completion = backend.complete(user_message("hi"), BackendRole::Generator);
    CHECK(completion.text == "ok");
    CHECK(backend.last_attempts() == 3);
    CHECK(calls.load() == 3);
    CHECK(ledger.total_for("test-model").prompt_tokens == 3);

    server.stop();
    runner.join();
}

TEST_CASE("live backend surfaces non-retryable errors at once") {
    std::atomic<int> calls{0};
    httplib::Server server;
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 400;
        res.set_content("bad request", "text/plain");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("IDIOMCT_TEST_KEY", "test-key", 1);
    BackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.model = "test-model";
    cfg.max_retries = 5;
    cfg.backoff_start_ms = 1;
    cfg.api_key_env = "IDIOMCT_TEST_KEY";

    HttpChatBackend backend(cfg, cfg, EngineConfig{});
    try {
        backend.complete(user_message("hi"), BackendRole::Generator);
        FAIL("expected TransportError");
    } catch (const TransportError& e) {
        CHECK(e.attempts() == 1);
    }
    CHECK(calls.load() == 1);

    server.stop();
    runner.join();
}

TEST_CASE("record and replay agree through the live backend") {
    auto dir = temp_dir();
    auto store_path = dir / "live_recorded.jsonl";

    httplib::Server server;
    std::atomic<int> calls{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                            httplib::Response& res) {
        auto body = nlohmann::json::parse(req.body);
        std::string content = body["messages"].back()["content"].get<std::string>();
        nlohmann::json reply{
            {"choices",
             {{{"message",
                {{"role", "assistant"},
                 {"content", "echo " + std::to_string(++calls) + ": " + content}}}}}},
            {"usage", {{"prompt_tokens", 2}, {"completion_tokens", 2}}},
        };
        res.set_content(reply.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("IDIOMCT_TEST_KEY", "test-key", 1);
    BackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.model = "gpt-4-0125-preview";
    cfg.backoff_start_ms = 1;
    cfg.api_key_env = "IDIOMCT_TEST_KEY";
    BackendConfig judge = cfg;
    judge.model = "gpt-3.5-turbo";

    std::vector<std::string> live_texts;
    {
        RecordWriter recorder(store_path);
        HttpChatBackend live(cfg, judge, EngineConfig{}, nullptr, &recorder);
        live_texts.push_back(live.complete(user_message("q1"), BackendRole::Generator).text);
        // Identical request twice: ordinals must keep both.
        live_texts.push_back(live.complete(user_message("q2"), BackendRole::Judge).text);
        live_texts.push_back(live.complete(user_message("q2"), BackendRole::Judge).text);
    }
    server.stop();
    runner.join();

    auto store = std::make_shared<ReplayStore>(ReplayStore::load(store_path));
    BackendModels models{cfg.model, judge.model, cfg.temperature};
    ReplayBackend replay(store, models);
    CHECK(replay.complete(user_message("q1"), BackendRole::Generator).text == live_texts[0]);
    CHECK(replay.complete(user_message("q2"), BackendRole::Judge).text == live_texts[1]);
    CHECK(replay.complete(user_message("q2"), BackendRole::Judge).text == live_texts[2]);
}

TEST_CASE("engine translations replay from stored fixtures") {
    const std::string sentence = "他们通过威逼利诱，想要我放弃诉讼。";
    auto store = std::make_shared<ReplayStore>();
    store->add(mt_fingerprint(MtEngine::DeepL, sentence, Language::Chinese),
               ReplayEntry{"They wanted me to drop the lawsuit through bullying.", {}});
    store->add(mt_fingerprint(MtEngine::Google, sentence, Language::Chinese),
               ReplayEntry{
                   "They used threats and inducements to try to get me to drop the lawsuit.",
                   {}});
    CostLedger ledger;
    ReplayBackend backend(store, BackendModels{}, &ledger);
    CHECK(backend.mt_translate(MtEngine::DeepL, sentence, Language::Chinese) ==
          "They wanted me to drop the lawsuit through bullying.");
    CHECK(backend.mt_translate(MtEngine::Google, sentence, Language::Chinese) ==
          "They used threats and inducements to try to get me to drop the lawsuit.");
    CHECK(ledger.entries().size() == 2);
    CHECK_THROWS_AS(backend.mt_translate(MtEngine::DeepL, "unseen", Language::Chinese),
                    ReplayMissError);
}

TEST_CASE("unconfigured engine in live mode is a credentials error") {
    unsetenv("IDIOMCT_TEST_UNSET_ENGINE_KEY");
    BackendConfig cfg;
    cfg.model = "m";
    EngineConfig engines;
    engines.deepl_api_key_env = "IDIOMCT_TEST_UNSET_ENGINE_KEY";
    HttpChatBackend backend(cfg, cfg, engines);
    try {
        backend.mt_translate(MtEngine::DeepL, "text", Language::Chinese);
        FAIL("expected credentials error");
    } catch (const BackendError& e) {
        CHECK(std::string(e.what()).find("credentials") != std::string::npos);
        CHECK(std::string(e.what()).find("IDIOMCT_TEST_UNSET_ENGINE_KEY") != std::string::npos);
    }
}

TEST_CASE("config validation") {
    BackendConfig cfg;
    cfg.model = "m";
    CHECK_NOTHROW(cfg.validate());
    cfg.temperature = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.temperature = 1.0;
    cfg.parallelism = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.parallelism = 1;
    cfg.max_retries = -1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
