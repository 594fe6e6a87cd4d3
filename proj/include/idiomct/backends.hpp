#pragma once
// Uniform completion interface over a live OpenAI-compatible chat API, the
// Google/DeepL translation engines, and a deterministic record/replay store.
// Backends are the only effectful dependency in the pipeline; everything
// above them is pure over the returned texts.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idiomct/corpus.hpp"
#include "idiomct/prompts.hpp"

namespace idiomct::backends {

struct BackendConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model;
    double temperature = 1.0;  // temperature of 1.0 throughout
    int timeout_ms = 60000;
    int max_retries = 5;
    int backoff_start_ms = 1000;
    double backoff_factor = 2.0;
    int backoff_cap_ms = 60000;
    int parallelism = 4;  // max in-flight requests
    std::string api_key_env = "OPENAI_API_KEY";

    void validate() const;  // throws std::invalid_argument
};

struct EngineConfig {
    std::string google_base_url = "https://translation.googleapis.com";
    std::string deepl_base_url = "https://api-free.deepl.com";
    std::string google_api_key_env = "GOOGLE_API_KEY";
    std::string deepl_api_key_env = "DEEPL_API_KEY";
};

enum class BackendRole : std::uint8_t { Generator, Judge };
enum class BackendMode : std::uint8_t { Live, Replay };
enum class MtEngine : std::uint8_t { Google, DeepL };

std::string_view mt_engine_name(MtEngine engine);

struct Completion {
    std::string text;
    TokenCounts usage;
};

class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TransportError : public BackendError {
public:
    TransportError(const std::string& message, int attempts)
        : BackendError(message), attempts_(attempts) {}
    int attempts() const { return attempts_; }

private:
    int attempts_;
};

class ReplayMissError : public BackendError {
public:
    ReplayMissError(std::string fingerprint, std::size_t ordinal)
        : BackendError("replay miss for fingerprint " + fingerprint +
                       " at ordinal " + std::to_string(ordinal)),
          fingerprint_(std::move(fingerprint)),
          ordinal_(ordinal) {}
    const std::string& fingerprint() const { return fingerprint_; }
    std::size_t ordinal() const { return ordinal_; }

private:
    std::string fingerprint_;
    std::size_t ordinal_;
};

// Fingerprint of one chat request: model id + full message sequence +
// temperature. Repeated identical requests share a fingerprint and are told
// apart by the store's per-fingerprint ordinal.
std::string request_fingerprint(std::string_view model,
                                std::span<const prompts::Message> messages,
                                double temperature);
std::string mt_fingerprint(MtEngine engine, std::string_view text, Language source_language);

// ---------------------------------------------------------------------------
// Replay store
// ---------------------------------------------------------------------------

struct ReplayEntry {
    std::string response;
    TokenCounts usage;
};

// Recorded responses keyed by fingerprint; repeated identical requests are a
// sequence consumed in recorded order. Lookups are total in replay mode — a
// miss raises, never falls through to a live call. Concurrent next() calls
// are safe once loading is done; the ordinal advances atomically.
class ReplayStore {
public:
    ReplayStore() = default;
    ReplayStore(ReplayStore&&) = default;
    ReplayStore& operator=(ReplayStore&&) = default;

    static ReplayStore load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    // Build-time only; not safe against concurrent next().
    void add(std::string fingerprint, ReplayEntry entry);

    const ReplayEntry& next(const std::string& fingerprint);
    void rewind();  // resets every ordinal to 0

    std::size_t size() const;  // total recorded entries

private:
    struct Slot {
        std::vector<ReplayEntry> entries;
        std::atomic<std::size_t> next{0};
    };
    std::map<std::string, std::unique_ptr<Slot>> slots_;
};

// Appends {fingerprint, ordinal, response, tokens} lines as calls complete.
class RecordWriter {
public:
    explicit RecordWriter(const std::filesystem::path& path);
    ~RecordWriter();
    void record(const std::string& fingerprint, const ReplayEntry& entry);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Backend interface
// ---------------------------------------------------------------------------

class Backend {
public:
    virtual ~Backend() = default;

    // Sends the message history to the model selected by role (Generator for
    // GPT-4-class generation tasks, Judge for scoring) and returns the
    // assistant text with token usage.
    virtual Completion complete(std::span<const prompts::Message> messages,
                                BackendRole role) = 0;

    // Commercial-engine translation; same record/replay contract as complete.
    virtual std::string mt_translate(MtEngine engine, const std::string& text,
                                     Language source_language) = 0;

    virtual BackendMode mode() const = 0;
    virtual const std::string& generator_model() const = 0;
    virtual const std::string& judge_model() const = 0;
    virtual double temperature() const = 0;
};

struct BackendModels {
    std::string generator = "gpt-4-0125-preview";
    std::string judge = "gpt-3.5-turbo";
    double temperature = 1.0;
};

// Deterministic offline backend: every completion is a store lookup.
class ReplayBackend : public Backend {
public:
    ReplayBackend(std::shared_ptr<ReplayStore> store, BackendModels models,
                  CostLedger* ledger = nullptr);

    Completion complete(std::span<const prompts::Message> messages,
                        BackendRole role) override;
    std::string mt_translate(MtEngine engine, const std::string& text,
                             Language source_language) override;
    BackendMode mode() const override { return BackendMode::Replay; }
    const std::string& generator_model() const override { return models_.generator; }
    const std::string& judge_model() const override { return models_.judge; }
    double temperature() const override { return models_.temperature; }

private:
    std::shared_ptr<ReplayStore> store_;
    BackendModels models_;
    CostLedger* ledger_;
};

// Live HTTP backend with bounded in-flight requests, exponential backoff on
// rate limits and transient failures, and optional recording of every
// response for later replay. API keys come from environment variables only.
class HttpChatBackend : public Backend {
public:
    HttpChatBackend(BackendConfig generator, BackendConfig judge, EngineConfig engines,
                    CostLedger* ledger = nullptr, RecordWriter* recorder = nullptr);
    ~HttpChatBackend() override;

    Completion complete(std::span<const prompts::Message> messages,
                        BackendRole role) override;
    std::string mt_translate(MtEngine engine, const std::string& text,
                             Language source_language) override;
    BackendMode mode() const override { return BackendMode::Live; }
    const std::string& generator_model() const override;
    const std::string& judge_model() const override;
    double temperature() const override;

    // Attempt count of the most recent completed call (for logs and tests).
    int last_attempts() const { return last_attempts_.load(); }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::atomic<int> last_attempts_{0};
};

}  // namespace idiomct::backends
