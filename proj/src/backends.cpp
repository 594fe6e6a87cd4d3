#include "idiomct/backends.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

#include "json.hpp"

#ifdef IDIOMCT_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

namespace idiomct::backends {

using ordered_json = nlohmann::ordered_json;

void BackendConfig::validate() const {
    if (temperature < 0.0) throw std::invalid_argument("temperature must be >= 0");
    if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
    if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
    if (model.empty()) throw std::invalid_argument("model id is empty");
}

std::string_view mt_engine_name(MtEngine engine) {
    switch (engine) {
        case MtEngine::Google: return "google";
        case MtEngine::DeepL: return "deepl";
    }
    throw std::invalid_argument("unknown engine");
}

namespace {

// Canonical byte string hashed into the fingerprint. Length-prefixed fields
// so no two distinct requests can collide structurally.
void feed(std::uint64_t& h, std::string_view part) {
    h = fnv1a64(std::to_string(part.size()), h);
    h = fnv1a64(":", h);
    h = fnv1a64(part, h);
}

std::string format_temperature(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", t);
    return buf;
}

}  // namespace

std::string request_fingerprint(std::string_view model,
                                std::span<const prompts::Message> messages,
                                double temperature) {
    std::uint64_t h = fnv1a64("chat");
    feed(h, model);
    feed(h, format_temperature(temperature));
    for (const prompts::Message& m : messages) {
        feed(h, m.role == prompts::Role::User ? "user" : "assistant");
        feed(h, m.content);
    }
    return hex64(h);
}

std::string mt_fingerprint(MtEngine engine, std::string_view text, Language source_language) {
    std::uint64_t h = fnv1a64("mt");
    feed(h, mt_engine_name(engine));
    feed(h, language_name(source_language));
    feed(h, text);
    return hex64(h);
}

// ---------------------------------------------------------------------------
// ReplayStore
// ---------------------------------------------------------------------------

ReplayStore ReplayStore::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BackendError("cannot open replay store: " + path.string());
    struct Row {
        std::size_t ordinal;
        ReplayEntry entry;
    };
    std::map<std::string, std::vector<Row>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw BackendError("malformed replay store line " + std::to_string(line_no) +
                               " in " + path.string());
        }
        Row row;
        row.ordinal = j.at("ordinal").get<std::size_t>();
        row.entry.response = j.at("response").get<std::string>();
        row.entry.usage.prompt_tokens = j.at("prompt_tokens").get<long long>();
        row.entry.usage.completion_tokens = j.at("completion_tokens").get<long long>();
        if (row.entry.usage.prompt_tokens < 0 || row.entry.usage.completion_tokens < 0) {
            throw BackendError("negative token count at line " + std::to_string(line_no));
        }
        rows[j.at("fingerprint").get<std::string>()].push_back(std::move(row));
    }
    ReplayStore store;
    for (auto& [fingerprint, list] : rows) {
        std::sort(list.begin(), list.end(),
                  [](const Row& a, const Row& b) { return a.ordinal < b.ordinal; });
        auto slot = std::make_unique<Slot>();
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (list[i].ordinal != i) {
                throw BackendError("non-contiguous ordinals for fingerprint " + fingerprint);
            }
            slot->entries.push_back(std::move(list[i].entry));
        }
        store.slots_.emplace(fingerprint, std::move(slot));
    }
    return store;
}

void ReplayStore::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw BackendError("cannot write replay store: " + path.string());
    for (const auto& [fingerprint, slot] : slots_) {
        for (std::size_t i = 0; i < slot->entries.size(); ++i) {
            const ReplayEntry& e = slot->entries[i];
            ordered_json j{
                {"fingerprint", fingerprint},
                {"ordinal", i},
                {"response", e.response},
                {"prompt_tokens", e.usage.prompt_tokens},
                {"completion_tokens", e.usage.completion_tokens},
            };
            out << j.dump() << '\n';
        }
    }
}

void ReplayStore::add(std::string fingerprint, ReplayEntry entry) {
    auto it = slots_.find(fingerprint);
    if (it == slots_.end()) {
        it = slots_.emplace(std::move(fingerprint), std::make_unique<Slot>()).first;
    }
    it->second->entries.push_back(std::move(entry));
}

const ReplayEntry& ReplayStore::next(const std::string& fingerprint) {
    auto it = slots_.find(fingerprint);
    if (it == slots_.end()) throw ReplayMissError(fingerprint, 0);
    Slot& slot = *it->second;
    std::size_t ordinal = slot.next.fetch_add(1);
    if (ordinal >= slot.entries.size()) throw ReplayMissError(fingerprint, ordinal);
    return slot.entries[ordinal];
}

void ReplayStore::rewind() {
    for (auto& [fingerprint, slot] : slots_) slot->next.store(0);
}

std::size_t ReplayStore::size() const {
    std::size_t total = 0;
    for (const auto& [fingerprint, slot] : slots_) total += slot->entries.size();
    return total;
}

// ---------------------------------------------------------------------------
// RecordWriter
// ---------------------------------------------------------------------------

struct RecordWriter::Impl {
    std::mutex mutex;
    std::ofstream out;
    std::map<std::string, std::size_t> ordinals;
};

RecordWriter::RecordWriter(const std::filesystem::path& path) : impl_(new Impl) {
    impl_->out.open(path, std::ios::binary | std::ios::trunc);
    if (!impl_->out) throw BackendError("cannot open record store: " + path.string());
}

RecordWriter::~RecordWriter() = default;

void RecordWriter::record(const std::string& fingerprint, const ReplayEntry& entry) {
    std::lock_guard lock(impl_->mutex);
    std::size_t ordinal = impl_->ordinals[fingerprint]++;
    ordered_json j{
        {"fingerprint", fingerprint},
        {"ordinal", ordinal},
        {"response", entry.response},
        {"prompt_tokens", entry.usage.prompt_tokens},
        {"completion_tokens", entry.usage.completion_tokens},
    };
    impl_->out << j.dump() << '\n';
    impl_->out.flush();
}

// ---------------------------------------------------------------------------
// ReplayBackend
// ---------------------------------------------------------------------------

ReplayBackend::ReplayBackend(std::shared_ptr<ReplayStore> store, BackendModels models,
                             CostLedger* ledger)
    : store_(std::move(store)), models_(std::move(models)), ledger_(ledger) {
    if (!store_) throw std::invalid_argument("replay backend requires a store");
}

Completion ReplayBackend::complete(std::span<const prompts::Message> messages,
                                   BackendRole role) {
    if (messages.empty()) throw std::invalid_argument("empty message sequence");
    const std::string& model =
        role == BackendRole::Generator ? models_.generator : models_.judge;
    const ReplayEntry& entry =
        store_->next(request_fingerprint(model, messages, models_.temperature));
    if (ledger_) ledger_->add(model, entry.usage);
    return Completion{entry.response, entry.usage};
}

std::string ReplayBackend::mt_translate(MtEngine engine, const std::string& text,
                                        Language source_language) {
    const ReplayEntry& entry = store_->next(mt_fingerprint(engine, text, source_language));
    if (ledger_) {
        ledger_->add(std::string("engine:") + std::string(mt_engine_name(engine)),
                     entry.usage);
    }
    return entry.response;
}

// ---------------------------------------------------------------------------
// HttpChatBackend
// ---------------------------------------------------------------------------

namespace {

// Bounded in-flight requests across both models.
class Semaphore {
public:
    explicit Semaphore(int count) : count_(count) {}
    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return count_ > 0; });
        --count_;
    }
    void release() {
        {
            std::lock_guard lock(mutex_);
            ++count_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int count_;
};

struct SemaphoreGuard {
    explicit SemaphoreGuard(Semaphore& s) : sem(s) { sem.acquire(); }
    ~SemaphoreGuard() { sem.release(); }
    Semaphore& sem;
};

struct SplitUrl {
    std::string origin;     // scheme://host[:port]
    std::string base_path;  // leading path, no trailing slash
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw std::invalid_argument("base url needs a scheme: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    SplitUrl out;
    if (path_start == std::string::npos) {
        out.origin = url;
    } else {
        out.origin = url.substr(0, path_start);
        out.base_path = url.substr(path_start);
    }
    while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();
    return out;
}

std::string require_env(const std::string& name) {
    const char* value = std::getenv(name.c_str());
    if (value == nullptr || *value == '\0') {
        throw BackendError("credentials missing: environment variable " + name +
                           " is not set");
    }
    return value;
}

int backoff_delay_ms(const BackendConfig& cfg, int attempt) {
    double delay = cfg.backoff_start_ms;
    for (int i = 0; i < attempt; ++i) delay *= cfg.backoff_factor;
    delay = std::min(delay, static_cast<double>(cfg.backoff_cap_ms));
    // Jitter in [0.5, 1.0) of the schedule; only affects live pacing.
    thread_local std::mt19937_64 rng{std::random_device{}()};
    std::uniform_real_distribution<double> dist(0.5, 1.0);
    return static_cast<int>(delay * dist(rng));
}

bool retryable_status(int status) {
    return status == 429 || status >= 500;
}

std::string engine_source_code(Language lang) {
    switch (lang) {
        case Language::Chinese:
        case Language::PlausibleChinese: return "zh";
        case Language::Japanese: return "ja";
        case Language::Korean: return "ko";
    }
    throw std::invalid_argument("unknown language");
}

}  // namespace

struct HttpChatBackend::Impl {
    BackendConfig generator;
    BackendConfig judge;
    EngineConfig engines;
    CostLedger* ledger = nullptr;
    RecordWriter* recorder = nullptr;
    std::unique_ptr<Semaphore> semaphore;

    const BackendConfig& config_for(BackendRole role) const {
        return role == BackendRole::Generator ? generator : judge;
    }

    // Issues one POST with retries. Returns the response body on 200.
    std::string post_json(const BackendConfig& cfg, const std::string& origin,
                          const std::string& path, const httplib::Headers& headers,
                          const std::string& body, int* attempts_out) {
        int attempts = 0;
        std::string last_error;
        for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
            ++attempts;
            httplib::Client client(origin);
            client.set_connection_timeout(0, cfg.timeout_ms * 1000LL);
            client.set_read_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);
            auto result = client.Post(path, headers, body, "application/json");
            if (result && result->status == 200) {
                if (attempts_out) *attempts_out = attempts;
                return result->body;
            }
            if (result && !retryable_status(result->status)) {
                throw TransportError("HTTP " + std::to_string(result->status) + " from " +
                                         origin + path + ": " + result->body,
                                     attempts);
            }
            last_error = result ? "HTTP " + std::to_string(result->status)
                                : "transport: " + httplib::to_string(result.error());
            if (attempt < cfg.max_retries) {
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(backoff_delay_ms(cfg, attempt)));
            }
        }
        throw TransportError("retries exhausted (" + std::to_string(attempts) +
                                 " attempts): " + last_error,
                             attempts);
    }
};

HttpChatBackend::HttpChatBackend(BackendConfig generator, BackendConfig judge,
                                 EngineConfig engines, CostLedger* ledger,
                                 RecordWriter* recorder)
    : impl_(new Impl) {
    generator.validate();
    judge.validate();
    impl_->generator = std::move(generator);
    impl_->judge = std::move(judge);
    impl_->engines = std::move(engines);
    impl_->ledger = ledger;
    impl_->recorder = recorder;
    impl_->semaphore = std::make_unique<Semaphore>(impl_->generator.parallelism);
}

HttpChatBackend::~HttpChatBackend() = default;

const std::string& HttpChatBackend::generator_model() const { return impl_->generator.model; }
const std::string& HttpChatBackend::judge_model() const { return impl_->judge.model; }
double HttpChatBackend::temperature() const { return impl_->generator.temperature; }

Completion HttpChatBackend::complete(std::span<const prompts::Message> messages,
                                     BackendRole role) {
    if (messages.empty()) throw std::invalid_argument("empty message sequence");
    const BackendConfig& cfg = impl_->config_for(role);
    std::string api_key = require_env(cfg.api_key_env);

    ordered_json body_json;
    body_json["model"] = cfg.model;
    body_json["temperature"] = cfg.temperature;
    auto& msgs = body_json["messages"] = ordered_json::array();
    for (const prompts::Message& m : messages) {
        msgs.push_back(ordered_json{
            {"role", m.role == prompts::Role::User ? "user" : "assistant"},
            {"content", m.content},
        });
    }

    SplitUrl url = split_url(cfg.base_url);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key}};

    SemaphoreGuard guard(*impl_->semaphore);
    int attempts = 0;
    std::string body = impl_->post_json(cfg, url.origin, url.base_path + "/chat/completions",
                                        headers, body_json.dump(), &attempts);
    last_attempts_.store(attempts);

    ordered_json response = ordered_json::parse(body, nullptr, false);
    if (response.is_discarded()) throw BackendError("malformed completion response");
    Completion completion;
    try {
        completion.text =
            response.at("choices").at(0).at("message").at("content").get<std::string>();
        if (response.contains("usage")) {
            completion.usage.prompt_tokens =
                response["usage"].value("prompt_tokens", 0LL);
            completion.usage.completion_tokens =
                response["usage"].value("completion_tokens", 0LL);
        }
    } catch (const std::exception& e) {
        throw BackendError(std::string("unexpected completion shape: ") + e.what());
    }

    if (impl_->ledger) impl_->ledger->add(cfg.model, completion.usage);
    if (impl_->recorder) {
        impl_->recorder->record(request_fingerprint(cfg.model, messages, cfg.temperature),
                                ReplayEntry{completion.text, completion.usage});
    }
    return completion;
}

std::string HttpChatBackend::mt_translate(MtEngine engine, const std::string& text,
                                          Language source_language) {
    const EngineConfig& engines = impl_->engines;
    std::string translated;

    SemaphoreGuard guard(*impl_->semaphore);
    if (engine == MtEngine::DeepL) {
        std::string key = require_env(engines.deepl_api_key_env);
        SplitUrl url = split_url(engines.deepl_base_url);
        ordered_json req{
            {"text", ordered_json::array({text})},
            {"source_lang", engine_source_code(source_language)},
            {"target_lang", "en"},
        };
        httplib::Headers headers{{"Authorization", "DeepL-Auth-Key " + key}};
        std::string body = impl_->post_json(impl_->generator, url.origin,
                                            url.base_path + "/v2/translate", headers,
                                            req.dump(), nullptr);
        ordered_json response = ordered_json::parse(body);
        translated = response.at("translations").at(0).at("text").get<std::string>();
    } else {
        std::string key = require_env(engines.google_api_key_env);
        SplitUrl url = split_url(engines.google_base_url);
        ordered_json req{
            {"q", text},
            {"source", engine_source_code(source_language)},
            {"target", "en"},
            {"format", "text"},
        };
        std::string body = impl_->post_json(
            impl_->generator, url.origin,
            url.base_path + "/language/translate/v2?key=" + key, {}, req.dump(), nullptr);
        ordered_json response = ordered_json::parse(body);
        translated = response.at("data")
                         .at("translations")
                         .at(0)
                         .at("translatedText")
                         .get<std::string>();
    }

    if (impl_->ledger) {
        impl_->ledger->add(std::string("engine:") + std::string(mt_engine_name(engine)),
                           TokenCounts{});
    }
    if (impl_->recorder) {
        impl_->recorder->record(mt_fingerprint(engine, text, source_language),
                                ReplayEntry{translated, TokenCounts{}});
    }
    return translated;
}

}  // namespace idiomct::backends
