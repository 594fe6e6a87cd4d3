// Command-line driver for the idiom translation dataset pipeline. Every
// subcommand maps to one library stage; stages read and write JSONL files in
// the output directory, update the run manifest, and are resumable: records
// already present are kept and only missing units are executed.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "idiomct/analysis.hpp"
#include "idiomct/backends.hpp"
#include "idiomct/corpus.hpp"
#include "idiomct/evaluation.hpp"
#include "idiomct/pipeline.hpp"
#include "idiomct/prompts.hpp"
#include "idiomct/textparse.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace idiomct;

namespace {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct AppConfig {
    backends::BackendConfig generator;
    backends::BackendConfig judge;
    backends::EngineConfig engines;

    fs::path out_dir = "out";
    fs::path idioms_path;
    fs::path templates_dir;  // empty -> embedded templates
    fs::path replay_store;
    fs::path record_store;
    fs::path corpus_file;
    fs::path syllables_path;
    fs::path fewshot_pool_path;

    int sentences_per_idiom = kSentencesPerIdiom;
    std::vector<Strategy> strategies{all_strategies().begin(), all_strategies().end()};
    std::vector<Language> languages{kAllLanguages.begin(), kAllLanguages.end()};
    std::vector<Genre> genres{kAllGenres.begin(), kAllGenres.end()};
    int paragraph_idioms = 20;
    int mine_per_syllable = 200;
    int mine_seeds = 5;
    bool include_containment_failures = false;
    std::vector<Strategy> extension_strategies;
    int extension_top_k = 500;

    std::uint64_t rng_seed = 0;
    bool dry_run = false;
};

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto trimmed = textparse::trim(item);
        if (!trimmed.empty()) out.emplace_back(trimmed);
    }
    return out;
}

// Accepts variant names, family names (expanded), or "all".
std::vector<Strategy> parse_strategies(const std::vector<std::string>& names) {
    std::vector<Strategy> out;
    auto add = [&](Strategy s) {
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    };
    for (const std::string& name : names) {
        if (name == "all") {
            for (Strategy s : all_strategies()) add(s);
            continue;
        }
        if (auto s = strategy_from_name(name)) {
            add(*s);
            continue;
        }
        bool matched = false;
        for (Strategy s : all_strategies()) {
            if (strategy_family(s) == name) {
                add(s);
                matched = true;
            }
        }
        if (!matched) throw std::invalid_argument("unknown strategy: " + name);
    }
    // Canonical enum order regardless of input order.
    std::sort(out.begin(), out.end(),
              [](Strategy a, Strategy b) { return static_cast<int>(a) < static_cast<int>(b); });
    return out;
}

std::vector<Language> parse_languages(const std::vector<std::string>& names) {
    std::vector<Language> out;
    for (const std::string& name : names) {
        auto lang = language_from_name(name);
        if (!lang) throw std::invalid_argument("unknown language: " + name);
        if (std::find(out.begin(), out.end(), *lang) == out.end()) out.push_back(*lang);
    }
    return out;
}

void load_backend_config(const ordered_json& j, backends::BackendConfig& cfg) {
    cfg.base_url = j.value("base_url", cfg.base_url);
    cfg.model = j.value("model", cfg.model);
    cfg.temperature = j.value("temperature", cfg.temperature);
    cfg.timeout_ms = j.value("timeout_ms", cfg.timeout_ms);
    cfg.max_retries = j.value("max_retries", cfg.max_retries);
    cfg.backoff_start_ms = j.value("backoff_start_ms", cfg.backoff_start_ms);
    cfg.backoff_factor = j.value("backoff_factor", cfg.backoff_factor);
    cfg.backoff_cap_ms = j.value("backoff_cap_ms", cfg.backoff_cap_ms);
    cfg.parallelism = j.value("parallelism", cfg.parallelism);
    cfg.api_key_env = j.value("api_key_env", cfg.api_key_env);
}

AppConfig load_config(const fs::path& path) {
    AppConfig cfg;
    cfg.generator.model = "gpt-4-0125-preview";
    cfg.judge.model = "gpt-3.5-turbo";
    cfg.extension_strategies = parse_strategies(
        {"ZeroShotCreatively", "AnalogyCreative", "FewShot", "FewShotCreatively"});
    if (path.empty()) return cfg;

    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    ordered_json j = ordered_json::parse(in);

    if (j.contains("generator")) load_backend_config(j["generator"], cfg.generator);
    if (j.contains("judge")) load_backend_config(j["judge"], cfg.judge);
    if (j.contains("engines")) {
        const auto& e = j["engines"];
        cfg.engines.google_base_url = e.value("google_base_url", cfg.engines.google_base_url);
        cfg.engines.deepl_base_url = e.value("deepl_base_url", cfg.engines.deepl_base_url);
        cfg.engines.google_api_key_env =
            e.value("google_api_key_env", cfg.engines.google_api_key_env);
        cfg.engines.deepl_api_key_env =
            e.value("deepl_api_key_env", cfg.engines.deepl_api_key_env);
    }
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        cfg.out_dir = p.value("out_dir", cfg.out_dir.string());
        cfg.idioms_path = p.value("idioms", std::string());
        cfg.templates_dir = p.value("templates", std::string());
        cfg.replay_store = p.value("replay_store", std::string());
        cfg.record_store = p.value("record_store", std::string());
        cfg.corpus_file = p.value("corpus_file", std::string());
        cfg.syllables_path = p.value("syllables", std::string());
        cfg.fewshot_pool_path = p.value("fewshot_pool", std::string());
    }
    if (j.contains("plan")) {
        const auto& p = j["plan"];
        cfg.sentences_per_idiom = p.value("sentences_per_idiom", cfg.sentences_per_idiom);
        if (p.contains("strategies")) {
            cfg.strategies = parse_strategies(p["strategies"].get<std::vector<std::string>>());
        }
        if (p.contains("languages")) {
            cfg.languages = parse_languages(p["languages"].get<std::vector<std::string>>());
        }
        if (p.contains("genres")) {
            cfg.genres.clear();
            for (const auto& name : p["genres"]) {
                auto g = genre_from_name(name.get<std::string>());
                if (!g) throw std::runtime_error("unknown genre in config");
                cfg.genres.push_back(*g);
            }
        }
        cfg.paragraph_idioms = p.value("paragraph_idioms", cfg.paragraph_idioms);
        cfg.mine_per_syllable = p.value("mine_per_syllable", cfg.mine_per_syllable);
        cfg.mine_seeds = p.value("mine_seeds", cfg.mine_seeds);
        cfg.include_containment_failures =
            p.value("include_containment_failures", cfg.include_containment_failures);
        if (p.contains("extension_strategies")) {
            cfg.extension_strategies =
                parse_strategies(p["extension_strategies"].get<std::vector<std::string>>());
        }
        cfg.extension_top_k = p.value("extension_top_k", cfg.extension_top_k);
    }
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
    return cfg;
}

// ---------------------------------------------------------------------------
// Stage context: lock file, backend, templates, manifest
// ---------------------------------------------------------------------------

class LockFile {
public:
    explicit LockFile(const fs::path& dir) : path_(dir / ".idiomct.lock") {
        if (fs::exists(path_)) {
            throw std::runtime_error("output directory is locked by another run: " +
                                     path_.string());
        }
        std::ofstream out(path_);
        out << "locked\n";
    }
    ~LockFile() {
        std::error_code ec;
        fs::remove(path_, ec);
    }

private:
    fs::path path_;
};

std::string utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

struct StageContext {
    AppConfig cfg;
    std::string command;
    fs::path out_dir;
    prompts::TemplateSet templates;
    CostLedger ledger;
    std::shared_ptr<backends::ReplayStore> store;
    std::unique_ptr<backends::RecordWriter> recorder;
    std::unique_ptr<backends::Backend> backend;
    std::unique_ptr<LockFile> lock;
    RunManifest manifest;

    bool replay() const { return !cfg.replay_store.empty(); }

    fs::path out(const char* name) const { return out_dir / name; }

    void begin(const std::string& command_name, bool needs_backend) {
        command = command_name;
        out_dir = cfg.out_dir;
        fs::create_directories(out_dir);
        lock = std::make_unique<LockFile>(out_dir);
        templates = cfg.templates_dir.empty()
                        ? prompts::TemplateSet::embedded()
                        : prompts::TemplateSet::load_dir(cfg.templates_dir);

        if (needs_backend && !cfg.dry_run) {
            if (!cfg.replay_store.empty() && !cfg.record_store.empty()) {
                throw std::runtime_error("--replay and --record are mutually exclusive");
            }
            backends::BackendModels models{cfg.generator.model, cfg.judge.model,
                                           cfg.generator.temperature};
            if (!cfg.replay_store.empty()) {
                store = std::make_shared<backends::ReplayStore>(
                    backends::ReplayStore::load(cfg.replay_store));
                backend = std::make_unique<backends::ReplayBackend>(store, models, &ledger);
            } else {
                if (!cfg.record_store.empty()) {
                    recorder = std::make_unique<backends::RecordWriter>(cfg.record_store);
                }
                backend = std::make_unique<backends::HttpChatBackend>(
                    cfg.generator, cfg.judge, cfg.engines, &ledger, recorder.get());
            }
        }

        manifest = RunManifest{};
        manifest.generation_model = cfg.generator.model;
        manifest.judge_model = cfg.judge.model;
        manifest.temperature = cfg.generator.temperature;
        manifest.rng_seed = cfg.rng_seed;
        manifest.backend_mode = replay() ? "replay" : "live";
        manifest.started_at = replay() ? "1970-01-01T00:00:00Z" : utc_now();

        std::uint64_t h = fnv1a64(command_name);
        h = fnv1a64(manifest.backend_mode, h);
        h = fnv1a64(std::to_string(cfg.rng_seed), h);
        for (Strategy s : cfg.strategies) h = fnv1a64(strategy_name(s), h);
        for (Language l : cfg.languages) h = fnv1a64(language_name(l), h);
        if (!replay()) h = fnv1a64(manifest.started_at, h);
        manifest.run_id = hex64(h);
    }

    void finish() {
        manifest.finished_at = replay() ? "1970-01-01T00:00:00Z" : utc_now();
        manifest.token_totals = ledger.totals();
        if (!manifest.totals_match(ledger)) {
            throw std::runtime_error("manifest token totals diverge from the cost ledger");
        }
        manifest.save(out(("manifest.json")));
    }
};

// ---------------------------------------------------------------------------
// Shared stage helpers
// ---------------------------------------------------------------------------

std::vector<Idiom> load_idioms(const StageContext& ctx, const fs::path& override_path) {
    fs::path path = override_path.empty() ? ctx.cfg.idioms_path : override_path;
    if (path.empty()) throw std::runtime_error("no idioms file given (--idioms or config)");
    auto idioms = read_records<Idiom>(path);
    std::vector<Idiom> filtered;
    for (const Idiom& idiom : idioms) {
        if (std::find(ctx.cfg.languages.begin(), ctx.cfg.languages.end(), idiom.language) !=
            ctx.cfg.languages.end()) {
            filtered.push_back(idiom);
        }
    }
    return filtered;
}

std::map<std::string, Idiom> index_idioms(const std::vector<Idiom>& idioms) {
    std::map<std::string, Idiom> by_id;
    for (const Idiom& idiom : idioms) by_id[idiom.id] = idiom;
    return by_id;
}

std::vector<prompts::FewShotExample> load_fewshot_pool(const fs::path& path) {
    std::vector<prompts::FewShotExample> pool;
    if (path.empty() || !fs::exists(path)) return pool;
    std::ifstream in(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw JsonlError("malformed pool line " + std::to_string(line_no), line_no);
        }
        prompts::FewShotExample ex;
        ex.source = j.at("source").get<std::string>();
        ex.target = j.at("target").get<std::string>();
        auto lang = language_from_name(j.at("language").get<std::string>());
        if (!lang) throw JsonlError("unknown language in pool", line_no);
        ex.language = *lang;
        pool.push_back(std::move(ex));
    }
    return pool;
}

void write_fewshot_pool(const std::vector<prompts::FewShotExample>& pool,
                        const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write pool: " + path.string());
    for (const auto& ex : pool) {
        ordered_json j{{"source", ex.source},
                       {"target", ex.target},
                       {"language", language_name(ex.language)}};
        out << j.dump() << '\n';
    }
}

void print_prompt_audit(const std::vector<prompts::Message>& messages) {
    for (const auto& m : messages) {
        std::cout << (m.role == prompts::Role::User ? "[user]\n" : "[assistant]\n")
                  << m.content << "\n---\n";
    }
}

// ---------------------------------------------------------------------------
// Subcommand implementations
// ---------------------------------------------------------------------------

int cmd_export_templates(const fs::path& dir) {
    prompts::TemplateSet::embedded().write_dir(dir);
    std::cout << "wrote " << prompts::TemplateSet::ids().size() << " templates to " << dir
              << "\n";
    return 0;
}

int cmd_import_idioms(const fs::path& text_path, const std::string& language_name_arg,
                      const fs::path& out_path) {
    auto lang = language_from_name(language_name_arg);
    if (!lang) throw std::runtime_error("unknown language: " + language_name_arg);
    std::ifstream in(text_path);
    if (!in) throw std::runtime_error("cannot open " + text_path.string());
    std::vector<Idiom> idioms;
    std::set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        auto surface = textparse::trim(line);
        if (surface.empty()) continue;
        if (!seen.insert(std::string(surface)).second) continue;
        idioms.push_back(Idiom::make(surface, *lang));
    }
    write_records(idioms, out_path);
    std::cout << "imported " << idioms.size() << " idioms -> " << out_path << "\n";
    return 0;
}

int cmd_mine(StageContext& ctx, const fs::path& syllables_override,
             const fs::path& pinyin_path) {
    fs::path syl_path =
        syllables_override.empty() ? ctx.cfg.syllables_path : syllables_override;
    if (syl_path.empty()) throw std::runtime_error("no syllables file (--syllables)");
    std::vector<std::string> syllables;
    {
        std::ifstream in(syl_path);
        if (!in) throw std::runtime_error("cannot open " + syl_path.string());
        std::string line;
        while (std::getline(in, line)) {
            auto s = textparse::trim(line);
            if (!s.empty()) syllables.emplace_back(s);
        }
    }

    if (ctx.cfg.dry_run) {
        for (const std::string& s : syllables) {
            print_prompt_audit(
                prompts::render_mining(ctx.templates, s, ctx.cfg.mine_per_syllable));
        }
        return 0;
    }

    // Optional first-character pinyin table: one "<char>\t<syllable>" per line.
    std::map<std::string, std::string> pinyin_table;
    if (!pinyin_path.empty()) {
        std::ifstream in(pinyin_path);
        if (!in) throw std::runtime_error("cannot open " + pinyin_path.string());
        std::string line;
        while (std::getline(in, line)) {
            auto tab = line.find('\t');
            if (tab == std::string::npos) continue;
            pinyin_table[line.substr(0, tab)] =
                std::string(textparse::trim(line.substr(tab + 1)));
        }
    }
    pipeline::PinyinLookup lookup = [&](std::string_view surface)
        -> std::optional<std::string> {
        if (pinyin_table.empty() || surface.empty()) return std::nullopt;
        // First UTF-8 code point.
        std::size_t len = 1;
        unsigned char c = static_cast<unsigned char>(surface[0]);
        if (c >= 0xf0) len = 4;
        else if (c >= 0xe0) len = 3;
        else if (c >= 0xc0) len = 2;
        auto it = pinyin_table.find(std::string(surface.substr(0, len)));
        if (it == pinyin_table.end()) return std::nullopt;
        return it->second;
    };

    // Resume at syllable granularity: a progress file lists finished queries.
    fs::path progress_path = ctx.out("mined_syllables.txt");
    std::set<std::string> done_syllables;
    std::vector<pipeline::MinedCandidate> candidates;
    std::set<std::string> seen_surfaces;
    if (fs::exists(progress_path) && fs::exists(ctx.out("mined.jsonl"))) {
        std::ifstream in(progress_path);
        std::string line;
        while (std::getline(in, line)) {
            auto s = textparse::trim(line);
            if (!s.empty()) done_syllables.insert(std::string(s));
        }
        std::ifstream mined(ctx.out("mined.jsonl"));
        while (std::getline(mined, line)) {
            if (line.empty()) continue;
            auto j = ordered_json::parse(line);
            pipeline::MinedCandidate c;
            c.surface = j.at("surface").get<std::string>();
            c.syllable = j.at("syllable").get<std::string>();
            c.initial_mismatch = j.at("initial_mismatch").get<bool>();
            if (seen_surfaces.insert(c.surface).second) candidates.push_back(std::move(c));
        }
    }

    long long queries = 0, shortfalls = 0, errors = 0, resumed = 0;
    for (const std::string& syllable : syllables) {
        if (done_syllables.count(syllable)) {
            ++resumed;
            continue;
        }
        std::vector<std::string> one{syllable};
        auto report = pipeline::mine_idioms(*ctx.backend, ctx.templates, one,
                                            ctx.cfg.mine_per_syllable, ctx.cfg.mine_seeds,
                                            pinyin_table.empty() ? nullptr : &lookup);
        queries += report.queries;
        shortfalls += report.shortfall_queries;
        errors += static_cast<long long>(report.errors.size());
        for (const std::string& e : report.errors) std::cerr << "warning: " << e << "\n";
        for (auto& c : report.candidates) {
            if (seen_surfaces.insert(c.surface).second) candidates.push_back(std::move(c));
        }
        done_syllables.insert(syllable);

        std::ofstream out(ctx.out("mined.jsonl"), std::ios::binary | std::ios::trunc);
        for (const auto& c : candidates) {
            ordered_json j{{"surface", c.surface},
                           {"syllable", c.syllable},
                           {"initial_mismatch", c.initial_mismatch}};
            out << j.dump() << '\n';
        }
        std::ofstream progress(progress_path, std::ios::binary | std::ios::trunc);
        for (const auto& s : done_syllables) progress << s << '\n';
    }
    ctx.manifest.counters["mine_queries"] = queries;
    ctx.manifest.counters["mine_syllables_resumed"] = resumed;
    ctx.manifest.counters["mine_shortfall_queries"] = shortfalls;
    ctx.manifest.counters["mine_candidates"] = static_cast<long long>(candidates.size());
    ctx.manifest.counters["mine_errors"] = errors;
    ctx.finish();
    std::cout << "mined " << candidates.size() << " candidates from " << queries
              << " queries\n";
    return 0;
}

int cmd_verify(StageContext& ctx, const fs::path& candidates_override) {
    fs::path path =
        candidates_override.empty() ? ctx.out("mined.jsonl") : candidates_override;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open candidates: " + path.string());
    std::vector<std::string> candidates;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = ordered_json::parse(line, nullptr, false);
        if (!j.is_discarded() && j.contains("surface")) {
            candidates.push_back(j["surface"].get<std::string>());
        } else {
            candidates.emplace_back(textparse::trim(line));
        }
    }

    if (ctx.cfg.dry_run) {
        for (const std::string& c : candidates) {
            print_prompt_audit(prompts::render_verification(ctx.templates, c));
        }
        return 0;
    }

    // Resume by surface: candidates already classified keep their outcome.
    std::map<std::string, std::string> outcomes;
    fs::path out_path = ctx.out("verified.jsonl");
    long long resumed = 0;
    if (fs::exists(out_path)) {
        std::ifstream in(out_path);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto j = ordered_json::parse(line);
            outcomes[j.at("surface").get<std::string>()] =
                j.at("outcome").get<std::string>();
        }
    }

    long long real = 0, fake = 0, unparseable = 0;
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    for (const std::string& c : candidates) {
        std::string name;
        auto it = outcomes.find(c);
        if (it != outcomes.end()) {
            name = it->second;
            ++resumed;
        } else {
            auto outcome = pipeline::verify_idiom(*ctx.backend, ctx.templates, c);
            name = std::string(pipeline::verify_outcome_name(outcome));
            outcomes[c] = name;
        }
        if (name == "Real") ++real;
        else if (name == "Fake") ++fake;
        else ++unparseable;
        ordered_json j{{"surface", c}, {"outcome", name}};
        out << j.dump() << '\n';
    }
    ctx.manifest.counters["verify_real"] = real;
    ctx.manifest.counters["verify_fake"] = fake;
    ctx.manifest.counters["verify_unparseable"] = unparseable;
    ctx.manifest.counters["verify_resumed"] = resumed;
    ctx.finish();
    std::cout << "verified " << candidates.size() << " candidates: " << real << " real, "
              << fake << " fake, " << unparseable << " unparseable\n";
    return 0;
}

int run_gen_sentences(StageContext& ctx, const std::vector<Idiom>& idioms,
                      const fs::path& out_path) {
    std::vector<SentenceRecord> existing;
    if (fs::exists(out_path)) existing = read_records<SentenceRecord>(out_path);
    std::map<std::string, std::vector<SentenceRecord>> by_idiom;
    for (auto& r : existing) by_idiom[r.idiom_id].push_back(r);

    if (ctx.cfg.dry_run) {
        for (const Idiom& idiom : idioms) {
            print_prompt_audit(prompts::render_sentence_gen(ctx.templates, idiom));
        }
        return 0;
    }

    long long resumed = 0, failures = 0, mismatches = 0;
    std::vector<SentenceRecord> all;
    for (const Idiom& idiom : idioms) {
        auto it = by_idiom.find(idiom.id);
        if (it != by_idiom.end() &&
            it->second.size() == static_cast<std::size_t>(kSentencesPerIdiom)) {
            all.insert(all.end(), it->second.begin(), it->second.end());
            ++resumed;
            continue;
        }
        auto result = pipeline::generate_sentences(*ctx.backend, ctx.templates, idiom);
        if (result.backend_failed) {
            ++failures;
            std::cerr << "warning: sentence generation failed for " << idiom.surface << ": "
                      << result.error << "\n";
        }
        if (result.count_mismatch || result.truncated) ++mismatches;
        all.insert(all.end(), result.records.begin(), result.records.end());
    }
    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return pipeline::canonical_less(a, b); });

    long long with_idiom = 0, empty = 0;
    for (const auto& r : all) {
        if (r.contains_idiom) ++with_idiom;
        if (r.text.empty()) ++empty;
    }
    write_records(all, out_path);
    ctx.manifest.counters["idioms_total"] = static_cast<long long>(idioms.size());
    ctx.manifest.counters["idioms_resumed"] = resumed;
    ctx.manifest.counters["sentences_generated"] = static_cast<long long>(all.size());
    ctx.manifest.counters["sentences_with_idiom"] = with_idiom;
    ctx.manifest.counters["sentences_empty"] = empty;
    ctx.manifest.counters["sentence_gen_failures"] = failures;
    ctx.manifest.counters["sentence_gen_count_mismatches"] = mismatches;
    ctx.finish();
    std::cout << "sentences: " << all.size() << " records (" << with_idiom
              << " contain their idiom) -> " << out_path << "\n";
    return 0;
}

int cmd_gen_sentences(StageContext& ctx, const fs::path& idioms_override) {
    auto idioms = load_idioms(ctx, idioms_override);
    return run_gen_sentences(ctx, idioms, ctx.out("sentences.jsonl"));
}

int run_translate(StageContext& ctx, const std::vector<Idiom>& idioms,
                  const std::vector<Strategy>& strategies, const fs::path& sentences_path,
                  const fs::path& out_path, const fs::path& pool_path) {
    auto by_id = index_idioms(idioms);
    auto sentences = read_records<SentenceRecord>(sentences_path);
    auto pool = load_fewshot_pool(pool_path);

    std::vector<TranslationRecord> existing;
    if (fs::exists(out_path)) existing = read_records<TranslationRecord>(out_path);
    std::set<std::string> done;
    std::map<std::string, std::vector<TranslationRecord>> existing_by_sentence;
    for (auto& r : existing) {
        done.insert(r.ref_key());
        existing_by_sentence[r.idiom_id + "/" + std::to_string(r.sentence_index)].push_back(
            r);
    }

    long long translated = 0, skipped_no_idiom = 0, skipped_empty = 0, resumed = 0;
    std::vector<TranslationRecord> all;
    for (const SentenceRecord& sentence : sentences) {
        auto idiom_it = by_id.find(sentence.idiom_id);
        if (idiom_it == by_id.end()) continue;  // filtered language
        const Idiom& idiom = idiom_it->second;

        if (sentence.text.empty()) {
            ++skipped_empty;
            continue;
        }
        if (!sentence.contains_idiom && !ctx.cfg.include_containment_failures) {
            ++skipped_no_idiom;
            continue;
        }

        if (ctx.cfg.dry_run) {
            pipeline::TranslateOptions audit;
            audit.strategies = strategies;
            audit.fewshot_pool = pool;
            audit.rng_seed = ctx.cfg.rng_seed;
            audit.include_containment_failures = ctx.cfg.include_containment_failures;
            for (const auto& messages :
                 pipeline::render_translation_plan(ctx.templates, idiom, sentence, audit)) {
                print_prompt_audit(messages);
            }
            continue;
        }

        // Resume at sentence granularity: every requested variant present.
        bool complete = true;
        for (Strategy s : strategies) {
            TranslationRecord probe;
            probe.idiom_id = sentence.idiom_id;
            probe.sentence_index = sentence.index;
            probe.strategy = std::string(strategy_name(s));
            probe.turn_index = strategy_family(s) == "DiversityDialog" ? 1 : 0;
            if (!done.count(probe.ref_key())) {
                complete = false;
                break;
            }
        }
        ++translated;
        if (complete) {
            ++resumed;
            auto& rows = existing_by_sentence[sentence.idiom_id + "/" +
                                              std::to_string(sentence.index)];
            all.insert(all.end(), rows.begin(), rows.end());
            continue;
        }

        pipeline::TranslateOptions options;
        options.strategies = strategies;
        options.fewshot_pool = pool;
        options.rng_seed = ctx.cfg.rng_seed;
        options.include_containment_failures = ctx.cfg.include_containment_failures;
        auto records =
            pipeline::translate_sentence(*ctx.backend, ctx.templates, idiom, sentence, options);
        all.insert(all.end(), records.begin(), records.end());
    }

    if (ctx.cfg.dry_run) return 0;

    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return pipeline::canonical_less(a, b); });
    long long failed = 0;
    for (const auto& r : all) {
        if (r.failed) ++failed;
    }
    write_records(all, out_path);
    ctx.manifest.counters["sentences_seen"] =
        translated + skipped_no_idiom + skipped_empty;
    ctx.manifest.counters["sentences_translated"] = translated;
    ctx.manifest.counters["sentences_resumed"] = resumed;
    ctx.manifest.counters["sentences_skipped_no_idiom"] = skipped_no_idiom;
    ctx.manifest.counters["sentences_skipped_empty"] = skipped_empty;
    ctx.manifest.counters["translations_emitted"] = static_cast<long long>(all.size());
    ctx.manifest.counters["translations_failed"] = failed;
    ctx.finish();
    std::cout << "translations: " << all.size() << " records (" << failed << " failed, "
              << skipped_no_idiom + skipped_empty << " sentences skipped) -> " << out_path
              << "\n";
    return 0;
}

int cmd_translate(StageContext& ctx, const fs::path& idioms_override,
                  const fs::path& pool_override) {
    auto idioms = load_idioms(ctx, idioms_override);
    fs::path pool_path =
        pool_override.empty() ? ctx.cfg.fewshot_pool_path : pool_override;
    return run_translate(ctx, idioms, ctx.cfg.strategies, ctx.out("sentences.jsonl"),
                         ctx.out("translations.jsonl"), pool_path);
}

int cmd_score(StageContext& ctx, const fs::path& idioms_override) {
    auto idioms = load_idioms(ctx, idioms_override);
    auto by_id = index_idioms(idioms);
    auto sentences = read_records<SentenceRecord>(ctx.out("sentences.jsonl"));
    auto translations = read_records<TranslationRecord>(ctx.out("translations.jsonl"));

    std::map<std::string, std::string> sentence_text;
    for (const auto& s : sentences) {
        sentence_text[s.idiom_id + "/" + std::to_string(s.index)] = s.text;
    }

    fs::path out_path = ctx.out("scores.jsonl");
    std::vector<AspectScore> all;
    std::set<std::string> done;
    if (fs::exists(out_path)) {
        all = read_records<AspectScore>(out_path);
        for (const auto& s : all) done.insert(s.ref_key());
    }

    long long emitted = 0, invalid = 0, retries = 0, unscored_failed = 0, resumed = 0;
    for (const TranslationRecord& record : translations) {
        if (!record.genre.empty()) continue;  // paragraph records are not judged
        if (record.failed) {
            ++unscored_failed;
            continue;
        }
        auto idiom_it = by_id.find(record.idiom_id);
        if (idiom_it == by_id.end()) continue;
        const std::string& source =
            sentence_text[record.idiom_id + "/" + std::to_string(record.sentence_index)];

        for (Aspect aspect : {Aspect::Faithfulness, Aspect::Creativity}) {
            AspectScore probe;
            probe.idiom_id = record.idiom_id;
            probe.sentence_index = record.sentence_index;
            probe.genre = record.genre;
            probe.strategy = record.strategy;
            probe.turn_index = record.turn_index;
            probe.aspect = aspect;
            if (done.count(probe.ref_key())) {
                ++resumed;
                continue;
            }
            if (ctx.cfg.dry_run) {
                print_prompt_audit(prompts::render_evaluation(
                    ctx.templates, aspect, idiom_it->second, source, record.text));
                continue;
            }
            auto outcome = evaluation::score_translation(*ctx.backend, ctx.templates,
                                                         idiom_it->second, source, record,
                                                         aspect);
            retries += outcome.retried_runs;
            if (!outcome.score.valid) ++invalid;
            ++emitted;
            all.push_back(std::move(outcome.score));
        }
    }

    if (ctx.cfg.dry_run) return 0;

    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return pipeline::canonical_less(a, b); });
    write_records(all, out_path);
    ctx.manifest.counters["scores_emitted"] = emitted;
    ctx.manifest.counters["scores_resumed"] = resumed;
    ctx.manifest.counters["scores_invalid"] = invalid;
    ctx.manifest.counters["score_run_retries"] = retries;
    ctx.manifest.counters["translations_unscored_failed"] = unscored_failed;
    ctx.finish();
    std::cout << "scores: " << all.size() << " records (" << invalid << " invalid) -> "
              << out_path << "\n";
    return 0;
}

int cmd_stats(StageContext& ctx, const fs::path& idioms_override) {
    auto idioms = load_idioms(ctx, idioms_override);
    auto by_id = index_idioms(idioms);
    auto translations = read_records<TranslationRecord>(ctx.out("translations.jsonl"));
    auto scores = read_records<AspectScore>(ctx.out("scores.jsonl"));

    std::map<std::string, const AspectScore*> by_key;
    for (const auto& s : scores) by_key[s.ref_key()] = &s;

    std::map<std::pair<std::string, int>, std::vector<evaluation::ScoredTranslation>> groups;
    for (const TranslationRecord& record : translations) {
        if (!record.genre.empty() || record.failed) continue;
        auto idiom_it = by_id.find(record.idiom_id);
        if (idiom_it == by_id.end()) continue;
        auto strategy = strategy_from_name(record.strategy);
        if (!strategy) continue;

        AspectScore probe;
        probe.idiom_id = record.idiom_id;
        probe.sentence_index = record.sentence_index;
        probe.strategy = record.strategy;
        probe.turn_index = record.turn_index;
        probe.aspect = Aspect::Faithfulness;
        auto f_it = by_key.find(probe.ref_key());
        probe.aspect = Aspect::Creativity;
        auto c_it = by_key.find(probe.ref_key());
        if (f_it == by_key.end() || c_it == by_key.end()) continue;
        if (!f_it->second->valid || !c_it->second->valid) continue;

        groups[{std::string(strategy_family(*strategy)),
                static_cast<int>(idiom_it->second.language)}]
            .push_back(evaluation::ScoredTranslation{f_it->second->run_sum(),
                                                     c_it->second->run_sum()});
    }

    std::vector<StrategyStats> stats;
    for (const auto& [key, group] : groups) {
        stats.push_back(evaluation::aggregate(key.first, static_cast<Language>(key.second),
                                              group));
    }
    std::sort(stats.begin(), stats.end(), [](const auto& a, const auto& b) {
        int oa = pipeline::strategy_order(a.strategy_family);
        int ob = pipeline::strategy_order(b.strategy_family);
        if (oa != ob) return oa < ob;
        if (a.strategy_family != b.strategy_family) return a.strategy_family < b.strategy_family;
        return static_cast<int>(a.language) < static_cast<int>(b.language);
    });

    write_records(stats, ctx.out("stats.jsonl"));
    {
        std::ofstream table(ctx.out("stats.txt"), std::ios::binary | std::ios::trunc);
        table << evaluation::format_stats_table(stats);
    }
    ctx.manifest.counters["stats_rows"] = static_cast<long long>(stats.size());
    ctx.finish();
    std::cout << "stats: " << stats.size() << " (family, language) rows -> "
              << ctx.out("stats.jsonl") << "\n";
    return 0;
}

int cmd_pareto(StageContext& ctx, const fs::path& stats_override) {
    fs::path path = stats_override.empty() ? ctx.out("stats.jsonl") : stats_override;
    auto stats = read_records<StrategyStats>(path);

    // Per-language fronts plus their union; the cross-language rule is the
    // operator's call, so both views are reported.
    ordered_json out_json = ordered_json::object();
    std::set<std::string> union_members;
    for (Language lang : kAllLanguages) {
        std::vector<StrategyStats> subset;
        for (const auto& s : stats) {
            if (s.language == lang) subset.push_back(s);
        }
        if (subset.empty()) continue;
        auto front = evaluation::pareto_front(subset);
        std::cout << language_name(lang) << ": ";
        for (std::size_t i = 0; i < front.members.size(); ++i) {
            std::cout << (i ? ", " : "") << front.members[i];
            union_members.insert(front.members[i]);
        }
        std::cout << "\n";
        out_json[std::string(language_name(lang))] = front.members;
    }
    std::vector<std::string> union_sorted(union_members.begin(), union_members.end());
    std::sort(union_sorted.begin(), union_sorted.end(), [](const auto& a, const auto& b) {
        return pipeline::strategy_order(a) < pipeline::strategy_order(b);
    });
    std::cout << "union: ";
    for (std::size_t i = 0; i < union_sorted.size(); ++i) {
        std::cout << (i ? ", " : "") << union_sorted[i];
    }
    std::cout << "\n";
    out_json["union"] = union_sorted;
    std::ofstream out(ctx.out("pareto.json"), std::ios::binary | std::ios::trunc);
    out << out_json.dump(2) << '\n';
    ctx.manifest.counters["pareto_union_size"] =
        static_cast<long long>(union_sorted.size());
    ctx.finish();
    return 0;
}

int cmd_fewshot_pool(StageContext& ctx, const fs::path& idioms_override) {
    auto idioms = load_idioms(ctx, idioms_override);
    auto by_id = index_idioms(idioms);
    auto sentences = read_records<SentenceRecord>(ctx.out("sentences.jsonl"));
    auto translations = read_records<TranslationRecord>(ctx.out("translations.jsonl"));
    auto scores = read_records<AspectScore>(ctx.out("scores.jsonl"));

    std::map<std::string, std::string> sentence_text;
    for (const auto& s : sentences) {
        sentence_text[s.idiom_id + "/" + std::to_string(s.index)] = s.text;
    }
    std::map<std::string, const AspectScore*> by_key;
    for (const auto& s : scores) by_key[s.ref_key()] = &s;

    std::vector<evaluation::PoolCandidate> candidates;
    for (const TranslationRecord& record : translations) {
        if (!record.genre.empty() || record.failed) continue;
        auto strategy = strategy_from_name(record.strategy);
        if (!strategy) continue;
        // The pool reuses zero-shot translations; engine output and few-shot
        // output stay out.
        std::string_view family = strategy_family(*strategy);
        if (is_engine_strategy(*strategy) || family == "FewShot" ||
            family == "FewShotCreatively") {
            continue;
        }
        auto idiom_it = by_id.find(record.idiom_id);
        if (idiom_it == by_id.end()) continue;

        AspectScore probe;
        probe.idiom_id = record.idiom_id;
        probe.sentence_index = record.sentence_index;
        probe.strategy = record.strategy;
        probe.turn_index = record.turn_index;
        probe.aspect = Aspect::Creativity;
        auto it = by_key.find(probe.ref_key());
        if (it == by_key.end()) continue;

        evaluation::PoolCandidate c;
        c.source_sentence =
            sentence_text[record.idiom_id + "/" + std::to_string(record.sentence_index)];
        c.translation = record.text;
        c.language = idiom_it->second.language;
        c.creativity_runs = it->second->runs;
        c.valid = it->second->valid;
        candidates.push_back(std::move(c));
    }

    auto pool = evaluation::select_fewshot_pool(candidates);
    write_fewshot_pool(pool, ctx.out("fewshot_pool.jsonl"));
    ctx.manifest.counters["pool_candidates"] = static_cast<long long>(candidates.size());
    ctx.manifest.counters["pool_size"] = static_cast<long long>(pool.size());
    ctx.finish();
    std::cout << "few-shot pool: " << pool.size() << " of " << candidates.size()
              << " candidates -> " << ctx.out("fewshot_pool.jsonl") << "\n";
    return 0;
}

int cmd_rank_idioms(StageContext& ctx, const fs::path& idioms_override,
                    const fs::path& corpus_override) {
    auto idioms = load_idioms(ctx, idioms_override);
    fs::path corpus = corpus_override.empty() ? ctx.cfg.corpus_file : corpus_override;
    if (corpus.empty()) throw std::runtime_error("no sentence-pair corpus (--corpus)");
    auto ranking = analysis::rank_by_frequency(idioms, corpus);
    analysis::write_ranking(ranking, ctx.out("ranking.jsonl"));
    ctx.manifest.counters["ranked_idioms"] = static_cast<long long>(ranking.size());
    ctx.finish();
    std::cout << "ranked " << ranking.size() << " idioms -> " << ctx.out("ranking.jsonl")
              << "\n";
    return 0;
}

int cmd_extend(StageContext& ctx, const fs::path& idioms_override,
               const fs::path& corpus_override, int top_k_flag,
               const fs::path& pool_override) {
    auto idioms = load_idioms(ctx, idioms_override);
    fs::path corpus = corpus_override.empty() ? ctx.cfg.corpus_file : corpus_override;
    if (corpus.empty()) throw std::runtime_error("no sentence-pair corpus (--corpus)");

    int top_k = top_k_flag > 0 ? top_k_flag : ctx.cfg.extension_top_k;
    auto ranking = analysis::rank_by_frequency(idioms, corpus);
    std::vector<Idiom> selected;
    for (const auto& r : ranking) {
        if (static_cast<int>(selected.size()) >= top_k) break;
        selected.push_back(r.idiom);
    }
    if (!ctx.cfg.dry_run) {
        analysis::write_ranking(ranking, ctx.out("ranking.jsonl"));
        write_records(selected, ctx.out("extension_idioms.jsonl"));
    }

    int rc = run_gen_sentences(ctx, selected, ctx.out("sentences.jsonl"));
    if (rc != 0 || ctx.cfg.dry_run) return rc;
    fs::path pool_path = pool_override.empty() ? ctx.cfg.fewshot_pool_path : pool_override;
    return run_translate(ctx, selected, ctx.cfg.extension_strategies,
                         ctx.out("sentences.jsonl"), ctx.out("translations.jsonl"),
                         pool_path);
}

int cmd_gen_paragraphs(StageContext& ctx, const fs::path& idioms_override) {
    auto idioms = load_idioms(ctx, idioms_override);
    auto sentences = read_records<SentenceRecord>(ctx.out("sentences.jsonl"));
    std::map<std::string, std::vector<SentenceRecord>> by_idiom;
    for (auto& s : sentences) by_idiom[s.idiom_id].push_back(s);

    fs::path out_path = ctx.out("paragraphs.jsonl");
    std::map<std::string, std::vector<ParagraphRecord>> existing;
    if (fs::exists(out_path)) {
        for (auto& p : read_records<ParagraphRecord>(out_path)) {
            existing[p.idiom_id].push_back(p);
        }
    }

    long long taken = 0, resumed = 0;
    std::vector<ParagraphRecord> all;
    std::vector<std::string> errors;
    for (const Idiom& idiom : idioms) {
        if (taken >= ctx.cfg.paragraph_idioms) break;
        auto it = by_idiom.find(idiom.id);
        if (it == by_idiom.end()) continue;
        const SentenceRecord* chosen = nullptr;
        for (const auto& s : it->second) {
            if (s.contains_idiom) {
                chosen = &s;
                break;
            }
        }
        if (chosen == nullptr) continue;
        ++taken;
        if (ctx.cfg.dry_run) {
            for (Genre g : ctx.cfg.genres) {
                print_prompt_audit(prompts::render_paragraph_gen(ctx.templates, g,
                                                                 idiom.language,
                                                                 chosen->text));
            }
            continue;
        }
        auto have = existing.find(idiom.id);
        if (have != existing.end() && have->second.size() == ctx.cfg.genres.size()) {
            ++resumed;
            all.insert(all.end(), have->second.begin(), have->second.end());
            continue;
        }
        auto result = pipeline::generate_paragraphs(*ctx.backend, ctx.templates, idiom,
                                                    *chosen, ctx.cfg.genres);
        all.insert(all.end(), result.records.begin(), result.records.end());
        errors.insert(errors.end(), result.errors.begin(), result.errors.end());
    }
    if (ctx.cfg.dry_run) return 0;

    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return pipeline::canonical_less(a, b); });
    long long with_idiom = 0, with_sentence = 0;
    for (const auto& p : all) {
        if (p.contains_idiom) ++with_idiom;
        if (p.contains_sentence) ++with_sentence;
    }
    write_records(all, ctx.out("paragraphs.jsonl"));
    for (const auto& e : errors) std::cerr << "warning: " << e << "\n";
    ctx.manifest.counters["paragraph_idioms"] = taken;
    ctx.manifest.counters["paragraph_idioms_resumed"] = resumed;
    ctx.manifest.counters["paragraphs_generated"] = static_cast<long long>(all.size());
    ctx.manifest.counters["paragraphs_with_idiom"] = with_idiom;
    ctx.manifest.counters["paragraphs_with_sentence"] = with_sentence;
    ctx.finish();
    std::cout << "paragraphs: " << all.size() << " records (" << with_idiom << " w/ idiom, "
              << with_sentence << " w/ sentence) -> " << ctx.out("paragraphs.jsonl") << "\n";
    return 0;
}

int cmd_translate_paragraphs(StageContext& ctx, const fs::path& idioms_override) {
    auto idioms = load_idioms(ctx, idioms_override);
    auto by_id = index_idioms(idioms);
    auto paragraphs = read_records<ParagraphRecord>(ctx.out("paragraphs.jsonl"));

    fs::path cache_path = ctx.out("cot_cache.jsonl");
    prompts::CotInstructionCache cache;
    if (fs::exists(cache_path)) cache = prompts::CotInstructionCache::load(cache_path);

    if (ctx.cfg.dry_run) {
        for (const ParagraphRecord& p : paragraphs) {
            auto it = by_id.find(p.idiom_id);
            if (it == by_id.end() || p.text.empty()) continue;
            for (ParagraphKind kind :
                 {ParagraphKind::Baseline, ParagraphKind::FaithfulSimple,
                  ParagraphKind::CreativeSimple, ParagraphKind::ThemeSimple}) {
                print_prompt_audit(prompts::render_paragraph_prompt(
                    ctx.templates, kind, it->second.language, it->second, p.text, cache));
            }
        }
        return 0;
    }

    std::set<int> languages_needed;
    for (const ParagraphRecord& p : paragraphs) {
        auto it = by_id.find(p.idiom_id);
        if (it != by_id.end() && !p.text.empty()) {
            languages_needed.insert(static_cast<int>(it->second.language));
        }
    }
    for (int lang : languages_needed) {
        pipeline::populate_cot_cache(*ctx.backend, ctx.templates,
                                     static_cast<Language>(lang), cache);
    }
    cache.save(cache_path);

    fs::path out_path = ctx.out("paragraph_translations.jsonl");
    std::vector<TranslationRecord> all;
    std::set<std::string> done_units;  // per paragraph
    if (fs::exists(out_path)) {
        auto existing = read_records<TranslationRecord>(out_path);
        std::map<std::string, int> counts;
        for (const auto& r : existing) {
            ++counts[r.idiom_id + "/" + std::to_string(r.sentence_index) + "/" + r.genre];
        }
        for (const auto& [key, count] : counts) {
            if (count == static_cast<int>(kAllParagraphKinds.size())) done_units.insert(key);
        }
        // Stale rows of incomplete units are dropped; the unit reruns whole.
        for (auto& r : existing) {
            if (done_units.count(r.idiom_id + "/" + std::to_string(r.sentence_index) + "/" +
                                 r.genre)) {
                all.push_back(std::move(r));
            }
        }
    }

    long long units = 0, resumed = 0, failed = 0;
    for (const ParagraphRecord& p : paragraphs) {
        auto it = by_id.find(p.idiom_id);
        if (it == by_id.end() || p.text.empty()) continue;
        ++units;
        std::string key = p.idiom_id + "/" + std::to_string(p.sentence_index) + "/" + p.genre;
        if (done_units.count(key)) {
            ++resumed;
            continue;
        }
        auto records =
            pipeline::translate_paragraph(*ctx.backend, ctx.templates, it->second, p, cache);
        all.insert(all.end(), records.begin(), records.end());
    }

    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return pipeline::canonical_less(a, b); });
    for (const auto& r : all) {
        if (r.failed) ++failed;
    }
    write_records(all, out_path);
    ctx.manifest.counters["paragraphs_translated"] = units;
    ctx.manifest.counters["paragraphs_resumed"] = resumed;
    ctx.manifest.counters["paragraph_translations_emitted"] =
        static_cast<long long>(all.size());
    ctx.manifest.counters["paragraph_translations_failed"] = failed;
    ctx.finish();
    std::cout << "paragraph translations: " << all.size() << " records -> " << out_path
              << "\n";
    return 0;
}

int cmd_extract_spans(StageContext& ctx, const fs::path& idioms_override,
                      const std::string& strategies_csv) {
    auto idioms = load_idioms(ctx, idioms_override);
    auto by_id = index_idioms(idioms);
    auto sentences = read_records<SentenceRecord>(ctx.out("sentences.jsonl"));
    auto translations = read_records<TranslationRecord>(ctx.out("translations.jsonl"));

    std::optional<std::set<std::string>> keep;
    if (!strategies_csv.empty()) {
        keep.emplace();
        for (Strategy s : parse_strategies(split_csv(strategies_csv))) {
            keep->insert(std::string(strategy_name(s)));
        }
    }

    std::map<std::string, std::string> sentence_text;
    for (const auto& s : sentences) {
        sentence_text[s.idiom_id + "/" + std::to_string(s.index)] = s.text;
    }

    fs::path out_path = ctx.out("spans.jsonl");
    std::vector<SpanRecord> all;
    std::set<std::string> done;
    if (fs::exists(out_path)) {
        all = read_records<SpanRecord>(out_path);
        for (const auto& s : all) {
            TranslationRecord probe;
            probe.idiom_id = s.idiom_id;
            probe.sentence_index = s.sentence_index;
            probe.genre = s.genre;
            probe.strategy = s.strategy;
            probe.turn_index = s.turn_index;
            done.insert(probe.ref_key());
        }
    }

    long long extracted = 0, resumed = 0, matched = 0;
    for (const TranslationRecord& record : translations) {
        if (!record.genre.empty() || record.failed) continue;
        if (keep && !keep->count(record.strategy)) continue;
        auto idiom_it = by_id.find(record.idiom_id);
        if (idiom_it == by_id.end()) continue;
        const std::string& source =
            sentence_text[record.idiom_id + "/" + std::to_string(record.sentence_index)];
        if (ctx.cfg.dry_run) {
            print_prompt_audit(prompts::render_span_extraction(ctx.templates,
                                                               idiom_it->second, source,
                                                               record.text));
            continue;
        }
        if (done.count(record.ref_key())) {
            ++resumed;
            continue;
        }
        auto span = analysis::extract_span(*ctx.backend, ctx.templates, idiom_it->second,
                                           source, record);
        ++extracted;
        all.push_back(std::move(span));
    }
    if (ctx.cfg.dry_run) return 0;

    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return pipeline::canonical_less(a, b); });
    for (const auto& s : all) {
        if (s.is_substring) ++matched;
    }
    write_records(all, out_path);
    ctx.manifest.counters["spans_extracted"] = extracted;
    ctx.manifest.counters["spans_resumed"] = resumed;
    ctx.manifest.counters["spans_total"] = static_cast<long long>(all.size());
    ctx.manifest.counters["spans_substring_matches"] = matched;
    ctx.finish();
    std::cout << "spans: " << all.size() << " records, " << matched
              << " exact substrings -> " << out_path << "\n";
    return 0;
}

int cmd_saturation(StageContext& ctx, const fs::path& spans_override) {
    fs::path path = spans_override.empty() ? ctx.out("spans.jsonl") : spans_override;
    auto spans = read_records<SpanRecord>(path);
    std::sort(spans.begin(), spans.end(),
              [](const auto& a, const auto& b) { return pipeline::canonical_less(a, b); });

    std::vector<analysis::SaturationCurve> curves;
    std::string current_id;
    std::vector<std::string> current_spans;
    auto flush = [&] {
        if (!current_id.empty()) {
            curves.push_back(analysis::unigram_curve(current_id, current_spans));
        }
        current_spans.clear();
    };
    for (const SpanRecord& s : spans) {
        if (s.idiom_id != current_id) {
            flush();
            current_id = s.idiom_id;
        }
        current_spans.push_back(s.span_text);
    }
    flush();

    analysis::write_curves_csv(curves, ctx.out("saturation.csv"));
    ctx.manifest.counters["saturation_curves"] = static_cast<long long>(curves.size());
    ctx.finish();
    std::cout << "saturation: " << curves.size() << " curves -> "
              << ctx.out("saturation.csv") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"idiom context-aware translation dataset pipeline"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path, out_dir, replay_store, record_store;
    std::string strategies_csv, languages_csv;
    std::uint64_t seed = 0;
    bool seed_set = false, dry_run = false;

    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out-dir", out_dir, "output directory (flag wins over config)");
    app.add_option("--replay", replay_store, "replay store path (offline deterministic mode)");
    app.add_option("--record", record_store, "record store path (live mode, captures responses)");
    app.add_option("--seed", seed, "rng seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--strategies", strategies_csv, "comma-separated strategy or family names");
    app.add_option("--languages", languages_csv, "comma-separated language filter");
    app.add_flag("--dry-run", dry_run, "render prompts without calling any backend");
    bool include_failures = false;
    app.add_flag("--include-containment-failures", include_failures,
                 "translate sentences even when they fail idiom containment");

    std::string idioms_path, pool_path, corpus_path, syllables_path, pinyin_path;
    std::string candidates_path, stats_path, spans_path, text_path, language_arg, dir_path;
    std::string span_strategies;
    int top_k = -1;

    auto* c_mine = app.add_subcommand("mine", "mine idiom candidates by pinyin syllable");
    c_mine->add_option("--syllables", syllables_path, "syllable list, one per line");
    c_mine->add_option("--pinyin", pinyin_path, "char->syllable TSV for mismatch flagging");

    auto* c_verify = app.add_subcommand("verify", "classify candidates as real/fake idioms");
    c_verify->add_option("--candidates", candidates_path, "mined.jsonl or plain text list");

    auto* c_gen = app.add_subcommand("gen-sentences", "generate 10 sentences per idiom");
    c_gen->add_option("--idioms", idioms_path, "idiom JSONL file");

    auto* c_translate = app.add_subcommand("translate", "fan out translation strategies");
    c_translate->add_option("--idioms", idioms_path, "idiom JSONL file");
    c_translate->add_option("--fewshot-pool", pool_path, "few-shot example pool JSONL");

    auto* c_score = app.add_subcommand("score", "judge translations on both aspects");
    c_score->add_option("--idioms", idioms_path, "idiom JSONL file");

    auto* c_stats = app.add_subcommand("stats", "aggregate per-strategy statistics");
    c_stats->add_option("--idioms", idioms_path, "idiom JSONL file");

    auto* c_pareto = app.add_subcommand("pareto", "Pareto-optimal strategies per language");
    c_pareto->add_option("--stats", stats_path, "stats JSONL file");

    auto* c_pool = app.add_subcommand("fewshot-pool", "select the few-shot example pool");
    c_pool->add_option("--idioms", idioms_path, "idiom JSONL file");

    auto* c_extend =
        app.add_subcommand("extend", "rank by frequency, then sentences + Pareto strategies");
    c_extend->add_option("--idioms", idioms_path, "idiom JSONL file");
    c_extend->add_option("--corpus", corpus_path, "sentence-pair corpus, source side per line");
    c_extend->add_option("--top-k", top_k, "how many top-frequency idioms to keep");
    c_extend->add_option("--fewshot-pool", pool_path, "few-shot example pool JSONL");

    auto* c_genp = app.add_subcommand("gen-paragraphs", "wrap sentences into genre paragraphs");
    c_genp->add_option("--idioms", idioms_path, "idiom JSONL file");

    auto* c_transp =
        app.add_subcommand("translate-paragraphs", "translate paragraphs with 10 prompt kinds");
    c_transp->add_option("--idioms", idioms_path, "idiom JSONL file");

    auto* c_spans = app.add_subcommand("extract-spans", "locate idiom spans in translations");
    c_spans->add_option("--idioms", idioms_path, "idiom JSONL file");
    c_spans->add_option("--strategies", span_strategies, "restrict to these strategies");

    auto* c_sat = app.add_subcommand("saturation", "unigram saturation curves from spans");
    c_sat->add_option("--spans", spans_path, "span JSONL file");

    auto* c_rank = app.add_subcommand("rank-idioms", "frequency-rank idioms over a corpus");
    c_rank->add_option("--idioms", idioms_path, "idiom JSONL file");
    c_rank->add_option("--corpus", corpus_path, "sentence-pair corpus, source side per line");

    auto* c_import = app.add_subcommand("import-idioms", "build idiom records from plain text");
    c_import->add_option("--text", text_path, "one idiom surface per line")->required();
    c_import->add_option("--language", language_arg, "language tag")->required();
    c_import->add_option("--out", idioms_path, "output idiom JSONL")->required();

    auto* c_export = app.add_subcommand("export-templates", "write prompt template data files");
    c_export->add_option("--dir", dir_path, "target directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_export->parsed()) return cmd_export_templates(dir_path);
        if (c_import->parsed()) return cmd_import_idioms(text_path, language_arg, idioms_path);

        AppConfig cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!replay_store.empty()) cfg.replay_store = replay_store;
        if (!record_store.empty()) cfg.record_store = record_store;
        if (seed_set) cfg.rng_seed = seed;
        if (!strategies_csv.empty()) cfg.strategies = parse_strategies(split_csv(strategies_csv));
        if (!languages_csv.empty()) cfg.languages = parse_languages(split_csv(languages_csv));
        cfg.dry_run = dry_run;
        if (include_failures) cfg.include_containment_failures = true;

        StageContext ctx;
        ctx.cfg = std::move(cfg);

        if (c_mine->parsed()) {
            ctx.begin("mine", true);
            return cmd_mine(ctx, syllables_path, pinyin_path);
        }
        if (c_verify->parsed()) {
            ctx.begin("verify", true);
            return cmd_verify(ctx, candidates_path);
        }
        if (c_gen->parsed()) {
            ctx.begin("gen-sentences", true);
            return cmd_gen_sentences(ctx, idioms_path);
        }
        if (c_translate->parsed()) {
            ctx.begin("translate", true);
            return cmd_translate(ctx, idioms_path, pool_path);
        }
        if (c_score->parsed()) {
            ctx.begin("score", true);
            return cmd_score(ctx, idioms_path);
        }
        if (c_stats->parsed()) {
            ctx.begin("stats", false);
            return cmd_stats(ctx, idioms_path);
        }
        if (c_pareto->parsed()) {
            ctx.begin("pareto", false);
            return cmd_pareto(ctx, stats_path);
        }
        if (c_pool->parsed()) {
            ctx.begin("fewshot-pool", false);
            return cmd_fewshot_pool(ctx, idioms_path);
        }
        if (c_extend->parsed()) {
            ctx.begin("extend", true);
            return cmd_extend(ctx, idioms_path, corpus_path, top_k, pool_path);
        }
        if (c_genp->parsed()) {
            ctx.begin("gen-paragraphs", true);
            return cmd_gen_paragraphs(ctx, idioms_path);
        }
        if (c_transp->parsed()) {
            ctx.begin("translate-paragraphs", true);
            return cmd_translate_paragraphs(ctx, idioms_path);
        }
        if (c_spans->parsed()) {
            ctx.begin("extract-spans", true);
            return cmd_extract_spans(ctx, idioms_path, span_strategies);
        }
        if (c_sat->parsed()) {
            ctx.begin("saturation", false);
            return cmd_saturation(ctx, spans_path);
        }
        if (c_rank->parsed()) {
            ctx.begin("rank-idioms", false);
            return cmd_rank_idioms(ctx, idioms_path, corpus_path);
        }
        throw std::runtime_error("no subcommand selected");
    } catch (const std::exception& e) {
        ordered_json err{{"error", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
