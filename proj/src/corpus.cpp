#include "idiomct/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace idiomct {

using ordered_json = nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Enum tables
// ---------------------------------------------------------------------------

std::string_view language_name(Language lang) {
    switch (lang) {
        case Language::Chinese: return "Chinese";
        case Language::Japanese: return "Japanese";
        case Language::Korean: return "Korean";
        case Language::PlausibleChinese: return "PlausibleChinese";
    }
    throw std::invalid_argument("unknown language tag");
}

std::string_view language_prompt_word(Language lang) {
    // Plausible idioms are prompted as Chinese.
    if (lang == Language::PlausibleChinese) return "Chinese";
    return language_name(lang);
}

std::optional<Language> language_from_name(std::string_view name) {
    for (Language lang : kAllLanguages) {
        if (language_name(lang) == name) return lang;
    }
    return std::nullopt;
}

Idiom Idiom::make(std::string_view surface, Language language) {
    if (surface.empty()) throw std::invalid_argument("idiom surface is empty");
    if (std::isspace(static_cast<unsigned char>(surface.front())) ||
        std::isspace(static_cast<unsigned char>(surface.back()))) {
        throw std::invalid_argument("idiom surface has surrounding whitespace");
    }
    Idiom idiom;
    idiom.surface = std::string(surface);
    idiom.language = language;
    idiom.is_plausible = language == Language::PlausibleChinese;
    idiom.id = stable_id(surface, language);
    return idiom;
}

std::string Idiom::stable_id(std::string_view surface, Language language) {
    std::uint64_t h = fnv1a64(surface);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(language_name(language), h);
    return hex64(h);
}

const std::array<Strategy, kStrategyCount>& all_strategies() {
    static const std::array<Strategy, kStrategyCount> list = {
        Strategy::Google,
        Strategy::DeepL,
        Strategy::Baseline,
        Strategy::DiversityExplicit1,
        Strategy::DiversityExplicit2,
        Strategy::DiversityExplicit3,
        Strategy::DiversityExplicit4,
        Strategy::DiversityExplicit5,
        Strategy::DiversityDialog1,
        Strategy::DiversityDialog2,
        Strategy::DiversityDialog3,
        Strategy::DiversityDialog4,
        Strategy::DiversityDialog5,
        Strategy::ZeroShotCreatively,
        Strategy::ContextExplicitNewsReport,
        Strategy::ContextExplicitRomanceNovel,
        Strategy::ContextExplicitEverydayConversation,
        Strategy::ContextExplicitHistoryBook,
        Strategy::AnalogyNatural,
        Strategy::AnalogyCreative,
        Strategy::ShuffleOrder,
        Strategy::Succinct,
        Strategy::TwoStep,
        Strategy::Discontinuous1,
        Strategy::Discontinuous2,
        Strategy::FewShot,
        Strategy::FewShotCreatively,
    };
    return list;
}

std::string_view strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Google: return "Google";
        case Strategy::DeepL: return "DeepL";
        case Strategy::Baseline: return "Baseline";
        case Strategy::DiversityExplicit1: return "DiversityExplicit1";
        case Strategy::DiversityExplicit2: return "DiversityExplicit2";
        case Strategy::DiversityExplicit3: return "DiversityExplicit3";
        case Strategy::DiversityExplicit4: return "DiversityExplicit4";
        case Strategy::DiversityExplicit5: return "DiversityExplicit5";
        case Strategy::DiversityDialog1: return "DiversityDialog1";
        case Strategy::DiversityDialog2: return "DiversityDialog2";
        case Strategy::DiversityDialog3: return "DiversityDialog3";
        case Strategy::DiversityDialog4: return "DiversityDialog4";
        case Strategy::DiversityDialog5: return "DiversityDialog5";
        case Strategy::ZeroShotCreatively: return "ZeroShotCreatively";
        case Strategy::ContextExplicitNewsReport: return "ContextExplicitNewsReport";
        case Strategy::ContextExplicitRomanceNovel: return "ContextExplicitRomanceNovel";
        case Strategy::ContextExplicitEverydayConversation:
            return "ContextExplicitEverydayConversation";
        case Strategy::ContextExplicitHistoryBook: return "ContextExplicitHistoryBook";
        case Strategy::AnalogyNatural: return "AnalogyNatural";
        case Strategy::AnalogyCreative: return "AnalogyCreative";
        case Strategy::ShuffleOrder: return "ShuffleOrder";
        case Strategy::Succinct: return "Succinct";
        case Strategy::TwoStep: return "TwoStep";
        case Strategy::Discontinuous1: return "Discontinuous1";
        case Strategy::Discontinuous2: return "Discontinuous2";
        case Strategy::FewShot: return "FewShot";
        case Strategy::FewShotCreatively: return "FewShotCreatively";
    }
    throw std::invalid_argument("unknown strategy");
}

std::optional<Strategy> strategy_from_name(std::string_view name) {
    for (Strategy s : all_strategies()) {
        if (strategy_name(s) == name) return s;
    }
    return std::nullopt;
}

std::string_view strategy_family(Strategy s) {
    switch (s) {
        case Strategy::DiversityExplicit1:
        case Strategy::DiversityExplicit2:
        case Strategy::DiversityExplicit3:
        case Strategy::DiversityExplicit4:
        case Strategy::DiversityExplicit5:
            return "DiversityExplicit";
        case Strategy::DiversityDialog1:
        case Strategy::DiversityDialog2:
        case Strategy::DiversityDialog3:
        case Strategy::DiversityDialog4:
        case Strategy::DiversityDialog5:
            return "DiversityDialog";
        case Strategy::ContextExplicitNewsReport:
        case Strategy::ContextExplicitRomanceNovel:
        case Strategy::ContextExplicitEverydayConversation:
        case Strategy::ContextExplicitHistoryBook:
            return "ContextExplicit";
        default:
            return strategy_name(s);
    }
}

const std::vector<std::string>& all_strategy_families() {
    static const std::vector<std::string> families = [] {
        std::vector<std::string> out;
        for (Strategy s : all_strategies()) {
            std::string family(strategy_family(s));
            if (std::find(out.begin(), out.end(), family) == out.end()) {
                out.push_back(std::move(family));
            }
        }
        return out;
    }();
    return families;
}

int family_multiplicity(std::string_view family) {
    if (family == "DiversityExplicit" || family == "DiversityDialog") return 5;
    if (family == "ContextExplicit") return 4;
    return 1;
}

bool is_engine_strategy(Strategy s) {
    return s == Strategy::Google || s == Strategy::DeepL;
}

std::string_view genre_name(Genre g) {
    switch (g) {
        case Genre::NewsReport: return "NewsReport";
        case Genre::RomanceNovel: return "RomanceNovel";
        case Genre::EverydayConversation: return "EverydayConversation";
        case Genre::HistoryBook: return "HistoryBook";
    }
    throw std::invalid_argument("unknown genre");
}

std::string_view genre_phrase(Genre g) {
    switch (g) {
        case Genre::NewsReport: return "a news report";
        case Genre::RomanceNovel: return "a romance novel";
        case Genre::EverydayConversation: return "an everyday conversation";
        case Genre::HistoryBook: return "a history book";
    }
    throw std::invalid_argument("unknown genre");
}

std::optional<Genre> genre_from_name(std::string_view name) {
    for (Genre g : kAllGenres) {
        if (genre_name(g) == name) return g;
    }
    return std::nullopt;
}

std::string_view paragraph_kind_name(ParagraphKind k) {
    switch (k) {
        case ParagraphKind::Baseline: return "ParagraphBaseline";
        case ParagraphKind::FaithfulSimple: return "FaithfulSimple";
        case ParagraphKind::CreativeSimple: return "CreativeSimple";
        case ParagraphKind::ThemeSimple: return "ThemeSimple";
        case ParagraphKind::FaithfulCot: return "FaithfulCoT";
        case ParagraphKind::CreativeCot: return "CreativeCoT";
        case ParagraphKind::ThemeCot: return "ThemeCoT";
        case ParagraphKind::FaithfulMultiTurn: return "FaithfulMultiTurn";
        case ParagraphKind::CreativeMultiTurn: return "CreativeMultiTurn";
        case ParagraphKind::ThemeMultiTurn: return "ThemeMultiTurn";
    }
    throw std::invalid_argument("unknown paragraph kind");
}

std::optional<ParagraphKind> paragraph_kind_from_name(std::string_view name) {
    for (ParagraphKind k : kAllParagraphKinds) {
        if (paragraph_kind_name(k) == name) return k;
    }
    return std::nullopt;
}

std::string_view aspect_name(Aspect a) {
    switch (a) {
        case Aspect::Faithfulness: return "Faithfulness";
        case Aspect::Creativity: return "Creativity";
    }
    throw std::invalid_argument("unknown aspect");
}

std::optional<Aspect> aspect_from_name(std::string_view name) {
    if (name == "Faithfulness") return Aspect::Faithfulness;
    if (name == "Creativity") return Aspect::Creativity;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Record helpers
// ---------------------------------------------------------------------------

std::string TranslationRecord::ref_key() const {
    std::string key = idiom_id;
    key += '/';
    key += std::to_string(sentence_index);
    key += '/';
    key += genre;
    key += '/';
    key += strategy;
    key += '/';
    key += std::to_string(turn_index);
    return key;
}

int AspectScore::run_sum() const {
    return std::accumulate(runs.begin(), runs.end(), 0);
}

int AspectScore::max_run() const {
    return *std::max_element(runs.begin(), runs.end());
}

void AspectScore::validate() const {
    for (int r : runs) {
        if (r < 1 || r > 5) {
            throw std::invalid_argument("aspect score run outside [1,5]");
        }
    }
}

std::string AspectScore::ref_key() const {
    std::string key = idiom_id;
    key += '/';
    key += std::to_string(sentence_index);
    key += '/';
    key += genre;
    key += '/';
    key += strategy;
    key += '/';
    key += std::to_string(turn_index);
    key += '/';
    key += aspect_name(aspect);
    return key;
}

void CostLedger::add(std::string_view model, TokenCounts counts) {
    std::lock_guard lock(mutex_);
    entries_.push_back(Entry{std::string(model), counts});
    auto it = totals_.find(model);
    if (it == totals_.end()) {
        totals_.emplace(std::string(model), counts);
    } else {
        it->second += counts;
    }
}

std::vector<CostLedger::Entry> CostLedger::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

std::map<std::string, TokenCounts> CostLedger::totals() const {
    std::lock_guard lock(mutex_);
    return {totals_.begin(), totals_.end()};
}

TokenCounts CostLedger::total_for(std::string_view model) const {
    std::lock_guard lock(mutex_);
    auto it = totals_.find(model);
    return it == totals_.end() ? TokenCounts{} : it->second;
}

bool RunManifest::totals_match(const CostLedger& ledger) const {
    auto ledger_totals = ledger.totals();
    if (ledger_totals.size() != token_totals.size()) return false;
    for (const auto& [model, counts] : ledger_totals) {
        auto it = token_totals.find(model);
        if (it == token_totals.end()) return false;
        if (it->second.prompt_tokens != counts.prompt_tokens ||
            it->second.completion_tokens != counts.completion_tokens) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// JSON conversions (field order is the schema; do not reorder)
// ---------------------------------------------------------------------------

namespace {

ordered_json to_json(const Idiom& r) {
    return ordered_json{
        {"id", r.id},
        {"surface", r.surface},
        {"language", language_name(r.language)},
        {"is_plausible", r.is_plausible},
    };
}

ordered_json to_json(const SentenceRecord& r) {
    return ordered_json{
        {"idiom_id", r.idiom_id},
        {"index", r.index},
        {"text", r.text},
        {"contains_idiom", r.contains_idiom},
    };
}

ordered_json to_json(const TranslationRecord& r) {
    return ordered_json{
        {"idiom_id", r.idiom_id},
        {"sentence_index", r.sentence_index},
        {"genre", r.genre},
        {"strategy", r.strategy},
        {"turn_index", r.turn_index},
        {"text", r.text},
        {"raw_response", r.raw_response},
        {"failed", r.failed},
        {"error", r.error},
    };
}

ordered_json to_json(const AspectScore& r) {
    return ordered_json{
        {"idiom_id", r.idiom_id},
        {"sentence_index", r.sentence_index},
        {"genre", r.genre},
        {"strategy", r.strategy},
        {"turn_index", r.turn_index},
        {"aspect", aspect_name(r.aspect)},
        {"runs", r.runs},
        {"mean", r.mean()},
        {"valid", r.valid},
    };
}

ordered_json to_json(const StrategyStats& r) {
    ordered_json j{
        {"strategy_family", r.strategy_family},
        {"language", language_name(r.language)},
        {"n", r.n},
        {"mean_f", r.mean_f},
        {"std_f", r.std_f},
        {"mean_c", r.mean_c},
        {"std_c", r.std_c},
    };
    if (r.external_qe.has_value()) {
        j["external_qe"] = *r.external_qe;
    } else {
        j["external_qe"] = nullptr;
    }
    return j;
}

ordered_json to_json(const SpanRecord& r) {
    return ordered_json{
        {"idiom_id", r.idiom_id},
        {"sentence_index", r.sentence_index},
        {"genre", r.genre},
        {"strategy", r.strategy},
        {"turn_index", r.turn_index},
        {"span_text", r.span_text},
        {"is_substring", r.is_substring},
    };
}

ordered_json to_json(const ParagraphRecord& r) {
    return ordered_json{
        {"idiom_id", r.idiom_id},
        {"sentence_index", r.sentence_index},
        {"genre", r.genre},
        {"text", r.text},
        {"contains_idiom", r.contains_idiom},
        {"contains_sentence", r.contains_sentence},
    };
}

template <typename T>
T field(const ordered_json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) {
        throw std::runtime_error(std::string("missing field '") + name + "'");
    }
    return it->get<T>();
}

void from_json(const ordered_json& j, Idiom& r) {
    r.id = field<std::string>(j, "id");
    r.surface = field<std::string>(j, "surface");
    auto lang = language_from_name(field<std::string>(j, "language"));
    if (!lang) throw std::runtime_error("unknown language tag");
    r.language = *lang;
    r.is_plausible = field<bool>(j, "is_plausible");
}

void from_json(const ordered_json& j, SentenceRecord& r) {
    r.idiom_id = field<std::string>(j, "idiom_id");
    r.index = field<int>(j, "index");
    r.text = field<std::string>(j, "text");
    r.contains_idiom = field<bool>(j, "contains_idiom");
}

void from_json(const ordered_json& j, TranslationRecord& r) {
    r.idiom_id = field<std::string>(j, "idiom_id");
    r.sentence_index = field<int>(j, "sentence_index");
    r.genre = field<std::string>(j, "genre");
    r.strategy = field<std::string>(j, "strategy");
    r.turn_index = field<int>(j, "turn_index");
    r.text = field<std::string>(j, "text");
    r.raw_response = field<std::string>(j, "raw_response");
    r.failed = field<bool>(j, "failed");
    r.error = field<std::string>(j, "error");
}

void from_json(const ordered_json& j, AspectScore& r) {
    r.idiom_id = field<std::string>(j, "idiom_id");
    r.sentence_index = field<int>(j, "sentence_index");
    r.genre = field<std::string>(j, "genre");
    r.strategy = field<std::string>(j, "strategy");
    r.turn_index = field<int>(j, "turn_index");
    auto aspect = aspect_from_name(field<std::string>(j, "aspect"));
    if (!aspect) throw std::runtime_error("unknown aspect");
    r.aspect = *aspect;
    auto runs = field<std::vector<int>>(j, "runs");
    if (runs.size() != r.runs.size()) throw std::runtime_error("runs must have 5 entries");
    std::copy(runs.begin(), runs.end(), r.runs.begin());
    r.valid = field<bool>(j, "valid");
    if (r.valid) r.validate();
    // mean is derived; recomputed rather than read.
}

void from_json(const ordered_json& j, StrategyStats& r) {
    r.strategy_family = field<std::string>(j, "strategy_family");
    auto lang = language_from_name(field<std::string>(j, "language"));
    if (!lang) throw std::runtime_error("unknown language tag");
    r.language = *lang;
    r.n = field<long long>(j, "n");
    r.mean_f = field<double>(j, "mean_f");
    r.std_f = field<double>(j, "std_f");
    r.mean_c = field<double>(j, "mean_c");
    r.std_c = field<double>(j, "std_c");
    auto it = j.find("external_qe");
    if (it == j.end()) throw std::runtime_error("missing field 'external_qe'");
    if (it->is_null()) {
        r.external_qe = std::nullopt;
    } else {
        r.external_qe = it->get<double>();
    }
}

void from_json(const ordered_json& j, SpanRecord& r) {
    r.idiom_id = field<std::string>(j, "idiom_id");
    r.sentence_index = field<int>(j, "sentence_index");
    r.genre = field<std::string>(j, "genre");
    r.strategy = field<std::string>(j, "strategy");
    r.turn_index = field<int>(j, "turn_index");
    r.span_text = field<std::string>(j, "span_text");
    r.is_substring = field<bool>(j, "is_substring");
}

void from_json(const ordered_json& j, ParagraphRecord& r) {
    r.idiom_id = field<std::string>(j, "idiom_id");
    r.sentence_index = field<int>(j, "sentence_index");
    r.genre = field<std::string>(j, "genre");
    r.text = field<std::string>(j, "text");
    r.contains_idiom = field<bool>(j, "contains_idiom");
    r.contains_sentence = field<bool>(j, "contains_sentence");
}

template <typename Record>
std::size_t write_jsonl(const std::vector<Record>& records,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw JsonlError("cannot open for writing: " + path.string(), 0);
    }
    std::size_t index = 0;
    for (const Record& record : records) {
        ordered_json j;
        try {
            j = to_json(record);
        } catch (const std::exception& e) {
            throw JsonlError("record " + std::to_string(index) +
                                 " failed to serialize: " + e.what(),
                             index + 1);
        }
        out << j.dump() << '\n';
        if (!out) {
            throw JsonlError("write failure at record " + std::to_string(index) +
                                 ": " + path.string(),
                             index + 1);
        }
        ++index;
    }
    out.flush();
    if (!out) throw JsonlError("flush failure: " + path.string(), 0);
    return records.size();
}

template <typename Record>
std::vector<Record> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw JsonlError("cannot open for reading: " + path.string(), 0);
    }
    std::vector<Record> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw JsonlError("malformed JSON at line " + std::to_string(line_no) +
                                 " of " + path.string(),
                             line_no);
        }
        Record record;
        try {
            from_json(j, record);
        } catch (const std::exception& e) {
            throw JsonlError("line " + std::to_string(line_no) + " of " +
                                 path.string() + ": " + e.what(),
                             line_no);
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::string manifest_mode_check(const std::string& mode) {
    if (mode != "live" && mode != "replay" && !mode.empty()) {
        throw std::runtime_error("unknown backend mode: " + mode);
    }
    return mode;
}

}  // namespace

std::size_t write_records(const std::vector<Idiom>& r, const std::filesystem::path& p) { return write_jsonl(r, p); }
std::size_t write_records(const std::vector<SentenceRecord>& r, const std::filesystem::path& p) { return write_jsonl(r, p); }
std::size_t write_records(const std::vector<TranslationRecord>& r, const std::filesystem::path& p) { return write_jsonl(r, p); }
std::size_t write_records(const std::vector<AspectScore>& r, const std::filesystem::path& p) { return write_jsonl(r, p); }
std::size_t write_records(const std::vector<StrategyStats>& r, const std::filesystem::path& p) { return write_jsonl(r, p); }
std::size_t write_records(const std::vector<SpanRecord>& r, const std::filesystem::path& p) { return write_jsonl(r, p); }
std::size_t write_records(const std::vector<ParagraphRecord>& r, const std::filesystem::path& p) { return write_jsonl(r, p); }

template <> std::vector<Idiom> read_records<Idiom>(const std::filesystem::path& p) { return read_jsonl<Idiom>(p); }
template <> std::vector<SentenceRecord> read_records<SentenceRecord>(const std::filesystem::path& p) { return read_jsonl<SentenceRecord>(p); }
template <> std::vector<TranslationRecord> read_records<TranslationRecord>(const std::filesystem::path& p) { return read_jsonl<TranslationRecord>(p); }
template <> std::vector<AspectScore> read_records<AspectScore>(const std::filesystem::path& p) { return read_jsonl<AspectScore>(p); }
template <> std::vector<StrategyStats> read_records<StrategyStats>(const std::filesystem::path& p) { return read_jsonl<StrategyStats>(p); }
template <> std::vector<SpanRecord> read_records<SpanRecord>(const std::filesystem::path& p) { return read_jsonl<SpanRecord>(p); }
template <> std::vector<ParagraphRecord> read_records<ParagraphRecord>(const std::filesystem::path& p) { return read_jsonl<ParagraphRecord>(p); }

void RunManifest::save(const std::filesystem::path& path) const {
    ordered_json totals = ordered_json::object();
    for (const auto& [model, counts] : token_totals) {
        totals[model] = ordered_json{
            {"prompt_tokens", counts.prompt_tokens},
            {"completion_tokens", counts.completion_tokens},
        };
    }
    ordered_json counters_json = ordered_json::object();
    for (const auto& [name, value] : counters) counters_json[name] = value;
    ordered_json j{
        {"run_id", run_id},
        {"generation_model", generation_model},
        {"judge_model", judge_model},
        {"temperature", temperature},
        {"rng_seed", rng_seed},
        {"backend_mode", manifest_mode_check(backend_mode)},
        {"started_at", started_at},
        {"finished_at", finished_at},
        {"counters", counters_json},
        {"token_totals", totals},
    };
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw JsonlError("cannot open for writing: " + path.string(), 0);
    out << j.dump(2) << '\n';
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw JsonlError("cannot open for reading: " + path.string(), 0);
    ordered_json j = ordered_json::parse(in, nullptr, false);
    if (j.is_discarded()) throw JsonlError("malformed manifest: " + path.string(), 0);
    RunManifest m;
    m.run_id = field<std::string>(j, "run_id");
    m.generation_model = field<std::string>(j, "generation_model");
    m.judge_model = field<std::string>(j, "judge_model");
    m.temperature = field<double>(j, "temperature");
    m.rng_seed = field<std::uint64_t>(j, "rng_seed");
    m.backend_mode = manifest_mode_check(field<std::string>(j, "backend_mode"));
    m.started_at = field<std::string>(j, "started_at");
    m.finished_at = field<std::string>(j, "finished_at");
    for (const auto& [name, value] : j.at("counters").items()) {
        m.counters[name] = value.get<long long>();
    }
    for (const auto& [model, counts] : j.at("token_totals").items()) {
        m.token_totals[model] = TokenCounts{
            counts.at("prompt_tokens").get<long long>(),
            counts.at("completion_tokens").get<long long>(),
        };
    }
    return m;
}

bool operator==(const Idiom& a, const Idiom& b) {
    return a.id == b.id && a.surface == b.surface && a.language == b.language &&
           a.is_plausible == b.is_plausible;
}

bool operator==(const SentenceRecord& a, const SentenceRecord& b) {
    return a.idiom_id == b.idiom_id && a.index == b.index && a.text == b.text &&
           a.contains_idiom == b.contains_idiom;
}

bool operator==(const TranslationRecord& a, const TranslationRecord& b) {
    return a.idiom_id == b.idiom_id && a.sentence_index == b.sentence_index &&
           a.genre == b.genre && a.strategy == b.strategy &&
           a.turn_index == b.turn_index && a.text == b.text &&
           a.raw_response == b.raw_response && a.failed == b.failed &&
           a.error == b.error;
}

bool operator==(const AspectScore& a, const AspectScore& b) {
    return a.idiom_id == b.idiom_id && a.sentence_index == b.sentence_index &&
           a.genre == b.genre && a.strategy == b.strategy &&
           a.turn_index == b.turn_index && a.aspect == b.aspect &&
           a.runs == b.runs && a.valid == b.valid;
}

bool operator==(const StrategyStats& a, const StrategyStats& b) {
    return a.strategy_family == b.strategy_family && a.language == b.language &&
           a.n == b.n && a.mean_f == b.mean_f && a.std_f == b.std_f &&
           a.mean_c == b.mean_c && a.std_c == b.std_c &&
           a.external_qe == b.external_qe;
}

bool operator==(const SpanRecord& a, const SpanRecord& b) {
    return a.idiom_id == b.idiom_id && a.sentence_index == b.sentence_index &&
           a.genre == b.genre && a.strategy == b.strategy &&
           a.turn_index == b.turn_index && a.span_text == b.span_text &&
           a.is_substring == b.is_substring;
}

bool operator==(const ParagraphRecord& a, const ParagraphRecord& b) {
    return a.idiom_id == b.idiom_id && a.sentence_index == b.sentence_index &&
           a.genre == b.genre && a.text == b.text &&
           a.contains_idiom == b.contains_idiom &&
           a.contains_sentence == b.contains_sentence;
}

}  // namespace idiomct
