#pragma once
// Domain records for the idiom translation dataset factory plus the JSONL
// persistence layer. Records are immutable values once constructed; files are
// one JSON object per line, UTF-8, LF-terminated, fields in a fixed order so
// identical inputs always produce byte-identical files.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace idiomct {

// 64-bit FNV-1a, used for stable content ids and request fingerprints.
std::uint64_t fnv1a64(std::string_view data,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

// ---------------------------------------------------------------------------
// Languages
// ---------------------------------------------------------------------------

// PlausibleChinese tags GPT-invented fake idioms that pass the model's own
// realness check; prompts still say "Chinese" for them.
enum class Language : std::uint8_t {
    Chinese,
    Japanese,
    Korean,
    PlausibleChinese,
};

inline constexpr std::array<Language, 4> kAllLanguages = {
    Language::Chinese,
    Language::Japanese,
    Language::Korean,
    Language::PlausibleChinese,
};

std::string_view language_name(Language lang);
// The word substituted for <LANGUAGE> in prompts. PlausibleChinese -> "Chinese".
std::string_view language_prompt_word(Language lang);
std::optional<Language> language_from_name(std::string_view name);

// ---------------------------------------------------------------------------
// Idioms and generated contexts
// ---------------------------------------------------------------------------

struct Idiom {
    std::string id;          // hex content hash of surface + language
    std::string surface;     // non-empty, no surrounding whitespace
    Language language = Language::Chinese;
    bool is_plausible = false;  // true iff language == PlausibleChinese

    // Validates the surface, derives id and is_plausible.
    static Idiom make(std::string_view surface, Language language);
    static std::string stable_id(std::string_view surface, Language language);
};

struct SentenceRecord {
    std::string idiom_id;
    int index = 0;             // 0..9
    std::string text;          // empty when generation failed for this slot
    bool contains_idiom = false;  // exact substring test, no normalization
};

inline constexpr int kSentencesPerIdiom = 10;

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

// The 27 per-sentence translation strategies: 2 engine baselines plus 25
// prompted variants. Indexed variants (DiversityExplicit1..5, ...) label the
// individual records a single family emits for one sentence.
enum class Strategy : std::uint8_t {
    Google,
    DeepL,
    Baseline,
    DiversityExplicit1,
    DiversityExplicit2,
    DiversityExplicit3,
    DiversityExplicit4,
    DiversityExplicit5,
    DiversityDialog1,
    DiversityDialog2,
    DiversityDialog3,
    DiversityDialog4,
    DiversityDialog5,
    ZeroShotCreatively,
    ContextExplicitNewsReport,
    ContextExplicitRomanceNovel,
    ContextExplicitEverydayConversation,
    ContextExplicitHistoryBook,
    AnalogyNatural,
    AnalogyCreative,
    ShuffleOrder,
    Succinct,
    TwoStep,
    Discontinuous1,
    Discontinuous2,
    FewShot,
    FewShotCreatively,
};

inline constexpr int kStrategyCount = 27;
const std::array<Strategy, kStrategyCount>& all_strategies();

std::string_view strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(std::string_view name);

// Collapses indexed variants: DiversityExplicit3 -> "DiversityExplicit",
// ContextExplicitHistoryBook -> "ContextExplicit". 16 families total.
std::string_view strategy_family(Strategy s);
const std::vector<std::string>& all_strategy_families();
// Records one family contributes per sentence (DiversityExplicit/Dialog 5,
// ContextExplicit 4, everything else 1). Families sum to 27.
int family_multiplicity(std::string_view family);
bool is_engine_strategy(Strategy s);

// ---------------------------------------------------------------------------
// Paragraph pipeline enums
// ---------------------------------------------------------------------------

enum class Genre : std::uint8_t {
    NewsReport,
    RomanceNovel,
    EverydayConversation,
    HistoryBook,
};

inline constexpr std::array<Genre, 4> kAllGenres = {
    Genre::NewsReport,
    Genre::RomanceNovel,
    Genre::EverydayConversation,
    Genre::HistoryBook,
};

std::string_view genre_name(Genre g);
// Phrase substituted for <GENRE>: "a news report", "a romance novel", ...
std::string_view genre_phrase(Genre g);
std::optional<Genre> genre_from_name(std::string_view name);

// The 10 paragraph translation prompt kinds: baseline, three aspect-specific
// simple prompts, three step-by-step variants, and a three-turn dialog.
enum class ParagraphKind : std::uint8_t {
    Baseline,
    FaithfulSimple,
    CreativeSimple,
    ThemeSimple,
    FaithfulCot,
    CreativeCot,
    ThemeCot,
    FaithfulMultiTurn,
    CreativeMultiTurn,
    ThemeMultiTurn,
};

inline constexpr std::array<ParagraphKind, 10> kAllParagraphKinds = {
    ParagraphKind::Baseline,          ParagraphKind::FaithfulSimple,
    ParagraphKind::CreativeSimple,    ParagraphKind::ThemeSimple,
    ParagraphKind::FaithfulCot,       ParagraphKind::CreativeCot,
    ParagraphKind::ThemeCot,          ParagraphKind::FaithfulMultiTurn,
    ParagraphKind::CreativeMultiTurn, ParagraphKind::ThemeMultiTurn,
};

std::string_view paragraph_kind_name(ParagraphKind k);
std::optional<ParagraphKind> paragraph_kind_from_name(std::string_view name);

// ---------------------------------------------------------------------------
// Translations and scores
// ---------------------------------------------------------------------------

// One candidate translation of one context under one named strategy. The
// strategy field carries a Strategy name for sentence records and a
// ParagraphKind name for paragraph records; genre is empty for sentence-level
// work. raw_response keeps the unparsed model output for audit.
struct TranslationRecord {
    std::string idiom_id;
    int sentence_index = 0;
    std::string genre;      // "" for sentence-level
    std::string strategy;
    int turn_index = 0;     // 0 single-turn; 1 DiversityDialog; 1..2 paragraph follow-ups
    std::string text;
    std::string raw_response;
    bool failed = false;
    std::string error;      // error code when failed

    // Key identifying the translated unit; used for joins and resume.
    std::string ref_key() const;
};

enum class Aspect : std::uint8_t { Faithfulness, Creativity };

std::string_view aspect_name(Aspect a);
std::optional<Aspect> aspect_from_name(std::string_view name);

// Five judge runs on one translation for one aspect. The mean is sum/5 and is
// recomputed from the runs on load; it is never trusted independently.
struct AspectScore {
    std::string idiom_id;
    int sentence_index = 0;
    std::string genre;
    std::string strategy;
    int turn_index = 0;
    Aspect aspect = Aspect::Faithfulness;
    std::array<int, 5> runs{};  // each in 1..5
    bool valid = true;          // false when a run stayed unparseable after retry

    int run_sum() const;
    double mean() const { return run_sum() / 5.0; }
    int max_run() const;
    void validate() const;  // throws std::invalid_argument on out-of-range runs
    std::string ref_key() const;
};

struct StrategyStats {
    std::string strategy_family;
    Language language = Language::Chinese;
    long long n = 0;
    double mean_f = 0.0;
    double std_f = 0.0;  // population standard deviation
    double mean_c = 0.0;
    double std_c = 0.0;
    // Imported quality-estimation score in [0,1]; never computed here.
    std::optional<double> external_qe;
};

struct SpanRecord {
    std::string idiom_id;
    int sentence_index = 0;
    std::string genre;
    std::string strategy;
    int turn_index = 0;
    std::string span_text;
    bool is_substring = false;  // exact match against the translation text
};

struct ParagraphRecord {
    std::string idiom_id;
    int sentence_index = 0;
    std::string genre;
    std::string text;
    bool contains_idiom = false;
    bool contains_sentence = false;
};

// ---------------------------------------------------------------------------
// Run provenance
// ---------------------------------------------------------------------------

struct TokenCounts {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;

    TokenCounts& operator+=(const TokenCounts& other) {
        prompt_tokens += other.prompt_tokens;
        completion_tokens += other.completion_tokens;
        return *this;
    }
};

// Per-call token usage with cumulative totals per model. Thread-safe.
class CostLedger {
public:
    struct Entry {
        std::string model;
        TokenCounts counts;
    };

    void add(std::string_view model, TokenCounts counts);
    std::vector<Entry> entries() const;
    std::map<std::string, TokenCounts> totals() const;
    TokenCounts total_for(std::string_view model) const;

private:
    mutable std::mutex mutex_;
    std::vector<Entry> entries_;
    std::map<std::string, TokenCounts, std::less<>> totals_;
};

struct RunManifest {
    std::string run_id;
    std::string generation_model;
    std::string judge_model;
    double temperature = 1.0;
    std::uint64_t rng_seed = 0;
    std::string backend_mode;  // "live" | "replay"
    std::string started_at;    // ISO-8601 UTC; pinned to epoch in replay mode
    std::string finished_at;
    std::map<std::string, long long> counters;
    std::map<std::string, TokenCounts> token_totals;

    // Totals must equal the ledger sum; checked before the manifest is written.
    bool totals_match(const CostLedger& ledger) const;
    void save(const std::filesystem::path& path) const;
    static RunManifest load(const std::filesystem::path& path);
};

// ---------------------------------------------------------------------------
// JSONL persistence
// ---------------------------------------------------------------------------

class JsonlError : public std::runtime_error {
public:
    JsonlError(const std::string& message, std::size_t line)
        : std::runtime_error(message), line_(line) {}
    // 1-based line number of the offending record; 0 when not line-specific.
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// One JSON object per line, fixed field order, LF newlines. Returns the
// record count written. Re-running with identical inputs yields
// byte-identical files.
std::size_t write_records(const std::vector<Idiom>& records, const std::filesystem::path& path);
std::size_t write_records(const std::vector<SentenceRecord>& records, const std::filesystem::path& path);
std::size_t write_records(const std::vector<TranslationRecord>& records, const std::filesystem::path& path);
std::size_t write_records(const std::vector<AspectScore>& records, const std::filesystem::path& path);
std::size_t write_records(const std::vector<StrategyStats>& records, const std::filesystem::path& path);
std::size_t write_records(const std::vector<SpanRecord>& records, const std::filesystem::path& path);
std::size_t write_records(const std::vector<ParagraphRecord>& records, const std::filesystem::path& path);

// Round-trip identity: read(write(x)) == x field for field. Malformed lines
// raise JsonlError naming the 1-based line number.
template <typename Record>
std::vector<Record> read_records(const std::filesystem::path& path);

template <> std::vector<Idiom> read_records<Idiom>(const std::filesystem::path& path);
template <> std::vector<SentenceRecord> read_records<SentenceRecord>(const std::filesystem::path& path);
template <> std::vector<TranslationRecord> read_records<TranslationRecord>(const std::filesystem::path& path);
template <> std::vector<AspectScore> read_records<AspectScore>(const std::filesystem::path& path);
template <> std::vector<StrategyStats> read_records<StrategyStats>(const std::filesystem::path& path);
template <> std::vector<SpanRecord> read_records<SpanRecord>(const std::filesystem::path& path);
template <> std::vector<ParagraphRecord> read_records<ParagraphRecord>(const std::filesystem::path& path);

bool operator==(const Idiom& a, const Idiom& b);
bool operator==(const SentenceRecord& a, const SentenceRecord& b);
bool operator==(const TranslationRecord& a, const TranslationRecord& b);
bool operator==(const AspectScore& a, const AspectScore& b);
bool operator==(const StrategyStats& a, const StrategyStats& b);
bool operator==(const SpanRecord& a, const SpanRecord& b);
bool operator==(const ParagraphRecord& a, const ParagraphRecord& b);

}  // namespace idiomct
