#include "idiomct/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>
#include <unordered_set>

#include "idiomct/textparse.hpp"

namespace idiomct::pipeline {

using backends::Backend;
using backends::BackendError;
using backends::BackendRole;
using prompts::TemplateSet;

void PipelinePlan::validate() const {
    if (sentences_per_idiom < 1) {
        throw std::invalid_argument("sentences_per_idiom must be >= 1");
    }
    if (strategies.empty()) throw std::invalid_argument("strategy set is empty");
    for (Strategy s : strategies) strategy_name(s);  // throws on junk values
    if (paragraphs.idiom_count < 0) {
        throw std::invalid_argument("paragraph idiom count must be >= 0");
    }
    for (const Idiom& idiom : idioms) {
        if (idiom.surface.empty()) throw std::invalid_argument("idiom with empty surface");
    }
}

// ---------------------------------------------------------------------------
// Mining
// ---------------------------------------------------------------------------

namespace {

// Cuts pinyin/explanation annotations off a listed idiom: anything from the
// first space, colon, or opening parenthesis, plus trailing list punctuation.
std::string strip_annotation(std::string_view item) {
    static const std::string_view cuts[] = {"(", "\xef\xbc\x88", ":", "\xef\xbc\x9a",
                                            " ", "\t"};
    std::size_t cut = item.size();
    for (std::string_view c : cuts) {
        std::size_t pos = item.find(c);
        if (pos != std::string_view::npos) cut = std::min(cut, pos);
    }
    item = item.substr(0, cut);
    static const std::string_view trailing[] = {
        "\xe3\x80\x82",  // 。
        "\xef\xbc\x8c",  // ，
        "\xe3\x80\x81",  // 、
        ".", ",", ";",
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::string_view t : trailing) {
            if (item.size() >= t.size() && item.substr(item.size() - t.size()) == t) {
                item.remove_suffix(t.size());
                changed = true;
            }
        }
    }
    return std::string(textparse::trim(item));
}

}  // namespace

MineReport mine_idioms(Backend& backend, const TemplateSet& templates,
                       std::span<const std::string> syllables, int per_syllable,
                       int seeds_per_syllable, const PinyinLookup* pinyin) {
    if (syllables.empty()) throw std::invalid_argument("syllable list is empty");
    if (per_syllable < 1 || seeds_per_syllable < 1) {
        throw std::invalid_argument("mining counts must be >= 1");
    }

    MineReport report;
    std::unordered_set<std::string> seen;
    for (const std::string& syllable : syllables) {
        auto messages = prompts::render_mining(templates, syllable, per_syllable);
        for (int seed = 0; seed < seeds_per_syllable; ++seed) {
            ++report.queries;
            std::string response;
            try {
                response = backend.complete(messages, BackendRole::Generator).text;
            } catch (const BackendError& e) {
                report.errors.push_back("mining '" + syllable + "' query " +
                                        std::to_string(seed) + ": " + e.what());
                continue;
            }
            auto parsed = textparse::parse_numbered_list(response, per_syllable);
            if (parsed.count_mismatch && !parsed.truncated) ++report.shortfall_queries;
            for (const std::string& raw : parsed.items) {
                std::string surface = strip_annotation(raw);
                if (surface.empty()) continue;
                if (!seen.insert(surface).second) continue;
                MinedCandidate candidate;
                candidate.syllable = syllable;
                if (pinyin != nullptr) {
                    auto actual = (*pinyin)(surface);
                    candidate.initial_mismatch = actual.has_value() && *actual != syllable;
                }
                candidate.surface = std::move(surface);
                report.candidates.push_back(std::move(candidate));
            }
        }
    }
    return report;
}

std::string_view verify_outcome_name(VerifyOutcome v) {
    switch (v) {
        case VerifyOutcome::Real: return "Real";
        case VerifyOutcome::Fake: return "Fake";
        case VerifyOutcome::Unparseable: return "Unparseable";
    }
    throw std::invalid_argument("unknown verify outcome");
}

namespace {

bool word_at(std::string_view text, std::size_t pos, std::string_view word) {
    if (pos + word.size() > text.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(text[pos + i])) != word[i]) return false;
    }
    auto is_letter = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
    if (pos > 0 && is_letter(text[pos - 1])) return false;
    if (pos + word.size() < text.size() && is_letter(text[pos + word.size()])) return false;
    return true;
}

}  // namespace

VerifyOutcome verify_idiom(Backend& backend, const TemplateSet& templates,
                           std::string_view candidate) {
    auto messages = prompts::render_verification(templates, candidate);
    std::string response = backend.complete(messages, BackendRole::Generator).text;
    for (std::size_t i = 0; i < response.size(); ++i) {
        if (word_at(response, i, "yes")) return VerifyOutcome::Real;
        if (word_at(response, i, "no")) return VerifyOutcome::Fake;
    }
    return VerifyOutcome::Unparseable;
}

// ---------------------------------------------------------------------------
// Sentences
// ---------------------------------------------------------------------------

SentenceGenResult generate_sentences(Backend& backend, const TemplateSet& templates,
                                     const Idiom& idiom) {
    SentenceGenResult result;
    result.records.reserve(kSentencesPerIdiom);
    for (int i = 0; i < kSentencesPerIdiom; ++i) {
        result.records.push_back(SentenceRecord{idiom.id, i, "", false});
    }

    std::string response;
    try {
        auto messages = prompts::render_sentence_gen(templates, idiom);
        response = backend.complete(messages, BackendRole::Generator).text;
    } catch (const BackendError& e) {
        // Keep the 10 empty placeholders so downstream counts stay exact.
        result.backend_failed = true;
        result.error = e.what();
        return result;
    }

    auto parsed = textparse::parse_numbered_list(response, kSentencesPerIdiom);
    result.count_mismatch = parsed.count_mismatch && !parsed.truncated;
    result.truncated = parsed.truncated;

    // A single unenumerated line where 10 sentences were requested is a
    // refusal; keep the empty placeholders.
    if (parsed.items.size() == 1 && parsed.dropped.empty() &&
        textparse::trim(response) == parsed.items.front()) {
        result.error = "refusal";
        return result;
    }

    for (std::size_t i = 0; i < parsed.items.size(); ++i) {
        SentenceRecord& record = result.records[i];
        record.text = parsed.items[i];
        record.contains_idiom = textparse::contains_exact(record.text, idiom.surface);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Sentence translation
// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic 5-of-n sample; seed derivation pins the choice to the
// (run seed, sentence, strategy) triple so subset re-runs agree.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> indices(n);
    for (std::size_t i = 0; i < n; ++i) indices[i] = i;
    std::uint64_t state = seed;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(splitmix64(state) % (n - i));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(k);
    return indices;
}

std::uint64_t derive_seed(std::uint64_t base, const SentenceRecord& sentence,
                          Strategy strategy) {
    std::uint64_t h = fnv1a64(std::to_string(base));
    h = fnv1a64(sentence.idiom_id, h);
    h = fnv1a64(std::to_string(sentence.index), h);
    h = fnv1a64(strategy_name(strategy), h);
    return h;
}

TranslationRecord base_record(const SentenceRecord& sentence, Strategy strategy) {
    TranslationRecord record;
    record.idiom_id = sentence.idiom_id;
    record.sentence_index = sentence.index;
    record.strategy = std::string(strategy_name(strategy));
    record.turn_index = strategy_family(strategy) == "DiversityDialog" ? 1 : 0;
    return record;
}

void fill_text(TranslationRecord& record, std::string text, std::string raw) {
    record.raw_response = std::move(raw);
    record.text = std::move(text);
    if (record.text.empty()) {
        record.failed = true;
        record.error = "empty_translation";
    }
}

void fill_failure(TranslationRecord& record, std::string code) {
    record.failed = true;
    record.error = std::move(code);
}

int diversity_index(Strategy s) {
    switch (s) {
        case Strategy::DiversityExplicit1:
        case Strategy::DiversityDialog1: return 0;
        case Strategy::DiversityExplicit2:
        case Strategy::DiversityDialog2: return 1;
        case Strategy::DiversityExplicit3:
        case Strategy::DiversityDialog3: return 2;
        case Strategy::DiversityExplicit4:
        case Strategy::DiversityDialog4: return 3;
        case Strategy::DiversityExplicit5:
        case Strategy::DiversityDialog5: return 4;
        default: throw std::invalid_argument("not an indexed diversity strategy");
    }
}

// Seeded 5-example draw from the same-language slice of the pool; nullopt
// when the slice is too small.
std::optional<std::vector<prompts::FewShotExample>> sample_fewshot(
    std::span<const prompts::FewShotExample> pool, Language language,
    const SentenceRecord& sentence, Strategy strategy, std::uint64_t seed) {
    std::vector<const prompts::FewShotExample*> eligible;
    for (const prompts::FewShotExample& example : pool) {
        if (example.language == language) eligible.push_back(&example);
    }
    if (eligible.size() < prompts::kFewShotExampleCount) return std::nullopt;
    auto picks = sample_indices(eligible.size(), prompts::kFewShotExampleCount,
                                derive_seed(seed, sentence, strategy));
    std::vector<prompts::FewShotExample> examples;
    for (std::size_t i : picks) examples.push_back(*eligible[i]);
    return examples;
}

}  // namespace

std::vector<TranslationRecord> translate_sentence(Backend& backend,
                                                  const TemplateSet& templates,
                                                  const Idiom& idiom,
                                                  const SentenceRecord& sentence,
                                                  const TranslateOptions& options) {
    if (!sentence.contains_idiom && !options.include_containment_failures) {
        throw std::invalid_argument(
            "translate_sentence: sentence fails idiom containment and must be skipped");
    }
    if (sentence.text.empty()) {
        throw std::invalid_argument("translate_sentence: sentence text is empty");
    }
    if (sentence.idiom_id != idiom.id) {
        throw std::invalid_argument("translate_sentence: sentence does not match idiom");
    }

    std::set<Strategy> requested(options.strategies.begin(), options.strategies.end());
    const Language language = idiom.language;

    // The DiversityExplicit exchange is a dependency of DiversityDialog even
    // when no explicit-variant record was requested.
    bool need_diversity_explicit = false;
    bool need_diversity_dialog = false;
    for (Strategy s : requested) {
        std::string_view family = strategy_family(s);
        if (family == "DiversityExplicit") need_diversity_explicit = true;
        if (family == "DiversityDialog") need_diversity_dialog = true;
    }

    std::vector<std::string> explicit_items(5);
    std::vector<std::string> dialog_items(5);
    std::string explicit_raw, dialog_raw;
    std::string explicit_error, dialog_error;
    prompts::Exchange explicit_exchange;

    if (need_diversity_explicit || need_diversity_dialog) {
        auto messages = prompts::render_translation(
            templates, Strategy::DiversityExplicit1, sentence.text, language);
        try {
            explicit_raw = backend.complete(messages, BackendRole::Generator).text;
            auto parsed = textparse::parse_numbered_list(explicit_raw, 5);
            for (std::size_t i = 0; i < parsed.items.size(); ++i) {
                explicit_items[i] = parsed.items[i];
            }
            explicit_exchange = prompts::Exchange{messages.front().content, explicit_raw};
        } catch (const BackendError& e) {
            explicit_error = e.what();
        }
    }
    if (need_diversity_dialog) {
        if (!explicit_error.empty()) {
            dialog_error = "missing_prior_turn";
        } else {
            try {
                auto messages = prompts::render_translation(templates,
                                                            Strategy::DiversityDialog1,
                                                            sentence.text, language,
                                                            {}, &explicit_exchange);
                dialog_raw = backend.complete(messages, BackendRole::Generator).text;
                auto parsed = textparse::parse_numbered_list(dialog_raw, 5);
                for (std::size_t i = 0; i < parsed.items.size(); ++i) {
                    dialog_items[i] = parsed.items[i];
                }
            } catch (const BackendError& e) {
                dialog_error = e.what();
            }
        }
    }

    std::vector<TranslationRecord> records;
    records.reserve(requested.size());
    for (Strategy strategy : all_strategies()) {
        if (!requested.count(strategy)) continue;
        TranslationRecord record = base_record(sentence, strategy);
        std::string_view family = strategy_family(strategy);

        if (is_engine_strategy(strategy)) {
            try {
                auto engine = strategy == Strategy::Google ? backends::MtEngine::Google
                                                           : backends::MtEngine::DeepL;
                std::string text = backend.mt_translate(engine, sentence.text, language);
                fill_text(record, text, text);
            } catch (const BackendError& e) {
                fill_failure(record, std::string("backend_error: ") + e.what());
            }
        } else if (family == "DiversityExplicit") {
            if (!explicit_error.empty()) {
                fill_failure(record, "backend_error: " + explicit_error);
            } else {
                auto i = static_cast<std::size_t>(diversity_index(strategy));
                record.raw_response = explicit_raw;
                if (explicit_items[i].empty()) {
                    fill_failure(record, "count_mismatch");
                } else {
                    record.text = explicit_items[i];
                }
            }
        } else if (family == "DiversityDialog") {
            if (!dialog_error.empty()) {
                fill_failure(record, dialog_error.rfind("missing", 0) == 0
                                         ? dialog_error
                                         : "backend_error: " + dialog_error);
            } else {
                auto i = static_cast<std::size_t>(diversity_index(strategy));
                record.raw_response = dialog_raw;
                if (dialog_items[i].empty()) {
                    fill_failure(record, "count_mismatch");
                } else {
                    record.text = dialog_items[i];
                }
            }
        } else if (family == "FewShot" || family == "FewShotCreatively") {
            auto examples = sample_fewshot(options.fewshot_pool, language, sentence,
                                           strategy, options.rng_seed);
            if (!examples.has_value()) {
                fill_failure(record, "fewshot_pool_unavailable");
            } else {
                try {
                    auto messages = prompts::render_translation(templates, strategy,
                                                                sentence.text, language,
                                                                *examples);
                    std::string raw = backend.complete(messages, BackendRole::Generator).text;
                    fill_text(record, std::string(textparse::trim(raw)), raw);
                } catch (const BackendError& e) {
                    fill_failure(record, std::string("backend_error: ") + e.what());
                }
            }
        } else {
            try {
                auto messages =
                    prompts::render_translation(templates, strategy, sentence.text, language);
                std::string raw = backend.complete(messages, BackendRole::Generator).text;
                std::string text;
                if (strategy == Strategy::Succinct) {
                    // The succinct prompt tends to attract an explanation.
                    text = textparse::strip_explanation(raw);
                } else {
                    text = std::string(textparse::trim(raw));
                }
                fill_text(record, std::move(text), std::move(raw));
            } catch (const BackendError& e) {
                fill_failure(record, std::string("backend_error: ") + e.what());
            }
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<std::vector<prompts::Message>> render_translation_plan(
    const prompts::TemplateSet& templates, const Idiom& idiom,
    const SentenceRecord& sentence, const TranslateOptions& options) {
    if (!sentence.contains_idiom && !options.include_containment_failures) {
        throw std::invalid_argument(
            "render_translation_plan: sentence fails idiom containment");
    }
    if (sentence.text.empty()) {
        throw std::invalid_argument("render_translation_plan: sentence text is empty");
    }

    std::set<Strategy> requested(options.strategies.begin(), options.strategies.end());
    const Language language = idiom.language;
    std::vector<std::vector<prompts::Message>> plan;
    bool emitted_explicit = false, emitted_dialog = false;

    bool dialog_requested = false;
    for (Strategy s : requested) {
        if (strategy_family(s) == "DiversityDialog") dialog_requested = true;
    }

    for (Strategy strategy : all_strategies()) {
        if (!requested.count(strategy)) continue;
        std::string_view family = strategy_family(strategy);
        if (is_engine_strategy(strategy)) continue;
        if (family == "DiversityExplicit" || (family == "DiversityDialog" && dialog_requested)) {
            if (!emitted_explicit) {
                plan.push_back(prompts::render_translation(
                    templates, Strategy::DiversityExplicit1, sentence.text, language));
                emitted_explicit = true;
            }
            if (family == "DiversityExplicit") continue;
        }
        if (family == "DiversityDialog") {
            if (!emitted_dialog) {
                // The real follow-up carries the live exchange; audit shows
                // just the added user turn.
                plan.push_back({prompts::Message{prompts::Role::User,
                                                 templates.at("diversity_dialog")}});
                emitted_dialog = true;
            }
            continue;
        }
        if (family == "FewShot" || family == "FewShotCreatively") {
            auto examples = sample_fewshot(options.fewshot_pool, language, sentence,
                                           strategy, options.rng_seed);
            if (examples.has_value()) {
                plan.push_back(prompts::render_translation(templates, strategy,
                                                           sentence.text, language,
                                                           *examples));
            }
            continue;
        }
        plan.push_back(
            prompts::render_translation(templates, strategy, sentence.text, language));
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Paragraph pipeline
// ---------------------------------------------------------------------------

ParagraphGenResult generate_paragraphs(Backend& backend, const TemplateSet& templates,
                                       const Idiom& idiom, const SentenceRecord& sentence,
                                       std::span<const Genre> genres) {
    if (sentence.text.empty()) {
        throw std::invalid_argument("generate_paragraphs: sentence text is empty");
    }
    ParagraphGenResult result;
    for (Genre genre : genres) {
        ParagraphRecord record;
        record.idiom_id = idiom.id;
        record.sentence_index = sentence.index;
        record.genre = std::string(genre_name(genre));
        try {
            auto messages =
                prompts::render_paragraph_gen(templates, genre, idiom.language, sentence.text);
            std::string response = backend.complete(messages, BackendRole::Generator).text;
            record.text = std::string(textparse::trim(response));
            if (!record.text.empty()) {
                record.contains_idiom = textparse::contains_exact(record.text, idiom.surface);
                record.contains_sentence =
                    textparse::contains_exact(record.text, sentence.text);
            }
        } catch (const BackendError& e) {
            result.errors.push_back(std::string(genre_name(genre)) + ": " + e.what());
        }
        result.records.push_back(std::move(record));
    }
    return result;
}

void populate_cot_cache(Backend& backend, const TemplateSet& templates, Language language,
                        prompts::CotInstructionCache& cache) {
    for (prompts::CotAspect aspect :
         {prompts::CotAspect::Faithful, prompts::CotAspect::Creative,
          prompts::CotAspect::Theme}) {
        if (cache.has(aspect, language)) continue;
        auto messages = prompts::render_instruction_gen(templates, aspect, language);
        std::string response = backend.complete(messages, BackendRole::Generator).text;
        cache.put(aspect, language, std::string(textparse::trim(response)));
    }
}

std::vector<TranslationRecord> translate_paragraph(Backend& backend,
                                                   const TemplateSet& templates,
                                                   const Idiom& idiom,
                                                   const ParagraphRecord& paragraph,
                                                   const prompts::CotInstructionCache& cache) {
    if (paragraph.text.empty()) {
        throw std::invalid_argument("translate_paragraph: paragraph text is empty");
    }
    if (paragraph.idiom_id != idiom.id) {
        throw std::invalid_argument("translate_paragraph: paragraph does not match idiom");
    }

    std::vector<TranslationRecord> records;
    std::vector<prompts::Exchange> dialog;  // grows across the multi-turn kinds

    for (ParagraphKind kind : kAllParagraphKinds) {
        TranslationRecord record;
        record.idiom_id = paragraph.idiom_id;
        record.sentence_index = paragraph.sentence_index;
        record.genre = paragraph.genre;
        record.strategy = std::string(paragraph_kind_name(kind));

        bool multi_turn_followup = kind == ParagraphKind::CreativeMultiTurn ||
                                   kind == ParagraphKind::ThemeMultiTurn;
        record.turn_index = kind == ParagraphKind::CreativeMultiTurn ? 1
                            : kind == ParagraphKind::ThemeMultiTurn  ? 2
                                                                     : 0;
        std::size_t required_turns = kind == ParagraphKind::CreativeMultiTurn ? 1
                                     : kind == ParagraphKind::ThemeMultiTurn  ? 2
                                                                              : 0;
        if (multi_turn_followup && dialog.size() < required_turns) {
            fill_failure(record, "missing_prior_turn");
            records.push_back(std::move(record));
            continue;
        }

        auto messages = prompts::render_paragraph_prompt(templates, kind, idiom.language,
                                                         idiom, paragraph.text, cache, dialog);
        try {
            std::string raw = backend.complete(messages, BackendRole::Generator).text;
            fill_text(record, std::string(textparse::trim(raw)), raw);
            bool multi_turn = multi_turn_followup || kind == ParagraphKind::FaithfulMultiTurn;
            if (multi_turn && !record.failed) {
                dialog.push_back(prompts::Exchange{messages.back().content, raw});
            }
        } catch (const BackendError& e) {
            fill_failure(record, std::string("backend_error: ") + e.what());
        }
        records.push_back(std::move(record));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Canonical ordering
// ---------------------------------------------------------------------------

int strategy_order(std::string_view name) {
    const auto& strategies = all_strategies();
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        if (strategy_name(strategies[i]) == name) return static_cast<int>(i);
    }
    for (std::size_t i = 0; i < kAllParagraphKinds.size(); ++i) {
        if (paragraph_kind_name(kAllParagraphKinds[i]) == name) {
            return kStrategyCount + static_cast<int>(i);
        }
    }
    return kStrategyCount + 100;  // unknown names sort last, ties by name below
}

int genre_order(std::string_view name) {
    if (name.empty()) return 0;
    for (std::size_t i = 0; i < kAllGenres.size(); ++i) {
        if (genre_name(kAllGenres[i]) == name) return static_cast<int>(i) + 1;
    }
    return static_cast<int>(kAllGenres.size()) + 1;
}

namespace {

template <typename Record>
std::tuple<const std::string&, int, int, int, std::string_view, int> translation_key(
    const Record& r) {
    return {r.idiom_id, r.sentence_index, genre_order(r.genre), strategy_order(r.strategy),
            std::string_view(r.strategy), r.turn_index};
}

}  // namespace

bool canonical_less(const SentenceRecord& a, const SentenceRecord& b) {
    return std::tie(a.idiom_id, a.index) < std::tie(b.idiom_id, b.index);
}

bool canonical_less(const TranslationRecord& a, const TranslationRecord& b) {
    return translation_key(a) < translation_key(b);
}

bool canonical_less(const AspectScore& a, const AspectScore& b) {
    auto ka = translation_key(a);
    auto kb = translation_key(b);
    if (ka != kb) return ka < kb;
    return static_cast<int>(a.aspect) < static_cast<int>(b.aspect);
}

bool canonical_less(const SpanRecord& a, const SpanRecord& b) {
    return translation_key(a) < translation_key(b);
}

bool canonical_less(const ParagraphRecord& a, const ParagraphRecord& b) {
    return std::tie(a.idiom_id, a.sentence_index) < std::tie(b.idiom_id, b.sentence_index) ||
           (std::tie(a.idiom_id, a.sentence_index) == std::tie(b.idiom_id, b.sentence_index) &&
            genre_order(a.genre) < genre_order(b.genre));
}

}  // namespace idiomct::pipeline
