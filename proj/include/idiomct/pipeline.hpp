#pragma once
// Orchestrates the generation stages: idiom mining and verification,
// sentence generation, the 27-way translation fan-out, and the paragraph
// pipeline. Every stage isolates per-unit failures into failed records so a
// run never aborts halfway, and emits records in canonical order so replay
// runs are byte-identical.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idiomct/backends.hpp"
#include "idiomct/corpus.hpp"
#include "idiomct/prompts.hpp"

namespace idiomct::pipeline {

struct ParagraphPlan {
    int idiom_count = 20;  // idioms entering the paragraph pipeline
    int sentences_per_idiom = 1;
    std::vector<Genre> genres{kAllGenres.begin(), kAllGenres.end()};
};

struct PipelinePlan {
    std::vector<Idiom> idioms;
    int sentences_per_idiom = kSentencesPerIdiom;
    std::vector<Strategy> strategies{all_strategies().begin(), all_strategies().end()};
    std::vector<Language> languages{kAllLanguages.begin(), kAllLanguages.end()};
    ParagraphPlan paragraphs;
    std::uint64_t rng_seed = 0;

    void validate() const;  // throws std::invalid_argument
};

// ---------------------------------------------------------------------------
// Mining and verification
// ---------------------------------------------------------------------------

struct MinedCandidate {
    std::string surface;
    std::string syllable;          // query syllable that first produced it
    bool initial_mismatch = false; // listed under a syllable it does not start with
};

// Maps an idiom surface to the pinyin syllable of its first character.
// Mining flags initial mismatches only when a lookup is supplied.
using PinyinLookup = std::function<std::optional<std::string>(std::string_view surface)>;

struct MineReport {
    std::vector<MinedCandidate> candidates;  // deduplicated, first-seen order
    int queries = 0;
    int shortfall_queries = 0;  // responses with fewer items than requested
    std::vector<std::string> errors;
};

// seeds_per_syllable identical queries per syllable; numbered lists parsed,
// annotations stripped, duplicates across overlapping prefixes removed.
// Backend errors are collected per query; partial results are kept.
MineReport mine_idioms(backends::Backend& backend, const prompts::TemplateSet& templates,
                       std::span<const std::string> syllables, int per_syllable = 200,
                       int seeds_per_syllable = 5, const PinyinLookup* pinyin = nullptr);

enum class VerifyOutcome : std::uint8_t { Real, Fake, Unparseable };

std::string_view verify_outcome_name(VerifyOutcome v);

// First whole-word "yes"/"no" (case-insensitive) decides; neither present
// means the response is unusable.
VerifyOutcome verify_idiom(backends::Backend& backend, const prompts::TemplateSet& templates,
                           std::string_view candidate);

// ---------------------------------------------------------------------------
// Sentences
// ---------------------------------------------------------------------------

struct SentenceGenResult {
    std::vector<SentenceRecord> records;  // always exactly 10
    bool backend_failed = false;
    bool count_mismatch = false;  // fewer than 10 parsed
    bool truncated = false;       // more than 10 parsed
    std::string error;
};

// Exactly 10 records per idiom: parsed sentences padded with empty-text
// placeholders on shortfall or refusal, extras truncated. Containment is an
// exact substring test.
SentenceGenResult generate_sentences(backends::Backend& backend,
                                     const prompts::TemplateSet& templates,
                                     const Idiom& idiom);

// ---------------------------------------------------------------------------
// Sentence translation fan-out
// ---------------------------------------------------------------------------

struct TranslateOptions {
    std::span<const Strategy> strategies;  // subset of the registry
    std::span<const prompts::FewShotExample> fewshot_pool;
    std::uint64_t rng_seed = 0;
    // Containment failures are normally skipped upstream; setting this lets
    // non-empty sentences through regardless of the flag.
    bool include_containment_failures = false;
};

// One record per requested strategy variant, in strategy enum order.
// DiversityExplicit parses 5 from one response, DiversityDialog 5 more via
// the follow-up turn, ContextExplicit one per genre, engines route through
// mt_translate. A failing request yields failed records, never an abort.
// Precondition: sentence.contains_idiom unless the options say otherwise.
std::vector<TranslationRecord> translate_sentence(backends::Backend& backend,
                                                  const prompts::TemplateSet& templates,
                                                  const Idiom& idiom,
                                                  const SentenceRecord& sentence,
                                                  const TranslateOptions& options);

// Prompt audit for dry runs: every first-turn request translate_sentence
// would issue for this plan, rendered without touching any backend. The
// DiversityDialog follow-up appears as its template text (its history needs a
// live reply); engine strategies have no prompt and few-shot strategies are
// rendered with their deterministically sampled examples when the pool allows.
std::vector<std::vector<prompts::Message>> render_translation_plan(
    const prompts::TemplateSet& templates, const Idiom& idiom,
    const SentenceRecord& sentence, const TranslateOptions& options);

// ---------------------------------------------------------------------------
// Paragraph pipeline
// ---------------------------------------------------------------------------

struct ParagraphGenResult {
    std::vector<ParagraphRecord> records;  // one per genre
    std::vector<std::string> errors;
};

// One paragraph per genre embedding the sentence; containment flags recorded,
// records never dropped. Precondition: sentence.text non-empty.
ParagraphGenResult generate_paragraphs(backends::Backend& backend,
                                       const prompts::TemplateSet& templates,
                                       const Idiom& idiom, const SentenceRecord& sentence,
                                       std::span<const Genre> genres);

// Fetches any missing instruction texts for the language (one response per
// (aspect, language), kept verbatim).
void populate_cot_cache(backends::Backend& backend, const prompts::TemplateSet& templates,
                        Language language, prompts::CotInstructionCache& cache);

// 1 baseline + 3 simple + 3 CoT + 3 multi-turn = 10 records; the multi-turn
// follow-ups carry turn_index 1 and 2 and reuse the faithful-multi-turn
// exchange as dialog history. Missing CoT cache entries are contract errors.
std::vector<TranslationRecord> translate_paragraph(backends::Backend& backend,
                                                   const prompts::TemplateSet& templates,
                                                   const Idiom& idiom,
                                                   const ParagraphRecord& paragraph,
                                                   const prompts::CotInstructionCache& cache);

// ---------------------------------------------------------------------------
// Canonical record order (idiom id, sentence index, genre, strategy, turn)
// ---------------------------------------------------------------------------

int strategy_order(std::string_view strategy_name);
int genre_order(std::string_view genre_name);

bool canonical_less(const SentenceRecord& a, const SentenceRecord& b);
bool canonical_less(const TranslationRecord& a, const TranslationRecord& b);
bool canonical_less(const AspectScore& a, const AspectScore& b);
bool canonical_less(const SpanRecord& a, const SpanRecord& b);
bool canonical_less(const ParagraphRecord& a, const ParagraphRecord& b);

}  // namespace idiomct::pipeline
