#pragma once
// Post-hoc dataset analysis: span extraction with exact-substring
// validation, unigram-saturation curves as a translation-diversity proxy,
// and idiom frequency ranking over a user-supplied sentence-pair corpus.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idiomct/backends.hpp"
#include "idiomct/corpus.hpp"
#include "idiomct/prompts.hpp"

namespace idiomct::analysis {

// Asks the generator for the translation span that corresponds to the idiom
// and validates it as an exact substring of the translation (capitalization
// or punctuation drift fails the check on purpose).
SpanRecord extract_span(backends::Backend& backend, const prompts::TemplateSet& templates,
                        const Idiom& idiom, const std::string& source_sentence,
                        const TranslationRecord& translation);

// Lowercases ASCII, splits on whitespace and ASCII punctuation, drops empty
// tokens. Multi-byte UTF-8 sequences pass through as token characters.
std::vector<std::string> unigram_tokens(std::string_view text);

struct SaturationPoint {
    int k = 0;                       // translations consumed
    long long unique_unigrams = 0;   // |union of token sets of spans 1..k|
};

struct SaturationCurve {
    std::string idiom_id;
    std::vector<SaturationPoint> points;  // k = 1..K, non-decreasing u
};

// Cumulative unique-unigram counts over spans in canonical record order.
// Empty spans contribute nothing but still advance k.
SaturationCurve unigram_curve(std::string idiom_id, std::span<const std::string> spans);

// CSV rows: idiom_id,k,u
void write_curves_csv(std::span<const SaturationCurve> curves,
                      const std::filesystem::path& path);

struct RankedIdiom {
    Idiom idiom;
    long long count = 0;  // segments containing the idiom
};

// Counts, per idiom, the source-side segments (one per line) that contain
// the idiom exactly; sorts by count descending with ties broken by idiom id.
std::vector<RankedIdiom> rank_by_frequency(std::span<const Idiom> idioms,
                                           const std::filesystem::path& sentence_pair_file);

void write_ranking(std::span<const RankedIdiom> ranking, const std::filesystem::path& path);
std::vector<RankedIdiom> read_ranking(const std::filesystem::path& path);

}  // namespace idiomct::analysis
