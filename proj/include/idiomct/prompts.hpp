#pragma once
// The strategy registry: renders every prompt used by the pipeline, from the
// mining and verification one-liners through the 25 prompted translation
// strategies, judge rubrics, span extraction, and the paragraph dialog kinds.
// Rendering is pure; the only state is the explicit CoT instruction cache.
//
// Templates ship as data files (one per prompt kind, checksummed at load) so
// a wording fix never requires a rebuild; an identical embedded set backs
// library use without a data directory.

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idiomct/corpus.hpp"

namespace idiomct::prompts {

enum class Role : std::uint8_t { User, Assistant };

struct Message {
    Role role = Role::User;
    std::string content;  // non-empty
};

bool operator==(const Message& a, const Message& b);

struct FewShotExample {
    std::string source;  // source-language sentence
    std::string target;  // English translation
    Language language = Language::Chinese;
};

inline constexpr int kFewShotExampleCount = 5;

// A completed request/reply pair reused as dialog history by follow-up
// prompts (DiversityDialog, paragraph multi-turn kinds).
struct Exchange {
    std::string prompt;  // the user message of the earlier turn
    std::string reply;   // the assistant reply to it
};

enum class CotAspect : std::uint8_t { Faithful, Creative, Theme };

std::string_view cot_aspect_name(CotAspect a);

// At most one generated instruction text per (aspect, language); the first
// response is kept and later puts for the same key are rejected.
class CotInstructionCache {
public:
    bool has(CotAspect aspect, Language language) const;
    const std::string& get(CotAspect aspect, Language language) const;
    void put(CotAspect aspect, Language language, std::string text);
    void save(const std::filesystem::path& path) const;
    static CotInstructionCache load(const std::filesystem::path& path);
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::pair<int, int>, std::string> entries_;
};

// ---------------------------------------------------------------------------
// Template storage
// ---------------------------------------------------------------------------

class TemplateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TemplateSet {
public:
    // The compiled-in texts; identical to the shipped data files.
    static const TemplateSet& embedded();
    // Loads <id>.txt files from a directory, verifying each against
    // MANIFEST.tsv (FNV-1a of the raw bytes). One trailing newline per file
    // is tolerated and stripped.
    static TemplateSet load_dir(const std::filesystem::path& dir);
    // Writes the set out as data files plus MANIFEST.tsv.
    void write_dir(const std::filesystem::path& dir) const;

    const std::string& at(std::string_view id) const;  // throws TemplateError
    static const std::vector<std::string>& ids();

private:
    std::map<std::string, std::string, std::less<>> texts_;
};

// ---------------------------------------------------------------------------
// Renderers
// ---------------------------------------------------------------------------

// "Can you make 10 <LANGUAGE> sentences with the <LANGUAGE> idiom <IDIOM>?..."
// PlausibleChinese renders the language word "Chinese" in both places.
std::vector<Message> render_sentence_gen(const TemplateSet& templates, const Idiom& idiom);

// Full message history for one translation request. Few-shot strategies
// require exactly 5 examples; DiversityDialog requires the DiversityExplicit
// exchange; Google/DeepL are rejected (they bypass prompting).
std::vector<Message> render_translation(const TemplateSet& templates, Strategy strategy,
                                        const std::string& sentence, Language language,
                                        std::span<const FewShotExample> fewshot = {},
                                        const Exchange* prior_turn = nullptr);

// The 1-5 judge rubric for one aspect; ends "Return a single number as your
// rating."
std::vector<Message> render_evaluation(const TemplateSet& templates, Aspect aspect,
                                       const Idiom& idiom, const std::string& source_sentence,
                                       const std::string& translation);

// Ends with "Span:".
std::vector<Message> render_span_extraction(const TemplateSet& templates, const Idiom& idiom,
                                            const std::string& source_sentence,
                                            const std::string& translation);

std::vector<Message> render_mining(const TemplateSet& templates,
                                   std::string_view pinyin_syllable, int n);
std::vector<Message> render_verification(const TemplateSet& templates,
                                         std::string_view candidate);
std::vector<Message> render_explanation(const TemplateSet& templates,
                                        std::string_view candidate);

// The three instruction-generation questions that populate the CoT cache.
std::vector<Message> render_instruction_gen(const TemplateSet& templates, CotAspect aspect,
                                            Language language);

// Asks for a paragraph of the given genre built around the sentence.
std::vector<Message> render_paragraph_gen(const TemplateSet& templates, Genre genre,
                                          Language language, const std::string& sentence);

// Paragraph translation prompts. CoT kinds append the cached instructions for
// (aspect, language); CreativeMultiTurn / ThemeMultiTurn receive the earlier
// turns of the growing dialog as exchanges and return the full history.
std::vector<Message> render_paragraph_prompt(const TemplateSet& templates, ParagraphKind kind,
                                             Language language, const Idiom& idiom,
                                             const std::string& paragraph,
                                             const CotInstructionCache& cot_cache,
                                             std::span<const Exchange> prior_turns = {});

}  // namespace idiomct::prompts
