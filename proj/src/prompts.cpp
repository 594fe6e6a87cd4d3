#include "idiomct/prompts.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace idiomct::prompts {

bool operator==(const Message& a, const Message& b) {
    return a.role == b.role && a.content == b.content;
}

std::string_view cot_aspect_name(CotAspect a) {
    switch (a) {
        case CotAspect::Faithful: return "faithful";
        case CotAspect::Creative: return "creative";
        case CotAspect::Theme: return "theme";
    }
    throw std::invalid_argument("unknown cot aspect");
}

bool CotInstructionCache::has(CotAspect aspect, Language language) const {
    return entries_.count({static_cast<int>(aspect), static_cast<int>(language)}) > 0;
}

const std::string& CotInstructionCache::get(CotAspect aspect, Language language) const {
    auto it = entries_.find({static_cast<int>(aspect), static_cast<int>(language)});
    if (it == entries_.end()) {
        throw TemplateError(std::string("no cached instruction for (") +
                            std::string(cot_aspect_name(aspect)) + ", " +
                            std::string(language_name(language)) + ")");
    }
    return it->second;
}

void CotInstructionCache::put(CotAspect aspect, Language language, std::string text) {
    auto key = std::make_pair(static_cast<int>(aspect), static_cast<int>(language));
    if (entries_.count(key)) {
        throw TemplateError("instruction already cached for this (aspect, language)");
    }
    entries_.emplace(key, std::move(text));
}

void CotInstructionCache::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw TemplateError("cannot write cot cache: " + path.string());
    for (const auto& [key, text] : entries_) {
        nlohmann::ordered_json j{
            {"aspect", cot_aspect_name(static_cast<CotAspect>(key.first))},
            {"language", language_name(static_cast<Language>(key.second))},
            {"text", text},
        };
        out << j.dump() << '\n';
    }
}

CotInstructionCache CotInstructionCache::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TemplateError("cannot read cot cache: " + path.string());
    CotInstructionCache cache;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::ordered_json::parse(line);
        std::string aspect = j.at("aspect").get<std::string>();
        CotAspect a;
        if (aspect == "faithful") a = CotAspect::Faithful;
        else if (aspect == "creative") a = CotAspect::Creative;
        else if (aspect == "theme") a = CotAspect::Theme;
        else throw TemplateError("unknown cot aspect: " + aspect);
        auto lang = language_from_name(j.at("language").get<std::string>());
        if (!lang) throw TemplateError("unknown language in cot cache");
        cache.put(a, *lang, j.at("text").get<std::string>());
    }
    return cache;
}

// ---------------------------------------------------------------------------
// Embedded templates
// ---------------------------------------------------------------------------

namespace {

// Placeholders: <LANGUAGE> <IDIOM> <SENTENCE> <GENRE> <PARAGRAPH> <PINYIN>
// <N> <SOURCE> <TARGET> <SOURCE i>/<TARGET i> <INSTRUCTIONS>
const std::pair<const char*, const char*> kTemplates[] = {
    {"mining",
     "Give <N> Chinese idioms that begin with <PINYIN>. Only list idioms. Do not explain them. No duplicates."},
    {"verification", "Is <IDIOM> a Chinese idiom? Output yes or no."},
    {"explanation", "Is <IDIOM> a Chinese idiom? Please explain."},
    {"sentence_gen",
     "Can you make 10 <LANGUAGE> sentences with the <LANGUAGE> idiom <IDIOM>? Only list sentences. Do not explain."},
    {"baseline",
     "Please translate the following sentence from <LANGUAGE> to English:\n<SENTENCE>"},
    {"diversity_explicit",
     "Please generate 5 different translations of the following sentence from <LANGUAGE> to English:\n<SENTENCE>"},
    {"diversity_dialog", "Please generate another 5 different translations."},
    {"zero_shot_creatively",
     "Please creatively translate the following sentence from <LANGUAGE> to English:\n<SENTENCE>"},
    {"context_explicit",
     "The sentence below comes from <GENRE>. Please translate it from <LANGUAGE> to English:\n<SENTENCE>"},
    {"analogy_natural",
     "Please translate the following sentence from <LANGUAGE> to English:\n<SENTENCE>\nIn the translation, please use an analogy commonly used in English."},
    {"analogy_creative",
     "Please translate the following sentence from <LANGUAGE> to English:\n<SENTENCE>\nIn the translation, please create a new analogy that has not been commonly used in English."},
    {"shuffle_order",
     "Please translate the following sentence from <LANGUAGE> to English:\n<SENTENCE>\nPlease try to change the order of clauses to make the translation more natural."},
    {"succinct",
     "Please translate the following sentence from <LANGUAGE> to English:\n<SENTENCE>\nPlease translate the <LANGUAGE> idiom appeared in the sentence as succinctly as possible."},
    {"two_step",
     "Please rewrite the following sentence in <LANGUAGE> without using a <LANGUAGE> idiom:\n<SENTENCE>\nPlease translate the rewritten sentence to English."},
    {"discontinuous_1",
     "Please translate the following sentence from <LANGUAGE> to English:\n<SENTENCE>\nPlease do not use a continuous span to translate the <LANGUAGE> idiom appeared in the sentence."},
    {"discontinuous_2",
     "Please translate the following sentence from <LANGUAGE> to English:\n<SENTENCE>\nPlease do not use a multi-word expression to translate the <LANGUAGE> idiom appeared in the sentence."},
    {"few_shot",
     "Please translate the following sentences from <LANGUAGE> to English:\n"
     "<LANGUAGE>: <SOURCE 1>\nEnglish: <TARGET 1>\n"
     "<LANGUAGE>: <SOURCE 2>\nEnglish: <TARGET 2>\n"
     "<LANGUAGE>: <SOURCE 3>\nEnglish: <TARGET 3>\n"
     "<LANGUAGE>: <SOURCE 4>\nEnglish: <TARGET 4>\n"
     "<LANGUAGE>: <SOURCE 5>\nEnglish: <TARGET 5>\n"
     "<LANGUAGE>: <SENTENCE>\nEnglish:"},
    {"few_shot_creatively",
     "Please creatively translate the following sentences from <LANGUAGE> to English:\n"
     "<LANGUAGE>: <SOURCE 1>\nEnglish: <TARGET 1>\n"
     "<LANGUAGE>: <SOURCE 2>\nEnglish: <TARGET 2>\n"
     "<LANGUAGE>: <SOURCE 3>\nEnglish: <TARGET 3>\n"
     "<LANGUAGE>: <SOURCE 4>\nEnglish: <TARGET 4>\n"
     "<LANGUAGE>: <SOURCE 5>\nEnglish: <TARGET 5>\n"
     "<LANGUAGE>: <SENTENCE>\nEnglish:"},
    {"eval_faithfulness",
     "Please rate the faithfulness of the following idiom translation within a sentence.\n"
     "Idiom to be translated: <IDIOM>\n"
     "Original sentence containing this idiom: <SOURCE>\n"
     "Translation: <TARGET>\n"
     "Your faithfulness rating should be a score from 1 to 5, where 1 is not faithful at all and 5 is perfectly faithful. Return a single number as your rating."},
    {"eval_creativity",
     "Please rate the creativity of the following idiom translation within a sentence.\n"
     "Idiom to be translated: <IDIOM>\n"
     "Original sentence containing this idiom: <SOURCE>\n"
     "Translation: <TARGET>\n"
     "Your creativity rating should be a score from 1 to 5, where 1 is not creative at all (just plain language) and 5 is perfectly creative. Return a single number as your rating."},
    {"span_extraction",
     "Given the English translation of the <LANGUAGE> sentence, please only output the span that corresponds to the <LANGUAGE> idiom.\n"
     "<LANGUAGE> sentence: <SOURCE>\n"
     "English translation: <TARGET>\n"
     "<LANGUAGE> idiom: <IDIOM>\n"
     "Span:"},
    {"instruction_faithful",
     "If you are asked to translate a paragraph that contains a <LANGUAGE> idiom, what would you do to ensure that the translation of the idiom is faithful?"},
    {"instruction_creative",
     "If you are asked to translate a paragraph that contains a <LANGUAGE> idiom, what would you do to ensure that the translation of the idiom is creative?"},
    {"instruction_theme",
     "If you are asked to translate a paragraph that contains a <LANGUAGE> idiom, what would you do to ensure that the translation of the idiom matches the theme of its context?"},
    {"paragraph_gen",
     "Please write a <LANGUAGE> paragraph that comes from <GENRE> and contains the following sentence:\n<SENTENCE>"},
    {"para_baseline",
     "Please translate the following paragraph from <LANGUAGE> to English.\n<PARAGRAPH>"},
    {"para_faithful_simple",
     "Please translate the following paragraph from <LANGUAGE> to English.\n"
     "Please translate the idiom <IDIOM> faithfully. Do not explain.\n<PARAGRAPH>"},
    {"para_creative_simple",
     "Please translate the following paragraph from <LANGUAGE> to English.\n"
     "Please translate the idiom <IDIOM> creatively. Do not explain.\n<PARAGRAPH>"},
    {"para_theme_simple",
     "Please translate the following paragraph from <LANGUAGE> to English.\n"
     "Please translate the idiom <IDIOM> in a way that matches the theme. Do not explain.\n<PARAGRAPH>"},
    {"para_faithful_cot",
     "Please translate the following paragraph from <LANGUAGE> to English.\n"
     "Please translate the idiom <IDIOM> faithfully. Do not explain.\n<PARAGRAPH>\n"
     "Please follow the instructions below:\n<INSTRUCTIONS>"},
    {"para_creative_cot",
     "Please translate the following paragraph from <LANGUAGE> to English.\n"
     "Please translate the idiom <IDIOM> creatively. Do not explain.\n<PARAGRAPH>\n"
     "Please follow the instructions below:\n<INSTRUCTIONS>"},
    {"para_theme_cot",
     "Please translate the following paragraph from <LANGUAGE> to English.\n"
     "Please translate the idiom <IDIOM> in a way that matches the theme. Do not explain.\n<PARAGRAPH>\n"
     "Please follow the instructions below:\n<INSTRUCTIONS>"},
    {"para_faithful_multi_turn",
     "Please translate the following paragraph from <LANGUAGE> to English.\n"
     "Please translate the idiom <IDIOM> faithfully. Do not explain.\n<PARAGRAPH>"},
    {"para_creative_multi_turn",
     "Could you provide an alternative translation of the paragraph, where the idiom is translated more creatively? The translation you provided has been widely used elsewhere."},
    {"para_theme_multi_turn",
     "Could you provide an alternative translation of the paragraph, where the idiom is translated with words that better match the context? The translation you provided can be used verbatim in a different context."},
};

std::string replace_all(std::string text, std::string_view token, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        text.replace(pos, token.size(), value);
        pos += value.size();
    }
    return text;
}

std::vector<Message> single_user(std::string content) {
    return {Message{Role::User, std::move(content)}};
}

std::string fill_language(const std::string& tmpl, Language language) {
    return replace_all(tmpl, "<LANGUAGE>", language_prompt_word(language));
}

}  // namespace

const std::vector<std::string>& TemplateSet::ids() {
    static const std::vector<std::string> list = [] {
        std::vector<std::string> out;
        for (const auto& [id, text] : kTemplates) out.emplace_back(id);
        return out;
    }();
    return list;
}

const TemplateSet& TemplateSet::embedded() {
    static const TemplateSet set = [] {
        TemplateSet s;
        for (const auto& [id, text] : kTemplates) s.texts_.emplace(id, text);
        return s;
    }();
    return set;
}

const std::string& TemplateSet::at(std::string_view id) const {
    auto it = texts_.find(id);
    if (it == texts_.end()) {
        throw TemplateError("unknown template id: " + std::string(id));
    }
    return it->second;
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "MANIFEST.tsv");
    if (!manifest) {
        throw TemplateError("missing template manifest: " + (dir / "MANIFEST.tsv").string());
    }
    std::map<std::string, std::string> expected;  // id -> hash hex
    std::string line;
    while (std::getline(manifest, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw TemplateError("malformed manifest line: " + line);
        expected[line.substr(0, tab)] = line.substr(tab + 1);
    }

    TemplateSet set;
    for (const std::string& id : ids()) {
        auto path = dir / (id + ".txt");
        std::ifstream in(path, std::ios::binary);
        if (!in) throw TemplateError("missing template file: " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string raw = buf.str();
        auto it = expected.find(id);
        if (it == expected.end()) throw TemplateError("template not in manifest: " + id);
        std::string actual = hex64(fnv1a64(raw));
        if (actual != it->second) {
            throw TemplateError("template checksum mismatch for " + id + ": expected " +
                                it->second + ", got " + actual);
        }
        if (!raw.empty() && raw.back() == '\n') raw.pop_back();
        set.texts_.emplace(id, std::move(raw));
    }
    return set;
}

void TemplateSet::write_dir(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "MANIFEST.tsv", std::ios::binary | std::ios::trunc);
    if (!manifest) throw TemplateError("cannot write manifest in " + dir.string());
    for (const std::string& id : ids()) {
        std::string contents = at(id) + "\n";
        std::ofstream out(dir / (id + ".txt"), std::ios::binary | std::ios::trunc);
        if (!out) throw TemplateError("cannot write template " + id);
        out << contents;
        manifest << id << '\t' << hex64(fnv1a64(contents)) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Renderers
// ---------------------------------------------------------------------------

std::vector<Message> render_sentence_gen(const TemplateSet& templates, const Idiom& idiom) {
    if (idiom.surface.empty()) throw std::invalid_argument("idiom surface is empty");
    std::string text = fill_language(templates.at("sentence_gen"), idiom.language);
    text = replace_all(std::move(text), "<IDIOM>", idiom.surface);
    return single_user(std::move(text));
}

namespace {

const char* translation_template_id(Strategy strategy) {
    switch (strategy) {
        case Strategy::Baseline: return "baseline";
        case Strategy::DiversityExplicit1:
        case Strategy::DiversityExplicit2:
        case Strategy::DiversityExplicit3:
        case Strategy::DiversityExplicit4:
        case Strategy::DiversityExplicit5: return "diversity_explicit";
        case Strategy::DiversityDialog1:
        case Strategy::DiversityDialog2:
        case Strategy::DiversityDialog3:
        case Strategy::DiversityDialog4:
        case Strategy::DiversityDialog5: return "diversity_dialog";
        case Strategy::ZeroShotCreatively: return "zero_shot_creatively";
        case Strategy::ContextExplicitNewsReport:
        case Strategy::ContextExplicitRomanceNovel:
        case Strategy::ContextExplicitEverydayConversation:
        case Strategy::ContextExplicitHistoryBook: return "context_explicit";
        case Strategy::AnalogyNatural: return "analogy_natural";
        case Strategy::AnalogyCreative: return "analogy_creative";
        case Strategy::ShuffleOrder: return "shuffle_order";
        case Strategy::Succinct: return "succinct";
        case Strategy::TwoStep: return "two_step";
        case Strategy::Discontinuous1: return "discontinuous_1";
        case Strategy::Discontinuous2: return "discontinuous_2";
        case Strategy::FewShot: return "few_shot";
        case Strategy::FewShotCreatively: return "few_shot_creatively";
        case Strategy::Google:
        case Strategy::DeepL:
            break;
    }
    throw std::invalid_argument("engine strategies bypass prompting");
}

Genre context_explicit_genre(Strategy strategy) {
    switch (strategy) {
        case Strategy::ContextExplicitNewsReport: return Genre::NewsReport;
        case Strategy::ContextExplicitRomanceNovel: return Genre::RomanceNovel;
        case Strategy::ContextExplicitEverydayConversation: return Genre::EverydayConversation;
        case Strategy::ContextExplicitHistoryBook: return Genre::HistoryBook;
        default: throw std::invalid_argument("not a ContextExplicit strategy");
    }
}

}  // namespace

std::vector<Message> render_translation(const TemplateSet& templates, Strategy strategy,
                                        const std::string& sentence, Language language,
                                        std::span<const FewShotExample> fewshot,
                                        const Exchange* prior_turn) {
    if (is_engine_strategy(strategy)) {
        throw std::invalid_argument("engine strategies bypass prompting");
    }
    std::string family(strategy_family(strategy));

    if (family == "DiversityDialog") {
        if (prior_turn == nullptr) {
            throw std::invalid_argument("DiversityDialog requires the DiversityExplicit exchange");
        }
        return {
            Message{Role::User, prior_turn->prompt},
            Message{Role::Assistant, prior_turn->reply},
            Message{Role::User, templates.at("diversity_dialog")},
        };
    }

    std::string text = fill_language(templates.at(translation_template_id(strategy)), language);
    if (family == "ContextExplicit") {
        text = replace_all(std::move(text), "<GENRE>",
                           genre_phrase(context_explicit_genre(strategy)));
    }
    if (family == "FewShot" || family == "FewShotCreatively") {
        if (fewshot.size() != kFewShotExampleCount) {
            throw std::invalid_argument("few-shot strategies require exactly 5 examples");
        }
        for (const FewShotExample& example : fewshot) {
            if (example.language != language) {
                throw std::invalid_argument("few-shot example language does not match the request");
            }
            if (example.source.empty() || example.target.empty()) {
                throw std::invalid_argument("few-shot example with an empty side");
            }
        }
        for (int i = 0; i < kFewShotExampleCount; ++i) {
            std::string si = "<SOURCE " + std::to_string(i + 1) + ">";
            std::string ti = "<TARGET " + std::to_string(i + 1) + ">";
            text = replace_all(std::move(text), si, fewshot[static_cast<std::size_t>(i)].source);
            text = replace_all(std::move(text), ti, fewshot[static_cast<std::size_t>(i)].target);
        }
    }
    text = replace_all(std::move(text), "<SENTENCE>", sentence);
    return single_user(std::move(text));
}

std::vector<Message> render_evaluation(const TemplateSet& templates, Aspect aspect,
                                       const Idiom& idiom, const std::string& source_sentence,
                                       const std::string& translation) {
    const char* id = aspect == Aspect::Faithfulness ? "eval_faithfulness" : "eval_creativity";
    std::string text = templates.at(id);
    text = replace_all(std::move(text), "<IDIOM>", idiom.surface);
    text = replace_all(std::move(text), "<SOURCE>", source_sentence);
    text = replace_all(std::move(text), "<TARGET>", translation);
    return single_user(std::move(text));
}

std::vector<Message> render_span_extraction(const TemplateSet& templates, const Idiom& idiom,
                                            const std::string& source_sentence,
                                            const std::string& translation) {
    std::string text = fill_language(templates.at("span_extraction"), idiom.language);
    text = replace_all(std::move(text), "<SOURCE>", source_sentence);
    text = replace_all(std::move(text), "<TARGET>", translation);
    text = replace_all(std::move(text), "<IDIOM>", idiom.surface);
    return single_user(std::move(text));
}

std::vector<Message> render_mining(const TemplateSet& templates,
                                   std::string_view pinyin_syllable, int n) {
    if (n < 1) throw std::invalid_argument("mining count must be >= 1");
    if (pinyin_syllable.empty()) throw std::invalid_argument("empty pinyin syllable");
    std::string text = replace_all(templates.at("mining"), "<N>", std::to_string(n));
    text = replace_all(std::move(text), "<PINYIN>", pinyin_syllable);
    return single_user(std::move(text));
}

std::vector<Message> render_verification(const TemplateSet& templates,
                                         std::string_view candidate) {
    return single_user(replace_all(templates.at("verification"), "<IDIOM>", candidate));
}

std::vector<Message> render_explanation(const TemplateSet& templates,
                                        std::string_view candidate) {
    return single_user(replace_all(templates.at("explanation"), "<IDIOM>", candidate));
}

std::vector<Message> render_instruction_gen(const TemplateSet& templates, CotAspect aspect,
                                            Language language) {
    const char* id = nullptr;
    switch (aspect) {
        case CotAspect::Faithful: id = "instruction_faithful"; break;
        case CotAspect::Creative: id = "instruction_creative"; break;
        case CotAspect::Theme: id = "instruction_theme"; break;
    }
    return single_user(fill_language(templates.at(id), language));
}

std::vector<Message> render_paragraph_gen(const TemplateSet& templates, Genre genre,
                                          Language language, const std::string& sentence) {
    if (sentence.empty()) throw std::invalid_argument("paragraph generation needs a sentence");
    std::string text = fill_language(templates.at("paragraph_gen"), language);
    text = replace_all(std::move(text), "<GENRE>", genre_phrase(genre));
    text = replace_all(std::move(text), "<SENTENCE>", sentence);
    return single_user(std::move(text));
}

namespace {

const char* paragraph_template_id(ParagraphKind kind) {
    switch (kind) {
        case ParagraphKind::Baseline: return "para_baseline";
        case ParagraphKind::FaithfulSimple: return "para_faithful_simple";
        case ParagraphKind::CreativeSimple: return "para_creative_simple";
        case ParagraphKind::ThemeSimple: return "para_theme_simple";
        case ParagraphKind::FaithfulCot: return "para_faithful_cot";
        case ParagraphKind::CreativeCot: return "para_creative_cot";
        case ParagraphKind::ThemeCot: return "para_theme_cot";
        case ParagraphKind::FaithfulMultiTurn: return "para_faithful_multi_turn";
        case ParagraphKind::CreativeMultiTurn: return "para_creative_multi_turn";
        case ParagraphKind::ThemeMultiTurn: return "para_theme_multi_turn";
    }
    throw std::invalid_argument("unknown paragraph kind");
}

CotAspect cot_aspect_for(ParagraphKind kind) {
    switch (kind) {
        case ParagraphKind::FaithfulCot: return CotAspect::Faithful;
        case ParagraphKind::CreativeCot: return CotAspect::Creative;
        case ParagraphKind::ThemeCot: return CotAspect::Theme;
        default: throw std::invalid_argument("not a CoT paragraph kind");
    }
}

}  // namespace

std::vector<Message> render_paragraph_prompt(const TemplateSet& templates, ParagraphKind kind,
                                             Language language, const Idiom& idiom,
                                             const std::string& paragraph,
                                             const CotInstructionCache& cot_cache,
                                             std::span<const Exchange> prior_turns) {
    std::size_t required_turns = 0;
    if (kind == ParagraphKind::CreativeMultiTurn) required_turns = 1;
    if (kind == ParagraphKind::ThemeMultiTurn) required_turns = 2;
    if (prior_turns.size() < required_turns) {
        throw std::invalid_argument(std::string("paragraph kind ") +
                                    std::string(paragraph_kind_name(kind)) +
                                    " requires the earlier multi-turn exchanges");
    }

    std::string text = fill_language(templates.at(paragraph_template_id(kind)), language);
    text = replace_all(std::move(text), "<IDIOM>", idiom.surface);
    text = replace_all(std::move(text), "<PARAGRAPH>", paragraph);
    if (kind == ParagraphKind::FaithfulCot || kind == ParagraphKind::CreativeCot ||
        kind == ParagraphKind::ThemeCot) {
        const std::string& instructions = cot_cache.get(cot_aspect_for(kind), language);
        text = replace_all(std::move(text), "<INSTRUCTIONS>", instructions);
    }

    if (required_turns == 0) return single_user(std::move(text));

    std::vector<Message> history;
    for (std::size_t i = 0; i < required_turns; ++i) {
        history.push_back(Message{Role::User, prior_turns[i].prompt});
        history.push_back(Message{Role::Assistant, prior_turns[i].reply});
    }
    history.push_back(Message{Role::User, std::move(text)});
    return history;
}

}  // namespace idiomct::prompts
