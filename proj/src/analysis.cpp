#include "idiomct/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

#include "json.hpp"

#include "idiomct/textparse.hpp"

namespace idiomct::analysis {

SpanRecord extract_span(backends::Backend& backend, const prompts::TemplateSet& templates,
                        const Idiom& idiom, const std::string& source_sentence,
                        const TranslationRecord& translation) {
    if (translation.text.empty()) {
        throw std::invalid_argument("cannot extract a span from an empty translation");
    }
    auto messages =
        prompts::render_span_extraction(templates, idiom, source_sentence, translation.text);
    auto completion = backend.complete(messages, backends::BackendRole::Generator);

    SpanRecord record;
    record.idiom_id = translation.idiom_id;
    record.sentence_index = translation.sentence_index;
    record.genre = translation.genre;
    record.strategy = translation.strategy;
    record.turn_index = translation.turn_index;
    record.span_text = std::string(textparse::trim(completion.text));
    record.is_substring = !record.span_text.empty() &&
                          textparse::contains_exact(translation.text, record.span_text);
    return record;
}

std::vector<std::string> unigram_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        bool is_token_char = (c >= 0x80) || std::isalnum(c);
        if (is_token_char) {
            current += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

SaturationCurve unigram_curve(std::string idiom_id, std::span<const std::string> spans) {
    SaturationCurve curve;
    curve.idiom_id = std::move(idiom_id);
    std::unordered_set<std::string> seen;
    int k = 0;
    for (const std::string& span : spans) {
        ++k;
        for (std::string& token : unigram_tokens(span)) {
            seen.insert(std::move(token));
        }
        curve.points.push_back(SaturationPoint{k, static_cast<long long>(seen.size())});
    }
    return curve;
}

void write_curves_csv(std::span<const SaturationCurve> curves,
                      const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write curves: " + path.string());
    out << "idiom_id,k,u\n";
    for (const SaturationCurve& curve : curves) {
        for (const SaturationPoint& p : curve.points) {
            out << curve.idiom_id << ',' << p.k << ',' << p.unique_unigrams << '\n';
        }
    }
}

std::vector<RankedIdiom> rank_by_frequency(std::span<const Idiom> idioms,
                                           const std::filesystem::path& sentence_pair_file) {
    std::ifstream in(sentence_pair_file, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read sentence-pair file: " +
                                 sentence_pair_file.string());
    }
    std::vector<RankedIdiom> ranking;
    ranking.reserve(idioms.size());
    for (const Idiom& idiom : idioms) ranking.push_back(RankedIdiom{idiom, 0});

    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        for (RankedIdiom& r : ranking) {
            if (textparse::contains_exact(line, r.idiom.surface)) ++r.count;
        }
    }
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const RankedIdiom& a, const RankedIdiom& b) {
                         if (a.count != b.count) return a.count > b.count;
                         return a.idiom.id < b.idiom.id;
                     });
    return ranking;
}

void write_ranking(std::span<const RankedIdiom> ranking, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write ranking: " + path.string());
    for (const RankedIdiom& r : ranking) {
        nlohmann::ordered_json j{
            {"id", r.idiom.id},
            {"surface", r.idiom.surface},
            {"language", language_name(r.idiom.language)},
            {"is_plausible", r.idiom.is_plausible},
            {"count", r.count},
        };
        out << j.dump() << '\n';
    }
}

std::vector<RankedIdiom> read_ranking(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read ranking: " + path.string());
    std::vector<RankedIdiom> ranking;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto j = nlohmann::ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw JsonlError("malformed ranking line " + std::to_string(line_no), line_no);
        }
        RankedIdiom r;
        r.idiom.id = j.at("id").get<std::string>();
        r.idiom.surface = j.at("surface").get<std::string>();
        auto lang = language_from_name(j.at("language").get<std::string>());
        if (!lang) throw JsonlError("unknown language at line " + std::to_string(line_no), line_no);
        r.idiom.language = *lang;
        r.idiom.is_plausible = j.at("is_plausible").get<bool>();
        r.count = j.at("count").get<long long>();
        ranking.push_back(std::move(r));
    }
    return ranking;
}

}  // namespace idiomct::analysis
