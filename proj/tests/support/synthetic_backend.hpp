#pragma once
// Deterministic fake model used to build replay fixtures: it recognizes each
// prompt shape the pipeline can send and fabricates a plausible response from
// a hash of the prompt (and the per-fingerprint repeat count, so repeated
// judge calls vary). Every call can be captured into a ReplayStore, making
// record -> replay round trips exercisable without a network.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>

#include "idiomct/backends.hpp"
#include "idiomct/corpus.hpp"
#include "idiomct/prompts.hpp"

namespace idiomct::testsupport {

struct SyntheticConfig {
    // Idiom surfaces whose sentence-generation request gets a refusal.
    std::set<std::string> refuse_sentences;
    // (idiom surface, 1-based sentence number) whose sentence omits the idiom.
    std::set<std::pair<std::string, int>> split_idiom_sentences;
    // Span extractions (0-based call ordinal) answered with a case-mangled span.
    std::function<bool(int)> mangle_span;
    // Paragraph generations (0-based call ordinal) that drop the sentence tail.
    std::function<bool(int)> paragraph_drops_sentence;
};

class SyntheticBackend : public backends::Backend {
public:
    explicit SyntheticBackend(backends::BackendModels models = {},
                              backends::ReplayStore* capture = nullptr,
                              SyntheticConfig config = {})
        : models_(std::move(models)), capture_(capture), config_(std::move(config)) {}

    backends::Completion complete(std::span<const prompts::Message> messages,
                                  backends::BackendRole role) override {
        if (messages.empty()) throw std::invalid_argument("empty message sequence");
        const std::string& model = role == backends::BackendRole::Generator
                                       ? models_.generator
                                       : models_.judge;
        std::string fingerprint =
            backends::request_fingerprint(model, messages, models_.temperature);
        std::size_t repeat;
        {
            std::lock_guard lock(mutex_);
            repeat = repeats_[fingerprint]++;
        }
        std::string response = synthesize(messages, repeat);
        backends::Completion completion;
        completion.text = response;
        completion.usage.prompt_tokens =
            static_cast<long long>(messages.back().content.size() / 4 + 1);
        completion.usage.completion_tokens = static_cast<long long>(response.size() / 4 + 1);
        if (capture_) {
            capture_->add(fingerprint,
                          backends::ReplayEntry{completion.text, completion.usage});
        }
        return completion;
    }

    std::string mt_translate(backends::MtEngine engine, const std::string& text,
                             Language source_language) override {
        std::string response = "The engine " + std::string(backends::mt_engine_name(engine)) +
                               " rendering w" + word(text) + " of the source.";
        if (capture_) {
            capture_->add(backends::mt_fingerprint(engine, text, source_language),
                          backends::ReplayEntry{response, {}});
        }
        return response;
    }

    backends::BackendMode mode() const override { return backends::BackendMode::Live; }
    const std::string& generator_model() const override { return models_.generator; }
    const std::string& judge_model() const override { return models_.judge; }
    double temperature() const override { return models_.temperature; }

    int span_calls() const { return span_calls_.load(); }

private:
    static std::string word(const std::string& seed) {
        return hex64(fnv1a64(seed)).substr(0, 6);
    }

    static std::string first_code_point(const std::string& s) {
        if (s.empty()) return s;
        unsigned char c = static_cast<unsigned char>(s[0]);
        std::size_t len = c >= 0xf0 ? 4 : c >= 0xe0 ? 3 : c >= 0xc0 ? 2 : 1;
        return s.substr(0, std::min(len, s.size()));
    }

    static std::string between(const std::string& text, const std::string& after,
                               const std::string& before) {
        auto start = text.find(after);
        if (start == std::string::npos) return "";
        start += after.size();
        auto end = before.empty() ? text.size() : text.find(before, start);
        if (end == std::string::npos) return "";
        return text.substr(start, end - start);
    }

    std::string synthesize(std::span<const prompts::Message> messages, std::size_t repeat) {
        const std::string& last = messages.back().content;
        const std::string& first = messages.front().content;

        // Idiom mining.
        if (first.rfind("Give ", 0) == 0) {
            std::string syllable = between(first, "begin with ", ".");
            std::string out;
            for (int i = 1; i <= 8; ++i) {
                out += std::to_string(i) + ". " + syllable + "idiom" +
                       std::to_string(i % 6) + "\n";
            }
            return out;
        }
        // Verification.
        if (first.rfind("Is ", 0) == 0 && first.find("Output yes or no.") != std::string::npos) {
            return fnv1a64(first) % 2 == 0 ? "Yes." : "No.";
        }
        // Sentence generation.
        if (first.rfind("Can you make 10 ", 0) == 0) {
            std::string idiom = between(first, "idiom ", "? Only list sentences.");
            if (config_.refuse_sentences.count(idiom)) {
                return "I'm sorry, I cannot find this idiom.";
            }
            std::string out;
            for (int i = 1; i <= 10; ++i) {
                std::string surface = idiom;
                if (config_.split_idiom_sentences.count({idiom, i})) {
                    std::string head = first_code_point(surface);
                    surface = head + " X " + surface.substr(head.size());
                }
                out += std::to_string(i) + ". Sentence s" + word(idiom + std::to_string(i)) +
                       " uses " + surface + " gracefully.\n";
            }
            return out;
        }
        // Judge scoring: vary the format and the value across the 5 runs.
        if (first.rfind("Please rate the ", 0) == 0) {
            int score = 3 + static_cast<int>((fnv1a64(first) + repeat * 7) % 3);
            switch ((fnv1a64(first) + repeat) % 3) {
                case 0: return std::to_string(score);
                case 1: return "Score: " + std::to_string(score) + "/5";
                default: return "I'd rate it a " + std::to_string(score) + " overall.";
            }
        }
        // Span extraction.
        if (first.rfind("Given the English translation", 0) == 0) {
            int ordinal = span_calls_.fetch_add(1);
            std::string translation = between(first, "English translation: ", "\n");
            std::string span = translation;
            auto cut = span.find(" of ");
            if (cut != std::string::npos) span = span.substr(cut + 4);
            if (!span.empty() && span.back() == '.') span.pop_back();
            if (config_.mangle_span && config_.mangle_span(ordinal) && !span.empty()) {
                span[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(span[0])));
            }
            return span;
        }
        // Paragraph generation.
        if (first.rfind("Please write a ", 0) == 0) {
            int ordinal = paragraph_calls_.fetch_add(1);
            std::string sentence = between(first, "sentence:\n", "");
            bool drop = config_.paragraph_drops_sentence &&
                        config_.paragraph_drops_sentence(ordinal);
            std::string body = sentence;
            if (drop && body.size() > 10) body = body.substr(0, body.size() - 10);
            return "Opening line p" + word(first) + ". " + body + " Closing line.";
        }
        // Auto-CoT instruction generation.
        if (first.rfind("If you are asked to translate a paragraph", 0) == 0) {
            return "1. Identify the idiom i" + word(first) + ".\n2. Check its meaning.\n"
                   "3. Render it in context.";
        }
        // Diversity follow-up turn.
        if (last == "Please generate another 5 different translations.") {
            std::string out;
            for (int i = 1; i <= 5; ++i) {
                out += std::to_string(i) + ". Dialog variant d" +
                       word(first + std::to_string(i)) + " of the source.\n";
            }
            return out;
        }
        if (first.rfind("Please generate 5 different translations", 0) == 0) {
            std::string out;
            for (int i = 1; i <= 5; ++i) {
                out += std::to_string(i) + ". Explicit variant e" +
                       word(first + std::to_string(i)) + " of the source.\n";
            }
            return out;
        }
        // Paragraph translation (any kind, incl. the multi-turn follow-ups).
        if (first.rfind("Please translate the following paragraph", 0) == 0) {
            return "Paragraph translation g" + word(last + std::to_string(messages.size())) +
                   " in English.";
        }
        // Succinct sentence translation tends to attract an explanation.
        if (first.find("as succinctly as possible") != std::string::npos) {
            return "Succinct t" + word(first) + " of the source.\n\n"
                   "Explanation: the idiom was condensed.";
        }
        // Every other sentence translation prompt.
        if (first.find("translate") != std::string::npos ||
            first.rfind("The sentence below", 0) == 0 ||
            first.rfind("Please rewrite", 0) == 0) {
            return "Translation t" + word(first) + " of the source.";
        }
        throw std::runtime_error("synthetic backend: unrecognized prompt: " +
                                 first.substr(0, 60));
    }

    backends::BackendModels models_;
    backends::ReplayStore* capture_;
    SyntheticConfig config_;
    std::mutex mutex_;
    std::map<std::string, std::size_t> repeats_;
    std::atomic<int> span_calls_{0};
    std::atomic<int> paragraph_calls_{0};
};

}  // namespace idiomct::testsupport
