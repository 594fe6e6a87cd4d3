#include "idiomct/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "idiomct/textparse.hpp"

namespace idiomct::evaluation {

namespace {

constexpr int kJudgeRuns = 5;

}  // namespace

ScoreOutcome score_translation(backends::Backend& backend,
                               const prompts::TemplateSet& templates, const Idiom& idiom,
                               const std::string& source_sentence,
                               const TranslationRecord& translation, Aspect aspect) {
    if (translation.failed) {
        throw std::invalid_argument("cannot score a failed translation record");
    }
    auto messages =
        prompts::render_evaluation(templates, aspect, idiom, source_sentence, translation.text);

    ScoreOutcome outcome;
    AspectScore& score = outcome.score;
    score.idiom_id = translation.idiom_id;
    score.sentence_index = translation.sentence_index;
    score.genre = translation.genre;
    score.strategy = translation.strategy;
    score.turn_index = translation.turn_index;
    score.aspect = aspect;

    for (int run = 0; run < kJudgeRuns; ++run) {
        auto completion = backend.complete(messages, backends::BackendRole::Judge);
        auto parsed = textparse::parse_score(completion.text);
        if (!parsed.ok()) {
            // One retry with the identical prompt; the sampled response differs.
            ++outcome.retried_runs;
            completion = backend.complete(messages, backends::BackendRole::Judge);
            parsed = textparse::parse_score(completion.text);
        }
        if (!parsed.ok()) {
            score.valid = false;
            return outcome;
        }
        score.runs[static_cast<std::size_t>(run)] = parsed.value;
    }
    score.validate();
    return outcome;
}

StrategyStats aggregate(std::string strategy_family, Language language,
                        std::span<const ScoredTranslation> group) {
    if (group.empty()) {
        throw std::invalid_argument("aggregate: empty group for " + strategy_family);
    }
    long long n = static_cast<long long>(group.size());
    long long sum_f = 0, sum_c = 0, sumsq_f = 0, sumsq_c = 0;
    for (const ScoredTranslation& t : group) {
        sum_f += t.faith_run_sum;
        sum_c += t.crea_run_sum;
        sumsq_f += static_cast<long long>(t.faith_run_sum) * t.faith_run_sum;
        sumsq_c += static_cast<long long>(t.crea_run_sum) * t.crea_run_sum;
    }
    // Translation means are run_sum/5; everything stays integral until the
    // final divisions, so the result matches a rational oracle.
    auto mean_of = [n](long long sum) { return static_cast<double>(sum) / (5.0 * n); };
    auto pop_std = [n](long long sum, long long sumsq) {
        double m = static_cast<double>(sum) / (5.0 * n);
        double msq = static_cast<double>(sumsq) / (25.0 * n);
        return std::sqrt(std::max(0.0, msq - m * m));
    };
    StrategyStats stats;
    stats.strategy_family = std::move(strategy_family);
    stats.language = language;
    stats.n = n;
    stats.mean_f = mean_of(sum_f);
    stats.std_f = pop_std(sum_f, sumsq_f);
    stats.mean_c = mean_of(sum_c);
    stats.std_c = pop_std(sum_c, sumsq_c);
    return stats;
}

ParetoFront pareto_front(std::span<const StrategyStats> stats) {
    ParetoFront front;
    if (stats.empty()) return front;

    const Language language = stats.front().language;
    for (const StrategyStats& s : stats) {
        if (s.language != language) {
            throw std::invalid_argument("pareto_front: mixed languages in input");
        }
        if (!std::isfinite(s.mean_f) || !std::isfinite(s.mean_c)) {
            throw std::invalid_argument("pareto_front: non-finite mean for " +
                                        s.strategy_family);
        }
    }

    // Sort by faithfulness descending, sweep once tracking the best
    // creativity among strictly-better-faithfulness points. Within an
    // equal-faithfulness run only a strictly higher creativity dominates, so
    // identical points survive together.
    std::vector<std::size_t> order(stats.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (stats[a].mean_f != stats[b].mean_f) return stats[a].mean_f > stats[b].mean_f;
        return stats[a].mean_c > stats[b].mean_c;
    });

    std::vector<bool> dominated(stats.size(), false);
    double best_c_above = -std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        double group_f = stats[order[i]].mean_f;
        double group_max_c = stats[order[i]].mean_c;
        while (j < order.size() && stats[order[j]].mean_f == group_f) {
            const StrategyStats& p = stats[order[j]];
            if (best_c_above >= p.mean_c || p.mean_c < group_max_c) {
                dominated[order[j]] = true;
            }
            ++j;
        }
        best_c_above = std::max(best_c_above, group_max_c);
        i = j;
    }

    for (std::size_t k = 0; k < stats.size(); ++k) {
        if (!dominated[k]) front.members.push_back(stats[k].strategy_family);
    }
    front.basis.assign(stats.begin(), stats.end());
    return front;
}

std::vector<prompts::FewShotExample> select_fewshot_pool(
    std::span<const PoolCandidate> candidates) {
    std::vector<prompts::FewShotExample> pool;
    for (const PoolCandidate& c : candidates) {
        if (!c.valid) continue;
        int max_run = *std::max_element(c.creativity_runs.begin(), c.creativity_runs.end());
        if (max_run == 5) {
            pool.push_back(prompts::FewShotExample{c.source_sentence, c.translation,
                                                   c.language});
        }
    }
    if (pool.empty()) throw EmptyPoolError();
    return pool;
}

std::string format_stats_table(std::span<const StrategyStats> stats) {
    std::vector<Language> languages;
    for (Language lang : kAllLanguages) {
        for (const StrategyStats& s : stats) {
            if (s.language == lang) {
                languages.push_back(lang);
                break;
            }
        }
    }
    std::vector<std::string> families;
    for (const std::string& family : all_strategy_families()) {
        for (const StrategyStats& s : stats) {
            if (s.strategy_family == family) {
                families.push_back(family);
                break;
            }
        }
    }
    for (const StrategyStats& s : stats) {  // families outside the registry, in input order
        if (std::find(families.begin(), families.end(), s.strategy_family) == families.end()) {
            families.push_back(s.strategy_family);
        }
    }

    auto find_stat = [&](const std::string& family, Language lang) -> const StrategyStats* {
        for (const StrategyStats& s : stats) {
            if (s.strategy_family == family && s.language == lang) return &s;
        }
        return nullptr;
    };

    constexpr int kNameWidth = 24;
    constexpr int kCellWidth = 14;
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-*s %6s", kNameWidth, "Method", "Size");
    out += buf;
    for (Language lang : languages) {
        std::snprintf(buf, sizeof(buf), " %*s %*s", kCellWidth,
                      (std::string(language_name(lang)) + "/F").c_str(), kCellWidth, "C");
        out += buf;
    }
    out += '\n';
    for (const std::string& family : families) {
        long long n = 0;
        for (Language lang : languages) {
            if (const StrategyStats* s = find_stat(family, lang)) {
                n = std::max(n, s->n);
            }
        }
        std::snprintf(buf, sizeof(buf), "%-*s %6lld", kNameWidth, family.c_str(), n);
        out += buf;
        for (Language lang : languages) {
            const StrategyStats* s = find_stat(family, lang);
            if (s == nullptr) {
                std::snprintf(buf, sizeof(buf), " %*s %*s", kCellWidth, "-", kCellWidth, "-");
            } else {
                char f_cell[64], c_cell[64];
                std::snprintf(f_cell, sizeof(f_cell), "%.2f ± %.2f", s->mean_f, s->std_f);
                std::snprintf(c_cell, sizeof(c_cell), "%.2f ± %.2f", s->mean_c, s->std_c);
                std::snprintf(buf, sizeof(buf), " %*s %*s", kCellWidth, f_cell, kCellWidth,
                              c_cell);
            }
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace idiomct::evaluation
