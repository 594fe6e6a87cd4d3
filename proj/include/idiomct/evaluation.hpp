#pragma once
// Judge-based scoring (5 runs per aspect per translation), per-strategy
// aggregation, Pareto-front selection over (faithfulness, creativity), and
// the few-shot pool rule.

#include <span>
#include <string>
#include <vector>

#include "idiomct/backends.hpp"
#include "idiomct/corpus.hpp"
#include "idiomct/prompts.hpp"

namespace idiomct::evaluation {

struct ScoreOutcome {
    AspectScore score;
    int retried_runs = 0;  // runs that needed the single retry
};

// Issues 5 identical judge calls for one aspect of one translation and
// parses each with the first-digit rule. An unparseable run is retried once;
// if it stays unparseable the whole score is marked invalid (runs zeroed)
// and excluded from aggregation downstream.
ScoreOutcome score_translation(backends::Backend& backend,
                               const prompts::TemplateSet& templates, const Idiom& idiom,
                               const std::string& source_sentence,
                               const TranslationRecord& translation, Aspect aspect);

// One translation with both aspects valid; run sums keep the arithmetic
// exact (mean_i = faith_run_sum/5).
struct ScoredTranslation {
    int faith_run_sum = 0;
    int crea_run_sum = 0;
};

// Mean over translation means and the population standard deviation, per
// axis. Throws std::invalid_argument on an empty group.
StrategyStats aggregate(std::string strategy_family, Language language,
                        std::span<const ScoredTranslation> group);

struct ParetoFront {
    std::vector<std::string> members;  // family names, input order
    std::vector<StrategyStats> basis;  // the stats evaluated
};

// Weak Pareto dominance on (mean_f, mean_c): a dominates b iff both
// coordinates are >= and at least one is strictly greater. The front keeps
// every non-dominated point; identical points co-exist. All stats must share
// one language.
ParetoFront pareto_front(std::span<const StrategyStats> stats);

class EmptyPoolError : public std::runtime_error {
public:
    EmptyPoolError() : std::runtime_error("few-shot pool is empty: no translation scored a 5 on creativity") {}
};

struct PoolCandidate {
    std::string source_sentence;
    std::string translation;
    Language language = Language::Chinese;
    std::array<int, 5> creativity_runs{};
    bool valid = true;
};

// A translation joins the pool iff at least one of its 5 creativity runs is
// a 5. Throws EmptyPoolError when nothing qualifies so few-shot strategies
// can be skipped explicitly.
std::vector<prompts::FewShotExample> select_fewshot_pool(
    std::span<const PoolCandidate> candidates);

// Aligned-text rendering of a stats table (one row per family, one
// mean ± std pair per axis per language present in the input).
std::string format_stats_table(std::span<const StrategyStats> stats);

}  // namespace idiomct::evaluation
