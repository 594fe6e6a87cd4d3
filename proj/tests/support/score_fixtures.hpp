#pragma once
// Published per-strategy score table used as oracle input: one
// (faithfulness, creativity) mean pair per strategy family per language,
// plus the per-family sample sizes.

#include <string>
#include <vector>

#include "idiomct/corpus.hpp"

namespace idiomct::testsupport {

struct ScoreRow {
    const char* family;
    long long n;
    double f[4];  // Chinese, Japanese, Korean, PlausibleChinese
    double c[4];
};

inline const std::vector<ScoreRow>& score_table() {
    static const std::vector<ScoreRow> rows = {
        {"Google", 500, {4.05, 3.77, 3.14, 3.74}, {3.43, 3.43, 3.15, 3.59}},
        {"DeepL", 500, {3.77, 3.41, 3.13, 3.45}, {3.46, 3.40, 3.38, 3.66}},
        {"Baseline", 500, {4.26, 4.11, 3.62, 4.09}, {3.70, 3.63, 3.46, 3.84}},
        {"DiversityExplicit", 2500, {4.22, 4.06, 3.62, 4.08}, {3.86, 3.78, 3.68, 3.95}},
        {"DiversityDialog", 2500, {4.15, 4.00, 3.60, 4.02}, {3.94, 3.87, 3.79, 4.02}},
        {"ZeroShotCreatively", 500, {4.30, 4.16, 3.76, 4.21}, {4.09, 3.99, 3.97, 4.10}},
        {"ContextExplicit", 2000, {4.29, 4.11, 3.61, 4.12}, {3.73, 3.62, 3.48, 3.86}},
        {"AnalogyNatural", 500, {3.95, 3.70, 3.55, 3.79}, {4.06, 4.03, 3.97, 4.06}},
        {"AnalogyCreative", 500, {3.19, 3.07, 2.80, 3.10}, {4.25, 4.29, 4.23, 4.22}},
        {"ShuffleOrder", 500, {4.29, 4.16, 3.65, 4.14}, {3.74, 3.65, 3.52, 3.85}},
        {"Succinct", 500, {4.21, 4.10, 3.66, 4.05}, {3.71, 3.61, 3.55, 3.81}},
        {"TwoStep", 500, {3.89, 3.68, 3.26, 3.71}, {3.36, 3.27, 3.07, 3.53}},
        {"Discontinuous1", 500, {4.25, 4.09, 3.56, 4.05}, {3.74, 3.63, 3.59, 3.84}},
        {"Discontinuous2", 500, {4.13, 3.95, 3.44, 3.90}, {3.58, 3.47, 3.37, 3.72}},
        {"FewShot", 500, {4.34, 4.21, 3.70, 4.16}, {3.86, 3.79, 3.72, 3.93}},
        {"FewShotCreatively", 500, {4.22, 4.14, 3.72, 4.18}, {4.08, 4.05, 4.01, 4.08}},
    };
    return rows;
}

inline int language_column(Language lang) {
    switch (lang) {
        case Language::Chinese: return 0;
        case Language::Japanese: return 1;
        case Language::Korean: return 2;
        case Language::PlausibleChinese: return 3;
    }
    return 0;
}

inline std::vector<StrategyStats> score_table_stats(Language lang) {
    std::vector<StrategyStats> stats;
    int col = language_column(lang);
    for (const ScoreRow& row : score_table()) {
        StrategyStats s;
        s.strategy_family = row.family;
        s.language = lang;
        s.n = row.n;
        s.mean_f = row.f[col];
        s.mean_c = row.c[col];
        stats.push_back(std::move(s));
    }
    return stats;
}

}  // namespace idiomct::testsupport
