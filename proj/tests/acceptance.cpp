// Acceptance suite: runs every project-level criterion end to end and prints
// one PASS/FAIL line per criterion. Replay fixtures are built in-process with
// the deterministic synthetic backend, then most criteria drive the actual
// CLI binary (argv[1]) against them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "idiomct/analysis.hpp"
#include "idiomct/backends.hpp"
#include "idiomct/corpus.hpp"
#include "idiomct/evaluation.hpp"
#include "idiomct/pipeline.hpp"
#include "idiomct/prompts.hpp"
#include "idiomct/textparse.hpp"

#include "support/pareto_oracle.hpp"
#include "support/score_fixtures.hpp"
#include "support/synthetic_backend.hpp"

namespace fs = std::filesystem;
using namespace idiomct;

namespace {

std::string g_cli_path;

class CheckError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void check(bool condition, const std::string& message) {
    if (!condition) throw CheckError(message);
}

template <typename T>
void check_eq(const T& actual, const T& expected, const std::string& what) {
    if (!(actual == expected)) {
        std::ostringstream os;
        os << what << ": expected " << expected << ", got " << actual;
        throw CheckError(os.str());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    check(static_cast<bool>(in), "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void run_cli(const std::vector<std::string>& args) {
    std::string cmd = "\"" + g_cli_path + "\"";
    for (const std::string& a : args) cmd += " \"" + a + "\"";
    cmd += " > /dev/null";
    int rc = std::system(cmd.c_str());
    check(rc == 0, "cli failed (" + std::to_string(rc) + "): " + cmd);
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

// ---------------------------------------------------------------------------
// Shared replay fixture: 5 idioms, full strategy set, every pipeline stage.
// ---------------------------------------------------------------------------

struct ChainFixture {
    fs::path base;
    fs::path store_path;
    fs::path idioms_path;
    fs::path pool_path;
    std::vector<Idiom> idioms;
    int planted_skips = 0;
};

constexpr std::uint64_t kSeed = 12345;

const ChainFixture& chain_fixture() {
    static const ChainFixture fixture = [] {
        ChainFixture fx;
        fx.base = fs::temp_directory_path() / "idiomct_acceptance";
        fs::remove_all(fx.base);
        fs::create_directories(fx.base);
        fx.store_path = fx.base / "store.jsonl";
        fx.idioms_path = fx.base / "idioms.jsonl";
        fx.pool_path = fx.base / "pool.jsonl";

        for (const char* surface : {"刮目相看", "威逼利诱", "按兵不动", "春荷秋菊", "安然无恙"}) {
            fx.idioms.push_back(Idiom::make(surface, Language::Chinese));
        }
        write_records(fx.idioms, fx.idioms_path);

        std::vector<prompts::FewShotExample> pool;
        for (int i = 0; i < 8; ++i) {
            pool.push_back(prompts::FewShotExample{"pool source " + std::to_string(i),
                                                   "pool target " + std::to_string(i),
                                                   Language::Chinese});
        }
        {
            std::ofstream out(fx.pool_path, std::ios::binary);
            for (const auto& ex : pool) {
                out << "{\"source\":\"" << ex.source << "\",\"target\":\"" << ex.target
                    << "\",\"language\":\"Chinese\"}\n";
            }
        }

        // Two sentences fail idiom containment; the manifest must reconcile.
        testsupport::SyntheticConfig config;
        config.split_idiom_sentences.insert({"威逼利诱", 4});
        config.split_idiom_sentences.insert({"按兵不动", 8});
        config.paragraph_drops_sentence = [](int ordinal) { return ordinal % 2 == 1; };
        fx.planted_skips = 2;

        auto store = std::make_shared<backends::ReplayStore>();
        testsupport::SyntheticBackend capture({}, store.get(), config);
        const auto& templates = prompts::TemplateSet::embedded();

        // Sentences, in the order the gen stage runs and sorts them.
        std::vector<SentenceRecord> sentences;
        for (const Idiom& idiom : fx.idioms) {
            auto result = pipeline::generate_sentences(capture, templates, idiom);
            sentences.insert(sentences.end(), result.records.begin(), result.records.end());
        }
        std::sort(sentences.begin(), sentences.end(),
                  [](const auto& a, const auto& b) { return pipeline::canonical_less(a, b); });

        std::map<std::string, Idiom> by_id;
        for (const Idiom& idiom : fx.idioms) by_id[idiom.id] = idiom;

        // Full 27-way fan-out per valid sentence.
        std::vector<TranslationRecord> translations;
        pipeline::TranslateOptions options;
        options.strategies = all_strategies();
        options.fewshot_pool = pool;
        options.rng_seed = kSeed;
        for (const SentenceRecord& sentence : sentences) {
            if (sentence.text.empty() || !sentence.contains_idiom) continue;
            auto records = pipeline::translate_sentence(capture, templates,
                                                        by_id[sentence.idiom_id], sentence,
                                                        options);
            translations.insert(translations.end(), records.begin(), records.end());
        }
        std::sort(translations.begin(), translations.end(),
                  [](const auto& a, const auto& b) { return pipeline::canonical_less(a, b); });

        std::map<std::string, std::string> sentence_text;
        for (const auto& s : sentences) {
            sentence_text[s.idiom_id + "/" + std::to_string(s.index)] = s.text;
        }

        // Judge runs (5 per aspect per translation) and span extractions.
        for (const TranslationRecord& record : translations) {
            if (record.failed) continue;
            const Idiom& idiom = by_id[record.idiom_id];
            const std::string& source =
                sentence_text[record.idiom_id + "/" + std::to_string(record.sentence_index)];
            for (Aspect aspect : {Aspect::Faithfulness, Aspect::Creativity}) {
                evaluation::score_translation(capture, templates, idiom, source, record,
                                              aspect);
            }
            analysis::extract_span(capture, templates, idiom, source, record);
        }

        // Paragraph pipeline: first valid sentence per idiom, all genres.
        prompts::CotInstructionCache cache;
        pipeline::populate_cot_cache(capture, templates, Language::Chinese, cache);
        std::vector<ParagraphRecord> paragraphs;
        for (const Idiom& idiom : fx.idioms) {
            const SentenceRecord* chosen = nullptr;
            for (const auto& s : sentences) {
                if (s.idiom_id == idiom.id && s.contains_idiom) {
                    chosen = &s;
                    break;
                }
            }
            if (chosen == nullptr) continue;
            auto result = pipeline::generate_paragraphs(capture, templates, idiom, *chosen,
                                                        kAllGenres);
            paragraphs.insert(paragraphs.end(), result.records.begin(), result.records.end());
        }
        std::sort(paragraphs.begin(), paragraphs.end(),
                  [](const auto& a, const auto& b) { return pipeline::canonical_less(a, b); });
        for (const ParagraphRecord& paragraph : paragraphs) {
            if (paragraph.text.empty()) continue;
            pipeline::translate_paragraph(capture, templates, by_id[paragraph.idiom_id],
                                          paragraph, cache);
        }

        store->save(fx.store_path);
        return fx;
    }();
    return fixture;
}

void run_chain(const fs::path& out_dir) {
    const ChainFixture& fx = chain_fixture();
    fs::remove_all(out_dir);
    auto common = [&](std::vector<std::string> args) {
        args.push_back("--replay");
        args.push_back(fx.store_path.string());
        args.push_back("--out-dir");
        args.push_back(out_dir.string());
        args.push_back("--seed");
        args.push_back(std::to_string(kSeed));
        run_cli(args);
    };
    common({"gen-sentences", "--idioms", fx.idioms_path.string()});
    common({"translate", "--idioms", fx.idioms_path.string(), "--fewshot-pool",
            fx.pool_path.string()});
    common({"score", "--idioms", fx.idioms_path.string()});
    common({"stats", "--idioms", fx.idioms_path.string()});
    common({"pareto"});
    common({"fewshot-pool", "--idioms", fx.idioms_path.string()});
    common({"extract-spans", "--idioms", fx.idioms_path.string()});
    common({"saturation"});
    common({"gen-paragraphs", "--idioms", fx.idioms_path.string()});
    common({"translate-paragraphs", "--idioms", fx.idioms_path.string()});
}

const fs::path& chain_out_a() {
    static const fs::path out = [] {
        fs::path dir = chain_fixture().base / "out_a";
        run_chain(dir);
        return dir;
    }();
    return out;
}

// ---------------------------------------------------------------------------
// Criterion 1: count law
// ---------------------------------------------------------------------------

void criterion_count_law() {
    const ChainFixture& fx = chain_fixture();
    auto start = std::chrono::steady_clock::now();
    const fs::path& out = chain_out_a();
    auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();

    auto sentences = read_records<SentenceRecord>(out / "sentences.jsonl");
    check_eq(sentences.size(), static_cast<std::size_t>(5 * 10), "sentence record count");

    long long valid = 0;
    for (const auto& s : sentences) {
        if (!s.text.empty() && s.contains_idiom) ++valid;
    }
    check_eq(valid, static_cast<long long>(50 - fx.planted_skips), "valid sentence count");

    auto translations = read_records<TranslationRecord>(out / "translations.jsonl");
    check_eq(translations.size(), static_cast<std::size_t>(valid) * 27,
             "translation record count (27 per translated sentence)");
    check(translations.size() == 1350 - static_cast<std::size_t>(fx.planted_skips) * 27,
          "translation count must be 1350 minus 27 per skipped sentence");

    // Manifest reconciliation: generated = translated + skipped.
    auto manifest = RunManifest::load(out / "manifest.json");
    // The last stage overwrote the manifest; re-run translate alone to a fresh
    // dir for its counters.
    fs::path probe = fx.base / "out_probe";
    fs::remove_all(probe);
    run_cli({"gen-sentences", "--idioms", fx.idioms_path.string(), "--replay",
             fx.store_path.string(), "--out-dir", probe.string(), "--seed",
             std::to_string(kSeed)});
    run_cli({"translate", "--idioms", fx.idioms_path.string(), "--fewshot-pool",
             fx.pool_path.string(), "--replay", fx.store_path.string(), "--out-dir",
             probe.string(), "--seed", std::to_string(kSeed)});
    auto translate_manifest = RunManifest::load(probe / "manifest.json");
    const auto& counters = translate_manifest.counters;
    check_eq(counters.at("sentences_seen"),
             counters.at("sentences_translated") + counters.at("sentences_skipped_no_idiom") +
                 counters.at("sentences_skipped_empty"),
             "manifest reconciliation");
    check_eq(counters.at("sentences_skipped_no_idiom"),
             static_cast<long long>(fx.planted_skips), "skipped sentence count");
    check_eq(counters.at("translations_emitted"), static_cast<long long>(valid * 27),
             "manifest translation count");
    check(manifest.backend_mode == "replay", "replay mode recorded in manifest");
    check(elapsed < 30, "offline replay chain took " + std::to_string(elapsed) +
                            "s, budget is 30s");
}

// ---------------------------------------------------------------------------
// Criterion 2: Pareto oracle on the published score table
// ---------------------------------------------------------------------------

void criterion_pareto_table() {
    auto chinese = testsupport::score_table_stats(Language::Chinese);
    auto front = evaluation::pareto_front(chinese);
    std::set<std::string> members(front.members.begin(), front.members.end());
    std::set<std::string> expected{"FewShot", "ZeroShotCreatively", "AnalogyCreative"};
    check(members == expected, "Chinese front must be exactly {FewShot, "
                               "ZeroShotCreatively, AnalogyCreative}");
    auto brute = testsupport::brute_force_front(chinese);
    check(members == std::set<std::string>(brute.begin(), brute.end()),
          "Chinese front must match the O(n^2) oracle");

    auto japanese = testsupport::score_table_stats(Language::Japanese);
    auto jfront = evaluation::pareto_front(japanese);
    std::set<std::string> jmembers(jfront.members.begin(), jfront.members.end());
    for (const char* required :
         {"FewShot", "ZeroShotCreatively", "FewShotCreatively", "AnalogyCreative"}) {
        check(jmembers.count(required) == 1,
              std::string("Japanese front must contain ") + required);
    }
    auto jbrute = testsupport::brute_force_front(japanese);
    check(jmembers == std::set<std::string>(jbrute.begin(), jbrute.end()),
          "Japanese front must match the O(n^2) oracle");
}

// ---------------------------------------------------------------------------
// Criterion 3: Pareto property suite
// ---------------------------------------------------------------------------

void criterion_pareto_properties() {
    std::mt19937 rng(20240501);
    int failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 1 + rng() % 100;
        std::vector<StrategyStats> stats;
        for (std::size_t i = 0; i < n; ++i) {
            StrategyStats s;
            s.strategy_family = "s" + std::to_string(i);
            s.language = Language::Chinese;
            s.n = 1;
            // Half the trials use a coarse grid to force exact ties.
            if (trial % 2 == 0) {
                s.mean_f = 1.0 + 0.5 * static_cast<double>(rng() % 9);
                s.mean_c = 1.0 + 0.5 * static_cast<double>(rng() % 9);
            } else {
                s.mean_f = 1.0 + 4.0 * (static_cast<double>(rng()) / 4294967296.0);
                s.mean_c = 1.0 + 4.0 * (static_cast<double>(rng()) / 4294967296.0);
            }
            stats.push_back(std::move(s));
        }
        auto fast = evaluation::pareto_front(stats).members;
        auto brute = testsupport::brute_force_front(stats);
        std::sort(fast.begin(), fast.end());
        std::sort(brute.begin(), brute.end());
        if (fast != brute) ++failures;

        auto member = [&](const std::string& name) {
            return std::binary_search(fast.begin(), fast.end(), name);
        };
        auto best_f = std::max_element(stats.begin(), stats.end(),
                                       [](const auto& a, const auto& b) {
                                           if (a.mean_f != b.mean_f) return a.mean_f < b.mean_f;
                                           return a.mean_c < b.mean_c;
                                       });
        auto best_c = std::max_element(stats.begin(), stats.end(),
                                       [](const auto& a, const auto& b) {
                                           if (a.mean_c != b.mean_c) return a.mean_c < b.mean_c;
                                           return a.mean_f < b.mean_f;
                                       });
        if (!member(best_f->strategy_family)) ++failures;
        if (!member(best_c->strategy_family)) ++failures;
        if (fast.empty()) ++failures;  // non-empty input keeps at least one member

        double scale = 0.25 + static_cast<double>(rng() % 16);
        double shift = static_cast<double>(rng() % 9) - 4.0;
        auto transformed = stats;
        for (auto& s : transformed) {
            s.mean_f = s.mean_f * scale + shift;
            s.mean_c = s.mean_c * scale + shift;
        }
        auto rescaled = evaluation::pareto_front(transformed).members;
        std::sort(rescaled.begin(), rescaled.end());
        if (rescaled != fast) ++failures;
    }
    check_eq(failures, 0, "pareto property failures over 1000 randomized sets");
}

// ---------------------------------------------------------------------------
// Criterion 4: first-digit score parsing fixture
// ---------------------------------------------------------------------------

void criterion_score_parsing() {
    using Status = textparse::ScoreParse::Status;
    struct Case {
        const char* text;
        Status status;
        int value;  // meaningful for Ok
    };
    // Hand-labeled judge-response formats, 50 cases.
    const Case cases[] = {
        {"4", Status::Ok, 4},
        {"5", Status::Ok, 5},
        {"1", Status::Ok, 1},
        {"2", Status::Ok, 2},
        {"3", Status::Ok, 3},
        {"Score: 3/5", Status::Ok, 3},
        {"Score: 4/5", Status::Ok, 4},
        {"score: 5", Status::Ok, 5},
        {"Rating: 4", Status::Ok, 4},
        {"Rating:\n4", Status::Ok, 4},
        {"rating - 2", Status::Ok, 2},
        {"I'd rate it a 5 because it flows naturally.", Status::Ok, 5},
        {"I would rate this translation a 4.", Status::Ok, 4},
        {"I'd give it a 3 out of 5.", Status::Ok, 3},
        {"This deserves a 5.", Status::Ok, 5},
        {"Faithfulness: 4", Status::Ok, 4},
        {"Creativity: 2", Status::Ok, 2},
        {"4/5", Status::Ok, 4},
        {"3 out of 5", Status::Ok, 3},
        {"A solid 4.", Status::Ok, 4},
        {"Overall: 5/5", Status::Ok, 5},
        {"Maybe a 2?", Status::Ok, 2},
        {"It's a 1, sadly.", Status::Ok, 1},
        {" 5 ", Status::Ok, 5},
        {"\n\n3", Status::Ok, 3},
        {"**4**", Status::Ok, 4},
        {"(5)", Status::Ok, 5},
        {"Score=2", Status::Ok, 2},
        {"I think 3 fits best.", Status::Ok, 3},
        {"4 - good balance", Status::Ok, 4},
        {"The rating is 1.", Status::Ok, 1},
        {"Rated: 5!", Status::Ok, 5},
        {"2.5", Status::Ok, 2},
        {"3.0 overall", Status::Ok, 3},
        {"10", Status::Ok, 1},  // first digit, applied literally
        {"1st choice: keep it", Status::Ok, 1},
        {"45", Status::Ok, 4},
        {"I rate 4, maybe 5.", Status::Ok, 4},
        {"5 stars", Status::Ok, 5},
        {"between 3 and 4", Status::Ok, 3},
        {"zero creativity", Status::NoDigit, 0},
        {"No digits here.", Status::NoDigit, 0},
        {"I cannot rate this.", Status::NoDigit, 0},
        {"unable to provide a score", Status::NoDigit, 0},
        {"N/A", Status::NoDigit, 0},
        {"five", Status::NoDigit, 0},
        {"", Status::NoDigit, 0},
        {"0", Status::OutOfRange, 0},
        {"0/5", Status::OutOfRange, 0},
        {"I'd say 8 if I could.", Status::OutOfRange, 0},
    };
    static_assert(sizeof(cases) / sizeof(cases[0]) == 50);

    int mismatches = 0;
    for (const Case& c : cases) {
        auto parsed = textparse::parse_score(c.text);
        if (parsed.status != c.status) {
            ++mismatches;
            continue;
        }
        if (c.status == Status::Ok && parsed.value != c.value) ++mismatches;
    }
    check_eq(mismatches, 0, "score parsing disagreements over the 50-case fixture");
}

// ---------------------------------------------------------------------------
// Criterion 5: aggregation against a rational oracle
// ---------------------------------------------------------------------------

// Engineers n run sums in [5,25] with an exact total and a sum of squares
// inside [qmin, qmax], by spreading value pairs outward.
std::vector<int> engineer_run_sums(int n, long long total, long long qmin, long long qmax) {
    check(total >= 5LL * n && total <= 25LL * n, "target total out of range");
    std::vector<int> values(static_cast<std::size_t>(n), static_cast<int>(total / n));
    long long remainder = total - static_cast<long long>(values[0]) * n;
    for (long long i = 0; i < remainder; ++i) values[static_cast<std::size_t>(i)] += 1;

    auto qsum = [&] {
        long long q = 0;
        for (int v : values) q += static_cast<long long>(v) * v;
        return q;
    };
    long long q = qsum();
    check(q <= qmax, "initial spread already beyond the target band");
    while (q < qmin) {
        // Raise the largest raisable, lower the smallest lowerable: the sum
        // stays fixed and the square sum climbs by 2(a - b + 1).
        std::size_t hi = values.size(), lo = values.size();
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] < 25 && (hi == values.size() || values[i] > values[hi])) hi = i;
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i == hi) continue;
            if (values[i] > 5 && (lo == values.size() || values[i] < values[lo])) lo = i;
        }
        check(hi != values.size() && lo != values.size(), "cannot widen spread further");
        values[hi] += 1;
        values[lo] -= 1;
        q += 2 * (values[hi] - values[lo]) - 2;
    }
    check(q >= qmin && q <= qmax, "square sum missed the target band");
    return values;
}

void criterion_aggregation() {
    // Exact mean identity, including the recompute-on-load path.
    auto dir = fs::temp_directory_path() / "idiomct_acceptance" / "agg";
    fs::create_directories(dir);
    std::vector<AspectScore> scores;
    for (int sum = 5; sum <= 25; ++sum) {
        AspectScore s;
        s.idiom_id = "i";
        s.sentence_index = sum;
        s.strategy = "Baseline";
        s.aspect = Aspect::Faithfulness;
        int base = sum / 5, extra = sum % 5;
        for (int i = 0; i < 5; ++i) s.runs[static_cast<std::size_t>(i)] = base + (i < extra ? 1 : 0);
        check_eq(s.run_sum(), sum, "constructed run sum");
        scores.push_back(s);
    }
    write_records(scores, dir / "scores.jsonl");
    auto loaded = read_records<AspectScore>(dir / "scores.jsonl");
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        check(loaded[i].run_sum() == scores[i].run_sum(), "run sum survives the round trip");
        check(loaded[i].mean() == loaded[i].run_sum() / 5.0, "mean is exactly sum/5");
    }

    // Randomized groups vs a two-pass long-double oracle at 1e-9.
    std::mt19937 rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 1 + rng() % 600;
        std::vector<evaluation::ScoredTranslation> group(n);
        for (auto& g : group) {
            g.faith_run_sum = 5 + static_cast<int>(rng() % 21);
            g.crea_run_sum = 5 + static_cast<int>(rng() % 21);
        }
        auto stats = evaluation::aggregate("X", Language::Chinese, group);
        long double mean = 0.0L, mean_c = 0.0L;
        for (const auto& g : group) {
            mean += static_cast<long double>(g.faith_run_sum) / 5.0L;
            mean_c += static_cast<long double>(g.crea_run_sum) / 5.0L;
        }
        mean /= static_cast<long double>(n);
        mean_c /= static_cast<long double>(n);
        long double var = 0.0L, var_c = 0.0L;
        for (const auto& g : group) {
            long double d = static_cast<long double>(g.faith_run_sum) / 5.0L - mean;
            var += d * d;
            long double dc = static_cast<long double>(g.crea_run_sum) / 5.0L - mean_c;
            var_c += dc * dc;
        }
        var /= static_cast<long double>(n);
        var_c /= static_cast<long double>(n);
        check(std::abs(stats.mean_f - static_cast<double>(mean)) < 1e-9, "mean_f oracle");
        check(std::abs(stats.std_f - static_cast<double>(std::sqrt(var))) < 1e-9,
              "std_f oracle");
        check(std::abs(stats.mean_c - static_cast<double>(mean_c)) < 1e-9, "mean_c oracle");
        check(std::abs(stats.std_c - static_cast<double>(std::sqrt(var_c))) < 1e-9,
              "std_c oracle");
    }

    // The published extension-table shape: n=500 rows whose aggregate
    // reproduces faithfulness 4.27 ± 0.62 and creativity 4.08 ± 0.36.
    auto faith = engineer_run_sums(500, 10675, 232640, 232794);
    auto crea = engineer_run_sums(500, 10200, 209656, 209745);
    std::vector<evaluation::ScoredTranslation> group(500);
    for (std::size_t i = 0; i < 500; ++i) {
        group[i].faith_run_sum = faith[i];
        group[i].crea_run_sum = crea[i];
    }
    auto stats = evaluation::aggregate("ZeroShotCreatively", Language::Chinese, group);
    check_eq(stats.n, 500LL, "fixture row count");
    check_eq(round2(stats.mean_f), 4.27, "fixture mean_f rounds to the published value");
    check_eq(round2(stats.std_f), 0.62, "fixture std_f rounds to the published value");
    check_eq(round2(stats.mean_c), 4.08, "fixture mean_c rounds to the published value");
    check_eq(round2(stats.std_c), 0.36, "fixture std_c rounds to the published value");
}

// ---------------------------------------------------------------------------
// Criterion 6: few-shot pool rule
// ---------------------------------------------------------------------------

void criterion_fewshot_rule() {
    std::mt19937 rng(99);
    int failures = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        evaluation::PoolCandidate c;
        c.source_sentence = "s";
        c.translation = "t";
        for (auto& r : c.creativity_runs) r = 1 + static_cast<int>(rng() % 5);
        bool expected =
            *std::max_element(c.creativity_runs.begin(), c.creativity_runs.end()) == 5;
        bool included;
        try {
            std::vector<evaluation::PoolCandidate> one{c};
            included = evaluation::select_fewshot_pool(one).size() == 1;
        } catch (const evaluation::EmptyPoolError&) {
            included = false;
        }
        if (included != expected) ++failures;
    }
    check_eq(failures, 0, "pool membership disagreements over 2000 random run vectors");
}

// ---------------------------------------------------------------------------
// Criterion 7: replay determinism of the full chain
// ---------------------------------------------------------------------------

void criterion_determinism() {
    const fs::path& out_a = chain_out_a();
    fs::path out_b = chain_fixture().base / "out_b";
    run_chain(out_b);

    std::vector<std::string> names_a, names_b;
    for (const auto& entry : fs::directory_iterator(out_a)) {
        names_a.push_back(entry.path().filename().string());
    }
    for (const auto& entry : fs::directory_iterator(out_b)) {
        names_b.push_back(entry.path().filename().string());
    }
    std::sort(names_a.begin(), names_a.end());
    std::sort(names_b.begin(), names_b.end());
    check(names_a == names_b, "both runs must emit the same file set");
    check(!names_a.empty(), "chain emitted no files");

    for (const std::string& name : names_a) {
        std::string a = read_file(out_a / name);
        std::string b = read_file(out_b / name);
        std::uint64_t ha = fnv1a64(a), hb = fnv1a64(b);
        check(ha == hb && a == b, "file differs between identical replay runs: " + name);
    }
}

// ---------------------------------------------------------------------------
// Criterion 8: saturation curves
// ---------------------------------------------------------------------------

void criterion_saturation() {
    // Hand-computed fixtures.
    {
        std::vector<std::string> spans{"in awe", "in awe"};
        auto curve = analysis::unigram_curve("id", spans);
        check(curve.points.size() == 2 && curve.points[0].k == 1 &&
                  curve.points[0].unique_unigrams == 2 && curve.points[1].k == 2 &&
                  curve.points[1].unique_unigrams == 2,
              "fixture [in awe, in awe] must be [(1,2),(2,2)]");
    }
    {
        std::vector<std::string> spans{"in awe", "taken by surprise"};
        auto curve = analysis::unigram_curve("id", spans);
        check(curve.points[0].unique_unigrams == 2 && curve.points[1].unique_unigrams == 5,
              "fixture [in awe, taken by surprise] must be [(1,2),(2,5)]");
    }
    {
        std::vector<std::string> spans{"in awe", "taken by surprise", "in awe again"};
        auto curve = analysis::unigram_curve("id", spans);
        check(curve.points[2].unique_unigrams == 6, "3-span fixture must end at 6 unigrams");
    }

    // The extension-run shape: 10 sentences x 4 strategies = 40 per idiom.
    std::vector<std::string> extension_spans;
    for (int sentence = 0; sentence < 10; ++sentence) {
        for (int strategy = 0; strategy < 4; ++strategy) {
            extension_spans.push_back("span s" + std::to_string(sentence) + " v" +
                                      std::to_string(strategy));
        }
    }
    auto extension_curve = analysis::unigram_curve("id", extension_spans);
    check_eq(extension_curve.points.size(), static_cast<std::size_t>(40),
             "extension curve length (10 sentences x 4 strategies)");
    check_eq(extension_curve.points.back().k, 40, "final k");

    // Monotone non-decreasing on randomized span lists.
    std::mt19937 rng(2024);
    const std::vector<std::string> vocab{"in",      "awe",     "taken",   "by",
                                         "surprise", "respect", "phoenix", "comet"};
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::string> spans;
        int n = 1 + static_cast<int>(rng() % 30);
        for (int i = 0; i < n; ++i) {
            std::string span;
            int words = static_cast<int>(rng() % 6);
            for (int w = 0; w < words; ++w) span += vocab[rng() % vocab.size()] + " ";
            spans.push_back(span);
        }
        auto curve = analysis::unigram_curve("id", spans);
        for (std::size_t k = 1; k < curve.points.size(); ++k) {
            if (curve.points[k].unique_unigrams < curve.points[k - 1].unique_unigrams) {
                ++violations;
            }
        }
    }
    check_eq(violations, 0, "monotonicity violations over 1000 randomized span lists");
}

// ---------------------------------------------------------------------------
// Criterion 9: span validation rate over a 2000-record fixture
// ---------------------------------------------------------------------------

void criterion_span_rate() {
    const std::set<int> mangled{100, 500, 900, 1300, 1700, 1999};
    testsupport::SyntheticConfig config;
    config.mangle_span = [&mangled](int ordinal) { return mangled.count(ordinal) > 0; };

    auto store = std::make_shared<backends::ReplayStore>();
    testsupport::SyntheticBackend capture({}, store.get(), config);
    const auto& templates = prompts::TemplateSet::embedded();

    // 50 idioms x 10 sentences x 4 strategies = 2000 extraction units.
    const std::array<Strategy, 4> strategies{Strategy::ZeroShotCreatively,
                                             Strategy::AnalogyCreative, Strategy::FewShot,
                                             Strategy::FewShotCreatively};
    struct Unit {
        Idiom idiom;
        std::string source;
        TranslationRecord record;
    };
    std::vector<Unit> units;
    for (int i = 0; i < 50; ++i) {
        Idiom idiom = Idiom::make("词组" + std::to_string(i), Language::Chinese);
        for (int sentence = 0; sentence < 10; ++sentence) {
            for (std::size_t s = 0; s < strategies.size(); ++s) {
                Unit unit;
                unit.idiom = idiom;
                unit.source = "Source " + std::to_string(sentence) + " uses " + idiom.surface;
                unit.record.idiom_id = idiom.id;
                unit.record.sentence_index = sentence;
                unit.record.strategy = std::string(strategy_name(strategies[s]));
                unit.record.text = "Translation piece p" + std::to_string(i) + "-" +
                                   std::to_string(sentence) + "-" + std::to_string(s) +
                                   " of sample s" + std::to_string(i * 40 + sentence * 4 +
                                                                   static_cast<int>(s)) +
                                   ".";
                units.push_back(std::move(unit));
            }
        }
    }
    check_eq(units.size(), static_cast<std::size_t>(2000), "fixture unit count");
    for (const Unit& unit : units) {
        analysis::extract_span(capture, templates, unit.idiom, unit.source, unit.record);
    }

    store->rewind();
    backends::ReplayBackend replay(store, backends::BackendModels{});
    long long matches = 0;
    for (const Unit& unit : units) {
        auto span = analysis::extract_span(replay, templates, unit.idiom, unit.source,
                                           unit.record);
        if (span.is_substring) ++matches;
    }
    check_eq(matches, 1994LL, "substring matches out of 2000 (six planted mismatches)");
}

// ---------------------------------------------------------------------------
// Criterion 10: prompt goldens, byte for byte
// ---------------------------------------------------------------------------

void criterion_prompt_goldens() {
    const auto& T = prompts::TemplateSet::embedded();
    const Idiom idiom = Idiom::make("刮目相看", Language::Chinese);
    const std::string s = "小明的成绩提高得非常快，让老师和同学们都刮目相看。";
    const std::string target =
        "Xiaoming's grades soared impressively, leaving both teachers and classmates in awe.";
    int checked = 0;

    auto expect = [&](const std::vector<prompts::Message>& messages,
                      const std::string& golden, const std::string& what) {
        check(messages.size() == 1 && messages[0].role == prompts::Role::User,
              what + ": expected a single user message");
        if (messages[0].content != golden) {
            throw CheckError(what + " diverges from the transcribed template:\n--- rendered\n" +
                             messages[0].content + "\n--- golden\n" + golden);
        }
        ++checked;
    };

    expect(prompts::render_sentence_gen(T, idiom),
           "Can you make 10 Chinese sentences with the Chinese idiom 刮目相看? Only list "
           "sentences. Do not explain.",
           "sentence_gen");

    auto tr = [&](Strategy strategy) {
        return prompts::render_translation(T, strategy, s, Language::Chinese);
    };
    expect(tr(Strategy::Baseline),
           "Please translate the following sentence from Chinese to English:\n" + s,
           "Baseline");
    expect(tr(Strategy::DiversityExplicit1),
           "Please generate 5 different translations of the following sentence from Chinese "
           "to English:\n" + s,
           "DiversityExplicit");
    expect(tr(Strategy::ZeroShotCreatively),
           "Please creatively translate the following sentence from Chinese to English:\n" + s,
           "ZeroShotCreatively");
    expect(tr(Strategy::ContextExplicitNewsReport),
           "The sentence below comes from a news report. Please translate it from Chinese to "
           "English:\n" + s,
           "ContextExplicit/news");
    expect(tr(Strategy::ContextExplicitRomanceNovel),
           "The sentence below comes from a romance novel. Please translate it from Chinese "
           "to English:\n" + s,
           "ContextExplicit/romance");
    expect(tr(Strategy::ContextExplicitEverydayConversation),
           "The sentence below comes from an everyday conversation. Please translate it from "
           "Chinese to English:\n" + s,
           "ContextExplicit/conversation");
    expect(tr(Strategy::ContextExplicitHistoryBook),
           "The sentence below comes from a history book. Please translate it from Chinese "
           "to English:\n" + s,
           "ContextExplicit/history");
    expect(tr(Strategy::AnalogyNatural),
           "Please translate the following sentence from Chinese to English:\n" + s +
               "\nIn the translation, please use an analogy commonly used in English.",
           "AnalogyNatural");
    expect(tr(Strategy::AnalogyCreative),
           "Please translate the following sentence from Chinese to English:\n" + s +
               "\nIn the translation, please create a new analogy that has not been commonly "
               "used in English.",
           "AnalogyCreative");
    expect(tr(Strategy::ShuffleOrder),
           "Please translate the following sentence from Chinese to English:\n" + s +
               "\nPlease try to change the order of clauses to make the translation more "
               "natural.",
           "ShuffleOrder");
    expect(tr(Strategy::Succinct),
           "Please translate the following sentence from Chinese to English:\n" + s +
               "\nPlease translate the Chinese idiom appeared in the sentence as succinctly "
               "as possible.",
           "Succinct");
    expect(tr(Strategy::TwoStep),
           "Please rewrite the following sentence in Chinese without using a Chinese "
           "idiom:\n" + s + "\nPlease translate the rewritten sentence to English.",
           "TwoStep");
    expect(tr(Strategy::Discontinuous1),
           "Please translate the following sentence from Chinese to English:\n" + s +
               "\nPlease do not use a continuous span to translate the Chinese idiom "
               "appeared in the sentence.",
           "Discontinuous1");
    expect(tr(Strategy::Discontinuous2),
           "Please translate the following sentence from Chinese to English:\n" + s +
               "\nPlease do not use a multi-word expression to translate the Chinese idiom "
               "appeared in the sentence.",
           "Discontinuous2");

    prompts::Exchange de_exchange{
        "Please generate 5 different translations of the following sentence from Chinese to "
        "English:\n" + s,
        "1. a\n2. b\n3. c\n4. d\n5. e"};
    auto dialog = prompts::render_translation(T, Strategy::DiversityDialog1, s,
                                              Language::Chinese, {}, &de_exchange);
    check(dialog.size() == 3 && dialog[2].content ==
              "Please generate another 5 different translations.",
          "DiversityDialog follow-up text");
    ++checked;

    std::vector<prompts::FewShotExample> examples;
    for (int i = 1; i <= 5; ++i) {
        examples.push_back(prompts::FewShotExample{"源" + std::to_string(i),
                                                   "target " + std::to_string(i),
                                                   Language::Chinese});
    }
    std::string few_shot_body;
    for (int i = 1; i <= 5; ++i) {
        few_shot_body += "Chinese: 源" + std::to_string(i) + "\nEnglish: target " +
                         std::to_string(i) + "\n";
    }
    expect(prompts::render_translation(T, Strategy::FewShot, s, Language::Chinese, examples),
           "Please translate the following sentences from Chinese to English:\n" +
               few_shot_body + "Chinese: " + s + "\nEnglish:",
           "FewShot");
    expect(prompts::render_translation(T, Strategy::FewShotCreatively, s, Language::Chinese,
                                       examples),
           "Please creatively translate the following sentences from Chinese to English:\n" +
               few_shot_body + "Chinese: " + s + "\nEnglish:",
           "FewShotCreatively");

    expect(prompts::render_evaluation(T, Aspect::Faithfulness, idiom, s, target),
           "Please rate the faithfulness of the following idiom translation within a "
           "sentence.\nIdiom to be translated: 刮目相看\nOriginal sentence containing this "
           "idiom: " + s + "\nTranslation: " + target +
               "\nYour faithfulness rating should be a score from 1 to 5, where 1 is not "
               "faithful at all and 5 is perfectly faithful. Return a single number as your "
               "rating.",
           "evaluation/faithfulness");
    expect(prompts::render_evaluation(T, Aspect::Creativity, idiom, s, target),
           "Please rate the creativity of the following idiom translation within a "
           "sentence.\nIdiom to be translated: 刮目相看\nOriginal sentence containing this "
           "idiom: " + s + "\nTranslation: " + target +
               "\nYour creativity rating should be a score from 1 to 5, where 1 is not "
               "creative at all (just plain language) and 5 is perfectly creative. Return a "
               "single number as your rating.",
           "evaluation/creativity");

    expect(prompts::render_span_extraction(T, idiom, s, target),
           "Given the English translation of the Chinese sentence, please only output the "
           "span that corresponds to the Chinese idiom.\nChinese sentence: " + s +
               "\nEnglish translation: " + target + "\nChinese idiom: 刮目相看\nSpan:",
           "span_extraction");

    expect(prompts::render_mining(T, "an", 200),
           "Give 200 Chinese idioms that begin with an. Only list idioms. Do not explain "
           "them. No duplicates.",
           "mining");
    expect(prompts::render_verification(T, "按兵不动"),
           "Is 按兵不动 a Chinese idiom? Output yes or no.", "verification");
    expect(prompts::render_explanation(T, "落翅螳螂"),
           "Is 落翅螳螂 a Chinese idiom? Please explain.", "explanation");

    expect(prompts::render_instruction_gen(T, prompts::CotAspect::Faithful, Language::Chinese),
           "If you are asked to translate a paragraph that contains a Chinese idiom, what "
           "would you do to ensure that the translation of the idiom is faithful?",
           "instruction/faithful");
    expect(prompts::render_instruction_gen(T, prompts::CotAspect::Creative, Language::Chinese),
           "If you are asked to translate a paragraph that contains a Chinese idiom, what "
           "would you do to ensure that the translation of the idiom is creative?",
           "instruction/creative");
    expect(prompts::render_instruction_gen(T, prompts::CotAspect::Theme, Language::Chinese),
           "If you are asked to translate a paragraph that contains a Chinese idiom, what "
           "would you do to ensure that the translation of the idiom matches the theme of "
           "its context?",
           "instruction/theme");

    expect(prompts::render_paragraph_gen(T, Genre::NewsReport, Language::Chinese, s),
           "Please write a Chinese paragraph that comes from a news report and contains the "
           "following sentence:\n" + s,
           "paragraph_gen");

    const std::string paragraph = "开头。" + s + "结尾。";
    prompts::CotInstructionCache cache;
    cache.put(prompts::CotAspect::Faithful, Language::Chinese, "FAITHFUL STEPS");
    cache.put(prompts::CotAspect::Creative, Language::Chinese, "CREATIVE STEPS");
    cache.put(prompts::CotAspect::Theme, Language::Chinese, "THEME STEPS");
    auto pp = [&](ParagraphKind kind, std::span<const prompts::Exchange> turns = {}) {
        return prompts::render_paragraph_prompt(T, kind, Language::Chinese, idiom, paragraph,
                                                cache, turns);
    };
    expect(pp(ParagraphKind::Baseline),
           "Please translate the following paragraph from Chinese to English.\n" + paragraph,
           "paragraph/baseline");
    expect(pp(ParagraphKind::FaithfulSimple),
           "Please translate the following paragraph from Chinese to English.\nPlease "
           "translate the idiom 刮目相看 faithfully. Do not explain.\n" + paragraph,
           "paragraph/faithful_simple");
    expect(pp(ParagraphKind::CreativeSimple),
           "Please translate the following paragraph from Chinese to English.\nPlease "
           "translate the idiom 刮目相看 creatively. Do not explain.\n" + paragraph,
           "paragraph/creative_simple");
    expect(pp(ParagraphKind::ThemeSimple),
           "Please translate the following paragraph from Chinese to English.\nPlease "
           "translate the idiom 刮目相看 in a way that matches the theme. Do not "
           "explain.\n" + paragraph,
           "paragraph/theme_simple");
    expect(pp(ParagraphKind::FaithfulCot),
           "Please translate the following paragraph from Chinese to English.\nPlease "
           "translate the idiom 刮目相看 faithfully. Do not explain.\n" + paragraph +
               "\nPlease follow the instructions below:\nFAITHFUL STEPS",
           "paragraph/faithful_cot");
    expect(pp(ParagraphKind::CreativeCot),
           "Please translate the following paragraph from Chinese to English.\nPlease "
           "translate the idiom 刮目相看 creatively. Do not explain.\n" + paragraph +
               "\nPlease follow the instructions below:\nCREATIVE STEPS",
           "paragraph/creative_cot");
    expect(pp(ParagraphKind::ThemeCot),
           "Please translate the following paragraph from Chinese to English.\nPlease "
           "translate the idiom 刮目相看 in a way that matches the theme. Do not "
           "explain.\n" + paragraph + "\nPlease follow the instructions below:\nTHEME STEPS",
           "paragraph/theme_cot");
    expect(pp(ParagraphKind::FaithfulMultiTurn),
           "Please translate the following paragraph from Chinese to English.\nPlease "
           "translate the idiom 刮目相看 faithfully. Do not explain.\n" + paragraph,
           "paragraph/faithful_multi_turn");

    std::vector<prompts::Exchange> turns{{"FMT PROMPT", "FMT REPLY"}};
    auto creative_mt = pp(ParagraphKind::CreativeMultiTurn, turns);
    check(creative_mt.size() == 3 &&
              creative_mt[2].content ==
                  "Could you provide an alternative translation of the paragraph, where the "
                  "idiom is translated more creatively? The translation you provided has "
                  "been widely used elsewhere.",
          "paragraph/creative_multi_turn");
    ++checked;
    turns.push_back({"CMT PROMPT", "CMT REPLY"});
    auto theme_mt = pp(ParagraphKind::ThemeMultiTurn, turns);
    check(theme_mt.size() == 5 &&
              theme_mt[4].content ==
                  "Could you provide an alternative translation of the paragraph, where the "
                  "idiom is translated with words that better match the context? The "
                  "translation you provided can be used verbatim in a different context.",
          "paragraph/theme_multi_turn");
    ++checked;

    check(checked >= 36, "golden coverage dropped below the full prompt inventory");
}

struct Criterion {
    int id;
    const char* name;
    std::function<void()> run;
};

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: idiomct_acceptance <path-to-cli>\n");
        return 2;
    }
    g_cli_path = argv[1];

    const std::vector<Criterion> criteria = {
        {1, "count law: 5 idioms -> 50 sentences, 27 per translated sentence",
         criterion_count_law},
        {2, "pareto fronts of the published score table match the oracle",
         criterion_pareto_table},
        {3, "pareto properties on 1000 randomized stat sets", criterion_pareto_properties},
        {4, "first-digit score parsing over the 50-case fixture", criterion_score_parsing},
        {5, "aggregation matches the rational oracle and published shape",
         criterion_aggregation},
        {6, "few-shot pool membership iff a creativity run is 5", criterion_fewshot_rule},
        {7, "byte-identical outputs across two replay runs", criterion_determinism},
        {8, "saturation curves: fixtures, 40-point shape, monotone", criterion_saturation},
        {9, "span substring rate 1994/2000 on the planted fixture", criterion_span_rate},
        {10, "every rendered prompt matches its transcribed template",
         criterion_prompt_goldens},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        try {
            criterion.run();
            std::printf("PASS %2d: %s\n", criterion.id, criterion.name);
        } catch (const std::exception& e) {
            ++failures;
            std::printf("FAIL %2d: %s\n         %s\n", criterion.id, criterion.name, e.what());
        }
        std::fflush(stdout);
    }
    if (failures != 0) {
        std::printf("%d of %zu criteria failed\n", failures, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
