#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "voxweave/error.hpp"
#include "voxweave/metrics.hpp"

using namespace voxweave;

namespace {

// Plain recursion over the three edit operations.
std::size_t brute_distance(const std::string& a, const std::string& b) {
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    const std::string ra = a.substr(1), rb = b.substr(1);
    if (a[0] == b[0]) return brute_distance(ra, rb);
    return 1 + std::min({brute_distance(ra, rb), brute_distance(ra, b), brute_distance(a, rb)});
}

std::vector<char> chars(const std::string& s) { return {s.begin(), s.end()}; }

// N-gram counting written independently from the library.
double oracle_bleu(const std::vector<TokenList>& refs, const TokenList& hyp, std::size_t max_n) {
    if (hyp.empty()) return 0.0;
    double log_sum = 0.0;
    int orders = 0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        if (hyp.size() < n) continue;
        std::map<TokenList, int> hyp_counts;
        for (std::size_t i = 0; i + n <= hyp.size(); ++i)
            ++hyp_counts[TokenList(hyp.begin() + i, hyp.begin() + i + n)];
        std::map<TokenList, int> max_ref;
        for (const auto& r : refs) {
            std::map<TokenList, int> c;
            for (std::size_t i = 0; i + n <= r.size(); ++i) ++c[TokenList(r.begin() + i, r.begin() + i + n)];
            for (const auto& [g, k] : c) max_ref[g] = std::max(max_ref[g], k);
        }
        int matched = 0, total = 0;
        for (const auto& [g, k] : hyp_counts) {
            total += k;
            matched += std::min(k, max_ref[g]);
        }
        if (matched == 0) return 0.0;
        log_sum += std::log(static_cast<double>(matched) / total);
        ++orders;
    }
    std::size_t best = refs[0].size();
    for (const auto& r : refs) {
        const auto d = [&](std::size_t len) { return len > hyp.size() ? len - hyp.size() : hyp.size() - len; };
        if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
    }
    const double bp = hyp.size() >= best ? 1.0 : std::exp(1.0 - static_cast<double>(best) / hyp.size());
    return 100.0 * bp * std::exp(log_sum / orders);
}

TokenList random_sentence(std::mt19937& rng, std::size_t max_len) {
    static const std::vector<std::string> words{"the", "cat", "sat", "on", "a", "mat", "dog", "ran"};
    std::uniform_int_distribution<std::size_t> len(1, max_len), w(0, words.size() - 1);
    TokenList out(len(rng));
    for (auto& t : out) t = words[w(rng)];
    return out;
}

ToolCallOutcome outcome(bool gold, const char* tool, bool predicted) {
    ToolCallOutcome o;
    o.gold_trigger = gold;
    if (gold) {
        o.gold_tool = tool;
        o.gold_params = std::map<std::string, std::string>{{"location", "x"}};
    }
    if (predicted) o.predicted_call = ToolCall{tool, {{"location", "x"}}};
    return o;
}

}  // namespace

TEST_CASE("edit distance examples") {
    const std::vector<std::string> abc{"a", "b", "c"};
    CHECK(edit_distance(abc, abc) == EditCounts{0, 0, 0, 0});
    const std::vector<std::string> axc{"a", "x", "c"};
    CHECK(edit_distance(abc, axc) == EditCounts{1, 1, 0, 0});
    const std::vector<std::string> ab{"a", "b"}, none;
    CHECK(edit_distance(ab, none) == EditCounts{2, 0, 0, 2});
    CHECK(edit_distance(none, ab) == EditCounts{2, 0, 2, 0});
}

TEST_CASE("edit distance agrees with brute-force recursion") {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> len(0, 6), sym(0, 2);
    for (int i = 0; i < 3000; ++i) {
        std::string a, b;
        for (int k = len(rng); k > 0; --k) a += static_cast<char>('a' + sym(rng));
        for (int k = len(rng); k > 0; --k) b += static_cast<char>('a' + sym(rng));
        const auto c = edit_distance(chars(a), chars(b));
        REQUIRE(c.distance == brute_distance(a, b));
        REQUIRE(c.substitutions + c.insertions + c.deletions == c.distance);
        // Lengths are preserved by the operation counts.
        REQUIRE(a.size() - c.deletions + c.insertions == b.size());
    }
}

TEST_CASE("error rates") {
    const auto en = NormalizationProfile::english_words();
    const auto zh = NormalizationProfile::chinese_chars();
    CHECK(error_rate("a b c", "a b c", en) == 0.0);
    CHECK(round_half_away(error_rate("a b c", "a x c", en), 2) == 33.33);
    CHECK(round_half_away(error_rate("你好吗", "你好", zh), 2) == 33.33);
    CHECK(error_rate("Hello, World!", "hello world", en) == 0.0);
    CHECK(error_rate("你 好，吗", "你好吗", zh) == 0.0);
    CHECK_THROWS_AS(error_rate("", "x", en), EmptyReference);
    CHECK_THROWS_AS(error_rate(" , . ", "x", en), EmptyReference);
    CHECK(error_rate("a", "a b c", en) == doctest::Approx(200.0));
}

TEST_CASE("pooled error rate sums counts before dividing") {
    const auto en = NormalizationProfile::english_words();
    ErrorRateTotals t;
    t = accumulate_error_rate(t, "a b c d", "a b c d", en);
    t = accumulate_error_rate(t, "x y", "x", en);
    CHECK(t.reference_units == 6);
    CHECK(t.edits.deletions == 1);
    CHECK(t.rate() == doctest::Approx(100.0 / 6));
}

TEST_CASE("normalization and units") {
    const auto en = NormalizationProfile::english_words();
    const auto zh = NormalizationProfile::chinese_chars();
    CHECK(normalize_text("  Hello,   WORLD! ", en) == "hello world");
    CHECK(scoring_units("a  b", en) == std::vector<std::string>{"a", "b"});
    CHECK(scoring_units("你好 吗", zh) == std::vector<std::string>{"你", "好", "吗"});
}

TEST_CASE("bleu examples") {
    const TokenList abcd{"a", "b", "c", "d"};
    const std::vector<TokenList> self{abcd};
    CHECK(bleu(self, abcd) == doctest::Approx(100.0));
    const std::vector<TokenList> disjoint{{"w", "x", "y", "z"}};
    CHECK(bleu(disjoint, abcd) == 0.0);
    const std::vector<TokenList> longer{{"a", "b", "c", "d", "e"}};
    CHECK(bleu(longer, abcd) == doctest::Approx(100.0 * std::exp(1.0 - 5.0 / 4.0)));
    CHECK(bleu(longer, abcd) == doctest::Approx(oracle_bleu(longer, abcd, 4)));
    CHECK(bleu(self, TokenList{}) == 0.0);
    const TokenList two{"a", "b"};
    CHECK(bleu(std::vector<TokenList>{two}, two) == doctest::Approx(100.0));
}

TEST_CASE("bleu matches the n-gram counting oracle") {
    std::mt19937 rng(21);
    std::uniform_int_distribution<int> nrefs(1, 3);
    for (int i = 0; i < 200; ++i) {
        std::vector<TokenList> refs;
        for (int k = nrefs(rng); k > 0; --k) refs.push_back(random_sentence(rng, 12));
        const TokenList hyp = random_sentence(rng, 12);
        REQUIRE(std::abs(bleu(refs, hyp) - oracle_bleu(refs, hyp, 4)) < 1e-9);
    }
}

TEST_CASE("corpus bleu sums statistics") {
    const std::vector<std::vector<TokenList>> refs{{{"a", "b", "c"}}, {{"d", "e", "f"}}};
    const std::vector<TokenList> hyps{{"a", "b", "c"}, {"d", "e", "f"}};
    CHECK(corpus_bleu(refs, hyps) == doctest::Approx(100.0));
    const std::vector<TokenList> bad{{"a", "b", "c"}, {"x", "y", "z"}};
    const double unsmoothed = corpus_bleu(refs, bad);
    CHECK(unsmoothed > 0.0);
    CHECK(unsmoothed < 100.0);
    const std::vector<std::vector<TokenList>> one{{{"a", "b", "c", "d"}}};
    const std::vector<TokenList> partial{{"a", "b", "x", "y"}};
    CHECK(corpus_bleu(one, partial) == 0.0);
    CHECK(corpus_bleu(one, partial, 4, BleuSmoothing::Floor) > 0.0);
    CHECK_THROWS_AS(corpus_bleu(one, hyps), InvalidConfig);
}

TEST_CASE("half-away-from-zero rounding on decimal ties") {
    CHECK(round_half_away(38.835, 2) == 38.84);
    CHECK(round_half_away(27.855, 2) == 27.86);
    CHECK(round_half_away(4.175, 2) == 4.18);
    CHECK(round_half_away(3.745, 2) == 3.75);
    CHECK(round_half_away(5.345, 2) == 5.35);
    CHECK(round_half_away(29.605, 2) == 29.61);
    CHECK(round_half_away(-2.5, 0) == -3.0);
    CHECK(round_half_away(77.4333, 1) == 77.4);
}

TEST_CASE("mean of subsets") {
    const std::vector<double> a{98, 92, 78, 64, 46, 72, 78, 70, 78, 84, 82};
    CHECK(mean_of_subsets(a) == 76.55);
    const std::vector<double> b{82.0, 75.7, 74.6};
    CHECK(mean_of_subsets(b) == 77.43);
    CHECK(mean_of_subsets(b, 1) == 77.4);
    const std::vector<double> c{48.40, 29.27};
    CHECK(mean_of_subsets(c) == 38.84);
    CHECK_THROWS(mean_of_subsets(std::vector<double>{}));
}

TEST_CASE("tool-call funnel with injected confusion counts") {
    std::vector<ToolCallOutcome> outs;
    for (int i = 0; i < 195; ++i) outs.push_back(outcome(true, "weather", true));
    for (int i = 0; i < 5; ++i) outs.push_back(outcome(true, "weather", false));
    for (int i = 0; i < 10; ++i) outs.push_back(outcome(false, "weather", true));
    for (int i = 0; i < 190; ++i) outs.push_back(outcome(false, "weather", false));
    const auto m = toolcall_metrics(outs);
    CHECK(m.true_positives == 195);
    CHECK(m.false_positives == 10);
    CHECK(m.false_negatives == 5);
    CHECK(m.true_negatives == 190);
    CHECK(format_percent(m.precision.percent()) == "95.12");
    CHECK(format_percent(m.recall.percent()) == "97.50");
    CHECK(m.type_accuracy.percent() == 100.0);
    CHECK(m.parameter_accuracy.percent() == 100.0);
}

TEST_CASE("tool-call funnel edge cases") {
    std::vector<ToolCallOutcome> silent;
    for (int i = 0; i < 4; ++i) silent.push_back(outcome(i % 2 == 0, "weather", false));
    const auto m = toolcall_metrics(silent);
    CHECK(m.recall.percent() == 0.0);
    CHECK_FALSE(m.precision.percent().has_value());
    CHECK(format_percent(m.precision.percent()) == "N/A");

    ToolCallOutcome dt;
    dt.gold_trigger = true;
    dt.gold_tool = "datetime";
    dt.gold_params = std::map<std::string, std::string>{};
    dt.predicted_call = ToolCall{"datetime", {}};
    const std::vector<ToolCallOutcome> dts{dt, dt};
    const auto d = toolcall_metrics(dts);
    CHECK(d.type_accuracy.percent() == 100.0);
    CHECK_FALSE(d.parameter_accuracy.percent().has_value());

    ToolCallOutcome wrong = outcome(true, "weather", true);
    wrong.predicted_call->name = "web_search";
    const std::vector<ToolCallOutcome> ws{wrong};
    const auto w = toolcall_metrics(ws);
    CHECK(w.type_accuracy.percent() == 0.0);
    CHECK_FALSE(w.parameter_accuracy.percent().has_value());
}

TEST_CASE("argument matching is whitespace and case tolerant") {
    CHECK(arguments_match({{"location", "New  York "}}, {{"location", "new york"}}));
    CHECK_FALSE(arguments_match({{"location", "Paris"}}, {{"location", "Rome"}}));
    CHECK_FALSE(arguments_match({{"location", "Paris"}}, {}));
}
