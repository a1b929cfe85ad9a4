#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "voxweave/tooling.hpp"

namespace voxweave {

// ---------------------------------------------------------------------------
// Edit distance

struct EditCounts {
    std::size_t distance = 0;
    std::size_t substitutions = 0;
    std::size_t insertions = 0;
    std::size_t deletions = 0;

    friend bool operator==(const EditCounts&, const EditCounts&) = default;
};

/// Unit-cost Levenshtein alignment. The backtrace prefers matches and
/// substitutions, then deletions, then insertions, so the S/I/D split is
/// deterministic.
template <typename T>
EditCounts edit_distance(std::span<const T> ref, std::span<const T> hyp) {
    const std::size_t n = ref.size();
    const std::size_t m = hyp.size();
    std::vector<std::size_t> dp((n + 1) * (m + 1));
    const auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };
    for (std::size_t i = 0; i <= n; ++i) dp[at(i, 0)] = i;
    for (std::size_t j = 0; j <= m; ++j) dp[at(0, j)] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t diag = dp[at(i - 1, j - 1)] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            const std::size_t del = dp[at(i - 1, j)] + 1;
            const std::size_t ins = dp[at(i, j - 1)] + 1;
            dp[at(i, j)] = std::min({diag, del, ins});
        }
    }

    EditCounts c;
    c.distance = dp[at(n, m)];
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0) {
            const bool same = ref[i - 1] == hyp[j - 1];
            if (dp[at(i, j)] == dp[at(i - 1, j - 1)] + (same ? 0 : 1)) {
                if (!same) ++c.substitutions;
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && dp[at(i, j)] == dp[at(i - 1, j)] + 1) {
            ++c.deletions;
            --i;
        } else {
            ++c.insertions;
            --j;
        }
    }
    return c;
}

template <typename T>
EditCounts edit_distance(const std::vector<T>& ref, const std::vector<T>& hyp) {
    return edit_distance(std::span<const T>(ref), std::span<const T>(hyp));
}

// ---------------------------------------------------------------------------
// Error rates

enum class UnitMode { EnglishWords, ChineseChars };

/// Text normalization applied before scoring. Versioned so stored reports
/// can say which rules produced them.
struct NormalizationProfile {
    static constexpr std::string_view kVersion = "norm-v1";

    UnitMode mode = UnitMode::EnglishWords;
    bool lowercase = true;
    bool strip_punctuation = true;

    static NormalizationProfile english_words() { return {UnitMode::EnglishWords}; }
    static NormalizationProfile chinese_chars() { return {UnitMode::ChineseChars}; }
};

/// Lowercases, removes punctuation and collapses whitespace; chinese_chars
/// also removes every remaining space.
std::string normalize_text(std::string_view text, const NormalizationProfile& profile);

/// Scoring units: words for english_words, code points for chinese_chars.
std::vector<std::string> scoring_units(std::string_view text, const NormalizationProfile& profile);

/// 100 * (S + I + D) / |reference units|. Throws EmptyReference.
double error_rate(std::string_view ref, std::string_view hyp, const NormalizationProfile& profile);

struct ErrorRateTotals {
    EditCounts edits;
    std::size_t reference_units = 0;
    double rate() const;
};

/// Pooled counts across utterances (the corpus-level rate).
ErrorRateTotals accumulate_error_rate(ErrorRateTotals totals, std::string_view ref, std::string_view hyp,
                                      const NormalizationProfile& profile);

// ---------------------------------------------------------------------------
// BLEU

enum class BleuSmoothing { None, Floor };

struct BleuStats {
    std::vector<std::size_t> matches;  // clipped n-gram matches per order
    std::vector<std::size_t> totals;   // hypothesis n-grams per order
    std::size_t hyp_length = 0;
    std::size_t ref_length = 0;  // closest reference length, shorter on ties

    void add(const BleuStats& other);
};

using TokenList = std::vector<std::string>;

BleuStats bleu_stats(std::span<const TokenList> refs, const TokenList& hyp, std::size_t max_n = 4);

/// Score in [0, 100] from accumulated statistics.
double bleu_from_stats(const BleuStats& stats, BleuSmoothing smoothing = BleuSmoothing::None,
                       double floor_epsilon = 0.1);

/// Sentence BLEU. An empty hypothesis scores 0.
double bleu(std::span<const TokenList> refs, const TokenList& hyp, std::size_t max_n = 4);

/// Corpus BLEU: statistics are summed over sentences before the geometric mean.
double corpus_bleu(std::span<const std::vector<TokenList>> refs, std::span<const TokenList> hyps,
                   std::size_t max_n = 4, BleuSmoothing smoothing = BleuSmoothing::None);

TokenList whitespace_tokens(std::string_view text);

// ---------------------------------------------------------------------------
// Aggregation

/// Half-away-from-zero rounding to `dp` decimals. The scaled value is first
/// snapped to a 1e-6 grid so binary noise cannot move a decimal tie such as
/// 38.835 below the midpoint.
double round_half_away(double value, int dp);

/// Unweighted mean rounded to `dp` decimals. Requires a non-empty input.
double mean_of_subsets(std::span<const double> values, int dp = 2);

// ---------------------------------------------------------------------------
// Tool-call metrics

struct ToolCallOutcome {
    bool gold_trigger = false;
    std::optional<std::string> gold_tool;
    std::optional<std::map<std::string, std::string>> gold_params;
    std::optional<ToolCall> predicted_call;
};

/// A metric value; nullopt stands for "not applicable" (zero denominator).
struct Ratio {
    std::size_t numerator = 0;
    std::size_t denominator = 0;

    std::optional<double> percent() const {
        if (denominator == 0) return std::nullopt;
        return 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator);
    }
    friend bool operator==(const Ratio&, const Ratio&) = default;
};

/// Funnel of trigger -> type -> parameter. Trigger counts any predicted
/// call. Type accuracy is taken over gold-positive triggered samples;
/// parameter accuracy over type-correct samples whose gold parameters are
/// non-empty.
struct ToolCallMetrics {
    Ratio precision;
    Ratio recall;
    Ratio type_accuracy;
    Ratio parameter_accuracy;
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    std::size_t true_negatives = 0;
};

/// Argument maps compared after trimming, ASCII lowercasing and whitespace collapsing.
bool arguments_match(const std::map<std::string, std::string>& gold,
                     const std::map<std::string, std::string>& predicted);

ToolCallMetrics toolcall_metrics(std::span<const ToolCallOutcome> outcomes);

// ---------------------------------------------------------------------------
// Reports

struct MetricReport {
    std::string name;
    std::optional<double> value;  // nullopt: not applicable
    std::size_t numerator = 0;
    std::size_t denominator = 0;
    std::vector<std::pair<std::string, std::optional<double>>> breakdown;
};

/// "95.12", or "N/A" for a missing value.
std::string format_percent(std::optional<double> value, int dp = 2);

}  // namespace voxweave
