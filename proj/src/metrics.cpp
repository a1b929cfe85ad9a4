#include "voxweave/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "voxweave/error.hpp"
#include "voxweave/text.hpp"

namespace voxweave {

std::string normalize_text(std::string_view text, const NormalizationProfile& profile) {
    std::string kept;
    for (char32_t cp : utf8_decode(text)) {
        if (profile.strip_punctuation && is_punctuation(cp)) continue;
        if (profile.lowercase && cp < 0x80) cp = static_cast<char32_t>(std::tolower(static_cast<int>(cp)));
        kept += utf8_encode(cp);
    }
    std::string collapsed = collapse_whitespace(kept);
    if (profile.mode == UnitMode::ChineseChars) std::erase(collapsed, ' ');
    return collapsed;
}

std::vector<std::string> scoring_units(std::string_view text, const NormalizationProfile& profile) {
    const std::string norm = normalize_text(text, profile);
    std::vector<std::string> units;
    if (profile.mode == UnitMode::ChineseChars) {
        for (char32_t cp : utf8_decode(norm)) units.push_back(utf8_encode(cp));
        return units;
    }
    std::size_t start = 0;
    while (start < norm.size()) {
        std::size_t end = norm.find(' ', start);
        if (end == std::string::npos) end = norm.size();
        if (end > start) units.push_back(norm.substr(start, end - start));
        start = end + 1;
    }
    return units;
}

double ErrorRateTotals::rate() const {
    if (reference_units == 0) throw EmptyReference();
    return 100.0 * static_cast<double>(edits.distance) / static_cast<double>(reference_units);
}

ErrorRateTotals accumulate_error_rate(ErrorRateTotals totals, std::string_view ref, std::string_view hyp,
                                      const NormalizationProfile& profile) {
    const auto r = scoring_units(ref, profile);
    if (r.empty()) throw EmptyReference();
    const auto h = scoring_units(hyp, profile);
    const EditCounts e = edit_distance(r, h);
    totals.edits.distance += e.distance;
    totals.edits.substitutions += e.substitutions;
    totals.edits.insertions += e.insertions;
    totals.edits.deletions += e.deletions;
    totals.reference_units += r.size();
    return totals;
}

double error_rate(std::string_view ref, std::string_view hyp, const NormalizationProfile& profile) {
    return accumulate_error_rate({}, ref, hyp, profile).rate();
}

// ---------------------------------------------------------------------------

void BleuStats::add(const BleuStats& other) {
    if (matches.size() < other.matches.size()) {
        matches.resize(other.matches.size());
        totals.resize(other.totals.size());
    }
    for (std::size_t n = 0; n < other.matches.size(); ++n) {
        matches[n] += other.matches[n];
        totals[n] += other.totals[n];
    }
    hyp_length += other.hyp_length;
    ref_length += other.ref_length;
}

namespace {

std::map<TokenList, std::size_t> ngram_counts(const TokenList& tokens, std::size_t n) {
    std::map<TokenList, std::size_t> counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i)
        ++counts[TokenList(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                           tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    return counts;
}

}  // namespace

BleuStats bleu_stats(std::span<const TokenList> refs, const TokenList& hyp, std::size_t max_n) {
    BleuStats s;
    s.matches.assign(max_n, 0);
    s.totals.assign(max_n, 0);
    s.hyp_length = hyp.size();

    bool have_ref = false;
    for (const TokenList& r : refs) {
        const auto diff = [&](std::size_t len) {
            return len > hyp.size() ? len - hyp.size() : hyp.size() - len;
        };
        if (!have_ref || diff(r.size()) < diff(s.ref_length) ||
            (diff(r.size()) == diff(s.ref_length) && r.size() < s.ref_length))
            s.ref_length = r.size();
        have_ref = true;
    }

    for (std::size_t n = 1; n <= max_n; ++n) {
        const auto hyp_counts = ngram_counts(hyp, n);
        std::map<TokenList, std::size_t> max_ref;
        for (const TokenList& r : refs)
            for (const auto& [gram, count] : ngram_counts(r, n)) max_ref[gram] = std::max(max_ref[gram], count);
        for (const auto& [gram, count] : hyp_counts) {
            s.totals[n - 1] += count;
            if (const auto it = max_ref.find(gram); it != max_ref.end())
                s.matches[n - 1] += std::min(count, it->second);
        }
    }
    return s;
}

double bleu_from_stats(const BleuStats& stats, BleuSmoothing smoothing, double floor_epsilon) {
    if (stats.hyp_length == 0) return 0.0;
    // Orders longer than every hypothesis have no n-grams and are left out of
    // the mean, so a short hypothesis identical to its reference still scores 100.
    double log_sum = 0.0;
    std::size_t orders = 0;
    for (std::size_t n = 0; n < stats.totals.size(); ++n) {
        if (stats.totals[n] == 0) continue;
        double matched = static_cast<double>(stats.matches[n]);
        if (matched == 0.0) {
            if (smoothing == BleuSmoothing::None) return 0.0;
            matched = floor_epsilon;
        }
        log_sum += std::log(matched / static_cast<double>(stats.totals[n]));
        ++orders;
    }
    if (orders == 0) return 0.0;
    const double hyp_len = static_cast<double>(stats.hyp_length);
    const double ref_len = static_cast<double>(stats.ref_length);
    const double bp = hyp_len >= ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
    return 100.0 * bp * std::exp(log_sum / static_cast<double>(orders));
}

double bleu(std::span<const TokenList> refs, const TokenList& hyp, std::size_t max_n) {
    return bleu_from_stats(bleu_stats(refs, hyp, max_n));
}

double corpus_bleu(std::span<const std::vector<TokenList>> refs, std::span<const TokenList> hyps,
                   std::size_t max_n, BleuSmoothing smoothing) {
    if (refs.size() != hyps.size()) throw InvalidConfig("corpus BLEU needs one reference set per hypothesis");
    BleuStats total;
    total.matches.assign(max_n, 0);
    total.totals.assign(max_n, 0);
    for (std::size_t i = 0; i < hyps.size(); ++i) total.add(bleu_stats(refs[i], hyps[i], max_n));
    return bleu_from_stats(total, smoothing);
}

TokenList whitespace_tokens(std::string_view text) {
    TokenList out;
    const std::string collapsed = collapse_whitespace(text);
    std::size_t start = 0;
    while (start < collapsed.size()) {
        std::size_t end = collapsed.find(' ', start);
        if (end == std::string::npos) end = collapsed.size();
        out.push_back(collapsed.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------

double round_half_away(double value, int dp) {
    const double scale = std::pow(10.0, dp);
    const double snapped = std::round(value * scale * 1e6) / 1e6;
    return std::round(snapped) / scale;  // std::round already rounds halves away from zero
}

double mean_of_subsets(std::span<const double> values, int dp) {
    if (values.empty()) throw InvalidConfig("mean of an empty set");
    double sum = 0.0;
    for (double v : values) sum += v;
    return round_half_away(sum / static_cast<double>(values.size()), dp);
}

// ---------------------------------------------------------------------------

bool arguments_match(const std::map<std::string, std::string>& gold,
                     const std::map<std::string, std::string>& predicted) {
    const auto canon = [](const std::map<std::string, std::string>& args) {
        std::map<std::string, std::string> out;
        for (const auto& [k, v] : args) out[ascii_lower(trim(k))] = collapse_whitespace(ascii_lower(v));
        return out;
    };
    return canon(gold) == canon(predicted);
}

ToolCallMetrics toolcall_metrics(std::span<const ToolCallOutcome> outcomes) {
    ToolCallMetrics m;
    for (const ToolCallOutcome& o : outcomes) {
        const bool triggered = o.predicted_call.has_value();
        if (o.gold_trigger && triggered) {
            ++m.true_positives;
            ++m.type_accuracy.denominator;
            if (o.gold_tool && o.predicted_call->name == *o.gold_tool) {
                ++m.type_accuracy.numerator;
                if (o.gold_params && !o.gold_params->empty()) {
                    ++m.parameter_accuracy.denominator;
                    if (arguments_match(*o.gold_params, o.predicted_call->arguments))
                        ++m.parameter_accuracy.numerator;
                }
            }
        } else if (o.gold_trigger) {
            ++m.false_negatives;
        } else if (triggered) {
            ++m.false_positives;
        } else {
            ++m.true_negatives;
        }
    }
    m.precision = {m.true_positives, m.true_positives + m.false_positives};
    m.recall = {m.true_positives, m.true_positives + m.false_negatives};
    return m;
}

std::string format_percent(std::optional<double> value, int dp) {
    if (!value) return "N/A";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", dp, round_half_away(*value, dp));
    return buf;
}

}  // namespace voxweave
