#include "voxweave/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "voxweave/error.hpp"

namespace voxweave {

int binary_length_reward(const ThinkingTrace& trace, std::size_t max_len) {
    if (max_len < 1) throw InvalidConfig("max thinking length must be >= 1");
    return trace.thinking_tokens > 0 && trace.thinking_tokens <= max_len ? 1 : 0;
}

std::vector<double> group_advantage(std::span<const double> rewards) {
    if (rewards.size() < 2) throw GroupTooSmall(rewards.size());
    std::vector<double> adv(rewards.size(), 0.0);
    // Checked exactly: summing equal values can leave a spurious ulp of variance.
    if (std::adjacent_find(rewards.begin(), rewards.end(), std::not_equal_to<>()) == rewards.end())
        return adv;

    const auto n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double sd = std::sqrt(var / n);

    if (sd == 0.0) return adv;
    for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / sd;
    return adv;
}

}  // namespace voxweave
