#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace voxweave {

struct ThinkingTrace {
    std::size_t thinking_tokens = 0;
    std::size_t response_tokens = 0;
};

/// 1 when the reasoning is non-empty and at most `max_len` tokens, else 0.
int binary_length_reward(const ThinkingTrace& trace, std::size_t max_len);

/// (r_i - mean) / std with the population standard deviation. A group with
/// zero spread gets all-zero advantages. Throws GroupTooSmall below two rewards.
std::vector<double> group_advantage(std::span<const double> rewards);

/// Response-quality reward from a trained model. No implementation ships;
/// offline scoring plugs one in here.
class RewardModel {
public:
    virtual ~RewardModel() = default;
    virtual double score(std::string_view prompt, std::string_view response) = 0;
};

// Schedule of the reinforcement-learning stages the rewards were used in.
// Kept for reference; nothing here trains a policy.
namespace rl_schedule {
inline constexpr int kLengthRewardPpoIterations = 60;
inline constexpr int kRewardModelPpoIterations = 120;
inline constexpr int kGrpoIterations = 400;
inline constexpr int kGlobalBatchSize = 64;
inline constexpr double kActorLearningRate = 1e-6;
inline constexpr double kCriticLearningRate = 2.5e-6;
}  // namespace rl_schedule

}  // namespace voxweave
