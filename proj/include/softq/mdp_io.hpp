#pragma once

#include <filesystem>
#include <string>

#include "softq/mdp.hpp"

namespace softq {

/// The built-in 2-state / 2-action benchmark MDP used by the presets:
/// gamma = 0.9, near-symmetric transitions, sparse unit-bounded rewards
/// and initial state distribution [0.8, 0.2].
TabularMdp two_state_mdp();

/// Parses the JSON model format.  States and actions are 1-based in the
/// file (rewards are sparse [s, a, s', value] rows); internals are
/// 0-based.  Keys: n_states, n_actions, transitions, rewards, discount,
/// initial_distribution (optional), strict_assumptions (optional).
TabularMdp parse_mdp(const std::string& text);

/// Serializes a model back to the same JSON format.  Loading the output
/// reproduces every stored double bit-exactly.
std::string serialize_mdp(const TabularMdp& mdp);

/// File wrappers around parse_mdp / serialize_mdp.  The name "builtin"
/// (or "builtin:two-state") loads the built-in benchmark model.
TabularMdp load_mdp(const std::string& path_or_builtin);
void save_mdp(const TabularMdp& mdp, const std::filesystem::path& path);

}  // namespace softq
