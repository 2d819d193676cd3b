#pragma once

// Closed-form goal-reaching policies pi_0, one per benchmark environment.
// Outputs are clipped to the environment's action box.

#include <string_view>

#include "calf/env/core.hpp"

namespace calf::nominal {

using env::ActionVec;
using env::EnvironmentSpec;
using env::StateVec;

/// Raw (unclipped) law for `env_name`. Throws ConfigError for unknown names.
ActionVec raw_action(std::string_view env_name, const StateVec& s);

/// raw_action followed by clipping into spec.action_bounds.
ActionVec nominal_action(const EnvironmentSpec& spec, const StateVec& s);

/// Episode callback that always plays pi_0.
env::StepPolicy make_nominal_agent(const EnvironmentSpec& spec);

}  // namespace calf::nominal
