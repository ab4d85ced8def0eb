// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace disputekit {

struct Prompts {
    std::string adjudicator;
    std::string analyst;
    std::string refiner;
    std::string summarizer;
};

/// Default role prompts. The adjudicator prompt carries one extra protocol
/// sentence asking for the final verdict inside <verdict></verdict>.
const Prompts& default_prompts();

/// Replaces each non-empty path's role prompt with that file's contents.
Prompts load_prompts(const std::string& adjudicator_path, const std::string& analyst_path,
                     const std::string& refiner_path, const std::string& summarizer_path);

} // namespace disputekit
