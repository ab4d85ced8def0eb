// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace disputekit {

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads (0 = hardware
/// concurrency). The first exception thrown by any task is rethrown after all
/// threads join; remaining tasks are skipped.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

} // namespace disputekit
