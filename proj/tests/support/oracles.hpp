// SPDX-License-Identifier: Apache-2.0
#pragma once

// Independent reference implementations used only by tests.

#include "disputekit/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace disputekit::oracle {

/// Every simple path from a to b by depth-first enumeration; returns the
/// shortest one, ties broken by lexicographic node sequence. Exponential, so
/// only for tiny graphs.
inline NodePath exhaustive_shortest_path(const RoadNetwork& net, NodeId a, NodeId b) {
    NodePath best;
    best.length = INFINITY;
    std::vector<NodeId> stack{a};
    std::vector<char> on_path(net.node_count(), 0);
    on_path[a] = 1;
    std::function<void(NodeId, double)> walk = [&](NodeId u, double len) {
        if (u == b) {
            const double tol = 1e-9 * std::max(1.0, len);
            if (best.nodes.empty() || len < best.length - tol ||
                (std::abs(len - best.length) <= tol && stack < best.nodes)) {
                best.nodes = stack;
                best.length = len;
            }
            return;
        }
        for (const Edge& e : net.edges()) {
            NodeId v;
            if (e.a == u) {
                v = e.b;
            } else if (e.b == u) {
                v = e.a;
            } else {
                continue;
            }
            if (on_path[v]) {
                continue;
            }
            on_path[v] = 1;
            stack.push_back(v);
            walk(v, len + e.length);
            stack.pop_back();
            on_path[v] = 0;
        }
    };
    if (a == b) {
        return {{a}, 0.0};
    }
    walk(a, 0.0);
    return best;
}

} // namespace disputekit::oracle
