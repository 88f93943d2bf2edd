// Transition semantics of global types and channel contexts, and the
// bounded bisimulation between a global type and a context.
#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mssr/context.hpp"
#include "mssr/projection.hpp"
#include "mssr/types.hpp"

namespace mssr {

struct GlobalStep {
  TypeAction action; // always Comm
  GlobalPtr next;
};

// All communication steps of g: head steps of the front interaction and
// permuted steps of causally unrelated later interactions (enabled in every
// branch, roles disjoint from the prefix). Recursion unfolds on demand.
std::vector<GlobalStep> global_steps(const GlobalPtr& g);

struct ContextStep {
  TypeAction action;
  ChannelContext next;
};

// Single-entry input/output steps of every entry plus all synchronized
// communication steps pairing a compatible output and input.
std::vector<ContextStep> context_steps(const ChannelContext& ctx);

// Only the synchronized communication steps.
std::vector<ContextStep> context_comm_steps(const ChannelContext& ctx);

struct ConsistencyResult {
  bool consistent = false;
  bool bound_hit = false; // exploration stopped at the state bound
  // Shortest failing trace: the actions taken, then the mismatch.
  std::vector<std::string> trace;
  std::string mismatch;
};

// Mutual step-for-step simulation between g and ctx over communication
// actions, explored breadth-first with a visited set over canonical pairs.
// A verdict of consistent with bound_hit set means no violation was found
// within max_states.
ConsistencyResult check_consistency(const GlobalPtr& g, const ChannelContext& ctx,
                                    size_t max_states = 20000);

// The proj(G) context for session s; nullopt when g is not well-formed.
std::optional<ChannelContext> projection_context(const GlobalPtr& g, const std::string& session);

} // namespace mssr
