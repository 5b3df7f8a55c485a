#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace roadpop {

/// One hidden state of a layer: a candidate segment and the log emission
/// weight of the observation given that segment.
struct HmmState {
  std::uint32_t segment = 0;
  double emission_logweight = 0.0;
};

struct ViterbiPath {
  std::vector<std::size_t> choice;  // per layer, index into that layer's states
  std::size_t break_count = 0;
  double total_logweight = 0.0;     // summed over all sub-chains
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Max-sum decoding over layered states. Layer t holds
/// states[offsets[t], offsets[t+1]); every layer must be non-empty.
///
/// `transition_log(prev_segment, next_segment)` returns a log weight, with
/// kNegInf for impossible moves. Initial weights are uniform. When no state of
/// a layer is reachable from the previous one, the chain breaks there: the
/// prefix is decoded on its own and decoding restarts from emissions alone.
///
/// Ties: the predecessor with the smaller segment wins, and so does the final
/// state with the smaller segment.
template <class TransitionLog>
ViterbiPath viterbi_decode(std::span<const HmmState> states, std::span<const std::size_t> offsets,
                           TransitionLog&& transition_log) {
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  ViterbiPath path;
  if (offsets.size() < 2) return path;
  const std::size_t layers = offsets.size() - 1;
  path.choice.assign(layers, 0);

  std::vector<double> score(states.size(), kNegInf);
  std::vector<std::size_t> back(states.size(), npos);

  const auto finish_chain = [&](std::size_t first_layer, std::size_t last_layer) {
    std::size_t best = npos;
    for (std::size_t s = offsets[last_layer]; s < offsets[last_layer + 1]; ++s) {
      if (best == npos || score[s] > score[best] ||
          (score[s] == score[best] && states[s].segment < states[best].segment)) {
        best = s;
      }
    }
    path.total_logweight += score[best];
    std::size_t s = best;
    for (std::size_t t = last_layer + 1; t-- > first_layer;) {
      path.choice[t] = s - offsets[t];
      s = back[s];
    }
  };

  std::size_t chain_start = 0;
  for (std::size_t s = offsets[0]; s < offsets[1]; ++s) score[s] = states[s].emission_logweight;

  for (std::size_t t = 1; t < layers; ++t) {
    bool reachable = false;
    for (std::size_t j = offsets[t]; j < offsets[t + 1]; ++j) {
      double best = kNegInf;
      std::size_t arg = npos;
      for (std::size_t i = offsets[t - 1]; i < offsets[t]; ++i) {
        if (score[i] == kNegInf) continue;
        const double tr = transition_log(states[i].segment, states[j].segment);
        if (tr == kNegInf) continue;
        const double w = score[i] + tr;
        if (arg == npos || w > best || (w == best && states[i].segment < states[arg].segment)) {
          best = w;
          arg = i;
        }
      }
      if (arg != npos) {
        score[j] = best + states[j].emission_logweight;
        back[j] = arg;
        reachable = true;
      }
    }
    if (!reachable) {
      finish_chain(chain_start, t - 1);
      ++path.break_count;
      chain_start = t;
      for (std::size_t j = offsets[t]; j < offsets[t + 1]; ++j) {
        score[j] = states[j].emission_logweight;
        back[j] = npos;
      }
    }
  }
  finish_chain(chain_start, layers - 1);
  return path;
}

}  // namespace roadpop
