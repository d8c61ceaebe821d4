#pragma once

#include <string>
#include <vector>

#include "mfg/game.hpp"

namespace mfg::testing {

/// p states, q actions, every action feasible, uniform kernel, zero affine
/// reward sized for a single-subpopulation game.
inline SubpopSpec make_subpop(const std::string& name, std::size_t p, std::size_t q,
                              double mass = 1.0) {
  SubpopSpec sub;
  sub.name = name;
  sub.mass = mass;
  for (std::size_t s = 0; s < p; ++s) sub.states.push_back("s" + std::to_string(s));
  for (std::size_t a = 0; a < q; ++a) sub.actions.push_back("a" + std::to_string(a));
  sub.feasible.resize(p);
  for (auto& f : sub.feasible) {
    for (std::size_t a = 0; a < q; ++a) f.push_back(static_cast<int>(a));
  }
  sub.kernel = TransitionKernel(p, q);
  for (std::size_t s = 0; s < p; ++s) {
    for (std::size_t a = 0; a < q; ++a) {
      for (std::size_t t = 0; t < p; ++t) sub.kernel(s, a, t) = 1.0 / static_cast<double>(p);
    }
  }
  AffineCongestion rw;
  rw.base = Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
  rw.weights = Matrix::Zero(static_cast<Eigen::Index>(p * q), static_cast<Eigen::Index>(p * q));
  sub.reward = rw;
  return sub;
}

inline GameSpec make_game(std::vector<SubpopSpec> subs, double beta = 0.9) {
  GameSpec g;
  g.beta = beta;
  g.subpops = std::move(subs);
  // Resize affine weights to the full state-action width.
  const auto width = static_cast<Eigen::Index>(g.state_action_size());
  for (auto& sub : g.subpops) {
    if (auto* rw = std::get_if<AffineCongestion>(&sub.reward)) {
      Matrix w = Matrix::Zero(rw->weights.rows(), width);
      const Eigen::Index cols = std::min(width, rw->weights.cols());
      w.leftCols(cols) = rw->weights.leftCols(cols);
      rw->weights = w;
    }
  }
  return g;
}

inline void set_row(SubpopSpec& sub, std::size_t s, std::size_t a, const std::vector<double>& probs) {
  for (std::size_t t = 0; t < probs.size(); ++t) sub.kernel(s, a, t) = probs[t];
}

inline AffineCongestion& affine(SubpopSpec& sub) { return std::get<AffineCongestion>(sub.reward); }

/// Every feasible (s,a) earns `value` in every subpopulation.
inline void set_constant_reward(GameSpec& g, double value) {
  for (auto& sub : g.subpops) {
    auto& rw = affine(sub);
    rw.base.setConstant(value);
    rw.weights.setZero();
  }
}

}  // namespace mfg::testing
