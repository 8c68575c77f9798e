#pragma once

#include <cmath>
#include <vector>

#include "hawkes/kernel.hpp"

namespace hawkes {

// State of Z(t) = sum_i Z_i(t) for a sum-of-exponentials kernel, where
// Z_i(t) = sum_{tau_j < t} a_i e^{-b_i (t - tau_j)}. Single-owner mutable.
class MarkovState {
 public:
  struct Component {
    double z = 0.0;
    double a = 0.0;
    double b = 1.0;
  };

  MarkovState() = default;
  explicit MarkovState(const std::vector<ExpTerm>& terms, double t0 = 0.0) : t_(t0) {
    components_.reserve(terms.size());
    for (const auto& term : terms) components_.push_back({0.0, term.a, term.b});
  }

  double time() const { return t_; }
  const std::vector<Component>& components() const { return components_; }

  double total() const {
    double s = 0.0;
    for (const auto& c : components_) s += c.z;
    return s;
  }

  // Z at time() + dt without moving the state.
  double total_after(double dt) const {
    double s = 0.0;
    for (const auto& c : components_) s += c.z * std::exp(-c.b * dt);
    return s;
  }

  // int_0^dt Z(time() + s) ds under pure decay.
  double integral_over(double dt) const {
    double s = 0.0;
    for (const auto& c : components_) s += c.z * (-std::expm1(-c.b * dt)) / c.b;
    return s;
  }

  // Pure decay over dt: z_i <- z_i e^{-b_i dt}.
  void advance(double dt) {
    for (auto& c : components_) c.z *= std::exp(-c.b * dt);
    t_ += dt;
  }

  // An event with mark scale `scale` at the current time: z_i += scale a_i.
  void jump(double scale = 1.0) {
    for (auto& c : components_) c.z += scale * c.a;
  }

 private:
  std::vector<Component> components_;
  double t_ = 0.0;
};

}  // namespace hawkes
