#pragma once

#include "policy.hpp"

#include <memory>
#include <string>

namespace uwjsa::baselines {

// Constant maximum available power, no scheduling.
int epa_action(const env::Environment& e, double epa_power_w);

// Open loop: smallest available level whose budget clears the reception
// threshold against ambient noise plus the external interferer, using the
// farthest designated receiver. Climbs to the top level when infeasible.
int olpa_action(const env::Environment& e, int agent_idx);

// Uniform draw over the whole action set, 0 W included.
int rpa_action(const env::Environment& e, Rng& rng);

// Round-robin: one active sender per slot, open-loop power when active.
int solpa_action(const env::Environment& e, int agent_idx, int slot);

class EpaPolicy : public policy::Policy {
  public:
    explicit EpaPolicy(double power_w = 32.0) : power_w_(power_w) {}
    std::vector<int> act(const env::Environment& e, Rng& rng) override;

  private:
    double power_w_;
};

class OlpaPolicy : public policy::Policy {
  public:
    std::vector<int> act(const env::Environment& e, Rng& rng) override;
};

class RpaPolicy : public policy::Policy {
  public:
    std::vector<int> act(const env::Environment& e, Rng& rng) override;
};

class SolpaPolicy : public policy::Policy {
  public:
    std::vector<int> act(const env::Environment& e, Rng& rng) override;
};

// Factory for the CLI policy flag; names: epa, olpa, rpa, solpa.
std::unique_ptr<policy::Policy> make_baseline(const std::string& name);

} // namespace uwjsa::baselines
