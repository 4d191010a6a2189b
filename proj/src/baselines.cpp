#include "baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace uwjsa::baselines {

int epa_action(const env::Environment& e, double epa_power_w) {
    return e.actions().index_of(epa_power_w);
}

int olpa_action(const env::Environment& e, int agent_idx) {
    const world::Topology& topo = e.topology();
    const world::WorldState& ws = e.state();
    const world::NodeState* tx = ws.find(topo.sender_ids[static_cast<std::size_t>(agent_idx)]);

    // Farthest designated receiver sets the power budget.
    double d = 0.0;
    const world::NodeState* rx_far = nullptr;
    for (int rx : topo.receivers_of[static_cast<std::size_t>(agent_idx)]) {
        const world::NodeState* r = ws.find(rx);
        double dist = world::distance(tx->position_m, r->position_m);
        if (dist >= d) {
            d = dist;
            rx_far = r;
        }
    }
    const acoustics::ChannelParams& ch = e.config().channel;
    double atten = acoustics::attenuation({d}, ch);
    double noise = e.ambient_noise_w();
    for (const world::NodeState& n : ws.nodes) {
        if (n.role.kind != world::RoleKind::kExternalInterferer) continue;
        double ext_d = world::distance(n.position_m, rx_far->position_m);
        noise += n.role.interferer_power_w / acoustics::attenuation({ext_d}, ch);
    }
    double needed = e.gamma_th_linear() * atten * noise / ch.transducer_eff;
    const env::ActionSpace& acts = e.actions();
    for (int i = 1; i < acts.size(); ++i) {
        if (acts.level(i) >= needed) return i;
    }
    return acts.size() - 1; // infeasible link: emit the top level
}

int rpa_action(const env::Environment& e, Rng& rng) {
    return static_cast<int>(rng.uniform_index(static_cast<std::size_t>(e.actions().size())));
}

int solpa_action(const env::Environment& e, int agent_idx, int slot) {
    int active = (slot - 1) % e.n_agents();
    return agent_idx == active ? olpa_action(e, agent_idx) : 0;
}

std::vector<int> EpaPolicy::act(const env::Environment& e, Rng& rng) {
    (void)rng;
    return std::vector<int>(static_cast<std::size_t>(e.n_agents()), epa_action(e, power_w_));
}

std::vector<int> OlpaPolicy::act(const env::Environment& e, Rng& rng) {
    (void)rng;
    std::vector<int> actions(static_cast<std::size_t>(e.n_agents()));
    for (int i = 0; i < e.n_agents(); ++i) actions[static_cast<std::size_t>(i)] = olpa_action(e, i);
    return actions;
}

std::vector<int> RpaPolicy::act(const env::Environment& e, Rng& rng) {
    std::vector<int> actions(static_cast<std::size_t>(e.n_agents()));
    for (int i = 0; i < e.n_agents(); ++i) actions[static_cast<std::size_t>(i)] = rpa_action(e, rng);
    return actions;
}

std::vector<int> SolpaPolicy::act(const env::Environment& e, Rng& rng) {
    (void)rng;
    int slot = e.slot() + 1;
    std::vector<int> actions(static_cast<std::size_t>(e.n_agents()));
    for (int i = 0; i < e.n_agents(); ++i) {
        actions[static_cast<std::size_t>(i)] = solpa_action(e, i, slot);
    }
    return actions;
}

std::unique_ptr<policy::Policy> make_baseline(const std::string& name) {
    if (name == "epa") return std::make_unique<EpaPolicy>();
    if (name == "olpa") return std::make_unique<OlpaPolicy>();
    if (name == "rpa") return std::make_unique<RpaPolicy>();
    if (name == "solpa") return std::make_unique<SolpaPolicy>();
    throw std::invalid_argument("unknown baseline policy '" + name + "'");
}

} // namespace uwjsa::baselines
