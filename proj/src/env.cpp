#include "env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uwjsa::env {

int ActionSpace::index_of(double power_w) const {
    for (std::size_t i = 0; i < levels_w.size(); ++i) {
        if (levels_w[i] == power_w) return static_cast<int>(i);
    }
    throw std::invalid_argument("ActionSpace: power is not an available level");
}

ActionSpace ActionSpace::standard() { return ActionSpace{{0.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}}; }

namespace {

void validate_actions(const ActionSpace& a) {
    if (a.levels_w.empty() || a.levels_w.front() != 0.0) {
        throw std::invalid_argument("ActionSpace: must start with the 0 W level");
    }
    for (std::size_t i = 1; i < a.levels_w.size(); ++i) {
        if (a.levels_w[i] <= a.levels_w[i - 1]) {
            throw std::invalid_argument("ActionSpace: levels must be strictly increasing");
        }
    }
}

} // namespace

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {
    validate_actions(cfg_.actions);
    topology_ = world::make_topology(cfg_.deployment);
    if (topology_.n_senders() == 0) {
        throw std::invalid_argument("Environment: deployment has no transmitters");
    }
    std::size_t recv_count = topology_.receivers_of[0].size();
    for (const auto& rs : topology_.receivers_of) {
        if (rs.size() != recv_count) {
            throw std::invalid_argument("Environment: agents must have equal receiver counts");
        }
    }
    gamma_th_linear_ = acoustics::db_to_linear(cfg_.gamma_th_db);
    ambient_noise_w_ = acoustics::ambient_noise_power(cfg_.channel);
    cfg_.deployment.horizon_slots = cfg_.reward.lifetime_requirement_slots;
    state_ = cfg_.deployment;
}

const std::vector<Observation>& Environment::reset(std::uint64_t episode_seed,
                                                   double malfunction_rate, MalfunctionMode mode) {
    rng_ = Rng(derive_seed(episode_seed, 0));
    mode_ = mode;
    state_ = cfg_.deployment;
    state_.horizon_slots = cfg_.reward.lifetime_requirement_slots;
    for (world::NodeState& n : state_.nodes) {
        n.energy_used_j = 0.0;
        n.malfunction = false;
        n.malfunction_onset_slot.reset();
        n.service_ended = false;
        n.service_end_slot = 0;
    }
    // Fresh straight path through the cylinder for the external interferer.
    for (world::NodeState& n : state_.nodes) {
        if (n.role.kind != world::RoleKind::kExternalInterferer) continue;
        double r = cfg_.mobility.region_radius_m;
        double h = cfg_.mobility.region_height_m;
        double a_in = rng_.uniform(0.0, 2.0 * M_PI);
        double a_out = rng_.uniform(0.0, 2.0 * M_PI);
        state_.interferer_entry = {r * std::cos(a_in), r * std::sin(a_in), rng_.uniform(0.0, h)};
        state_.interferer_exit = {r * std::cos(a_out), r * std::sin(a_out), rng_.uniform(0.0, h)};
        n.position_m = state_.interferer_entry;
    }
    world::schedule_malfunctions(state_, malfunction_rate, rng_);
    t_slot_s_ = acoustics::slot_duration(
        cfg_.t_tran_s, world::max_designated_pair_distance(state_, topology_), cfg_.t_guard_s,
        cfg_.channel);
    outcomes_.clear();
    send_counts_.assign(static_cast<std::size_t>(n_agents()), 0);
    last_send_.assign(static_cast<std::size_t>(n_agents()), 0);
    prev_power_.assign(static_cast<std::size_t>(n_agents()), 0.0);
    done_ = false;
    violated_ = false;
    build_observations();
    return observations_;
}

double Environment::constrain_action(world::NodeState& node, double proposed_w,
                                     MalfunctionMode mode, int slot, Rng& rng) const {
    if (node.service_ended) return 0.0;
    double p = proposed_w;
    if (node.malfunction) {
        if (mode == MalfunctionMode::kSilent) {
            p = 0.0;
        } else {
            p = cfg_.actions.level(
                static_cast<int>(rng.uniform_index(static_cast<std::size_t>(cfg_.actions.size()))));
        }
    }
    if (p > 0.0) {
        double usable = (1.0 - cfg_.cease_fraction) * node.battery_j;
        if (node.energy_used_j + p * cfg_.t_tran_s > usable) {
            node.service_ended = true;
            node.service_end_slot = slot;
            return 0.0;
        }
    }
    return p;
}

StepResult Environment::step(const std::vector<int>& action_indices) {
    if (done_) throw std::logic_error("Environment::step called on a finished episode");
    if (action_indices.size() != static_cast<std::size_t>(n_agents())) {
        throw std::invalid_argument("Environment::step: one action per transmitter required");
    }
    int slot = state_.resolved_slots + 1;
    world::advance_malfunctions(state_, slot);

    StepResult res;
    res.executed_actions.resize(action_indices.size());
    res.active.resize(action_indices.size());
    std::vector<double> powers(action_indices.size());
    bool violated = false;
    for (std::size_t i = 0; i < action_indices.size(); ++i) {
        int idx = action_indices[i];
        if (idx < 0 || idx >= cfg_.actions.size()) {
            throw std::invalid_argument("Environment::step: action index out of range");
        }
        world::NodeState* node = state_.find(topology_.sender_ids[i]);
        bool ceased_before = node->service_ended;
        bool intelligent = !node->malfunction;
        double p = constrain_action(*node, cfg_.actions.level(idx), mode_, slot, rng_);
        bool newly_ceased = node->service_ended && !ceased_before;
        powers[i] = p;
        res.executed_actions[i] = cfg_.actions.index_of(p);
        res.active[i] = static_cast<std::uint8_t>(intelligent && !ceased_before && !newly_ceased);
        if (newly_ceased && intelligent) violated = true;
    }

    if (violated) {
        // Lifetime requirement broken: the slot is not executed (Algorithm-1
        // style service termination), the team takes the penalty.
        res.reward = cfg_.reward.violation_penalty;
        res.terminal = true;
        res.lifetime_violated = true;
        done_ = true;
        violated_ = true;
        return res;
    }

    auto [next_state, outcome] =
        world::resolve_slot(std::move(state_), topology_, powers, cfg_.channel, ambient_noise_w_,
                            gamma_th_linear_, cfg_.t_tran_s);
    state_ = std::move(next_state);
    outcomes_.push_back(std::move(outcome));

    for (std::size_t i = 0; i < powers.size(); ++i) {
        bool sent = powers[i] > 0.0;
        send_counts_[i] += sent ? 1 : 0;
        last_send_[i] = sent ? 1 : 0;
        prev_power_[i] = powers[i];
    }

    res.reward = team_reward();
    res.terminal = slot >= cfg_.reward.lifetime_requirement_slots;
    done_ = res.terminal;

    state_ = world::step_mobility(std::move(state_), cfg_.mobility, t_slot_s_, rng_);
    build_observations();
    return res;
}

double Environment::team_reward() const {
    const RewardConfig& rc = cfg_.reward;
    int h = rc.fairness_window_h > 0 ? rc.fairness_window_h : n_agents();
    std::size_t window = std::min<std::size_t>(static_cast<std::size_t>(h), outcomes_.size());
    std::span<const world::SlotOutcome> win(outcomes_.data() + (outcomes_.size() - window),
                                            window);
    double i_spa = metrics::spatial_reuse_index(outcomes_.back());
    double i_fair = metrics::fairness_index(win, n_agents());
    double penalty = -metrics::ineffective_index(outcomes_.back()); // in [0,1]
    return rc.weights.alpha * i_spa + rc.weights.beta * i_fair - rc.weights.mu * penalty;
}

void Environment::build_observations() {
    observations_.assign(static_cast<std::size_t>(n_agents()), Observation{});
    int next_slot = state_.resolved_slots + 1;
    for (int i = 0; i < n_agents(); ++i) {
        Observation& obs = observations_[static_cast<std::size_t>(i)];
        const world::NodeState* node = state_.find(topology_.sender_ids[static_cast<std::size_t>(i)]);
        obs.self_position = node->position_m;
        obs.residual_energy_ratio = (node->battery_j - node->energy_used_j) / node->battery_j;
        obs.last_send_flag = last_send_[static_cast<std::size_t>(i)];
        obs.past_send_ratio =
            next_slot > 1
                ? static_cast<double>(send_counts_[static_cast<std::size_t>(i)]) / (next_slot - 1)
                : 0.0;
        obs.prev_power_w = prev_power_[static_cast<std::size_t>(i)];
        obs.node_id = node->id;
        for (int rx : topology_.receivers_of[static_cast<std::size_t>(i)]) {
            obs.receiver_positions.push_back(state_.find(rx)->position_m);
        }
        for (int other : topology_.sender_ids) {
            if (other == node->id) continue;
            obs.interferer_positions.push_back(state_.find(other)->position_m);
        }
        for (const world::NodeState& n : state_.nodes) {
            if (n.role.kind == world::RoleKind::kExternalInterferer) {
                obs.interferer_positions.push_back(n.position_m);
            }
        }
    }
}

int Environment::observation_width() const {
    int n_recv = static_cast<int>(topology_.receivers_of[0].size());
    int n_ext = 0;
    for (const world::NodeState& n : cfg_.deployment.nodes) {
        if (n.role.kind == world::RoleKind::kExternalInterferer) ++n_ext;
    }
    // 7 self scalars + one-hot agent id + receiver and interferer positions
    return 7 + n_agents() + 3 * n_recv + 3 * (n_agents() - 1 + n_ext);
}

std::vector<double> Environment::observation_vector(int agent_idx) const {
    const Observation& obs = observations_[static_cast<std::size_t>(agent_idx)];
    double radius = cfg_.mobility.region_radius_m;
    double height = cfg_.mobility.region_height_m;
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(observation_width()));
    auto push_pos = [&](const world::Vec3& p) {
        v.push_back(p.x / radius);
        v.push_back(p.y / radius);
        v.push_back(p.z / height);
    };
    push_pos(obs.self_position);
    v.push_back(obs.residual_energy_ratio);
    v.push_back(static_cast<double>(obs.last_send_flag));
    v.push_back(obs.past_send_ratio);
    v.push_back(obs.prev_power_w / cfg_.actions.max_power());
    // one-hot identifier keeps parameter-shared agents distinguishable
    for (int i = 0; i < n_agents(); ++i) v.push_back(i == agent_idx ? 1.0 : 0.0);
    for (const world::Vec3& p : obs.receiver_positions) push_pos(p);
    for (const world::Vec3& p : obs.interferer_positions) push_pos(p);
    return v;
}

metrics::EpisodeTrace Environment::trace() const {
    metrics::EpisodeTrace tr;
    tr.outcomes = outcomes_;
    tr.scenario = cfg_.scenario;
    tr.t_slot_s = t_slot_s_;
    tr.t_tran_s = cfg_.t_tran_s;
    tr.n_senders = n_agents();
    world::Lifetime lt = world::network_lifetime(state_);
    tr.lifetime_slots = std::min(lt.slots, static_cast<int>(outcomes_.size()));
    return tr;
}

} // namespace uwjsa::env
