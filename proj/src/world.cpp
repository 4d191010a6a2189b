#include "world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace uwjsa::world {

double distance(Vec3 a, Vec3 b) {
    double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

const NodeState* WorldState::find(int id) const {
    for (const NodeState& n : nodes) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

NodeState* WorldState::find(int id) {
    for (NodeState& n : nodes) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

Topology make_topology(const WorldState& state) {
    Topology topo;
    for (const NodeState& n : state.nodes) {
        if (n.role.kind == RoleKind::kTransmitter) topo.sender_ids.push_back(n.id);
    }
    std::sort(topo.sender_ids.begin(), topo.sender_ids.end());
    topo.receivers_of.resize(topo.sender_ids.size());
    for (std::size_t s = 0; s < topo.sender_ids.size(); ++s) {
        const NodeState* tx = state.find(topo.sender_ids[s]);
        if (tx->role.receiver_ids.empty()) {
            throw std::invalid_argument("topology: transmitter with empty receiver set");
        }
        topo.receivers_of[s] = tx->role.receiver_ids;
        std::sort(topo.receivers_of[s].begin(), topo.receivers_of[s].end());
        for (int rx : topo.receivers_of[s]) {
            if (rx == tx->id) throw std::invalid_argument("topology: node is its own receiver");
            topo.pairs.push_back({tx->id, rx, static_cast<int>(s)});
        }
    }
    return topo;
}

double max_designated_pair_distance(const WorldState& state, const Topology& topo) {
    double d_max = 0.0;
    for (const Topology::Pair& p : topo.pairs) {
        d_max = std::max(d_max, distance(state.find(p.tx_id)->position_m,
                                         state.find(p.rx_id)->position_m));
    }
    return d_max;
}

namespace {

void reflect_into_region(Vec3& pos, double radius, double height) {
    while (pos.z < 0.0 || pos.z > height) {
        pos.z = pos.z < 0.0 ? -pos.z : 2.0 * height - pos.z;
    }
    double r = std::sqrt(pos.x * pos.x + pos.y * pos.y);
    while (r > radius && r > 0.0) {
        double r_new = 2.0 * radius - r;
        if (r_new < 0.0) r_new = -r_new;
        pos.x *= r_new / r;
        pos.y *= r_new / r;
        r = r_new;
    }
}

} // namespace

Vec3 interferer_position(const WorldState& state, int slot) {
    double frac = state.horizon_slots > 1
                      ? static_cast<double>(slot - 1) / static_cast<double>(state.horizon_slots - 1)
                      : 0.0;
    frac = std::clamp(frac, 0.0, 1.0);
    return state.interferer_entry + frac * (state.interferer_exit - state.interferer_entry);
}

WorldState step_mobility(WorldState state, const MobilityConfig& cfg, double t_slot_s, Rng& rng) {
    double theta = cfg.drift_direction_deg * M_PI / 180.0;
    Vec3 drift = {cfg.current_speed_mps * t_slot_s * std::cos(theta),
                  cfg.current_speed_mps * t_slot_s * std::sin(theta), 0.0};
    double jitter = cfg.jitter_std_mps * t_slot_s;
    for (NodeState& n : state.nodes) {
        if (n.role.kind == RoleKind::kExternalInterferer) {
            n.position_m = interferer_position(state, state.resolved_slots + 1);
            continue;
        }
        n.position_m = n.position_m + drift;
        if (jitter > 0.0) {
            n.position_m.x += rng.normal(0.0, jitter);
            n.position_m.y += rng.normal(0.0, jitter);
            n.position_m.z += rng.normal(0.0, jitter);
        }
        reflect_into_region(n.position_m, cfg.region_radius_m, cfg.region_height_m);
    }
    return state;
}

void schedule_malfunctions(WorldState& state, double epsilon, Rng& rng) {
    if (epsilon < 0.0 || epsilon > 1.0) {
        throw std::invalid_argument("schedule_malfunctions: epsilon outside [0,1]");
    }
    for (NodeState& n : state.nodes) {
        if (n.role.kind == RoleKind::kExternalInterferer) continue;
        n.malfunction = false;
        n.malfunction_onset_slot.reset();
        if (rng.bernoulli(epsilon)) {
            n.malfunction_onset_slot =
                1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(state.horizon_slots)));
        }
    }
}

void advance_malfunctions(WorldState& state, int slot) {
    for (NodeState& n : state.nodes) {
        if (n.malfunction_onset_slot && *n.malfunction_onset_slot <= slot) {
            n.malfunction = true;
        }
    }
}

ResolveResult resolve_slot(WorldState state, const Topology& topo,
                           const std::vector<double>& sender_powers_w,
                           const acoustics::ChannelParams& ch, double ambient_noise_w,
                           double gamma_th_linear, double t_tran_s) {
    if (sender_powers_w.size() != topo.sender_ids.size()) {
        throw std::invalid_argument("resolve_slot: one power per sender required");
    }
    int slot = state.resolved_slots + 1;

    std::set<int> scheduled; // sender ids with power > 0
    for (std::size_t s = 0; s < sender_powers_w.size(); ++s) {
        double p = sender_powers_w[s];
        if (p < 0.0 || !std::isfinite(p)) {
            throw std::invalid_argument("resolve_slot: invalid transmit power");
        }
        if (p > 0.0) scheduled.insert(topo.sender_ids[s]);
    }
    if (!state.broadcast) {
        for (std::size_t s = 0; s < topo.sender_ids.size(); ++s) {
            if (sender_powers_w[s] <= 0.0) continue;
            for (int rx : topo.receivers_of[s]) {
                if (scheduled.count(rx)) {
                    throw std::invalid_argument(
                        "resolve_slot: node scheduled as sender and intended receiver");
                }
            }
        }
    }

    SlotOutcome out;
    out.slot = slot;
    out.sent_power_w = sender_powers_w;
    out.pairs.reserve(topo.pairs.size());
    for (const Topology::Pair& pr : topo.pairs) {
        SlotOutcome::PairResult res;
        res.tx_id = pr.tx_id;
        res.rx_id = pr.rx_id;
        res.tx_power_w = sender_powers_w[static_cast<std::size_t>(pr.sender_idx)];
        res.scheduled = res.tx_power_w > 0.0;
        if (res.scheduled && !scheduled.count(pr.rx_id)) {
            const NodeState* tx = state.find(pr.tx_id);
            const NodeState* rx = state.find(pr.rx_id);
            acoustics::LinkGeometry link{distance(tx->position_m, rx->position_m)};
            std::vector<acoustics::Interferer> interferers;
            for (int other : scheduled) {
                if (other == pr.tx_id) continue;
                std::size_t idx = static_cast<std::size_t>(
                    std::lower_bound(topo.sender_ids.begin(), topo.sender_ids.end(), other) -
                    topo.sender_ids.begin());
                interferers.push_back(
                    {sender_powers_w[idx],
                     {distance(state.find(other)->position_m, rx->position_m)}});
            }
            double external_w = ambient_noise_w;
            for (const NodeState& n : state.nodes) {
                if (n.role.kind != RoleKind::kExternalInterferer) continue;
                acoustics::LinkGeometry ext_link{distance(n.position_m, rx->position_m)};
                external_w += n.role.interferer_power_w / acoustics::attenuation(ext_link, ch);
            }
            res.sinr = acoustics::sinr(sender_powers_w[pr.sender_idx], link, interferers, ch,
                                       external_w);
            res.received = res.sinr >= gamma_th_linear;
            res.rate_bps = acoustics::achievable_rate(res.sinr, ch, gamma_th_linear);
        }
        out.pairs.push_back(res);
    }

    for (std::size_t s = 0; s < sender_powers_w.size(); ++s) {
        double e = sender_powers_w[s] * t_tran_s;
        NodeState* tx = state.find(topo.sender_ids[s]);
        if (tx->energy_used_j + e > tx->battery_j) {
            throw std::invalid_argument("resolve_slot: energy debit exceeds battery");
        }
        tx->energy_used_j += e;
    }
    state.resolved_slots = slot;
    return {std::move(state), std::move(out)};
}

Lifetime network_lifetime(const WorldState& final_state) {
    Lifetime lt;
    int min_slots = final_state.horizon_slots;
    bool any = false;
    for (const NodeState& n : final_state.nodes) {
        if (n.role.kind == RoleKind::kExternalInterferer || n.malfunction) continue;
        any = true;
        int served = n.service_ended ? n.service_end_slot - 1 : final_state.horizon_slots;
        min_slots = std::min(min_slots, served);
    }
    lt.slots = any ? min_slots : final_state.horizon_slots;
    lt.degenerate = !any;
    return lt;
}

WorldState deployment_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    if (!j.contains("format") || j["format"].get<int>() != 1) {
        throw std::invalid_argument("deployment: unsupported format (expected 1)");
    }
    WorldState state;
    state.broadcast = j.value("broadcast", false);
    state.horizon_slots = j.value("horizon_slots", 30);
    for (const auto& jn : j.at("nodes")) {
        NodeState n;
        n.id = jn.at("id").get<int>();
        auto pos = jn.at("position_m");
        n.position_m = {pos.at(0).get<double>(), pos.at(1).get<double>(), pos.at(2).get<double>()};
        n.battery_j = jn.value("battery_j", 5000.0);
        std::string role = jn.at("role").get<std::string>();
        if (role == "transmitter") {
            n.role.kind = RoleKind::kTransmitter;
            n.role.receiver_ids = jn.at("receivers").get<std::vector<int>>();
        } else if (role == "receiver") {
            n.role.kind = RoleKind::kReceiver;
        } else if (role == "interferer") {
            n.role.kind = RoleKind::kExternalInterferer;
            n.role.interferer_power_w = jn.at("power_w").get<double>();
        } else {
            throw std::invalid_argument("deployment: unknown role '" + role + "'");
        }
        state.nodes.push_back(std::move(n));
    }
    state.interferer_entry = state.interferer_exit = Vec3{};
    for (const NodeState& n : state.nodes) {
        if (n.role.kind == RoleKind::kExternalInterferer) {
            state.interferer_entry = state.interferer_exit = n.position_m;
        }
    }
    return state;
}

std::string deployment_to_json(const WorldState& state) {
    nlohmann::json j;
    j["format"] = 1;
    j["broadcast"] = state.broadcast;
    j["horizon_slots"] = state.horizon_slots;
    j["nodes"] = nlohmann::json::array();
    for (const NodeState& n : state.nodes) {
        nlohmann::json jn;
        jn["id"] = n.id;
        jn["position_m"] = {n.position_m.x, n.position_m.y, n.position_m.z};
        jn["battery_j"] = n.battery_j;
        switch (n.role.kind) {
        case RoleKind::kTransmitter:
            jn["role"] = "transmitter";
            jn["receivers"] = n.role.receiver_ids;
            break;
        case RoleKind::kReceiver:
            jn["role"] = "receiver";
            break;
        case RoleKind::kExternalInterferer:
            jn["role"] = "interferer";
            jn["power_w"] = n.role.interferer_power_w;
            break;
        }
        j["nodes"].push_back(std::move(jn));
    }
    return j.dump(2);
}

WorldState load_deployment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("deployment: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return deployment_from_json(ss.str());
}

WorldState make_ring_deployment(int n_senders, bool broadcast, double region_radius_m,
                                double region_height_m, double ring_fraction, double battery_j,
                                double interferer_power_w) {
    if (n_senders < 1) throw std::invalid_argument("deployment: need at least one sender");
    WorldState state;
    state.broadcast = broadcast;
    double ring = ring_fraction * region_radius_m;
    for (int i = 0; i < n_senders; ++i) {
        double angle = 2.0 * M_PI * i / n_senders;
        NodeState tx;
        tx.id = i + 1;
        tx.position_m = {ring * std::cos(angle), ring * std::sin(angle), 0.0};
        tx.battery_j = battery_j;
        tx.role.kind = RoleKind::kTransmitter;
        state.nodes.push_back(tx);

        NodeState rx;
        rx.id = n_senders + i + 1;
        rx.position_m = {ring * std::cos(angle), ring * std::sin(angle), region_height_m};
        rx.battery_j = battery_j;
        rx.role.kind = RoleKind::kReceiver;
        state.nodes.push_back(rx);
    }
    for (int i = 0; i < n_senders; ++i) {
        NodeState& tx = state.nodes[static_cast<std::size_t>(2 * i)];
        if (broadcast) {
            for (const NodeState& other : state.nodes) {
                if (other.id != tx.id) tx.role.receiver_ids.push_back(other.id);
            }
        } else {
            tx.role.receiver_ids = {n_senders + i + 1};
        }
    }
    if (interferer_power_w > 0.0) {
        NodeState ext;
        ext.id = 2 * n_senders + 1;
        ext.position_m = {region_radius_m, 0.0, region_height_m / 2.0};
        ext.role.kind = RoleKind::kExternalInterferer;
        ext.role.interferer_power_w = interferer_power_w;
        state.interferer_entry = state.interferer_exit = ext.position_m;
        state.nodes.push_back(ext);
    }
    return state;
}

} // namespace uwjsa::world
