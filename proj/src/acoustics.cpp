#include "acoustics.hpp"

#include <cmath>
#include <stdexcept>

namespace uwjsa::acoustics {

double thorp_absorption_db_per_km(double f_khz) {
    if (f_khz <= 0.0) {
        throw std::domain_error("thorp_absorption_db_per_km: frequency must be positive");
    }
    double fsq = f_khz * f_khz;
    return 0.11 * fsq / (1.0 + fsq) + 44.0 * fsq / (4100.0 + fsq) + 2.75e-4 * fsq + 0.003;
}

double attenuation(const LinkGeometry& geom, const ChannelParams& ch) {
    double d = geom.distance_m;
    if (!(d > 0.0) || !std::isfinite(d)) {
        throw std::domain_error("attenuation: distance must be finite and positive");
    }
    double a_db_km = thorp_absorption_db_per_km(ch.carrier_freq_khz);
    double spreading = std::pow(d, ch.spreading_factor_k);
    double absorption = std::pow(10.0, a_db_km * (d / 1000.0) / 10.0);
    return ch.norm_const_a0 * spreading * absorption;
}

double ambient_noise_psd_db(double f_khz, double shipping, double wind_mps) {
    double logf = std::log10(f_khz);
    double turb_db = 17.0 - 30.0 * logf;
    double ship_db =
        40.0 + 20.0 * (shipping - 0.5) + 26.0 * logf - 60.0 * std::log10(f_khz + 0.03);
    double wave_db =
        50.0 + 7.5 * std::sqrt(wind_mps) + 20.0 * logf - 40.0 * std::log10(f_khz + 0.4);
    double thermal_db = -15.0 + 20.0 * logf;
    double total = db_to_linear(turb_db) + db_to_linear(ship_db) + db_to_linear(wave_db) +
                   db_to_linear(thermal_db);
    return linear_to_db(total);
}

namespace {

// Composite Simpson over the receiver band, integrand in uPa^2/Hz with f in Hz.
double integrate_noise_band(const ChannelParams& ch) {
    const NoiseConfig& n = ch.ambient_noise;
    double lo_hz = ch.carrier_freq_khz * 1000.0 - ch.bandwidth_hz / 2.0;
    double hi_hz = ch.carrier_freq_khz * 1000.0 + ch.bandwidth_hz / 2.0;
    if (lo_hz <= 0.0) {
        throw std::domain_error("ambient_noise_power: band extends to non-positive frequency");
    }
    const int panels = 512; // even
    double h = (hi_hz - lo_hz) / panels;
    auto psd_lin = [&](double f_hz) {
        return db_to_linear(ambient_noise_psd_db(f_hz / 1000.0, n.shipping, n.wind_mps));
    };
    double sum = psd_lin(lo_hz) + psd_lin(hi_hz);
    for (int i = 1; i < panels; ++i) {
        sum += psd_lin(lo_hz + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

} // namespace

double ambient_noise_power(const ChannelParams& ch) {
    const NoiseConfig& n = ch.ambient_noise;
    if (n.mode == NoiseConfig::Mode::kConstantPower) {
        if (n.constant_power_w < 0.0) {
            throw std::domain_error("ambient_noise_power: constant power must be >= 0");
        }
        return n.constant_power_w;
    }
    return integrate_noise_band(ch) / db_to_linear(kSourceLevelRefDb);
}

double sinr(double tx_power_w, const LinkGeometry& link, std::span<const Interferer> interferers,
            const ChannelParams& ch, double external_noise_w) {
    if (tx_power_w < 0.0) {
        throw std::domain_error("sinr: transmit power must be >= 0");
    }
    if (tx_power_w == 0.0) {
        return 0.0;
    }
    double eta = ch.transducer_eff;
    double signal = eta * tx_power_w / attenuation(link, ch);
    double denom = external_noise_w;
    for (const Interferer& it : interferers) {
        if (it.power_w < 0.0) {
            throw std::domain_error("sinr: interferer power must be >= 0");
        }
        denom += eta * it.power_w / attenuation(it.link, ch);
    }
    if (denom <= 0.0) {
        throw std::domain_error("sinr: zero interference plus noise, ratio undefined");
    }
    return signal / denom;
}

double achievable_rate(double gamma, const ChannelParams& ch, double gamma_th) {
    if (gamma < gamma_th) {
        return 0.0;
    }
    return ch.bandwidth_hz * std::log2(1.0 + gamma);
}

double slot_duration(double t_tran_s, double max_pair_distance_m, double t_guard_s,
                     const ChannelParams& ch) {
    return t_tran_s + max_pair_distance_m / ch.sound_speed_mps + t_guard_s;
}

} // namespace uwjsa::acoustics
