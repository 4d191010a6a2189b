#pragma once

#include <cmath>
#include <span>

namespace uwjsa::acoustics {

// Ambient noise is either a fixed value on the simulator's linear power scale
// (handy for tests) or the classic four-source spectral model (turbulence,
// shipping, waves, thermal) integrated over the receiver band.
struct NoiseConfig {
    enum class Mode { kConstantPower, kSpectralModel };
    Mode mode = Mode::kSpectralModel;
    double constant_power_w = 0.0; // kConstantPower only
    double shipping = 0.5;         // s in [0,1]
    double wind_mps = 0.0;         // w >= 0
};

struct ChannelParams {
    double carrier_freq_khz = 8.0;
    double bandwidth_hz = 3000.0;
    double spreading_factor_k = 1.5;
    double norm_const_a0 = 1.0;
    double sound_speed_mps = 1500.0;
    double transducer_eff = 1.0; // eta0 in (0,1]
    NoiseConfig ambient_noise;
};

struct LinkGeometry {
    double distance_m = 1.0;
};

// One concurrent same-network sender as seen by the receiver of interest.
struct Interferer {
    double power_w = 0.0;
    LinkGeometry link;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// Plane-wave intensity of a 1 W omnidirectional source at 1 m in seawater,
// expressed in dB re uPa^2. Converts spectral noise levels onto the same
// linear scale as transmit power divided by attenuation.
inline constexpr double kSourceLevelRefDb = 170.8;

// Thorp absorption in dB/km, f in kHz. Valid above ~0.4 kHz.
double thorp_absorption_db_per_km(double f_khz);

// A(d,f) = A0 * d^k * a(f)^(d/1km) as a linear power ratio; d in meters,
// spreading in meters, absorption per kilometer.
double attenuation(const LinkGeometry& geom, const ChannelParams& ch);

// Noise power spectral density in dB re uPa^2/Hz at f (kHz).
double ambient_noise_psd_db(double f_khz, double shipping, double wind_mps);

// Band-integrated ambient noise on the linear power scale (watts-equivalent).
double ambient_noise_power(const ChannelParams& ch);

// Received SINR. `interferers` are concurrent same-network senders (scaled by
// the transducer efficiency like the signal); `external_noise_w` aggregates
// already-attenuated external acoustic interference plus ambient noise.
double sinr(double tx_power_w, const LinkGeometry& link, std::span<const Interferer> interferers,
            const ChannelParams& ch, double external_noise_w);

// Shannon rate in bps gated by the reception threshold (both SINRs linear).
double achievable_rate(double gamma, const ChannelParams& ch, double gamma_th);

// T_slot = T_tran + d_max/c + T_guard.
double slot_duration(double t_tran_s, double max_pair_distance_m, double t_guard_s,
                     const ChannelParams& ch);

} // namespace uwjsa::acoustics
