#pragma once

// Wireless transport models: additive white Gaussian noise over real-valued
// pixel symbols, distortion-free digital transport for semantic bits, and
// the mapping from channel noise level to an equivalent diffusion timestep.

#include <cstdint>
#include <limits>
#include <random>

#include "semcom/codec.hpp"
#include "semcom/image.hpp"
#include "semcom/schedule.hpp"

namespace semcom::channel {

/// snr_db may be +infinity, which disables noise injection entirely.
struct ChannelConfig {
    double snr_db = std::numeric_limits<double>::infinity();
    uint64_t seed = 0;
};

/// Real-valued transmission frame, one symbol per pixel.
struct AnalogFrame {
    Image symbols;

    /// Mean square of the symbols.
    double measured_power() const;
};

struct RemapResult {
    int t_prime = 0;
    double scale_c = 1.0;
};

/// sigma^2 = measured_power / 10^(snr_db / 10); zero when snr_db = +inf.
double noise_variance(double measured_power, double snr_db);

/// y = x + n with n i.i.d. N(0, sigma^2). Infinite SNR returns the frame
/// unchanged without consuming RNG draws. A zero-power frame with finite
/// SNR is rejected (the noise level would be undefined).
AnalogFrame awgn_transmit(const AnalogFrame& frame, const ChannelConfig& cfg,
                          std::mt19937_64& rng);

/// Semantic bits ride a distortion-free digital link.
codec::BitString transmit_digital(const codec::BitString& bits);

/// Smallest t' >= s whose noise-to-signal ratio (1 - abar_t')/abar_t'
/// reaches ((1 - abar_s) + sigma2_eff)/abar_s, clamped to T when the
/// schedule runs out of range. scale_c = sqrt(abar_t'/abar_s) rescales the
/// received frame so its marginal matches the forward process at t'.
RemapResult remap_timestep(int s, double sigma2_eff, const NoiseSchedule& sched);

/// SNR-level convenience wrapper: sigma2_eff = noise_variance(measured_power,
/// snr_db). measured_power defaults to 1 (unit-power symbols).
RemapResult effective_timestep(int s, double snr_db, const NoiseSchedule& sched,
                               double measured_power = 1.0);

} // namespace semcom::channel
