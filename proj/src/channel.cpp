#include "semcom/channel.hpp"

#include <cmath>

#include "semcom/errors.hpp"
#include "semcom/kernels.hpp"

namespace semcom::channel {

double AnalogFrame::measured_power() const {
    if (symbols.pixels.empty()) {
        return 0.0;
    }
    return kern::sumsq(symbols.pixels) / static_cast<double>(symbols.pixels.size());
}

double noise_variance(double measured_power, double snr_db) {
    if (measured_power < 0.0 || !std::isfinite(measured_power)) {
        throw ValidationError("measured power must be finite and non-negative");
    }
    if (std::isinf(snr_db) && snr_db > 0.0) {
        return 0.0;
    }
    if (!std::isfinite(snr_db)) {
        throw ValidationError("snr_db must be finite or +inf");
    }
    return measured_power / std::pow(10.0, snr_db / 10.0);
}

AnalogFrame awgn_transmit(const AnalogFrame& frame, const ChannelConfig& cfg,
                          std::mt19937_64& rng) {
    if (std::isinf(cfg.snr_db) && cfg.snr_db > 0.0) {
        return frame;
    }
    const double power = frame.measured_power();
    if (power <= 0.0) {
        throw ValidationError("zero-power frame: SNR is undefined");
    }
    const double sigma = std::sqrt(noise_variance(power, cfg.snr_db));
    AnalogFrame out = frame;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& s : out.symbols.pixels) {
        s += sigma * gauss(rng);
    }
    return out;
}

codec::BitString transmit_digital(const codec::BitString& bits) {
    return bits;
}

RemapResult remap_timestep(int s, double sigma2_eff, const NoiseSchedule& sched) {
    if (s < 1 || s > sched.T) {
        throw ValidationError("source timestep out of schedule range");
    }
    if (sigma2_eff < 0.0 || !std::isfinite(sigma2_eff)) {
        throw ValidationError("effective noise variance must be finite and non-negative");
    }
    const double abar_s = sched.alpha_bar(s);
    const double target = ((1.0 - abar_s) + sigma2_eff) / abar_s;
    RemapResult r;
    r.t_prime = sched.T;
    for (int t = s; t <= sched.T; ++t) {
        const double abar_t = sched.alpha_bar(t);
        if ((1.0 - abar_t) / abar_t >= target) {
            r.t_prime = t;
            break;
        }
    }
    r.scale_c = std::sqrt(sched.alpha_bar(r.t_prime) / abar_s);
    return r;
}

RemapResult effective_timestep(int s, double snr_db, const NoiseSchedule& sched,
                               double measured_power) {
    return remap_timestep(s, noise_variance(measured_power, snr_db), sched);
}

} // namespace semcom::channel
