#include "semcom/schedule.hpp"

#include <cmath>

#include "semcom/errors.hpp"

namespace semcom {

NoiseSchedule make_schedule(int T, double beta_start, double beta_end) {
    if (T < 2) {
        throw ValidationError("schedule needs at least two timesteps");
    }
    if (!std::isfinite(beta_start) || !std::isfinite(beta_end) || beta_start <= 0.0 ||
        beta_end >= 1.0 || beta_end < beta_start) {
        throw ValidationError("beta range must satisfy 0 < beta_start <= beta_end < 1");
    }
    NoiseSchedule s;
    s.T = T;
    s.betas.resize(static_cast<size_t>(T));
    s.alphas.resize(static_cast<size_t>(T));
    s.alpha_bars.resize(static_cast<size_t>(T));
    double prod = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double frac = static_cast<double>(t - 1) / static_cast<double>(T - 1);
        const double beta = beta_start + frac * (beta_end - beta_start);
        const double alpha = 1.0 - beta;
        prod *= alpha;
        s.betas[static_cast<size_t>(t - 1)] = beta;
        s.alphas[static_cast<size_t>(t - 1)] = alpha;
        s.alpha_bars[static_cast<size_t>(t - 1)] = prod;
    }
    return s;
}

} // namespace semcom
