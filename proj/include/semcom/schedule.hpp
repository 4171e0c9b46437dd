#pragma once

// Diffusion noise schedule shared by the denoising models and the
// channel-to-timestep mapping.

#include <vector>

namespace semcom {

/// Linear-beta schedule over timesteps 1..T. Index convention: entry t-1
/// holds the value for timestep t, so beta(1) is the first step of the
/// forward process. alpha_bar(t) = prod_{u<=t} (1 - beta(u)); alpha_bar(0)
/// is defined as 1 for convenience.
struct NoiseSchedule {
    int T = 0;
    std::vector<double> betas;
    std::vector<double> alphas;
    std::vector<double> alpha_bars;

    double beta(int t) const { return betas[static_cast<size_t>(t - 1)]; }
    double alpha(int t) const { return alphas[static_cast<size_t>(t - 1)]; }
    double alpha_bar(int t) const {
        return t == 0 ? 1.0 : alpha_bars[static_cast<size_t>(t - 1)];
    }
};

/// Builds the linear schedule beta_t = beta_start + (t-1)/(T-1) *
/// (beta_end - beta_start). Defaults match the standard DDPM setting.
NoiseSchedule make_schedule(int T = 1000, double beta_start = 1e-4, double beta_end = 0.02);

} // namespace semcom
