#pragma once

// Toy DDPM decoder: linear-beta schedule (see schedule.hpp), conditional
// MLP noise predictor over small grayscale images, epsilon-prediction
// training, ancestral sampling, and two-phase split sampling where an edge
// cluster model runs the first (general) denoising steps and a local
// personalized model finishes, optionally with an analog channel hop in
// between.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semcom/channel.hpp"
#include "semcom/codec.hpp"
#include "semcom/image.hpp"
#include "semcom/schedule.hpp"

namespace semcom::diffusion {

inline constexpr int kMaxOffloadSteps = 650;

/// Network shape. Input = flattened image, a schedule-aware timestep
/// embedding and a fixed-slot box conditioning vector; two tanh hidden
/// layers; linear output the size of the image plus two structured paths:
///
///   out = W3 h2 + b3 + (S + g(t) I) x
///       + G(t) * (u0 + U cond + v .* paint(cond))
///
/// S is a full image-to-output linear skip, g(t) = A . emb(t) and
/// G(t) = B . emb(t) are scalar gates linear in the embedding, and
/// paint(cond) rasterizes the conditioning boxes into a per-pixel
/// coverage map (pixel-center rule), so u0 + U cond + v .* paint can
/// express the conditioned image content exactly. The skip keeps noise
/// recovery from being limited by the hidden-layer rank; the gates supply
/// the timestep-dependent rescaling of the state and of the conditioned
/// content that an epsilon predictor needs, which keeps long sampling
/// chains from drifting off-distribution.
struct DenoiserArch {
    int image_w = 16;
    int image_h = 16;
    int k_max = 4;
    int embed_dim = 8;
    int hidden1 = 96;
    int hidden2 = 96;

    int image_dim() const { return image_w * image_h; }
    int cond_dim() const { return k_max * 5; }
    int input_dim() const { return image_dim() + embed_dim + cond_dim(); }
    size_t param_count() const;
    void validate() const;
    bool operator==(const DenoiserArch&) const = default;
};

/// Flat offsets of each weight block inside the parameter vector, in order
/// W1, b1, W2, b2, W3, b3, S, A, U, V, B (matrices row-major, rows =
/// outputs; S is the image_dim x image_dim input-to-output skip; A and B
/// hold embed_dim gate coefficients; U is image_dim x (cond_dim + 1) with
/// the bias pattern in the last column; V weights the coverage map
/// elementwise).
struct ParamLayout {
    size_t w1, b1, w2, b2, w3, b3, s, a, u, v, b, total;
};
ParamLayout layout_of(const DenoiserArch& arch);

/// Fixed-slot conditioning: per slot the 4 dequantized box coordinates
/// followed by a presence flag; unused slots stay zero.
struct Conditioning {
    std::vector<double> values;

    static Conditioning zeros(int k_max);
    /// Boxes are quantized and dequantized so the vector matches what a
    /// receiver reconstructs from the transmitted bits. Throws when more
    /// boxes than slots are given.
    static Conditioning from_boxes(const std::vector<codec::BoundingBox>& boxes, int k_max);
};

/// Scratch buffers for one forward/backward pass; reusable across calls.
struct Workspace {
    std::vector<double> in, z1, h1, z2, h2, sout, paint, cpat, out;
    std::vector<double> dout, dh2, dz2, dh1, dz1;
    std::vector<double> grad;

    void resize(const DenoiserArch& arch);
};

class DenoiserModel {
public:
    DenoiserModel() = default;
    explicit DenoiserModel(const DenoiserArch& arch);

    /// Hidden-layer weights drawn N(0, 1/fan_in); output layer, skip,
    /// gates and all biases zero, so an untrained model predicts zero
    /// noise.
    static DenoiserModel random_init(const DenoiserArch& arch, uint64_t seed);

    const DenoiserArch& arch() const { return arch_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    /// eps_out = predicted noise for state x at timestep t; the schedule
    /// supplies T and the alpha-bar values the embedding is built from.
    void predict(std::span<const double> x, int t, const NoiseSchedule& sched,
                 const Conditioning& cond, std::span<double> eps_out, Workspace& ws) const;

private:
    DenoiserArch arch_;
    std::vector<double> params_;
};

struct TrainExample {
    Image x0;
    Conditioning cond;
};

struct TrainConfig {
    double lr = 1e-3;
    int t_min = 1;
    int t_max = 0; // 0 means schedule T
};

/// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps
Image forward_diffuse(const Image& x0, int t, const Image& eps, const NoiseSchedule& sched);

/// One epsilon-prediction gradient-descent step over the batch. Per item a
/// timestep is drawn uniformly from [t_min, t_max] and fresh noise applied;
/// returns the mean per-pixel squared error. Non-finite loss raises a
/// divergence error.
double train_step(DenoiserModel& model, std::span<const TrainExample> batch,
                  const NoiseSchedule& sched, std::mt19937_64& rng,
                  const TrainConfig& cfg, Workspace& ws);

/// Evaluation-only loss on fixed (t, eps) draws; no parameter update.
double eval_loss(const DenoiserModel& model, std::span<const TrainExample> batch,
                 const NoiseSchedule& sched, std::mt19937_64& rng,
                 const TrainConfig& cfg, Workspace& ws);

/// One ancestral reverse step; injects noise of variance beta_t for t > 1.
Image reverse_step(const DenoiserModel& model, const Image& x_t, int t,
                   const Conditioning& cond, std::mt19937_64& rng,
                   const NoiseSchedule& sched);

/// Full reverse chain from x_T ~ N(0, I) down to t = 1. Noise draws come
/// from per-step streams derived from the seed (stream 0 seeds x_T, stream
/// t seeds the step-t injection) so any contiguous prefix of the chain can
/// be reproduced independently.
Image sample(const DenoiserModel& model, const Conditioning& cond, uint64_t seed,
             const NoiseSchedule& sched);

struct SplitPlan {
    int s_offload = 0;
    void validate(int T) const;
};

/// Cluster model runs t = T .. T - s_offload + 1, the local model the rest.
/// When a channel config is given and s_offload > 0, the handoff state
/// crosses the AWGN channel: the received frame is remapped to the smallest
/// equivalent timestep t' and rescaled before local denoising resumes.
/// Channel noise draws from the config's own seed. With s_offload = 0 this
/// is exactly sample(local_model, ...).
Image split_sample(const DenoiserModel& cluster_model, const DenoiserModel& local_model,
                   const Conditioning& cond, const SplitPlan& plan, uint64_t seed,
                   const NoiseSchedule& sched,
                   const std::optional<channel::ChannelConfig>& ch = std::nullopt);

/// Binary checkpoint: "SCDM" magic, little-endian u32 fields (version,
/// image_w, image_h, embed_dim, k_max, hidden1, hidden2), u64 parameter
/// count, then the raw little-endian f64 parameter array.
void save_checkpoint(const DenoiserModel& model, const std::string& path);
DenoiserModel load_checkpoint(const std::string& path);

} // namespace semcom::diffusion
