#include "semcom/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>

#include "semcom/channel.hpp"
#include "semcom/codec.hpp"
#include "semcom/csv.hpp"
#include "semcom/errors.hpp"
#include "semcom/rng.hpp"
#include "semcom/scheduler.hpp"

namespace semcom::experiments {

namespace {

// RNG stream map (master = scenario seed unless noted). Every consumer
// owns a disjoint range so experiments can be reordered or parallelized
// without draws bleeding across cells.
//   10/11        cluster model init / training
//   30+u / 60+u  user model init / training
//   90/91/95     FL held-out data master / eval draws / round seeds
//   500+i        scheduler instance i
//   600 / 700+d  offload policy training / eval draw d
//   1000+u       case-study scene for (seed value, user)
//   1500+u       case-study sampling chain (shared across snr and offload)
//   2000+u       case-study channel seed master
enum Stream : uint64_t {
    kClusterInit = 10,
    kClusterTrain = 11,
    kUserInit = 30,
    kUserTrain = 60,
    kFlHeldOut = 90,
    kFlEval = 91,
    kFlRounds = 95,
    kSchedulerInstance = 500,
    kOffloadTrain = 600,
    kOffloadEval = 700,
    kCellScene = 1000,
    kCellSampling = 1500,
    kCellChannel = 2000,
};

diffusion::DenoiserArch arch_of(const harness::ScenarioConfig& cfg) {
    diffusion::DenoiserArch arch;
    arch.image_w = cfg.image_size;
    arch.image_h = cfg.image_size;
    arch.k_max = cfg.k_max;
    arch.hidden1 = cfg.hidden1;
    arch.hidden2 = cfg.hidden2;
    return arch;
}

int general_phase_t_min(int T) {
    return std::max(1, T - diffusion::kMaxOffloadSteps + 1);
}

void train_loop(diffusion::DenoiserModel& model,
                const std::vector<diffusion::TrainExample>& dataset, int steps, int batch_size,
                const diffusion::TrainConfig& tc, const NoiseSchedule& sched,
                std::mt19937_64& rng) {
    if (dataset.empty()) {
        throw ValidationError("training dataset is empty");
    }
    diffusion::Workspace ws;
    ws.resize(model.arch());
    std::uniform_int_distribution<size_t> pick(0, dataset.size() - 1);
    std::vector<diffusion::TrainExample> batch(static_cast<size_t>(batch_size));
    for (int step = 0; step < steps; ++step) {
        for (auto& ex : batch) {
            ex = dataset[pick(rng)];
        }
        diffusion::train_step(model, batch, sched, rng, tc, ws);
    }
}

std::filesystem::path checkpoint_path(const harness::ScenarioConfig& cfg,
                                      const std::string& name) {
    return std::filesystem::path(cfg.checkpoint_dir) / (name + ".ckpt");
}

} // namespace

TrainedModels train_models(const harness::ScenarioConfig& cfg) {
    cfg.validate();
    const NoiseSchedule sched = make_schedule(cfg.total_steps, cfg.beta_start, cfg.beta_end);
    const diffusion::DenoiserArch arch = arch_of(cfg);

    TrainedModels out{diffusion::DenoiserModel(arch), {}};

    {
        auto data = harness::make_mixed_dataset(cfg.seed, cfg.background_ids, cfg.train_scenes,
                                                cfg);
        out.cluster = diffusion::DenoiserModel::random_init(arch, derive_seed(cfg.seed,
                                                                              kClusterInit));
        diffusion::TrainConfig tc;
        tc.lr = cfg.learning_rate;
        tc.t_min = general_phase_t_min(sched.T);
        tc.t_max = sched.T;
        auto rng = make_rng(cfg.seed, kClusterTrain);
        train_loop(out.cluster, data, cfg.train_steps, cfg.batch_size, tc, sched, rng);
    }

    for (int u = 0; u < cfg.num_users; ++u) {
        const int bg = cfg.background_ids.at(static_cast<size_t>(u));
        auto data = harness::make_dataset(cfg.seed, bg, cfg.train_scenes, cfg);
        auto model = diffusion::DenoiserModel::random_init(
            arch, derive_seed(cfg.seed, kUserInit + static_cast<uint64_t>(u)));
        diffusion::TrainConfig tc;
        tc.lr = cfg.learning_rate;
        auto rng = make_rng(cfg.seed, kUserTrain + static_cast<uint64_t>(u));
        train_loop(model, data, cfg.train_steps, cfg.batch_size, tc, sched, rng);
        out.users.push_back(std::move(model));
    }

    if (!cfg.checkpoint_dir.empty()) {
        std::filesystem::create_directories(cfg.checkpoint_dir);
        diffusion::save_checkpoint(out.cluster, checkpoint_path(cfg, "cluster").string());
        for (int u = 0; u < cfg.num_users; ++u) {
            diffusion::save_checkpoint(out.users[static_cast<size_t>(u)],
                                       checkpoint_path(cfg, "user" + std::to_string(u)).string());
        }
    }
    return out;
}

TrainedModels prepare_models(const harness::ScenarioConfig& cfg) {
    cfg.validate();
    if (!cfg.checkpoint_dir.empty()) {
        bool all_present = std::filesystem::exists(checkpoint_path(cfg, "cluster"));
        for (int u = 0; u < cfg.num_users && all_present; ++u) {
            all_present = std::filesystem::exists(checkpoint_path(cfg, "user" + std::to_string(u)));
        }
        if (all_present) {
            const diffusion::DenoiserArch arch = arch_of(cfg);
            TrainedModels out{diffusion::load_checkpoint(checkpoint_path(cfg, "cluster").string()),
                              {}};
            if (!(out.cluster.arch() == arch)) {
                throw ValidationError("cluster checkpoint does not match the configured architecture");
            }
            for (int u = 0; u < cfg.num_users; ++u) {
                auto model = diffusion::load_checkpoint(
                    checkpoint_path(cfg, "user" + std::to_string(u)).string());
                if (!(model.arch() == arch)) {
                    throw ValidationError("user checkpoint does not match the configured architecture");
                }
                out.users.push_back(std::move(model));
            }
            return out;
        }
    }
    if (!cfg.train_if_missing) {
        throw ValidationError("model checkpoints are missing and train_if_missing is off");
    }
    return train_models(cfg);
}

MetricsRow evaluate_cell(const harness::ScenarioConfig& cfg, const TrainedModels& models,
                         const NoiseSchedule& sched, uint64_t seed, int user, double snr_db,
                         int offload_steps) {
    const int bg = cfg.background_ids.at(static_cast<size_t>(user));

    auto scene_rng = make_rng(seed, kCellScene + static_cast<uint64_t>(user));
    const harness::SyntheticScene scene =
        harness::generate_scene(scene_rng, bg, cfg.image_size, cfg.box_count_min,
                                cfg.box_count_max, cfg.box_intensity);

    // Digital leg: the semantic payload must cost exactly 20 bits per box.
    const codec::BitString bits = codec::encode_scene(scene.semantics);
    if (bits.size() != codec::kBitsPerBox * scene.semantics.boxes.size()) {
        throw std::logic_error("semantic bit budget violated");
    }
    const codec::BitString rx_bits = channel::transmit_digital(bits);
    const codec::SceneSemantics rx_sem = codec::decode_scene(rx_bits, scene.semantics.scene_id);
    const diffusion::Conditioning cond =
        diffusion::Conditioning::from_boxes(rx_sem.boxes, cfg.k_max);

    // Analog leg: same sampling streams for every (snr, offload) cell of
    // this scene, so option comparisons are noise-paired.
    channel::ChannelConfig ch;
    ch.snr_db = snr_db;
    ch.seed = derive_seed(derive_seed(seed, kCellChannel + static_cast<uint64_t>(user)),
                          std::bit_cast<uint64_t>(snr_db) ^
                              (static_cast<uint64_t>(offload_steps) << 1));
    const uint64_t sampling_seed = derive_seed(seed, kCellSampling + static_cast<uint64_t>(user));
    diffusion::SplitPlan plan{offload_steps};
    const Image raw = diffusion::split_sample(models.cluster,
                                              models.users.at(static_cast<size_t>(user)), cond,
                                              plan, sampling_seed, sched, ch);
    const Image out = codec::brightness_equalize(raw, harness::background_texture(bg,
                                                                                  cfg.image_size));

    MetricsRow row;
    row.seed = seed;
    row.user = user;
    row.snr_db = snr_db;
    row.offload_steps = offload_steps;
    row.iou_mean = harness::iou_mean(rx_sem.boxes,
                                     harness::detect_boxes(out, bg, cfg.contrast_threshold));
    row.psnr_db = harness::psnr_db(out, scene.image);

    scheduler::BatchLatencyModel bm{cfg.batch_base_ms, cfg.batch_per_item_ms};
    const double edge_ms =
        offload_steps > 0
            ? scheduler::batch_latency(bm, cfg.num_users) + offload_steps * cfg.edge_per_step_ms
            : 0.0;
    row.latency_ms_modeled =
        edge_ms + (cfg.total_steps - offload_steps) * cfg.local_per_step_ms;
    return row;
}

std::vector<MetricsRow> run_case_study(const harness::ScenarioConfig& cfg,
                                       const TrainedModels& models) {
    cfg.validate();
    if (static_cast<int>(models.users.size()) != cfg.num_users) {
        throw ValidationError("case study needs one personalized model per user");
    }
    const NoiseSchedule sched = make_schedule(cfg.total_steps, cfg.beta_start, cfg.beta_end);

    auto rows_for_seed = [&cfg, &models, &sched](uint64_t seed) {
        std::vector<MetricsRow> rows;
        for (int user = 0; user < cfg.num_users; ++user) {
            for (double snr : cfg.snr_db) {
                for (int k : cfg.offload_options) {
                    rows.push_back(evaluate_cell(cfg, models, sched, seed, user, snr, k));
                }
            }
        }
        return rows;
    };

    std::vector<std::future<std::vector<MetricsRow>>> futures;
    futures.reserve(cfg.seeds.size());
    for (uint64_t seed : cfg.seeds) {
        futures.push_back(std::async(std::launch::async, rows_for_seed, seed));
    }
    std::vector<MetricsRow> merged;
    for (auto& f : futures) {
        auto rows = f.get();
        merged.insert(merged.end(), rows.begin(), rows.end());
    }
    return merged;
}

void write_case_study_csv(const std::vector<MetricsRow>& rows, std::ostream& os) {
    os << "seed,user,snr_db,offload_steps,iou_mean,psnr_db,latency_ms_modeled\n";
    for (const MetricsRow& r : rows) {
        os << r.seed << "," << r.user << "," << format_double(r.snr_db) << "," << r.offload_steps
           << "," << format_double(r.iou_mean) << "," << format_double(r.psnr_db) << ","
           << format_double(r.latency_ms_modeled) << "\n";
    }
}

std::vector<federated::RoundRecord> run_fl_experiment(const harness::ScenarioConfig& cfg) {
    cfg.validate();
    const NoiseSchedule sched = make_schedule(cfg.total_steps, cfg.beta_start, cfg.beta_end);
    const diffusion::DenoiserArch arch = arch_of(cfg);

    const auto init = diffusion::DenoiserModel::random_init(arch,
                                                            derive_seed(cfg.seed, kClusterInit));
    std::vector<federated::Client> clients;
    for (int u = 0; u < cfg.num_users; ++u) {
        federated::Client c;
        c.client_id = u;
        c.dataset = harness::make_dataset(cfg.seed, cfg.background_ids.at(static_cast<size_t>(u)),
                                          cfg.train_scenes, cfg);
        c.personal = init;
        clients.push_back(std::move(c));
    }
    federated::ClusterState cluster;
    cluster.params = init.params();

    federated::AggregationPolicy policy;
    if (cfg.fl_weighting == "uniform") {
        policy.mode = federated::WeightingMode::Uniform;
    } else if (cfg.fl_weighting == "sample_size") {
        policy.mode = federated::WeightingMode::SampleSize;
    } else if (cfg.fl_weighting == "adaptive_inverse_loss") {
        policy.mode = federated::WeightingMode::AdaptiveInverseLoss;
    } else {
        throw ValidationError("unknown fl_weighting '" + cfg.fl_weighting + "'");
    }
    if (cfg.fl_clip_norm > 0.0) {
        policy.clip_norm = cfg.fl_clip_norm;
    }

    federated::RoundOptions opts;
    opts.steps_per_round = cfg.fl_steps_per_round;
    opts.batch_size = cfg.fl_batch_size;
    opts.lr = cfg.learning_rate;

    federated::EvalContext eval;
    eval.held_out = harness::make_mixed_dataset(derive_seed(cfg.seed, kFlHeldOut),
                                                cfg.background_ids, cfg.fl_eval_scenes, cfg);
    eval.eval_seed = derive_seed(cfg.seed, kFlEval);

    std::vector<federated::RoundRecord> records;
    {
        federated::RoundRecord initial;
        initial.round = 0;
        initial.cluster_eval_loss = federated::evaluate(init, eval, opts, sched);
        for (const auto& c : clients) {
            initial.client_eval_losses.emplace_back(
                c.client_id, federated::evaluate(c.personal, eval, opts, sched));
        }
        records.push_back(std::move(initial));
    }

    auto rng = make_rng(cfg.seed, kFlRounds);
    for (int r = 0; r < cfg.fl_rounds; ++r) {
        records.push_back(federated::fl_round(clients, cluster, policy, opts, eval, sched, rng));
    }
    return records;
}

std::vector<SchedulerRow> run_scheduler_experiment(const harness::ScenarioConfig& cfg) {
    cfg.validate();
    scheduler::BatchLatencyModel bm{cfg.batch_base_ms, cfg.batch_per_item_ms};
    scheduler::TradeoffMetric metric{cfg.lambda, cfg.total_steps};

    std::vector<SchedulerRow> rows;
    for (int i = 0; i < cfg.scheduler_instances; ++i) {
        auto rng = make_rng(cfg.seed, kSchedulerInstance + static_cast<uint64_t>(i));
        std::uniform_real_distribution<double> base_q(0.2, 0.5);
        std::uniform_real_distribution<double> bump(-0.1, 0.3);

        std::vector<scheduler::OffloadRequest> requests;
        long long space = 1;
        for (int u = 0; u < cfg.scheduler_users; ++u) {
            scheduler::OffloadRequest req;
            req.user_id = u;
            req.local_per_step_ms = cfg.local_per_step_ms;
            req.edge_per_step_ms = cfg.edge_per_step_ms;
            double q = base_q(rng);
            for (int option : cfg.offload_options) {
                req.quality[option] = q;
                q = std::clamp(q + bump(rng), 0.0, 1.0);
            }
            space *= static_cast<long long>(req.quality.size());
            requests.push_back(std::move(req));
        }

        SchedulerRow row;
        row.instance = i;
        const auto [seq_a, seq_u] = scheduler::sequential_assign(requests, metric, bm);
        row.sequential_utility = seq_u;
        if (space > scheduler::kDefaultEnumerationCap) {
            row.over_cap = true;
        } else {
            const auto [brute_a, brute_u] = scheduler::brute_force_assign(requests, metric, bm);
            row.brute_utility = brute_u;
            row.gap_percent =
                100.0 * (brute_u - seq_u) / std::max(std::abs(brute_u), 1e-12);
        }
        rows.push_back(row);
    }
    return rows;
}

void write_scheduler_csv(const std::vector<SchedulerRow>& rows, std::ostream& os) {
    os << "instance,brute_utility,sequential_utility,gap_percent,flag\n";
    for (const SchedulerRow& r : rows) {
        os << r.instance << ",";
        if (r.over_cap) {
            os << "," << format_double(r.sequential_utility) << ",,over_cap\n";
        } else {
            os << format_double(r.brute_utility) << "," << format_double(r.sequential_utility)
               << "," << format_double(r.gap_percent) << ",ok\n";
        }
    }
}

OffloadExperiment run_offload_experiment(const harness::ScenarioConfig& cfg) {
    cfg.validate();
    const offload::OffloadEnv env(cfg.offload_env);
    offload::RlConfig rl;
    rl.episodes = cfg.offload_episodes;

    OffloadExperiment out;
    {
        auto rng = make_rng(cfg.seed, kOffloadTrain);
        out.qtable = offload::train_policy(env, rl, rng);
    }

    // Every policy replays the same condition sequence: the environment
    // consumes identical RNG draws per step regardless of the action.
    auto episode_ms = [&](uint64_t seed, int start_split, bool greedy) {
        auto rng = make_rng(cfg.seed, kOffloadEval + seed);
        offload::OffloadState s = env.initial_state(rng);
        s.split_point = start_split;
        double total = 0.0;
        for (int step = 0; step < cfg.offload_eval_steps; ++step) {
            const int delta = greedy ? out.qtable.greedy_delta(env.discretize(s)) : 0;
            offload::OffloadState executed = s;
            executed.split_point =
                std::clamp(s.split_point + delta, 0, env.num_layers());
            total += env.latency_at(executed).total_ms;
            s = env.step(s, delta, rng).first;
        }
        return total / cfg.offload_eval_steps;
    };

    for (int d = 0; d < cfg.offload_eval_draws; ++d) {
        OffloadEvalRow row;
        row.draw = d;
        row.learned_ms = episode_ms(static_cast<uint64_t>(d), cfg.offload_env.init.split, true);
        row.all_local_ms = episode_ms(static_cast<uint64_t>(d), env.num_layers(), false);
        row.all_edge_ms = episode_ms(static_cast<uint64_t>(d), 0, false);
        out.rows.push_back(row);
    }
    return out;
}

void write_offload_csv(const std::vector<OffloadEvalRow>& rows, std::ostream& os) {
    os << "draw,learned_ms,all_local_ms,all_edge_ms\n";
    for (const OffloadEvalRow& r : rows) {
        os << r.draw << "," << format_double(r.learned_ms) << "," << format_double(r.all_local_ms)
           << "," << format_double(r.all_edge_ms) << "\n";
    }
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

constexpr const char* kPalette[8] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                     "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct AxisScale {
    double lo = 0.0, hi = 1.0;
    double px0 = 0.0, px1 = 1.0;

    double map(double v) const { return px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

AxisScale fit_axis(double lo, double hi, double px0, double px1) {
    if (!(std::isfinite(lo) && std::isfinite(hi))) {
        lo = 0.0;
        hi = 1.0;
    }
    if (lo == hi) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    return AxisScale{lo - pad, hi + pad, px0, px1};
}

} // namespace

void write_line_chart_svg(const std::vector<ChartSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          std::ostream& os) {
    constexpr double W = 640.0, H = 400.0;
    constexpr double L = 62.0, R = 18.0, Top = 34.0, B = 46.0;

    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const ChartSeries& s : series) {
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) {
                continue;
            }
            xlo = std::min(xlo, x);
            xhi = std::max(xhi, x);
            ylo = std::min(ylo, y);
            yhi = std::max(yhi, y);
        }
    }
    const AxisScale xs = fit_axis(xlo, xhi, L, W - R);
    const AxisScale ys = fit_axis(ylo, yhi, H - B, Top); // y grows upward

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\""
       << " font-size=\"14\">" << xml_escape(title) << "</text>\n";

    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << Top << "\" x2=\"" << L << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double fx = xs.lo + (xs.hi - xs.lo) * i / 4.0;
        const double px = xs.map(fx);
        os << "<line x1=\"" << format_double(px) << "\" y1=\"" << H - B << "\" x2=\""
           << format_double(px) << "\" y2=\"" << H - B + 4 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << format_double(px) << "\" y=\"" << H - B + 17
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
           << format_double(fx) << "</text>\n";

        const double fy = ys.lo + (ys.hi - ys.lo) * i / 4.0;
        const double py = ys.map(fy);
        os << "<line x1=\"" << L - 4 << "\" y1=\"" << format_double(py) << "\" x2=\"" << L
           << "\" y2=\"" << format_double(py) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << L - 7 << "\" y=\"" << format_double(py + 3)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
           << format_double(fy) << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 8
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
       << xml_escape(x_label) << "</text>\n";
    os << "<text x=\"14\" y=\"" << (Top + H - B) / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\""
       << " transform=\"rotate(-90 14 " << (Top + H - B) / 2 << ")\">" << xml_escape(y_label)
       << "</text>\n";

    for (size_t i = 0; i < series.size(); ++i) {
        const char* color = kPalette[i % 8];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& [x, y] : series[i].points) {
            if (!std::isfinite(x) || !std::isfinite(y)) {
                continue;
            }
            if (!first) {
                os << " ";
            }
            os << format_double(xs.map(x)) << "," << format_double(ys.map(y));
            first = false;
        }
        os << "\"/>\n";

        const double ly = Top + 14.0 * static_cast<double>(i);
        os << "<line x1=\"" << W - R - 110 << "\" y1=\"" << format_double(ly) << "\" x2=\""
           << W - R - 92 << "\" y2=\"" << format_double(ly) << "\" stroke=\"" << color
           << "\" stroke-width=\"1.5\"/>\n";
        os << "<text x=\"" << W - R - 88 << "\" y=\"" << format_double(ly + 3)
           << "\" font-family=\"sans-serif\" font-size=\"10\">" << xml_escape(series[i].label)
           << "</text>\n";
    }
    os << "</svg>\n";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::vector<std::string>> read_csv_rows(std::istream& is) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

} // namespace

void plot_csv(std::istream& csv, const std::string& title, std::ostream& svg) {
    const auto rows = read_csv_rows(csv);
    if (rows.empty()) {
        throw ValidationError("cannot plot an empty CSV");
    }
    const auto& header = rows.front();
    auto join = [](const std::vector<std::string>& cells) {
        std::string s;
        for (size_t i = 0; i < cells.size(); ++i) {
            s += (i ? "," : "") + cells[i];
        }
        return s;
    };
    const std::string schema = join(header);

    std::vector<ChartSeries> series;
    std::string x_label, y_label;

    if (schema == "round,client_id,loss") {
        std::map<std::string, ChartSeries> by_label;
        for (size_t i = 1; i < rows.size(); ++i) {
            const auto& r = rows[i];
            auto& s = by_label[r[1]];
            s.label = r[1];
            s.points.emplace_back(std::stod(r[0]), std::stod(r[2]));
        }
        for (auto& [label, s] : by_label) {
            series.push_back(std::move(s));
        }
        x_label = "round";
        y_label = "loss";
    } else if (schema == "seed,user,snr_db,offload_steps,iou_mean,psnr_db,latency_ms_modeled") {
        // Mean IoU over seeds and users per (snr, offload option).
        std::map<std::string, std::map<double, std::pair<double, int>>> acc;
        for (size_t i = 1; i < rows.size(); ++i) {
            const auto& r = rows[i];
            auto& cell = acc["offload " + r[3]][std::stod(r[2])];
            cell.first += std::stod(r[4]);
            cell.second += 1;
        }
        for (const auto& [label, by_snr] : acc) {
            ChartSeries s;
            s.label = label;
            for (const auto& [snr, sum_n] : by_snr) {
                s.points.emplace_back(snr, sum_n.first / sum_n.second);
            }
            series.push_back(std::move(s));
        }
        x_label = "snr_db";
        y_label = "mean iou";
    } else if (schema == "instance,brute_utility,sequential_utility,gap_percent,flag") {
        ChartSeries s;
        s.label = "gap %";
        for (size_t i = 1; i < rows.size(); ++i) {
            if (rows[i][4] != "ok") {
                continue;
            }
            s.points.emplace_back(std::stod(rows[i][0]), std::stod(rows[i][3]));
        }
        series.push_back(std::move(s));
        x_label = "instance";
        y_label = "optimality gap (%)";
    } else if (schema == "draw,learned_ms,all_local_ms,all_edge_ms") {
        const char* labels[3] = {"learned", "all local", "all edge"};
        for (int c = 0; c < 3; ++c) {
            ChartSeries s;
            s.label = labels[c];
            for (size_t i = 1; i < rows.size(); ++i) {
                s.points.emplace_back(std::stod(rows[i][0]),
                                      std::stod(rows[i][static_cast<size_t>(c) + 1]));
            }
            series.push_back(std::move(s));
        }
        x_label = "draw";
        y_label = "mean latency (ms)";
    } else {
        throw ValidationError("no chart renderer for CSV header '" + schema + "'");
    }

    write_line_chart_svg(series, title, x_label, y_label, svg);
}

} // namespace semcom::experiments
