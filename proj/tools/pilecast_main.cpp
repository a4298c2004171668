// pilecast: seed-pile generation, data collection, surrogate training and
// evaluation, long-horizon rollouts, and diggability maps over one config.

#include <CLI11.hpp>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "pilecast/characterize.hpp"
#include "pilecast/config.hpp"
#include "pilecast/nn/checkpoint.hpp"
#include "pilecast/pipeline/dataset.hpp"
#include "pilecast/pipeline/digmap.hpp"
#include "pilecast/pipeline/evaluate.hpp"
#include "pilecast/pipeline/rollout.hpp"
#include "pilecast/rng.hpp"
#include "pilecast/text_io.hpp"

namespace fs = std::filesystem;
using namespace pilecast;

namespace {

struct Overrides {
    std::deque<std::string> storage;
    std::vector<std::pair<CLI::Option*, std::string>> items;

    void add(CLI::App* cmd, const std::string& key, const std::string& desc) {
        storage.emplace_back();
        const auto flag = "--" + key.substr(key.find('.') + 1);
        CLI::Option* opt = cmd->add_option(flag, storage.back(), desc);
        items.emplace_back(opt, key);
    }
    void apply(RunConfig& cfg) {
        std::size_t i = 0;
        for (auto& [opt, key] : items) {
            if (opt->count()) cfg.set(key, storage[i]);
            ++i;
        }
    }
};

MachineParams machine_from(const RunConfig& c) {
    MachineParams m;
    m.bucket_width = c.get_double("machine.bucket_width", m.bucket_width);
    m.bucket_capacity = c.get_double("machine.bucket_capacity", m.bucket_capacity);
    m.v_bm_max = c.get_double("machine.v_bm_max", m.v_bm_max);
    m.v_bk_max = c.get_double("machine.v_bk_max", m.v_bk_max);
    m.f_b0 = c.get_double("machine.f_b0", m.f_b0);
    m.drive_speed_target = c.get_double("machine.drive_speed_target", m.drive_speed_target);
    m.max_penetration = c.get_double("machine.max_penetration", m.max_penetration);
    m.max_fill_time = c.get_double("machine.max_fill_time", m.max_fill_time);
    m.approach_distance = c.get_double("machine.approach_distance", m.approach_distance);
    m.timestep = c.get_double("machine.timestep", m.timestep);
    return m;
}

SoilParams soil_from(const RunConfig& c) {
    SoilParams s;
    s.density = c.get_double("soil.density", s.density);
    s.repose_deg = c.get_double("soil.repose_deg", s.repose_deg);
    s.flow_step_fraction = c.get_double("soil.flow_step_fraction", s.flow_step_fraction);
    return s;
}

PoseSelectParams pose_from(const RunConfig& c) {
    PoseSelectParams p;
    p.heading_jitter_deg = c.get_double("pose.heading_jitter_deg", p.heading_jitter_deg);
    p.epsilon = c.get_double("pose.epsilon", p.epsilon);
    p.valid_depth = c.get_double("pose.valid_depth", p.valid_depth);
    p.valid_width = c.get_double("pose.valid_width", p.valid_width);
    p.edge_low = c.get_double("pose.edge_low", p.edge_low);
    p.edge_high = c.get_double("pose.edge_high", p.edge_high);
    return p;
}

pipeline::CollectConfig collect_from(const RunConfig& c, std::uint64_t seed, int jobs) {
    pipeline::CollectConfig cc;
    cc.seeds = pipeline::CollectConfig::default_seeds();
    const double ext = c.get_double("terrain.extent", 24.0);
    const double ext_wedge = c.get_double("terrain.extent_wedge", 16.0);
    const double cap = c.get_double("terrain.height_cap", 5.0);
    for (auto& s : cc.seeds) {
        s.extent = s.kind == PileKind::Wedged ? ext_wedge : ext;
        s.height_cap = cap;
    }
    cc.repeats = static_cast<int>(c.get_long("collect.repeats", 4));
    cc.cycles = static_cast<int>(c.get_long("collect.cycles", 30));
    cc.cell_size = c.get_double("terrain.cell_size", 0.1);
    cc.noise_amplitude = c.get_double("terrain.noise_amplitude", 0.15);
    cc.noise_frequency = c.get_double("terrain.noise_frequency", 0.35);
    cc.noise_octaves = static_cast<int>(c.get_long("terrain.noise_octaves", 3));
    cc.machine = machine_from(c);
    cc.soil = soil_from(c);
    cc.pose = pose_from(c);
    cc.mirror_augment = c.get_bool("collect.mirror_augment", false);
    cc.seed = seed;
    cc.jobs = jobs;
    return cc;
}

// Deterministic train/test split over record indices.
void split_indices(std::size_t n, double test_fraction, std::uint64_t seed,
                   std::vector<std::size_t>& train_idx, std::vector<std::size_t>& test_idx) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(substream_seed(seed, "testsplit"));
    rng.shuffle(idx);
    const std::size_t n_test = static_cast<std::size_t>(std::llround(test_fraction * n));
    test_idx.assign(idx.begin(), idx.begin() + n_test);
    train_idx.assign(idx.begin() + n_test, idx.end());
}

pipeline::Dataset subset(const pipeline::Dataset& ds, const std::vector<std::size_t>& idx) {
    pipeline::Dataset out;
    out.mirror_augment = ds.mirror_augment;
    out.seed = ds.seed;
    out.records.reserve(idx.size());
    for (std::size_t i : idx) out.records.push_back(ds.records[i]);
    return out;
}

int cmd_gen_piles(const RunConfig& cfg, std::uint64_t seed) {
    const std::string out_dir = cfg.get_string("gen.out_dir", "piles");
    fs::create_directories(out_dir);
    const auto seeds = pipeline::CollectConfig::default_seeds();
    const double ext = cfg.get_double("terrain.extent", 24.0);
    const double ext_wedge = cfg.get_double("terrain.extent_wedge", 16.0);
    const double cap = cfg.get_double("terrain.height_cap", 5.0);
    const double cell = cfg.get_double("terrain.cell_size", 0.1);
    PerlinParams noise;
    noise.amplitude = cfg.get_double("terrain.noise_amplitude", 0.15);
    noise.frequency = cfg.get_double("terrain.noise_frequency", 0.35);
    noise.octaves = static_cast<int>(cfg.get_long("terrain.noise_octaves", 3));
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        auto sp = seeds[k];
        sp.extent = sp.kind == PileKind::Wedged ? ext_wedge : ext;
        sp.height_cap = cap;
        noise.seed = substream_seed(seed, "noise", k);
        const GlobalHeightmap H =
            make_seed_pile(sp.kind, sp.slope_deg, sp.extent, sp.height_cap, noise, cell);
        const std::string name = to_string(sp.kind) + std::to_string(static_cast<int>(sp.slope_deg));
        save_heightmap(H, out_dir + "/pile_" + name + ".hm", &seed);
        std::cout << "wrote " << out_dir << "/pile_" << name << ".hm  volume="
                  << format_double(pile_volume(H)) << " m^3\n";
    }
    return 0;
}

int cmd_collect(const RunConfig& cfg, std::uint64_t seed, int jobs) {
    const std::string out = cfg.get_string("collect.out", "dataset.ds");
    pipeline::Dataset ds = pipeline::collect_dataset(collect_from(cfg, seed, jobs));
    pipeline::save_dataset(ds, out);
    std::cout << "wrote " << out << "  records=" << ds.records.size() << "\n";
    return 0;
}

nn::TrainConfig train_config_from(const RunConfig& cfg, std::uint64_t seed) {
    nn::TrainConfig tc;
    tc.lr = cfg.get_double("train.lr", 1e-5);
    tc.batch_size = static_cast<int>(cfg.get_long("train.batch_size", 64));
    tc.max_epochs = static_cast<int>(cfg.get_long("train.max_epochs", 500));
    tc.patience = static_cast<int>(cfg.get_long("train.patience", 50));
    tc.seed = substream_seed(seed, "train");
    return tc;
}

int cmd_train(const RunConfig& cfg, std::uint64_t seed) {
    const std::string dataset_path = cfg.get_string("train.dataset", "dataset.ds");
    const std::string out = cfg.get_string("train.out", "model.nn");
    const std::string kind = cfg.get_string("train.model", "low");
    const double test_fraction = cfg.get_double("eval.test_fraction", 0.1);
    const bool sweep = cfg.get_bool("train.sweep", false);

    const pipeline::Dataset full = pipeline::load_dataset(dataset_path);
    std::vector<std::size_t> train_idx, test_idx;
    split_indices(full.records.size(), test_fraction, full.seed, train_idx, test_idx);
    const pipeline::Dataset ds = subset(full, train_idx);

    nn::TrainConfig tc = train_config_from(cfg, seed);
    nn::MlpSpec spec;
    spec.hidden_layers = static_cast<int>(cfg.get_long("train.hidden_layers", 2));
    spec.units = static_cast<int>(cfg.get_long("train.units", kind == "high" ? 2048 : 512));
    spec.activation = nn::activation_from_string(cfg.get_string("train.activation", "swish"));
    spec.dropout_rate = cfg.get_double("train.dropout", 0.1);

    nn::Matrix X, Y;
    const std::uint64_t init_seed = substream_seed(seed, "init");
    std::unique_ptr<nn::PerformanceModel> model;
    nn::TrainResult result;

    if (sweep) {
        // Desk-scale 3x3 sweep over hidden layers and width.
        const int layer_grid[3] = {1, 2, 3};
        const int unit_grid[3] = {128, 512, 2048};
        if (kind != "low") throw std::runtime_error("train: sweep supports the low model");
        pipeline::dataset_matrices_low(ds, X, Y);
        std::cout << "layers,units,best_val_mse,epochs\n";
        double best = std::numeric_limits<double>::infinity();
        for (int li = 0; li < 3; ++li)
            for (int ui = 0; ui < 3; ++ui) {
                nn::MlpSpec s = spec;
                s.hidden_layers = layer_grid[li];
                s.units = unit_grid[ui];
                nn::TrainResult r;
                auto m = pipeline::fit_low(X, Y, s, tc, init_seed, &r);
                std::cout << s.hidden_layers << "," << s.units << ","
                          << format_double(r.best_val_mse) << "," << r.history.size() << "\n";
                if (r.best_val_mse < best) {
                    best = r.best_val_mse;
                    model = std::move(m);
                    result = std::move(r);
                }
            }
    } else if (kind == "low") {
        spec.input_dim = 8;
        pipeline::dataset_matrices_low(ds, X, Y);
        model = pipeline::fit_low(X, Y, spec, tc, init_seed, &result);
    } else if (kind == "high") {
        nn::ConvEncoderSpec conv;
        spec.input_dim = conv.latent + 4;
        pipeline::dataset_matrices_high(ds, conv.input_hw, X, Y, nullptr, ds.mirror_augment);
        model = pipeline::fit_high(X, Y, conv, spec, tc, init_seed, &result);
    } else {
        throw std::runtime_error("train: model must be low or high");
    }

    nn::save_checkpoint(*model, out, seed);
    std::cout << "wrote " << out << "  train_rows=" << X.rows()
              << " best_val_mse=" << format_double(result.best_val_mse) << " epochs="
              << result.history.size() << "\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg, std::uint64_t seed) {
    const std::string dataset_path = cfg.get_string("eval.dataset", "dataset.ds");
    const std::string checkpoint = cfg.get_string("eval.checkpoint", "model.nn");
    const std::string out = cfg.get_string("eval.out", "metrics.csv");
    const double test_fraction = cfg.get_double("eval.test_fraction", 0.1);
    const bool timing = cfg.get_bool("eval.timing", false);

    const pipeline::Dataset full = pipeline::load_dataset(dataset_path);
    std::vector<std::size_t> train_idx, test_idx;
    split_indices(full.records.size(), test_fraction, full.seed, train_idx, test_idx);
    const pipeline::Dataset ds = subset(full, test_idx);
    if (ds.records.empty()) throw std::runtime_error("eval: empty test split");

    auto model = nn::load_checkpoint(checkpoint);
    nn::Matrix X, Y;
    std::vector<bool> capped;
    if (model->kind() == "low")
        pipeline::dataset_matrices_low(ds, X, Y, &capped);
    else
        pipeline::dataset_matrices_high(ds, 32, X, Y, &capped);

    const pipeline::EvalResult r = pipeline::evaluate(*model, X, Y, capped, timing);
    std::ofstream os(out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + out);
    os << "# PILECAST-EVAL 1\n# seed " << seed << "\n";
    os << "target,mre,mre_uncapped,n_used,n_floor_excluded\n";
    const char* names[3] = {"mass", "time", "work"};
    for (int t = 0; t < 3; ++t)
        os << names[t] << "," << format_double(r.mre[t]) << ","
           << format_double(r.mre_uncapped[t]) << "," << r.n_used[t] << ","
           << r.n_floor_excluded[t] << "\n";
    std::cout << "wrote " << out << "  mass_mre=" << format_double(r.mre[0])
              << " time_mre=" << format_double(r.mre[1])
              << " work_mre=" << format_double(r.mre[2]) << " capped=" << r.n_capped << "\n";
    if (timing)
        std::cout << "inference_ms=" << format_double(r.mean_inference_ms) << "\n";
    return 0;
}

int cmd_rollout(const RunConfig& cfg, std::uint64_t seed) {
    const std::string pile_path = cfg.get_string("rollout.pile", "");
    if (pile_path.empty()) throw std::runtime_error("rollout: pile path required");
    const int cycles = static_cast<int>(cfg.get_long("rollout.cycles", 40));
    const auto mode = pipeline::rollout_mode_from_string(cfg.get_string("rollout.mode", "oracle"));
    const std::string out = cfg.get_string("rollout.out", "rollout.csv");
    const std::string snap_dir = cfg.get_string("rollout.snapshots_dir", "");

    pipeline::RolloutConfig rc;
    rc.machine = machine_from(cfg);
    rc.soil = soil_from(cfg);
    rc.pose = pose_from(cfg);
    rc.seed = seed;
    if (!snap_dir.empty()) {
        fs::create_directories(snap_dir);
        rc.snapshot = [snap_dir, seed](int n, const GlobalHeightmap& gt,
                                       const GlobalHeightmap& pred) {
            save_heightmap(gt, snap_dir + "/gt_" + std::to_string(n) + ".hm", &seed);
            save_heightmap(pred, snap_dir + "/pred_" + std::to_string(n) + ".hm", &seed);
        };
    }

    std::unique_ptr<nn::PerformanceModel> model;
    if (mode != pipeline::RolloutMode::Oracle)
        model = nn::load_checkpoint(cfg.get_string("rollout.checkpoint", "model.nn"));

    const GlobalHeightmap H1 = load_heightmap(pile_path);
    const pipeline::RolloutReport rep = pipeline::rollout(H1, cycles, mode, model.get(), rc);

    std::ofstream os(out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + out);
    os << "# PILECAST-ROLLOUT 1\n# seed " << seed << "\n# mode " << to_string(mode) << "\n";
    os << "cycle,gt_mass,gt_time,gt_work,pred_mass,pred_time,pred_work,gt_volume,"
          "pred_volume,volume_abs_err,pile_state_err,perf_err_accum\n";
    for (std::size_t n = 0; n < rep.cycles.size(); ++n) {
        const auto& e = rep.cycles[n];
        os << n << "," << format_double(e.gt.mass_t) << "," << format_double(e.gt.time_s)
           << "," << format_double(e.gt.work_kj) << "," << format_double(e.pred.mass_t)
           << "," << format_double(e.pred.time_s) << "," << format_double(e.pred.work_kj)
           << "," << format_double(e.gt_volume) << "," << format_double(e.pred_volume)
           << "," << format_double(e.volume_abs_err) << ","
           << format_double(e.pile_state_err) << "," << format_double(e.perf_err_accum)
           << "\n";
    }
    std::cout << "wrote " << out << "  cycles=" << rep.completed
              << " accum_gt_mass=" << format_double(rep.accum_gt[0])
              << " accum_pred_mass=" << format_double(rep.accum_pred[0])
              << " final_volume_err="
              << format_double(std::abs(rep.final_pred_volume - rep.final_gt_volume))
              << (rep.exhausted ? " (exhausted)" : "") << "\n";
    return 0;
}

int cmd_digmap(const RunConfig& cfg, std::uint64_t seed) {
    const std::string pile_path = cfg.get_string("digmap.pile", "");
    if (pile_path.empty()) throw std::runtime_error("digmap: pile path required");
    const std::string checkpoint = cfg.get_string("digmap.checkpoint", "model.nn");
    const int locations = static_cast<int>(cfg.get_long("digmap.locations", 150));
    const std::string out = cfg.get_string("digmap.out", "digmap.csv");
    const std::string out_grid = cfg.get_string("digmap.out_grid", "digmap_mass.hm");

    Action a;
    {
        const auto toks = split_tokens(cfg.get_string("digmap.action", "0.68 4.51 0.17 4.46"));
        if (toks.size() != 4) throw std::runtime_error("digmap: action needs 4 values");
        a = {parse_double(toks[0]), parse_double(toks[1]), parse_double(toks[2]),
             parse_double(toks[3])};
    }

    const GlobalHeightmap H = load_heightmap(pile_path);
    auto model = nn::load_checkpoint(checkpoint);
    pipeline::DigmapConfig dc;
    dc.pose = pose_from(cfg);
    const pipeline::DigmapResult r = pipeline::diggability_map(H, a, locations, *model, dc);
    if (static_cast<int>(r.entries.size()) < locations)
        std::cerr << "warning: only " << r.entries.size() << " of " << locations
                  << " edge locations available\n";

    std::ofstream os(out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + out);
    os << "# PILECAST-DIGMAP 1\n# seed " << seed << "\n";
    os << "index,x,y,tx,ty,theta,alpha,kappa_x,kappa_y,mass,time,work\n";
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
        const auto& e = r.entries[i];
        os << i << "," << format_double(e.pose.x) << "," << format_double(e.pose.y) << ","
           << format_double(e.pose.tx) << "," << format_double(e.pose.ty) << ","
           << format_double(e.ch.theta) << "," << format_double(e.ch.alpha) << ","
           << format_double(e.ch.kappa_x) << "," << format_double(e.ch.kappa_y) << ","
           << format_double(e.pred[0]) << "," << format_double(e.pred[1]) << ","
           << format_double(e.pred[2]) << "\n";
    }

    // Rendered grid: predicted mass painted at each dig location.
    GlobalHeightmap grid = make_flat_map(H.nx, H.ny, H.cell_size, H.origin_x, H.origin_y);
    for (const auto& e : r.entries) {
        const int ix = static_cast<int>(std::llround((e.pose.x - H.origin_x) / H.cell_size));
        const int iy = static_cast<int>(std::llround((e.pose.y - H.origin_y) / H.cell_size));
        if (ix >= 0 && ix < grid.nx && iy >= 0 && iy < grid.ny) grid.at(ix, iy) = e.pred[0];
    }
    save_heightmap(grid, out_grid, &seed);
    std::cout << "wrote " << out << " and " << out_grid << "  locations=" << r.entries.size()
              << " inference_s=" << format_double(r.inference_seconds) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pilecast: sequential wheel-loader bucket-filling prediction engine"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    int jobs = 1;
    app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "root RNG seed (default 0)");
    app.add_option("--jobs", jobs, "worker cap for stage-internal parallelism")
        ->check(CLI::PositiveNumber);

    auto* gen = app.add_subcommand("gen-piles", "write the six standard seed piles");
    auto* collect = app.add_subcommand("collect", "run loading chains and write a dataset");
    auto* train = app.add_subcommand("train", "train a performance predictor");
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the held-out split");
    auto* rollout = app.add_subcommand("rollout", "long-horizon sequential prediction");
    auto* digmap = app.add_subcommand("digmap", "predicted performance around the pile edge");
    for (auto* cmd : {gen, collect, train, eval, rollout, digmap}) cmd->fallthrough();

    Overrides ov;
    ov.add(gen, "gen.out_dir", "output directory");
    ov.add(gen, "terrain.cell_size", "grid cell size [m]");
    ov.add(gen, "terrain.extent", "pile footprint extent [m]");
    ov.add(gen, "terrain.extent_wedge", "wedge footprint depth [m]");
    ov.add(gen, "terrain.height_cap", "pile height cap [m]");
    ov.add(gen, "terrain.noise_amplitude", "surface noise amplitude [m]");
    ov.add(collect, "collect.repeats", "chains per seed pile");
    ov.add(collect, "collect.cycles", "loadings per chain");
    ov.add(collect, "collect.out", "dataset output path");
    ov.add(collect, "collect.mirror_augment", "set the mirror-augmentation flag");
    ov.add(collect, "terrain.noise_amplitude", "surface noise amplitude [m]");
    ov.add(train, "train.dataset", "dataset path");
    ov.add(train, "train.out", "checkpoint output path");
    ov.add(train, "train.model", "low | high");
    ov.add(train, "train.hidden_layers", "MLP hidden layers (1..3)");
    ov.add(train, "train.units", "MLP units per hidden layer");
    ov.add(train, "train.activation", "leaky_relu | swish");
    ov.add(train, "train.lr", "Adam learning rate");
    ov.add(train, "train.batch_size", "minibatch size");
    ov.add(train, "train.max_epochs", "epoch cap");
    ov.add(train, "train.patience", "early-stop patience");
    ov.add(train, "train.sweep", "run the 3x3 layers/units mini-sweep");
    ov.add(eval, "eval.dataset", "dataset path");
    ov.add(eval, "eval.checkpoint", "checkpoint path");
    ov.add(eval, "eval.out", "metrics CSV path");
    ov.add(eval, "eval.test_fraction", "held-out fraction");
    ov.add(eval, "eval.timing", "also measure mean inference time");
    ov.add(rollout, "rollout.pile", "initial pile file");
    ov.add(rollout, "rollout.cycles", "number of loading cycles");
    ov.add(rollout, "rollout.mode", "oracle | high | low");
    ov.add(rollout, "rollout.checkpoint", "checkpoint for model modes");
    ov.add(rollout, "rollout.out", "rollout CSV path");
    ov.add(rollout, "rollout.snapshots_dir", "per-cycle pile snapshot directory");
    ov.add(digmap, "digmap.pile", "pile file");
    ov.add(digmap, "digmap.checkpoint", "checkpoint path");
    ov.add(digmap, "digmap.locations", "number of edge locations");
    ov.add(digmap, "digmap.action", "fixed action, 4 space-separated values");
    ov.add(digmap, "digmap.out", "digmap CSV path");
    ov.add(digmap, "digmap.out_grid", "rendered mass grid path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = RunConfig::load(config_path);
        ov.apply(cfg);
        if (gen->parsed()) return cmd_gen_piles(cfg, seed);
        if (collect->parsed()) return cmd_collect(cfg, seed, jobs);
        if (train->parsed()) return cmd_train(cfg, seed);
        if (eval->parsed()) return cmd_eval(cfg, seed);
        if (rollout->parsed()) return cmd_rollout(cfg, seed);
        if (digmap->parsed()) return cmd_digmap(cfg, seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
