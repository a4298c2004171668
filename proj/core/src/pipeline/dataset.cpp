#include "pilecast/pipeline/dataset.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pilecast/characterize.hpp"
#include "pilecast/pipeline/lhs.hpp"
#include "pilecast/rng.hpp"
#include "pilecast/text_io.hpp"

namespace pilecast::pipeline {

std::vector<SeedPileSpec> CollectConfig::default_seeds() {
    return {
        {PileKind::Triangular, 20.0, 24.0, 5.0}, {PileKind::Triangular, 30.0, 24.0, 5.0},
        {PileKind::Conical, 20.0, 24.0, 5.0},    {PileKind::Conical, 30.0, 24.0, 5.0},
        {PileKind::Wedged, 20.0, 16.0, 5.0},     {PileKind::Wedged, 30.0, 16.0, 5.0},
    };
}

namespace {

std::vector<DatasetRecord> run_chain(const CollectConfig& cfg, int seed_index, int repeat) {
    const int chain_id = seed_index * cfg.repeats + repeat;
    const SeedPileSpec& sp = cfg.seeds[seed_index];
    PerlinParams noise;
    noise.amplitude = cfg.noise_amplitude;
    noise.frequency = cfg.noise_frequency;
    noise.octaves = cfg.noise_octaves;
    noise.seed = substream_seed(cfg.seed, "noise", chain_id);

    GlobalHeightmap pile = make_seed_pile(sp.kind, sp.slope_deg, sp.extent, sp.height_cap,
                                          noise, cfg.cell_size);
    std::vector<Action> actions =
        lhs_actions(cfg.cycles, substream_seed(cfg.seed, "lhs", chain_id));

    std::vector<DatasetRecord> records;
    records.reserve(cfg.cycles);
    for (int cycle = 0; cycle < cfg.cycles; ++cycle) {
        DatasetRecord rec;
        rec.meta.seed_index = seed_index;
        rec.meta.repeat = repeat;
        rec.meta.cycle = cycle;
        rec.meta.pre_pile_hash = heightmap_hash(pile);
        rec.action = actions[cycle];
        try {
            rec.pose = select_dig_pose(
                pile, substream_seed(cfg.seed, "pose", chain_id * 100000 + cycle), cfg.pose);
            rec.h = cutout(pile, rec.pose, cfg.perf_window_cells, cfg.perf_window_cells,
                           cfg.perf_window_displacement);
            rec.h_state = cutout(pile, rec.pose, cfg.state_window_cells,
                                 cfg.state_window_cells, cfg.state_window_displacement);
            LoadingOutcome out =
                simulate_loading(pile, rec.pose, rec.action, cfg.machine, cfg.soil);
            rec.h_post = cutout(out.pile, rec.pose, cfg.state_window_cells,
                                cfg.state_window_cells, cfg.state_window_displacement);
            rec.perf = out.perf;
            rec.meta.capped = out.hit_time_cap;
            rec.meta.post_pile_hash = heightmap_hash(out.pile);
            pile = std::move(out.pile);
        } catch (const PileExhausted&) {
            break;  // chain truncated
        } catch (const std::out_of_range&) {
            break;  // window left the grid, treat like exhaustion
        } catch (const std::invalid_argument&) {
            break;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace

Dataset collect_dataset(const CollectConfig& cfg) {
    CollectConfig c = cfg;
    if (c.seeds.empty()) c.seeds = CollectConfig::default_seeds();
    if (c.repeats < 1 || c.cycles < 1)
        throw std::invalid_argument("collect_dataset: repeats and cycles must be >= 1");

    Dataset ds;
    ds.mirror_augment = c.mirror_augment;
    ds.seed = c.seed;

    const int n_chains = static_cast<int>(c.seeds.size()) * c.repeats;
    if (c.jobs <= 1) {
        for (int chain = 0; chain < n_chains; ++chain) {
            auto recs = run_chain(c, chain / c.repeats, chain % c.repeats);
            for (auto& r : recs) ds.records.push_back(std::move(r));
        }
        return ds;
    }

    // Chains are RNG-independent; run them on a bounded worker pool and merge
    // in chain order so the result does not depend on the job count.
    std::vector<std::vector<DatasetRecord>> per_chain(n_chains);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int chain = next.fetch_add(1);
            if (chain >= n_chains) return;
            per_chain[chain] = run_chain(c, chain / c.repeats, chain % c.repeats);
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min(c.jobs, n_chains);
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& recs : per_chain)
        for (auto& r : recs) ds.records.push_back(std::move(r));
    return ds;
}

namespace {

void write_local(std::ostream& out, const std::string& tag, const LocalHeightmap& h) {
    out << tag << " " << h.I << " " << h.J << " " << format_double(h.cell_size) << " "
        << format_double(h.displacement) << "\n";
    std::string line;
    for (int i = 0; i <= h.I; ++i) {
        line.clear();
        for (int j = -h.J / 2; j <= h.J / 2; ++j) {
            if (j > -h.J / 2) line += ' ';
            append_double(line, h.at(i, j));
        }
        out << line << "\n";
    }
}

LocalHeightmap read_local(std::istream& in, const std::vector<std::string_view>& hdr) {
    if (hdr.size() != 5) throw std::runtime_error("dataset: bad local heightmap header");
    LocalHeightmap h = make_local(static_cast<int>(parse_long(hdr[1])),
                                  static_cast<int>(parse_long(hdr[2])), parse_double(hdr[3]),
                                  parse_double(hdr[4]));
    std::string line;
    for (int i = 0; i <= h.I; ++i) {
        if (!next_data_line(in, line)) throw std::runtime_error("dataset: truncated window");
        const auto toks = split_tokens(line);
        if (static_cast<int>(toks.size()) != h.J + 1)
            throw std::runtime_error("dataset: window row width mismatch");
        for (int j = -h.J / 2; j <= h.J / 2; ++j) h.at(i, j) = parse_double(toks[j + h.J / 2]);
    }
    return h;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "PILECAST-DS 1\n";
    out << "count " << ds.records.size() << " mirror " << (ds.mirror_augment ? 1 : 0)
        << " seed " << ds.seed << "\n";
    for (std::size_t k = 0; k < ds.records.size(); ++k) {
        const DatasetRecord& r = ds.records[k];
        out << "record " << k << "\n";
        out << "pose " << format_double(r.pose.x) << " " << format_double(r.pose.y) << " "
            << format_double(r.pose.tx) << " " << format_double(r.pose.ty) << "\n";
        out << "action " << format_double(r.action.delta_bm) << " "
            << format_double(r.action.k_bm) << " " << format_double(r.action.delta_bk) << " "
            << format_double(r.action.k_bk) << "\n";
        out << "perf " << format_double(r.perf.mass_t) << " " << format_double(r.perf.time_s)
            << " " << format_double(r.perf.work_kj) << "\n";
        out << "meta " << r.meta.seed_index << " " << r.meta.repeat << " " << r.meta.cycle
            << " " << r.meta.pre_pile_hash << " " << r.meta.post_pile_hash << " "
            << (r.meta.capped ? 1 : 0) << "\n";
        write_local(out, "h", r.h);
        write_local(out, "hstate", r.h_state);
        write_local(out, "hpost", r.h_post);
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!next_data_line(in, line) ||
        split_tokens(line) != std::vector<std::string_view>{"PILECAST-DS", "1"})
        throw std::runtime_error("dataset: bad magic line");
    if (!next_data_line(in, line)) throw std::runtime_error("dataset: missing header");
    const auto hdr = split_tokens(line);
    if (hdr.size() != 6 || hdr[0] != "count" || hdr[2] != "mirror" || hdr[4] != "seed")
        throw std::runtime_error("dataset: bad header line");
    Dataset ds;
    const std::size_t count = parse_u64(hdr[1]);
    ds.mirror_augment = parse_long(hdr[3]) != 0;
    ds.seed = parse_u64(hdr[5]);
    ds.records.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        DatasetRecord r;
        auto expect = [&](const char* tag, std::size_t ntok) {
            if (!next_data_line(in, line)) throw std::runtime_error("dataset: truncated");
            const auto t = split_tokens(line);
            if (t.empty() || t[0] != tag || t.size() != ntok)
                throw std::runtime_error(std::string("dataset: expected ") + tag);
            return t;
        };
        expect("record", 2);
        auto t = expect("pose", 5);
        r.pose = {parse_double(t[1]), parse_double(t[2]), parse_double(t[3]),
                  parse_double(t[4])};
        t = expect("action", 5);
        r.action = {parse_double(t[1]), parse_double(t[2]), parse_double(t[3]),
                    parse_double(t[4])};
        t = expect("perf", 4);
        r.perf = {parse_double(t[1]), parse_double(t[2]), parse_double(t[3])};
        t = expect("meta", 7);
        r.meta.seed_index = static_cast<int>(parse_long(t[1]));
        r.meta.repeat = static_cast<int>(parse_long(t[2]));
        r.meta.cycle = static_cast<int>(parse_long(t[3]));
        r.meta.pre_pile_hash = parse_u64(t[4]);
        r.meta.post_pile_hash = parse_u64(t[5]);
        r.meta.capped = parse_long(t[6]) != 0;
        t = expect("h", 5);
        r.h = read_local(in, t);
        t = expect("hstate", 5);
        r.h_state = read_local(in, t);
        t = expect("hpost", 5);
        r.h_post = read_local(in, t);
        ds.records.push_back(std::move(r));
    }
    return ds;
}

void dataset_matrices_low(const Dataset& ds, nn::Matrix& X, nn::Matrix& Y,
                          std::vector<bool>* capped) {
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<Eigen::RowVector3d> targets;
    if (capped) capped->clear();
    for (const DatasetRecord& r : ds.records) {
        PileCharacteristics ch;
        try {
            ch = characterize(r.h);
        } catch (const FlatPatchError&) {
            continue;
        }
        Eigen::RowVectorXd x(8);
        x << ch.theta, ch.alpha, ch.kappa_x, ch.kappa_y, r.action.delta_bm, r.action.k_bm,
            r.action.delta_bk, r.action.k_bk;
        rows.push_back(x);
        targets.emplace_back(r.perf.mass_t, r.perf.time_s, r.perf.work_kj);
        if (capped) capped->push_back(r.meta.capped);
    }
    X.resize(static_cast<Eigen::Index>(rows.size()), 8);
    Y.resize(static_cast<Eigen::Index>(rows.size()), 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        X.row(static_cast<Eigen::Index>(i)) = rows[i];
        Y.row(static_cast<Eigen::Index>(i)) = targets[i];
    }
}

void dataset_matrices_high(const Dataset& ds, int input_hw, nn::Matrix& X, nn::Matrix& Y,
                           std::vector<bool>* capped, bool mirror_augment) {
    const int pix = input_hw * input_hw;
    const std::size_t n = ds.records.size() * (mirror_augment ? 2 : 1);
    X.resize(static_cast<Eigen::Index>(n), pix + 4);
    Y.resize(static_cast<Eigen::Index>(n), 3);
    if (capped) {
        capped->clear();
        capped->reserve(n);
    }
    Eigen::Index row = 0;
    for (const DatasetRecord& r : ds.records) {
        const Eigen::RowVectorXd base = nn::local_heightmap_row(r.h, input_hw);
        Eigen::RowVectorXd x(pix + 4);
        x << base, r.action.delta_bm, r.action.k_bm, r.action.delta_bk, r.action.k_bk;
        X.row(row) = x;
        Y.row(row) << r.perf.mass_t, r.perf.time_s, r.perf.work_kj;
        if (capped) capped->push_back(r.meta.capped);
        ++row;
        if (mirror_augment) {
            const Eigen::RowVectorXd mir = nn::local_heightmap_row(mirror_lateral(r.h), input_hw);
            Eigen::RowVectorXd xm(pix + 4);
            xm << mir, r.action.delta_bm, r.action.k_bm, r.action.delta_bk, r.action.k_bk;
            X.row(row) = xm;
            Y.row(row) << r.perf.mass_t, r.perf.time_s, r.perf.work_kj;
            if (capped) capped->push_back(r.meta.capped);
            ++row;
        }
    }
}

}  // namespace pilecast::pipeline
