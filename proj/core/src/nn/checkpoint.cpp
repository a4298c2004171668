#include "pilecast/nn/checkpoint.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pilecast/text_io.hpp"

namespace pilecast::nn {

namespace {

void write_vector(std::ostream& out, const std::string& name, const Eigen::VectorXd& v) {
    out << "tensor " << name << " " << v.size() << "\n";
    std::string line;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) line += ' ';
        append_double(line, v(i));
        if ((i + 1) % 1024 == 0 || i + 1 == v.size()) {
            out << line << "\n";
            line.clear();
        }
    }
}

void read_values(std::istream& in, Eigen::VectorXd& v, Eigen::Index count) {
    v.resize(count);
    Eigen::Index got = 0;
    std::string line;
    while (got < count) {
        if (!next_data_line(in, line)) throw std::runtime_error("checkpoint: truncated tensor");
        for (const auto tok : split_tokens(line)) {
            if (got >= count) throw std::runtime_error("checkpoint: tensor overflow");
            v(got++) = parse_double(tok);
        }
    }
}

void write_normalizer(std::ostream& out, const std::string& name, const Normalizer& n) {
    out << name << " " << n.size() << "\n";
    Eigen::VectorXd mins = Eigen::Map<const Eigen::VectorXd>(n.mins.data(), n.mins.size());
    Eigen::VectorXd maxs = Eigen::Map<const Eigen::VectorXd>(n.maxs.data(), n.maxs.size());
    std::string line;
    for (Eigen::Index i = 0; i < mins.size(); ++i) {
        if (i) line += ' ';
        append_double(line, mins(i));
    }
    out << line << "\n";
    line.clear();
    for (Eigen::Index i = 0; i < maxs.size(); ++i) {
        if (i) line += ' ';
        append_double(line, maxs(i));
    }
    out << line << "\n";
}

Normalizer read_normalizer(std::istream& in, std::size_t count) {
    Normalizer n;
    Eigen::VectorXd mins, maxs;
    read_values(in, mins, static_cast<Eigen::Index>(count));
    read_values(in, maxs, static_cast<Eigen::Index>(count));
    n.mins.assign(mins.data(), mins.data() + mins.size());
    n.maxs.assign(maxs.data(), maxs.data() + maxs.size());
    return n;
}

}  // namespace

void save_checkpoint(PerformanceModel& model, const std::string& path, std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "PILECAST-NN 1\n";
    out << "seed " << seed << "\n";
    out << "kind " << model.kind() << "\n";
    out << "activation " << to_string(model.activation()) << "\n";

    if (auto* low = dynamic_cast<PsiLow*>(&model)) {
        const MlpSpec& s = low->mlp.spec;
        out << "mlp " << s.input_dim << " " << s.hidden_layers << " " << s.units << " "
            << s.output_dim << " " << format_double(s.dropout_rate) << "\n";
    } else if (auto* high = dynamic_cast<PsiHigh*>(&model)) {
        const ConvEncoderSpec& c = high->encoder.spec;
        const MlpSpec& s = high->head.spec;
        out << "conv " << c.input_hw << " " << c.layers << " " << c.filters << " "
            << c.kernel << " " << c.latent << "\n";
        out << "mlp " << s.input_dim << " " << s.hidden_layers << " " << s.units << " "
            << s.output_dim << " " << format_double(s.dropout_rate) << "\n";
    } else {
        throw std::runtime_error("save_checkpoint: unknown model kind");
    }

    write_normalizer(out, "norm_in", model.in_norm);
    write_normalizer(out, "norm_out", model.out_norm);
    model.visit_params([&out](const std::string& name, Eigen::VectorXd& p, Eigen::VectorXd&) {
        write_vector(out, name, p);
    });
    model.visit_state([&out](const std::string& name, Eigen::VectorXd& p) {
        write_vector(out, name, p);
    });
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::unique_ptr<PerformanceModel> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!next_data_line(in, line) ||
        split_tokens(line) != std::vector<std::string_view>{"PILECAST-NN", "1"})
        throw std::runtime_error("checkpoint: bad magic line");

    std::string kind, activation;
    MlpSpec mlp_spec;
    ConvEncoderSpec conv_spec;
    bool has_conv = false;
    Normalizer norm_in, norm_out;

    // Header section until the first tensor block.
    std::streampos tensors_begin = in.tellg();
    while (next_data_line(in, line)) {
        const auto t = split_tokens(line);
        if (t.empty()) continue;
        if (t[0] == "tensor") break;
        if (t[0] == "seed") {
            // provenance only
        } else if (t[0] == "kind" && t.size() == 2) {
            kind = std::string(t[1]);
        } else if (t[0] == "activation" && t.size() == 2) {
            activation = std::string(t[1]);
        } else if (t[0] == "mlp" && t.size() == 6) {
            mlp_spec.input_dim = static_cast<int>(parse_long(t[1]));
            mlp_spec.hidden_layers = static_cast<int>(parse_long(t[2]));
            mlp_spec.units = static_cast<int>(parse_long(t[3]));
            mlp_spec.output_dim = static_cast<int>(parse_long(t[4]));
            mlp_spec.dropout_rate = parse_double(t[5]);
        } else if (t[0] == "conv" && t.size() == 6) {
            has_conv = true;
            conv_spec.input_hw = static_cast<int>(parse_long(t[1]));
            conv_spec.layers = static_cast<int>(parse_long(t[2]));
            conv_spec.filters = static_cast<int>(parse_long(t[3]));
            conv_spec.kernel = static_cast<int>(parse_long(t[4]));
            conv_spec.latent = static_cast<int>(parse_long(t[5]));
        } else if (t[0] == "norm_in" && t.size() == 2) {
            norm_in = read_normalizer(in, parse_u64(t[1]));
        } else if (t[0] == "norm_out" && t.size() == 2) {
            norm_out = read_normalizer(in, parse_u64(t[1]));
        } else {
            throw std::runtime_error("checkpoint: unexpected header line: " + line);
        }
        tensors_begin = in.tellg();
    }

    mlp_spec.activation = activation_from_string(activation);
    std::unique_ptr<PerformanceModel> model;
    if (kind == "low") {
        model = std::make_unique<PsiLow>(mlp_spec, 0);
    } else if (kind == "high") {
        if (!has_conv) throw std::runtime_error("checkpoint: high model missing conv spec");
        model = std::make_unique<PsiHigh>(conv_spec, mlp_spec, 0);
    } else {
        throw std::runtime_error("checkpoint: unknown kind '" + kind + "'");
    }
    model->in_norm = std::move(norm_in);
    model->out_norm = std::move(norm_out);

    std::map<std::string, Eigen::VectorXd*> slots;
    model->visit_params([&slots](const std::string& name, Eigen::VectorXd& p, Eigen::VectorXd&) {
        slots[name] = &p;
    });
    model->visit_state([&slots](const std::string& name, Eigen::VectorXd& p) {
        slots[name] = &p;
    });

    in.clear();
    in.seekg(tensors_begin);
    std::size_t filled = 0;
    while (next_data_line(in, line)) {
        const auto t = split_tokens(line);
        if (t.size() != 3 || t[0] != "tensor")
            throw std::runtime_error("checkpoint: expected tensor header, got: " + line);
        const std::string name(t[1]);
        const auto it = slots.find(name);
        if (it == slots.end()) throw std::runtime_error("checkpoint: unknown tensor " + name);
        const auto count = static_cast<Eigen::Index>(parse_u64(t[2]));
        if (count != it->second->size())
            throw std::runtime_error("checkpoint: size mismatch for " + name);
        read_values(in, *it->second, count);
        ++filled;
    }
    if (filled != slots.size())
        throw std::runtime_error("checkpoint: missing tensors");
    return model;
}

}  // namespace pilecast::nn
