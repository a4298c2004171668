#include "pilecast/heightmap.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pilecast/text_io.hpp"

namespace pilecast {

bool GlobalHeightmap::contains(double wx, double wy) const {
    return wx >= origin_x && wx <= max_x() && wy >= origin_y && wy <= max_y();
}

double GlobalHeightmap::sample(double wx, double wy) const {
    if (!contains(wx, wy))
        throw std::out_of_range("heightmap sample outside grid bounds");
    const double gx = (wx - origin_x) / cell_size;
    const double gy = (wy - origin_y) / cell_size;
    int ix = static_cast<int>(gx);
    int iy = static_cast<int>(gy);
    if (ix >= nx - 1) ix = nx - 2;
    if (iy >= ny - 1) iy = ny - 2;
    const double u = gx - ix;
    const double v = gy - iy;
    const double h00 = at(ix, iy);
    const double h10 = at(ix + 1, iy);
    const double h01 = at(ix, iy + 1);
    const double h11 = at(ix + 1, iy + 1);
    return (1.0 - u) * (1.0 - v) * h00 + u * (1.0 - v) * h10 + (1.0 - u) * v * h01 +
           u * v * h11;
}

void GlobalHeightmap::validate() const {
    if (cell_size <= 0.0) throw std::invalid_argument("heightmap: cell_size must be > 0");
    if (nx < 2 || ny < 2) throw std::invalid_argument("heightmap: nx, ny must be >= 2");
    if (heights.size() != static_cast<std::size_t>(nx) * ny)
        throw std::invalid_argument("heightmap: heights size does not match nx*ny");
    for (double h : heights)
        if (!std::isfinite(h)) throw std::invalid_argument("heightmap: non-finite height");
}

GlobalHeightmap make_flat_map(int nx, int ny, double cell_size, double origin_x,
                              double origin_y) {
    GlobalHeightmap H;
    H.nx = nx;
    H.ny = ny;
    H.cell_size = cell_size;
    H.origin_x = origin_x;
    H.origin_y = origin_y;
    H.heights.assign(static_cast<std::size_t>(nx) * ny, 0.0);
    H.validate();
    return H;
}

double pile_volume(const GlobalHeightmap& H) {
    double sum = 0.0;
    for (double h : H.heights)
        if (h > 0.0) sum += h;
    return sum * H.cell_size * H.cell_size;
}

std::uint64_t heightmap_hash(const GlobalHeightmap& H) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    mix(&H.nx, sizeof(H.nx));
    mix(&H.ny, sizeof(H.ny));
    mix(&H.cell_size, sizeof(H.cell_size));
    mix(&H.origin_x, sizeof(H.origin_x));
    mix(&H.origin_y, sizeof(H.origin_y));
    mix(H.heights.data(), H.heights.size() * sizeof(double));
    return h;
}

std::string heightmap_to_string(const GlobalHeightmap& H, const std::uint64_t* seed) {
    H.validate();
    std::string out;
    out.reserve(H.heights.size() * 10 + 64);
    out += "PILECAST-HM 1\n";
    out += std::to_string(H.nx) + " " + std::to_string(H.ny) + " ";
    append_double(out, H.cell_size);
    out += " ";
    append_double(out, H.origin_x);
    out += " ";
    append_double(out, H.origin_y);
    out += "\n";
    for (int iy = 0; iy < H.ny; ++iy) {
        for (int ix = 0; ix < H.nx; ++ix) {
            if (ix) out += ' ';
            append_double(out, H.at(ix, iy));
        }
        out += '\n';
    }
    if (seed) out += "# seed " + std::to_string(*seed) + "\n";
    return out;
}

GlobalHeightmap heightmap_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || split_tokens(line) != std::vector<std::string_view>{"PILECAST-HM", "1"})
        throw std::runtime_error("heightmap: bad magic line");
    if (!std::getline(in, line)) throw std::runtime_error("heightmap: missing header line");
    const auto hdr = split_tokens(line);
    if (hdr.size() != 5) throw std::runtime_error("heightmap: header needs 5 fields");
    GlobalHeightmap H;
    H.nx = static_cast<int>(parse_long(hdr[0]));
    H.ny = static_cast<int>(parse_long(hdr[1]));
    H.cell_size = parse_double(hdr[2]);
    H.origin_x = parse_double(hdr[3]);
    H.origin_y = parse_double(hdr[4]);
    if (H.nx < 2 || H.ny < 2) throw std::runtime_error("heightmap: bad extents");
    H.heights.resize(static_cast<std::size_t>(H.nx) * H.ny);
    for (int iy = 0; iy < H.ny; ++iy) {
        if (!std::getline(in, line)) throw std::runtime_error("heightmap: truncated data");
        const auto toks = split_tokens(line);
        if (static_cast<int>(toks.size()) != H.nx)
            throw std::runtime_error("heightmap: row width mismatch");
        for (int ix = 0; ix < H.nx; ++ix) H.at(ix, iy) = parse_double(toks[ix]);
    }
    H.validate();
    return H;
}

void save_heightmap(const GlobalHeightmap& H, const std::string& path,
                    const std::uint64_t* seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << heightmap_to_string(H, seed);
    if (!out) throw std::runtime_error("write failed: " + path);
}

GlobalHeightmap load_heightmap(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return heightmap_from_string(ss.str());
}

}  // namespace pilecast
