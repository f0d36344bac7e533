#include "rnego/vf_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace rnego {

namespace {

constexpr char kMagic[8] = {'R', 'N', 'V', 'F', '0', '0', '0', '1'};

void put_u32(std::ofstream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ofstream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::ifstream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

double get_f64(std::ifstream& is) {
    double v = 0.0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

}  // namespace

void save_value_function(const ValueFunction& vf, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    os.write(kMagic, sizeof kMagic);
    const Grid& g = vf.grid;
    put_u32(os, static_cast<std::uint32_t>(g.ndim()));
    for (std::size_t d = 0; d < g.ndim(); ++d) {
        put_f64(os, g.lower(d));
        put_f64(os, g.upper(d));
        put_u32(os, static_cast<std::uint32_t>(g.count(d)));
        put_u32(os, g.periodic(d) ? 1u : 0u);
    }
    put_f64(os, vf.tau);
    std::vector<float> buf(vf.values.size());
    for (std::size_t i = 0; i < vf.values.size(); ++i) {
        buf[i] = static_cast<float>(vf.values[i]);
    }
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!os) {
        throw std::runtime_error("write failed: " + path);
    }
    os.close();

    nlohmann::json meta;
    meta["format"] = "RNVF0001";
    meta["tau"] = vf.tau;
    meta["dims"] = nlohmann::json::array();
    for (std::size_t d = 0; d < g.ndim(); ++d) {
        meta["dims"].push_back({{"lower", g.lower(d)},
                                {"upper", g.upper(d)},
                                {"count", g.count(d)},
                                {"periodic", g.periodic(d)}});
    }
    std::ofstream ms(path + ".json", std::ios::trunc);
    ms << meta.dump(2) << "\n";
}

ValueFunction load_value_function(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("cannot open for reading: " + path);
    }
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw std::runtime_error("bad value-function file header: " + path);
    }
    const std::uint32_t ndim = get_u32(is);
    if (ndim == 0 || ndim > 8) {
        throw std::runtime_error("unsupported dimension count in: " + path);
    }
    GridSpec spec;
    for (std::uint32_t d = 0; d < ndim; ++d) {
        GridDim gd;
        gd.lower = get_f64(is);
        gd.upper = get_f64(is);
        gd.count = get_u32(is);
        gd.periodic = get_u32(is) != 0;
        spec.dims.push_back(gd);
    }
    const double tau = get_f64(is);
    if (!is) {
        throw std::runtime_error("truncated header: " + path);
    }
    Grid grid(spec);
    std::vector<float> buf(grid.size());
    is.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!is) {
        throw std::runtime_error("truncated value data: " + path);
    }
    std::vector<double> values(buf.begin(), buf.end());
    return ValueFunction(std::move(grid), tau, std::move(values));
}

}  // namespace rnego
