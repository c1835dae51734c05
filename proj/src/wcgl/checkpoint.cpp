#include "wcgl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace wcgl {

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed endian not supported");

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(buf, buf + sizeof(T));
    out.append(buf, sizeof(T));
}

struct Reader {
    const std::string& data;
    size_t pos = 0;
    template <typename T>
    T get() {
        if (pos + sizeof(T) > data.size()) throw CheckpointError("truncated checkpoint");
        char buf[sizeof(T)];
        std::memcpy(buf, data.data() + pos, sizeof(T));
        if constexpr (std::endian::native == std::endian::big)
            std::reverse(buf, buf + sizeof(T));
        pos += sizeof(T);
        T v;
        std::memcpy(&v, buf, sizeof(T));
        return v;
    }
    std::string get_bytes(size_t n) {
        if (pos + n > data.size()) throw CheckpointError("truncated checkpoint");
        std::string s = data.substr(pos, n);
        pos += n;
        return s;
    }
};

void put_field(std::string& out, const SpectralField& f) {
    for (const Complex& c : f.coeffs) {
        put<double>(out, c.real());
        put<double>(out, c.imag());
    }
}

void get_field(Reader& r, SpectralField& f) {
    for (Complex& c : f.coeffs) {
        const double re = r.get<double>();
        const double im = r.get<double>();
        c = {re, im};
    }
}

}  // namespace

void save_checkpoint(const std::vector<SolverState>& states, const RunConfig& cfg,
                     const std::string& path) {
    if (states.empty()) throw CheckpointError("save_checkpoint: no states");
    std::string blob;
    blob.append("WCGL", 4);
    put<uint32_t>(blob, 1);
    const std::string echo = serialize_config(cfg);
    put<uint32_t>(blob, uint32_t(echo.size()));
    blob += echo;
    put<uint32_t>(blob, uint32_t(states.size()));
    for (const SolverState& st : states) {
        put<double>(blob, st.noise.t);
        put<double>(blob, st.noise.start);
        put_field(blob, st.v);
        put_field(blob, st.noise.z);
    }
    for (const SolverState& st : states) {
        put<uint64_t>(blob, st.seed);
        put<uint32_t>(blob, st.noise.step);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open '" + path + "' for writing");
    out.write(blob.data(), std::streamsize(blob.size()));
    if (!out) throw CheckpointError("write failed for '" + path + "'");
}

CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open '" + path + "'");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    Reader r{data};
    if (r.get_bytes(4) != "WCGL") throw CheckpointError("bad magic");
    const uint32_t version = r.get<uint32_t>();
    if (version != 1) throw CheckpointError("unsupported version " + std::to_string(version));
    const uint32_t cfg_len = r.get<uint32_t>();
    CheckpointData out;
    out.config_echo = r.get_bytes(cfg_len);
    out.config = parse_config(out.config_echo);

    const uint32_t n_states = r.get<uint32_t>();
    if (n_states == 0 || n_states > 2) throw CheckpointError("bad state count");

    const GridSpec grid = out.config.grid;
    struct Raw {
        double t, start;
        SpectralField v, z;
    };
    std::vector<Raw> raw(n_states);
    for (uint32_t i = 0; i < n_states; ++i) {
        raw[i].t = r.get<double>();
        raw[i].start = r.get<double>();
        raw[i].v = SpectralField(grid);
        raw[i].z = SpectralField(grid);
        get_field(r, raw[i].v);
        get_field(r, raw[i].z);
    }
    std::vector<std::pair<uint64_t, uint32_t>> counters(n_states);
    for (uint32_t i = 0; i < n_states; ++i) {
        counters[i].first = r.get<uint64_t>();
        counters[i].second = r.get<uint32_t>();
    }
    if (r.pos != data.size()) throw CheckpointError("trailing bytes in checkpoint");

    for (uint32_t i = 0; i < n_states; ++i) {
        SolverState st;
        st.grid = grid;
        st.params = out.config.model;
        st.seed = counters[i].first;
        st.v = std::move(raw[i].v);
        st.noise = zero_start(grid, out.config.model.mu, raw[i].start, counters[i].second,
                              out.config.model.noise_scale);
        st.noise.t = raw[i].t;
        st.noise.z = std::move(raw[i].z);
        st.wick = build_wick(st.noise, st.params);
        out.states.push_back(std::move(st));
    }
    return out;
}

}  // namespace wcgl
