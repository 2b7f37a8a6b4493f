#include "singprop/io.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "singprop/error.hpp"

namespace singprop {

namespace {

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ConfigError("binary read: truncated file");
    return v;
}

std::ofstream open_out(const std::string& path, bool binary) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    return os;
}

std::ifstream open_in(const std::string& path, bool binary) {
    std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
    if (!is) throw ConfigError("cannot open " + path);
    return is;
}

void put_magic(std::ostream& os, const char* magic) { os.write(magic, 4); }

void get_magic(std::istream& is, const char* magic) {
    char m[4];
    is.read(m, 4);
    if (!is || std::memcmp(m, magic, 4) != 0) throw ConfigError(std::string("binary read: expected magic ") + magic);
}

void put_complex(std::ostream& os, cplx z) {
    put<double>(os, z.real());
    put<double>(os, z.imag());
}

cplx get_complex(std::istream& is) {
    const double re = get<double>(is);
    return {re, get<double>(is)};
}

}  // namespace

void write_symbol_binary(const std::string& path, const GridSymbol& a) {
    auto os = open_out(path, true);
    put_magic(os, "GSYM");
    put<uint32_t>(os, a.n_x());
    put<uint32_t>(os, a.n_xi());
    put<double>(os, a.grid.L);
    put<double>(os, a.sigma);
    for (int m = 0; m < a.n_x(); ++m)
        for (int l = 0; l < a.n_xi(); ++l) put_complex(os, a.values(m, l));
}

GridSymbol read_symbol_binary(const std::string& path) {
    auto is = open_in(path, true);
    get_magic(is, "GSYM");
    const int rows = static_cast<int>(get<uint32_t>(is)), cols = static_cast<int>(get<uint32_t>(is));
    const double L = get<double>(is);
    if (rows != 2 * cols) throw ConfigError("GSYM: expected n_x = 2 n_xi");
    GridSymbol a;
    a.grid = Grid(cols, L);
    a.sigma = get<double>(is);
    a.values.resize(rows, cols);
    for (int m = 0; m < rows; ++m)
        for (int l = 0; l < cols; ++l) a.values(m, l) = get_complex(is);
    return a;
}

void write_state_binary(const std::string& path, const StateVector& u) {
    auto os = open_out(path, true);
    put_magic(os, "GSTA");
    put<uint32_t>(os, u.grid.n);
    put<double>(os, u.grid.L);
    for (int i = 0; i < u.grid.n; ++i) put_complex(os, u.values[i]);
}

StateVector read_state_binary(const std::string& path) {
    auto is = open_in(path, true);
    get_magic(is, "GSTA");
    const int n = static_cast<int>(get<uint32_t>(is));
    Grid g(n, get<double>(is));
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v[i] = get_complex(is);
    return StateVector(g, v);
}

void write_stft_binary(const std::string& path, const StftField& V) {
    auto os = open_out(path, true);
    const int n = V.grid.n;
    put_magic(os, "GTFF");
    put<uint32_t>(os, n);
    put<uint32_t>(os, n);
    put<double>(os, V.grid.L);
    put<double>(os, V.sigma);
    for (int i = 0; i < n; ++i) put_complex(os, V.window[i]);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) put_complex(os, V.values(i, l));
}

StftField read_stft_binary(const std::string& path) {
    auto is = open_in(path, true);
    get_magic(is, "GTFF");
    const int nx = static_cast<int>(get<uint32_t>(is)), nxi = static_cast<int>(get<uint32_t>(is));
    if (nx != nxi) throw ConfigError("GTFF: expected a square field");
    StftField V;
    V.grid = Grid(nx, get<double>(is));
    V.sigma = get<double>(is);
    V.window.resize(nx);
    for (int i = 0; i < nx; ++i) V.window[i] = get_complex(is);
    V.values.resize(nx, nx);
    for (int i = 0; i < nx; ++i)
        for (int l = 0; l < nx; ++l) V.values(i, l) = get_complex(is);
    return V;
}

void write_symbol_csv(const std::string& path, const GridSymbol& a) {
    auto os = open_out(path, false);
    os << "x,xi,re,im\n" << std::setprecision(17);
    for (int m = 0; m < a.n_x(); ++m)
        for (int l = 0; l < a.n_xi(); ++l)
            os << a.x(m) << ',' << a.xi(l) << ',' << a.values(m, l).real() << ',' << a.values(m, l).imag() << '\n';
}

void write_state_csv(const std::string& path, const StateVector& u) {
    auto os = open_out(path, false);
    os << "x,re,im\n" << std::setprecision(17);
    for (int i = 0; i < u.grid.n; ++i) os << u.grid.x(i) << ',' << u.values[i].real() << ',' << u.values[i].imag() << '\n';
}

StateVector read_state_csv(const std::string& path, const Grid& g) {
    auto is = open_in(path, false);
    std::string line;
    std::getline(is, line);
    Eigen::VectorXcd v(g.n);
    int i = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (i >= g.n) throw ConfigError(path + ": more rows than grid points");
        std::istringstream ls(line);
        double x, re, im;
        char c1, c2;
        if (!(ls >> x >> c1 >> re >> c2 >> im)) throw ConfigError(path + ": malformed row " + std::to_string(i + 2));
        if (std::abs(x - g.x(i)) > 1e-9 * std::max(1.0, g.L))
            throw ConfigError(path + ": x column does not match the grid at row " + std::to_string(i + 2));
        v[i++] = {re, im};
    }
    if (i != g.n) throw ConfigError(path + ": fewer rows than grid points");
    return StateVector(g, v);
}

void write_spectrum_csv(const std::string& path, const SpectralBasis& b) {
    auto os = open_out(path, false);
    os << "j,lambda_j\n" << std::setprecision(17);
    for (int j = 0; j < b.n_kept; ++j) os << j + 1 << ',' << b.lambdas[j] << '\n';
}

void write_stft_csv(const std::string& path, const StftField& V) {
    auto os = open_out(path, false);
    os << "x,xi,magnitude\n" << std::setprecision(17);
    for (int i = 0; i < V.grid.n; ++i)
        for (int l = 0; l < V.grid.n; ++l) os << V.x(i) << ',' << V.xi(l) << ',' << std::abs(V.values(i, l)) << '\n';
}

nlohmann::ordered_json to_json(const WavefrontReport& r) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const WavefrontRecord& w : r.records)
        out.push_back({{"direction", {w.direction.x, w.direction.xi}},
                       {"angle", w.angle},
                       {"exponent", w.exponent},
                       {"residual", w.residual},
                       {"dynamic_range", w.dynamic_range},
                       {"low_confidence", w.low_confidence},
                       {"in_wavefront", w.in_wavefront}});
    return out;
}

nlohmann::ordered_json to_json(const FilterEvidence& e) {
    return {{"member", e.member},
            {"exponent", e.exponent},
            {"residual", e.residual},
            {"decayed_to_floor", e.decayed_to_floor},
            {"complement", e.complement.describe()},
            {"shell_theta", e.shell_theta},
            {"shell_max", e.shell_max}};
}

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        auto os = open_out(tmp, false);
        os << text;
        if (!os) throw ConfigError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace singprop
