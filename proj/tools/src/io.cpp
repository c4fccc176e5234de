#include <openssl/sha.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "csd_cli/cli.hpp"

namespace csd::cli {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string git_blob_sha1(const std::string& text) {
    const std::string blob = "blob " + std::to_string(text.size()) + std::string(1, '\0') + text;
    unsigned char md[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), md);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned char c : md) {
        out += hex[c >> 4];
        out += hex[c & 15];
    }
    return out;
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
    text_ += "\r\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::string& c = cells[i];
        if (i) text_ += ',';
        if (c.find_first_of(",\"\r\n") == std::string::npos) {
            text_ += c;
        } else {
            text_ += '"';
            for (char ch : c) {
                if (ch == '"') text_ += '"';
                text_ += ch;
            }
            text_ += '"';
        }
    }
    text_ += "\r\n";
    ++rows_;
}

namespace {

constexpr char kMagic[8] = {'C', 'S', 'D', 'S', 'O', 'L', '1', '\0'};

template <class T>
void put(std::ostream& o, T v) {
    o.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw ValidationError("truncated solution archive");
    return v;
}

}  // namespace

void write_archive(const std::filesystem::path& p, const SolutionArchive& a) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out.write(kMagic, sizeof kMagic);
    put<std::int32_t>(out, a.n);
    put<std::int32_t>(out, static_cast<std::int32_t>(a.frames.size()));
    put<double>(out, a.length);
    put<double>(out, a.dt);
    put<double>(out, a.t0);
    for (const auto& fr : a.frames) {
        for (const auto& f : fr) {
            const ScalarField x = to_physical(f);
            for (const cplx& z : x.v) {
                put<double>(out, z.real());
                put<double>(out, z.imag());
            }
        }
    }
}

SolutionArchive read_archive(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ValidationError("cannot open archive " + p.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw ValidationError("not a solution archive: " + p.string());
    SolutionArchive a;
    a.n = get<std::int32_t>(in);
    const int frames = get<std::int32_t>(in);
    a.length = get<double>(in);
    a.dt = get<double>(in);
    a.t0 = get<double>(in);
    if (a.n < 2 || a.n > 4096 || frames < 1 || frames > 100000 || !(a.length > 0.0) || !(a.dt > 0.0)) {
        throw ValidationError("corrupt archive header");
    }
    const Grid2D g(a.n, a.length);
    a.frames.reserve(frames);
    for (int k = 0; k < frames; ++k) {
        std::array<ScalarField, 5> fr{ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g)};
        for (auto& f : fr) {
            for (cplx& z : f.v) {
                const double re = get<double>(in);
                const double im = get<double>(in);
                z = cplx(re, im);
            }
        }
        a.frames.push_back(std::move(fr));
    }
    return a;
}

}  // namespace csd::cli
