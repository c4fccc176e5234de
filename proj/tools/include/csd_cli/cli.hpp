// Batch front-end for the csd tool: configuration records, the five commands
// and the serialization helpers they share.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "csd/illposed.hpp"
#include "csd/picard.hpp"

namespace csd::cli {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum Exit : int { ok = 0, validation = 1, violation = 2, nonconvergence = 3 };

// Bad configuration or arguments; maps to exit code 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Invocation {
    std::string command;     // simulate, verify, illposed, bilinear, norm
    std::string sub;         // illposed: f2, aflow, cubic
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = ".";
    bool quick = false;
};

// ---- io -------------------------------------------------------------------

// Shortest round-trip text for a double ("%.17g"); non-finite values become "nan"/"inf"/"-inf".
std::string format_double(double x);
// SHA-1 of "blob <size>\0" + text, as git hashes file contents.
std::string git_blob_sha1(const std::string& text);
std::string read_text(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, const std::string& text);
// Two-space indented dump with a trailing newline.
std::string dump_json(const json& j);

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void row(const std::vector<std::string>& cells);
    std::string str() const { return text_; }
    std::size_t rows() const { return rows_; }

private:
    std::size_t width_;
    std::size_t rows_ = 0;
    std::string text_;
};

// ---- configs --------------------------------------------------------------

struct ModeList {
    // [k1, k2, re, im]: coefficient of e^{i k.x}
    std::vector<std::array<double, 4>> modes;
};

struct SimulateConfig {
    int n = 64;
    double length = 6.283185307179586;
    double T = 0.25;
    double t_ext = 0.25;
    double mass = 0.0;
    double cfl = 0.5;
    double dt = 0.0;
    int max_iterations = 8;
    int min_iterations = 0;
    double tolerance = 1e-12;
    std::string mode = "full";
    double norm_s = 0.0;
    double norm_b = 0.5;
    std::string norm_q = "l1";
    ModeList a0, a1, a2, psi_up, psi_down;
};

struct VerifyConfig {
    std::uint64_t seed = 1;
    long dirac_samples = 10000;
    long interaction_samples = 1000000;
    long whitney_samples = 100000;
    long symbol_samples = 100000;
    int besov_fields = 100;
    int identity_fields = 8;
    long multiplier_samples = 200;
    std::string fault = "none";  // none, flip_riesz_sign
};

struct IllposedConfig {
    std::uint64_t seed = 1;
    std::vector<double> s_values;
    std::vector<double> lambdas;  // snapped to the 4 k^2 pi^2 / eps^2 family
    csd::SweepOptions sweep;
};

struct BilinearConfig {
    std::uint64_t seed = 1;
    std::string estimate = "both";  // product, nullform, both
    std::vector<int> Ns{1, 2, 4, 8};
    std::vector<int> Ls{1, 2, 4, 8};
    std::vector<int> rs{1, 2, 4};
    double omega_angle = 0.3;
};

struct NormConfig {
    std::string archive = "solution.bin";
    double s = 0.0;
    double b = 0.5;
    std::string q = "l1";
    double window = 0.0;  // 0: half the time reach on either side of t = 0
};

// Each parser rejects unknown keys and out-of-range values with ValidationError.
// quick reduces sizes; seed, when given, overrides the configured one.
SimulateConfig parse_simulate(const json& j, bool quick);
VerifyConfig parse_verify(const json& j, bool quick, std::optional<std::uint64_t> seed);
IllposedConfig parse_illposed(const std::string& sub, const json& j, bool quick, std::optional<std::uint64_t> seed);
BilinearConfig parse_bilinear(const json& j, bool quick, std::optional<std::uint64_t> seed);
NormConfig parse_norm(const json& j);

json to_json(const SimulateConfig& c);
json to_json(const VerifyConfig& c);
json to_json(const IllposedConfig& c);
json to_json(const BilinearConfig& c);
json to_json(const NormConfig& c);

// Fields a_nu (real: conjugate modes added) and psi0 from a simulate config.
csd::CauchyData build_data(const SimulateConfig& c);

// ---- solution archive -----------------------------------------------------

// Little-endian: magic "CSDSOL1\0", int32 n, int32 frames, float64 length, dt, t0,
// then per frame psi_up, psi_down, A0, A1, A2 as n*n complex128 in physical space.
struct SolutionArchive {
    int n = 0;
    double length = 0.0;
    double dt = 0.0;
    double t0 = 0.0;
    std::vector<std::array<csd::ScalarField, 5>> frames;
};

void write_archive(const std::filesystem::path& p, const SolutionArchive& a);
SolutionArchive read_archive(const std::filesystem::path& p);

// ---- commands -------------------------------------------------------------

// Each command writes its artifacts under inv.out and a wall-clock line to
// timing.txt; the return value is the exit code.
int cmd_simulate(const Invocation& inv, std::ostream& log);
int cmd_verify(const Invocation& inv, std::ostream& log);
int cmd_illposed(const Invocation& inv, std::ostream& log);
int cmd_bilinear(const Invocation& inv, std::ostream& log);
int cmd_norm(const Invocation& inv, std::ostream& log);

// Dispatch with ValidationError mapped to exit 1 (message on log).
int run(const Invocation& inv, std::ostream& log);
// Argument parsing (CLI11) followed by run().
int main_entry(int argc, char** argv);

}  // namespace csd::cli
