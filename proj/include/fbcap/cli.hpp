#pragma once

// Command-line front end. Each command writes to the given streams and
// returns the process exit code, so the commands can be driven in-process.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fbcap/capacity.hpp"
#include "fbcap/coder.hpp"
#include "fbcap/errors.hpp"
#include "fbcap/noise.hpp"

namespace fbcap::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitInvalidSpec = 2,
    kExitNumerical = 3,
    kExitDiverged = 4,
};

/// Malformed or incomplete channel spec document.
class SpecFormatError : public Error {
public:
    using Error::Error;
};

/// {"f": [...], "g": [...], "noise_variance": x, "power": x, "c": x?}
struct ChannelSpecFile {
    std::vector<double> f;
    std::vector<double> g;
    double noise_variance = 1.0;
    double power = 1.0;
    double c = 1.0;

    ArmaSpec arma() const { return {f, g, noise_variance}; }
    CapacityQuery query() const { return {arma(), power, c}; }
};

/// Throws SpecFormatError on malformed JSON, missing/unknown keys or wrong types.
ChannelSpecFile parse_channel_spec(std::string_view text);
ChannelSpecFile load_channel_spec(const std::filesystem::path& path);

/// 9 significant digits, "%.9g" style.
std::string format_number(double x);

inline constexpr std::string_view kSweepHeader = "power,snr,a_bar,variant,capacity_bits,kim_bits,loop_verdict";
inline constexpr std::string_view kTraceHeader = "k,x_tilde,y_prime,e_prime,u,v";

struct SweepOptions {
    double power_min = 0.0;
    double power_max = 0.0;
    std::size_t points = 2;
    bool log_spacing = false;
    std::vector<double> powers;  ///< explicit grid; overrides min/max/points when non-empty
    std::optional<std::filesystem::path> out;
};

/// Power grid in ascending order. Throws InvalidInput for an inadmissible range.
std::vector<double> sweep_grid(const SweepOptions& opts);

struct SimulateOptions {
    SimMode mode = SimMode::colored;
    std::size_t samples = 1'000'000;
    std::size_t burn_in = 1'000;
    std::uint64_t seed = 1;
    std::optional<std::filesystem::path> out;
};

int cmd_validate(const std::filesystem::path& spec, std::ostream& out, std::ostream& err);
int cmd_capacity(const std::filesystem::path& spec, bool json, std::ostream& out, std::ostream& err);
int cmd_sweep(const std::filesystem::path& spec, const SweepOptions& opts, std::ostream& out, std::ostream& err);
int cmd_simulate(const std::filesystem::path& spec, const SimulateOptions& opts, std::ostream& out,
                 std::ostream& err);
int cmd_verify(const std::filesystem::path& spec, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a command.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fbcap::cli
