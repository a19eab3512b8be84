#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gbeam/beam.hpp"
#include "gbeam/ray.hpp"

namespace gbeam::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// A parsed scenario file (JSON, `"version": 1`). Unknown keys are rejected
/// at every level. Angles are given in degrees and stored in radians,
/// ascending.
struct Scenario {
    SoundSpeedProfile profile = SoundSpeedProfile::constant(1500.0);
    double r0 = 0.0;
    double z0 = 0.0;
    std::vector<double> angles;
    Horizon horizon = Horizon::time(10.0);
    TraceOptions options;
    BeamConfig beam;
    std::vector<double> offsets{0.0};  // beam normal offsets [m]
    std::set<std::string> outputs;     // empty: everything the subcommand can write
    std::filesystem::path out_dir = ".";

    bool wants(std::string_view output) const { return outputs.empty() || outputs.contains(std::string(output)); }
};

/// Throws Error(Config) on malformed input. Relative CSV profile paths and
/// `out_dir` resolve against base_dir.
Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

inline const std::vector<std::string> kSubcommands{"trace", "spread", "caustics", "beam", "czdist", "validate"};

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;  // overrides the scenario
    unsigned threads = 0;                          // 0: hardware concurrency
    std::optional<std::string> timestamp;          // written to manifest.txt only
};

/// Runs one subcommand and returns its exit status. Files go to the output
/// directory; summaries go to `out`, diagnostics to `err`. Library errors are
/// caught and mapped to kExitConfig or kExitRuntime.
int run(std::string_view subcommand, const Scenario& scenario, const RunOptions& options, std::ostream& out,
        std::ostream& err);

}  // namespace gbeam::cli
