// Copyright 2026 The pevqe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace pevqe::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitConvergence = 3;
inline constexpr int kExitIo = 4;

/// Everything a batch run needs. Keys of the INI file are "section.name"
/// pairs listed by config_keys().
struct RunConfig {
    // [run]
    std::string task;
    std::uint64_t seed = 7;
    std::filesystem::path output = "pevqe-out";
    int jobs = 1;

    // [input]
    std::filesystem::path cell;
    std::filesystem::path potential;
    std::filesystem::path fcidump;
    std::filesystem::path properties;
    /// Job directories holding integrals.fcidump, properties.txt and
    /// optionally environment.pot; used instead of the single input files.
    std::vector<std::filesystem::path> job_dirs;
    std::string name = "molecule";
    std::string basis;

    // [lattice]
    double cutoff_angstrom = 30.0;
    std::string criterion = "uniform-block";
    /// Central-cell molecules to turn into jobs; empty means all.
    std::vector<int> molecules;

    // [active]
    int active_orbitals = 6;
    int active_electrons = 6;

    // [solver]
    std::string method = "both";
    std::string pool = "sd";
    std::string shot_model = "exact";
    std::uint64_t shots = 100000;
    double gradient_tolerance = 8e-5;
    double energy_tolerance = 1e-6;
    int max_macro_iterations = 60;
    int max_adapt_iterations = 200;
    bool warm_start = true;
    double induced_efg_factor = 0.5;

    // [efg]
    std::vector<std::filesystem::path> nqi_inputs;
    std::filesystem::path reference;
    std::string system;
    std::vector<std::string> exclude;
};

struct Finding {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    std::string key;
    std::string message;
};

inline const std::vector<std::string> &task_names() {
    static const std::vector<std::string> names{"build-supercell", "solve-induced", "run-vqe",
                                                "run-scf", "efg-report"};
    return names;
}

/// "section.name" of every setting, in file order.
std::vector<std::string> config_keys();

/// Sets one key from its text form. Throws ParseError for unknown keys or
/// malformed values; range checks are left to validate().
void set_value(RunConfig &cfg, const std::string &key, const std::string &value);
std::string get_value(const RunConfig &cfg, const std::string &key);

/// Reads "[section]" headers and "name = value" lines over \p cfg. Lists
/// are whitespace or comma separated; '#' and ';' start comments.
void load_ini(std::istream &in, RunConfig &cfg);
void load_ini_file(const std::filesystem::path &path, RunConfig &cfg);

/// Canonical INI text of every key; equal configs give equal text.
std::string to_ini(const RunConfig &cfg);
/// FNV-1a 64 of the canonical text without run.output and run.jobs (they
/// do not change results), as 16 hex digits.
std::string config_hash(const RunConfig &cfg);

/// Schema and cross-field checks. Errors make a run impossible; warnings
/// flag thresholds that differ from the defaults.
std::vector<Finding> validate(const RunConfig &cfg);

/// Runs cfg.task, writing artifacts below cfg.output and progress to \p log.
/// Returns one of the kExit codes; exceptions are mapped to codes.
int run(const RunConfig &cfg, std::ostream &log);

/// Library version string.
std::string version();

} // namespace pevqe::app
