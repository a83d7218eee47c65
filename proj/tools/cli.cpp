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
#include "cli.hpp"

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pevqe/app.hpp"
#include "pevqe/error.hpp"

namespace pevqe::cli {

namespace {

// Flag name -> config key. Flags take precedence over the config file.
const std::vector<std::pair<std::string, std::string>> &flag_keys() {
    static const std::vector<std::pair<std::string, std::string>> k{
        {"--seed", "run.seed"},
        {"--output,-o", "run.output"},
        {"--jobs,-j", "run.jobs"},
        {"--cell", "input.cell"},
        {"--potential", "input.potential"},
        {"--fcidump", "input.fcidump"},
        {"--properties", "input.properties"},
        {"--job-dir", "input.job_dirs"},
        {"--name", "input.name"},
        {"--basis", "input.basis"},
        {"--cutoff", "lattice.cutoff_angstrom"},
        {"--criterion", "lattice.criterion"},
        {"--molecule", "lattice.molecules"},
        {"--active-orbitals", "active.orbitals"},
        {"--active-electrons", "active.electrons"},
        {"--method", "solver.method"},
        {"--pool", "solver.pool"},
        {"--shot-model", "solver.shot_model"},
        {"--shots", "solver.shots"},
        {"--gradient-tolerance", "solver.gradient_tolerance"},
        {"--energy-tolerance", "solver.energy_tolerance"},
        {"--max-macro-iterations", "solver.max_macro_iterations"},
        {"--nqi", "efg.inputs"},
        {"--reference", "efg.reference"},
        {"--system", "efg.system"},
        {"--exclude", "efg.exclude"},
    };
    return k;
}

bool is_list(const std::string &key) {
    return key == "input.job_dirs" || key == "lattice.molecules" || key == "efg.inputs" ||
           key == "efg.exclude";
}

} // namespace

int main(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Embedded ADAPT-VQE-SCF and nuclear quadrupole coupling in periodic ice",
                 "pevqe"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", app::version());

    std::string config;
    std::vector<std::string> sets;
    app.add_option("--config,-c", config, "INI configuration file");
    app.add_option("--set", sets, "Override one setting: section.name=value")
        ->allow_extra_args(false);

    std::map<std::string, std::vector<std::string>> flag_values;
    for (const auto &[flag, key] : flag_keys()) {
        auto *opt = app.add_option(flag, flag_values[key], "Sets " + key);
        if (!is_list(key)) {
            opt->expected(1);
        }
    }

    std::string validate_task;
    for (const auto &t : app::task_names()) {
        app.add_subcommand(t, "Run the " + t + " task");
    }
    auto *val = app.add_subcommand("validate", "Check a configuration and list findings");
    val->add_option("--task", validate_task, "Task whose inputs are checked");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? app::kExitOk : app::kExitValidation;
    }

    app::RunConfig cfg;
    try {
        if (!config.empty()) {
            app::load_ini_file(config, cfg);
        }
        for (const auto &s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                throw ParseError("--set expects section.name=value, got '" + s + "'");
            }
            app::set_value(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
        for (const auto &[flag, key] : flag_keys()) {
            const auto &v = flag_values[key];
            if (v.empty()) {
                continue;
            }
            std::string joined;
            for (const auto &x : v) {
                joined += (joined.empty() ? "" : " ") + x;
            }
            app::set_value(cfg, key, joined);
        }
    } catch (const IoError &e) {
        err << "error: " << e.what() << '\n';
        return app::kExitIo;
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return app::kExitValidation;
    }

    if (val->parsed()) {
        if (!validate_task.empty()) {
            cfg.task = validate_task;
        }
        const auto findings = app::validate(cfg);
        bool failed = false;
        for (const auto &f : findings) {
            const bool e = f.severity == app::Finding::Severity::Error;
            out << (e ? "error: " : "warning: ") << f.key << ": " << f.message << '\n';
            failed = failed || e;
        }
        out << findings.size() << " finding(s); config hash " << app::config_hash(cfg) << '\n';
        return failed ? app::kExitValidation : app::kExitOk;
    }
    for (auto *sub : app.get_subcommands()) {
        cfg.task = sub->get_name();
    }
    return app::run(cfg, out);
}

} // namespace pevqe::cli
