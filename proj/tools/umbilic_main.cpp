/*
Copyright 2026 The umbilic authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "umbilic.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliArgs {
    std::string mode;
    std::string config_path;
    std::string out_dir = ".";
    double tol_umbilic = 0.0;
    std::string lambda_range;
    int seed_grid = 0;
    bool quiet = false;
};

/// Flag overrides as an RFC 7386 merge patch over the config file. The
/// subcommand always fixes the mode.
std::string build_overrides(const CliArgs& args) {
    json patch;
    patch["mode"] = args.mode;
    if (args.tol_umbilic > 0.0) patch["tolerances"]["umbilic"] = args.tol_umbilic;
    if (args.seed_grid > 0) patch["seed_grid"] = args.seed_grid;
    if (!args.lambda_range.empty()) {
        double lo = 0.0, hi = 0.0;
        int n = 0;
        char tail = 0;
        if (std::sscanf(args.lambda_range.c_str(), "%lf:%lf:%d%c", &lo, &hi, &n, &tail) != 3)
            throw CLI::ValidationError("--lambda-range", "expected the form lo:hi:samples");
        patch["lambda_range"] = json::array({lo, hi, n});
    }
    return patch.dump();
}

bool write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    return static_cast<bool>(out);
}

int run_session(const CliArgs& args) {
    std::ifstream in(args.config_path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "umbilic: cannot read config file '%s'\n", args.config_path.c_str());
        return UMB_ERR_CONFIG;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();

    std::string overrides = build_overrides(args);
    umb_session* session = nullptr;
    int rc = umb_session_create(buffer.str().c_str(), overrides.c_str(), &session);
    if (rc != UMB_OK) {
        std::fprintf(stderr, "umbilic: %s\n", umb_last_error(nullptr));
        return rc;
    }

    rc = umb_session_run(session);
    if (rc != UMB_OK && rc != UMB_ERR_COMPUTE) {
        std::fprintf(stderr, "umbilic: %s\n", umb_last_error(session));
        umb_session_destroy(session);
        return rc;
    }
    if (rc == UMB_ERR_COMPUTE)
        std::fprintf(stderr, "umbilic: %s\n", umb_last_error(session));

    std::error_code ec;
    fs::create_directories(args.out_dir, ec);

    char* report = nullptr;
    int fetch = umb_session_report(session, &report);
    if (fetch != UMB_OK) {
        std::fprintf(stderr, "umbilic: %s\n", umb_last_error(session));
        umb_session_destroy(session);
        return UMB_ERR_COMPUTE;
    }
    fs::path report_path = fs::path(args.out_dir) / umb_session_report_name(session);
    bool wrote = write_file(report_path, report);
    umb_string_free(report);
    if (!wrote) {
        std::fprintf(stderr, "umbilic: cannot write '%s'\n", report_path.string().c_str());
        umb_session_destroy(session);
        return UMB_ERR_COMPUTE;
    }
    if (!args.quiet) std::printf("wrote %s\n", report_path.string().c_str());

    for (int i = 0; i < umb_session_artifact_count(session); ++i) {
        char* content = nullptr;
        if (umb_session_artifact_content(session, i, &content) != UMB_OK) continue;
        fs::path artifact_path = fs::path(args.out_dir) / umb_session_artifact_name(session, i);
        bool ok = write_file(artifact_path, content);
        umb_string_free(content);
        if (!ok) {
            std::fprintf(stderr, "umbilic: cannot write '%s'\n",
                         artifact_path.string().c_str());
            umb_session_destroy(session);
            return UMB_ERR_COMPUTE;
        }
        if (!args.quiet) std::printf("wrote %s\n", artifact_path.string().c_str());
    }

    umb_session_destroy(session);
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Principal-curvature configurations of smooth surfaces"};
    app.set_version_flag("--version", umb_version());
    app.require_subcommand(1);

    CliArgs args;
    for (const char* mode : {"analyze", "portrait", "sweep", "cycles"}) {
        CLI::App* sub = app.add_subcommand(mode);
        sub->add_option("--config", args.config_path, "JSON configuration file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", args.out_dir, "Output directory (default: .)");
        sub->add_option("--tol-umbilic", args.tol_umbilic, "Override tolerances.umbilic");
        sub->add_option("--lambda-range", args.lambda_range,
                        "Override lambda_range as lo:hi:samples");
        sub->add_option("--seed-grid", args.seed_grid, "Override seed_grid");
        sub->add_flag("--quiet", args.quiet, "Suppress the written-file summary");
        sub->callback([&args, mode] { args.mode = mode; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return UMB_ERR_CONFIG;
    }

    try {
        return run_session(args);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return UMB_ERR_CONFIG;
    }
}
