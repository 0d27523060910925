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

#include "umbilic.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "report.hpp"

using nlohmann::json;

struct umb_session {
    umb::AnalysisConfig config;
    umb::RunResult result;
    bool ran = false;
    std::string last_error;
};

namespace {

std::string g_create_error;

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

int status_for(const umb::Error& e) {
    switch (e.kind()) {
    case umb::ErrorKind::kSyntax:
    case umb::ErrorKind::kConfig: return UMB_ERR_CONFIG;
    default: return UMB_ERR_COMPUTE;
    }
}

} // namespace

extern "C" {

const char* umb_version(void) { return umb::kToolVersion; }

int umb_session_create(const char* config_json, const char* overrides_json, umb_session** out) {
    if (out) *out = nullptr;
    if (!config_json || !out) {
        g_create_error = "config_json and out must be non-null";
        return UMB_ERR_CONFIG;
    }
    try {
        std::string text = config_json;
        if (overrides_json && *overrides_json) {
            json base = json::parse(text);
            json patch = json::parse(overrides_json);
            base.merge_patch(patch);
            text = base.dump();
        }
        auto* session = new umb_session;
        session->config = umb::parse_config(text);
        g_create_error.clear();
        *out = session;
        return UMB_OK;
    } catch (const umb::Error& e) {
        g_create_error = e.what();
        return status_for(e);
    } catch (const json::exception& e) {
        g_create_error = std::string("config is not valid JSON: ") + e.what();
        return UMB_ERR_CONFIG;
    }
}

void umb_session_destroy(umb_session* session) { delete session; }

int umb_session_run(umb_session* session) {
    if (!session) return UMB_ERR_CONFIG;
    session->last_error.clear();
    try {
        session->result = umb::run(session->config);
        session->ran = true;
        if (session->result.compute_error) {
            session->last_error = "one or more stages failed; see the report's error entries";
            return UMB_ERR_COMPUTE;
        }
        return UMB_OK;
    } catch (const umb::Error& e) {
        session->last_error = e.what();
        return status_for(e);
    }
}

int umb_session_report(umb_session* session, char** out_json) {
    if (out_json) *out_json = nullptr;
    if (!session || !out_json) return UMB_ERR_CONFIG;
    if (!session->ran) {
        session->last_error = "no report yet: run the session first";
        return UMB_ERR_CONFIG;
    }
    *out_json = copy_string(session->result.report_json);
    return *out_json ? UMB_OK : UMB_ERR_COMPUTE;
}

const char* umb_session_report_name(umb_session* session) {
    return session ? session->config.output.report.c_str() : "";
}

int umb_session_artifact_count(umb_session* session) {
    return session && session->ran ? static_cast<int>(session->result.artifacts.size()) : 0;
}

const char* umb_session_artifact_name(umb_session* session, int index) {
    if (!session || !session->ran || index < 0 ||
        index >= static_cast<int>(session->result.artifacts.size()))
        return "";
    return session->result.artifacts[index].name.c_str();
}

int umb_session_artifact_content(umb_session* session, int index, char** out) {
    if (out) *out = nullptr;
    if (!session || !out) return UMB_ERR_CONFIG;
    if (!session->ran || index < 0 ||
        index >= static_cast<int>(session->result.artifacts.size())) {
        if (session) session->last_error = "artifact index out of range";
        return UMB_ERR_CONFIG;
    }
    *out = copy_string(session->result.artifacts[index].content);
    return *out ? UMB_OK : UMB_ERR_COMPUTE;
}

const char* umb_last_error(const umb_session* session) {
    return session ? session->last_error.c_str() : g_create_error.c_str();
}

int umb_eval_expression(const char* expression, double u, double v, double lambda, double* out) {
    if (!expression || !out) return UMB_ERR_CONFIG;
    try {
        umb::ExprProgram program{umb::parse_expression(expression)};
        *out = program.eval(u, v, lambda);
        return UMB_OK;
    } catch (const umb::Error& e) {
        g_create_error = e.what();
        return status_for(e);
    }
}

int umb_classify_height_jet(const double derivs[15], char** out_json) {
    if (out_json) *out_json = nullptr;
    if (!derivs || !out_json) return UMB_ERR_CONFIG;
    try {
        umb::Jet2 h(umb::Jet2::kMaxOrder);
        int idx = 0;
        for (int order = 0; order <= umb::Jet2::kMaxOrder; ++order)
            for (int j = 0; j <= order; ++j) h.set_deriv(order - j, j, derivs[idx++]);
        umb::NormalizedJet jet = umb::normal_form_from_height(h);
        umb::UmbilicClass cls = umb::classify(jet);
        json rec;
        rec["label"] = umb::label_name(cls.label);
        rec["delta"] = std::isfinite(cls.delta) ? json(cls.delta) : json();
        rec["chi"] = std::isfinite(cls.chi) ? json(cls.chi) : json();
        rec["curvature"] = std::isfinite(jet.k) ? json(jet.k) : json();
        rec["transversal"] = cls.transversal;
        rec["tangent_stratum"] = cls.tangent_stratum;
        *out_json = copy_string(rec.dump());
        return *out_json ? UMB_OK : UMB_ERR_COMPUTE;
    } catch (const umb::Error& e) {
        g_create_error = e.what();
        return status_for(e);
    }
}

void umb_string_free(char* s) { std::free(s); }

} // extern "C"
