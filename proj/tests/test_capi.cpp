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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include <json.hpp>

#include "umbilic.h"

using nlohmann::json;

namespace {

const char* kCubicConfig = R"json({
    "mode": "analyze",
    "surface": {
        "kind": "monge",
        "h": "(u^2 + v^2)/2 + 0.5*u^3 + 0.5*u*v^2",
        "domain": [-0.4, 0.4, -0.4, 0.4]
    }
})json";

struct SessionGuard {
    umb_session* s = nullptr;
    ~SessionGuard() { umb_session_destroy(s); }
};

struct StringGuard {
    char* s = nullptr;
    ~StringGuard() { umb_string_free(s); }
};

} // namespace

TEST_CASE("the library reports a semver version") {
    std::string v = umb_version();
    CHECK(v == "0.1.0");
}

TEST_CASE("session creation validates the configuration") {
    SessionGuard bad;
    CHECK(umb_session_create(R"({"surface": 3})", nullptr, &bad.s) == UMB_ERR_CONFIG);
    CHECK(bad.s == nullptr);
    CHECK(std::string(umb_last_error(nullptr)).find("mode") != std::string::npos);

    CHECK(umb_session_create(nullptr, nullptr, nullptr) == UMB_ERR_CONFIG);

    SessionGuard good;
    REQUIRE(umb_session_create(kCubicConfig, nullptr, &good.s) == UMB_OK);
    REQUIRE(good.s != nullptr);
    CHECK(std::string(umb_last_error(nullptr)).empty());
    CHECK(std::string(umb_session_report_name(good.s)) == "report.json");
}

TEST_CASE("overrides are merged before validation") {
    SessionGuard s;
    REQUIRE(umb_session_create(kCubicConfig, R"({"grid": 32, "output": {"report": "out.json"}})",
                               &s.s) == UMB_OK);
    REQUIRE(umb_session_run(s.s) == UMB_OK);
    StringGuard report;
    REQUIRE(umb_session_report(s.s, &report.s) == UMB_OK);
    json doc = json::parse(report.s);
    CHECK(doc["config"]["grid"] == 32);
    CHECK(std::string(umb_session_report_name(s.s)) == "out.json");

    // An override that breaks validation fails creation.
    SessionGuard bad;
    CHECK(umb_session_create(kCubicConfig, R"({"grid": 4})", &bad.s) == UMB_ERR_CONFIG);
    CHECK(bad.s == nullptr);
}

TEST_CASE("a session runs and serves the report and artifacts") {
    SessionGuard s;
    REQUIRE(umb_session_create(R"json({
        "mode": "portrait",
        "surface": {
            "kind": "monge",
            "h": "(u^2 + v^2)/2 + 2*u^3/6 + u*v^2/2 + v^3/6",
            "domain": [-0.25, 0.25, -0.25, 0.25]
        },
        "line_grid": 0,
        "separatrix_length": 2.0,
        "output": {"svg": "portrait.svg"}
    })json",
                               nullptr, &s.s) == UMB_OK);

    StringGuard early;
    CHECK(umb_session_report(s.s, &early.s) == UMB_ERR_CONFIG);
    CHECK(std::string(umb_last_error(s.s)).find("run the session") != std::string::npos);

    REQUIRE(umb_session_run(s.s) == UMB_OK);
    StringGuard report;
    REQUIRE(umb_session_report(s.s, &report.s) == UMB_OK);
    json doc = json::parse(report.s);
    REQUIRE(doc["umbilics"].size() == 1);
    CHECK(doc["umbilics"][0]["label"] == "D12_case2");

    REQUIRE(umb_session_artifact_count(s.s) == 1);
    CHECK(std::string(umb_session_artifact_name(s.s, 0)) == "portrait.svg");
    StringGuard svg;
    REQUIRE(umb_session_artifact_content(s.s, 0, &svg.s) == UMB_OK);
    CHECK(std::string(svg.s).find("<svg xmlns") == 0);

    StringGuard out_of_range;
    CHECK(umb_session_artifact_content(s.s, 5, &out_of_range.s) == UMB_ERR_CONFIG);
    CHECK(std::string(umb_session_artifact_name(s.s, 5)).empty());
}

TEST_CASE("compute failures surface as status 3 with a partial report") {
    SessionGuard s;
    REQUIRE(umb_session_create(R"json({
        "mode": "analyze",
        "surface": {
            "kind": "monge",
            "h": "sqrt(1 - u^2 - v^2)",
            "domain": [-0.3, 0.3, -0.3, 0.3]
        }
    })json",
                               nullptr, &s.s) == UMB_OK);
    CHECK(umb_session_run(s.s) == UMB_ERR_COMPUTE);
    CHECK(std::string(umb_last_error(s.s)).find("error entries") != std::string::npos);
    StringGuard report;
    REQUIRE(umb_session_report(s.s, &report.s) == UMB_OK);
    json doc = json::parse(report.s);
    CHECK(doc["errors"].size() == 1);
}

TEST_CASE("expressions evaluate through the C boundary") {
    double out = 0.0;
    REQUIRE(umb_eval_expression("u^2 + lambda*v", 2.0, 3.0, 0.5, &out) == UMB_OK);
    CHECK(out == doctest::Approx(5.5));
    CHECK(umb_eval_expression("(u^2 +", 0.0, 0.0, 0.0, &out) == UMB_ERR_CONFIG);
    CHECK(umb_eval_expression(nullptr, 0.0, 0.0, 0.0, &out) == UMB_ERR_CONFIG);
}

TEST_CASE("height jets classify through the C boundary") {
    // (k, a, b, c) = (1, 3, 1, 0): the generic type with delta = 1.
    double derivs[15] = {0, 0, 0, 1, 0, 1, 3, 0, 1, 0, 0, 0, 0, 0, 0};
    StringGuard rec;
    REQUIRE(umb_classify_height_jet(derivs, &rec.s) == UMB_OK);
    json doc = json::parse(rec.s);
    CHECK(doc["label"] == "D1");
    CHECK(doc["delta"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(doc["curvature"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(doc["transversal"] == true);

    StringGuard none;
    CHECK(umb_classify_height_jet(nullptr, &none.s) == UMB_ERR_CONFIG);
    CHECK(none.s == nullptr);
}
